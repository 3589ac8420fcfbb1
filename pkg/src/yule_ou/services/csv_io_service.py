import logging
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np
import orjson
import pandas as pd

from yule_ou.common.exceptions import InvalidParameterError, NonuniformGridError
from yule_ou.configurations.config import settings
from yule_ou.models.mc_summary import Ecdf, Histogram, McSample
from yule_ou.models.path_pair import PathPair
from yule_ou.models.report import TableRow
from yule_ou.models.sample_grid import SampleGrid
from yule_ou.models.scheme import Scheme

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FLOAT_FORMAT = "%.17g"
MESH_TOLERANCE = 1e-9
STDOUT = "-"

_JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_APPEND_NEWLINE


def _config_json(config: dict[str, Any]) -> str:
    return orjson.dumps(
        config, option=orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY
    ).decode()


def provenance_line(seed: Optional[int], config: dict[str, Any]) -> str:
    seed_text = "none" if seed is None else str(seed)
    return f"# seed={seed_text}, version={settings.release}, config={_config_json(config)}"


def _emit(text: str, path: str) -> None:
    if path == STDOUT:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def write_csv(
    frame: pd.DataFrame, path: str, seed: Optional[int], config: dict[str, Any]
) -> None:
    body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    _emit(provenance_line(seed, config) + "\n" + body, path)


def write_json(
    document: dict[str, Any], path: str, seed: Optional[int], config: dict[str, Any]
) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "provenance": {"seed": seed, "version": settings.release, "config": config},
        **document,
    }
    _emit(orjson.dumps(payload, option=_JSON_OPTIONS).decode(), path)


def export_path_pair(pair: PathPair, path: str, config: dict[str, Any]) -> None:
    frame = pd.DataFrame({"t": pair.grid.times, "x1": pair.x1, "x2": pair.x2})
    write_csv(frame, path, pair.seed, config)


def export_path_pairs(
    pairs: dict[float, PathPair], path: str, config: dict[str, Any]
) -> None:
    """Several pairs in long format: theta,t,x1,x2."""
    frame = pd.concat(
        [
            pd.DataFrame(
                {"theta": theta, "t": pair.grid.times, "x1": pair.x1, "x2": pair.x2}
            )
            for theta, pair in pairs.items()
        ],
        ignore_index=True,
    )
    write_csv(frame, path, config.get("seed"), config)


def _mesh_tolerance(t: np.ndarray, delta: float) -> float:
    # differences of stored times carry about one ulp of the largest |t|
    round_off = 8.0 * np.finfo(np.float64).eps * float(np.max(np.abs(t))) / delta
    return max(MESH_TOLERANCE, round_off)


def read_path_pair(path: str) -> PathPair:
    """Ingest a ``t,x1,x2`` CSV sampled on a uniform grid."""
    try:
        frame = pd.read_csv(path, comment="#", float_precision="round_trip")
    except pd.errors.EmptyDataError as e:
        raise InvalidParameterError(f"{path}: no data") from e
    except pd.errors.ParserError as e:
        raise InvalidParameterError(f"{path}: unreadable CSV: {e}") from e
    missing = {"t", "x1", "x2"} - set(frame.columns)
    if missing:
        raise InvalidParameterError(f"{path}: missing columns {sorted(missing)}")
    try:
        columns = frame[["t", "x1", "x2"]].to_numpy(dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise InvalidParameterError(f"{path}: non-numeric value: {e}") from e
    if np.isnan(columns).any():
        raise InvalidParameterError(f"{path}: missing values are not supported")

    t, x1, x2 = columns.T
    n = t.size - 1
    if n < 2:
        raise InvalidParameterError(f"{path}: need at least 3 samples, got {t.size}")
    delta = (t[-1] - t[0]) / n
    if not delta > 0:
        raise NonuniformGridError(f"{path}: times must increase")
    tolerance = _mesh_tolerance(t, delta)
    deviation = float(np.max(np.abs(np.diff(t) - delta)) / delta)
    if deviation > tolerance:
        raise NonuniformGridError(
            f"{path}: relative mesh deviation {deviation:.3g} exceeds {tolerance:.3g}"
        )

    return PathPair(
        grid=SampleGrid(n=n, delta=delta, t0=float(t[0])),
        x1=np.ascontiguousarray(x1),
        x2=np.ascontiguousarray(x2),
        scheme=Scheme.OBSERVED,
        x0=None,
    )


def write_mc_sample(
    sample: McSample, path: str, seed: int, config: dict[str, Any]
) -> None:
    frame = pd.DataFrame({"replication": sample.replications, "value": sample.values})
    write_csv(frame, path, seed, config)


def write_table(
    rows: list[TableRow], path: str, seed: int, config: dict[str, Any]
) -> None:
    frame = pd.DataFrame([row.model_dump() for row in rows])
    write_csv(frame, path, seed, config)


def write_ecdf(curve: Ecdf, path: str, seed: int, config: dict[str, Any]) -> None:
    write_csv(pd.DataFrame({"x": curve.x, "F": curve.fractions}), path, seed, config)


def write_histogram(
    bars: Histogram, path: str, seed: int, config: dict[str, Any]
) -> None:
    frame = pd.DataFrame(
        {
            "bin_left": bars.edges[:-1],
            "bin_right": bars.edges[1:],
            "count": bars.counts,
        }
    )
    write_csv(frame, path, seed, config)
