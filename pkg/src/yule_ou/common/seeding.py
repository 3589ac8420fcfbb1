"""Counter-based seed derivation.

Every random draw in the package is a pure function of a 64-bit seed and a
small tuple of counters, so results never depend on thread scheduling or on
the number of workers. The mixing is numpy's ``SeedSequence`` hash.
"""

import numpy as np

from yule_ou.common.exceptions import InvalidParameterError

SEED_LIMIT = 2**64


def validate_seed(seed: int) -> int:
    if not 0 <= int(seed) < SEED_LIMIT:
        raise InvalidParameterError(f"seed must be an unsigned 64-bit integer: {seed}")
    return int(seed)


def derive_seed(master_seed: int, *counters: int) -> int:
    """Mix a master seed with counters into an independent 64-bit seed."""
    sequence = np.random.SeedSequence(
        validate_seed(master_seed), spawn_key=tuple(int(c) for c in counters)
    )
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def stream(seed: int, *counters: int) -> np.random.Generator:
    sequence = np.random.SeedSequence(
        validate_seed(seed), spawn_key=tuple(int(c) for c in counters)
    )
    return np.random.Generator(np.random.PCG64(sequence))


def path_stream(seed: int, path_index: int) -> np.random.Generator:
    # path_index 0 drives x1, 1 drives x2
    return stream(seed, path_index)
