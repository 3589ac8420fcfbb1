from enum import Enum


class Scheme(str, Enum):
    EXACT = "exact"
    EULER = "euler"
    OBSERVED = "observed"
