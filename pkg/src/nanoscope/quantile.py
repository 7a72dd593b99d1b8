"""Nearest-rank quantiles.

The Q-th percentile of n ascending-sorted samples is the value at 1-based
rank ceil(Q/100 * n). No interpolation is ever applied; reported quantiles
are always values that actually occur in the sample.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DataFormatError


def nearest_rank_index(q: float, n: int) -> int:
    """0-based index of the Q-th percentile among n sorted samples."""
    if n <= 0:
        raise DataFormatError("quantile of an empty sample")
    if not 0 < q < 100:
        raise DataFormatError(f"quantile must be in (0, 100), got {q}")
    # Round first so that ranks that are exact integers in real arithmetic
    # (e.g. 95 * 20 / 100) are not bumped up by float noise.
    rank = math.ceil(round(q * n / 100.0, 9))
    return max(rank, 1) - 1


def nearest_rank(values: np.ndarray, q: float) -> float:
    """Q-th percentile (nearest-rank) of an unsorted sample."""
    arr = np.asarray(values)
    if arr.size == 0:
        raise DataFormatError("quantile of an empty sample")
    return float(np.partition(arr, nearest_rank_index(q, arr.size))[nearest_rank_index(q, arr.size)])
