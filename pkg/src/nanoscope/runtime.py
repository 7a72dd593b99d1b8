"""Runtime knobs: worker-pool sizing and deterministic RNG derivation."""

from __future__ import annotations

import os

import numpy as np

THREADS_ENV_VAR = "NANOSCOPE_THREADS"


def worker_count(explicit: int | None = None) -> int:
    """Resolve how many worker threads to use.

    Priority: an explicit positive argument, then the NANOSCOPE_THREADS
    environment variable (0 means auto-detect), then the CPU count.
    """
    if explicit is not None:
        if explicit < 0:
            raise ValueError("worker count must be >= 0")
        if explicit > 0:
            return explicit
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is not None and raw.strip():
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}") from exc
        if value < 0:
            raise ValueError(f"{THREADS_ENV_VAR} must be >= 0, got {value}")
        if value > 0:
            return value
    return os.cpu_count() or 1


def derived_rng(*keys: int) -> np.random.Generator:
    """Deterministic generator for a tuple of non-negative integer keys.

    Sub-streams derived from the same keys are identical regardless of how
    work is split across workers, which keeps resampling and per-user
    selection reproducible under any parallel schedule.
    """
    for k in keys:
        if k < 0:
            raise ValueError("rng derivation keys must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(keys)))
