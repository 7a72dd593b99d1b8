"""Interest-selection strategies and prefix audience walks.

Two strategies order a user's interests for incremental targeting:

* ``lp``     rarest first: ascending global audience, ties broken by
             ascending interest id.
* ``random`` a uniform random permutation prefix, drawn without
             replacement. The permutation is a pure function of
             (strategy seed, user id), so results do not depend on
             iteration or scheduling order.

Both entry points canonicalize candidates the same way (ascending
interest id), so a profile object and a storage row yield identical
selections.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import CensorPolicy, InvertedIndex, MAX_QUERY_INTERESTS, intersect_sorted, reported_size
from .errors import DataFormatError
from .population import Catalog, Population, UserProfile
from .runtime import derived_rng

LEAST_POPULAR = "lp"
RANDOM = "random"
STRATEGY_KINDS = (LEAST_POPULAR, RANDOM)


@dataclass(frozen=True)
class SelectionStrategy:
    kind: str
    seed: int = 0
    n_max: int = MAX_QUERY_INTERESTS

    def __post_init__(self) -> None:
        if self.kind not in STRATEGY_KINDS:
            raise DataFormatError(f"unknown strategy kind {self.kind!r}")
        if not 1 <= self.n_max <= MAX_QUERY_INTERESTS:
            raise DataFormatError(f"n_max must be in 1..{MAX_QUERY_INTERESTS}, got {self.n_max}")
        if self.seed < 0:
            raise DataFormatError("strategy seed must be non-negative")


def selection_order(ids: np.ndarray, audiences: np.ndarray, user_id: int,
                    strategy: SelectionStrategy) -> np.ndarray:
    """Indices that order candidate interests per strategy (len <= n_max).

    ``ids`` and ``audiences`` are parallel arrays of the user's candidate
    interests; the result indexes into them.
    """
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size == 0:
        raise DataFormatError("cannot select from an empty interest set")
    if strategy.kind == LEAST_POPULAR:
        return np.lexsort((ids, audiences))[:strategy.n_max]
    canonical = np.argsort(ids, kind="stable")
    take = min(strategy.n_max, ids.size)
    rng = derived_rng(strategy.seed, user_id)
    return canonical[rng.choice(ids.size, size=take, replace=False)]


def select_interests(profile: UserProfile, catalog: Catalog,
                     strategy: SelectionStrategy) -> list[int]:
    """Ordered interest ids for one user under a strategy."""
    ids = np.fromiter(sorted(profile.interests), count=len(profile.interests), dtype=np.int64)
    audiences = np.asarray([catalog.audience_of(int(i)) for i in ids], dtype=np.int64)
    order = selection_order(ids, audiences, profile.user_id, strategy)
    return [int(i) for i in ids[order]]


def ordered_positions_for_row(pop: Population, row: int,
                              strategy: SelectionStrategy) -> np.ndarray:
    """Row-level fast path: ordered catalog positions for a storage row."""
    positions = pop.row_positions(row)
    ids = pop.catalog.interest_ids[positions]
    order = selection_order(ids, pop.catalog.audiences[positions],
                            int(pop.user_ids[row]), strategy)
    return positions[order].astype(np.int64)


@dataclass(frozen=True)
class PrefixAudiences:
    """Censored audience sizes of each prefix of an ordered interest list."""

    user_id: int
    ordered_interests: tuple[int, ...]
    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.sizes) != len(self.ordered_interests):
            raise DataFormatError("sizes and interests must align")
        if any(a < b for a, b in zip(self.sizes, self.sizes[1:])):
            raise DataFormatError("prefix sizes must be non-increasing")


def prefix_true_sizes(index: InvertedIndex, ordered_positions: np.ndarray,
                      row_mask: np.ndarray | None = None,
                      holder_row: int | None = None) -> np.ndarray:
    """Uncensored audience count of every prefix, walked incrementally.

    ``holder_row``: a storage row known to hold every listed interest
    (walks rooted in that user's own profile). The holder survives every
    intersection, so once the prefix audience is exactly one row it is the
    holder and stays size 1; the walk stops early. Not applied when a
    ``row_mask`` is given, since the mask may exclude the holder.
    """
    cand: np.ndarray | None = None
    n = len(ordered_positions)
    sizes = np.empty(n, dtype=np.int64)
    for k in range(n):
        posting = index.postings[int(ordered_positions[k])]
        if cand is None:
            cand = posting[row_mask[posting]] if row_mask is not None else posting
        else:
            cand = intersect_sorted(cand, posting)
        sizes[k] = cand.size
        if cand.size == 0:
            sizes[k:] = 0
            break
        if cand.size == 1 and holder_row is not None and row_mask is None:
            sizes[k:] = 1
            break
    return sizes


def prefix_audiences(index: InvertedIndex, user_id: int, ordered_ids,
                     policy: CensorPolicy,
                     demographic_filter=None) -> PrefixAudiences:
    """Censored audience size of each prefix of ``ordered_ids``.

    The list is taken in the given order (it is a strategy output, not a
    free-form query), so sizes come from one incremental walk.
    """
    ordered = [int(i) for i in ordered_ids]
    if not ordered:
        raise DataFormatError("ordered interest list is empty")
    if len(ordered) > MAX_QUERY_INTERESTS:
        raise DataFormatError(f"at most {MAX_QUERY_INTERESTS} interests per walk")
    if len(set(ordered)) != len(ordered):
        raise DataFormatError("ordered interest list contains duplicates")
    cat = index.population.catalog
    positions = np.asarray([cat.position(i) for i in ordered], dtype=np.int64)
    mask = demographic_filter.mask(index.population) if demographic_filter is not None else None
    true_sizes = prefix_true_sizes(index, positions, mask)
    return PrefixAudiences(
        user_id=user_id,
        ordered_interests=tuple(ordered),
        sizes=tuple(reported_size(int(s), policy) for s in true_sizes),
    )
