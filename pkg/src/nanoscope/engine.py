"""Exact audience counting over an inverted interest index.

Postings are sorted numpy arrays of user row numbers. Multi-interest
queries intersect postings smallest-first with early exit, so the cost is
bounded by the rarest interest in the query. All counts are exact; the
reporting floor is applied only at the boundary via ``reported_size``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, UnknownEntityError
from .population import DemographicFilter, Population

MAX_QUERY_INTERESTS = 25

# Reporting floors seen in the wild: 1 = uncensored, 20 = the long-running
# historical floor, 100 = a later workaround value, 1000 = the current one.
FLOOR_PRESETS = (1, 20, 100, 1000)


@dataclass(frozen=True)
class CensorPolicy:
    """Reporting floor applied to externally visible audience sizes."""

    floor: int = 1

    def __post_init__(self) -> None:
        if self.floor < 1:
            raise DataFormatError(f"floor must be >= 1, got {self.floor}")


def reported_size(true_count: int, policy: CensorPolicy) -> int:
    """Externally visible size: true count, never below the floor."""
    if true_count < 0:
        raise DataFormatError("true_count must be non-negative")
    return max(true_count, policy.floor)


@dataclass(frozen=True)
class AudienceQuery:
    """A conjunction of 1..25 interests, optionally demographically filtered."""

    interests: frozenset[int]
    demographic_filter: DemographicFilter | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "interests", frozenset(self.interests))
        if not self.interests:
            raise DataFormatError("query needs at least one interest")
        if len(self.interests) > MAX_QUERY_INTERESTS:
            raise DataFormatError(
                f"query has {len(self.interests)} interests; the maximum is {MAX_QUERY_INTERESTS}"
            )


@dataclass(frozen=True)
class AudienceMembers:
    user_ids: frozenset[int]
    truncated: bool


def intersect_sorted(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Intersection of two ascending arrays, ascending result."""
    if a.size > b.size:
        a, b = b, a
    if a.size == 0:
        return a
    idx = np.searchsorted(b, a)
    idx[idx == b.size] = b.size - 1
    return a[b[idx] == a]


class InvertedIndex:
    """Interest -> sorted user rows, bound to one population."""

    __slots__ = ("population", "postings")

    def __init__(self, population: Population, postings: list[np.ndarray]):
        self.population = population
        self.postings = postings

    @classmethod
    def build(cls, population: Population) -> "InvertedIndex":
        n_interests = population.n_interests
        cols = population.indices
        counts = np.bincount(cols, minlength=n_interests)
        offsets = np.concatenate(([0], np.cumsum(counts)))
        # Rows are laid out user-by-user, so a stable sort on the interest
        # column leaves each posting already in ascending row order.
        order = np.argsort(cols, kind="stable")
        rows = np.repeat(
            np.arange(population.n_users, dtype=np.int64), population.interest_counts()
        ).astype(np.int32)[order]
        postings = [rows[offsets[i]:offsets[i + 1]] for i in range(n_interests)]
        return cls(population, postings)

    @property
    def total_postings(self) -> int:
        return sum(p.size for p in self.postings)

    def posting(self, interest_id: int) -> np.ndarray:
        return self.postings[self.population.catalog.position(interest_id)]

    # -- queries -------------------------------------------------------------

    def _positions_for(self, query: AudienceQuery) -> list[int]:
        cat = self.population.catalog
        return [cat.position(i) for i in query.interests]

    def rows_for_positions(self, positions) -> np.ndarray:
        """Exact matching rows for a conjunction of catalog positions."""
        posts = sorted((self.postings[p] for p in positions), key=len)
        cand = posts[0]
        for p in posts[1:]:
            if cand.size == 0:
                break
            cand = intersect_sorted(cand, p)
        return cand

    def audience_rows(self, query: AudienceQuery) -> np.ndarray:
        rows = self.rows_for_positions(self._positions_for(query))
        if query.demographic_filter is not None and rows.size:
            mask = query.demographic_filter.mask(self.population)
            rows = rows[mask[rows]]
        return rows

    def audience_size(self, query: AudienceQuery) -> int:
        return int(self.audience_rows(query).size)

    def audience_members(self, query: AudienceQuery, cap: int | None = None) -> AudienceMembers:
        if cap is not None and cap < 0:
            raise DataFormatError("cap must be non-negative")
        rows = self.audience_rows(query)
        truncated = cap is not None and rows.size > cap
        if truncated:
            rows = rows[:cap]
        ids = frozenset(int(u) for u in self.population.user_ids[rows])
        return AudienceMembers(user_ids=ids, truncated=truncated)


def audience_size(index: InvertedIndex, query: AudienceQuery,
                  policy: CensorPolicy | None = None) -> int:
    """True audience count, or the censored size when a policy is given."""
    true_count = index.audience_size(query)
    if policy is None:
        return true_count
    return reported_size(true_count, policy)


def brute_force_audience_size(population: Population, query: AudienceQuery) -> int:
    """Reference implementation: scan every user's interest set.

    Deliberately has nothing in common with the index path so it can serve
    as an equivalence oracle.
    """
    wanted = set(query.interests)
    for iid in wanted:
        if iid not in population.catalog:
            raise UnknownEntityError(f"unknown interest {iid}")
    flt = query.demographic_filter
    count = 0
    for row in range(population.n_users):
        profile = population.profile_at(row)
        if not wanted <= profile.interests:
            continue
        if flt is not None:
            d = profile.demographics
            if flt.gender is not None and d.gender != flt.gender:
                continue
            if flt.age_range is not None:
                lo, hi = flt.age_range
                if d.age_years is None or d.age_years < lo:
                    continue
                if hi is not None and d.age_years > hi:
                    continue
            if flt.country is not None and d.country != flt.country:
                continue
        count += 1
    return count
