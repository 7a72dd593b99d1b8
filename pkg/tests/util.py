"""Hand-built populations for tests.

``build_population`` constructs the columnar form directly from a
uid -> interest-ids mapping, with realized audiences, so tests can pin
exact audience counts without going through files or the generator.
"""

from __future__ import annotations

import numpy as np

from nanoscope.population import (
    Catalog,
    GENDER_CODES,
    GENDERS,
    IngestedProvenance,
    Population,
)


def build_population(
    profiles: dict[int, tuple[int, ...] | list[int]],
    *,
    interest_ids: list[int] | None = None,
    names: dict[int, str] | None = None,
    genders: dict[int, str] | None = None,
    ages: dict[int, int] | None = None,
    countries: dict[int, str] | None = None,
    country_labels: tuple[str, ...] = ("US",),
) -> Population:
    if interest_ids is None:
        interest_ids = sorted({i for ids in profiles.values() for i in ids})
    position = {iid: k for k, iid in enumerate(interest_ids)}
    names = names or {}
    genders = genders or {}
    ages = ages or {}
    countries = countries or {}
    country_pos = {c: k for k, c in enumerate(country_labels)}

    uids = sorted(profiles)
    indptr = [0]
    indices: list[int] = []
    for uid in uids:
        row = sorted(position[i] for i in set(profiles[uid]))
        indices.extend(row)
        indptr.append(len(indices))

    audiences = np.bincount(
        np.asarray(indices, dtype=np.int64), minlength=len(interest_ids)
    )
    catalog = Catalog(
        interest_ids=np.asarray(interest_ids, dtype=np.int64),
        names=tuple(names.get(iid, f"interest-{iid}") for iid in interest_ids),
        audiences=audiences.astype(np.int64),
    )
    def gender_code(u: int) -> int:
        g = genders.get(u, "male")
        return GENDERS.index(GENDER_CODES.get(g, g))

    def country_code(u: int) -> int:
        c = countries.get(u, None)
        return -1 if c is None else country_pos[c]

    def age_code(u: int) -> int:
        a = ages.get(u, None)
        return -1 if a is None else a

    return Population(
        catalog=catalog,
        user_ids=np.asarray(uids, dtype=np.int64),
        genders=np.asarray([gender_code(u) for u in uids], dtype=np.int8),
        ages=np.asarray([age_code(u) for u in uids], dtype=np.int16),
        countries=np.asarray([country_code(u) for u in uids], dtype=np.int16),
        country_labels=country_labels,
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int32),
        provenance=IngestedProvenance(source_digest="test"),
    )


def toy3() -> Population:
    """Three users over interests a=1 (aud 3), b=2 (aud 2), c=3 (aud 1).

    u1 holds {a, b}, u2 {a}, u3 {a, b, c}; only u3 is reachable exactly.
    """
    return build_population(
        {1: (1, 2), 2: (1,), 3: (1, 2, 3)},
        names={1: "a", 2: "b", 3: "c"},
    )


def unique_at_three_toy() -> Population:
    """u3 needs all three of its interests to be unique.

    All audiences tie at 3, so audience order falls back to id order
    [a, b, c] and u3's prefixes shrink 3 -> 2 -> 1.
    """
    return build_population(
        {1: (1, 2), 2: (2, 3), 3: (1, 2, 3), 4: (1, 3)},
        names={1: "a", 2: "b", 3: "c"},
    )


def all_unique_toy(n_users: int = 4) -> Population:
    """Every user holds two shared interests plus one globally unique one."""
    shared = (1, 2)
    return build_population(
        {u: shared + (2 + u,) for u in range(1, n_users + 1)}
    )


def make_matrix(rows, *, floor: int = 1, kind: str = "lp", seed: int = 0):
    """Audience matrix with explicit per-user prefix sizes.

    Bypasses populations entirely so quantile and fit behavior can be
    pinned against hand-written columns. Row r's interests are dummy
    positions 0..len-1.
    """
    from nanoscope import CensorPolicy, SelectionStrategy
    from nanoscope.estimator import AudienceMatrix

    n_max = max(len(r) for r in rows)
    n = len(rows)
    lengths = np.asarray([len(r) for r in rows], dtype=np.int32)
    true_sizes = np.zeros((n, n_max), dtype=np.int32)
    interests = np.full((n, n_max), -1, dtype=np.int32)
    for i, r in enumerate(rows):
        true_sizes[i, : len(r)] = r
        interests[i, : len(r)] = np.arange(len(r))
    return AudienceMatrix(
        strategy=SelectionStrategy(kind=kind, seed=seed, n_max=n_max),
        policy=CensorPolicy(floor=floor),
        user_ids=np.arange(1, n + 1, dtype=np.int64),
        lengths=lengths,
        interests=interests,
        true_sizes=true_sizes,
    )
