"""User populations: interest catalogs, demographics, and subgroup views.

A Population is stored column-wise (numpy arrays plus a CSR layout for the
user->interest incidence) so that million-user populations stay cheap to
hold and to query. Row-oriented ``UserProfile`` objects are materialized
on demand through a lazy sequence view.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataFormatError, UnknownEntityError

MALE = "male"
FEMALE = "female"
UNDISCLOSED = "undisclosed"
GENDERS = (MALE, FEMALE, UNDISCLOSED)

# Gender codes used in serialized user records.
GENDER_CODES = {"m": MALE, "f": FEMALE, "u": UNDISCLOSED}
GENDER_TO_CODE = {v: k for k, v in GENDER_CODES.items()}

MIN_AGE_YEARS = 13

# Life-stage bands: (label, low, high); high is inclusive, None = open-ended.
AGE_BANDS = (
    ("adolescence", 13, 19),
    ("early-adulthood", 20, 39),
    ("adulthood", 40, 64),
    ("maturity", 65, None),
)


def age_band(age_years: int | None) -> str | None:
    """Label of the life-stage band containing ``age_years`` (None if unknown)."""
    if age_years is None:
        return None
    for label, low, high in AGE_BANDS:
        if age_years >= low and (high is None or age_years <= high):
            return label
    return None


@dataclass(frozen=True)
class Demographics:
    """Optional demographic attributes of a user.

    Any field may be missing; a missing field never matches a demographic
    filter that constrains it.
    """

    gender: str = UNDISCLOSED
    age_years: int | None = None
    country: str | None = None

    def __post_init__(self) -> None:
        if self.gender not in GENDERS:
            raise DataFormatError(f"unknown gender {self.gender!r}")
        if self.age_years is not None and self.age_years < MIN_AGE_YEARS:
            raise DataFormatError(
                f"age {self.age_years} below the platform minimum of {MIN_AGE_YEARS}"
            )
        if self.country is not None:
            if len(self.country) != 2 or not self.country.isalpha() or not self.country.isupper():
                raise DataFormatError(f"country must be a 2-letter uppercase code, got {self.country!r}")


@dataclass(frozen=True)
class UserProfile:
    user_id: int
    demographics: Demographics
    interests: frozenset[int]

    def __post_init__(self) -> None:
        if self.user_id < 0:
            raise DataFormatError(f"user_id must be non-negative, got {self.user_id}")
        if not self.interests:
            raise DataFormatError(f"user {self.user_id} has an empty interest set")


@dataclass(frozen=True)
class InterestRecord:
    interest_id: int
    name: str
    global_audience: int


class Catalog:
    """Immutable table of targetable interests.

    Positions (dense 0..n-1 indices) are the internal currency; raw
    interest ids are the external one. ``global_audience`` counts are the
    realized audiences in the owning population's full universe.
    """

    __slots__ = ("interest_ids", "names", "audiences", "_pos")

    def __init__(self, interest_ids: np.ndarray, names: tuple[str, ...], audiences: np.ndarray):
        ids = np.asarray(interest_ids, dtype=np.int64)
        if ids.ndim != 1:
            raise DataFormatError("interest_ids must be one-dimensional")
        if len(names) != ids.size or np.asarray(audiences).size != ids.size:
            raise DataFormatError("catalog columns must have equal length")
        if ids.size and ids.min() < 0:
            raise DataFormatError("interest ids must be non-negative")
        if np.unique(ids).size != ids.size:
            raise DataFormatError("duplicate interest ids in catalog")
        ids.setflags(write=False)
        self.interest_ids = ids
        self.names = tuple(names)
        aud = np.asarray(audiences, dtype=np.int64).copy()
        aud.setflags(write=False)
        self.audiences = aud
        self._pos: dict[int, int] = {int(v): i for i, v in enumerate(ids)}

    def __len__(self) -> int:
        return self.interest_ids.size

    def __contains__(self, interest_id: int) -> bool:
        return interest_id in self._pos

    def position(self, interest_id: int) -> int:
        try:
            return self._pos[interest_id]
        except KeyError:
            raise UnknownEntityError(f"unknown interest {interest_id}") from None

    def record(self, interest_id: int) -> InterestRecord:
        p = self.position(interest_id)
        return InterestRecord(interest_id, self.names[p], int(self.audiences[p]))

    def audience_of(self, interest_id: int) -> int:
        return int(self.audiences[self.position(interest_id)])


@dataclass(frozen=True)
class GeneratedProvenance:
    kind: str = field(default="generated", init=False)
    seed: int = 0
    config_digest: str = ""


@dataclass(frozen=True)
class IngestedProvenance:
    kind: str = field(default="ingested", init=False)
    source_digest: str = ""


Provenance = GeneratedProvenance | IngestedProvenance


class _UsersView(Sequence):
    """Lazy sequence of UserProfile rows over the columnar storage."""

    __slots__ = ("_pop",)

    def __init__(self, pop: "Population"):
        self._pop = pop

    def __len__(self) -> int:
        return self._pop.n_users

    def __getitem__(self, row):
        if isinstance(row, slice):
            return [self._pop.profile_at(i) for i in range(*row.indices(len(self)))]
        n = len(self)
        if row < 0:
            row += n
        if not 0 <= row < n:
            raise IndexError(row)
        return self._pop.profile_at(row)


class Population:
    """A catalog plus a set of users, stored column-wise.

    ``indices`` holds catalog positions sorted ascending within each user's
    CSR row. ``full_universe`` is False for subgroup views, whose catalog
    audiences intentionally remain those of the parent population.
    """

    __slots__ = (
        "catalog", "user_ids", "genders", "ages", "countries", "country_labels",
        "indptr", "indices", "provenance", "full_universe", "_row_of",
    )

    def __init__(
        self,
        catalog: Catalog,
        user_ids: np.ndarray,
        genders: np.ndarray,
        ages: np.ndarray,
        countries: np.ndarray,
        country_labels: tuple[str, ...],
        indptr: np.ndarray,
        indices: np.ndarray,
        provenance: Provenance,
        full_universe: bool = True,
    ):
        self.catalog = catalog
        self.user_ids = np.asarray(user_ids, dtype=np.int64)
        self.genders = np.asarray(genders, dtype=np.int8)
        self.ages = np.asarray(ages, dtype=np.int16)
        self.countries = np.asarray(countries, dtype=np.int16)
        self.country_labels = tuple(country_labels)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int32)
        self.provenance = provenance
        self.full_universe = full_universe
        self._row_of: dict[int, int] | None = None
        n = self.user_ids.size
        if not (self.genders.size == self.ages.size == self.countries.size == n):
            raise DataFormatError("demographic columns must match user count")
        if self.indptr.size != n + 1:
            raise DataFormatError("indptr must have n_users + 1 entries")
        if n and np.unique(self.user_ids).size != n:
            raise DataFormatError("duplicate user ids")

    # -- shape ---------------------------------------------------------------

    @property
    def n_users(self) -> int:
        return self.user_ids.size

    @property
    def n_interests(self) -> int:
        return len(self.catalog)

    @property
    def total_occurrences(self) -> int:
        return self.indices.size

    @property
    def users(self) -> Sequence:
        return _UsersView(self)

    # -- row access ----------------------------------------------------------

    def row_positions(self, row: int) -> np.ndarray:
        """Catalog positions of one user's interests (ascending)."""
        return self.indices[self.indptr[row]:self.indptr[row + 1]]

    def interest_counts(self) -> np.ndarray:
        return np.diff(self.indptr)

    def row_of_user(self, user_id: int) -> int:
        if self._row_of is None:
            self._row_of = {int(u): i for i, u in enumerate(self.user_ids)}
        try:
            return self._row_of[user_id]
        except KeyError:
            raise UnknownEntityError(f"unknown user {user_id}") from None

    def demographics_at(self, row: int) -> Demographics:
        age = int(self.ages[row])
        country_code = int(self.countries[row])
        return Demographics(
            gender=GENDERS[self.genders[row]],
            age_years=age if age >= 0 else None,
            country=self.country_labels[country_code] if country_code >= 0 else None,
        )

    def profile_at(self, row: int) -> UserProfile:
        positions = self.row_positions(row)
        ids = frozenset(int(i) for i in self.catalog.interest_ids[positions])
        return UserProfile(int(self.user_ids[row]), self.demographics_at(row), ids)

    def profile_of(self, user_id: int) -> UserProfile:
        return self.profile_at(self.row_of_user(user_id))


@dataclass(frozen=True)
class DemographicFilter:
    """Predicate over gender, age range, and country.

    ``age_range`` is an inclusive (low, high) pair; high may be None for an
    open-ended band. Users missing a constrained attribute never match.
    """

    gender: str | None = None
    age_range: tuple[int, int | None] | None = None
    country: str | None = None

    def __post_init__(self) -> None:
        if self.gender is not None and self.gender not in GENDERS:
            raise DataFormatError(f"unknown gender {self.gender!r}")
        if self.age_range is not None:
            low, high = self.age_range
            if high is not None and high < low:
                raise DataFormatError(f"empty age range {self.age_range}")

    @classmethod
    def for_age_band(cls, label: str) -> "DemographicFilter":
        for band, low, high in AGE_BANDS:
            if band == label:
                return cls(age_range=(low, high))
        raise DataFormatError(f"unknown age band {label!r}")

    def mask(self, pop: Population) -> np.ndarray:
        """Boolean row mask of users matching this filter."""
        m = np.ones(pop.n_users, dtype=bool)
        if self.gender is not None:
            m &= pop.genders == GENDERS.index(self.gender)
        if self.age_range is not None:
            low, high = self.age_range
            m &= pop.ages >= low
            if high is not None:
                m &= pop.ages <= high
        if self.country is not None:
            if self.country in pop.country_labels:
                m &= pop.countries == pop.country_labels.index(self.country)
            else:
                m &= False
        return m


def filter_subgroup(pop: Population, flt: DemographicFilter) -> Population:
    """Restrict a population to the users matching ``flt``.

    The catalog (including its full-universe audience counts) is shared
    with the parent, so subgroup audiences stay comparable across groups.
    Raises if no user matches.
    """
    mask = flt.mask(pop)
    rows = np.nonzero(mask)[0]
    if rows.size == 0:
        raise DataFormatError("demographic filter matches zero users")
    counts = pop.interest_counts()[rows]
    indptr = np.concatenate(([0], np.cumsum(counts)))
    indices = np.empty(int(indptr[-1]), dtype=np.int32)
    out = 0
    for r in rows:
        chunk = pop.row_positions(int(r))
        indices[out:out + chunk.size] = chunk
        out += chunk.size
    return Population(
        catalog=pop.catalog,
        user_ids=pop.user_ids[rows],
        genders=pop.genders[rows],
        ages=pop.ages[rows],
        countries=pop.countries[rows],
        country_labels=pop.country_labels,
        indptr=indptr,
        indices=indices,
        provenance=pop.provenance,
        full_universe=False,
    )


def audit_population(pop: Population) -> None:
    """Verify structural invariants; raises DataFormatError on violation.

    The catalog-audience audit applies only to full-universe populations;
    subgroup views intentionally keep the parent's counts.
    """
    counts = pop.interest_counts()
    if counts.size and counts.min() < 1:
        raise DataFormatError("every user must hold at least one interest")
    for row in range(pop.n_users):
        positions = pop.row_positions(row)
        if positions.size > 1 and np.any(np.diff(positions) <= 0):
            raise DataFormatError(f"row {row} interests not strictly ascending")
    if pop.indices.size and (pop.indices.min() < 0 or pop.indices.max() >= pop.n_interests):
        raise DataFormatError("interest position out of catalog range")
    if pop.full_universe:
        realized = np.bincount(pop.indices, minlength=pop.n_interests)
        if not np.array_equal(realized, pop.catalog.audiences):
            bad = int(np.nonzero(realized != pop.catalog.audiences)[0][0])
            raise DataFormatError(
                f"catalog audience mismatch at interest {int(pop.catalog.interest_ids[bad])}: "
                f"recorded {int(pop.catalog.audiences[bad])}, realized {int(realized[bad])}"
            )
