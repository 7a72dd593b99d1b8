"""Per-user risk reports and interactive what-if sessions.

Each of a user's interests is classified by how many people share it:
the fewer, the more identifying. A session tracks which interests the
user has (virtually) removed and exposes a what-if view showing how many
interests an advertiser would need to single the user out.

Classification can also run from a cached table of (interest, audience)
pairs, so exported real-platform numbers work without a population; the
table acts as a single pseudo-profile and what-if analysis (which needs
a full index) is unavailable in that mode.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import CensorPolicy, InvertedIndex, MAX_QUERY_INTERESTS, reported_size
from .errors import DataFormatError, StaleVersionError, UnknownEntityError
from .population import Population
from .selection import SelectionStrategy, prefix_true_sizes, selection_order


class RiskLevel(enum.IntEnum):
    """Identifiability of a single interest; higher value = higher risk."""

    GREEN = 0
    YELLOW = 1
    ORANGE = 2
    RED = 3

    @property
    def label(self) -> str:
        return self.name.lower()


# Audience thresholds between risk levels: red up to the first value,
# orange up to the second, yellow below the third, green from there up.
DEFAULT_THRESHOLDS = (10_000, 100_000, 1_000_000)


def classify(audience_size: int, thresholds: tuple[int, int, int] = DEFAULT_THRESHOLDS) -> RiskLevel:
    """Risk level of an interest with the given audience size.

    Intervals: [0, t0] red, (t0, t1] orange, (t1, t2) yellow, [t2, inf) green.
    """
    if audience_size < 0:
        raise DataFormatError("audience size must be non-negative")
    t0, t1, t2 = thresholds
    if not (0 < t0 < t1 < t2):
        raise DataFormatError(f"thresholds must be strictly ascending and positive, got {thresholds}")
    if audience_size <= t0:
        return RiskLevel.RED
    if audience_size <= t1:
        return RiskLevel.ORANGE
    if audience_size < t2:
        return RiskLevel.YELLOW
    return RiskLevel.GREEN


@dataclass(frozen=True)
class RiskEntry:
    interest_id: int
    name: str
    audience: int
    level: RiskLevel
    active: bool


# ---------------------------------------------------------------------------
# data sources
# ---------------------------------------------------------------------------

class PopulationRiskSource:
    """Risk data backed by a population and its index; supports what-if."""

    supports_whatif = True

    def __init__(self, population: Population, index: InvertedIndex,
                 thresholds: tuple[int, int, int] = DEFAULT_THRESHOLDS):
        if index.population is not population:
            raise DataFormatError("index is bound to a different population")
        self.population = population
        self.index = index
        self.thresholds = thresholds

    def interests_of(self, user_id: int) -> frozenset[int]:
        return self.population.profile_of(user_id).interests

    def audience_of(self, interest_id: int) -> int:
        return self.population.catalog.audience_of(interest_id)

    def name_of(self, interest_id: int) -> str:
        return self.population.catalog.record(interest_id).name

    def user_ids(self):
        return [int(u) for u in self.population.user_ids]


TABLE_USER_ID = 0


class AudienceTableSource:
    """Risk data from a cached (interest_id, audience_size) table.

    The table is treated as the interest export of one pseudo-user with
    id 0; there is no index behind it, so what-if is unsupported.
    """

    supports_whatif = False

    def __init__(self, audiences: dict[int, int],
                 thresholds: tuple[int, int, int] = DEFAULT_THRESHOLDS):
        if not audiences:
            raise DataFormatError("audience table is empty")
        for iid, a in audiences.items():
            if iid < 0 or a < 0:
                raise DataFormatError("ids and audiences must be non-negative")
        self.audiences = dict(audiences)
        self.thresholds = thresholds

    def interests_of(self, user_id: int) -> frozenset[int]:
        if user_id != TABLE_USER_ID:
            raise UnknownEntityError(
                f"unknown user {user_id}; a table source only serves user {TABLE_USER_ID}"
            )
        return frozenset(self.audiences)

    def audience_of(self, interest_id: int) -> int:
        try:
            return self.audiences[interest_id]
        except KeyError:
            raise UnknownEntityError(f"unknown interest {interest_id}") from None

    def name_of(self, interest_id: int) -> str:
        self.audience_of(interest_id)
        return f"interest-{interest_id}"

    def user_ids(self):
        return [TABLE_USER_ID]


def read_audience_table(path: str | Path) -> AudienceTableSource:
    """Load a cached audience table (CSV header ``interest_id,audience_size``)."""
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"audience table not found: {path}")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        if [c.strip() for c in header[:2]] != ["interest_id", "audience_size"]:
            raise DataFormatError(
                f"{path}: expected header 'interest_id,audience_size', got {header!r}"
            )
        audiences: dict[int, int] = {}
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) < 2:
                raise DataFormatError(f"{path}:{lineno}: expected two columns")
            try:
                iid, audience = int(rec[0]), int(rec[1])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: both columns must be integers") from None
            if iid in audiences:
                raise DataFormatError(f"{path}:{lineno}: duplicate interest {iid}")
            if audience < 0:
                raise DataFormatError(f"{path}:{lineno}: audience must be non-negative")
            audiences[iid] = audience
    return AudienceTableSource(audiences)


# ---------------------------------------------------------------------------
# sessions
# ---------------------------------------------------------------------------

@dataclass
class ProfileSession:
    """Mutable what-if state for one user.

    ``version`` increases on every applied command, including no-op
    repeats, so clients can detect missed updates.
    """

    user_id: int
    interests: frozenset[int]
    removed: set[int] = field(default_factory=set)
    version: int = 0

    @property
    def active(self) -> frozenset[int]:
        return self.interests - self.removed


def open_session(source, user_id: int) -> ProfileSession:
    return ProfileSession(user_id=user_id, interests=source.interests_of(user_id))


def remove_interest(session: ProfileSession, interest_id: int) -> ProfileSession:
    """Mark an interest as removed; repeat removals still bump the version."""
    if interest_id not in session.interests:
        raise UnknownEntityError(
            f"interest {interest_id} is not in user {session.user_id}'s profile"
        )
    session.removed.add(interest_id)
    session.version += 1
    return session


def restore_interest(session: ProfileSession, interest_id: int) -> ProfileSession:
    if interest_id not in session.interests:
        raise UnknownEntityError(
            f"interest {interest_id} is not in user {session.user_id}'s profile"
        )
    session.removed.discard(interest_id)
    session.version += 1
    return session


def check_version(session: ProfileSession, version: int) -> None:
    if version != session.version:
        raise StaleVersionError(
            f"session for user {session.user_id} is at version {session.version}, "
            f"request carried {version}"
        )


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def risk_list(session: ProfileSession, source) -> list[RiskEntry]:
    """All of the user's interests, most identifying first.

    Sorted by ascending audience (ties by ascending id); removed interests
    stay in the list flagged inactive so the UI can offer restore.
    """
    entries = [
        RiskEntry(
            interest_id=iid,
            name=source.name_of(iid),
            audience=source.audience_of(iid),
            level=classify(source.audience_of(iid), source.thresholds),
            active=iid not in session.removed,
        )
        for iid in session.interests
    ]
    entries.sort(key=lambda e: (e.audience, e.interest_id))
    return entries


@dataclass(frozen=True)
class WhatIfReport:
    """Uniqueness outlook for the currently active interest set."""

    active_count: int
    prefix_sizes: tuple[int, ...]
    unique_at: int | None
    censored_sizes: tuple[int, ...]


def whatif_uniqueness(session: ProfileSession, source,
                      strategy: SelectionStrategy,
                      policy: CensorPolicy = CensorPolicy(floor=20),
                      n_max: int = MAX_QUERY_INTERESTS) -> WhatIfReport:
    """Prefix audiences over the active set under a strategy ordering.

    ``unique_at`` is the smallest interest count whose true audience is
    exactly one user, i.e. the point where targeting would single the
    user out; None when even the full walk stays above one.
    """
    if not source.supports_whatif:
        raise DataFormatError("what-if analysis needs a full population, not a cached table")
    if not 1 <= n_max <= MAX_QUERY_INTERESTS:
        raise DataFormatError(f"n_max must be in 1..{MAX_QUERY_INTERESTS}")
    active = sorted(session.active)
    if not active:
        raise DataFormatError(f"user {session.user_id} has no active interests left")
    catalog = source.population.catalog
    ids = np.asarray(active, dtype=np.int64)
    audiences = np.asarray([catalog.audience_of(int(i)) for i in active], dtype=np.int64)
    strategy = SelectionStrategy(strategy.kind, seed=strategy.seed, n_max=min(n_max, strategy.n_max))
    order = selection_order(ids, audiences, session.user_id, strategy)
    positions = np.asarray([catalog.position(int(i)) for i in ids[order]], dtype=np.int64)
    holder = source.population.row_of_user(session.user_id)
    sizes = prefix_true_sizes(source.index, positions, holder_row=holder)
    unique = np.nonzero(sizes == 1)[0]
    return WhatIfReport(
        active_count=len(active),
        prefix_sizes=tuple(int(s) for s in sizes),
        unique_at=int(unique[0]) + 1 if unique.size else None,
        censored_sizes=tuple(reported_size(int(s), policy) for s in sizes),
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def entry_to_dict(entry: RiskEntry) -> dict:
    return {
        "interest_id": entry.interest_id,
        "name": entry.name,
        "audience": entry.audience,
        "level": entry.level.label,
        "active": entry.active,
    }


def risk_list_csv(entries) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["interest_id", "name", "audience", "level", "active"])
    for e in entries:
        writer.writerow([e.interest_id, e.name, e.audience, e.level.label,
                         "true" if e.active else "false"])
    return buf.getvalue()


def whatif_to_dict(report: WhatIfReport) -> dict:
    return {
        "active_count": report.active_count,
        "prefix_sizes": list(report.prefix_sizes),
        "unique_at": report.unique_at,
        "censored_sizes": list(report.censored_sizes),
    }


def risk_report_json(session: ProfileSession, entries,
                     whatif: WhatIfReport | None = None) -> str:
    doc = {
        "user_id": session.user_id,
        "version": session.version,
        "entries": [entry_to_dict(e) for e in entries],
        "whatif": whatif_to_dict(whatif) if whatif is not None else None,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
