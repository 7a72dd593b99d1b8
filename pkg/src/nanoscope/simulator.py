"""Campaign simulation: can an N-interest combination reach one person?

A campaign targets a single user with the first N interests of that
user's strategy ordering. Because the ordering is a pure function of
(strategy seed, user id), campaigns at different N against the same
target use nested prefixes of one permutation, mirroring how an
advertiser would peel interests off a fixed set.

Delivery is modeled as exact: everyone whose interest set contains the
campaign's combination is reached. A campaign succeeds when exactly one
user is reached and that user is the target.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import (
    CensorPolicy,
    InvertedIndex,
    MAX_QUERY_INTERESTS,
    intersect_sorted,
    reported_size,
)
from .errors import DataFormatError
from .population import Population
from .runtime import derived_rng
from .selection import SelectionStrategy, STRATEGY_KINDS, ordered_positions_for_row


@dataclass(frozen=True)
class CampaignSpec:
    target: int
    strategy: SelectionStrategy
    n_interests: int
    policy: CensorPolicy = CensorPolicy(floor=1000)

    def __post_init__(self) -> None:
        if not 1 <= self.n_interests <= MAX_QUERY_INTERESTS:
            raise DataFormatError(
                f"n_interests must be in 1..{MAX_QUERY_INTERESTS}, got {self.n_interests}"
            )


@dataclass(frozen=True)
class CampaignOutcome:
    target: int
    interests_used: tuple[int, ...]
    reached_count: int
    reported_reach: int
    target_reached: bool
    success: bool
    shortened: bool


@dataclass(frozen=True)
class PolicyGate:
    """Pre-launch countermeasures: interest cap and audience minimum."""

    max_interests: int | None = None
    min_active_audience: int | None = None

    def __post_init__(self) -> None:
        if self.max_interests is not None and self.max_interests < 1:
            raise DataFormatError("max_interests must be positive")
        if self.min_active_audience is not None and self.min_active_audience < 1:
            raise DataFormatError("min_active_audience must be positive")


REJECTED_MAX_INTERESTS = "max_interests"
REJECTED_MIN_AUDIENCE = "min_active_audience"


@dataclass(frozen=True)
class GateDecision:
    accepted: bool
    reason: str | None = None


def _campaign_reach(index: InvertedIndex, spec: CampaignSpec):
    """(target row, used positions, matching rows, shortened flag)."""
    pop = index.population
    row = pop.row_of_user(spec.target)
    ordered = ordered_positions_for_row(pop, row, spec.strategy)
    used = ordered[: spec.n_interests]
    shortened = used.size < spec.n_interests
    cand = index.postings[int(used[0])]
    for p in used[1:]:
        # the target holds every used interest, so a singleton set is
        # already {target} and deeper intersections cannot change it
        if cand.size <= 1:
            break
        cand = intersect_sorted(cand, index.postings[int(p)])
    return row, used, cand, shortened


def run_campaign(index: InvertedIndex, population: Population,
                 spec: CampaignSpec) -> CampaignOutcome:
    if index.population is not population:
        raise DataFormatError("index is bound to a different population")
    row, used, rows, shortened = _campaign_reach(index, spec)
    reached = int(rows.size)
    # The target holds every interest in their own combination, so they
    # are always in the reached set; verify rather than assume.
    at = int(np.searchsorted(rows, row))
    target_reached = at < rows.size and int(rows[at]) == row
    return CampaignOutcome(
        target=spec.target,
        interests_used=tuple(int(i) for i in population.catalog.interest_ids[used]),
        reached_count=reached,
        reported_reach=reported_size(reached, spec.policy),
        target_reached=target_reached,
        success=target_reached and reached == 1,
        shortened=shortened,
    )


def apply_policy(spec: CampaignSpec, gate: PolicyGate, index: InvertedIndex) -> GateDecision:
    """Gate a campaign before launch.

    The audience minimum is checked against the true (uncensored) count of
    the combination the campaign would actually run with.
    """
    if gate.max_interests is not None and spec.n_interests > gate.max_interests:
        return GateDecision(accepted=False, reason=REJECTED_MAX_INTERESTS)
    if gate.min_active_audience is not None:
        _, _, rows, _ = _campaign_reach(index, spec)
        if rows.size < gate.min_active_audience:
            return GateDecision(accepted=False, reason=REJECTED_MIN_AUDIENCE)
    return GateDecision(accepted=True)


def success_rate(index: InvertedIndex, population: Population,
                 strategy: SelectionStrategy, n_interests: int,
                 n_targets: int, seed: int = 0) -> float:
    """Fraction of sampled targets reached as exactly one person.

    Targets are sampled uniformly, without replacement unless more targets
    than users are requested.
    """
    if n_targets < 1:
        raise DataFormatError("n_targets must be positive")
    rng = derived_rng(seed)
    n = population.n_users
    if n_targets > n:
        target_rows = rng.integers(0, n, size=n_targets)
    else:
        target_rows = rng.choice(n, size=n_targets, replace=False)
    hits = 0
    for row in target_rows:
        spec = CampaignSpec(
            target=int(population.user_ids[int(row)]),
            strategy=strategy,
            n_interests=n_interests,
        )
        if run_campaign(index, population, spec).success:
            hits += 1
    return hits / n_targets


def run_batch(index: InvertedIndex, population: Population, specs,
              gate: PolicyGate | None = None):
    """Run many campaigns, applying the gate first when one is given.

    Returns a list of (spec, decision, outcome) triples; rejected
    campaigns carry an outcome of None.
    """
    results = []
    for spec in specs:
        if gate is not None:
            decision = apply_policy(spec, gate, index)
        else:
            decision = GateDecision(accepted=True)
        outcome = run_campaign(index, population, spec) if decision.accepted else None
        results.append((spec, decision, outcome))
    return results


# ---------------------------------------------------------------------------
# batch files and outcome tables
# ---------------------------------------------------------------------------

def read_batch_file(path: str | Path, policy: CensorPolicy | None = None) -> list[CampaignSpec]:
    """Parse a line-delimited batch file of campaign requests.

    Each line is a JSON object {"target": int, "strategy": "lp"|"random",
    "seed": int, "n_interests": int}.
    """
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"batch file not found: {path}")
    specs: list[CampaignSpec] = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}:{lineno}: invalid JSON: {exc.msg}") from None
            if not isinstance(record, dict):
                raise DataFormatError(f"{path}:{lineno}: expected a JSON object")
            for key in ("target", "strategy", "seed", "n_interests"):
                if key not in record:
                    raise DataFormatError(f"{path}:{lineno}: missing field {key!r}")
            if record["strategy"] not in STRATEGY_KINDS:
                raise DataFormatError(
                    f"{path}:{lineno}: strategy must be one of {'/'.join(STRATEGY_KINDS)}"
                )
            try:
                spec = CampaignSpec(
                    target=int(record["target"]),
                    strategy=SelectionStrategy(record["strategy"], seed=int(record["seed"])),
                    n_interests=int(record["n_interests"]),
                    policy=policy if policy is not None else CensorPolicy(floor=1000),
                )
            except (ValueError, DataFormatError) as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
            specs.append(spec)
    if not specs:
        raise DataFormatError(f"{path}: no campaign records")
    return specs


OUTCOME_CSV_COLUMNS = ("target", "n_interests", "reached_count", "reported_reach", "success")


def outcomes_csv(outcomes) -> str:
    """Flat outcome table; one row per executed campaign."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(OUTCOME_CSV_COLUMNS)
    for outcome in outcomes:
        writer.writerow([
            outcome.target,
            len(outcome.interests_used),
            outcome.reached_count,
            outcome.reported_reach,
            "true" if outcome.success else "false",
        ])
    return buf.getvalue()
