"""Uniqueness estimation from audience-size decay.

Pipeline: build a per-user matrix of prefix audience sizes under a
selection strategy, reduce each interest-count column to a percentile,
truncate the resulting decay curve where the reporting floor swallows it,
fit a line in log-log space, and read off the interest count at which the
fitted audience size reaches one person.

The fitted model is ``log10(size) = intercept - decay * log10(N + 1)``
over interest counts N >= 1. The cutpoint ``10^(intercept/decay) - 1`` is
the (real-valued) number of interests at which the modeled audience hits
a single user; its ceiling is the smallest actionable interest count.

Uncertainty comes from a row bootstrap: users are resampled with
replacement, the whole pipeline is re-run per resample, and the central
95% of resampled cutpoints forms the interval. Each resample derives its
own RNG sub-stream from (seed, resample number), so results are identical
no matter how resamples are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .engine import CensorPolicy, InvertedIndex, MAX_QUERY_INTERESTS, reported_size
from .errors import BootstrapError, DataFormatError, FitError, NumericalError
from .population import AGE_BANDS, GENDERS, DemographicFilter, Population
from .quantile import nearest_rank, nearest_rank_index
from .runtime import derived_rng, worker_count
from .selection import (
    PrefixAudiences,
    SelectionStrategy,
    ordered_positions_for_row,
    prefix_true_sizes,
)

CI_LOW_PCT = 2.5
CI_HIGH_PCT = 97.5
MAX_FAILED_RESAMPLE_SHARE = 0.01
DEFAULT_RESAMPLES = 10_000


# ---------------------------------------------------------------------------
# audience matrix
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AudienceMatrix:
    """Per-user prefix audience sizes under one selection strategy.

    ``true_sizes`` holds uncensored counts; censoring is applied as a view
    so one matrix serves any reporting floor. Row r covers user_ids[r] and
    is valid for the first ``lengths[r]`` columns.
    """

    strategy: SelectionStrategy
    policy: CensorPolicy
    user_ids: np.ndarray      # (n,) int64
    lengths: np.ndarray       # (n,) int32
    interests: np.ndarray     # (n, n_max) int32 catalog positions, -1 pad
    true_sizes: np.ndarray    # (n, n_max) int32, 0 pad

    @property
    def n_rows(self) -> int:
        return self.user_ids.size

    @property
    def n_max(self) -> int:
        return self.strategy.n_max

    def with_policy(self, policy: CensorPolicy) -> "AudienceMatrix":
        """Same measurements under a different reporting floor."""
        return replace(self, policy=policy)

    def column_samples(self, n: int) -> np.ndarray:
        """Censored audience sizes at interest count ``n`` (1-based)."""
        if not 1 <= n <= self.n_max:
            raise DataFormatError(f"interest count {n} outside 1..{self.n_max}")
        vals = self.true_sizes[self.lengths >= n, n - 1]
        return np.maximum(vals, self.policy.floor)

    def row(self, r: int) -> PrefixAudiences:
        k = int(self.lengths[r])
        return PrefixAudiences(
            user_id=int(self.user_ids[r]),
            ordered_interests=tuple(int(i) for i in self.interests[r, :k]),
            sizes=tuple(reported_size(int(s), self.policy) for s in self.true_sizes[r, :k]),
        )


def _fill_rows(pop: Population, index: InvertedIndex, strategy: SelectionStrategy,
               rows: np.ndarray, lo: int, hi: int,
               interests: np.ndarray, true_sizes: np.ndarray) -> None:
    for i in range(lo, hi):
        row = int(rows[i])
        ordered = ordered_positions_for_row(pop, row, strategy)
        sizes = prefix_true_sizes(index, ordered, holder_row=row)
        interests[i, :ordered.size] = ordered
        true_sizes[i, :sizes.size] = sizes


def build_matrix(population: Population, index: InvertedIndex,
                 strategy: SelectionStrategy, policy: CensorPolicy,
                 demographic_filter: DemographicFilter | None = None,
                 workers: int | None = None) -> AudienceMatrix:
    """Measure prefix audiences for every user (or every subgroup user).

    When a demographic filter is given it restricts which users get rows;
    the audiences themselves are always counted over the full universe.
    """
    if index.population is not population:
        raise DataFormatError("index is bound to a different population")
    if demographic_filter is not None:
        rows = np.nonzero(demographic_filter.mask(population))[0]
    else:
        rows = np.arange(population.n_users)
    if rows.size < 2:
        raise DataFormatError(f"need at least 2 users to build a matrix, got {rows.size}")

    n_max = strategy.n_max
    n = rows.size
    lengths = np.minimum(population.interest_counts()[rows], n_max).astype(np.int32)
    interests = np.full((n, n_max), -1, dtype=np.int32)
    true_sizes = np.zeros((n, n_max), dtype=np.int32)

    n_workers = min(worker_count(workers), n)
    if n_workers <= 1:
        _fill_rows(population, index, strategy, rows, 0, n, interests, true_sizes)
    else:
        bounds = np.linspace(0, n, n_workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [
                pool.submit(_fill_rows, population, index, strategy, rows,
                            int(bounds[w]), int(bounds[w + 1]), interests, true_sizes)
                for w in range(n_workers)
            ]
            for f in futures:
                f.result()

    return AudienceMatrix(
        strategy=strategy,
        policy=policy,
        user_ids=population.user_ids[rows],
        lengths=lengths,
        interests=interests,
        true_sizes=true_sizes,
    )


# ---------------------------------------------------------------------------
# quantile vector and truncation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantileVector:
    """Audience-size percentile at each interest count N = 1..n_max."""

    q: float
    floor: int
    values: tuple[int, ...]

    def points(self) -> list[tuple[int, int]]:
        return [(n + 1, v) for n, v in enumerate(self.values)]


def quantile_vector(matrix: AudienceMatrix, q: float) -> QuantileVector:
    """Per-column percentile of censored audience sizes.

    Column N only includes users holding at least N interests; it is an
    error for a column in 1..n_max to be empty.
    """
    values = []
    for n in range(1, matrix.n_max + 1):
        samples = matrix.column_samples(n)
        if samples.size == 0:
            raise NumericalError(f"no users hold {n} interests; cannot form the Q={q:g} vector")
        values.append(int(nearest_rank(samples, q)))
    return QuantileVector(q=q, floor=matrix.policy.floor, values=tuple(values))


def truncate_at_floor(vector: QuantileVector, policy: CensorPolicy) -> list[tuple[int, int]]:
    """Keep the leading points up to and including the first floor hit.

    Once the percentile reaches the reporting floor, deeper columns carry
    no information (they are clamped), but the first floored point itself
    is genuine and is kept. Raises FitError when fewer than two points
    survive.
    """
    points = []
    floor_n: int | None = None
    for n, value in vector.points():
        points.append((n, value))
        if value == policy.floor:
            floor_n = n
            break
    if len(points) < 2:
        where = f"floor {policy.floor} already reached at N={floor_n}" if floor_n is not None \
            else "curve has fewer than two columns"
        raise FitError(
            f"Q={vector.q:g}: {where}; at least two points are needed to fit"
        )
    return points


# ---------------------------------------------------------------------------
# log-log fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    """Least-squares line through (log10(N+1), log10(size)) points.

    ``decay`` is the magnitude of the downward slope; ``intercept`` the
    value at N = 0. ``cutpoint`` is the real-valued interest count at
    which the fitted audience size reaches exactly one user.
    """

    decay: float
    intercept: float
    r_squared: float
    cutpoint: float
    n_points_used: int


def cutpoint_from_fit(decay: float, intercept: float) -> float:
    return 10.0 ** (intercept / decay) - 1.0


def fit_loglog(points) -> FitResult:
    """Fit the decay line; raises FitError on degenerate or rising curves."""
    pts = [(int(n), float(v)) for n, v in points]
    if len(pts) < 2:
        raise FitError(f"need at least two points to fit, got {len(pts)}")
    for n, v in pts:
        if n < 1:
            raise FitError(f"interest counts must be >= 1, got {n}")
        if v <= 0:
            raise FitError(f"audience size must be positive to fit, got {v} at N={n}")
    x = np.log10(np.asarray([n for n, _ in pts], dtype=np.float64) + 1.0)
    y = np.log10(np.asarray([v for _, v in pts], dtype=np.float64))
    x_bar = x.mean()
    y_bar = y.mean()
    sxx = float(((x - x_bar) ** 2).sum())
    if sxx == 0.0:
        raise FitError("all points share one interest count; slope undefined")
    slope = float(((x - x_bar) * (y - y_bar)).sum()) / sxx
    intercept = float(y_bar - slope * x_bar)
    residuals = y - (intercept + slope * x)
    ss_res = float((residuals ** 2).sum())
    ss_tot = float(((y - y_bar) ** 2).sum())
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    decay = -slope
    if decay <= 0.0:
        raise FitError(f"audience sizes do not decrease (fitted decay {decay:.6g})")
    return FitResult(
        decay=decay,
        intercept=intercept,
        r_squared=r_squared,
        cutpoint=cutpoint_from_fit(decay, intercept),
        n_points_used=len(pts),
    )


def fit_matrix_quantile(matrix: AudienceMatrix, q: float) -> FitResult:
    """Full pipeline on one matrix: quantiles -> truncation -> fit."""
    vector = quantile_vector(matrix, q)
    return fit_loglog(truncate_at_floor(vector, matrix.policy))


def _unique_at_first(floor: int, first_value: int) -> bool:
    """True when the quantile user is already down to one person at N = 1.

    Only possible with floor 1: the first column value is then a real,
    uncensored audience of one, not a clamped unknown, so no decay model
    is needed to locate the cutpoint.
    """
    return floor == 1 and first_value == 1


def matrix_cutpoint(matrix: AudienceMatrix, q: float) -> tuple[float, FitResult | None]:
    """Cutpoint for one matrix and percentile, fitting only when needed.

    Returns ``(cutpoint, fit)``. When the quantile curve already sits at
    a single user in its first column the cutpoint is 1.0 by observation
    and ``fit`` is None; otherwise the truncated curve is fit in log-log
    space and ``fit`` carries the line.
    """
    vector = quantile_vector(matrix, q)
    if _unique_at_first(matrix.policy.floor, vector.values[0]):
        return 1.0, None
    fit = fit_loglog(truncate_at_floor(vector, matrix.policy))
    return fit.cutpoint, fit


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BootstrapResult:
    point_estimate: float
    ci_low: float
    ci_high: float
    n_resamples: int
    n_failed: int
    seed: int

    @property
    def brackets_point(self) -> bool:
        """Whether the interval contains the point estimate.

        Expected to hold; a False value is surfaced to the caller rather
        than silently repaired.
        """
        return bool(self.ci_low <= self.point_estimate <= self.ci_high)


class _ResamplePlan:
    """Per-column sorted views that make resampled quantiles O(n)."""

    __slots__ = ("n_rows", "floor", "q", "sorted_vals", "sorted_rows")

    def __init__(self, matrix: AudienceMatrix, q: float):
        self.n_rows = matrix.n_rows
        self.floor = matrix.policy.floor
        self.q = q
        self.sorted_vals: list[np.ndarray] = []
        self.sorted_rows: list[np.ndarray] = []
        for n in range(1, matrix.n_max + 1):
            elig = np.nonzero(matrix.lengths >= n)[0].astype(np.int32)
            vals = np.maximum(matrix.true_sizes[elig, n - 1], matrix.policy.floor)
            order = np.argsort(vals, kind="stable")
            self.sorted_vals.append(vals[order])
            self.sorted_rows.append(elig[order])

    def cutpoint_for_counts(self, counts: np.ndarray) -> float:
        """Pipeline on a weighted resample; NaN when it cannot be fitted."""
        points: list[tuple[int, int]] = []
        for n in range(len(self.sorted_vals)):
            weights = counts[self.sorted_rows[n]]
            cum = np.cumsum(weights)
            total = int(cum[-1]) if cum.size else 0
            if total == 0:
                break
            rank = nearest_rank_index(self.q, total) + 1
            value = int(self.sorted_vals[n][np.searchsorted(cum, rank)])
            points.append((n + 1, value))
            if value == self.floor:
                break
        if points and _unique_at_first(self.floor, points[0][1]):
            return 1.0
        try:
            return fit_loglog(points).cutpoint
        except FitError:
            return math.nan


def bootstrap_ci(matrix: AudienceMatrix, q: float,
                 n_resamples: int = DEFAULT_RESAMPLES, seed: int = 0,
                 workers: int | None = None) -> BootstrapResult:
    """Row bootstrap of the cutpoint with a central 95% interval.

    Deterministic for a fixed seed under any worker count: resample r
    always uses the sub-stream derived from (seed, r).
    """
    if n_resamples < 1:
        raise DataFormatError("n_resamples must be positive")
    if seed < 0:
        raise DataFormatError("seed must be non-negative")
    point, _ = matrix_cutpoint(matrix, q)
    plan = _ResamplePlan(matrix, q)
    n = matrix.n_rows
    cutpoints = np.full(n_resamples, math.nan)

    def run_range(lo: int, hi: int) -> None:
        for r in range(lo, hi):
            rng = derived_rng(seed, r)
            counts = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(np.int32)
            cutpoints[r] = plan.cutpoint_for_counts(counts)

    n_workers = min(worker_count(workers), n_resamples)
    if n_workers <= 1:
        run_range(0, n_resamples)
    else:
        bounds = np.linspace(0, n_resamples, n_workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(run_range, int(bounds[w]), int(bounds[w + 1]))
                       for w in range(n_workers)]
            for f in futures:
                f.result()

    ok = cutpoints[~np.isnan(cutpoints)]
    n_failed = n_resamples - ok.size
    if n_failed > MAX_FAILED_RESAMPLE_SHARE * n_resamples:
        raise BootstrapError(
            f"{n_failed} of {n_resamples} resamples failed to fit "
            f"(more than {MAX_FAILED_RESAMPLE_SHARE:.0%})"
        )
    ok.sort()
    return BootstrapResult(
        point_estimate=point,
        ci_low=float(ok[nearest_rank_index(CI_LOW_PCT, ok.size)]),
        ci_high=float(ok[nearest_rank_index(CI_HIGH_PCT, ok.size)]),
        n_resamples=n_resamples,
        n_failed=int(n_failed),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReportRow:
    """One strategy/P result. Fit fields are None when the quantile user
    was already unique at a single interest and no line was fit."""

    strategy: str
    p: float
    q: float
    decay: float | None
    intercept: float | None
    r_squared: float | None
    cutpoint: float
    interest_count: int
    actionable: bool
    n_points_used: int
    ci_low: float | None = None
    ci_high: float | None = None
    n_resamples: int = 0
    n_failed: int = 0
    ci_brackets_point: bool | None = None


@dataclass(frozen=True)
class UniquenessReport:
    label: str
    n_users: int
    floor: int
    rows: tuple[ReportRow, ...]
    monotonic_in_p: bool


def _actionable_count(cutpoint: float) -> tuple[int, bool]:
    count = max(1, math.ceil(cutpoint))
    return count, bool(cutpoint <= MAX_QUERY_INTERESTS)


def report_for_matrices(matrices, p_values, n_resamples: int = DEFAULT_RESAMPLES,
                        seed: int = 0, workers: int | None = None,
                        label: str = "all") -> UniquenessReport:
    """Cutpoints (with optional bootstrap CIs) per matrix and per P.

    P is the probability-of-uniqueness target; it maps onto the Q = 100*P
    percentile of the audience-size columns. ``n_resamples=0`` skips the
    bootstrap. Within one strategy the cutpoint should not decrease as P
    grows; a violation is reported via ``monotonic_in_p``, not raised.
    """
    matrices = list(matrices)
    if not matrices:
        raise DataFormatError("at least one audience matrix is required")
    floors = {m.policy.floor for m in matrices}
    if len(floors) != 1:
        raise DataFormatError(f"matrices mix censor floors {sorted(floors)}")
    p_list = [float(p) for p in p_values]
    for p in p_list:
        if not 0.0 < p < 1.0:
            raise DataFormatError(f"P must be in (0, 1), got {p}")
    rows: list[ReportRow] = []
    monotonic = True
    for matrix in matrices:
        previous: float | None = None
        for p in p_list:
            q = 100.0 * p
            cutpoint, fit = matrix_cutpoint(matrix, q)
            if n_resamples > 0:
                boot = bootstrap_ci(matrix, q, n_resamples=n_resamples, seed=seed,
                                    workers=workers)
                ci_low, ci_high = boot.ci_low, boot.ci_high
                n_failed = boot.n_failed
                brackets = boot.brackets_point
            else:
                ci_low = ci_high = None
                n_failed = 0
                brackets = None
            count, actionable = _actionable_count(cutpoint)
            rows.append(ReportRow(
                strategy=matrix.strategy.kind, p=p, q=q,
                decay=fit.decay if fit else None,
                intercept=fit.intercept if fit else None,
                r_squared=fit.r_squared if fit else None,
                cutpoint=cutpoint, interest_count=count, actionable=actionable,
                n_points_used=fit.n_points_used if fit else 1,
                ci_low=ci_low, ci_high=ci_high,
                n_resamples=n_resamples if n_resamples > 0 else 0,
                n_failed=n_failed, ci_brackets_point=brackets,
            ))
            if previous is not None and cutpoint < previous:
                monotonic = False
            previous = cutpoint
    return UniquenessReport(
        label=label,
        n_users=matrices[0].n_rows,
        floor=matrices[0].policy.floor,
        rows=tuple(rows),
        monotonic_in_p=monotonic,
    )


def uniqueness_report(population: Population, index: InvertedIndex,
                      strategies, p_values, policy: CensorPolicy,
                      n_resamples: int = DEFAULT_RESAMPLES, seed: int = 0,
                      workers: int | None = None,
                      demographic_filter: DemographicFilter | None = None,
                      label: str = "all") -> UniquenessReport:
    """Build one matrix per strategy, then report cutpoints per strategy and P."""
    matrices = [
        build_matrix(population, index, strategy, policy,
                     demographic_filter=demographic_filter, workers=workers)
        for strategy in strategies
    ]
    return report_for_matrices(matrices, p_values, n_resamples=n_resamples,
                               seed=seed, workers=workers, label=label)


@dataclass(frozen=True)
class SkippedGroup:
    label: str
    n_users: int
    reason: str


@dataclass(frozen=True)
class SubgroupReports:
    grouping: str
    min_users: int
    reports: tuple[UniquenessReport, ...]
    skipped: tuple[SkippedGroup, ...]


GROUPINGS = ("gender", "age_band", "country")


def _group_filters(population: Population, grouping: str):
    if grouping == "gender":
        for g in GENDERS:
            yield g, DemographicFilter(gender=g)
    elif grouping == "age_band":
        for band, _, _ in AGE_BANDS:
            yield band, DemographicFilter.for_age_band(band)
    elif grouping == "country":
        for c in sorted(population.country_labels):
            yield c, DemographicFilter(country=c)
    else:
        raise DataFormatError(f"unknown grouping {grouping!r}; expected one of {GROUPINGS}")


def subgroup_reports(population: Population, index: InvertedIndex, grouping: str,
                     strategies, p_values, policy: CensorPolicy,
                     min_users: int = 100, n_resamples: int = DEFAULT_RESAMPLES,
                     seed: int = 0, workers: int | None = None) -> SubgroupReports:
    """Per-group uniqueness reports, skipping groups below ``min_users``.

    Audiences inside each group report remain full-universe counts; only
    the set of measured users is restricted, so subgroup cutpoints are
    comparable to the whole-population ones.
    """
    if min_users < 2:
        raise DataFormatError("min_users must be at least 2")
    reports: list[UniquenessReport] = []
    skipped: list[SkippedGroup] = []
    for label, flt in _group_filters(population, grouping):
        n = int(flt.mask(population).sum())
        if n < min_users:
            skipped.append(SkippedGroup(
                label=label, n_users=n,
                reason=f"{n} users is below the minimum of {min_users}",
            ))
            continue
        reports.append(uniqueness_report(
            population, index, strategies, p_values, policy,
            n_resamples=n_resamples, seed=seed, workers=workers,
            demographic_filter=flt, label=f"{grouping}={label}",
        ))
    return SubgroupReports(
        grouping=grouping, min_users=min_users,
        reports=tuple(reports), skipped=tuple(skipped),
    )
