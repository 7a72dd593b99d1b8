"""Synthetic population generator.

Interest popularity follows a Zipf law over catalog rank; per-user interest
counts follow a clamped log-normal. Each user's interest set is drawn
without replacement with probability proportional to popularity weight
(batched sequential sampling: draw with replacement, keep the first k
distinct values in draw order).

The shipped default profile scales a mid-sized social-platform crawl down
to desk size: it preserves the ratio of the median interests-per-user to
the catalog size (~0.43%) and targets a comparably skewed popularity
distribution. Exact quartile matching is not attempted; a two-parameter
family cannot hit three quartiles at once, so the median is matched and
the quartile spread is approximate.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import DataFormatError
from . import Catalog, GeneratedProvenance, Population

# ---------------------------------------------------------------------------
# demographic mix (documented constants, not config knobs)
# ---------------------------------------------------------------------------

# male / female / undisclosed
GENDER_WEIGHTS = (0.815, 0.145, 0.040)

# probability that age is missing; band split conditional on being present
AGE_MISSING_RATE = 0.126
AGE_BAND_WEIGHTS = (0.056, 0.658, 0.277, 0.009)   # 13-19 / 20-39 / 40-64 / 65+
AGE_BAND_RANGES = ((13, 19), (20, 39), (40, 64), (65, 90))

COUNTRY_MISSING_RATE = 0.02
COUNTRY_POOL = (
    "ES", "FR", "MX", "AR", "US", "BR", "DE", "GB", "IT", "CO",
    "CL", "PE", "PT", "NL", "BE", "CH", "AT", "IE", "PL", "RO",
    "SE", "NO", "DK", "FI", "GR", "CZ", "HU", "UA", "TR", "MA",
    "DZ", "TN", "EG", "CA", "AU", "NZ", "JP", "KR", "IN", "CN",
)
COUNTRY_SKEW_EXPONENT = 1.9


@dataclass(frozen=True)
class InterestCountModel:
    """Clamped log-normal model for interests held per user."""

    mu: float
    sigma: float
    min_count: int = 1
    max_count: int = 5000

    def validate(self, n_interests: int) -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise DataFormatError("interest count parameters must be finite")
        if self.sigma < 0:
            raise DataFormatError("sigma must be non-negative")
        if self.min_count < 1:
            raise DataFormatError("minimum interests per user is 1")
        if self.max_count < self.min_count:
            raise DataFormatError("clamp max below clamp min")
        if self.max_count > n_interests:
            raise DataFormatError(
                f"clamp max {self.max_count} exceeds catalog size {n_interests}"
            )


@dataclass(frozen=True)
class GeneratorConfig:
    n_users: int
    n_interests: int
    popularity_exponent: float
    interests_per_user: InterestCountModel
    seed: int = 0

    def validate(self) -> None:
        if self.n_users < 1:
            raise DataFormatError("n_users must be positive")
        if self.n_interests < 1:
            raise DataFormatError("n_interests must be positive")
        if not math.isfinite(self.popularity_exponent) or self.popularity_exponent < 0:
            raise DataFormatError("popularity_exponent must be finite and non-negative")
        if self.seed < 0:
            raise DataFormatError("seed must be non-negative")
        self.interests_per_user.validate(self.n_interests)

    def digest(self) -> str:
        return hashlib.sha256(format_generator_config(self).encode()).hexdigest()


# Desk-scale default: 100k users over a 10k-interest catalog.
#
# median interests/user = 43: source median scaled by the catalog-size
#   ratio, so per-user coverage of the catalog is preserved.
# sigma = 0.91: lognormal spread backed out of the source min/median/max
#   interest counts at the source sample size.
# popularity_exponent = 1.0: classic Zipf rank weighting; at desk scale
#   the absolute source audience percentiles are unreachable (occupancy
#   is fixed by median * users / catalog), so the exponent is chosen to
#   keep the popularity skew heavy while cutpoints stay in the
#   actionable range.
DEFAULT_CALIBRATION = GeneratorConfig(
    n_users=100_000,
    n_interests=10_000,
    popularity_exponent=1.0,
    interests_per_user=InterestCountModel(mu=math.log(43.0), sigma=0.91, min_count=1, max_count=5000),
    seed=7,
)


def calibrated_config(seed: int = 7, n_users: int = 100_000) -> GeneratorConfig:
    """Default calibration profile with an overridable seed and size."""
    return replace(DEFAULT_CALIBRATION, seed=seed, n_users=n_users)


# ---------------------------------------------------------------------------
# config file round-trip (plain `key = value` lines)
# ---------------------------------------------------------------------------

_CONFIG_KEYS = (
    "n_users", "n_interests", "popularity_exponent",
    "interests_per_user.mu", "interests_per_user.sigma",
    "interests_per_user.min", "interests_per_user.max",
    "seed",
)


def format_generator_config(cfg: GeneratorConfig) -> str:
    m = cfg.interests_per_user
    values = {
        "n_users": cfg.n_users,
        "n_interests": cfg.n_interests,
        "popularity_exponent": repr(cfg.popularity_exponent),
        "interests_per_user.mu": repr(m.mu),
        "interests_per_user.sigma": repr(m.sigma),
        "interests_per_user.min": m.min_count,
        "interests_per_user.max": m.max_count,
        "seed": cfg.seed,
    }
    return "".join(f"{k} = {values[k]}\n" for k in _CONFIG_KEYS)


def parse_generator_config(text: str) -> GeneratorConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise DataFormatError(f"config line {lineno}: unknown key {key!r}")
        if key in values:
            raise DataFormatError(f"config line {lineno}: duplicate key {key!r}")
        values[key] = value.strip()
    missing = [k for k in _CONFIG_KEYS if k not in values]
    if missing:
        raise DataFormatError(f"config missing keys: {', '.join(missing)}")

    def _int(key: str) -> int:
        try:
            return int(values[key])
        except ValueError as exc:
            raise DataFormatError(f"config key {key!r}: not an integer: {values[key]!r}") from exc

    def _float(key: str) -> float:
        try:
            return float(values[key])
        except ValueError as exc:
            raise DataFormatError(f"config key {key!r}: not a number: {values[key]!r}") from exc

    cfg = GeneratorConfig(
        n_users=_int("n_users"),
        n_interests=_int("n_interests"),
        popularity_exponent=_float("popularity_exponent"),
        interests_per_user=InterestCountModel(
            mu=_float("interests_per_user.mu"),
            sigma=_float("interests_per_user.sigma"),
            min_count=_int("interests_per_user.min"),
            max_count=_int("interests_per_user.max"),
        ),
        seed=_int("seed"),
    )
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# generation
# ---------------------------------------------------------------------------

def popularity_weights(n_interests: int, exponent: float) -> np.ndarray:
    """Zipf weights over catalog rank (rank 0 is the most popular)."""
    ranks = np.arange(1, n_interests + 1, dtype=np.float64)
    w = ranks ** (-exponent)
    return w / w.sum()


def _draw_interest_counts(rng: np.random.Generator, cfg: GeneratorConfig) -> np.ndarray:
    m = cfg.interests_per_user
    raw = rng.lognormal(mean=m.mu, sigma=m.sigma, size=cfg.n_users)
    return np.clip(np.rint(raw), m.min_count, m.max_count).astype(np.int64)


def _first_k_distinct(draws: np.ndarray, k: int) -> np.ndarray:
    """First k distinct values of ``draws`` in draw order (all if fewer)."""
    _, first_idx = np.unique(draws, return_index=True)
    if first_idx.size <= k:
        order = np.sort(first_idx)
    else:
        order = np.sort(first_idx[np.argpartition(first_idx, k - 1)[:k]])
    return draws[order]


def _sample_user_interests(
    rng: np.random.Generator, cum_weights: np.ndarray, k: int, n_interests: int
) -> np.ndarray:
    """Weighted sample of k distinct catalog positions, sequential order."""
    if k >= n_interests:
        return np.arange(n_interests, dtype=np.int64)
    got = np.empty(0, dtype=np.int64)
    batch = int(k * 1.3) + 8
    while got.size < k:
        draws = np.searchsorted(cum_weights, rng.random(batch), side="right")
        merged = np.concatenate((got, draws))
        got = _first_k_distinct(merged, k)
        batch = (k - got.size) * 2 + 8
    return got


def generate_population(cfg: GeneratorConfig) -> Population:
    """Deterministically generate a population from a config and seed."""
    cfg.validate()
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed)))

    counts = _draw_interest_counts(rng, cfg)
    genders = rng.choice(3, size=cfg.n_users, p=GENDER_WEIGHTS).astype(np.int8)

    ages = np.full(cfg.n_users, -1, dtype=np.int16)
    has_age = rng.random(cfg.n_users) >= AGE_MISSING_RATE
    bands = rng.choice(4, size=cfg.n_users, p=AGE_BAND_WEIGHTS)
    for b, (low, high) in enumerate(AGE_BAND_RANGES):
        pick = has_age & (bands == b)
        ages[pick] = rng.integers(low, high + 1, size=int(pick.sum()))

    country_w = popularity_weights(len(COUNTRY_POOL), COUNTRY_SKEW_EXPONENT)
    countries = rng.choice(len(COUNTRY_POOL), size=cfg.n_users, p=country_w).astype(np.int16)
    countries[rng.random(cfg.n_users) < COUNTRY_MISSING_RATE] = -1

    weights = popularity_weights(cfg.n_interests, cfg.popularity_exponent)
    cum_weights = np.cumsum(weights)
    cum_weights[-1] = 1.0  # guard against accumulated rounding

    indptr = np.concatenate(([0], np.cumsum(counts)))
    indices = np.empty(int(indptr[-1]), dtype=np.int32)
    for row in range(cfg.n_users):
        sel = _sample_user_interests(rng, cum_weights, int(counts[row]), cfg.n_interests)
        indices[indptr[row]:indptr[row + 1]] = np.sort(sel)

    audiences = np.bincount(indices, minlength=cfg.n_interests)
    width = len(str(cfg.n_interests - 1))
    names = tuple(f"interest-{i:0{width}d}" for i in range(cfg.n_interests))
    catalog = Catalog(np.arange(cfg.n_interests, dtype=np.int64), names, audiences)

    return Population(
        catalog=catalog,
        user_ids=np.arange(cfg.n_users, dtype=np.int64),
        genders=genders,
        ages=ages,
        countries=countries,
        country_labels=COUNTRY_POOL,
        indptr=indptr,
        indices=indices,
        provenance=GeneratedProvenance(seed=cfg.seed, config_digest=cfg.digest()),
    )
