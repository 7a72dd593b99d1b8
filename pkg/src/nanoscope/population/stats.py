"""Descriptive statistics over a population."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataFormatError
from ..quantile import nearest_rank
from . import AGE_BANDS, GENDERS, Population, age_band

PERCENTILES = (1, 5, 25, 50, 75, 95, 99)


@dataclass(frozen=True)
class StatsReport:
    n_users: int
    n_interests: int
    total_occurrences: int
    interests_per_user: dict[int, float]
    interest_audience: dict[int, float]
    gender_counts: dict[str, int]
    age_band_counts: dict[str, int]
    country_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "n_users": self.n_users,
            "n_interests": self.n_interests,
            "total_occurrences": self.total_occurrences,
            "interests_per_user": {str(p): v for p, v in self.interests_per_user.items()},
            "interest_audience": {str(p): v for p, v in self.interest_audience.items()},
            "gender_counts": dict(self.gender_counts),
            "age_band_counts": dict(self.age_band_counts),
            "country_counts": dict(self.country_counts),
        }


def summary_stats(pop: Population) -> StatsReport:
    if pop.n_users == 0:
        raise DataFormatError("cannot summarize an empty population")

    counts = pop.interest_counts()
    audiences = pop.catalog.audiences
    per_user = {p: nearest_rank(counts, p) for p in PERCENTILES}
    per_interest = {p: nearest_rank(audiences, p) for p in PERCENTILES}

    gender_counts = {g: int((pop.genders == i).sum()) for i, g in enumerate(GENDERS)}

    band_counts = {label: 0 for label, _, _ in AGE_BANDS}
    band_counts["missing"] = int((pop.ages < 0).sum())
    for label, low, high in AGE_BANDS:
        m = pop.ages >= low
        if high is not None:
            m &= pop.ages <= high
        band_counts[label] = int(m.sum())

    country_counts: dict[str, int] = {}
    for code in range(len(pop.country_labels)):
        n = int((pop.countries == code).sum())
        if n:
            country_counts[pop.country_labels[code]] = n
    missing_country = int((pop.countries < 0).sum())
    if missing_country:
        country_counts["missing"] = missing_country

    return StatsReport(
        n_users=pop.n_users,
        n_interests=pop.n_interests,
        total_occurrences=pop.total_occurrences,
        interests_per_user=per_user,
        interest_audience=per_interest,
        gender_counts=gender_counts,
        age_band_counts=band_counts,
        country_counts=dict(sorted(country_counts.items())),
    )


__all__ = ["StatsReport", "summary_stats", "PERCENTILES", "age_band"]
