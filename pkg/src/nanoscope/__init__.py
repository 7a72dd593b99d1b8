"""nanoscope: how few interests does it take to reach exactly one person?

The package measures re-identification risk in interest-based ad
targeting: it counts exact audiences over an inverted index, models how
audience size decays as interests are stacked, estimates the interest
count at which a user becomes unique, simulates one-person campaigns,
and turns the same machinery into per-user risk advice.
"""

from .engine import (
    AudienceMembers,
    AudienceQuery,
    CensorPolicy,
    FLOOR_PRESETS,
    InvertedIndex,
    MAX_QUERY_INTERESTS,
    audience_size,
    brute_force_audience_size,
    reported_size,
)
from .errors import (
    BootstrapError,
    DataFormatError,
    FitError,
    NanoscopeError,
    NumericalError,
    StaleVersionError,
    UnknownEntityError,
)
from .estimator import (
    AudienceMatrix,
    BootstrapResult,
    FitResult,
    QuantileVector,
    ReportRow,
    UniquenessReport,
    bootstrap_ci,
    build_matrix,
    fit_loglog,
    fit_matrix_quantile,
    matrix_cutpoint,
    quantile_vector,
    report_for_matrices,
    subgroup_reports,
    truncate_at_floor,
    uniqueness_report,
)
from .population import (
    AGE_BANDS,
    Catalog,
    DemographicFilter,
    Demographics,
    Population,
    UserProfile,
    age_band,
    audit_population,
    filter_subgroup,
)
from .population.generator import (
    DEFAULT_CALIBRATION,
    GeneratorConfig,
    InterestCountModel,
    calibrated_config,
    format_generator_config,
    generate_population,
    parse_generator_config,
)
from .population.io import ingest, load_population, population_digest, save_population
from .population.stats import summary_stats
from .risk import (
    DEFAULT_THRESHOLDS,
    AudienceTableSource,
    PopulationRiskSource,
    ProfileSession,
    RiskEntry,
    RiskLevel,
    WhatIfReport,
    check_version,
    classify,
    open_session,
    read_audience_table,
    remove_interest,
    restore_interest,
    risk_list,
    whatif_uniqueness,
)
from .selection import (
    LEAST_POPULAR,
    PrefixAudiences,
    RANDOM,
    SelectionStrategy,
    ordered_positions_for_row,
    prefix_audiences,
    select_interests,
)
from .simulator import (
    CampaignOutcome,
    CampaignSpec,
    GateDecision,
    PolicyGate,
    apply_policy,
    outcomes_csv,
    read_batch_file,
    run_batch,
    run_campaign,
    success_rate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
