"""Command-line surface.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
failure (fit or bootstrap), 4 internal error. Output files are
byte-identical across runs for identical flags and seeds.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

from .engine import CensorPolicy, FLOOR_PRESETS, InvertedIndex
from .errors import DataFormatError, NanoscopeError, NumericalError
from .estimator import (
    build_matrix,
    quantile_vector,
    report_for_matrices,
    subgroup_reports,
)
from .population.generator import parse_generator_config
from .population.io import load_population, save_population
from .population.stats import summary_stats
from .reportio import report_rows_csv, report_to_json, subgroups_to_json, vector_csv
from .risk import (
    PopulationRiskSource,
    open_session,
    read_audience_table,
    risk_list,
    risk_list_csv,
    risk_report_json,
    whatif_uniqueness,
)
from .selection import RANDOM, STRATEGY_KINDS, SelectionStrategy
from .simulator import (
    CampaignSpec,
    PolicyGate,
    outcomes_csv,
    read_batch_file,
    run_batch,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3
EXIT_INTERNAL = 4


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_int_list(raw: str, what: str) -> list[int]:
    try:
        values = [int(part) for part in raw.split(",") if part.strip()]
    except ValueError:
        raise DataFormatError(f"{what} must be comma-separated integers, got {raw!r}") from None
    if not values:
        raise DataFormatError(f"{what} list is empty")
    return values


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_generate(args) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        raise DataFormatError(f"config file not found: {config_path}")
    cfg = parse_generator_config(config_path.read_text())
    from .population.generator import generate_population
    pop = generate_population(cfg)
    digest = save_population(pop, args.out)
    print(f"generated {pop.n_users} users / {pop.n_interests} interests -> {args.out}")
    print(f"digest {digest}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    from .population.io import ingest
    pop = ingest(args.users, args.catalog)
    digest = save_population(pop, args.out)
    print(f"ingested {pop.n_users} users / {pop.n_interests} interests -> {args.out}")
    print(f"digest {digest}")
    return EXIT_OK


def cmd_stats(args) -> int:
    pop = load_population(args.population)
    report = summary_stats(pop)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


def _strategy_from_args(args) -> SelectionStrategy:
    return SelectionStrategy(args.strategy, seed=args.seed)


def cmd_fit(args) -> int:
    pop = load_population(args.population)
    index = InvertedIndex.build(pop)
    policy = CensorPolicy(floor=args.floor)
    strategy = _strategy_from_args(args)
    quantiles = _parse_int_list(args.quantiles, "--quantiles")
    for q in quantiles:
        if not 0 < q < 100:
            raise DataFormatError(f"quantiles must be in (0, 100), got {q}")
    matrix = build_matrix(pop, index, strategy, policy, workers=args.workers)
    report = report_for_matrices(
        [matrix], [q / 100.0 for q in quantiles],
        n_resamples=args.bootstrap, seed=args.seed, workers=args.workers,
        label="all",
    )
    out = Path(args.out)
    _write(out / "report.json", report_to_json(report))
    _write(out / "report.csv", report_rows_csv(report))
    for q in quantiles:
        _write(out / f"vector_q{q}.csv", vector_csv(quantile_vector(matrix, float(q))))
    for row in report.rows:
        ci = f" ci=[{row.ci_low:.3f}, {row.ci_high:.3f}]" if row.ci_low is not None else ""
        print(f"{row.strategy} P={row.p:g}: cutpoint={row.cutpoint:.3f} "
              f"interests={row.interest_count}{ci}")
    return EXIT_OK


GROUP_FLAG_TO_GROUPING = {"gender": "gender", "age": "age_band", "country": "country"}


def cmd_subgroups(args) -> int:
    pop = load_population(args.population)
    index = InvertedIndex.build(pop)
    policy = CensorPolicy(floor=args.floor)
    strategy = _strategy_from_args(args)
    quantiles = _parse_int_list(args.quantiles, "--quantiles")
    result = subgroup_reports(
        pop, index, GROUP_FLAG_TO_GROUPING[args.group],
        [strategy], [q / 100.0 for q in quantiles], policy,
        min_users=args.min_users, n_resamples=args.bootstrap,
        seed=args.seed, workers=args.workers,
    )
    out = Path(args.out)
    _write(out / "subgroups.json", subgroups_to_json(result))
    _write(out / "subgroups.csv", report_rows_csv(result.reports))
    for report in result.reports:
        for row in report.rows:
            print(f"{report.label} {row.strategy} P={row.p:g}: cutpoint={row.cutpoint:.3f}")
    for s in result.skipped:
        print(f"skipped {s.label}: {s.reason}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    pop = load_population(args.population)
    index = InvertedIndex.build(pop)
    policy = CensorPolicy(floor=args.floor)
    gate = None
    if args.gate_max_interests is not None or args.gate_min_audience is not None:
        gate = PolicyGate(max_interests=args.gate_max_interests,
                          min_active_audience=args.gate_min_audience)

    if args.batch:
        specs = read_batch_file(args.batch, policy=policy)
    else:
        grid = _parse_int_list(args.interests, "--interests")
        strategy = _strategy_from_args(args)
        from .runtime import derived_rng
        rng = derived_rng(args.seed)
        n = pop.n_users
        if args.targets > n:
            rows = rng.integers(0, n, size=args.targets)
        else:
            rows = rng.choice(n, size=args.targets, replace=False)
        specs = [
            CampaignSpec(target=int(pop.user_ids[int(r)]), strategy=strategy,
                         n_interests=k, policy=policy)
            for k in grid for r in rows
        ]

    results = run_batch(index, pop, specs, gate=gate)
    outcomes = [o for _, _, o in results if o is not None]

    by_n: dict[int, list] = {}
    for spec, decision, outcome in results:
        if outcome is not None:
            by_n.setdefault(spec.n_interests, []).append(outcome)

    lines = ["n_interests,n_campaigns,n_success,success_rate"]
    for k in sorted(by_n):
        outs = by_n[k]
        wins = sum(1 for o in outs if o.success)
        lines.append(f"{k},{len(outs)},{wins},{wins / len(outs):.6f}")
    out = Path(args.out)
    _write(out / "success_rates.csv", "\n".join(lines) + "\n")
    _write(out / "outcomes.csv", outcomes_csv(outcomes))

    rejected = [(s, d) for s, d, o in results if not d.accepted]
    decision_lines = ["target,n_interests,accepted,reason"]
    for spec, decision, _ in results:
        decision_lines.append(
            f"{spec.target},{spec.n_interests},"
            f"{'true' if decision.accepted else 'false'},{decision.reason or ''}"
        )
    _write(out / "decisions.csv", "\n".join(decision_lines) + "\n")
    print(f"ran {len(outcomes)} campaigns, rejected {len(rejected)}")
    for k in sorted(by_n):
        outs = by_n[k]
        wins = sum(1 for o in outs if o.success)
        print(f"n={k}: success {wins}/{len(outs)} = {wins / len(outs):.3f}")
    return EXIT_OK


def cmd_risk(args) -> int:
    if bool(args.population) == bool(args.audience_table):
        raise DataFormatError("provide exactly one of --population or --audience-table")
    if args.population:
        pop = load_population(args.population)
        index = InvertedIndex.build(pop)
        source = PopulationRiskSource(pop, index)
    else:
        source = read_audience_table(args.audience_table)
    session = open_session(source, args.user)
    entries = risk_list(session, source)
    whatif = None
    if source.supports_whatif:
        whatif = whatif_uniqueness(
            session, source, SelectionStrategy(args.strategy, seed=args.seed),
            CensorPolicy(floor=args.floor),
        )
    out = Path(args.out)
    _write(out / "risks.csv", risk_list_csv(entries))
    _write(out / "risks.json", risk_report_json(session, entries, whatif))
    worst = entries[0] if entries else None
    if worst is not None:
        print(f"user {args.user}: {len(entries)} interests, "
              f"most identifying: {worst.name} (audience {worst.audience}, {worst.level.label})")
    if whatif is not None and whatif.unique_at is not None:
        print(f"unique after {whatif.unique_at} interests")
    return EXIT_OK


def cmd_serve(args) -> int:
    if bool(args.population) == bool(args.audience_table):
        raise DataFormatError("provide exactly one of --population or --audience-table")
    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text:
        raise DataFormatError(f"--listen must be addr:port, got {args.listen!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise DataFormatError(f"invalid port {port_text!r}") from None

    from .server import create_app

    if args.population:
        pop = load_population(args.population)
        index = InvertedIndex.build(pop)
        source = PopulationRiskSource(pop, index)
    else:
        source = read_audience_table(args.audience_table)
    app = create_app(source, report_resamples=args.report_resamples, ui_dir=args.ui)

    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="info")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nanoscope",
                     description="Audience uniqueness analytics for interest targeting")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic population")
    p.add_argument("--config", required=True, help="key=value generator config file")
    p.add_argument("--out", required=True, help="output population directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("ingest", help="build a population from users + catalog files")
    p.add_argument("--users", required=True, help="line-delimited JSON users file")
    p.add_argument("--catalog", required=True, help="interest catalog CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("stats", help="print summary statistics for a population")
    p.add_argument("--population", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("fit", help="estimate uniqueness cutpoints")
    p.add_argument("--population", required=True)
    p.add_argument("--strategy", choices=STRATEGY_KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--floor", type=int, choices=FLOOR_PRESETS, default=20)
    p.add_argument("--quantiles", default="50,80,90,95",
                   help="comma-separated percentiles (default 50,80,90,95)")
    p.add_argument("--bootstrap", type=int, default=10_000,
                   help="bootstrap resamples; 0 disables the interval")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("subgroups", help="per-subgroup uniqueness reports")
    p.add_argument("--population", required=True)
    p.add_argument("--group", choices=sorted(GROUP_FLAG_TO_GROUPING), required=True)
    p.add_argument("--min-users", type=int, default=100)
    p.add_argument("--strategy", choices=STRATEGY_KINDS, default=RANDOM)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--floor", type=int, choices=FLOOR_PRESETS, default=20)
    p.add_argument("--quantiles", default="90")
    p.add_argument("--bootstrap", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_subgroups)

    p = sub.add_parser("simulate", help="run single-person campaign batches")
    p.add_argument("--population", required=True)
    p.add_argument("--strategy", choices=STRATEGY_KINDS, default=RANDOM)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--interests", default="5,7,9,12,18,20,22",
                   help="comma-separated interest counts")
    p.add_argument("--targets", type=int, default=1000)
    p.add_argument("--floor", type=int, choices=FLOOR_PRESETS, default=1000)
    p.add_argument("--gate-max-interests", type=int, default=None)
    p.add_argument("--gate-min-audience", type=int, default=None)
    p.add_argument("--batch", default=None,
                   help="line-delimited campaign batch file (overrides the grid)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("risk", help="per-user risk report")
    p.add_argument("--population", default=None)
    p.add_argument("--audience-table", default=None,
                   help="CSV of interest_id,audience_size (no population needed)")
    p.add_argument("--user", type=int, required=True)
    p.add_argument("--strategy", choices=STRATEGY_KINDS, default="lp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--floor", type=int, choices=FLOOR_PRESETS, default=20)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_risk)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--population", default=None)
    p.add_argument("--audience-table", default=None)
    p.add_argument("--listen", default="127.0.0.1:8000")
    p.add_argument("--report-resamples", type=int, default=500)
    p.add_argument("--ui", default=None, help="directory of static UI files to serve at /")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NanoscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception:  # pragma: no cover - defensive
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
