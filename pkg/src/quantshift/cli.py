"""Command-line experiment runner.

Subcommands:
  run     execute a configuration (or the three built-in benchmark scenarios)
          and write result tables as CSV / markdown
  tables  re-render tables from a stored results.json
  verify  recompute the population panels and check every cell against the
          embedded reference tables

Exit codes: 0 on success, 1 for configuration errors, 2 for numerical
failures or verification mismatches.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

from . import reference
from .experiment import (
    ConfigError,
    ExperimentConfig,
    ResultTable,
    density_grid_csv,
    emit_table,
    parse_config,
    run_experiment,
    tables_from_json,
    tables_to_json,
)
from .models import BinormalParams, binormal_population, normal_pdf
from .numerics import NonFinite, NoSignChange
from .quantify import DegenerateClassifier
from .sampling import EnvelopeViolation
from .shift import (
    NoInteriorSolution,
    ShiftKind,
    ShiftScenario,
    decompose_mixture,
    envelope_support,
)

_NUMERICAL_ERRORS = (
    NoInteriorSolution,
    NonFinite,
    NoSignChange,
    EnvelopeViolation,
    DegenerateClassifier,
)

# The built-in benchmark set: the prior-shift scenario reports all four
# metrics; the two derived scenarios report the estimate tables only.
_BENCHMARK_OUTPUTS = {
    ShiftKind.PRIOR_SHIFT: ("prevalence", "relative_error", "accuracy", "f_measure"),
    ShiftKind.INVARIANT_RATIO: ("prevalence", "relative_error"),
    ShiftKind.SQRT_RATIO: ("prevalence", "relative_error"),
}


def _apply_overrides(
    config: ExperimentConfig, seed: int | None, panels: tuple[str, ...] | None
) -> ExperimentConfig:
    if seed is not None:
        config = replace(config, seed=seed)
    if panels is not None:
        config = replace(config, panels=panels)
    return config


def _benchmark_configs(seed: int | None, panels: tuple[str, ...] | None) -> list[ExperimentConfig]:
    return [
        _apply_overrides(ExperimentConfig(scenario=kind, outputs=outputs), seed, panels)
        for kind, outputs in _BENCHMARK_OUTPUTS.items()
    ]


def _panel_choice(value: str) -> tuple[str, ...]:
    if value == "both":
        return ("population", "sample")
    return (value,)


def _write_tables(tables: list[ResultTable], outdir: Path, formats: tuple[str, ...]) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    for table in tables:
        stem = f"{table.scenario}_{table.metric}_{table.panel}"
        if "csv" in formats:
            (outdir / f"{stem}.csv").write_text(emit_table(table, "csv"))
            (outdir / f"{stem}_full.csv").write_text(emit_table(table, "csv", full_precision=True))
        if "markdown" in formats:
            (outdir / f"{stem}.md").write_text(emit_table(table, "markdown"))


def _cmd_run(args) -> int:
    formats = ("csv", "markdown") if args.format == "both" else (args.format,)
    panels = _panel_choice(args.panel) if args.panel else None

    if args.config is not None:
        config = parse_config(Path(args.config).read_text())
        configs = [_apply_overrides(config, args.seed, panels)]
    else:
        configs = _benchmark_configs(args.seed, panels)

    outdir = Path(args.outdir)
    all_tables: list[ResultTable] = []
    for config in configs:
        config.validate()
        tables = run_experiment(config)
        all_tables.extend(tables)
        _write_tables(tables, outdir, formats)
        (outdir / f"{config.scenario.value}_densities.csv").write_text(density_grid_csv(config))
        (outdir / f"{config.scenario.value}_results.json").write_text(
            tables_to_json(tables, config)
        )
    print(f"wrote {len(all_tables)} tables to {outdir}")
    return 0


def _cmd_tables(args) -> int:
    formats = ("csv", "markdown") if args.format == "both" else (args.format,)
    tables = tables_from_json(Path(args.results).read_text())
    _write_tables(tables, Path(args.outdir), formats)
    print(f"re-rendered {len(tables)} tables to {args.outdir}")
    return 0


def _check(name: str, ok: bool, detail: str = "") -> bool:
    status = "PASS" if ok else "FAIL"
    suffix = f"  ({detail})" if detail else ""
    print(f"[{status}] {name}{suffix}")
    return ok


def _max_gap(table: ResultTable, expected: dict, overrides: dict | None = None) -> float:
    worst = 0.0
    for label in table.row_labels:
        for j, (got, want) in enumerate(zip(table.row(label), expected[label])):
            if overrides and (table.scenario, label, j) in overrides:
                want = overrides[(table.scenario, label, j)]
            if math.isnan(want) or math.isnan(got):
                continue
            worst = max(worst, abs(got - want))
    return worst


def _cmd_verify(args) -> int:
    del args
    ok = True

    train = binormal_population(BinormalParams(), 0.5)
    for kind, expected_weight in (
        (ShiftKind.INVARIANT_RATIO, reference.MIXTURE_WEIGHT_INVARIANT),
        (ShiftKind.SQRT_RATIO, reference.MIXTURE_WEIGHT_SQRT),
    ):
        scenario = ShiftScenario(kind, train, 0.5)
        ratio = train.ratio if kind is ShiftKind.INVARIANT_RATIO else train.ratio.sqrt()
        weight, _, _ = decompose_mixture(
            lambda x: normal_pdf(x, scenario.envelope_mean, scenario.envelope_sd),
            ratio,
            envelope_support(scenario),
        )
        ok &= _check(
            f"mixture weight ({kind.value})",
            abs(weight - expected_weight) <= 5e-7,
            f"{weight:.7f} vs {expected_weight}",
        )

    for kind in ShiftKind:
        config = ExperimentConfig(
            scenario=kind, panels=("population",), outputs=_BENCHMARK_OUTPUTS[kind]
        )
        tables = {t.metric: t for t in run_experiment(config)}
        name = kind.value

        gap = _max_gap(tables["prevalence"], reference.PREVALENCE_TABLES[name])
        ok &= _check(f"prevalence table ({name})", gap <= 1e-3, f"max gap {gap:.2e}")

        gap = _max_gap(
            tables["relative_error"],
            reference.RELATIVE_ERROR_TABLES[name],
            reference.GROUND_TRUTH_OVERRIDES,
        )
        ok &= _check(f"relative error table ({name})", gap <= 2e-3, f"max gap {gap:.2e}")

        if kind is ShiftKind.PRIOR_SHIFT:
            gap = _max_gap(tables["accuracy"], reference.ACCURACY_TABLE)
            ok &= _check("accuracy table (prior_shift)", gap <= 1e-3, f"max gap {gap:.2e}")
            gap = _max_gap(tables["f_measure"], reference.F_MEASURE_TABLE)
            ok &= _check("f-measure table (prior_shift)", gap <= 1e-3, f"max gap {gap:.2e}")
            got_nan = {
                (label, j)
                for label in tables["f_measure"].row_labels
                for j, v in enumerate(tables["f_measure"].row(label))
                if math.isnan(v)
            }
            want_nan = {
                (label, j)
                for label, row in reference.F_MEASURE_TABLE.items()
                for j, v in enumerate(row)
                if math.isnan(v)
            }
            ok &= _check(
                "f-measure NaN pattern (prior_shift)",
                got_nan == want_nan,
                f"{sorted(got_nan)}",
            )
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantshift",
        description="Class-prevalence quantification experiments under dataset shift.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a configuration (default: the benchmark scenarios)")
    run_p.add_argument("config", nargs="?", default=None, help="path to a key = value config file")
    run_p.add_argument("--outdir", default="results", help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override the configured seed")
    run_p.add_argument(
        "--panel", choices=("population", "sample", "both"), default=None,
        help="restrict to one panel",
    )
    run_p.add_argument("--format", choices=("csv", "markdown", "both"), default="csv")
    run_p.set_defaults(func=_cmd_run)

    tables_p = sub.add_parser("tables", help="re-render stored results")
    tables_p.add_argument("results", help="path to a *_results.json file")
    tables_p.add_argument("--outdir", default="results", help="output directory")
    tables_p.add_argument("--format", choices=("csv", "markdown", "both"), default="csv")
    tables_p.set_defaults(func=_cmd_tables)

    verify_p = sub.add_parser(
        "verify", help="check the population panels against the embedded reference tables"
    )
    verify_p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
