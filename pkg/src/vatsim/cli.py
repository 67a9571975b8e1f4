"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 solver error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from vatsim import kernels
from vatsim.errors import SolverError, VatsimError
from vatsim.microdata import SyntheticParams, generate_synthetic, load_microdata, write_microdata
from vatsim.pipeline import (
    Settings,
    baseline_tables,
    decomposition_table,
    simulate_tables,
    solve_scenarios,
    solution_table,
)
from vatsim.rates import default_schedule, load_rates, write_rates
from vatsim.reform import BUILTIN_SCENARIOS, baseline_revenue, builtin_scenario, load_scenario
from vatsim.tables import render, write_table
from vatsim.welfare import AdjustmentPolicy, indicator

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--households", type=Path, required=True, help="households.csv")
    p.add_argument("--expenditures", type=Path, required=True, help="expenditures.csv")
    p.add_argument("--rates", type=Path, default=None, help="rates.csv (default: bundled catalogue)")
    p.add_argument("--z-share", type=float, default=0.5, help="share of the income deficit filled (default 0.5)")
    p.add_argument("--poverty-line", type=float, default=420.0, help="per person per month (default 420)")
    p.add_argument("--deciles", type=int, default=10)
    p.add_argument("--quintiles", type=int, default=5)
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.add_argument("--tol", type=float, default=None, help="relative neutrality tolerance override")
    p.add_argument("--stamp", action="store_true", help="record a timestamp in run_manifest.json")


def _add_scenario_arg(p: argparse.ArgumentParser, required: bool) -> None:
    p.add_argument(
        "--scenario",
        action="append",
        default=[],
        required=required,
        help=f"scenario config path or builtin name ({', '.join(BUILTIN_SCENARIOS)}); repeatable",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vatsim", description="Indirect-tax incidence and revenue-neutral VAT reform microsimulation."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load inputs and report diagnostics")
    _add_data_args(p)
    _add_scenario_arg(p, required=False)

    p = sub.add_parser("baseline", help="incidence of the current system")
    _add_data_args(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--z-sweep", default=None, help="comma-separated z_share values, e.g. 0,0.25,0.5,0.75,1")

    p = sub.add_parser("simulate", help="solve and evaluate reform scenarios")
    _add_data_args(p)
    _add_scenario_arg(p, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--jobs", type=int, default=1, help="scenarios evaluated in parallel")

    p = sub.add_parser("solve", help="print revenue-neutral standard rates")
    _add_data_args(p)
    _add_scenario_arg(p, required=True)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("decompose", help="standard-rate cost of each favoured treatment")
    _add_data_args(p)
    _add_scenario_arg(p, required=True)
    p.add_argument("--feature", action="append", default=None,
                   help="removal to test: class:<name>, selective or cashback (default: all)")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--deficit-fraction", type=float, default=SyntheticParams.deficit_fraction)
    p.add_argument("--out", type=Path, required=True)
    return parser


def _settings(args) -> Settings:
    AdjustmentPolicy(args.z_share)
    return Settings(
        z_share=args.z_share,
        poverty_line=args.poverty_line,
        deciles=args.deciles,
        quintiles=args.quintiles,
        tol=args.tol,
    )


def _load(args):
    for path in (args.households, args.expenditures, args.rates):
        if path is not None and not path.is_file():
            raise FileNotFoundError(f"no such file: {path}")
    schedule = load_rates(args.rates) if args.rates else default_schedule()
    return load_microdata(args.households, args.expenditures, schedule)


def _scenarios(args):
    out = []
    for ref in args.scenario:
        path = Path(ref)
        if path.is_file():
            out.append(load_scenario(path))
        elif ref in BUILTIN_SCENARIOS:
            out.append(builtin_scenario(ref))
        else:
            raise FileNotFoundError(f"no such scenario file or builtin: {ref}")
    names = [s.name for s in out]
    if len(set(names)) != len(names):
        raise VatsimError(f"duplicate scenario names: {names}")
    return out


def _manifest(args, out_dir: Path, extra: dict | None = None) -> None:
    info = {
        "command": args.command,
        "households": str(args.households),
        "expenditures": str(args.expenditures),
        "rates": str(args.rates) if args.rates else "bundled",
        "scenarios": list(getattr(args, "scenario", []) or []),
        "z_share": args.z_share,
        "poverty_line": args.poverty_line,
        "deciles": args.deciles,
        "quintiles": args.quintiles,
        "tol": args.tol,
    }
    if extra:
        info.update(extra)
    if args.stamp:
        info["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(info, indent=2, sort_keys=True) + "\n"
    from vatsim.tables import atomic_write

    atomic_write(out_dir / "run_manifest.json", text)


def cmd_validate(args) -> int:
    errors = []
    ds = None
    try:
        _settings(args)
        ds = _load(args)
        scenarios = _scenarios(args)
        for sc in scenarios:
            sc.assign(ds.schedule)
    except (VatsimError, ValueError) as exc:
        errors.append(exc)
    if errors:
        for exc in errors:
            print(f"ERROR {type(exc).__name__}: {exc}")
        return EXIT_VALIDATION
    spend = ds.total_expenditure()
    income = indicator(ds, "disposable_income_adjusted", AdjustmentPolicy(args.z_share)).values
    print(f"households {len(ds)}")
    print(f"expenditure_rows {ds.n_rows}")
    print(f"households_weighted {ds.n_households_weighted:.2f}")
    print(f"population {ds.population:.2f}")
    print(f"zero_expenditure_households {int(np.sum(spend <= 0))}")
    print(f"nonpositive_income_households {int(np.sum(income <= 0))}")
    print(f"deficit_households {int(np.sum(ds.monetary_expenditure() > ds.income_monetary))}")
    print(f"baseline_revenue {baseline_revenue(ds):.2f}")
    print("OK")
    return EXIT_OK


def cmd_baseline(args) -> int:
    cfg = _settings(args)
    ds = _load(args)
    zs = [float(z) for z in args.z_sweep.split(",")] if args.z_sweep else None
    if zs:
        for z in zs:
            AdjustmentPolicy(z)
    tables = baseline_tables(ds, cfg, zs)
    for stem, (header, rows) in tables.items():
        write_table(args.out, stem, header, rows, args.format)
    _manifest(args, args.out)
    print(f"wrote {len(tables)} tables to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _settings(args)
    ds = _load(args)
    scenarios = _scenarios(args)
    per, combined = simulate_tables(ds, scenarios, cfg, jobs=args.jobs)
    for name, tables in per.items():
        for stem, (header, rows) in tables.items():
            write_table(args.out / name, stem, header, rows, args.format)
    for stem, (header, rows) in combined.items():
        write_table(args.out, stem, header, rows, args.format)
    _manifest(args, args.out)
    for name, tables in per.items():
        rate = dict(tables["solution"][1])["standard_rate_pct"]
        print(f"{name}: standard rate {rate}%")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _settings(args)
    ds = _load(args)
    scenarios = _scenarios(args)
    results = solve_scenarios(ds, scenarios, cfg, jobs=args.jobs)
    for res in results:
        header, rows = solution_table(res)
        if args.out:
            write_table(args.out / res.scenario, "solution", header, rows, args.format)
        rel = res.residual / res.target if res.target else float("nan")
        print(f"{res.scenario}: s = {res.standard_rate:.6f} (residual {rel:.2e})")
    return EXIT_OK


def cmd_decompose(args) -> int:
    cfg = _settings(args)
    ds = _load(args)
    scenarios = _scenarios(args)
    if len(scenarios) != 1:
        raise VatsimError("decompose takes exactly one --scenario")
    header, rows = decomposition_table(ds, scenarios[0], cfg, args.feature)
    write_table(args.out, "decomposition", header, rows, args.format)
    _manifest(args, args.out)
    sys.stdout.write(render(header, rows, "markdown"))
    return EXIT_OK


def cmd_synth(args) -> int:
    params = SyntheticParams(deficit_fraction=args.deficit_fraction)
    ds = generate_synthetic(args.n, args.seed, params)
    args.out.mkdir(parents=True, exist_ok=True)
    write_microdata(ds, args.out / "households.csv", args.out / "expenditures.csv")
    write_rates(ds.schedule, args.out / "rates.csv")
    print(f"wrote {len(ds)} households, {ds.n_rows} expenditure rows to {args.out}")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "baseline": cmd_baseline,
    "simulate": cmd_simulate,
    "solve": cmd_solve,
    "decompose": cmd_decompose,
    "synth": cmd_synth,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except SolverError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_IO
    except (VatsimError, ValueError) as exc:
        print(f"ERROR {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
