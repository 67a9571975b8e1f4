"""Report assembly shared by the CLI: each function returns named tables.

A table is ``(header, rows)`` with every cell already formatted, so writing
is a pure serialisation step and reruns produce identical bytes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from vatsim.distribution import PovertyLine, impact_report, summary
from vatsim.incidence import budget_share_table, burden_table, class_share_table
from vatsim.microdata import MicrodataSet
from vatsim.rates import baseline_taxes, category_summary
from vatsim.reform import (
    DEFAULT_S_MAX,
    ReformScenario,
    ScenarioResult,
    baseline_revenue,
    compare_reforms,
    decompose_standard_rate,
    run_scenario,
)
from vatsim.tables import (
    _clean,
    distribution_rows,
    fmt_currency,
    fmt_pct,
    fmt_rate,
    grouped_rows,
)
from vatsim.welfare import AdjustmentPolicy, indicator, weighted_quantile_groups

Table = tuple[list[str], list[list[str]]]


@dataclass(frozen=True)
class Settings:
    z_share: float = 0.5
    poverty_line: float = 420.0
    deciles: int = 10
    quintiles: int = 5
    tol: float | None = None
    s_max: float = DEFAULT_S_MAX


def baseline_tables(ds: MicrodataSet, cfg: Settings, z_sweep: list[float] | None = None) -> dict[str, Table]:
    policy = AdjustmentPolicy(cfg.z_share)
    line = PovertyLine(cfg.poverty_line)
    taxes = baseline_taxes(ds)
    income = indicator(ds, "disposable_income_adjusted", policy)
    spend = indicator(ds, "total_expenditure", policy)
    deciles = weighted_quantile_groups(ds, income, cfg.deciles, "household")

    out: dict[str, Table] = {}
    out["rates_summary"] = (
        ["category", "rate_inside", "rate_outside"],
        [[c, fmt_rate(a), fmt_rate(b)] for c, a, b in category_summary(ds, ds.schedule)],
    )
    out["budget_shares"] = grouped_rows(budget_share_table(ds, deciles), "category")

    b_exp = burden_table(ds, taxes, "total_expenditure", deciles, policy, base=spend.values)
    b_inc = burden_table(ds, taxes, "disposable_income_adjusted", deciles, policy, base=income.values)
    header, rows_e = grouped_rows(b_exp, "base")
    _, rows_i = grouped_rows(b_inc, "base")
    rows_x = [["excluded_households", str(b_exp.excluded), str(b_inc.excluded)]]
    out["burden_by_decile"] = (header, rows_e + rows_i)
    out["burden_exclusions"] = (["table", "total_expenditure", "disposable_income_adjusted"], rows_x)

    out["impact_expenditure"] = distribution_rows(impact_report(ds, spend, taxes, line))
    out["impact_income"] = distribution_rows(impact_report(ds, income, taxes, line))

    if z_sweep:
        out["z_sweep"] = z_sweep_table(ds, taxes, cfg.deciles, z_sweep)
    return out


def z_sweep_burden(ds: MicrodataSet, taxes: np.ndarray, k: int, z: float) -> np.ndarray:
    """Income-basis burden by decile, deciles re-ranked on income adjusted with ``z``."""
    policy = AdjustmentPolicy(z)
    income = indicator(ds, "disposable_income_adjusted", policy)
    groups = weighted_quantile_groups(ds, income, k, "household")
    return burden_table(ds, taxes, "disposable_income_adjusted", groups, policy, base=income.values).cells[0]


def z_sweep_table(ds: MicrodataSet, taxes: np.ndarray, k: int, zs: list[float]) -> Table:
    header = ["z_share"] + [f"g{g}" for g in range(1, k + 1)] + ["all"]
    rows = []
    for z in zs:
        cells = z_sweep_burden(ds, taxes, k, z)
        rows.append([f"{z:g}"] + [_clean(fmt_pct(v)) for v in cells])
    return header, rows


def solution_table(res: ScenarioResult) -> Table:
    rel = res.residual / res.target if res.target else float("nan")
    rows = [
        ["scenario", res.scenario],
        ["standard_rate", repr(res.standard_rate)],
        ["standard_rate_pct", fmt_pct(res.standard_rate)],
        ["solved", "yes" if res.solved else "no"],
        ["iterations", str(res.iterations)],
        ["target_revenue", fmt_currency(res.target)],
        ["gross_revenue", fmt_currency(res.gross_revenue)],
        ["cashback_outlay", fmt_currency(res.cashback_outlay)],
        ["transfer_outlay", fmt_currency(res.transfer_outlay)],
        ["net_revenue", fmt_currency(res.net_revenue)],
        ["residual_relative", f"{rel:.3e}"],
        ["transfer_per_person", fmt_currency(res.transfer_per_person)],
    ]
    return ["field", "value"], rows


def solve_scenarios(
    ds: MicrodataSet, scenarios: list[ReformScenario], cfg: Settings, jobs: int = 1
) -> list[ScenarioResult]:
    target = baseline_revenue(ds)

    def one(sc: ReformScenario) -> ScenarioResult:
        return run_scenario(ds, sc, target=target, tol=cfg.tol, s_max=cfg.s_max)

    if jobs > 1 and len(scenarios) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, scenarios))
    return [one(sc) for sc in scenarios]


def simulate_tables(
    ds: MicrodataSet, scenarios: list[ReformScenario], cfg: Settings, jobs: int = 1
) -> tuple[dict[str, dict[str, Table]], dict[str, Table]]:
    """Per-scenario tables plus the cross-scenario comparison table."""
    line = PovertyLine(cfg.poverty_line)
    results = solve_scenarios(ds, scenarios, cfg, jobs)
    taxes = baseline_taxes(ds)
    spend = indicator(ds, "total_expenditure")
    quintiles = weighted_quantile_groups(ds, spend, cfg.quintiles, "household")
    comparisons = compare_reforms(ds, taxes, results, quintiles, line)

    per: dict[str, dict[str, Table]] = {}
    for sc, res, cmp in zip(scenarios, results, comparisons):
        per[sc.name] = {
            "class_shares": grouped_rows(class_share_table(ds, sc, ds.schedule, quintiles), "class"),
            "delta_by_quintile": grouped_rows(cmp.deltas, "metric"),
            "impact": distribution_rows(cmp.impact),
            "solution": solution_table(res),
        }

    current = summary(ds, spend.minus(taxes), line)
    header = ["metric", "current"] + [sc.name for sc in scenarios]
    rows = []
    for m in ("p0", "p1", "p2", "gini"):
        rows.append([m, fmt_rate(current[m])] + [fmt_rate(c.impact.net[m]) for c in comparisons])
    rows.append(["standard_rate", ""] + [fmt_rate(r.standard_rate) for r in results])
    return per, {"reform_comparison": (header, rows)}


def decomposition_table(
    ds: MicrodataSet, scenario: ReformScenario, cfg: Settings, features: list[str] | None = None
) -> Table:
    rows = decompose_standard_rate(ds, scenario, features, tol=cfg.tol, s_max=cfg.s_max)
    return (
        ["variant", "rate", "delta_pp"],
        [[r.variant, fmt_rate(r.rate), _clean(f"{r.delta_pp:.2f}")] for r in rows],
    )
