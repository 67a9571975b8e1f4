"""Acceptance criteria 1-9, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL: ...`` line. Run just
this module with ``pytest tests/test_acceptance.py -v`` or
``python3 tests/test_acceptance.py``.
"""

import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import fgt_loop, gini_pairwise
from vatsim.distribution import fgt_values, gini_values
from vatsim.incidence import budget_share_table, burden_table, class_share_table
from vatsim.microdata import SyntheticParams, generate_synthetic
from vatsim.pipeline import z_sweep_burden
from vatsim.rates import baseline_taxes, inside_to_outside, row_net_base
from vatsim.reform import (
    BUILTIN_SCENARIOS,
    ScenarioModel,
    baseline_revenue,
    builtin_scenario,
    decompose_standard_rate,
    run_scenario,
)
from vatsim.welfare import AdjustmentPolicy, GroupAssignment, indicator, weighted_quantile_groups

# inside-basis and outside-basis effective rates (%) for the 15 categories
TABLE_ONE = [
    ("basic_food_basket", 13.5, 15.6),
    ("other_food", 26.0, 35.1),
    ("tobacco_alcohol", 40.9, 69.2),
    ("clothing", 21.0, 26.6),
    ("electricity_gas", 33.8, 51.1),
    ("rent", 5.6, 5.9),
    ("household_goods_services", 13.9, 16.1),
    ("health", 15.3, 18.1),
    ("private_transport", 26.6, 36.2),
    ("public_transport", 21.0, 26.6),
    ("communication", 29.5, 41.8),
    ("education", 4.5, 4.7),
    ("recreation_culture", 24.7, 32.8),
    ("personal_care", 21.8, 27.9),
    ("other_goods_services", 10.7, 12.0),
]


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return _report


@pytest.fixture(scope="module")
def fixture_set():
    return generate_synthetic(5000, 2024, SyntheticParams(deficit_fraction=0.2))


def _dense_set(n, k, schedule, seed=99):
    """``n`` households each buying exactly ``k`` distinct items."""
    from vatsim.microdata import MicrodataSet

    rng = np.random.default_rng(seed)
    ids = np.arange(1, n + 1)
    items = np.argsort(rng.random((n, len(schedule))), axis=1)[:, :k]
    items.sort(axis=1)
    amounts = np.round(rng.lognormal(3.5, 1.0, (n, k)), 2)
    return MicrodataSet.from_columns(
        schedule,
        {
            "household_id": ids,
            "weight": rng.uniform(200, 2000, n),
            "size": rng.integers(1, 7, n),
            "income_monetary": amounts.sum(axis=1) * rng.uniform(0.5, 1.8, n),
            "income_nonmonetary": np.zeros(n),
        },
        {
            "household_id": np.repeat(ids, k),
            "item": items.ravel(),
            "amount_monetary": amounts.ravel(),
            "amount_nonmonetary": np.zeros(n * k),
        },
    )


def test_1_rate_algebra(report):
    worst = max(abs(inside_to_outside(t / 100) * 100 - o) for _, t, o in TABLE_ONE)
    t0 = time.perf_counter()
    for _, t, _ in TABLE_ONE:
        inside_to_outside(t / 100)
    elapsed = time.perf_counter() - t0
    ok = worst <= 0.05 + 1e-9 and elapsed < 1e-3
    report(1, ok, f"15 rows, max deviation {worst:.3f}pp (<=0.05), runtime {elapsed * 1e6:.1f}us (<1ms)")


def test_2_fgt_oracle(report):
    hand = [fgt_values([210.0, 630.0], [1.0, 1.0], 420.0, a) for a in (0, 1, 2)]
    rng = np.random.default_rng(20240601)
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(1, 101))
        y = rng.lognormal(6.0, 1.0, n)
        w = rng.uniform(0.5, 500.0, n)
        s = rng.integers(1, 10, n)
        line = float(rng.uniform(100, 1500))
        for a in (0, 1, 2):
            if fgt_values(y, w * s, line, a) != fgt_loop(y, w, s, line, a):
                mismatches += 1
    ok = hand == [0.5, 0.25, 0.125] and mismatches == 0
    report(2, ok, f"hand case {hand}, bitwise mismatches {mismatches}/3000")


def test_3_gini_oracle(report):
    rng = np.random.default_rng(7)
    worst = worst_scale = worst_rep = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 201))
        y = rng.lognormal(6.0, 1.0, n)
        ws = rng.uniform(0.1, 100.0, n) * rng.integers(1, 8, n)
        g = gini_values(y, ws)
        worst = max(worst, abs(g - gini_pairwise(y, ws)))
        c = float(rng.uniform(0.01, 100))
        worst_scale = max(worst_scale, abs(gini_values(c * y, ws) - g))
        worst_rep = max(worst_rep, abs(gini_values(np.r_[y, y], np.r_[ws, ws] / 2) - g))
    ok = max(worst, worst_scale, worst_rep) <= 1e-12
    report(3, ok, f"max |sorted - pairwise| {worst:.1e}, scale {worst_scale:.1e}, replication {worst_rep:.1e} (<=1e-12)")


def test_4_neutrality(report, fixture_set):
    target = baseline_revenue(fixture_set)
    worst_res = worst_cf = 0.0
    for name in BUILTIN_SCENARIOS:
        sc = builtin_scenario(name)
        res = run_scenario(fixture_set, sc, target=target)
        worst_res = max(worst_res, abs(res.net_revenue - target) / target)
        cf = ScenarioModel(fixture_set, sc).closed_form_rate(target)
        worst_cf = max(worst_cf, abs(res.standard_rate - cf) / cf)

    big = _dense_set(100_000, 30, fixture_set.schedule)
    big_target = baseline_revenue(big)
    run_scenario(big, builtin_scenario("reform1"), target=big_target)  # warm caches
    times = {}
    for name in BUILTIN_SCENARIOS:
        t0 = time.perf_counter()
        r = run_scenario(big, builtin_scenario(name), target=big_target)
        times[name] = time.perf_counter() - t0
        worst_res = max(worst_res, abs(r.net_revenue - big_target) / big_target)
    items_per_hh = big.n_rows / len(big)
    ok = worst_res <= 1e-6 and worst_cf <= 1e-9 and max(times.values()) < 2.0
    detail = (
        f"max residual {worst_res:.1e} (<=1e-6), bisection vs closed form {worst_cf:.1e} (<=1e-9), "
        f"{len(big)} households x {items_per_hh:.0f} items: "
        + ", ".join(f"{k} {v:.2f}s" for k, v in times.items())
        + " (<2s)"
    )
    report(4, ok, detail)


def test_5_decomposition_signs(report, fixture_set):
    sc = builtin_scenario("reform3")
    w = fixture_set.weight
    base = fixture_set.per_household(row_net_base(fixture_set))
    assert base.sum() > 0
    rows = {r.variant: r for r in decompose_standard_rate(fixture_set, sc, ["class:zero", "selective"])}
    dz, ds_ = rows["without zero"].delta_pp, rows["without selective"].delta_pp
    ok = dz < 0 < ds_
    report(5, ok, f"without zero class {dz:+.2f}pp (<0), without selective {ds_:+.2f}pp (>0)")


def test_6_income_adjustment(report, fixture_set):
    taxes = baseline_taxes(fixture_set)
    zs = [0.0, 0.25, 0.5, 0.75, 1.0]
    first = [float(z_sweep_burden(fixture_set, taxes, 10, z)[0]) for z in zs]
    monotone = all(b <= a for a, b in zip(first, first[1:]))
    raw = indicator(fixture_set, "disposable_income_adjusted", AdjustmentPolicy(0.0)).values
    exact = np.array_equal(raw, fixture_set.income_monetary + fixture_set.income_nonmonetary)
    deficit = int(np.sum(fixture_set.monetary_expenditure() > fixture_set.income_monetary))
    ok = monotone and exact and deficit > 0
    report(
        6,
        ok,
        f"first-decile burden by z {[round(100 * v, 1) for v in first]} non-increasing={monotone}, "
        f"z=0 exact={exact}, deficit households {deficit}",
    )


def test_7_accounting(report, fixture_set):
    ds = fixture_set
    identity = True
    worst_transfer = 0.0
    quint = weighted_quantile_groups(ds, indicator(ds, "total_expenditure"), 5)
    dec = weighted_quantile_groups(ds, indicator(ds, "disposable_income_adjusted"), 10)
    worst_share = float(np.max(np.abs(budget_share_table(ds, dec).column_sums() * 100 - 100)))
    for name in BUILTIN_SCENARIOS:
        sc = builtin_scenario(name)
        res = run_scenario(ds, sc)
        identity &= res.net_revenue == res.gross_revenue - res.cashback_outlay - res.transfer_outlay
        identity &= bool(np.array_equal(res.net_tax, res.tax - res.cashback - res.transfer))
        cs = class_share_table(ds, sc, ds.schedule, quint).column_sums() * 100
        worst_share = max(worst_share, float(np.max(np.abs(cs - 100))))
        if sc.transfer.active:
            fin = ds.schedule.tag_mask(sc.transfer.financing_tags)[ds.item]
            fin_base = ds.per_household(np.where(fin, row_net_base(ds), 0.0))
            financing = float(np.sum(ds.weight * fin_base)) * res.standard_rate
            worst_transfer = max(worst_transfer, abs(res.transfer_outlay - financing) / financing)
    ok = identity and worst_share <= 0.01 and worst_transfer <= 1e-9
    report(
        7,
        ok,
        f"gross-cashback-transfer=net exact={identity}, max share-column error {worst_share:.1e}pp (<=0.01), "
        f"transfers vs financing {worst_transfer:.1e} (<=1e-9)",
    )


def test_8_determinism(report, tmp_path, fixture_set):
    from vatsim.microdata import write_microdata

    h, e = tmp_path / "households.csv", tmp_path / "expenditures.csv"
    write_microdata(fixture_set, h, e)
    scen = [a for n in BUILTIN_SCENARIOS for a in ("--scenario", n)]
    outs = []
    for jobs in ("8", "1"):
        out = tmp_path / f"jobs{jobs}"
        cmd = [sys.executable, "-m", "vatsim", "simulate", "--households", str(h), "--expenditures", str(e),
               "--out", str(out), "--jobs", jobs] + scen
        subprocess.run(cmd, check=True, capture_output=True)
        outs.append(out)
    files = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    other = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    differ = [str(f) for f in files if (outs[0] / f).read_bytes() != (outs[1] / f).read_bytes()]
    ok = files == other and not differ and len(files) > 0
    report(8, ok, f"{len(files)} files compared, jobs=8 vs jobs=1 differing: {differ or 'none'}")


def test_9_mean_of_ratios(report, build, hh):
    ds = build(hh(1, [("std_a", 100.0, 0.0)]), hh(2, [("std_a", 200.0, 0.0)]))
    one = GroupAssignment(2, np.array([1, 1]), ds.household_id, "household")
    rep = burden_table(ds, np.array([10.0, 40.0]), "total_expenditure", one)
    cell = rep.cell("total_expenditure", "g1")
    ok = abs(cell - 0.15) <= 1e-12 and abs(cell - 50 / 300) > 0.01
    report(9, ok, f"burden cell {cell:.4f} (expected 0.15, ratio of aggregates would give {50 / 300:.4f})")


if __name__ == "__main__":
    here = Path(__file__).parent
    sys.exit(pytest.main([str(here / Path(__file__).name), "-q", "-p", "no:cacheprovider"]))
