import numpy as np
import pytest

from oracles import mean_of_ratios
from vatsim.incidence import budget_share_table, burden_table, class_share_table
from vatsim.rates import CATEGORIES, baseline_taxes
from vatsim.reform import BUILTIN_SCENARIOS, builtin_scenario
from vatsim.welfare import AdjustmentPolicy, WelfareIndicator, indicator, weighted_quantile_groups


def _one_group(ds, k=2):
    # every household in group 1 of k
    from vatsim.welfare import GroupAssignment

    return GroupAssignment(k, np.ones(len(ds), dtype=np.int64), ds.household_id, "household")


def test_mean_of_ratios_not_ratio_of_aggregates(build, hh):
    ds = build(hh(1, [("std_a", 100.0, 0.0)]), hh(2, [("std_a", 200.0, 0.0)]))
    rep = burden_table(ds, np.array([10.0, 40.0]), "total_expenditure", _one_group(ds))
    assert rep.cell("total_expenditure", "g1") == pytest.approx(0.15, abs=1e-15)
    assert rep.cell("total_expenditure", "all") == pytest.approx(0.15, abs=1e-15)
    assert abs(rep.cell("total_expenditure", "g1") - 50 / 300) > 0.01


def test_zero_taxes_and_exclusions(build, hh):
    ds = build(hh(1, [("std_a", 100.0, 0.0)]), hh(2, []), hh(3, [("std_b", 50.0, 0.0)]))
    rep = burden_table(ds, np.zeros(3), "total_expenditure", _one_group(ds))
    assert rep.cell("total_expenditure", "g1") == 0.0
    assert rep.excluded == 1


def test_burden_matches_oracle(synth):
    taxes = baseline_taxes(synth)
    inc = indicator(synth, "disposable_income_adjusted")
    groups = weighted_quantile_groups(synth, inc, 10)
    rep = burden_table(synth, taxes, "disposable_income_adjusted", groups)
    ref = mean_of_ratios(groups.group, synth.weight, taxes, inc.values, 10)
    np.testing.assert_allclose(rep.cells[0, :10], ref, rtol=1e-9)


def test_burden_homogeneity(synth):
    taxes = baseline_taxes(synth)
    spend = indicator(synth, "total_expenditure").values
    groups = weighted_quantile_groups(synth, indicator(synth, "total_expenditure"), 5)
    a = burden_table(synth, taxes, "total_expenditure", groups, base=spend).cells
    b = burden_table(synth, 3 * taxes, "total_expenditure", groups, base=3 * spend).cells
    c = burden_table(synth, 2 * taxes, "total_expenditure", groups, base=spend).cells
    np.testing.assert_allclose(b, a, rtol=1e-12)
    np.testing.assert_allclose(c, 2 * a, rtol=1e-12)


def test_budget_shares_examples(build, hh):
    ds = build(hh(1, [("std_a", 50.0, 0.0), ("std_b", 40.0, 10.0)]))
    rep = budget_share_table(ds, _one_group(ds))
    assert rep.cell("other_food", "g1") == pytest.approx(0.5)
    assert rep.cell("clothing", "g1") == pytest.approx(0.5)
    ds2 = build(hh(1, [("std_a", 10.0, 0.0)], weight=1.0), hh(2, [("std_b", 10.0, 0.0)], weight=3.0))
    assert budget_share_table(ds2, _one_group(ds2)).cell("other_food", "g1") == pytest.approx(0.25)


def test_budget_shares_partition(synth):
    groups = weighted_quantile_groups(synth, indicator(synth, "disposable_income_adjusted"), 10)
    rep = budget_share_table(synth, groups)
    assert rep.rows == list(CATEGORIES)
    assert rep.cells.shape == (15, 11)
    np.testing.assert_allclose(rep.column_sums() * 100, 100.0, atol=0.01)


def test_budget_shares_engel_pattern(synth):
    groups = weighted_quantile_groups(synth, indicator(synth, "disposable_income_adjusted"), 10)
    rep = budget_share_table(synth, groups)
    assert rep.cell("basic_food_basket", "g1") > rep.cell("basic_food_basket", "g10")


def test_replication_invariance(synth_small):
    from vatsim.microdata import MicrodataSet

    ds = synth_small
    n = len(ds)
    hh = {
        "household_id": np.concatenate([ds.household_id, ds.household_id + 10**6]),
        "weight": np.concatenate([ds.weight, ds.weight]) / 2,
        "size": np.concatenate([ds.size, ds.size]),
        "income_monetary": np.concatenate([ds.income_monetary, ds.income_monetary]),
        "income_nonmonetary": np.concatenate([ds.income_nonmonetary, ds.income_nonmonetary]),
    }
    rid = ds.household_id[ds.row_household]
    ex = {
        "household_id": np.concatenate([rid, rid + 10**6]),
        "item": np.concatenate([ds.item, ds.item]),
        "amount_monetary": np.concatenate([ds.amount_monetary, ds.amount_monetary]),
        "amount_nonmonetary": np.concatenate([ds.amount_nonmonetary, ds.amount_nonmonetary]),
    }
    dup = MicrodataSet.from_columns(ds.schedule, hh, ex)
    assert len(dup) == 2 * n
    from vatsim.welfare import GroupAssignment

    # twins keep their original's group: re-ranking may split a twin pair across a cut
    g = weighted_quantile_groups(ds, indicator(ds, "total_expenditure"), 5)
    g2 = GroupAssignment(5, np.concatenate([g.group, g.group]), dup.household_id, "household")
    a = burden_table(ds, baseline_taxes(ds), "total_expenditure", g).cells
    b = burden_table(dup, baseline_taxes(dup), "total_expenditure", g2).cells
    np.testing.assert_allclose(a, b, rtol=1e-9)
    np.testing.assert_allclose(budget_share_table(ds, g).cells, budget_share_table(dup, g2).cells, rtol=1e-9, atol=1e-15)
    # with re-ranking, the overall column is still unchanged
    g3 = weighted_quantile_groups(dup, indicator(dup, "total_expenditure"), 5)
    c = burden_table(dup, baseline_taxes(dup), "total_expenditure", g3).cells
    assert c[0, -1] == pytest.approx(a[0, -1], rel=1e-9)


def test_class_share_examples(schedule):
    from vatsim.microdata import Household, MicrodataSet

    sc = builtin_scenario("reform3")
    basket = [it.code for it in schedule.items if "basket" in it.tags][0]
    std = [it.code for it in schedule.items if not it.tags][0]
    dom = [it.code for it in schedule.items if "domestic_service" in it.tags][0]
    ds = MicrodataSet.from_households(
        [
            Household(1, 1.0, 1, 500.0, 0.0, ((basket, 100.0, 0.0),)),
            Household(2, 1.0, 1, 500.0, 0.0, ((basket, 60.0, 0.0), (std, 40.0, 0.0), (dom, 300.0, 0.0))),
        ],
        schedule,
    )
    from vatsim.welfare import GroupAssignment

    g = GroupAssignment(2, np.array([1, 2]), ds.household_id, "household")
    rep = class_share_table(ds, sc, schedule, g)
    zero = [c.name for c in sc.classes if c.kind == "zero"][0]
    standard = [c.name for c in sc.classes if c.is_standard][0]
    assert rep.cell(zero, "g1") == pytest.approx(1.0)
    assert rep.cell(zero, "g2") == pytest.approx(0.6)
    assert rep.cell(standard, "g2") == pytest.approx(0.4)


@pytest.mark.parametrize("name", list(BUILTIN_SCENARIOS))
def test_class_share_partition(synth, name):
    groups = weighted_quantile_groups(synth, indicator(synth, "total_expenditure"), 5)
    rep = class_share_table(synth, builtin_scenario(name), synth.schedule, groups)
    np.testing.assert_allclose(rep.column_sums() * 100, 100.0, atol=0.01)
