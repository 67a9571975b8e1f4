"""Distributional incidence of consumption taxes and revenue-neutral VAT reforms
on weighted household budget-survey microdata."""

from vatsim.distribution import DistributionReport, PovertyLine, fgt, gini, impact_report
from vatsim.incidence import GroupedReport, budget_share_table, burden_table, class_share_table
from vatsim.microdata import Household, MicrodataSet, SyntheticParams, generate_synthetic, load_microdata
from vatsim.rates import RateSchedule, baseline_tax, inside_to_outside, load_rates, net_base, outside_to_inside
from vatsim.reform import (
    ReformScenario,
    ScenarioResult,
    decompose_standard_rate,
    load_scenario,
    net_revenue,
    run_scenario,
    solve_neutral_rate,
)
from vatsim.welfare import AdjustmentPolicy, indicator, weighted_percentile, weighted_quantile_groups

__version__ = "0.1.0"
