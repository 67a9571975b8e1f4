"""Grouped incidence tables: tax burden, budget shares, rate-class shares.

Every cell is a weighted *mean of household ratios* (household weights), not a
ratio of group aggregates. Households whose denominator is not positive are
left out of the table they would break and counted in ``excluded``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vatsim import kernels
from vatsim.microdata import MicrodataSet
from vatsim.rates import CATEGORIES, RateSchedule
from vatsim.welfare import AdjustmentPolicy, GroupAssignment, indicator

# row units: share -> percent with 1 decimal, currency -> 2 decimals, ratio -> 4 decimals
UNITS = ("share", "currency", "ratio")


@dataclass
class GroupedReport:
    title: str
    rows: list[str]
    cells: np.ndarray  # (len(rows), k + 1); last column is "all"
    units: list[str]
    k: int
    metadata: dict = field(default_factory=dict)
    excluded: int = 0

    @property
    def columns(self) -> list[str]:
        return [f"g{g}" for g in range(1, self.k + 1)] + ["all"]

    def cell(self, row: str, col: str) -> float:
        return float(self.cells[self.rows.index(row), self.columns.index(col)])

    def column_sums(self) -> np.ndarray:
        return self.cells.sum(axis=0)


def group_means(groups: GroupAssignment, w: np.ndarray, x: np.ndarray, valid: np.ndarray | None = None) -> np.ndarray:
    """Weighted mean of ``x`` within each group, plus the overall mean last.

    Sums accumulate in canonical household order (bincount and running sums
    are both sequential), so results do not depend on thread count.
    """
    k = groups.k
    if valid is None:
        valid = np.ones(x.shape[0], dtype=bool)
    wv = np.where(valid, w, 0.0)
    wx = np.where(valid, w * x, 0.0)
    num = np.bincount(groups.group - 1, weights=wx, minlength=k)
    den = np.bincount(groups.group - 1, weights=wv, minlength=k)
    out = np.full(k + 1, np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        out[:k] = np.where(den > 0, num / den, np.nan)
    total_w = kernels.seq_sum(wv)
    if total_w > 0:
        out[k] = kernels.seq_sum(wx) / total_w
    return out


def burden_table(
    ds: MicrodataSet,
    taxes: np.ndarray,
    base_kind: str,
    groups: GroupAssignment,
    policy: AdjustmentPolicy | None = None,
    base: np.ndarray | None = None,
) -> GroupedReport:
    """Mean household tax burden ``tax / base`` per group.

    ``base`` may be passed directly; otherwise it is the household-level
    welfare indicator named by ``base_kind``.
    """
    if base is None:
        base = indicator(ds, base_kind, policy).values
    taxes = np.asarray(taxes, dtype=np.float64)
    valid = base > 0
    ratio = np.divide(taxes, base, out=np.zeros_like(taxes), where=valid)
    cells = group_means(groups, ds.weight, ratio, valid)[None, :]
    return GroupedReport(
        f"burden ({base_kind})",
        [base_kind],
        cells,
        ["share"],
        groups.k,
        {"base": base_kind, "weight_mode": "household", "k": groups.k},
        int((~valid).sum()),
    )


def budget_share_table(ds: MicrodataSet, groups: GroupAssignment) -> GroupedReport:
    """Mean share of total spending (monetary and non-monetary) per category."""
    cat = ds.schedule.category_index[ds.item] if ds.n_rows else np.zeros(0, dtype=np.int64)
    spend = kernels.segment_class_sum(ds.ptr, cat, ds.amount_monetary + ds.amount_nonmonetary, len(CATEGORIES))
    total = spend.sum(axis=1)
    valid = total > 0
    cells = np.empty((len(CATEGORIES), groups.k + 1))
    for c in range(len(CATEGORIES)):
        share = np.divide(spend[:, c], total, out=np.zeros_like(total), where=valid)
        cells[c] = group_means(groups, ds.weight, share, valid)
    return GroupedReport(
        "budget shares",
        list(CATEGORIES),
        cells,
        ["share"] * len(CATEGORIES),
        groups.k,
        {"base": "total_expenditure", "weight_mode": groups.weight_mode, "k": groups.k},
        int((~valid).sum()),
    )


def class_share_table(ds: MicrodataSet, scenario, schedule: RateSchedule, groups: GroupAssignment) -> GroupedReport:
    """Mean share of monetary spending falling in each of the scenario's rate classes.

    Domestic services and ``excluded`` classes are outside the denominator.
    """
    assignment = scenario.assign(schedule)
    names = [c.name for c in scenario.classes if c.kind != "excluded"]
    keep_idx = [i for i, c in enumerate(scenario.classes) if c.kind != "excluded"]
    row_cls = assignment.class_of_item[ds.item] if ds.n_rows else np.zeros(0, dtype=np.int64)
    per_class = kernels.segment_class_sum(ds.ptr, row_cls, ds.amount_monetary, len(scenario.classes))
    per_class = per_class[:, keep_idx]
    total = per_class.sum(axis=1)
    valid = total > 0
    cells = np.empty((len(names), groups.k + 1))
    for j in range(len(names)):
        share = np.divide(per_class[:, j], total, out=np.zeros_like(total), where=valid)
        cells[j] = group_means(groups, ds.weight, share, valid)
    return GroupedReport(
        f"class shares ({scenario.name})",
        names,
        cells,
        ["share"] * len(names),
        groups.k,
        {"base": "monetary_expenditure", "weight_mode": groups.weight_mode, "k": groups.k},
        int((~valid).sum()),
    )
