"""Welfare indicators, the income-deficit adjustment, and weighted quantile groups."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Literal

import numpy as np

from vatsim.errors import DomainError, EmptySet
from vatsim.microdata import MicrodataSet

IndicatorKind = Literal["disposable_income_adjusted", "total_expenditure"]
WeightMode = Literal["household", "person"]

KINDS = ("disposable_income_adjusted", "total_expenditure")


@dataclass(frozen=True)
class AdjustmentPolicy:
    """Share of the monetary income deficit (consumption above income) filled in."""

    z_share: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.z_share <= 1.0:
            raise DomainError(f"z_share must lie in [0, 1], got {self.z_share!r}")


def adjust_income(y_monetary: float, c_monetary: float, policy: AdjustmentPolicy) -> float:
    if c_monetary > y_monetary:
        return y_monetary + policy.z_share * (c_monetary - y_monetary)
    return y_monetary


def adjust_incomes(y_monetary: np.ndarray, c_monetary: np.ndarray, policy: AdjustmentPolicy) -> np.ndarray:
    y = np.asarray(y_monetary, dtype=np.float64)
    c = np.asarray(c_monetary, dtype=np.float64)
    return np.where(c > y, y + policy.z_share * (c - y), y)


@dataclass(frozen=True, eq=False)
class WelfareIndicator:
    """Household-level welfare values plus household sizes for per-capita use."""

    kind: str
    values: np.ndarray
    size: np.ndarray

    @property
    def per_capita(self) -> np.ndarray:
        return self.values / self.size

    def minus(self, amounts: np.ndarray, kind: str | None = None) -> WelfareIndicator:
        """Indicator net of per-household ``amounts`` (taxes)."""
        return WelfareIndicator(kind or self.kind, self.values - amounts, self.size)


def indicator(ds: MicrodataSet, kind: str, policy: AdjustmentPolicy | None = None) -> WelfareIndicator:
    policy = AdjustmentPolicy() if policy is None else policy
    if kind == "disposable_income_adjusted":
        values = adjust_incomes(ds.income_monetary, ds.monetary_expenditure(), policy)
        values = values + ds.income_nonmonetary
    elif kind == "total_expenditure":
        values = ds.total_expenditure()
    else:
        raise ValueError(f"unknown indicator kind {kind!r}")
    return WelfareIndicator(kind, values, ds.size.astype(np.float64))


def _weights(ds: MicrodataSet, weight_mode: str) -> np.ndarray:
    if weight_mode == "household":
        return ds.weight
    if weight_mode == "person":
        return ds.person_weight
    raise ValueError(f"unknown weight_mode {weight_mode!r}")


@dataclass(frozen=True, eq=False)
class GroupAssignment:
    k: int
    group: np.ndarray  # 1..k, canonical household order
    household_id: np.ndarray
    weight_mode: str

    @property
    def group_of(self) -> dict[int, int]:
        return dict(zip(self.household_id.tolist(), self.group.tolist()))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["household_id", "group"])
            w.writerows(zip(self.household_id.tolist(), self.group.tolist()))


def weighted_quantile_groups(
    ds: MicrodataSet, ind: WelfareIndicator, k: int, weight_mode: str = "household"
) -> GroupAssignment:
    """Split households into ``k`` weighted quantile groups of the per-capita indicator.

    Households are ranked by per-capita value (ties by id) and placed in group
    ``floor(k * W_before / W) + 1`` where ``W_before`` is the weight ranked
    strictly ahead of them.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if len(ds) == 0:
        raise EmptySet("no households")
    w = _weights(ds, weight_mode)
    total = float(w.sum())
    if not total > 0:
        raise EmptySet("total weight is zero")
    order = np.lexsort((ds.household_id, ind.per_capita))
    ws = w[order]
    before = np.empty_like(ws)
    before[0] = 0.0
    before[1:] = np.cumsum(ws)[:-1]
    g_sorted = np.minimum(k, np.floor(k * before / total).astype(np.int64) + 1)
    group = np.empty(len(ds), dtype=np.int64)
    group[order] = g_sorted
    return GroupAssignment(int(k), group, ds.household_id, weight_mode)


def weighted_percentile(ds: MicrodataSet, ind: WelfareIndicator, p: float) -> float:
    """Lower weighted quantile of the per-capita indicator (household weights)."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p!r}")
    if len(ds) == 0:
        raise EmptySet("no households")
    v = ind.per_capita
    order = np.argsort(v, kind="stable")
    cum = np.cumsum(ds.weight[order])
    j = int(np.searchsorted(cum, p * cum[-1], side="left"))
    return float(v[order][min(j, v.size - 1)])
