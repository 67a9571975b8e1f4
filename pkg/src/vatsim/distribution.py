"""FGT poverty indices and the Gini coefficient on gross and net-of-tax welfare.

All statistics are person-weighted: a household of size ``s`` and sampling
weight ``w`` counts as ``w * s`` persons, each at the household's per-capita
value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from vatsim import kernels
from vatsim.errors import DomainError, NonPositiveLine, NonPositiveMean
from vatsim.microdata import MicrodataSet
from vatsim.welfare import WelfareIndicator

METRICS = ("p0", "p1", "p2", "gini")


@dataclass(frozen=True)
class PovertyLine:
    line: float = 420.0

    def __post_init__(self):
        if not self.line > 0:
            raise NonPositiveLine(f"poverty line must be > 0, got {self.line!r}")


def _line_value(line) -> float:
    value = line.line if isinstance(line, PovertyLine) else float(line)
    if not value > 0:
        raise NonPositiveLine(f"poverty line must be > 0, got {value!r}")
    return value


def fgt_values(y, ws, line: float, alpha: int) -> float:
    """FGT index for per-capita values ``y`` with person weights ``ws``.

    Poor means strictly below the line. Sums run left to right in input order.
    """
    line = _line_value(line)
    if alpha not in (0, 1, 2):
        raise DomainError(f"alpha must be 0, 1 or 2, got {alpha!r}")
    num, den = kernels.fgt_sums(y, ws, line, alpha)
    return num / den


def gini_values(y, ws) -> float:
    """Weighted Gini via the sorted form of the mean absolute difference."""
    y = np.asarray(y, dtype=np.float64)
    ws = np.asarray(ws, dtype=np.float64)
    p = ws / ws.sum()
    mu = float(np.dot(p, y))
    if not mu > 0:
        raise NonPositiveMean(f"mean must be > 0, got {mu!r}")
    order = np.argsort(y, kind="stable")
    return kernels.gini_sorted(y[order], p[order]) / mu


def fgt(ds: MicrodataSet, ind: WelfareIndicator, line=PovertyLine(), alpha: int = 0) -> float:
    return fgt_values(ind.per_capita, ds.person_weight, _line_value(line), alpha)


def gini(ds: MicrodataSet, ind: WelfareIndicator) -> float:
    return gini_values(ind.per_capita, ds.person_weight)


def summary(ds: MicrodataSet, ind: WelfareIndicator, line=PovertyLine()) -> dict[str, float]:
    y = ind.per_capita
    ws = ds.person_weight
    out = {f"p{a}": fgt_values(y, ws, _line_value(line), a) for a in (0, 1, 2)}
    out["gini"] = gini_values(y, ws)
    return out


def _variation(gross: float, net: float) -> float:
    if gross == 0:
        return 0.0 if net == 0 else math.nan
    return (net - gross) / gross * 100.0


@dataclass
class DistributionReport:
    gross: dict[str, float]
    net: dict[str, float]
    label: str = ""
    flags: list[str] = field(default_factory=list)

    @property
    def variation_pct(self) -> dict[str, float]:
        return {m: _variation(self.gross[m], self.net[m]) for m in METRICS}

    def rows(self) -> list[tuple[str, float, float, float]]:
        var = self.variation_pct
        return [(m, self.gross[m], self.net[m], var[m]) for m in METRICS]


def impact_report(
    ds: MicrodataSet,
    ind_gross: WelfareIndicator,
    taxes: np.ndarray,
    line=PovertyLine(),
    label: str = "",
) -> DistributionReport:
    """Poverty and inequality before and after deducting per-household ``taxes``."""
    net_ind = ind_gross.minus(np.asarray(taxes, dtype=np.float64))
    gross = summary(ds, ind_gross, line)
    net = summary(ds, net_ind, line)
    flags = []
    for tag, values in (("gross", ind_gross.per_capita), ("net", net_ind.per_capita)):
        if np.any(values < 0):
            flags.append(f"{tag}: negative values present; Gini may exceed 1")
    return DistributionReport(gross, net, label, flags)
