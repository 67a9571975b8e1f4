"""VAT reform scenarios: rate classes, selective tax, cashback, universal transfer.

Reform rates are outside-basis rates applied to each household's
net-of-baseline-tax monetary spending (real consumption held fixed). For a
fixed class structure, net revenue is affine in the standard rate ``s``:
every class rate is either ``multiplier * s`` or a constant, cashback
eligibility is decided on pre-reform spending, and a self-financed transfer
returns exactly the revenue of its financing items.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np
import yaml

from vatsim import kernels
from vatsim.errors import (
    BracketError,
    ConfigError,
    InactiveTransfer,
    MultiplyAssignedItem,
    NoProgress,
    UnassignedItem,
)
from vatsim.microdata import Household, MicrodataSet
from vatsim.rates import TAGS, RateSchedule, baseline_taxes, row_net_base

CLASS_KINDS = ("zero", "multiplier", "selective", "fixed", "excluded")
SCOPE_MODES = ("none", "all_items_except", "only_items")
TRANSFER_MODES = ("none", "universal_per_person")

DEFAULT_S_MAX = 5.0
DEFAULT_TOLERANCE = 1e-10
MAX_ITER = 200


@dataclass(frozen=True)
class RateClass:
    name: str
    kind: str
    value: float = 0.0
    tags: frozenset[str] = frozenset()
    items: frozenset[str] = frozenset()
    default: bool = False

    def __post_init__(self):
        if self.kind not in CLASS_KINDS:
            raise ConfigError(f"class {self.name!r}: unknown kind {self.kind!r}")
        if self.value < 0:
            raise ConfigError(f"class {self.name!r}: value must be >= 0")
        bad = set(self.tags) - TAGS
        if bad:
            raise ConfigError(f"class {self.name!r}: unknown tags {sorted(bad)}")

    def matches(self, code: str, tags: frozenset[str]) -> bool:
        return code in self.items or bool(self.tags & tags)

    @property
    def is_standard(self) -> bool:
        return self.kind == "multiplier" and self.value == 1.0

    def rate(self, s: float) -> float:
        """Outside-basis rate of this class at standard rate ``s``."""
        if self.kind in ("multiplier", "selective"):
            return self.value * s
        if self.kind == "fixed":
            return self.value
        return 0.0


@dataclass(frozen=True)
class CashbackPolicy:
    scope_mode: str = "none"
    scope_tags: frozenset[str] = frozenset()
    eligibility_line: float = 420.0

    def __post_init__(self):
        if self.scope_mode not in SCOPE_MODES:
            raise ConfigError(f"unknown cashback scope_mode {self.scope_mode!r}")
        if not self.eligibility_line > 0:
            raise ConfigError("cashback eligibility_line must be > 0")
        bad = set(self.scope_tags) - TAGS
        if bad:
            raise ConfigError(f"cashback: unknown tags {sorted(bad)}")

    @property
    def active(self) -> bool:
        return self.scope_mode != "none"

    def covers(self, tags: frozenset[str]) -> bool:
        if self.scope_mode == "all_items_except":
            return not (tags & self.scope_tags)
        if self.scope_mode == "only_items":
            return bool(tags & self.scope_tags)
        return False


@dataclass(frozen=True)
class TransferPolicy:
    mode: str = "none"
    financing_tags: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.mode not in TRANSFER_MODES:
            raise ConfigError(f"unknown transfer mode {self.mode!r}")
        if self.mode != "none" and not self.financing_tags:
            raise ConfigError("transfer: financing_tags must be non-empty when active")
        bad = set(self.financing_tags) - TAGS
        if bad:
            raise ConfigError(f"transfer: unknown tags {sorted(bad)}")

    @property
    def active(self) -> bool:
        return self.mode != "none"


@dataclass(frozen=True)
class ItemAssignment:
    """Per-item class index (``-1`` = outside every tax base) for one schedule."""

    class_of_item: np.ndarray
    coef_s: np.ndarray  # class rate = coef_s * s + const
    const: np.ndarray

    def rates(self, s: float) -> np.ndarray:
        return self.coef_s * s + self.const


@dataclass(frozen=True)
class ReformScenario:
    name: str
    classes: tuple[RateClass, ...]
    standard_rate: float | str = "solve"
    cashback: CashbackPolicy = CashbackPolicy()
    transfer: TransferPolicy = TransferPolicy()
    tolerance: float = DEFAULT_TOLERANCE
    description: str = ""

    def __post_init__(self):
        names = [c.name for c in self.classes]
        if len(set(names)) != len(names):
            raise ConfigError(f"scenario {self.name!r}: duplicate class names")
        if sum(c.is_standard for c in self.classes) != 1:
            raise ConfigError(f"scenario {self.name!r}: need exactly one multiplier class with value 1.0")
        if sum(c.default for c in self.classes) > 1:
            raise ConfigError(f"scenario {self.name!r}: at most one default class")
        if self.standard_rate != "solve":
            if not isinstance(self.standard_rate, (int, float)) or self.standard_rate < 0:
                raise ConfigError(f"scenario {self.name!r}: standard_rate must be 'solve' or >= 0")
        if not self.tolerance > 0:
            raise ConfigError(f"scenario {self.name!r}: tolerance must be > 0")

    @property
    def solve(self) -> bool:
        return self.standard_rate == "solve"

    @property
    def standard_class(self) -> RateClass:
        return next(c for c in self.classes if c.is_standard)

    def class_index(self, name: str) -> int:
        for i, c in enumerate(self.classes):
            if c.name == name:
                return i
        raise KeyError(name)

    def assign(self, schedule: RateSchedule) -> ItemAssignment:
        default = [i for i, c in enumerate(self.classes) if c.default]
        out = np.empty(len(schedule), dtype=np.int64)
        for j, it in enumerate(schedule.items):
            hits = [i for i, c in enumerate(self.classes) if c.matches(it.code, it.tags)]
            if len(hits) > 1:
                raise MultiplyAssignedItem(it.code, [self.classes[i].name for i in hits])
            if hits:
                idx = hits[0]
            elif "domestic_service" in it.tags:
                idx = -1
            elif default:
                idx = default[0]
            else:
                raise UnassignedItem(it.code)
            if idx >= 0 and self.classes[idx].kind == "excluded":
                idx = -1
            out[j] = idx
        coef = np.array(
            [c.value if c.kind in ("multiplier", "selective") else 0.0 for c in self.classes]
        )
        const = np.array([c.value if c.kind == "fixed" else 0.0 for c in self.classes])
        return ItemAssignment(out, coef, const)

    # -- variants used by the decomposition ---------------------------------

    def without_class(self, name: str) -> ReformScenario:
        """Move a class's items to the standard rate."""
        gone = self.classes[self.class_index(name)]
        if gone.is_standard:
            raise ConfigError("cannot remove the standard class")
        classes = []
        for c in self.classes:
            if c.name == name:
                continue
            if c.is_standard:
                c = dataclasses.replace(c, tags=c.tags | gone.tags, items=c.items | gone.items)
            classes.append(c)
        return dataclasses.replace(self, name=f"{self.name}-without-{name}", classes=tuple(classes))

    def without_cashback(self) -> ReformScenario:
        return dataclasses.replace(self, name=f"{self.name}-without-cashback", cashback=CashbackPolicy())

    def without_selective(self) -> ReformScenario:
        out = self
        for c in self.classes:
            if c.kind == "selective":
                out = out.without_class(c.name)
        return out

    def with_rate(self, s: float) -> ReformScenario:
        return dataclasses.replace(self, standard_rate=float(s))


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

_TOP_KEYS = {"name", "description", "standard_rate", "classes", "cashback", "transfer", "neutrality"}


def _tagset(value, where: str) -> frozenset[str]:
    if value is None:
        return frozenset()
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise ConfigError(f"{where}: expected a list of strings")
    return frozenset(value)


def _only(d: dict, allowed: set[str], where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown fields {sorted(extra)}")


def scenario_from_dict(cfg: dict, name: str | None = None) -> ReformScenario:
    _only(cfg, _TOP_KEYS, "scenario")
    name = cfg.get("name") or name
    if not name:
        raise ConfigError("scenario: missing name")
    if "classes" not in cfg or not isinstance(cfg["classes"], list):
        raise ConfigError(f"scenario {name!r}: 'classes' must be a list")
    classes = []
    for k, c in enumerate(cfg["classes"]):
        where = f"scenario {name!r} class #{k + 1}"
        _only(c, {"name", "kind", "value", "selector"}, where)
        sel = c.get("selector") or {}
        _only(sel, {"tags", "items", "default"}, f"{where} selector")
        kind = c.get("kind")
        value = c.get("value", 1.0 if kind == "multiplier" else 0.0)
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: value must be numeric") from None
        classes.append(
            RateClass(
                name=str(c.get("name", f"class{k + 1}")),
                kind=kind,
                value=value,
                tags=_tagset(sel.get("tags"), where),
                items=_tagset(sel.get("items"), where),
                default=bool(sel.get("default", False)),
            )
        )
    cb = cfg.get("cashback") or {}
    _only(cb, {"eligibility_line", "scope_mode", "scope_tags"}, "cashback")
    tr = cfg.get("transfer") or {}
    _only(tr, {"mode", "financing_tags"}, "transfer")
    neu = cfg.get("neutrality") or {}
    _only(neu, {"tolerance"}, "neutrality")
    rate = cfg.get("standard_rate", "solve")
    if rate != "solve":
        try:
            rate = float(rate)
        except (TypeError, ValueError):
            raise ConfigError(f"scenario {name!r}: standard_rate must be 'solve' or a number") from None
    return ReformScenario(
        name=str(name),
        classes=tuple(classes),
        standard_rate=rate,
        cashback=CashbackPolicy(
            scope_mode=cb.get("scope_mode", "none"),
            scope_tags=_tagset(cb.get("scope_tags"), "cashback"),
            eligibility_line=float(cb.get("eligibility_line", 420.0)),
        ),
        transfer=TransferPolicy(
            mode=tr.get("mode", "none"),
            financing_tags=_tagset(tr.get("financing_tags"), "transfer"),
        ),
        tolerance=float(neu.get("tolerance", DEFAULT_TOLERANCE)),
        description=str(cfg.get("description", "")),
    )


def load_scenario(path) -> ReformScenario:
    path = Path(path)
    try:
        cfg = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return scenario_from_dict(cfg, name=path.stem)


def scenario_to_dict(sc: ReformScenario) -> dict:
    def sel(c: RateClass) -> dict:
        out = {}
        if c.tags:
            out["tags"] = sorted(c.tags)
        if c.items:
            out["items"] = sorted(c.items)
        if c.default:
            out["default"] = True
        return out

    return {
        "name": sc.name,
        "description": sc.description,
        "standard_rate": sc.standard_rate,
        "classes": [
            {"name": c.name, "kind": c.kind, "value": c.value, "selector": sel(c)} for c in sc.classes
        ],
        "cashback": {
            "eligibility_line": sc.cashback.eligibility_line,
            "scope_mode": sc.cashback.scope_mode,
            "scope_tags": sorted(sc.cashback.scope_tags),
        },
        "transfer": {"mode": sc.transfer.mode, "financing_tags": sorted(sc.transfer.financing_tags)},
        "neutrality": {"tolerance": sc.tolerance},
    }


BUILTIN_SCENARIOS = ("reform1", "reform2", "reform3", "reform4")


def builtin_scenario_path(name: str) -> Path:
    from importlib import resources

    return Path(str(resources.files("vatsim.scenarios").joinpath(f"{name}.cfg")))


def builtin_scenario(name: str) -> ReformScenario:
    if name not in BUILTIN_SCENARIOS:
        raise KeyError(name)
    return load_scenario(builtin_scenario_path(name))


# ---------------------------------------------------------------------------
# per-household reference operations
# ---------------------------------------------------------------------------


def class_rate(scenario: ReformScenario, code: str, s: float, schedule: RateSchedule) -> float:
    it = schedule.item(code)
    hits = [c for c in scenario.classes if c.matches(code, it.tags)]
    if len(hits) > 1:
        raise MultiplyAssignedItem(code, [c.name for c in hits])
    if not hits:
        if "domestic_service" in it.tags:
            return 0.0
        default = [c for c in scenario.classes if c.default]
        if not default:
            raise UnassignedItem(code)
        hits = default
    return hits[0].rate(s)


def scenario_tax(
    h: Household, scenario: ReformScenario, bases: dict[str, float], s: float, schedule: RateSchedule
) -> tuple[float, dict[str, float]]:
    """Reform tax of one household and its per-item breakdown."""
    breakdown = {code: base * class_rate(scenario, code, s, schedule) for code, base in bases.items()}
    total = 0.0
    for v in breakdown.values():
        total += v
    return total, breakdown


def is_eligible(h: Household, scenario: ReformScenario) -> bool:
    return scenario.cashback.active and h.total_expenditure / h.size < scenario.cashback.eligibility_line


def cashback_amount(
    h: Household, scenario: ReformScenario, breakdown: dict[str, float], schedule: RateSchedule
) -> float:
    if not is_eligible(h, scenario):
        return 0.0
    total = 0.0
    for code, tax in breakdown.items():
        if scenario.cashback.covers(schedule.item(code).tags):
            total += tax
    return total


# ---------------------------------------------------------------------------
# vectorised evaluation
# ---------------------------------------------------------------------------


class ScenarioModel:
    """s-independent aggregates of one scenario on one dataset.

    Holds per-household, per-class sums of the reform base split into the
    full base, the cashback-refunded part, and the transfer-financing part.
    Evaluating at any ``s`` is then a handful of vector operations.
    """

    def __init__(self, ds: MicrodataSet, scenario: ReformScenario):
        self.ds = ds
        self.scenario = scenario
        sched = ds.schedule
        self.assignment = scenario.assign(sched)
        n_cls = len(scenario.classes)
        row_cls = self.assignment.class_of_item[ds.item] if ds.n_rows else np.zeros(0, dtype=np.int64)
        base = row_net_base(ds)
        self.class_base = kernels.segment_class_sum(ds.ptr, row_cls, base, n_cls)

        if scenario.cashback.active:
            covered = np.array([scenario.cashback.covers(it.tags) for it in sched.items], dtype=bool)
            pc_spend = ds.total_expenditure() / ds.size
            self.eligible = pc_spend < scenario.cashback.eligibility_line
            refund_cls = np.where(covered[ds.item], row_cls, -1) if ds.n_rows else row_cls
            refund = kernels.segment_class_sum(ds.ptr, refund_cls, base, n_cls)
            self.refund_base = refund * self.eligible[:, None]
        else:
            self.eligible = np.zeros(len(ds), dtype=bool)
            self.refund_base = np.zeros_like(self.class_base)

        if scenario.transfer.active:
            fin = sched.tag_mask(scenario.transfer.financing_tags)
            fin_cls = np.where(fin[ds.item], row_cls, -1) if ds.n_rows else row_cls
            self.financing_base = kernels.segment_class_sum(ds.ptr, fin_cls, base, n_cls)
        else:
            self.financing_base = None

    def _combine(self, matrix: np.ndarray, rates: np.ndarray) -> np.ndarray:
        out = np.zeros(matrix.shape[0])
        for c in range(matrix.shape[1]):
            if rates[c] != 0.0:
                out += matrix[:, c] * rates[c]
        return out

    def household_taxes(self, s: float) -> tuple[np.ndarray, np.ndarray]:
        rates = self.assignment.rates(s)
        return self._combine(self.class_base, rates), self._combine(self.refund_base, rates)

    def transfer_per_person(self, s: float) -> float:
        if self.financing_base is None:
            raise InactiveTransfer(f"scenario {self.scenario.name!r} has no transfer")
        fin = self._combine(self.financing_base, self.assignment.rates(s))
        revenue = kernels.seq_sum(self.ds.weight * fin)
        return revenue / self.ds.population

    def net_revenue(self, s: float) -> float:
        return self.evaluate(s).net_revenue

    def evaluate(self, s: float) -> ScenarioResult:
        w = self.ds.weight
        tax, cashback = self.household_taxes(s)
        if self.financing_base is not None:
            t = self.transfer_per_person(s)
            transfer = t * self.ds.size
        else:
            t = 0.0
            transfer = np.zeros(len(self.ds))
        gross = kernels.seq_sum(w * tax)
        cb = kernels.seq_sum(w * cashback)
        tr = kernels.seq_sum(w * transfer)
        return ScenarioResult(
            scenario=self.scenario.name,
            standard_rate=float(s),
            tax=tax,
            cashback=cashback,
            transfer=transfer,
            net_tax=tax - cashback - transfer,
            gross_revenue=gross,
            cashback_outlay=cb,
            transfer_outlay=tr,
            net_revenue=gross - cb - tr,
            transfer_per_person=t,
        )

    def affine_coefficients(self) -> tuple[float, float]:
        """Net revenue as ``fixed + slope * s`` from class-level aggregates.

        Independent of :meth:`evaluate`: sums each class's non-refunded,
        non-financing base once and multiplies by the class coefficients.
        """
        w = self.ds.weight
        eff = self.class_base - self.refund_base
        if self.financing_base is not None:
            eff = eff - self.financing_base
        agg = np.array([kernels.seq_sum(w * eff[:, c]) for c in range(eff.shape[1])])
        slope = float(np.dot(agg, self.assignment.coef_s))
        fixed = float(np.dot(agg, self.assignment.const))
        return fixed, slope

    def closed_form_rate(self, target: float) -> float:
        fixed, slope = self.affine_coefficients()
        if slope <= 0:
            raise BracketError(f"scenario {self.scenario.name!r}: revenue does not depend on the standard rate")
        return (target - fixed) / slope


@dataclass(eq=False)
class ScenarioResult:
    scenario: str
    standard_rate: float
    tax: np.ndarray
    cashback: np.ndarray
    transfer: np.ndarray
    net_tax: np.ndarray
    gross_revenue: float
    cashback_outlay: float
    transfer_outlay: float
    net_revenue: float
    transfer_per_person: float = 0.0
    target: float | None = None
    solved: bool = False
    iterations: int = 0

    @property
    def residual(self) -> float:
        return float("nan") if self.target is None else self.net_revenue - self.target


def baseline_revenue(ds: MicrodataSet) -> float:
    return kernels.seq_sum(ds.weight * baseline_taxes(ds))


def transfer_amount(ds: MicrodataSet, scenario: ReformScenario, s: float) -> float:
    """Universal transfer per person financed by the financing items' revenue."""
    if not scenario.transfer.active:
        raise InactiveTransfer(f"scenario {scenario.name!r} has no transfer")
    return ScenarioModel(ds, scenario).transfer_per_person(s)


def net_revenue(ds: MicrodataSet, scenario: ReformScenario, s: float) -> float:
    return ScenarioModel(ds, scenario).net_revenue(s)


def _bisect(model: ScenarioModel, target: float, tol: float, s_max: float) -> tuple[float, int]:
    f = model.net_revenue
    allow = tol * abs(target)
    lo, hi = 0.0, float(s_max)
    f_lo, f_hi = f(lo), f(hi)
    if abs(f_lo - target) <= allow:
        return lo, 0
    if abs(f_hi - target) <= allow:
        return hi, 0
    if not f_lo <= target <= f_hi:
        raise BracketError(
            f"scenario {model.scenario.name!r}: target {target:.6g} outside "
            f"[{f_lo:.6g}, {f_hi:.6g}] on s in [0, {s_max}]"
        )
    for it in range(1, MAX_ITER + 1):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid - target) <= allow:
            return mid, it
        if f_mid < target:
            lo = mid
        else:
            hi = mid
        if not lo < 0.5 * (lo + hi) < hi:
            break
    raise NoProgress(f"scenario {model.scenario.name!r}: tolerance {tol} not reached in {MAX_ITER} iterations")


def solve_neutral_rate(
    ds: MicrodataSet,
    scenario: ReformScenario,
    target: float | None = None,
    tol: float | None = None,
    s_max: float = DEFAULT_S_MAX,
    model: ScenarioModel | None = None,
) -> float:
    """Standard rate whose net revenue matches ``target`` (default: baseline revenue)."""
    target = baseline_revenue(ds) if target is None else float(target)
    tol = scenario.tolerance if tol is None else float(tol)
    model = ScenarioModel(ds, scenario) if model is None else model
    s, _ = _bisect(model, target, tol, s_max)
    return s


def run_scenario(
    ds: MicrodataSet,
    scenario: ReformScenario,
    target: float | None = None,
    tol: float | None = None,
    s_max: float = DEFAULT_S_MAX,
) -> ScenarioResult:
    """Solve (if configured) and evaluate a scenario."""
    target = baseline_revenue(ds) if target is None else float(target)
    model = ScenarioModel(ds, scenario)
    if scenario.solve:
        tol = scenario.tolerance if tol is None else float(tol)
        s, iters = _bisect(model, target, tol, s_max)
        res = model.evaluate(s)
        res.solved, res.iterations = True, iters
    else:
        res = model.evaluate(float(scenario.standard_rate))
    res.target = target
    return res


# ---------------------------------------------------------------------------
# decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecompositionRow:
    variant: str
    rate: float
    delta_pp: float


def default_features(scenario: ReformScenario) -> list[str]:
    """All single removals: every non-standard taxed class, then cashback."""
    feats = [f"class:{c.name}" for c in scenario.classes if not c.is_standard and c.kind != "excluded"]
    if scenario.cashback.active:
        feats.append("cashback")
    return feats


def apply_feature_removal(scenario: ReformScenario, feature: str) -> ReformScenario:
    if feature == "cashback":
        return scenario.without_cashback()
    if feature == "selective":
        return scenario.without_selective()
    if feature.startswith("class:"):
        name = feature.split(":", 1)[1]
        try:
            return scenario.without_class(name)
        except KeyError:
            raise ConfigError(f"no class named {name!r} in scenario {scenario.name!r}") from None
    raise ConfigError(f"unknown feature removal {feature!r}")


def decompose_standard_rate(
    ds: MicrodataSet,
    scenario: ReformScenario,
    features: Iterable[str] | None = None,
    target: float | None = None,
    tol: float | None = None,
    s_max: float = DEFAULT_S_MAX,
) -> list[DecompositionRow]:
    """Re-solve the neutral rate with one feature removed at a time."""
    target = baseline_revenue(ds) if target is None else float(target)
    features = default_features(scenario) if features is None else list(features)
    full = solve_neutral_rate(ds, scenario, target, tol, s_max)
    rows = [DecompositionRow("full", full, 0.0)]
    for feat in features:
        variant = apply_feature_removal(scenario, feat)
        s = solve_neutral_rate(ds, variant, target, tol, s_max)
        rows.append(DecompositionRow(f"without {feat.removeprefix('class:')}", s, (s - full) * 100.0))
    return rows


# ---------------------------------------------------------------------------
# comparison across scenarios
# ---------------------------------------------------------------------------


@dataclass
class ReformComparison:
    scenario: str
    deltas: "GroupedReport"
    impact: "DistributionReport"


def compare_reforms(
    ds: MicrodataSet,
    baseline_tax: np.ndarray,
    results: list[ScenarioResult],
    groups,
    line=420.0,
):
    """Per-quintile tax changes and poverty/inequality impact per scenario.

    ``groups`` should rank households by per-capita total expenditure.
    """
    from vatsim.distribution import PovertyLine, impact_report
    from vatsim.incidence import GroupedReport, group_means
    from vatsim.welfare import indicator

    line = line if isinstance(line, PovertyLine) else PovertyLine(float(line))
    mon = ds.monetary_expenditure()
    valid = mon > 0
    gross = indicator(ds, "total_expenditure")
    w = ds.weight
    out = []
    for res in results:
        delta = res.net_tax - baseline_tax
        ratio = np.divide(delta, mon, out=np.zeros_like(delta), where=valid)
        cells = np.vstack(
            [
                group_means(groups, w, baseline_tax),
                group_means(groups, w, mon),
                group_means(groups, w, res.net_tax),
                group_means(groups, w, delta),
                group_means(groups, w, ratio, valid),
            ]
        )
        rep = GroupedReport(
            f"tax change by group ({res.scenario})",
            ["baseline_tax", "monetary_expenditure", "reform_net_tax", "delta_tax", "delta_tax_over_expenditure"],
            cells,
            ["currency", "currency", "currency", "currency", "ratio"],
            groups.k,
            {"scenario": res.scenario, "weight_mode": "household", "k": groups.k},
            int((~valid).sum()),
        )
        impact = impact_report(ds, gross, res.net_tax, line, label=res.scenario)
        out.append(ReformComparison(res.scenario, rep, impact))
    return out
