"""Baseline effective-rate schedule and inside/outside rate algebra.

Rates in a :class:`RateSchedule` are *inside-basis* ("tax-inclusive"): the tax
embedded in a purchase is ``spend * rate_inside``. Reform rates are quoted on
the *outside basis*, relative to the tax-exclusive price, and apply to the
net-of-baseline-tax base returned by :func:`net_base`.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import TYPE_CHECKING, Iterable

import numpy as np

from vatsim.errors import DomainError, MalformedRow, UnknownItemCode, ValidationError

if TYPE_CHECKING:
    from vatsim.microdata import Household, MicrodataSet

CATEGORIES: tuple[str, ...] = (
    "basic_food_basket",
    "other_food",
    "tobacco_alcohol",
    "clothing",
    "electricity_gas",
    "rent",
    "household_goods_services",
    "health",
    "private_transport",
    "public_transport",
    "communication",
    "education",
    "recreation_culture",
    "personal_care",
    "other_goods_services",
)

TAGS: frozenset[str] = frozenset(
    {
        "basket",
        "tobacco_alcohol",
        "energy_gas",
        "domestic_service",
        "financial_health",
        "educ_health_meds_transit_culture",
        "professional_services",
    }
)

# Category mean inside-basis rates of the current Brazilian system (2017-18
# survey, 2015 input-output matrix). Used for fixtures and summary tables.
CATEGORY_MEAN_RATES: dict[str, float] = {
    "basic_food_basket": 0.135,
    "other_food": 0.260,
    "tobacco_alcohol": 0.409,
    "clothing": 0.210,
    "electricity_gas": 0.338,
    "rent": 0.056,
    "household_goods_services": 0.139,
    "health": 0.153,
    "private_transport": 0.266,
    "public_transport": 0.210,
    "communication": 0.295,
    "education": 0.045,
    "recreation_culture": 0.247,
    "personal_care": 0.218,
    "other_goods_services": 0.107,
}

RATES_HEADER = ["item_code", "category", "rate_inside", "tags"]


def inside_to_outside(t_in: float) -> float:
    """Convert a tax-inclusive rate to the equivalent tax-exclusive rate."""
    if not 0.0 <= t_in < 1.0:
        raise DomainError(f"inside rate must lie in [0, 1), got {t_in!r}")
    return t_in / (1.0 - t_in)


def outside_to_inside(t_out: float) -> float:
    if not t_out >= 0.0:
        raise DomainError(f"outside rate must be >= 0, got {t_out!r}")
    return t_out / (1.0 + t_out)


@dataclass(frozen=True)
class ItemCode:
    code: str
    category: str
    tags: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.code:
            raise ValidationError("empty item code")
        if self.category not in CATEGORIES:
            raise ValidationError(f"item {self.code!r}: unknown category {self.category!r}")
        unknown = set(self.tags) - TAGS
        if unknown:
            raise ValidationError(f"item {self.code!r}: unknown tags {sorted(unknown)}")
        if "basket" in self.tags and "tobacco_alcohol" in self.tags:
            raise ValidationError(f"item {self.code!r}: basket and tobacco_alcohol are exclusive")


class RateSchedule:
    """Per-item inside-basis rates plus item metadata.

    Items keep the order they were given in; that order defines the item
    index used by :class:`~vatsim.microdata.MicrodataSet` rows.
    """

    def __init__(self, items: Iterable[tuple[ItemCode, float]]):
        items = list(items)
        self.items: tuple[ItemCode, ...] = tuple(it for it, _ in items)
        self.rate_inside = np.array([float(r) for _, r in items], dtype=np.float64)
        self.rate_inside.setflags(write=False)
        self._index: dict[str, int] = {}
        for i, it in enumerate(self.items):
            if it.code in self._index:
                raise ValidationError(f"duplicate item code {it.code!r} in schedule")
            self._index[it.code] = i
        for it, r in zip(self.items, self.rate_inside):
            if not 0.0 <= r < 1.0:
                raise ValidationError(f"item {it.code!r}: rate_inside {r!r} outside [0, 1)")
            if "domestic_service" in it.tags and r != 0.0:
                raise ValidationError(f"item {it.code!r}: domestic_service must have rate 0")
        self.category_index = np.array(
            [CATEGORIES.index(it.category) for it in self.items], dtype=np.int64
        )
        self.category_index.setflags(write=False)

    def __len__(self) -> int:
        return len(self.items)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RateSchedule):
            return NotImplemented
        return self.items == other.items and np.array_equal(self.rate_inside, other.rate_inside)

    def __repr__(self) -> str:
        return f"RateSchedule({len(self)} items)"

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(it.code for it in self.items)

    def index(self, code: str) -> int:
        try:
            return self._index[code]
        except KeyError:
            raise UnknownItemCode(code) from None

    def __contains__(self, code: str) -> bool:
        return code in self._index

    def rate(self, code: str) -> float:
        return float(self.rate_inside[self.index(code)])

    def item(self, code: str) -> ItemCode:
        return self.items[self.index(code)]

    def tag_mask(self, tags: Iterable[str]) -> np.ndarray:
        """Boolean mask over items carrying any of ``tags``."""
        tags = set(tags)
        return np.array([bool(it.tags & tags) for it in self.items], dtype=bool)

    @property
    def domestic_mask(self) -> np.ndarray:
        return self.tag_mask({"domestic_service"})


def _parse_rates(text: str, path: str) -> RateSchedule:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(path, 1, "empty file") from None
    if header != RATES_HEADER:
        raise MalformedRow(path, 1, f"expected header {','.join(RATES_HEADER)}")
    items = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 4:
            raise MalformedRow(path, lineno, f"expected 4 fields, got {len(row)}")
        code, category, rate, tags = row
        try:
            r = float(rate)
        except ValueError:
            raise MalformedRow(path, lineno, f"non-numeric rate_inside {rate!r}") from None
        tagset = frozenset(t.strip() for t in tags.split(";") if t.strip())
        try:
            items.append((ItemCode(code.strip(), category.strip(), tagset), r))
        except ValidationError as exc:
            raise MalformedRow(path, lineno, str(exc)) from None
    try:
        return RateSchedule(items)
    except ValidationError as exc:
        raise MalformedRow(path, 0, str(exc)) from None


def load_rates(path) -> RateSchedule:
    path = Path(path)
    return _parse_rates(path.read_text(encoding="utf-8"), str(path))


def write_rates(schedule: RateSchedule, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RATES_HEADER)
        for it, r in zip(schedule.items, schedule.rate_inside):
            w.writerow([it.code, it.category, repr(float(r)), ";".join(sorted(it.tags))])


def default_schedule() -> RateSchedule:
    """The 30-item catalogue shipped with the package (used by the generator)."""
    text = resources.files("vatsim.data").joinpath("rates.csv").read_text(encoding="utf-8")
    return _parse_rates(text, "vatsim/data/rates.csv")


# ---------------------------------------------------------------------------
# per-household (reference) operations
# ---------------------------------------------------------------------------


def baseline_tax(h: Household, s: RateSchedule) -> float:
    """Tax embedded in a household's monetary spending at baseline rates."""
    total = 0.0
    for code, mon, _nonmon in h.expenditures:
        i = s.index(code)
        if "domestic_service" in s.items[i].tags:
            continue
        total += mon * float(s.rate_inside[i])
    return total


def net_base(h: Household, s: RateSchedule) -> dict[str, float]:
    """Monetary spending with the embedded baseline tax stripped out, per item."""
    out = {}
    for code, mon, _nonmon in h.expenditures:
        i = s.index(code)
        if "domestic_service" in s.items[i].tags:
            out[code] = 0.0
        else:
            out[code] = mon * (1.0 - float(s.rate_inside[i]))
    return out


# ---------------------------------------------------------------------------
# vectorised versions over a MicrodataSet
# ---------------------------------------------------------------------------


def _row_rates(ds: MicrodataSet, s: RateSchedule | None) -> tuple[np.ndarray, np.ndarray]:
    s = ds.schedule if s is None else s
    if s is ds.schedule:
        idx = ds.item
    else:
        remap = np.array([s.index(c) for c in ds.schedule.codes], dtype=np.int64)
        idx = remap[ds.item] if ds.item.size else ds.item
    rates = s.rate_inside[idx]
    domestic = s.domestic_mask[idx]
    return rates, domestic


def row_baseline_tax(ds: MicrodataSet, s: RateSchedule | None = None) -> np.ndarray:
    rates, domestic = _row_rates(ds, s)
    return np.where(domestic, 0.0, ds.amount_monetary * rates)


def row_net_base(ds: MicrodataSet, s: RateSchedule | None = None) -> np.ndarray:
    rates, domestic = _row_rates(ds, s)
    return np.where(domestic, 0.0, ds.amount_monetary * (1.0 - rates))


def baseline_taxes(ds: MicrodataSet, s: RateSchedule | None = None) -> np.ndarray:
    """Per-household baseline tax, in canonical household order."""
    from vatsim.kernels import segment_class_sum

    tax = row_baseline_tax(ds, s)
    return segment_class_sum(ds.ptr, np.zeros(tax.shape[0], dtype=np.int64), tax, 1)[:, 0]


def category_summary(ds: MicrodataSet | None, s: RateSchedule) -> list[tuple[str, float, float]]:
    """Mean inside rate per category, weighted by monetary spending when data is given.

    Categories with no spending fall back to the unweighted item mean; categories
    with no items are skipped.
    """
    rows = []
    for ci, cat in enumerate(CATEGORIES):
        members = np.flatnonzero(s.category_index == ci)
        if members.size == 0:
            continue
        t_in = float(np.mean(s.rate_inside[members]))
        if ds is not None and ds.item.size:
            spend = np.bincount(ds.item, weights=ds.amount_monetary * ds.row_weight, minlength=len(s))
            spend = spend[members]
            if spend.sum() > 0:
                t_in = float(np.dot(spend, s.rate_inside[members]) / spend.sum())
        rows.append((cat, t_in, inside_to_outside(t_in)))
    return rows
