"""Weighted household budget-survey microdata: loading, validation, synthesis.

A :class:`MicrodataSet` is stored column-wise. Household columns have one
entry per household in ascending id order; expenditure rows are held in CSR
layout (``ptr``) sorted by (household, item index), so every downstream
reduction runs in one canonical order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np
import pandas as pd

from vatsim.errors import (
    DuplicateHousehold,
    InvalidParams,
    MalformedRow,
    OrphanExpenditure,
    UnknownItemCode,
    ValidationError,
)
from vatsim.rates import CATEGORIES, RateSchedule, default_schedule

HOUSEHOLDS_HEADER = ["household_id", "weight", "size", "income_monetary", "income_nonmonetary"]
EXPENDITURES_HEADER = ["household_id", "item_code", "amount_monetary", "amount_nonmonetary"]


@dataclass(frozen=True)
class Household:
    id: int
    weight: float
    size: int
    income_monetary: float
    income_nonmonetary: float
    expenditures: tuple[tuple[str, float, float], ...] = ()

    @property
    def monetary_expenditure(self) -> float:
        return sum(m for _, m, _ in self.expenditures)

    @property
    def total_expenditure(self) -> float:
        return sum(m + nm for _, m, nm in self.expenditures)


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


class MicrodataSet:
    """Immutable weighted household microdata bound to a rate schedule."""

    def __init__(
        self,
        schedule: RateSchedule,
        household_id,
        weight,
        size,
        income_monetary,
        income_nonmonetary,
        ptr,
        item,
        amount_monetary,
        amount_nonmonetary,
    ):
        self.schedule = schedule
        self.household_id = _frozen(household_id, np.int64)
        self.weight = _frozen(weight, np.float64)
        self.size = _frozen(size, np.int64)
        self.income_monetary = _frozen(income_monetary, np.float64)
        self.income_nonmonetary = _frozen(income_nonmonetary, np.float64)
        self.ptr = _frozen(ptr, np.int64)
        self.item = _frozen(item, np.int64)
        self.amount_monetary = _frozen(amount_monetary, np.float64)
        self.amount_nonmonetary = _frozen(amount_nonmonetary, np.float64)
        self._check()
        counts = np.diff(self.ptr)
        self.row_household = _frozen(np.repeat(np.arange(len(self)), counts), np.int64)
        self.row_weight = _frozen(self.weight[self.row_household], np.float64)

    def _check(self) -> None:
        n = self.household_id.shape[0]
        for name in ("weight", "size", "income_monetary", "income_nonmonetary"):
            if getattr(self, name).shape != (n,):
                raise ValidationError(f"column {name} has wrong length")
        if n and np.any(np.diff(self.household_id) <= 0):
            raise ValidationError("household ids must be strictly increasing")
        if np.any(~(self.weight > 0)):
            raise ValidationError("weights must be > 0")
        if np.any(self.size < 1):
            raise ValidationError("household size must be >= 1")
        if not np.all(np.isfinite(self.income_monetary)):
            raise ValidationError("income_monetary must be finite")
        if np.any(~(self.income_nonmonetary >= 0)):
            raise ValidationError("income_nonmonetary must be >= 0")
        if self.ptr.shape != (n + 1,) or self.ptr[0] != 0 or np.any(np.diff(self.ptr) < 0):
            raise ValidationError("malformed row pointer")
        nnz = int(self.ptr[-1])
        for name in ("item", "amount_monetary", "amount_nonmonetary"):
            if getattr(self, name).shape != (nnz,):
                raise ValidationError(f"column {name} has wrong length")
        if nnz:
            if self.item.min() < 0 or self.item.max() >= len(self.schedule):
                raise ValidationError("item index outside schedule")
            if np.any(~(self.amount_monetary >= 0)) or np.any(~(self.amount_nonmonetary >= 0)):
                raise ValidationError("expenditure amounts must be >= 0")
            hh = np.repeat(np.arange(n), np.diff(self.ptr))
            same = hh[1:] == hh[:-1]
            if np.any(np.diff(self.item)[same] <= 0):
                raise ValidationError("items within a household must be unique and sorted")
        if n == 0 or not self.population > 0:
            raise ValidationError("population must be > 0")

    # -- construction -------------------------------------------------------

    @classmethod
    def from_columns(
        cls,
        schedule: RateSchedule,
        households: dict[str, np.ndarray],
        expenditures: dict[str, np.ndarray],
    ) -> MicrodataSet:
        """Canonicalise raw columns: sort by id, merge duplicate rows.

        ``expenditures['item']`` holds item indices into ``schedule``.
        """
        hid = np.asarray(households["household_id"], dtype=np.int64)
        order = np.argsort(hid, kind="stable")
        hid = hid[order]
        dup = np.flatnonzero(np.diff(hid) == 0)
        if dup.size:
            raise DuplicateHousehold(int(hid[dup[0]]))

        e_hid = np.asarray(expenditures["household_id"], dtype=np.int64)
        item = np.asarray(expenditures["item"], dtype=np.int64)
        mon = np.asarray(expenditures["amount_monetary"], dtype=np.float64)
        nonmon = np.asarray(expenditures["amount_nonmonetary"], dtype=np.float64)
        pos = np.searchsorted(hid, e_hid)
        bad = (pos >= hid.size) | (hid[np.minimum(pos, hid.size - 1)] != e_hid) if hid.size else np.ones(e_hid.size, bool)
        if np.any(bad):
            first = int(np.flatnonzero(bad)[0])
            raise OrphanExpenditure(int(e_hid[first]), line=first + 2)

        # amounts as trailing keys make duplicate merging order-independent
        srt = np.lexsort((nonmon, mon, item, pos))
        pos, item, mon, nonmon = pos[srt], item[srt], mon[srt], nonmon[srt]
        if pos.size:
            start = np.ones(pos.size, dtype=bool)
            start[1:] = (pos[1:] != pos[:-1]) | (item[1:] != item[:-1])
            idx = np.flatnonzero(start)
            mon = np.add.reduceat(mon, idx)
            nonmon = np.add.reduceat(nonmon, idx)
            pos, item = pos[idx], item[idx]
        ptr = np.zeros(hid.size + 1, dtype=np.int64)
        np.cumsum(np.bincount(pos, minlength=hid.size), out=ptr[1:])

        col = lambda k: np.asarray(households[k])[order]  # noqa: E731
        return cls(
            schedule,
            hid,
            col("weight"),
            col("size"),
            col("income_monetary"),
            col("income_nonmonetary"),
            ptr,
            item,
            mon,
            nonmon,
        )

    @classmethod
    def from_households(cls, households, schedule: RateSchedule) -> MicrodataSet:
        households = list(households)
        rows = [(h.id, code, m, nm) for h in households for code, m, nm in h.expenditures]
        return cls.from_columns(
            schedule,
            {
                "household_id": [h.id for h in households],
                "weight": [h.weight for h in households],
                "size": [h.size for h in households],
                "income_monetary": [h.income_monetary for h in households],
                "income_nonmonetary": [h.income_nonmonetary for h in households],
            },
            {
                "household_id": np.array([r[0] for r in rows], dtype=np.int64),
                "item": np.array([schedule.index(r[1]) for r in rows], dtype=np.int64),
                "amount_monetary": np.array([r[2] for r in rows], dtype=np.float64),
                "amount_nonmonetary": np.array([r[3] for r in rows], dtype=np.float64),
            },
        )

    # -- access -------------------------------------------------------------

    def __len__(self) -> int:
        return int(self.household_id.shape[0])

    @property
    def n_rows(self) -> int:
        return int(self.ptr[-1])

    @property
    def population(self) -> float:
        return float(np.dot(self.weight, self.size.astype(np.float64)))

    @property
    def n_households_weighted(self) -> float:
        return float(self.weight.sum())

    @property
    def person_weight(self) -> np.ndarray:
        return self.weight * self.size

    def household(self, i: int) -> Household:
        codes = self.schedule.codes
        a, b = self.ptr[i], self.ptr[i + 1]
        exps = tuple(
            (codes[self.item[r]], float(self.amount_monetary[r]), float(self.amount_nonmonetary[r]))
            for r in range(a, b)
        )
        return Household(
            int(self.household_id[i]),
            float(self.weight[i]),
            int(self.size[i]),
            float(self.income_monetary[i]),
            float(self.income_nonmonetary[i]),
            exps,
        )

    def households(self) -> Iterator[Household]:
        for i in range(len(self)):
            yield self.household(i)

    def per_household(self, row_values: np.ndarray) -> np.ndarray:
        """Sum a per-row array into per-household totals (canonical order)."""
        from vatsim.kernels import segment_class_sum

        cls = np.zeros(row_values.shape[0], dtype=np.int64)
        return segment_class_sum(self.ptr, cls, row_values, 1)[:, 0]

    def monetary_expenditure(self) -> np.ndarray:
        return self.per_household(self.amount_monetary)

    def total_expenditure(self) -> np.ndarray:
        return self.per_household(self.amount_monetary + self.amount_nonmonetary)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MicrodataSet):
            return NotImplemented
        if self.schedule.codes != other.schedule.codes:
            return False
        cols = (
            "household_id", "weight", "size", "income_monetary", "income_nonmonetary",
            "ptr", "item", "amount_monetary", "amount_nonmonetary",
        )
        return all(np.array_equal(getattr(self, c), getattr(other, c)) for c in cols)

    __hash__ = None

    def __repr__(self) -> str:
        return f"MicrodataSet({len(self)} households, {self.n_rows} rows)"


# ---------------------------------------------------------------------------
# CSV I/O
# ---------------------------------------------------------------------------


def _check_header(path: Path, expected: list[str]) -> None:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    if not first.strip():
        raise MalformedRow(str(path), 1, "empty file")
    got = first.rstrip("\r\n").split(",")
    if got != expected:
        raise MalformedRow(str(path), 1, f"expected header {','.join(expected)}, got {first.strip()}")


def _locate_bad(path: Path, frame: pd.DataFrame, numeric: dict[str, str]) -> None:
    """Raise MalformedRow for the first bad cell of a string-typed frame."""
    bad_rows = np.zeros(len(frame), dtype=bool)
    reasons = {}
    for col, kind in numeric.items():
        s = frame[col].str.strip()
        vals = pd.to_numeric(s, errors="coerce")
        bad = vals.isna().to_numpy()
        if kind == "int":
            ok = ~bad
            bad[ok] = (vals[ok] != np.floor(vals[ok])).to_numpy() | ~s[ok].str.fullmatch(r"[+-]?\d+").to_numpy()
        v = vals.to_numpy(dtype=np.float64, na_value=np.nan)
        if kind in ("nonneg", "int", "pos"):
            bad |= ~np.isfinite(v)
            bad |= v < 0
        if kind == "pos":
            bad |= ~(v > 0)
        if kind == "finite":
            bad |= ~np.isfinite(v)
        for i in np.flatnonzero(bad & ~bad_rows):
            reasons[i] = f"invalid {col} {frame[col].iloc[i]!r}"
        bad_rows |= bad
    if bad_rows.any():
        i = int(np.flatnonzero(bad_rows)[0])
        raise MalformedRow(str(path), i + 2, reasons[i])


def _read_table(path: Path, header: list[str], numeric: dict[str, str]) -> pd.DataFrame:
    path = Path(path)
    _check_header(path, header)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False)
    except pd.errors.ParserError as exc:
        raise MalformedRow(str(path), 0, f"unparseable CSV: {exc}") from None
    except pd.errors.EmptyDataError:
        raise MalformedRow(str(path), 1, "empty file") from None
    if list(frame.columns) != header:
        raise MalformedRow(str(path), 1, "unexpected header")
    _locate_bad(path, frame, numeric)
    return frame


def load_microdata(households_path, expenditures_path, schedule: RateSchedule) -> MicrodataSet:
    hh = _read_table(
        households_path,
        HOUSEHOLDS_HEADER,
        {
            "household_id": "int",
            "weight": "pos",
            "size": "int",
            "income_monetary": "finite",
            "income_nonmonetary": "nonneg",
        },
    )
    sizes = hh["size"].astype(np.int64).to_numpy()
    if np.any(sizes < 1):
        i = int(np.flatnonzero(sizes < 1)[0])
        raise MalformedRow(str(households_path), i + 2, f"invalid size {sizes[i]}")
    ex = _read_table(
        expenditures_path,
        EXPENDITURES_HEADER,
        {"household_id": "int", "amount_monetary": "nonneg", "amount_nonmonetary": "nonneg"},
    )
    codes = ex["item_code"].str.strip()
    uniq, inverse = np.unique(codes.to_numpy(dtype=str), return_inverse=True)
    lookup = np.empty(uniq.size, dtype=np.int64)
    for j, code in enumerate(uniq):
        if code not in schedule:
            line = int(np.flatnonzero(inverse == j)[0]) + 2
            raise UnknownItemCode(str(code), f"{expenditures_path}:{line}")
        lookup[j] = schedule.index(str(code))
    if len(hh) == 0:
        raise MalformedRow(str(households_path), 2, "no households")
    return MicrodataSet.from_columns(
        schedule,
        {
            "household_id": hh["household_id"].astype(np.int64).to_numpy(),
            "weight": hh["weight"].astype(np.float64).to_numpy(),
            "size": sizes,
            "income_monetary": hh["income_monetary"].astype(np.float64).to_numpy(),
            "income_nonmonetary": hh["income_nonmonetary"].astype(np.float64).to_numpy(),
        },
        {
            "household_id": ex["household_id"].astype(np.int64).to_numpy(),
            "item": lookup[inverse] if len(ex) else np.zeros(0, dtype=np.int64),
            "amount_monetary": ex["amount_monetary"].astype(np.float64).to_numpy(),
            "amount_nonmonetary": ex["amount_nonmonetary"].astype(np.float64).to_numpy(),
        },
    )


def write_microdata(ds: MicrodataSet, households_path, expenditures_path) -> None:
    """Write both CSV files; floats use shortest round-trip repr."""
    pd.DataFrame(
        {
            "household_id": ds.household_id,
            "weight": ds.weight,
            "size": ds.size,
            "income_monetary": ds.income_monetary,
            "income_nonmonetary": ds.income_nonmonetary,
        }
    ).to_csv(households_path, index=False, lineterminator="\n")
    codes = np.array(ds.schedule.codes, dtype=object)
    pd.DataFrame(
        {
            "household_id": ds.household_id[ds.row_household],
            "item_code": codes[ds.item] if ds.n_rows else np.array([], dtype=object),
            "amount_monetary": ds.amount_monetary,
            "amount_nonmonetary": ds.amount_nonmonetary,
        }
    ).to_csv(expenditures_path, index=False, lineterminator="\n")


# ---------------------------------------------------------------------------
# synthetic generator
# ---------------------------------------------------------------------------

# (share at median per-capita spending, log-share slope in log spending)
_CATEGORY_PROFILE: dict[str, tuple[float, float]] = {
    "basic_food_basket": (0.089, -0.45),
    "other_food": (0.089, 0.0),
    "tobacco_alcohol": (0.009, -0.05),
    "clothing": (0.041, -0.15),
    "electricity_gas": (0.065, -0.40),
    "rent": (0.223, -0.02),
    "household_goods_services": (0.085, 0.20),
    "health": (0.073, 0.20),
    "private_transport": (0.096, 0.40),
    "public_transport": (0.035, -0.20),
    "communication": (0.036, 0.10),
    "education": (0.026, 0.30),
    "recreation_culture": (0.040, 0.12),
    "personal_care": (0.056, -0.30),
    "other_goods_services": (0.037, 0.50),
}

# items bought by only part of the population: base participation and its
# slope in log spending (logit scale)
_PARTICIPATION: dict[str, tuple[float, float]] = {
    "tobacco_alcohol": (-0.6, 0.0),
    "domestic_service": (-2.5, 1.6),
    "financial_health": (-1.0, 1.4),
    "professional_services": (-2.5, 1.2),
}


@dataclass(frozen=True)
class SyntheticParams:
    """Knobs of :func:`generate_synthetic`. Currency is per month."""

    median_per_capita: float = 900.0
    sigma_log: float = 0.85
    mean_extra_members: float = 2.1
    deficit_fraction: float = 0.15
    zero_income_share: float = 0.15
    owner_share: float = 0.65
    own_production_share: float = 0.2
    share_noise: float = 8.0
    weight_low: float = 200.0
    weight_high: float = 2000.0

    def validate(self) -> None:
        positive = (
            "median_per_capita", "sigma_log", "share_noise", "weight_low", "weight_high",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise InvalidParams(f"{name} must be > 0")
        if self.mean_extra_members < 0:
            raise InvalidParams("mean_extra_members must be >= 0")
        for name in ("deficit_fraction", "zero_income_share", "owner_share", "own_production_share"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidParams(f"{name} must lie in [0, 1]")
        if self.weight_high < self.weight_low:
            raise InvalidParams("weight_high must be >= weight_low")


def generate_synthetic(
    n: int,
    seed: int,
    params: SyntheticParams | None = None,
    schedule: RateSchedule | None = None,
) -> MicrodataSet:
    """Draw ``n`` households with Engel-curve budget shares and income deficits.

    Per-capita spending is log-normal. Category shares follow a power law in
    spending (food basket and energy fall, transport and services rise) with
    gamma noise; a ``deficit_fraction`` of households get monetary spending
    above monetary income.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParams(f"n must be a positive integer, got {n!r}")
    params = SyntheticParams() if params is None else params
    params.validate()
    schedule = default_schedule() if schedule is None else schedule
    rng = np.random.default_rng(seed)
    n_items = len(schedule)

    size = 1 + np.minimum(rng.poisson(params.mean_extra_members, n), 11)
    log_rel = rng.normal(0.0, params.sigma_log, n)
    per_capita = params.median_per_capita * np.exp(log_rel)
    total = per_capita * size

    cat = schedule.category_index
    cat_count = np.bincount(cat, minlength=len(CATEGORIES))
    base = np.empty(n_items)
    slope = np.empty(n_items)
    for i, it in enumerate(schedule.items):
        b, e = _CATEGORY_PROFILE[it.category]
        base[i] = b / cat_count[cat[i]]
        slope[i] = e
    weights = base[None, :] * np.exp(slope[None, :] * log_rel[:, None])
    weights *= rng.gamma(params.share_noise, 1.0 / params.share_noise, (n, n_items))

    take = np.ones((n, n_items), dtype=bool)
    for i, it in enumerate(schedule.items):
        for tag, (a, b) in _PARTICIPATION.items():
            if tag in it.tags:
                p = 1.0 / (1.0 + np.exp(-(a + b * log_rel)))
                take[:, i] &= rng.random(n) < p
    weights = np.where(take, weights, 0.0)
    shares = weights / weights.sum(axis=1, keepdims=True)
    amount = np.round(shares * total[:, None], 2)

    nonmon = np.zeros_like(amount)
    owner = rng.random(n) < params.owner_share
    rent = np.array([it.category == "rent" for it in schedule.items])
    nonmon[:, rent] = np.where(owner[:, None], amount[:, rent], 0.0)
    basket = schedule.tag_mask({"basket"})
    producer = rng.random(n) < params.own_production_share
    frac = np.round(rng.uniform(0.1, 0.5, n), 2)
    own = np.round(amount[:, basket] * (producer * frac)[:, None], 2)
    nonmon[:, basket] = own
    mon = amount - nonmon

    c_mon = mon.sum(axis=1)
    deficit = rng.random(n) < params.deficit_fraction
    u_def = rng.uniform(0.0, 0.95, n)
    u_def = np.where(rng.random(n) < params.zero_income_share, 0.0, u_def)
    u_sav = rng.uniform(0.55, 0.98, n)
    y_mon = np.where(deficit, np.floor(c_mon * u_def * 100) / 100, np.ceil(c_mon / u_sav * 100) / 100)
    y_nonmon = np.round(nonmon.sum(axis=1) * rng.uniform(0.9, 1.1, n), 2)
    weight = np.round(rng.uniform(params.weight_low, params.weight_high, n), 4)

    hh_idx, item_idx = np.nonzero(amount > 0)
    ids = np.arange(1, n + 1, dtype=np.int64)
    return MicrodataSet.from_columns(
        schedule,
        {
            "household_id": ids,
            "weight": weight,
            "size": size,
            "income_monetary": y_mon,
            "income_nonmonetary": y_nonmon,
        },
        {
            "household_id": ids[hh_idx],
            "item": item_idx,
            "amount_monetary": mon[hh_idx, item_idx],
            "amount_nonmonetary": nonmon[hh_idx, item_idx],
        },
    )
