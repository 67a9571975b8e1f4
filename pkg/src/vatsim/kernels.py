"""Hot numeric kernels with a numba path and a pure-numpy path.

The numba versions are used when numba imports cleanly and the environment
variable ``VATSIM_DISABLE_NUMBA`` is unset (or set to ``0``/``false``).
Both paths accumulate in the same order (household-major, row order within a
household, sequential running sums), so they agree bit for bit; the test
suite checks this.

Conventions shared by all kernels:

* ``ptr`` is a CSR row pointer of length ``n_households + 1``; rows of
  household ``h`` are ``ptr[h]:ptr[h + 1]``.
* A negative class id on a row means "skip this row".
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("VATSIM_DISABLE_NUMBA", "").strip().lower()
_WANT_NUMBA = _FLAG in ("", "0", "false", "no")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# pure numpy
# ---------------------------------------------------------------------------


def np_seq_sum(x: np.ndarray) -> float:
    # cumsum is a strict left-to-right accumulation, unlike np.sum's pairwise
    if x.shape[0] == 0:
        return 0.0
    return float(np.cumsum(x)[-1])


def np_segment_class_sum(ptr, cls, values, n_cls):
    n = ptr.shape[0] - 1
    counts = np.diff(ptr)
    hh = np.repeat(np.arange(n, dtype=np.int64), counts)
    keep = cls >= 0
    flat = hh[keep] * n_cls + cls[keep]
    out = np.bincount(flat, weights=values[keep], minlength=n * n_cls)
    return out.reshape(n, n_cls)


def np_fgt_sums(y, ws, line, alpha):
    poor = y < line
    gap = (line - y) / line
    if alpha == 0:
        terms = np.where(poor, ws, 0.0)
    elif alpha == 1:
        terms = np.where(poor, ws * gap, 0.0)
    else:
        terms = np.where(poor, ws * (gap * gap), 0.0)
    return np_seq_sum(terms), np_seq_sum(ws)


def np_gini_sorted(y, p):
    """Sorted-form Gini numerator ``sum p_i y_i (2 P_before_i + p_i - 1)``."""
    if y.shape[0] == 0:
        return 0.0
    before = np.empty_like(p)
    before[0] = 0.0
    before[1:] = np.cumsum(p)[:-1]
    terms = p * y * (2.0 * before + p - 1.0)
    return np_seq_sum(terms)


# ---------------------------------------------------------------------------
# numba
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def nb_seq_sum(x):
        acc = 0.0
        for i in range(x.shape[0]):
            acc += x[i]
        return acc

    @numba.njit(cache=True, nogil=True)
    def nb_segment_class_sum(ptr, cls, values, n_cls):
        n = ptr.shape[0] - 1
        out = np.zeros((n, n_cls))
        for h in range(n):
            for r in range(ptr[h], ptr[h + 1]):
                c = cls[r]
                if c >= 0:
                    out[h, c] += values[r]
        return out

    @numba.njit(cache=True, nogil=True)
    def nb_fgt_sums(y, ws, line, alpha):
        num = 0.0
        den = 0.0
        for i in range(y.shape[0]):
            t = 0.0
            if y[i] < line:
                gap = (line - y[i]) / line
                if alpha == 0:
                    t = ws[i]
                elif alpha == 1:
                    t = ws[i] * gap
                else:
                    t = ws[i] * (gap * gap)
            num += t
            den += ws[i]
        return num, den

    @numba.njit(cache=True, nogil=True)
    def nb_gini_sorted(y, p):
        acc = 0.0
        before = 0.0
        for i in range(y.shape[0]):
            acc += p[i] * y[i] * (2.0 * before + p[i] - 1.0)
            before += p[i]
        return acc


if HAVE_NUMBA and _WANT_NUMBA:
    BACKEND = "numba"
    seq_sum = nb_seq_sum
    _segment_class_sum = nb_segment_class_sum
    _fgt_sums = nb_fgt_sums
    _gini_sorted = nb_gini_sorted
else:
    BACKEND = "numpy"
    seq_sum = np_seq_sum
    _segment_class_sum = np_segment_class_sum
    _fgt_sums = np_fgt_sums
    _gini_sorted = np_gini_sorted


def segment_class_sum(ptr, cls, values, n_cls: int) -> np.ndarray:
    """Sum row ``values`` into a ``(n_households, n_cls)`` matrix by row class."""
    return _segment_class_sum(
        np.ascontiguousarray(ptr, dtype=np.int64),
        np.ascontiguousarray(cls, dtype=np.int64),
        np.ascontiguousarray(values, dtype=np.float64),
        int(n_cls),
    )


def fgt_sums(y, ws, line: float, alpha: int) -> tuple[float, float]:
    """Return (weighted FGT numerator, total weight), both as running sums."""
    num, den = _fgt_sums(
        np.ascontiguousarray(y, dtype=np.float64),
        np.ascontiguousarray(ws, dtype=np.float64),
        float(line),
        int(alpha),
    )
    return float(num), float(den)


def gini_sorted(y, p) -> float:
    return float(
        _gini_sorted(
            np.ascontiguousarray(y, dtype=np.float64),
            np.ascontiguousarray(p, dtype=np.float64),
        )
    )
