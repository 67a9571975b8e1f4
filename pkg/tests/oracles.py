"""Independent brute-force references used by the tests.

They share no code with the engine: plain Python loops, written from the
formulas rather than from the implementation.
"""

from __future__ import annotations


def fgt_loop(y, w, s, line, alpha):
    num = 0.0
    den = 0.0
    line = float(line)
    for yi, wi, si in zip(y, w, s):
        yi = float(yi)
        persons = float(wi) * float(si)
        if yi < line:
            gap = (line - yi) / line
            # repeated product, not pow(): libm pow is off by an ulp for some squares
            power = 1.0
            for _ in range(alpha):
                power *= gap
            num += persons * power
        den += persons
    return num / den


def gini_pairwise(y, ws):
    total = sum(ws)
    p = [x / total for x in ws]
    mu = sum(pi * yi for pi, yi in zip(p, y))
    acc = 0.0
    for pi, yi in zip(p, y):
        for pj, yj in zip(p, y):
            acc += pi * pj * abs(yi - yj)
    return acc / (2.0 * mu)


def mean_of_ratios(groups, weights, num, den, k):
    out = []
    for g in range(1, k + 1):
        sw = sx = 0.0
        for gi, wi, ni, di in zip(groups, weights, num, den):
            if gi == g and di > 0:
                sw += wi
                sx += wi * ni / di
        out.append(sx / sw if sw else float("nan"))
    return out


def _class_of(scenario, code, tags):
    hits = [c for c in scenario.classes if code in c.items or (c.tags & tags)]
    if hits:
        return hits[0]
    if "domestic_service" in tags:
        return None
    return next(c for c in scenario.classes if c.default)


def _rate(cls, s):
    if cls is None or cls.kind in ("zero", "excluded"):
        return 0.0
    if cls.kind == "fixed":
        return cls.value
    return cls.value * s


def household_reform(ds, scenario, s):
    """Per-household (tax, cashback, transfer) by direct looping over rows."""
    sched = ds.schedule
    info = {it.code: (it.tags, float(r)) for it, r in zip(sched.items, sched.rate_inside)}
    taxes, refunds, fin = [], [], []
    for h in ds.households():
        tax = refund = financing = 0.0
        spend = 0.0
        for code, mon, nonmon in h.expenditures:
            spend += mon + nonmon
        eligible = scenario.cashback.scope_mode != "none" and spend / h.size < scenario.cashback.eligibility_line
        for code, mon, _ in h.expenditures:
            tags, r_in = info[code]
            if "domestic_service" in tags:
                continue
            t = mon * (1.0 - r_in) * _rate(_class_of(scenario, code, tags), s)
            tax += t
            mode = scenario.cashback.scope_mode
            covered = (mode == "all_items_except" and not (tags & scenario.cashback.scope_tags)) or (
                mode == "only_items" and bool(tags & scenario.cashback.scope_tags)
            )
            if eligible and covered:
                refund += t
            if scenario.transfer.mode != "none" and tags & scenario.transfer.financing_tags:
                financing += t
        taxes.append(tax)
        refunds.append(refund)
        fin.append(financing)
    if scenario.transfer.mode != "none":
        pop = sum(h.weight * h.size for h in ds.households())
        per_person = sum(h.weight * f for h, f in zip(ds.households(), fin)) / pop
    else:
        per_person = 0.0
    transfers = [per_person * h.size for h in ds.households()]
    return taxes, refunds, transfers


def net_revenue_loop(ds, scenario, s):
    taxes, refunds, transfers = household_reform(ds, scenario, s)
    total = 0.0
    for h, t, r, tr in zip(ds.households(), taxes, refunds, transfers):
        total += h.weight * (t - r - tr)
    return total
