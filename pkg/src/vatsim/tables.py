"""Rendering report tables to CSV or aligned markdown, written atomically."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from pathlib import Path

from vatsim.distribution import DistributionReport
from vatsim.incidence import GroupedReport


def fmt_pct(x: float) -> str:
    return "NA" if math.isnan(x) else f"{x * 100.0:.1f}"


def fmt_currency(x: float) -> str:
    return "NA" if math.isnan(x) else f"{x:.2f}"


def fmt_rate(x: float) -> str:
    return "NA" if math.isnan(x) else f"{x:.4f}"


def fmt_variation(x: float) -> str:
    return "NA" if math.isnan(x) else f"{x:.1f}"


_UNIT_FMT = {"share": fmt_pct, "currency": fmt_currency, "ratio": fmt_rate}


def _clean(s: str) -> str:
    # "-0.0" and friends are noise from rounding tiny negatives
    if s.startswith("-") and s.strip("-0.") == "":
        return s[1:]
    return s


def grouped_rows(report: GroupedReport, label: str = "row") -> tuple[list[str], list[list[str]]]:
    header = [label] + report.columns
    rows = []
    for name, unit, values in zip(report.rows, report.units, report.cells):
        f = _UNIT_FMT[unit]
        rows.append([name] + [_clean(f(float(v))) for v in values])
    return header, rows


def distribution_rows(report: DistributionReport) -> tuple[list[str], list[list[str]]]:
    header = ["metric", "gross", "net", "variation_pct"]
    rows = [
        [m, _clean(fmt_rate(g)), _clean(fmt_rate(n)), _clean(fmt_variation(v))]
        for m, g, n, v in report.rows()
    ]
    return header, rows


def render(header: list[str], rows: list[list[str]], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "markdown":
        widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]

        def line(cells, first_left=True):
            parts = []
            for i, c in enumerate(cells):
                parts.append(str(c).ljust(widths[i]) if i == 0 and first_left else str(c).rjust(widths[i]))
            return "| " + " | ".join(parts) + " |"

        sep = "|" + "|".join(
            (":" + "-" * (w + 1)) if i == 0 else ("-" * (w + 1) + ":") for i, w in enumerate(widths)
        ) + "|"
        return "\n".join([line(header), sep] + [line(r) for r in rows]) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(out_dir: Path, stem: str, header, rows, fmt: str = "csv") -> Path:
    ext = "csv" if fmt == "csv" else "md"
    path = Path(out_dir) / f"{stem}.{ext}"
    atomic_write(path, render(header, rows, fmt))
    return path
