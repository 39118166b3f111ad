"""Report files: tables.csv, tables.txt, curve.csv and curve.svg.

All output is a pure function of the inputs (no timestamps, fixed float
formatting), so identical analyses produce identical bytes.
"""

from __future__ import annotations

import io
from pathlib import Path
from typing import Mapping, Sequence

from wscoverlap.analysis import OverlapCurve, PartitionReport
from wscoverlap.fsio import atomic_write_text

TABLE_COLUMNS = (
    "model", "cutoff", "overlap_size", "nonoverlap_size", "overall_acc", "overlap_acc",
    "nonoverlap_acc", "perf_diff", "chi2", "p_value", "significant",
)


def _num(x: float | None, digits: int = 6) -> str:
    return "" if x is None else f"{x:.{digits}f}"


def _pct(x: float | None, signed: bool = False) -> str:
    if x is None:
        return "n/a"
    return f"{100 * x:+.1f}%" if signed else f"{100 * x:.1f}%"


def _cut(c: float) -> str:
    return f"{c:g}"


def tables_csv(reports: Sequence[PartitionReport]) -> str:
    buf = io.StringIO()
    buf.write(",".join(TABLE_COLUMNS) + "\n")
    for r in reports:
        row = [
            r.model, _cut(r.cutoff), str(r.overlap_size), str(r.nonoverlap_size), _num(r.overall_acc),
            _num(r.overlap_acc), _num(r.nonoverlap_acc), _num(r.perf_diff), _num(r.chi2),
            _num(r.p_value), "true" if r.significant else "false",
        ]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def tables_txt(reports: Sequence[PartitionReport]) -> str:
    """Human-readable blocks, one per model, in the order models first appear."""
    models: dict[str, list[PartitionReport]] = {}
    for r in reports:
        models.setdefault(r.model, []).append(r)
    header = ("Subset", "Overlap acc (size)", "Non-overlap acc (size)", "Perf. diff", "chi2", "p-value")
    lines = []
    for model, rows in models.items():
        n = rows[0].overlap_size + rows[0].nonoverlap_size
        lines.append(f"Model: {model}    Test set size: {n}    Overall accuracy: {_pct(rows[0].overall_acc)}")
        table = [header]
        for r in rows:
            mark = "*" if r.significant else ""
            table.append((
                f"BM25 > {_cut(r.cutoff)}",
                f"{_pct(r.overlap_acc)}{mark} ({r.overlap_size})",
                f"{_pct(r.nonoverlap_acc)} ({r.nonoverlap_size})",
                _pct(r.perf_diff, signed=True),
                _num(r.chi2, 3) or "n/a",
                _num(r.p_value, 4) or "n/a",
            ))
        widths = [max(len(row[i]) for row in table) for i in range(len(header))]
        for k, row in enumerate(table):
            cells = [row[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
            lines.append("  ".join(cells).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        lines.append("")
    lines.append("* overlap vs non-overlap difference significant at p < 0.05 (chi-squared, 1 dof)")
    return "\n".join(lines) + "\n"


def curve_csv(curves: Mapping[str, OverlapCurve]) -> str:
    multi = len(curves) > 1
    out = ["series,cutoff,proportion" if multi else "cutoff,proportion"]
    for name, curve in curves.items():
        for t, p in curve.points:
            out.append((f"{name}," if multi else "") + f"{_cut(t)},{p:.6f}")
    return "\n".join(out) + "\n"


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def curve_svg(curves: Mapping[str, OverlapCurve], width: int = 640, height: int = 400) -> str:
    """Line chart of overlap proportion (percent) against BM25 cutoff."""
    left, right, top, bottom = 70, 20, 20, 60
    pw, ph = width - left - right, height - top - bottom
    xs = [t for c in curves.values() for t, _ in c.points] or [0.0]
    x0, x1 = min(xs), max(xs)
    if x1 == x0:
        x1 = x0 + 1.0

    def sx(t):
        return left + (t - x0) / (x1 - x0) * pw

    def sy(p):
        return top + (1.0 - p) * ph

    el = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for k in range(6):
        p = k / 5
        y = sy(p)
        el.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        el.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{int(100 * p)}</text>')
    for k in range(6):
        t = x0 + (x1 - x0) * k / 5
        x = sx(t)
        el.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 4}" stroke="black"/>')
        el.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{t:g}</text>')
    el.append(f'<text x="{left + pw / 2:.2f}" y="{height - 15}" text-anchor="middle">BM25 score cut-off</text>')
    el.append(f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" '
              f'transform="rotate(-90 18 {top + ph / 2:.2f})">% test set overlap</text>')
    for k, (name, curve) in enumerate(curves.items()):
        color = _PALETTE[k % len(_PALETTE)]
        pts = " ".join(f"{sx(t):.2f},{sy(p):.2f}" for t, p in curve.points)
        el.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        for t, p in curve.points:
            el.append(f'<circle cx="{sx(t):.2f}" cy="{sy(p):.2f}" r="3" fill="{color}"/>')
        if len(curves) > 1:
            ly = top + 14 + 16 * k
            el.append(f'<text x="{left + pw - 10}" y="{ly}" text-anchor="end" fill="{color}">{_xml(name)}</text>')
    el.append("</svg>")
    return "\n".join(el) + "\n"


def _xml(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit_report(reports: Sequence[PartitionReport], curves: Mapping[str, OverlapCurve], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    return [
        atomic_write_text(out_dir / "tables.csv", tables_csv(reports)),
        atomic_write_text(out_dir / "tables.txt", tables_txt(reports)),
        atomic_write_text(out_dir / "curve.csv", curve_csv(curves)),
        atomic_write_text(out_dir / "curve.svg", curve_svg(curves)),
    ]
