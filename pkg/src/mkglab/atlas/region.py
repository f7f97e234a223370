"""Scan of the (s, s') unit square: catalog feasibility against the closed form."""
from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction

from .catalog import DEFAULT_DELTA, DEFAULT_M, closed_form_region, feasible_thetas
from .eps import EpsRational, fmt_fraction

log = logging.getLogger(__name__)

__all__ = [
    "ALLOWED_STEPS",
    "BOUNDARY_LINES",
    "ScanRow",
    "ScanResult",
    "region_scan",
    "near_boundary",
    "write_scan_csv",
    "write_scan_svg",
    "SCAN_HEADER",
]

ALLOWED_STEPS = (Fraction(1, 32), Fraction(1, 64), Fraction(1, 128))
# s' = a*s + b for each edge of the closed-form region
BOUNDARY_LINES = ((Fraction(-2), Fraction(3, 2)),
                  (Fraction(1, 2), Fraction(-1, 8)),
                  (Fraction(4), Fraction(-3, 2)))
BOUNDARY_DISTANCE = Fraction(1, 16)
SCAN_HEADER = ["s", "sp", "closed_form", "scan_feasible", "theta0_q", "theta0_m",
               "theta1_q", "theta1_m", "agree"]


def near_boundary(s: Fraction, sp: Fraction, dist: Fraction = BOUNDARY_DISTANCE) -> bool:
    """True when ``(s, s')`` is closer than ``dist`` to one of the boundary lines."""
    for a, b in BOUNDARY_LINES:
        r = sp - a * s - b
        if r * r < dist * dist * (1 + a * a):
            return True
    return False


@dataclass(frozen=True)
class ScanRow:
    s: Fraction
    sp: Fraction
    closed_form: bool
    witness: tuple[EpsRational, EpsRational] | None
    near: bool

    @property
    def scan_feasible(self) -> bool:
        return self.witness is not None

    @property
    def agree(self) -> bool:
        return self.closed_form == self.scan_feasible

    def csv_row(self) -> list[str]:
        if self.witness is None:
            t = ["", "", "", ""]
        else:
            t0, t1 = self.witness
            t = [fmt_fraction(t0.q), str(t0.m), fmt_fraction(t1.q), str(t1.m)]
        flag = lambda b: "true" if b else "false"  # noqa: E731
        return [fmt_fraction(self.s), fmt_fraction(self.sp), flag(self.closed_form),
                flag(self.scan_feasible), *t, flag(self.agree)]


@dataclass
class ScanResult:
    step: Fraction
    rows: list[ScanRow] = field(default_factory=list)

    @property
    def off_boundary(self) -> list[ScanRow]:
        return [r for r in self.rows if not r.near]

    @property
    def disagreements(self) -> list[ScanRow]:
        return [r for r in self.rows if not r.agree]

    @property
    def off_boundary_agreement(self) -> Fraction:
        off = self.off_boundary
        return Fraction(sum(r.agree for r in off), len(off)) if off else Fraction(1)

    @property
    def ok(self) -> bool:
        return all(r.agree for r in self.off_boundary)

    def summary(self) -> str:
        off = self.off_boundary
        pct = 100 * self.off_boundary_agreement
        total_pct = 100 * Fraction(sum(r.agree for r in self.rows), len(self.rows))
        lines = [
            f"step {fmt_fraction(self.step)}: {len(self.rows)} points",
            f"closed form feasible: {sum(r.closed_form for r in self.rows)}",
            f"scan feasible: {sum(r.scan_feasible for r in self.rows)}",
            f"agreement overall: {float(total_pct):.2f}%",
            f"agreement at distance >= 1/16 from the boundary: "
            f"{sum(r.agree for r in off)}/{len(off)} ({float(pct):.2f}%)",
            f"disagreements near the boundary: {sum(not r.agree for r in self.rows if r.near)}",
        ]
        for r in self.disagreements:
            lines.append(f"  disagree s={fmt_fraction(r.s)} s'={fmt_fraction(r.sp)} "
                         f"closed_form={r.closed_form} scan={r.scan_feasible}"
                         f"{' (near boundary)' if r.near else ''}")
        return "\n".join(lines)


def _as_step(step) -> Fraction:
    q = Fraction(step)
    if q not in ALLOWED_STEPS:
        raise ValueError(f"step must be one of 1/32, 1/64, 1/128; got {step}")
    return q


def region_scan(step, out: str | os.PathLike | None = None, M=DEFAULT_M, delta=DEFAULT_DELTA,
                max_as_one: bool = False) -> ScanResult:
    """Scan ``(s, s') = (i*step, j*step)`` for ``1 <= i, j <= 1/step``.

    Rows are ordered by ``(s, s')``. With ``out`` the table and picture are
    written to ``out/region.csv`` and ``out/region.svg``.
    """
    step = _as_step(step)
    count = int(1 / step)
    result = ScanResult(step)
    for i in range(1, count + 1):
        s = i * step
        for j in range(1, count + 1):
            sp = j * step
            witness, _ = feasible_thetas(s, sp, M=M, delta=delta, max_as_one=max_as_one)
            row = ScanRow(s, sp, closed_form_region(s, sp), witness, near_boundary(s, sp))
            if not row.agree:
                log.warning("disagreement at s=%s s'=%s: closed_form=%s scan=%s%s",
                            row.s, row.sp, row.closed_form, row.scan_feasible,
                            " (near boundary)" if row.near else "")
            result.rows.append(row)
    if out is not None:
        os.makedirs(out, exist_ok=True)
        write_scan_csv(result, os.path.join(out, "region.csv"))
        write_scan_svg(result, os.path.join(out, "region.svg"))
    return result


def write_scan_csv(result: ScanResult, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SCAN_HEADER)
        for row in result.rows:
            w.writerow(row.csv_row())


# -- picture -----------------------------------------------------------------

_SIZE = 480
_PAD = 48
_FILL = {
    (True, True): "#3b6ea5",
    (True, False): "#e0a030",
    (False, True): "#c03030",
}


def _num(q: Fraction) -> str:
    """Fixed three-decimal rendering without going through floats."""
    n = round(q * 1000)
    sign = "-" if n < 0 else ""
    n = abs(n)
    return f"{sign}{n // 1000}.{n % 1000:03d}"


def _px(s: Fraction) -> Fraction:
    return _PAD + s * _SIZE


def _py(sp: Fraction) -> Fraction:
    return _PAD + (1 - sp) * _SIZE


def _clip(a: Fraction, b: Fraction) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]] | None:
    """Segment of ``s' = a s + b`` inside the unit square."""
    pts = []
    for s in (Fraction(0), Fraction(1)):
        sp = a * s + b
        if 0 <= sp <= 1:
            pts.append((s, sp))
    if a != 0:
        for sp in (Fraction(0), Fraction(1)):
            s = (sp - b) / a
            if 0 <= s <= 1:
                pts.append((s, sp))
    pts = sorted(set(pts))
    if len(pts) < 2:
        return None
    return pts[0], pts[-1]


def write_scan_svg(result: ScanResult, path: str | os.PathLike) -> None:
    """Raster of the scan: one cell per point, boundary lines overlaid."""
    step = result.step
    cell = step * _SIZE
    full = 2 * _PAD + _SIZE
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{full}" height="{full}" '
           f'viewBox="0 0 {full} {full}">',
           '<rect x="0" y="0" width="100%" height="100%" fill="white"/>',
           '<g id="cells" stroke="none">']
    for r in result.rows:
        fill = _FILL.get((r.closed_form, r.scan_feasible))
        if fill is None:
            continue
        # cell centred on the grid point
        x = _px(r.s) - cell / 2
        y = _py(r.sp) - cell / 2
        out.append(f'<rect x="{_num(x)}" y="{_num(y)}" width="{_num(cell)}" height="{_num(cell)}" '
                   f'fill="{fill}"/>')
    out.append("</g>")
    out.append('<g id="boundaries" stroke="black" stroke-width="1.5">')
    for a, b in BOUNDARY_LINES:
        seg = _clip(a, b)
        if seg is None:
            continue
        (s0, p0), (s1, p1) = seg
        out.append(f'<line x1="{_num(_px(s0))}" y1="{_num(_py(p0))}" '
                   f'x2="{_num(_px(s1))}" y2="{_num(_py(p1))}"/>')
    out.append("</g>")
    lo, hi = _PAD, _PAD + _SIZE
    out.append(f'<path id="axes" d="M {lo} {lo} L {lo} {hi} L {hi} {hi}" fill="none" stroke="#444"/>')
    for k in range(5):
        t = Fraction(k, 4)
        out.append(f'<text x="{_num(_px(t))}" y="{hi + 16}" font-size="11" '
                   f'text-anchor="middle">{fmt_fraction(t)}</text>')
        out.append(f'<text x="{lo - 6}" y="{_num(_py(t) + 4)}" font-size="11" '
                   f'text-anchor="end">{fmt_fraction(t)}</text>')
    out.append(f'<text x="{(lo + hi) // 2}" y="{hi + 36}" font-size="14" text-anchor="middle">s</text>')
    out.append(f'<text x="{lo - 34}" y="{(lo + hi) // 2}" font-size="14" '
               f'text-anchor="middle">s′</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")
