"""Reduction catalog for the nonlinear estimates and the (theta0, theta1) search.

For a regularity pair ``(s, s')`` and time exponents ``(theta0, theta1)`` the
catalog lists every bilinear estimate instance, every fixed-time Sobolev
product chain, and every side-condition window that the local theory needs.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .checks import (
    ConditionRecord,
    FeasibilityReport,
    ProductEstimate,
    atlas_holds,
    check_atlas,
    check_sobolev_product,
    sobolev_holds,
)
from .eps import EPS, EpsRational, as_eps

__all__ = [
    "ExponentPoint",
    "SobolevInstance",
    "Catalog",
    "reduction_catalog",
    "theta_grid",
    "feasible_thetas",
    "closed_form_region",
    "DEFAULT_M",
    "DEFAULT_DELTA",
]

DEFAULT_M = Fraction(10)
DEFAULT_DELTA = Fraction(1, 100)
THETA_DENOMINATOR = 128

HALF = Fraction(1, 2)
QUARTER = Fraction(1, 4)
THREE_QUARTERS = Fraction(3, 4)


@dataclass(frozen=True)
class ExponentPoint:
    s: EpsRational
    sp: EpsRational
    theta0: EpsRational
    theta1: EpsRational

    def __post_init__(self):
        for name in ("s", "sp", "theta0", "theta1"):
            object.__setattr__(self, name, as_eps(getattr(self, name)))


@dataclass(frozen=True)
class SobolevInstance:
    s0: EpsRational
    s1: EpsRational
    s2: EpsRational
    label: str

    def __post_init__(self):
        for name in ("s0", "s1", "s2"):
            object.__setattr__(self, name, as_eps(getattr(self, name)))

    def check(self, max_as_one: bool = False) -> FeasibilityReport:
        return check_sobolev_product(self.s0, self.s1, self.s2, label=self.label, max_as_one=max_as_one)

    def holds(self, max_as_one: bool = False) -> bool:
        return sobolev_holds(self.s0, self.s1, self.s2, max_as_one=max_as_one)


def _gt(cid: str, relation: str, lhs, rhs) -> ConditionRecord:
    margin = as_eps(lhs) - as_eps(rhs)
    return ConditionRecord(cid, relation, margin, True, margin > 0)


@dataclass(frozen=True)
class Catalog:
    point: ExponentPoint
    estimates: tuple[ProductEstimate, ...]
    sobolev: tuple[SobolevInstance, ...]
    predicates: tuple[ConditionRecord, ...]

    def reports(self, max_as_one: bool = False) -> list[FeasibilityReport]:
        out = [check_atlas(e) for e in self.estimates]
        out += [inst.check(max_as_one) for inst in self.sobolev]
        out.append(FeasibilityReport("predicates", self.predicates))
        return out

    def report(self, max_as_one: bool = False) -> FeasibilityReport:
        """All records flattened into one report, ids prefixed by instance label."""
        records = []
        for rep in self.reports(max_as_one):
            for r in rep.records:
                records.append(ConditionRecord(f"{rep.label}:{r.cid}", r.relation, r.margin,
                                               r.strict, r.passed))
        p = self.point
        return FeasibilityReport(f"catalog(s={p.s}, s'={p.sp})", tuple(records),
                                 {"theta0": p.theta0, "theta1": p.theta1})

    @property
    def passed(self) -> bool:
        return (all(p.passed for p in self.predicates)
                and all(inst.holds() for inst in self.sobolev)
                and all(atlas_holds(e) for e in self.estimates))


# -- the catalog -------------------------------------------------------------


def _theta_free_predicates(s: EpsRational, sp: EpsRational) -> list[ConditionRecord]:
    preds = [
        _gt("s'<2s-1/4", "2s-1/4 > s'", 2 * s - QUARTER, sp),
        _gt("sigma-window", "2s-1 > 0", 2 * s - 1, 0),
        _gt("sigma'-window", "1+2s > 0", 1 + 2 * s, 0),
        _gt("a-window-cor", "2s > 0", 2 * s, 0),
    ]
    margin = min(2 * s, 2 - s) - 1
    exempt = s == 1
    preds.append(ConditionRecord("a-window", "min(2s, 2-s) > 1 or s = 1", margin, True,
                                 margin > 0 or exempt))
    preds.append(_gt("nullA-low:s>1/2", "s > 1/2", s, HALF))
    preds.append(_gt("cubicA:s>1/2", "s > 1/2", s, HALF))
    if sp <= HALF:
        preds.append(_gt("cubicphi:s<2s'+1/4", "2s'+1/4 > s", 2 * sp + QUARTER, s))
    return preds


def _theta0_predicates(t0: EpsRational) -> list[ConditionRecord]:
    return [_gt("theta0>1/2", "theta0 > 1/2", t0, HALF),
            _gt("theta0<3/4", "3/4 > theta0", THREE_QUARTERS, t0)]


def _theta1_predicates(s: EpsRational, sp: EpsRational, t1: EpsRational) -> list[ConditionRecord]:
    return [_gt("theta1>1/2", "theta1 > 1/2", t1, HALF),
            _gt("theta1>1-s'", "theta1 > 1-s'", t1, 1 - sp),
            _gt("theta1<3/4", "3/4 > theta1", THREE_QUARTERS, t1),
            _gt("theta1<4s-s'-1", "4s-s'-1 > theta1", 4 * s - sp - 1, t1),
            _gt("theta1<2s-1/2", "2s-1/2 > theta1", 2 * s - HALF, t1)]


def _sobolev_instances(s, sp, M, delta) -> list[SobolevInstance]:
    out = [SobolevInstance(M, s - HALF, s - HALF, "nullA-low"),
           SobolevInstance(1 - sp, sp, delta, "cubicA-1"),
           SobolevInstance(-delta, s, s, "cubicA-2"),
           SobolevInstance(HALF - s, s - HALF, M, "nullphi-low")]
    if sp > HALF:
        out += [SobolevInstance(1 - s, s, delta, "cubicphi-1"),
                SobolevInstance(-delta, sp, sp, "cubicphi-2")]
    return out


def _cubicphi_step1(s, sp, t0) -> ProductEstimate:
    return ProductEstimate(1 - s, s, 2 * sp - THREE_QUARTERS - EPS, 1 - t0 - EPS, t0, 0,
                           label="cubicphi-step1")


def _cubicphi_step2(sp, t1) -> ProductEstimate:
    return ProductEstimate(THREE_QUARTERS + EPS - 2 * sp, sp, sp, 0, t1, t1, label="cubicphi-step2")


def _mixed_estimates(s, sp, t0, t1) -> list[ProductEstimate]:
    """Instances that involve both theta0 and theta1."""
    sA = Fraction(3, 2) - sp
    return [
        ProductEstimate(sA, s - HALF, s - HALF, HALF - t1 - EPS, t0, t0, label="nullA-I1"),
        ProductEstimate(sA, s - HALF, s - HALF, 1 - t1 - EPS, t0 - HALF, t0, label="nullA-I2"),
        ProductEstimate(HALF - s, s - HALF, sp + HALF, HALF - t0 - EPS, t0, t1, label="nullphi-J1"),
        ProductEstimate(HALF - s, s - HALF, sp + HALF, 1 - t0 - EPS, t0 - HALF, t1, label="nullphi-J2"),
        ProductEstimate(HALF - s, s - HALF, sp + HALF, 1 - t0 - EPS, t0, t1 - HALF, label="nullphi-J3"),
    ]


def reduction_catalog(p: ExponentPoint, M=DEFAULT_M, delta=DEFAULT_DELTA) -> Catalog:
    """Every estimate instance and side condition at the point ``p``.

    ``M`` is the large low-frequency exponent and ``delta`` the small
    intermediate regularity used by the cubic chains.
    """
    s, sp, t0, t1 = p.s, p.sp, p.theta0, p.theta1
    estimates = _mixed_estimates(s, sp, t0, t1)
    if sp <= HALF:
        estimates += [_cubicphi_step1(s, sp, t0), _cubicphi_step2(sp, t1)]
    predicates = (_theta_free_predicates(s, sp) + _theta0_predicates(t0)
                  + _theta1_predicates(s, sp, t1))
    return Catalog(p, tuple(estimates), tuple(_sobolev_instances(s, sp, as_eps(M), as_eps(delta))),
                   tuple(predicates))


# -- feasibility search ------------------------------------------------------


def theta_grid(denominator: int = THETA_DENOMINATOR) -> list[EpsRational]:
    """Candidates ``k/d`` and ``k/d + eps`` inside the open interval (1/2, 3/4), ascending."""
    out = []
    lo, hi = denominator // 2, 3 * denominator // 4
    for k in range(lo, hi + 1):
        base = EpsRational(Fraction(k, denominator))
        for cand in (base, base + EPS):
            if HALF < cand < THREE_QUARTERS:
                out.append(cand)
    return out


def feasible_thetas(s, sp, M=DEFAULT_M, delta=DEFAULT_DELTA, denominator: int = THETA_DENOMINATOR,
                    max_as_one: bool = False):
    """First ``(theta0, theta1)`` on the grid at which the whole catalog passes.

    Returns ``(witness, report)``. ``witness`` is ``None`` when the scan is
    exhausted; ``report`` then holds the failing theta-free records, or a
    single record noting the empty scan.
    """
    s, sp = as_eps(s), as_eps(sp)
    M, delta = as_eps(M), as_eps(delta)

    fixed = _theta_free_predicates(s, sp)
    sob = _sobolev_instances(s, sp, M, delta)
    bad = [r for r in fixed if not r.passed]
    sob_bad = [inst for inst in sob if not inst.holds(max_as_one)]
    if bad or sob_bad:
        records = list(bad)
        for inst in sob_bad:
            for r in inst.check(max_as_one).records:
                if not r.passed:
                    records.append(ConditionRecord(f"{inst.label}:{r.cid}", r.relation, r.margin,
                                                   r.strict, False))
        return None, FeasibilityReport(f"feasible_thetas(s={s}, s'={sp})", tuple(records))

    grid = theta_grid(denominator)
    low_sp = sp <= HALF
    theta0s = [t for t in grid
               if all(r.passed for r in _theta0_predicates(t))
               and (not low_sp or atlas_holds(_cubicphi_step1(s, sp, t)))]
    theta1s = [t for t in grid
               if all(r.passed for r in _theta1_predicates(s, sp, t))
               and (not low_sp or atlas_holds(_cubicphi_step2(sp, t)))]
    for t0 in theta0s:
        for t1 in theta1s:
            if all(atlas_holds(e) for e in _mixed_estimates(s, sp, t0, t1)):
                cat = reduction_catalog(ExponentPoint(s, sp, t0, t1), M, delta)
                return (t0, t1), cat.report(max_as_one)
    note = ConditionRecord("theta-scan", f"witness on the 1/{denominator} grid",
                           as_eps(len(theta0s) * len(theta1s)), True, False)
    return None, FeasibilityReport(f"feasible_thetas(s={s}, s'={sp})", (note,))


def closed_form_region(s, sp) -> bool:
    """Exact membership in the closed-form well-posedness region."""
    s, sp = as_eps(s), as_eps(sp)
    box = QUARTER < sp <= 1 and HALF < s <= 1
    # s'/2 - 1/8 < s' is tested as 2s' > s - 1/4 to keep eps coefficients integral.
    return (box and sp > Fraction(3, 2) - 2 * s and 2 * sp > s - QUARTER
            and sp < 4 * s - Fraction(3, 2))
