"""Exact checkers for the bilinear product estimates.

``check_atlas`` tests the fourteen sufficient conditions for

    ||uv||_{H^{-s0,-b0}} <~ ||u||_{H^{s1,b1}} ||v||_{H^{s2,b2}}

and ``check_sobolev_product`` the fixed-time rule for
``||uv||_{H^{-s0}} <~ ||u||_{H^{s1}} ||v||_{H^{s2}}``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .eps import EpsRational, as_eps

__all__ = [
    "ConditionRecord",
    "FeasibilityReport",
    "ProductEstimate",
    "ATLAS_CONDITIONS",
    "STRICT_CONDITIONS",
    "check_atlas",
    "atlas_holds",
    "check_sobolev_product",
    "sobolev_holds",
]

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class ConditionRecord:
    cid: str
    relation: str
    margin: EpsRational
    strict: bool
    passed: bool

    def row(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        return f"  ({self.cid:>3}) {self.relation:<44} margin {str(self.margin):>12}  {mark}"


@dataclass(frozen=True)
class FeasibilityReport:
    label: str
    records: tuple[ConditionRecord, ...]
    witness: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failed(self) -> list[str]:
        return [r.cid for r in self.records if not r.passed]

    def __getitem__(self, cid: str) -> ConditionRecord:
        for r in self.records:
            if r.cid == cid:
                return r
        raise KeyError(cid)

    def table(self) -> str:
        head = f"{self.label}: {'PASS' if self.passed else 'FAIL'}"
        return "\n".join([head, *(r.row() for r in self.records)])


def _record(cid: str, relation: str, lhs, rhs, strict: bool) -> ConditionRecord:
    margin = as_eps(lhs) - as_eps(rhs)
    ok = margin > 0 if strict else margin >= 0
    return ConditionRecord(cid, relation, margin, strict, ok)


@dataclass(frozen=True)
class ProductEstimate:
    s0: EpsRational
    s1: EpsRational
    s2: EpsRational
    b0: EpsRational
    b1: EpsRational
    b2: EpsRational
    label: str = ""

    def __post_init__(self):
        for name in ("s0", "s1", "s2", "b0", "b1", "b2"):
            object.__setattr__(self, name, as_eps(getattr(self, name)))

    @classmethod
    def parse(cls, values: Iterable[str], label: str = "") -> ProductEstimate:
        vals = [EpsRational.parse(v) for v in values]
        if len(vals) != 6:
            raise ValueError(f"need six exponents s0 s1 s2 b0 b1 b2, got {len(vals)}")
        return cls(*vals, label=label)

    def exponents(self) -> tuple[EpsRational, ...]:
        return (self.s0, self.s1, self.s2, self.b0, self.b1, self.b2)


Condition = tuple[str, str, Callable, Callable, bool]

# (id, relation, lhs, rhs, strict)
ATLAS_CONDITIONS: tuple[Condition, ...] = (
    ("a", "b0+b1+b2 > 1/2", lambda e: e.b0 + e.b1 + e.b2, lambda e: HALF, True),
    ("b", "b0+b1 >= 0", lambda e: e.b0 + e.b1, lambda e: 0, False),
    ("c", "b0+b2 >= 0", lambda e: e.b0 + e.b2, lambda e: 0, False),
    ("d", "b1+b2 >= 0", lambda e: e.b1 + e.b2, lambda e: 0, False),
    ("e", "s0+s1+s2 > 3/2-(b0+b1+b2)",
     lambda e: e.s0 + e.s1 + e.s2, lambda e: Fraction(3, 2) - (e.b0 + e.b1 + e.b2), True),
    ("f", "s0+s1+s2 > 1-min(b0+b1, b0+b2, b1+b2)",
     lambda e: e.s0 + e.s1 + e.s2, lambda e: 1 - min(e.b0 + e.b1, e.b0 + e.b2, e.b1 + e.b2), True),
    ("g", "s0+s1+s2 > 1/2-min(b0, b1, b2)",
     lambda e: e.s0 + e.s1 + e.s2, lambda e: HALF - min(e.b0, e.b1, e.b2), True),
    ("h", "s0+s1+s2 > 3/4", lambda e: e.s0 + e.s1 + e.s2, lambda e: Fraction(3, 4), True),
    ("i", "(s0+b0)+2s1+2s2 > 1", lambda e: e.s0 + e.b0 + 2 * e.s1 + 2 * e.s2, lambda e: 1, True),
    ("j", "2s0+(s1+b1)+2s2 > 1", lambda e: 2 * e.s0 + e.s1 + e.b1 + 2 * e.s2, lambda e: 1, True),
    ("k", "2s0+2s1+(s2+b2) > 1", lambda e: 2 * e.s0 + 2 * e.s1 + e.s2 + e.b2, lambda e: 1, True),
    ("l", "s1+s2 >= max(0, -b0)", lambda e: e.s1 + e.s2, lambda e: max(as_eps(0), -e.b0), False),
    ("m", "s0+s2 >= max(0, -b1)", lambda e: e.s0 + e.s2, lambda e: max(as_eps(0), -e.b1), False),
    ("n", "s0+s1 >= max(0, -b2)", lambda e: e.s0 + e.s1, lambda e: max(as_eps(0), -e.b2), False),
)

STRICT_CONDITIONS = frozenset(c[0] for c in ATLAS_CONDITIONS if c[4])


def check_atlas(e: ProductEstimate) -> FeasibilityReport:
    records = tuple(_record(cid, rel, lhs(e), rhs(e), strict)
                    for cid, rel, lhs, rhs, strict in ATLAS_CONDITIONS)
    return FeasibilityReport(e.label or "atlas", records)


def atlas_holds(e: ProductEstimate) -> bool:
    """Short-circuiting pass/fail of :func:`check_atlas`."""
    for _, _, lhs, rhs, strict in ATLAS_CONDITIONS:
        margin = as_eps(lhs(e)) - as_eps(rhs(e))
        if (margin <= 0) if strict else (margin < 0):
            return False
    return True


def check_sobolev_product(s0, s1, s2, label: str = "", max_as_one: bool = False) -> FeasibilityReport:
    """Sobolev product rule; at most one of the inequalities may be an equality.

    By default the inequality set is ``{S >= 1, S >= s0, S >= s1, S >= s2}``
    with ``S = s0+s1+s2``. With ``max_as_one`` the three ``S >= s_i`` clauses
    count as the single inequality ``S >= max(s0, s1, s2)``.
    """
    s0, s1, s2 = as_eps(s0), as_eps(s1), as_eps(s2)
    total = s0 + s1 + s2
    if max_as_one:
        clauses = [("sum>=1", "s0+s1+s2 >= 1", 1),
                   ("sum>=max", "s0+s1+s2 >= max(s0, s1, s2)", max(s0, s1, s2))]
    else:
        clauses = [("sum>=1", "s0+s1+s2 >= 1", 1),
                   ("sum>=s0", "s0+s1+s2 >= s0", s0),
                   ("sum>=s1", "s0+s1+s2 >= s1", s1),
                   ("sum>=s2", "s0+s1+s2 >= s2", s2)]
    records = [_record(cid, rel, total, rhs, False) for cid, rel, rhs in clauses]
    equalities = sum(r.margin.is_zero() for r in records)
    records.append(ConditionRecord("eq", "at most one equality", as_eps(1 - equalities),
                                   False, equalities <= 1))
    return FeasibilityReport(label or "sobolev", tuple(records))


def sobolev_holds(s0, s1, s2, max_as_one: bool = False) -> bool:
    return check_sobolev_product(s0, s1, s2, max_as_one=max_as_one).passed
