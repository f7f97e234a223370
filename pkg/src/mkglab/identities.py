"""Randomized checks of the algebraic identities behind the null-form equations.

Each check returns a relative error; :func:`run_identity_suite` collects them
together with the tolerance each must meet.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DataSpec,
    SimConfig,
    make_initial_data,
    null_quadratic_current,
    null_transport,
    quadratic_current,
    transport,
)
from .fields import State
from .spectral import (
    Grid2D,
    ScalarField,
    VectorField,
    divergence,
    frac_op,
    gradient,
    inv_laplacian,
    l2_norm,
    laplacian,
    leray,
    partial,
    riesz,
    truncate,
)

__all__ = ["IdentityResult", "SuiteResult", "random_state", "current_identity",
           "transport_identity", "operator_checks", "run_identity_suite"]

IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class IdentityResult:
    name: str
    error: float
    tol: float
    # a negative control is expected to exceed its threshold
    negative_control: bool = False

    @property
    def passed(self) -> bool:
        return self.error <= self.tol

    def line(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        note = "  [negative control]" if self.negative_control else ""
        return f"{self.name:<28} max rel err {self.error:.3e}  (tol {self.tol:.0e})  {mark}{note}"


@dataclass(frozen=True)
class SuiteResult:
    results: tuple[IdentityResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> IdentityResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def report(self) -> str:
        return "\n".join(r.line() for r in self.results)


def _vnorm(X: VectorField) -> float:
    return math.hypot(l2_norm(X.x1), l2_norm(X.x2))


def _rel(diff: float, ref: float) -> float:
    return diff / ref if ref > 0 else diff


def random_state(seed: int, n: int) -> State:
    """Band-limited random state with Leray-projected potentials."""
    band = min(4, n // 3)
    return make_initial_data(SimConfig(n=n, seed=seed, data_spec=DataSpec(band=band)))


def random_gradient(grid: Grid2D, seed: int, band: int) -> VectorField:
    """``grad g`` for a random real band-limited ``g``: curl free, far from divergence free."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xC0DE]))
    m1, m2 = grid.modes
    keep = np.maximum(np.abs(m1), np.abs(m2)) <= band
    c = np.where(keep, rng.standard_normal(m1.shape) + 1j * rng.standard_normal(m1.shape), 0)
    g = ScalarField(grid, c, spectral=True, real=True)
    return gradient(g)


def current_identity(phi: ScalarField) -> float:
    """``P(-Im(phi conj d phi))`` against ``2 R^k D^-1 Q_jk(Re phi, Im phi)``."""
    lhs = leray(quadratic_current(phi))
    rhs = null_quadratic_current(phi)
    return _rel(_vnorm(lhs - rhs), _vnorm(lhs))


def transport_identity(phi: ScalarField, a: VectorField) -> float:
    """``-2i A^j d_j phi`` against ``-i sum Q_jk(phi, D^-1 [R^j A^k - R^k A^j])``."""
    lhs = -2j * transport(phi, a)
    rhs = -1j * null_transport(phi, a)
    return _rel(l2_norm(lhs - rhs), l2_norm(lhs))


def _mode(grid: Grid2D, m1: int, m2: int) -> ScalarField:
    """Exact single Fourier mode built from a unit coefficient."""
    c = np.zeros((grid.n, grid.n), dtype=complex)
    c[m1 % grid.n, m2 % grid.n] = 1.0
    return ScalarField.from_coefficients(grid, c).to_physical()


def operator_checks(n: int, seed: int = 0) -> dict[str, float]:
    """Symbol, Riesz, Leray and Parseval checks on an ``n x n`` grid."""
    grid = Grid2D(n)
    kscale = 2 * math.pi / grid.length
    errs: dict[str, float] = {}

    # pure modes inside the retained band
    cut = n // 3
    modes = [(1, 0), (0, 1), (1, 1), (-2, 1), (cut, -cut), (cut, 0), (-1, cut)]
    worst = 0.0
    for m1, m2 in modes:
        e = _mode(grid, m1, m2)
        k1, k2 = kscale * m1, kscale * m2
        kk = math.hypot(k1, k2)
        expect = {
            "d1": 1j * k1, "d2": 1j * k2, "lap": -kk**2, "lapinv": -1 / kk**2,
            "r1": 1j * k1 / kk, "r2": 1j * k2 / kk, "dinv": 1 / kk,
            "lambda2": 1 + kk**2, "dhalf": kk**0.5,
        }
        got = {
            "d1": partial(e, 1), "d2": partial(e, 2), "lap": laplacian(e), "lapinv": inv_laplacian(e),
            "r1": riesz(e, 1), "r2": riesz(e, 2), "dinv": frac_op(e, -1, "homogeneous"),
            "lambda2": frac_op(e, 2), "dhalf": frac_op(e, 0.5, "homogeneous"),
        }
        for name, sym in expect.items():
            ref = sym * e.values
            diff = float(np.max(np.abs(got[name].values - ref)))
            worst = max(worst, _rel(diff, float(np.max(np.abs(ref)))))
    errs["symbols"] = worst

    rng = np.random.default_rng(np.random.SeedSequence([seed, n]))

    def rand_real() -> ScalarField:
        # band limited: the Nyquist row carries no odd symbol for real data
        return truncate(ScalarField(grid, rng.standard_normal((n, n)), real=True))

    f = rand_real()
    f0 = f - f.mean()
    r2 = riesz(riesz(f0, 1), 1) + riesz(riesz(f0, 2), 2)
    errs["riesz_identity"] = l2_norm(r2 + f0) / l2_norm(f0)

    X = VectorField(rand_real(), rand_real())
    P = leray(X)
    PP = leray(P)
    errs["leray_idempotence"] = _vnorm(PP - P) / _vnorm(P)
    Q = X - P
    inner = sum(float(np.sum(P[j].values * Q[j].values)) for j in (1, 2)) * grid.cell_area
    errs["leray_orthogonality"] = abs(inner) / (_vnorm(X) ** 2)
    errs["leray_divergence"] = float(np.max(np.abs(divergence(P).values))) / _vnorm(X)

    g = ScalarField(grid, rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    parseval = grid.length**2 * float(np.sum(np.abs(g.coefficients) ** 2))
    errs["parseval"] = abs(l2_norm(g) ** 2 - parseval) / parseval
    back = g.to_spectral().to_physical()
    errs["round_trip"] = float(np.max(np.abs(back.values - g.values)) / np.max(np.abs(g.values)))
    return errs


OPERATOR_TOLS = {
    "symbols": 1e-12,
    "riesz_identity": 1e-12,
    "leray_idempotence": 1e-12,
    "leray_orthogonality": 1e-10,
    "leray_divergence": 1e-12,
    "parseval": 1e-12,
    "round_trip": 1e-13,
}


def run_identity_suite(seed: int = 0, n: int = 64, states: int = 1,
                       negative_control: bool = False) -> SuiteResult:
    """Both null-form identities over ``states`` seeded states, plus the operator checks.

    With ``negative_control`` a gradient field is added to ``A`` before the
    transport identity, which then no longer holds.
    """
    cur, tra = 0.0, 0.0
    for i in range(states):
        st = random_state(seed + i, n)
        a = st.a
        if negative_control:
            a = a + random_gradient(st.grid, seed + i, min(4, n // 3))
        cur = max(cur, current_identity(st.phi))
        tra = max(tra, transport_identity(st.phi, a))
    results = [IdentityResult("current null-form identity", cur, IDENTITY_TOL),
               IdentityResult("transport null-form identity", tra, IDENTITY_TOL, negative_control)]
    for name, err in operator_checks(n, seed).items():
        results.append(IdentityResult(name, err, OPERATOR_TOLS[name]))
    return SuiteResult(tuple(results))
