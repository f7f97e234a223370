"""Physical quantities of the Maxwell-Klein-Gordon system on the torus.

Conventions: Minkowski metric ``diag(-1, 1, 1)``, covariant derivative
``D_a phi = (d_a + i A_a) phi`` and current ``J_a = -Im(phi conj(D_a phi))``
with lower indices throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .spectral import (
    Grid2D,
    ScalarField,
    VectorField,
    dealias_product,
    divergence,
    frac_op,
    l2_norm,
    partial,
    truncate,
)

__all__ = [
    "State",
    "Current",
    "FieldStrength",
    "covariant_d",
    "current",
    "spatial_current",
    "null_form",
    "charge",
    "field_strength",
    "energy",
    "sobolev_norm",
    "gauge_divergence",
]

GAUGE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class State:
    """Full dynamical unknown at one instant; all fields stored physically."""

    phi: ScalarField
    phi_t: ScalarField
    a: VectorField
    a_t: VectorField
    a0: ScalarField
    time: float = 0.0

    def __post_init__(self):
        grids = {f.grid for f in (self.phi, self.phi_t, *self.a, *self.a_t, self.a0)}
        if len(grids) != 1:
            raise ValueError("state components live on different grids")
        for f in (*self.a, *self.a_t, self.a0):
            if not f.real:
                raise ValueError("gauge potentials must be real-tagged")

    @property
    def grid(self) -> Grid2D:
        return self.phi.grid

    @classmethod
    def zeros(cls, grid: Grid2D, time: float = 0.0) -> State:
        z = ScalarField.zeros(grid)
        return cls(z, z, VectorField.zeros(grid), VectorField.zeros(grid),
                   ScalarField.zeros(grid, real=True), time)

    def replace(self, **changes) -> State:
        return replace(self, **changes)

    def gauge_ok(self, tol: float = GAUGE_TOL) -> bool:
        bound = tol * (1 + _vec_norm(self.a) + _vec_norm(self.a_t))
        return gauge_divergence(self) <= bound


@dataclass(frozen=True, eq=False)
class Current:
    j0: ScalarField
    j1: ScalarField
    j2: ScalarField

    @property
    def spatial(self) -> VectorField:
        return VectorField(self.j1, self.j2)


@dataclass(frozen=True, eq=False)
class FieldStrength:
    """Independent components ``F_ab = d_a A_b - d_b A_a`` with ``a < b``."""

    f01: ScalarField
    f02: ScalarField
    f12: ScalarField


def _vec_norm(X: VectorField) -> float:
    return float(np.hypot(l2_norm(X.x1), l2_norm(X.x2)))


def covariant_d(state: State, alpha: int) -> ScalarField:
    """``D_alpha phi``; the potential-times-field product is de-aliased."""
    phi = state.phi
    if alpha == 0:
        base, pot = state.phi_t, state.a0
    elif alpha in (1, 2):
        base, pot = partial(phi, alpha), state.a[alpha]
    else:
        raise ValueError(f"alpha must be 0, 1 or 2, got {alpha}")
    return base + 1j * dealias_product([pot, phi])


def _current_component(phi: ScalarField, deriv: ScalarField, pot: ScalarField) -> ScalarField:
    # -Im(phi conj(deriv + i pot phi)) evaluated pointwise, then truncated once.
    p = phi.values
    d = deriv.values + 1j * pot.values * p
    return truncate(ScalarField(phi.grid, -np.imag(p * np.conj(d)), real=True))


def spatial_current(phi: ScalarField, a: VectorField) -> VectorField:
    """``J_j = -Im(phi conj(d_j phi)) + |phi|^2 A_j`` for j = 1, 2."""
    return VectorField(*(_current_component(phi, partial(phi, j), a[j]) for j in (1, 2)))


def current(state: State) -> Current:
    j0 = _current_component(state.phi, state.phi_t, state.a0)
    js = spatial_current(state.phi, state.a)
    return Current(j0, js.x1, js.x2)


def null_form(u: ScalarField, v: ScalarField, j: int, k: int) -> ScalarField:
    """``Q_jk(u, v) = d_j u d_k v - d_k u d_j v`` with de-aliased products."""
    if j == k:
        raise ValueError("null form needs distinct axes")
    g = u.grid
    pj_u, pk_u = partial(u, j).values, partial(u, k).values
    pj_v, pk_v = partial(v, j).values, partial(v, k).values
    real = u.real and v.real
    q = ScalarField(g, pj_u * pk_v - pk_u * pj_v, real=real)
    return truncate(q)


def charge(state: State) -> float:
    """Total charge ``int J_0 dx``."""
    j0 = current(state).j0
    return float(np.sum(j0.values) * state.grid.cell_area)


def field_strength(state: State) -> FieldStrength:
    a1, a2 = state.a
    f01 = state.a_t.x1 - partial(state.a0, 1)
    f02 = state.a_t.x2 - partial(state.a0, 2)
    f12 = partial(a2, 1) - partial(a1, 2)
    return FieldStrength(f01, f02, f12)


def energy(state: State) -> float:
    """``int 1/2 sum_a |D_a phi|^2 + 1/2 (F01^2 + F02^2 + F12^2) dx``."""
    dens = 0.0
    for alpha in (0, 1, 2):
        dens = dens + np.abs(covariant_d(state, alpha).values) ** 2
    fs = field_strength(state)
    for f in (fs.f01, fs.f02, fs.f12):
        dens = dens + f.values**2
    return float(0.5 * np.sum(dens) * state.grid.cell_area)


def sobolev_norm(f: ScalarField, s: float, kind: str = "inhomogeneous") -> float:
    """``||Lambda^s f||_2`` or ``||D^s f||_2`` via Parseval."""
    c = frac_op(f.to_spectral(), s, kind).data
    return float(f.grid.length * np.sqrt(np.sum(np.abs(c) ** 2)))


def gauge_divergence(state: State) -> float:
    """Largest ``L^2`` norm of ``div a`` and ``div a_t``."""
    return max(l2_norm(divergence(state.a)), l2_norm(divergence(state.a_t)))
