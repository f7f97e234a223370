"""Elliptic recovery of the temporal potential.

At ``t = 0`` we solve ``(Delta - |phi|^2) a0 = -Im(phi conj(phi_t))`` directly on
the torus. Afterwards ``A0`` is carried by integrating ``B0 = Delta^-1 div J``,
and :func:`a0_residual` measures how well the integrated ``A0`` still solves the
elliptic equation.
"""
from __future__ import annotations

import numpy as np

from .fields import State, current, spatial_current
from .spectral import ScalarField, VectorField, divergence, inv_laplacian, l2_norm, laplacian

__all__ = ["SolverDiverged", "solve_a0", "solve_screened", "compute_b0", "a0_residual"]


class SolverDiverged(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(f"{message} (relative residual {residual:.3e} after {iterations} iterations)")
        self.residual = residual
        self.iterations = iterations


def solve_screened(weight: np.ndarray, rhs: ScalarField, tol: float = 1e-10,
                   max_iter: int | None = None) -> ScalarField:
    """Solve ``(-Delta + P weight) u = rhs`` on the 2/3-rule band.

    ``weight`` is a nonnegative physical array that is not identically zero.
    Preconditioned conjugate gradients with the Fourier-diagonal
    ``-Delta + mean(weight)`` as preconditioner.
    """
    g = rhs.grid
    n = g.n
    mask = g.dealias_mask
    k2 = g.kabs**2
    max_iter = 10 * n if max_iter is None else max_iter
    precond = np.where(mask, 1.0 / (k2 + float(np.mean(weight))), 0.0)

    def to_c(v):
        return np.fft.fft2(v) / n**2

    def to_p(c):
        return (np.fft.ifft2(c) * n**2).real

    def op(c):
        wu = to_c(weight * to_p(c))
        return np.where(mask, k2 * c + wu, 0)

    b = np.where(mask, rhs.coefficients, 0)
    bnorm = np.linalg.norm(b)
    u = np.zeros_like(b)
    if bnorm == 0:
        return ScalarField(g, to_p(u), real=True)
    r = b.copy()
    z = precond * r
    p = z.copy()
    rz = np.vdot(r, z).real
    res = 1.0
    for it in range(1, max_iter + 1):
        ap = op(p)
        alpha = rz / np.vdot(p, ap).real
        u += alpha * p
        r -= alpha * ap
        res = np.linalg.norm(r) / bnorm
        if res <= tol:
            return ScalarField(g, to_p(u), real=True)
        z = precond * r
        rz_new = np.vdot(r, z).real
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverDiverged("screened Poisson solve did not converge", res, max_iter)


def solve_a0(phi: ScalarField, phi_t: ScalarField, tol: float = 1e-10,
             max_iter: int | None = None) -> ScalarField:
    """Initial temporal potential from ``(Delta - |phi|^2) a0 = -Im(phi conj phi_t)``."""
    p = phi.values
    rhs = ScalarField(phi.grid, np.imag(p * np.conj(phi_t.values)), real=True)
    weight = np.abs(p) ** 2
    if not np.any(weight > 0):
        # Degenerate case: Delta a0 = 0 in the zero-mean class.
        return inv_laplacian(-rhs)
    return solve_screened(weight, rhs, tol=tol, max_iter=max_iter)


def compute_b0(phi: ScalarField, a: VectorField) -> ScalarField:
    """``B0 = Delta^-1 d_j J_j`` with ``J_j = -Im(phi conj d_j phi) + |phi|^2 A_j``."""
    return inv_laplacian(divergence(spatial_current(phi, a)))


def a0_residual(state: State) -> float:
    """Normalized ``L^2`` residual of ``(Delta - |phi|^2) A0 + Im(phi conj phi_t)``."""
    r = laplacian(state.a0) - current(state).j0
    scale = 1 + l2_norm(state.a0) + l2_norm(state.phi) ** 2
    return l2_norm(r) / scale
