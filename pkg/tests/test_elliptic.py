from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkglab.dynamics import DataSpec, SimConfig, make_initial_data
from mkglab.elliptic import SolverDiverged, a0_residual, compute_b0, solve_a0, solve_screened
from mkglab.fields import spatial_current
from mkglab.spectral import Grid2D, ScalarField, divergence, laplacian, truncate

G = Grid2D(16)


def dense_screened(weight, rhs):
    """Reference solve of (-Delta + P w) u = P rhs on the retained band via a dense matrix."""
    n = G.n
    mask = G.dealias_mask.ravel()
    idx = np.flatnonzero(mask)
    k2 = (G.kabs**2).ravel()
    cols = []
    for i in idx:
        c = np.zeros(n * n, dtype=complex)
        c[i] = 1
        u = np.fft.ifft2(c.reshape(n, n)) * n**2
        wu = (np.fft.fft2(weight * u) / n**2).ravel()
        col = k2 * c + wu
        cols.append(col[idx])
    mat = np.array(cols).T
    b = rhs.coefficients.ravel()[idx]
    sol = np.linalg.solve(mat, b)
    out = np.zeros(n * n, dtype=complex)
    out[idx] = sol
    return (np.fft.ifft2(out.reshape(n, n)) * n**2).real


@given(st.integers(0, 10**6))
@settings(max_examples=5, deadline=None)
def test_screened_solve_matches_dense(seed):
    rng = np.random.default_rng(seed)
    x1, x2 = G.x
    weight = 0.5 + 0.4 * np.cos(x1 + rng.uniform(0, 6)) * np.sin(x2)
    rhs = truncate(ScalarField(G, rng.standard_normal((16, 16)), real=True))
    u = solve_screened(weight, rhs, tol=1e-13)
    assert np.allclose(u.values, dense_screened(weight, rhs), atol=1e-10)


def test_screened_solve_constant_weight():
    f = ScalarField.from_function(G, lambda x1, x2: np.cos(2 * x1) * np.cos(x2), real=True)
    u = solve_screened(np.full((16, 16), 3.0), f)
    assert np.allclose(u.values, f.values / (5 + 3), atol=1e-11)


def test_screened_solve_reports_divergence():
    rng = np.random.default_rng(0)
    weight = 1 + rng.uniform(0, 5, (16, 16))
    rhs = truncate(ScalarField(G, rng.standard_normal((16, 16)), real=True))
    with pytest.raises(SolverDiverged) as info:
        solve_screened(weight, rhs, tol=1e-14, max_iter=2)
    assert info.value.iterations == 2 and info.value.residual > 1e-14


def test_zero_rhs_gives_zero():
    u = solve_screened(np.ones((16, 16)), ScalarField.zeros(G, real=True))
    assert np.all(u.values == 0)


@given(st.integers(0, 10**6))
@settings(max_examples=5, deadline=None)
def test_a0_solves_elliptic_equation(seed):
    s = make_initial_data(SimConfig(n=32, seed=seed, data_spec=DataSpec(band=3)))
    assert a0_residual(s) < 1e-9
    # a0 is real and the equation is (Delta - |phi|^2) a0 = -Im(phi conj phi_t)
    lhs = laplacian(s.a0).values - truncate(
        ScalarField(s.grid, np.abs(s.phi.values) ** 2 * s.a0.values, real=True)).values
    rhs = -truncate(ScalarField(s.grid, np.imag(s.phi.values * np.conj(s.phi_t.values)), real=True)).values
    assert np.max(np.abs(lhs - rhs)) < 1e-8


def test_a0_with_vanishing_phi():
    z = ScalarField.zeros(G)
    assert np.all(solve_a0(z, z).values == 0)


def test_b0_is_mean_free_and_solves_poisson():
    s = make_initial_data(SimConfig(n=32, seed=3, data_spec=DataSpec(band=3)))
    b0 = compute_b0(s.phi, s.a)
    assert abs(b0.mean()) < 1e-15
    div = divergence(spatial_current(s.phi, s.a))
    assert np.allclose(laplacian(b0).values, div.values, atol=1e-11)
