from __future__ import annotations

import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkglab.dynamics import (
    MONITOR_HEADER,
    BlowupDetected,
    ConfigError,
    DataSpec,
    SimConfig,
    convergence_study,
    make_initial_data,
    rhs_direct,
    rhs_nullform,
    simulate,
    step_rk4,
    write_monitor_csv,
)
from mkglab.fields import State
from mkglab.spectral import Grid2D, ScalarField, VectorField, divergence, l2_norm

SMALL = SimConfig(n=32, seed=1, t_end=0.25, data_spec=DataSpec(band=3))


def test_default_dt():
    assert math.isclose(SimConfig(n=64).dt, 0.5 * 2 * math.pi / 64)


@pytest.mark.parametrize("kw", [
    {"n": 12}, {"dt": 0.0}, {"t_end": -1.0}, {"formulation": "lorenz"}, {"seed": -1},
    {"monitor_stride": 0}, {"n": 16, "data_spec": DataSpec(band=8)},
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        SimConfig(**kw)


@pytest.mark.parametrize("d", [
    {"bogus": 1}, {"data_spec": {"colour": 1}}, {"n": 32.0}, {"seed": "7"}, {"dt": "fast"},
    {"snapshots": 1}, {"data_spec": {"band": 2.5}}, {"data_spec": [1, 2]}, {"formulation": 3},
])
def test_config_from_dict_rejects(d):
    with pytest.raises(ConfigError):
        SimConfig.from_dict(d)


def test_config_round_trip():
    cfg = SimConfig.from_dict({"n": 16, "seed": 9, "data_spec": {"s": 1.5, "band": 2}})
    assert cfg.data_spec == DataSpec(s=1.5, band=2)
    again = SimConfig.from_dict({**cfg.to_dict(), "data_spec": cfg.to_dict()["data_spec"]})
    assert again == cfg


@given(st.floats(0.05, 3.0), st.floats(0.001, 0.5))
@settings(max_examples=30, deadline=None)
def test_steps_land_on_t_end(t_end, dt):
    n, h = SimConfig(n=8, t_end=t_end, dt=dt, data_spec=DataSpec(band=2)).steps()
    assert math.isclose(n * h, t_end, rel_tol=1e-12)
    assert h <= dt * (1 + 1e-8)


def test_initial_data_is_deterministic_and_gauge_fixed():
    a = make_initial_data(SMALL)
    b = make_initial_data(SMALL)
    assert np.array_equal(a.phi.values, b.phi.values)
    assert np.array_equal(a.a_t.x2.values, b.a_t.x2.values)
    c = make_initial_data(SimConfig(n=32, seed=2, data_spec=DataSpec(band=3)))
    assert not np.array_equal(a.phi.values, c.phi.values)
    assert a.gauge_ok(1e-12)
    assert abs(a.a.x1.mean()) < 1e-15


@given(st.integers(0, 10**6))
@settings(max_examples=5, deadline=None)
def test_formulations_give_the_same_tendency(seed):
    s = make_initial_data(SimConfig(n=32, seed=seed, data_spec=DataSpec(band=3)))
    d, n = rhs_direct(s), rhs_nullform(s)
    scale = l2_norm(d.phi_t)
    assert l2_norm(d.phi_t - n.phi_t) <= 1e-12 * scale
    for j in (1, 2):
        assert l2_norm(d.a_t[j] - n.a_t[j]) <= 1e-12 * max(1.0, l2_norm(d.a_t[j]))


def test_tendency_preserves_coulomb_gauge():
    s = make_initial_data(SMALL)
    for rhs in (rhs_direct, rhs_nullform):
        t = rhs(s)
        assert l2_norm(divergence(t.a_t)) < 1e-12


def test_free_wave_one_step_is_fourth_order():
    g = Grid2D(16)
    phi = ScalarField.from_function(g, lambda x1, x2: np.cos(x1 + x2))
    phi_t = ScalarField.from_function(g, lambda x1, x2: math.sqrt(2) * np.sin(x1 + x2))
    s = State(phi, phi_t, VectorField.zeros(g), VectorField.zeros(g), ScalarField.zeros(g, real=True))
    errs = []
    for dt in (0.1, 0.05):
        out = step_rk4(s, dt)
        exact = np.cos(g.x[0] + g.x[1] - math.sqrt(2) * dt)
        errs.append(np.max(np.abs(out.phi.values - exact)))
    # local error is O(dt^5)
    assert 24 < errs[0] / errs[1] < 40


def test_simulate_monitors_and_stride():
    cfg = SimConfig(n=16, t_end=0.5, dt=0.1, monitor_stride=2, data_spec=DataSpec(band=2))
    final, rows = simulate(cfg)
    assert [round(r.t, 12) for r in rows] == [0.0, 0.2, 0.4, 0.5]
    assert math.isclose(final.time, 0.5)
    assert rows[0].energy > 0 and rows[0].h_s_norm_phi > 0


def test_zero_duration_has_one_row():
    final, rows = simulate(SimConfig(n=16, t_end=0, data_spec=DataSpec(band=2)))
    assert len(rows) == 1 and final.time == 0


def test_energy_drift_is_small():
    # coarse grid: spatial truncation, not the time step, dominates here
    _, rows = simulate(SMALL)
    assert abs(rows[-1].energy - rows[0].energy) < 1e-5 * rows[0].energy


def test_blowup_detected_with_partial_monitors():
    cfg = SimConfig(n=32, dt=1.0, t_end=200, data_spec=DataSpec(band=3))
    with pytest.raises(BlowupDetected) as info:
        simulate(cfg)
    assert 1 <= info.value.stage <= 4
    assert info.value.monitors and info.value.monitors[0].t == 0


def test_monitor_csv_is_reproducible(tmp_path):
    paths = []
    for i in range(2):
        _, rows = simulate(SMALL)
        p = tmp_path / f"m{i}.csv"
        write_monitor_csv(rows, str(p))
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()
    with open(paths[0]) as fh:
        table = list(csv.reader(fh))
    assert table[0] == MONITOR_HEADER and len(table) == len(rows) + 1


def test_small_convergence_study(tmp_path):
    cfg = SimConfig(n=16, seed=2, t_end=0.5, dt=0.1, data_spec=DataSpec(amplitude=0.3, band=2))
    study = convergence_study(cfg, refinements=3)
    assert len(study.dts) == 3 and study.initial is not None
    for vals in study.orders.values():
        assert abs(vals[0] - 4) < 0.5
    study.write_csv(str(tmp_path / "c.csv"))
    assert (tmp_path / "c.csv").read_text().startswith("dt,charge_drift")
    with pytest.raises(ValueError):
        convergence_study(cfg, refinements=2)
