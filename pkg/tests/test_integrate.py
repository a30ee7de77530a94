import math

import numpy as np
import pytest

import gradlab as g
from gradlab.integrate import tail_energies
from gradlab.nonlocal_model import closed_form_path


def _benchmark(basis):
    a0 = np.zeros(basis.size)
    a0[0], a0[1] = 0.1, 0.05
    return g.nonlocal_cubic(basis, 2), a0


def test_params_validation():
    with pytest.raises(ValueError):
        g.IntegratorParams(dt=0.0)
    with pytest.raises(ValueError):
        g.IntegratorParams(dt=1.5)
    with pytest.raises(ValueError):
        g.IntegratorParams(record_stride=0)
    with pytest.raises(ValueError):
        g.IntegratorParams(t_end=-1.0)


def test_fourth_order_convergence(interval16):
    flow, a0 = _benchmark(interval16)
    errs = []
    for dt in (0.1, 0.05):
        tr = g.integrate(flow, a0, g.IntegratorParams(dt=dt, t_end=10.0))
        errs.append(np.max(np.abs(tr.states - closed_form_path(interval16, a0, 2, 1, tr.times))))
    assert errs[0] / errs[1] >= 12


def test_lyapunov_monotone(interval16):
    flow, a0 = _benchmark(interval16)
    tr = g.integrate(flow, a0, g.IntegratorParams(dt=1e-2, t_end=10.0))
    assert np.all(np.diff(tr.lyapunov_values) >= -1e-9)
    assert tr.status is g.Status.MAX_TIME


def test_stiff_heat_stability():
    b = g.build_basis("interval", 256)
    a0 = np.ones(b.size) / np.arange(1, b.size + 1)
    tr = g.integrate(g.local(b, "heat"), a0, g.IntegratorParams(dt=1e-2, t_end=1.0))
    exact = a0 * np.exp(-b.eigenvalues * tr.times[-1])
    assert np.all(np.isfinite(tr.states))
    assert np.max(np.abs(tr.final_state - exact)) <= 1e-8


def test_recording_stride_and_final_step(interval16):
    flow, a0 = _benchmark(interval16)
    tr = g.integrate(flow, a0, g.IntegratorParams(dt=0.1, t_end=1.05, record_stride=3))
    assert tr.times[0] == 0.0
    assert tr.times[-1] == pytest.approx(1.05)
    assert np.allclose(np.diff(tr.times[:-1]), 0.3)
    assert np.array_equal(tr.states[0], a0)


def test_blow_up(interval16):
    tr = g.integrate(g.local(interval16, "cubic"), 10.0 * interval16.unit(0),
                     g.IntegratorParams(dt=1e-4, t_end=1.0))
    assert tr.status is g.Status.BLOW_UP
    assert 0 < tr.final_time < 1.0
    assert np.linalg.norm(tr.final_state) >= 1e6


def test_blow_up_overflow_bisection(interval16):
    # a step so coarse that a single RK4 stage overflows
    tr = g.integrate(g.local(interval16, "cubic"), 1e3 * interval16.unit(0),
                     g.IntegratorParams(dt=0.5, t_end=1.0, blowup_threshold=1e300))
    assert tr.status is g.Status.BLOW_UP
    assert math.isfinite(tr.final_time)
    assert np.all(np.isfinite(tr.states))


def test_converged_status(interval16):
    flow, _ = _benchmark(interval16)
    a0 = np.zeros(16)
    a0[0] = 0.1
    tr = g.integrate(flow, a0, g.IntegratorParams(dt=1e-2, t_end=100.0, stationary_tol=1e-8))
    assert tr.status is g.Status.CONVERGED
    assert tr.final_time < 100.0
    assert np.linalg.norm(flow.rhs(tr.final_state)) < 1e-8


def test_trajectory_is_read_only(interval16):
    flow, a0 = _benchmark(interval16)
    tr = g.integrate(flow, a0, g.IntegratorParams(dt=0.1, t_end=0.5))
    with pytest.raises(ValueError):
        tr.states[0, 0] = 1.0


def test_tail_energy_synthetic():
    t = np.linspace(0.0, 40.0, 40001)
    tr = g.Trajectory.from_arrays(t, np.exp(-t / 2), None, 0.5 * np.exp(-t / 2))
    for s in (0.0, 1.0, 5.0):
        assert g.tail_energy(tr, s) == pytest.approx(0.25 * math.exp(-s), rel=1e-6)
    with pytest.raises(ValueError):
        g.tail_energy(tr, 41.0)


def test_tail_energy_at_equilibrium(interval16):
    flow = g.nonlocal_cubic(interval16, 2)
    a0 = np.zeros(16)
    a0[0] = math.sqrt(3)
    # the scheme's fixed point sits O(dt^4) away from the equilibrium
    tr = g.integrate(flow, a0, g.IntegratorParams(dt=1e-3, t_end=2.0))
    assert g.tail_energy(tr, 0.0) <= 1e-20
    zero = g.integrate(flow, np.zeros(16), g.IntegratorParams(dt=0.1, t_end=2.0))
    assert np.all(tail_energies(zero) == 0.0)


def test_tail_energy_rejects_blow_up(interval16):
    tr = g.integrate(g.local(interval16, "cubic"), 10.0 * interval16.unit(0),
                     g.IntegratorParams(dt=1e-4, t_end=1.0))
    with pytest.raises(ValueError):
        g.tail_energy(tr, 0.0)
