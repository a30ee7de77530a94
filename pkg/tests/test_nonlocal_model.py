import math

import numpy as np
import pytest

import gradlab as g
from gradlab.exceptions import DegenerateProjectionError, NoEquilibriumError, ZeroStateError
from gradlab.nonlocal_model import (
    RateCase,
    closed_form_path,
    equilibria,
    project_onto_manifold,
    tangent_directions,
)


def test_closed_form_zero(interval16):
    for t in (0.0, 1.0, 1e6):
        assert np.all(g.closed_form(interval16, np.zeros(16), 2, 1, t) == 0)


def test_closed_form_limit(interval16):
    a0 = np.zeros(16)
    a0[0] = 0.1
    a = g.closed_form(interval16, a0, 2, 1, 1e3)
    assert abs(np.linalg.norm(a) - math.sqrt(3)) <= 1e-8
    assert a[0] > 0


def test_closed_form_extreme_times_finite(interval16):
    a0 = np.zeros(16)
    a0[:4] = [0.1, 0.2, 0.0, 1.0]
    for t in (1e-12, 1e3, 1e8):
        assert np.all(np.isfinite(g.closed_form(interval16, a0, 2, 1, t)))
    with pytest.raises(ValueError):
        g.closed_form(interval16, a0, 2, 1, -1.0)


@pytest.mark.parametrize("domain,n,m", [("interval", 16, 1), ("interval", 16, 2),
                                        ("square", 20, 1), ("square", 20, 2)])
def test_oracle_equivalence(domain, n, m):
    b = g.build_basis(domain, n)
    rng = np.random.default_rng(7)
    l = 2
    flow = g.nonlocal_cubic(b, l, m)
    dt = 1e-3 if m == 1 else 2e-4
    for _ in range(10 if domain == "interval" and m == 1 else 2):
        a0 = rng.standard_normal(b.size) * 0.2 / np.arange(1, b.size + 1)
        tr = g.integrate(flow, a0, g.IntegratorParams(dt=dt, t_end=10.0, record_stride=50))
        cf = closed_form_path(b, a0, l, m, tr.times)
        assert np.max(np.abs(tr.states - cf)) <= 1e-6


def test_closed_form_rotation_invariance(rng):
    b = g.build_basis("square", 20)
    idx = b.group_indices(b.group_of_eigenvalue(5))
    Q, _ = np.linalg.qr(rng.standard_normal((2, 2)))
    a0 = rng.standard_normal(b.size) * 0.1
    r0 = a0.copy()
    r0[idx] = Q @ a0[idx]
    l = b.group_of_eigenvalue(10)
    for t in (0.5, 3.0):
        x, y = g.closed_form(b, a0, l, 1, t), g.closed_form(b, r0, l, 1, t)
        x[idx] = Q @ x[idx]
        assert np.allclose(x, y, atol=1e-14)


def test_equilibria_examples(interval16, square64):
    man = equilibria(interval16, 1, 2)
    assert man.radius == pytest.approx(math.sqrt(3)) and man.dim == 0
    sq = equilibria(square64, square64.group_of_eigenvalue(5), square64.group_of_eigenvalue(10))
    assert sq.radius == pytest.approx(math.sqrt(5)) and sq.dim == 1
    with pytest.raises(NoEquilibriumError):
        equilibria(interval16, 2, 1)


def test_classify_rate_examples(interval16):
    a = np.zeros(16)
    a[1] = 0.1
    c = g.classify_rate(interval16, a, 1)
    assert c.case is RateCase.DECAY_EXPONENTIAL and c.label == "i" and c.predicted_rate == 3
    a = np.zeros(16)
    a[0] = 0.3
    assert g.classify_rate(interval16, a, 1).label == "ii"
    a[0] = 0.1
    c = g.classify_rate(interval16, a, 2)
    assert c.label == "iii" and c.limit_norm == pytest.approx(math.sqrt(3))
    assert not c.t_prefactor
    a[1] = 0.05
    assert g.classify_rate(interval16, a, 2).t_prefactor
    with pytest.raises(ZeroStateError):
        g.classify_rate(interval16, np.zeros(16), 2)


def test_hr_check_interval_and_square(interval16, square64):
    rep = g.hr_check(interval16, 1, 2)
    assert rep.passed and rep.kernel_dims == [0] * 8
    rep = g.hr_check(square64, square64.group_of_eigenvalue(5), square64.group_of_eigenvalue(10))
    assert rep.passed and rep.manifold_dim == 1 and rep.kernel_dims == [1] * 8
    assert max(rep.spectral_gaps) - min(rep.spectral_gaps) <= 1e-8
    assert np.allclose(rep.spectral_gaps, 3.0, atol=1e-6)


def test_hr_check_multiplicity_three():
    b = g.build_basis("square", 80)
    rep = g.hr_check(b, b.group_of_eigenvalue(50), b.group_of_eigenvalue(52), n_samples=4)
    assert rep.passed and rep.kernel_dims == [2] * 4


def test_projection_examples(square64, rng):
    man = equilibria(square64, square64.group_of_eigenvalue(5), square64.group_of_eigenvalue(10))
    u = np.zeros(square64.size)
    u[man.indices] = [3.0, 4.0]
    u[0] = 7.0
    psi = project_onto_manifold(u, man)
    assert np.allclose(psi[man.indices], math.sqrt(5) * np.array([0.6, 0.8]))
    assert np.allclose(project_onto_manifold(psi, man), psi)
    with pytest.raises(DegenerateProjectionError):
        project_onto_manifold(square64.unit(0), man)
    # nearest point property against sampled manifold points
    for _ in range(20):
        u = rng.standard_normal(square64.size)
        best = np.linalg.norm(u - project_onto_manifold(u, man))
        for z in rng.standard_normal((50, 2)):
            assert best <= np.linalg.norm(u - man.point(z)) + 1e-12


def test_tangent_directions(square64):
    man = equilibria(square64, square64.group_of_eigenvalue(5), square64.group_of_eigenvalue(10))
    psi = man.point(np.array([1.0, 2.0]))
    T = tangent_directions(man, psi)
    assert T.shape == (1, square64.size)
    assert abs(T[0] @ psi) <= 1e-13
    # tangent directions span the Jacobian kernel
    J = g.jacobian(g.nonlocal_cubic(square64, square64.group_of_eigenvalue(10)), psi)
    assert np.max(np.abs(J @ T[0])) <= 1e-12
