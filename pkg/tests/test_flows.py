import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import gradlab as g
from gradlab.exceptions import GalerkinOverflowError, SizeMismatchError, UndefinedPotentialError
from gradlab.flows import FLAT, DecayProfile


def _flows(basis):
    return {
        "allen_cahn": g.local(basis, "allen_cahn"),
        "cubic": g.local(basis, "cubic"),
        "flat": g.local(basis, "flat"),
        "nonlocal_l2": g.nonlocal_cubic(basis, 2),
        "nonlocal_m2": g.nonlocal_cubic(basis, 2, m=2),
        "nonlocal_general": g.nonlocal_general(basis, 4.0, lambda s: 0.5 * s * s, lambda s: s),
        "perturbed": g.perturbed(g.nonlocal_cubic(basis, 2), DecayProfile.power_law(3.0)),
    }


def fd_jacobian(flow, a, t=0.0, eps=1e-6):
    J = np.empty((a.size, a.size))
    for k in range(a.size):
        e = np.zeros_like(a)
        e[k] = eps
        J[:, k] = (flow.rhs(a + e, t) - flow.rhs(a - e, t)) / (2 * eps)
    return J


@pytest.mark.parametrize("name", ["allen_cahn", "cubic", "flat", "nonlocal_l2", "nonlocal_m2",
                                  "nonlocal_general", "perturbed"])
def test_jacobian_matches_central_differences(name, interval16, rng):
    flow = _flows(interval16)[name]
    for _ in range(20):
        a = rng.standard_normal(interval16.size) * 0.5
        J = g.jacobian(flow, a, 0.7)
        err = np.max(np.abs(J - fd_jacobian(flow, a, 0.7)))
        assert err <= 1e-6 * (1 + np.max(np.abs(J)))
        assert np.allclose(J, J.T, atol=1e-12 * (1 + np.max(np.abs(J))))


def test_nonlocal_rhs_zero_and_equilibrium(interval16):
    flow = g.nonlocal_cubic(interval16, 2)
    assert np.all(g.rhs(flow, np.zeros(16)) == 0)
    a = np.zeros(16)
    a[0] = math.sqrt(3)
    assert np.max(np.abs(g.rhs(flow, a))) <= 1e-14


def test_lyapunov_values(interval16):
    flow = g.nonlocal_cubic(interval16, 2)
    assert g.lyapunov(flow, np.zeros(16)) == 0.0
    a = np.zeros(16)
    a[0] = math.sqrt(3)
    assert g.lyapunov(flow, a) == pytest.approx(2.25, abs=1e-14)
    assert g.lyapunov(g.local(interval16, "allen_cahn"), np.zeros(16)) == 0.0


def test_nonlocal_jacobian_at_zero(interval16):
    J = g.jacobian(g.nonlocal_cubic(interval16, 2), np.zeros(16))
    k = np.arange(1, 17)
    assert np.array_equal(J, np.diag(4.0 - k**2))


def test_lyapunov_difference_matches_direct(interval16, rng):
    for flow in _flows(interval16).values():
        if getattr(flow, "perturbed", False):
            continue
        a, b = rng.standard_normal((2, 16)) * 0.3
        d = flow.lyapunov_difference(a, b)
        assert d == pytest.approx(flow.lyapunov(b) - flow.lyapunov(a), rel=1e-12, abs=1e-12)


def test_local_potential_gradient(interval16, rng):
    # rhs is the gradient of V for gradient flows
    for name in ("allen_cahn", "cubic", "flat", "nonlocal_l2", "nonlocal_general"):
        flow = _flows(interval16)[name]
        a = rng.standard_normal(16) * 0.4
        eps = 1e-6
        grad = np.array([(flow.lyapunov(a + eps * e) - flow.lyapunov(a - eps * e)) / (2 * eps)
                         for e in np.eye(16)])
        assert np.allclose(grad, flow.rhs(a), atol=1e-7 * (1 + np.abs(grad).max())), name


def test_rotation_equivariance_in_group(rng):
    b = g.build_basis("square", 64)
    flow = g.nonlocal_cubic(b, b.group_of_eigenvalue(10))
    idx = b.group_indices(b.group_of_eigenvalue(50))
    assert len(idx) == 3
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    a = rng.standard_normal(b.size) * 0.3
    ra = a.copy()
    ra[idx] = Q @ a[idx]
    lhs = flow.rhs(ra)
    rhs_rot = flow.rhs(a)
    rhs_rot[idx] = Q @ rhs_rot[idx]
    assert np.allclose(lhs, rhs_rot, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8))
def test_rhs_square_nonnegative_and_finite(coeffs):
    b = g.build_basis("interval", 8)
    a = np.array(coeffs)
    for flow in (g.local(b, "allen_cahn"), g.nonlocal_cubic(b, 2)):
        r = g.rhs(flow, a)
        assert np.all(np.isfinite(r))
        assert r @ r >= 0


def test_flat_nonlinearity_small_argument():
    u = np.array([0.0, 1e-9, -5e-9, 0.5])
    out = FLAT.f(u)
    assert out[0] == 0.0 and out[1] == 1e-9 and out[2] == -5e-9
    assert out[3] == pytest.approx(0.5 - math.exp(-4.0))


def test_flat_antiderivative():
    from scipy.integrate import quad

    for u in (0.3, 1.0, -0.7):
        ref = quad(lambda s: FLAT.f(np.array([s]))[0], 0.0, u, epsabs=1e-14)[0]
        assert FLAT.F(np.array([u]))[0] == pytest.approx(ref, abs=1e-12)


def test_size_mismatch(interval16):
    with pytest.raises(SizeMismatchError):
        g.rhs(g.nonlocal_cubic(interval16, 2), np.zeros(7))


def test_overflow_raises(interval16):
    flow = g.local(interval16, "cubic")
    with pytest.raises(GalerkinOverflowError):
        flow.rhs(np.full(16, 1e200))


def test_perturbed_has_no_potential(interval16):
    flow = _flows(interval16)["perturbed"]
    with pytest.raises(UndefinedPotentialError):
        flow.lyapunov(np.zeros(16))
    with pytest.raises(ValueError):
        g.perturbed(flow, DecayProfile.power_law(3.0))


def test_perturbed_rhs_adds_forcing(interval16, rng):
    base = g.nonlocal_cubic(interval16, 2)
    flow = g.perturbed(base, DecayProfile.power_law(3.0), "linear")
    a = rng.standard_normal(16)
    t = 1.5
    assert np.allclose(flow.rhs(a, t), base.rhs(a) + (1 + t) ** -3 * a, atol=1e-13)


def test_decay_profiles():
    h = DecayProfile.power_law(3.0)
    t = np.array([0.0, 1.0, 9.0])
    assert np.allclose(h(t), (1 + t) ** -3)
    assert np.allclose(h.derivative(t), -3 * (1 + t) ** -4)
    assert np.allclose(h.second_derivative(t), 12 * (1 + t) ** -5, rtol=1e-6)
    s = DecayProfile.sampled(np.linspace(0, 10, 101), np.exp(-np.linspace(0, 10, 101)))
    assert s(2.0) == pytest.approx(math.exp(-2.0), rel=1e-3)
    with pytest.raises(ValueError):
        DecayProfile.power_law(0.0)


def test_unknown_nonlinearity(interval16):
    with pytest.raises((KeyError, ValueError)):
        g.local(interval16, "nope")
