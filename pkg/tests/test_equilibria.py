import importlib
import math

import numpy as np
import pytest

import gradlab as g
from gradlab.exceptions import NoConvergenceError

# the package namespace re-exports the equilibria() function under the same name
equilibria_mod = importlib.import_module("gradlab.equilibria")


def test_newton_nonlocal_converges_to_sphere(interval16):
    flow = g.nonlocal_cubic(interval16, 2)
    guess = np.zeros(16)
    guess[:2] = [1.5, 0.1]
    eq = g.newton_equilibrium(flow, guess, newton_tol=1e-12)
    expect = np.zeros(16)
    expect[0] = math.sqrt(3)
    assert np.allclose(eq.state, expect, atol=1e-10)
    assert eq.residual_norm <= 1e-12
    assert eq.kernel_dim == 0 and eq.spectral_gap == pytest.approx(3.0)


def test_newton_trivial_guess(interval16):
    flow = g.local(interval16, "allen_cahn")
    eq = g.newton_equilibrium(flow, np.zeros(16))
    assert np.all(eq.state == 0) and eq.iterations == 0


def test_newton_residual_self_consistency(interval16):
    flow = g.local(interval16, "allen_cahn")
    eq = g.newton_equilibrium(flow, 2.0 * interval16.unit(0))
    assert np.linalg.norm(flow.rhs(eq.state)) <= 1e-10
    assert eq.residual_norm == pytest.approx(np.linalg.norm(flow.rhs(eq.state)))


def test_newton_nonzero_local_equilibrium(interval16):
    # u_xx + 5u - u^3 = 0 has a positive branch bifurcating from lambda_1 = 1
    nl = g.Nonlinearity(lambda u: 5 * u - u**3, lambda u: 5 - 3 * u**2,
                        lambda u: 2.5 * u**2 - 0.25 * u**4, "ac5")
    flow = g.local(interval16, nl)
    eq = g.newton_equilibrium(flow, 2.0 * interval16.unit(0))
    assert eq.residual_norm <= 1e-10
    assert np.linalg.norm(eq.state) > 1.0
    assert eq.spectral_gap > 0


def test_newton_perturbed_rejected(interval16):
    flow = g.perturbed(g.nonlocal_cubic(interval16, 2), g.DecayProfile.power_law(3.0))
    with pytest.raises(ValueError):
        g.newton_equilibrium(flow, np.zeros(16))


def test_newton_no_convergence(interval16, monkeypatch):
    monkeypatch.setattr(equilibria_mod, "MAX_ITERATIONS", 2)
    flow = g.local(interval16, "allen_cahn")
    with pytest.raises(NoConvergenceError):
        g.newton_equilibrium(flow, 2.0 * interval16.unit(0))


def test_analyze_spectrum_nonlocal_analytic(square64, rng):
    j, l = square64.group_of_eigenvalue(5), square64.group_of_eigenvalue(10)
    flow = g.nonlocal_cubic(square64, l)
    psi = np.zeros(square64.size)
    idx = square64.group_indices(j)
    z = rng.standard_normal(2)
    psi[idx] = math.sqrt(5) * z / np.linalg.norm(z)
    spectrum, k, gap = g.analyze_spectrum(flow, psi)
    lam = square64.eigenvalues
    expect = list(5.0 - lam[lam != 5]) + [0.0, -2 * 5.0]
    assert np.allclose(np.sort(spectrum), np.sort(expect), atol=1e-8)
    assert k == 1 and gap == pytest.approx(3.0)  # |5 - 8|
    J = g.jacobian(flow, psi)
    assert np.max(np.abs(np.linalg.eigvals(J).imag)) <= 1e-10
