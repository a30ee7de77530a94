"""Equilibrium finding and linearized spectral analysis for any unperturbed flow."""

from dataclasses import dataclass

import numpy as np

from .exceptions import NoConvergenceError, SingularJacobianError
from .nonlocal_model import split_spectrum

MAX_ITERATIONS = 50
MAX_HALVINGS = 30


@dataclass(frozen=True)
class Equilibrium:
    state: np.ndarray
    residual_norm: float
    spectrum: np.ndarray
    kernel_dim: int
    spectral_gap: float
    iterations: int = 0


def analyze_spectrum(flow, state):
    """Sorted Jacobian spectrum with its kernel dimension and spectral gap."""
    J = flow.jacobian(flow.basis.check(state))
    spectrum = np.linalg.eigvalsh(J)
    k, gap = split_spectrum(spectrum)
    return spectrum, k, gap


def _newton_step(J, r):
    # pseudo-inverse on the complement of the numerical kernel
    w, Q = np.linalg.eigh(J)
    cut = 1e-12 * (1.0 + np.max(np.abs(w)))
    keep = np.abs(w) > cut
    if not np.any(keep):
        raise SingularJacobianError("Jacobian vanishes numerically; no complement to solve on")
    c = Q.T @ r
    return -(Q[:, keep] @ (c[keep] / w[keep]))


def newton_equilibrium(flow, guess, newton_tol=1e-10):
    """Damped Newton iteration on ``rhs(a) = 0``.

    Singular Jacobians are handled by solving on the orthogonal complement of
    their numerical kernel.  Each step is halved (at most 30 times) until the
    residual norm decreases.

    Raises
    ------
    NoConvergenceError
        After 50 iterations without reaching ``newton_tol``.
    SingularJacobianError
        When no damped step on the kernel complement reduces the residual.
    """
    if getattr(flow, "perturbed", False):
        raise ValueError("equilibria are defined for unperturbed flows only")
    a = flow.basis.check(guess, "guess").copy()
    r = flow.rhs(a)
    res = np.linalg.norm(r)
    it = 0
    while res > newton_tol:
        if it >= MAX_ITERATIONS:
            raise NoConvergenceError(
                f"Newton did not converge in {MAX_ITERATIONS} iterations (residual {res:.3e})")
        it += 1
        step = _newton_step(flow.jacobian(a), r)
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            trial = a + lam * step
            r_trial = flow.rhs(trial)
            res_trial = np.linalg.norm(r_trial)
            if res_trial < res:
                break
            lam *= 0.5
        else:
            raise SingularJacobianError(
                f"no descent along the kernel-complement Newton direction (residual {res:.3e})")
        a, r, res = trial, r_trial, res_trial
    spectrum, k, gap = analyze_spectrum(flow, a)
    return Equilibrium(a, float(res), spectrum, k, gap, it)
