"""The exactly solvable non-local cubic flow.

For ``u_t = -(-Laplace)^m u + lambda_l^m u - (int u^2) u`` the Galerkin
coefficients evolve independently up to the common factor
``exp(-int_0^t |a|^2)``, which integrates in closed form.  Everything here
is written in terms of ``Lam_k = lambda_k ** m``.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import logsumexp

from .exceptions import DegenerateProjectionError, NoEquilibriumError, ZeroStateError
from .flows import nonlocal_cubic

GROUP_ACTIVITY_THRESHOLD = 1e-14
GAP_FLOOR = 1e-6


def kernel_tolerance(spectrum):
    """Zero-eigenvalue threshold ``1e-8 * (1 + spectral radius)``."""
    spectrum = np.asarray(spectrum)
    radius = float(np.max(np.abs(spectrum))) if spectrum.size else 0.0
    return 1e-8 * (1.0 + radius)


def split_spectrum(spectrum):
    """Return ``(kernel_dim, spectral_gap)``; values at the threshold count as kernel."""
    spectrum = np.asarray(spectrum)
    tol = kernel_tolerance(spectrum)
    mags = np.abs(spectrum)
    kernel = mags <= tol
    gap = float(np.min(mags[~kernel])) if np.any(~kernel) else np.inf
    return int(np.count_nonzero(kernel)), gap


def closed_form(basis, init, l, m, t):
    """Exact coefficients ``a(t)`` of the non-local flow started from ``init``.

    Evaluated in log space: each numerator ``|a_k(0)| exp((Lam_l - Lam_k) t)``
    and each positive term of the square-root denominator are kept as
    logarithms until the final exponentiation, so large ``t`` neither
    overflows nor loses the ratio.  Modes whose ratio underflows return 0.
    """
    a0 = basis.check(init, "init")
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    lam = basis.eigenvalues ** m
    lam_l = basis.group_eigenvalue(l) ** m
    sq = a0 * a0
    resonant = lam == lam_l
    log_terms = [0.0]
    al2 = np.sum(sq[resonant])
    if al2 > 0 and t > 0:
        log_terms.append(np.log(2.0 * al2 * t))
    if t > 0:
        active = (~resonant) & (sq > 0)
        d = lam_l - lam[active]
        # sq/d * expm1(2 d t) > 0 for either sign of d
        x = 2.0 * d * t
        log_expm1 = np.log(-np.expm1(-np.abs(x))) + np.maximum(x, 0.0)
        log_terms.extend(np.log(sq[active] / np.abs(d)) + log_expm1)
    log_den = logsumexp(log_terms)
    out = np.zeros_like(a0)
    nz = a0 != 0
    out[nz] = np.sign(a0[nz]) * np.exp(np.log(np.abs(a0[nz])) + (lam_l - lam[nz]) * t
                                       - 0.5 * log_den)
    return out


def closed_form_path(basis, init, l, m, times):
    """:func:`closed_form` at each time in ``times``; shape ``(len(times), n_modes)``."""
    return np.array([closed_form(basis, init, l, m, t) for t in np.asarray(times, float)])


@dataclass(frozen=True)
class EquilibriumManifold:
    """Sphere of radius ``sqrt(Lam_l - Lam_j)`` inside the ``j`` eigenspace."""

    basis: object
    j_group: int
    l_group: int
    m: int
    radius: float
    dim: int

    @property
    def indices(self):
        return self.basis.group_indices(self.j_group)

    def point(self, direction):
        """Manifold point along ``direction`` (group coordinates, any nonzero length)."""
        direction = np.asarray(direction, dtype=float)
        out = np.zeros(self.basis.size)
        out[self.indices] = self.radius * direction / np.linalg.norm(direction)
        return out


def equilibria(basis, j_group, l_group, m=1):
    """Equilibrium manifold through the ``j`` eigenspace for the flow selected by ``l``.

    Raises :class:`NoEquilibriumError` unless ``lambda_l^m > lambda_j^m``.
    """
    lam_j = basis.group_eigenvalue(j_group) ** m
    lam_l = basis.group_eigenvalue(l_group) ** m
    if not lam_l > lam_j:
        raise NoEquilibriumError(
            f"no nontrivial equilibrium in group {j_group}: lambda_l^m={lam_l} <= lambda_j^m={lam_j}")
    return EquilibriumManifold(basis, j_group, l_group, m, float(np.sqrt(lam_l - lam_j)),
                               basis.multiplicity(j_group) - 1)


class RateCase(str, Enum):
    DECAY_EXPONENTIAL = "decay_exponential"
    DECAY_ALGEBRAIC = "decay_algebraic"
    CONVERGE_NONZERO = "converge_nonzero"


@dataclass(frozen=True)
class RateClassification:
    case: RateCase
    j: int
    predicted_rate: float
    limit_norm: float
    t_prefactor: bool = False

    @property
    def label(self):
        return {RateCase.DECAY_EXPONENTIAL: "i", RateCase.DECAY_ALGEBRAIC: "ii",
                RateCase.CONVERGE_NONZERO: "iii"}[self.case]


def first_active_group(basis, a, threshold=GROUP_ACTIVITY_THRESHOLD):
    for g, idx in enumerate(basis.groups, start=1):
        if np.any(np.abs(a[list(idx)]) > threshold):
            return g
    return None


def classify_rate(basis, init, l, m=1):
    """Long-time behaviour of the non-local flow from ``init``.

    ``predicted_rate`` is the exponential rate ``Lam_j - Lam_l`` in case (i),
    the algebraic exponent 1/2 in case (ii) and the exponential rate
    ``2 (Lam_l - Lam_j)`` of the approach to the limit sphere in case (iii).
    """
    a0 = basis.check(init, "init")
    j = first_active_group(basis, a0)
    if j is None:
        raise ZeroStateError("initial data vanishes in every eigenvalue group")
    lam_j = basis.group_eigenvalue(j) ** m
    lam_l = basis.group_eigenvalue(l) ** m
    if lam_j > lam_l:
        return RateClassification(RateCase.DECAY_EXPONENTIAL, j, lam_j - lam_l, 0.0)
    if lam_j == lam_l:
        return RateClassification(RateCase.DECAY_ALGEBRAIC, j, 0.5, 0.0)
    al2 = float(np.sum(a0[basis.group_indices(l)] ** 2))
    return RateClassification(RateCase.CONVERGE_NONZERO, j, 2.0 * (lam_l - lam_j),
                              float(np.sqrt(lam_l - lam_j)), t_prefactor=al2 > 0)


@dataclass(frozen=True)
class HRReport:
    manifold_dim: int
    kernel_dims: list
    spectral_gaps: list
    samples: np.ndarray

    @property
    def passed(self):
        return (all(k == self.manifold_dim for k in self.kernel_dims)
                and min(self.spectral_gaps) >= GAP_FLOOR)


def hr_check(basis, j_group, l_group, m=1, n_samples=8, seed=0):
    """Check that the kernel of the linearization matches the manifold dimension.

    Samples ``n_samples`` points uniformly on the equilibrium sphere, builds
    the Jacobian at each and counts near-zero eigenvalues.
    """
    manifold = equilibria(basis, j_group, l_group, m)
    flow = nonlocal_cubic(basis, l_group, m)
    rng = np.random.default_rng(seed)
    kappa = manifold.dim + 1
    kernel_dims, gaps, pts = [], [], []
    for _ in range(n_samples):
        z = rng.standard_normal(kappa)
        while np.linalg.norm(z) == 0:
            z = rng.standard_normal(kappa)
        psi = manifold.point(z)
        k, gap = split_spectrum(np.linalg.eigvalsh(flow.jacobian(psi)))
        kernel_dims.append(k)
        gaps.append(gap)
        pts.append(psi)
    return HRReport(manifold.dim, kernel_dims, gaps, np.array(pts))


def project_onto_manifold(u, manifold):
    """Closest point of the equilibrium sphere to ``u``.

    Normalizes the projection of ``u`` onto the ``j`` eigenspace and scales it
    to the manifold radius.  Raises :class:`DegenerateProjectionError` when
    that projection is (numerically) zero, since the minimizer is then not
    unique.
    """
    u = manifold.basis.check(u)
    pj = u[manifold.indices]
    norm = np.linalg.norm(pj)
    if norm < 1e-12:
        raise DegenerateProjectionError("u has no component in the manifold's eigenspace")
    out = np.zeros_like(u)
    out[manifold.indices] = manifold.radius * pj / norm
    return out


project_onto_Sk = project_onto_manifold


def tangent_directions(manifold, psi):
    """Orthonormal basis (rows) of the tangent space of the sphere at ``psi``."""
    c = psi[manifold.indices]
    kappa = len(c)
    # complete c / |c| to an orthonormal frame; the rest spans the tangent space
    q, _ = np.linalg.qr(np.column_stack([c, np.eye(kappa)]))
    out = np.zeros((kappa - 1, manifold.basis.size))
    out[:, manifold.indices] = q[:, 1:kappa].T
    return out
