"""Dirichlet eigenbases of -Laplace on (0, pi) and (0, pi)^2.

Basis functions are L2-orthonormal products of ``sqrt(2/pi) sin(k x)``.
The quadrature is the uniform interior grid ``x_j = j*pi/(M+1)``,
``j = 1..M``, with equal weights ``pi/(M+1)`` per dimension.  For mode
indices ``k <= M`` the discrete sine sums reproduce the continuous inner
products exactly, and with ``M >= 2*k_max`` the projection of a cubic
nonlinearity is alias-free.
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import product

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field
from .exceptions import ResolutionTooLowError, SizeMismatchError


class DomainKind(str, Enum):
    INTERVAL = "interval"
    SQUARE = "square"


@dataclass(frozen=True)
class DomainSpec:
    kind: DomainKind
    quadrature_points_per_dim: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DomainKind(self.kind))
        q = self.quadrature_points_per_dim
        if q is not None and (int(q) != q or q < 1):
            raise ValueError(f"quadrature_points_per_dim must be a positive integer, got {q!r}")

    @property
    def dim(self):
        return 1 if self.kind is DomainKind.INTERVAL else 2


def _enumerate_modes(kind, n_modes):
    """First ``n_modes`` modes by eigenvalue, extended so the last group is complete."""
    if kind is DomainKind.INTERVAL:
        return [(k,) for k in range(1, n_modes + 1)]
    # all pairs with k1^2 + k2^2 <= K^2 + 1 are available once K >= sqrt(lam_max)
    K = 1
    while True:
        pairs = sorted(product(range(1, K + 1), repeat=2), key=lambda p: (p[0] ** 2 + p[1] ** 2, p))
        complete = [p for p in pairs if p[0] ** 2 + p[1] ** 2 <= K * K + 1]
        if len(complete) >= n_modes:
            cutoff = complete[n_modes - 1][0] ** 2 + complete[n_modes - 1][1] ** 2
            return [p for p in complete if p[0] ** 2 + p[1] ** 2 <= cutoff]
        K += 1


def _sine_matrix(indices, M):
    """``sqrt(2/pi) sin(k x_j)`` on the interior grid, shape (M, len(indices))."""
    x = np.arange(1, M + 1) * np.pi / (M + 1)
    return np.sqrt(2.0 / np.pi) * np.sin(np.outer(x, np.asarray(indices, dtype=float)))


@dataclass(frozen=True, eq=False)
class EigenBasis:
    """Eigenpairs of -Laplace with Dirichlet data plus quadrature machinery.

    ``synthesis`` maps coefficients to grid values (shape ``(n_points, n_modes)``);
    ``analysis`` is its quadrature adjoint so that ``analysis @ synthesis == I``.
    """

    domain: DomainSpec
    modes: tuple
    eigenvalues: np.ndarray
    groups: tuple
    grid: np.ndarray
    weights: np.ndarray
    synthesis: np.ndarray = field(repr=False)
    analysis: np.ndarray = field(repr=False)

    @property
    def size(self):
        return len(self.modes)

    @property
    def n_groups(self):
        return len(self.groups)

    @property
    def points_per_dim(self):
        return self.grid.shape[0] if self.domain.dim == 1 else int(round(np.sqrt(self.grid.shape[0])))

    def group_eigenvalue(self, group):
        """Eigenvalue of the 1-based eigenvalue group ``group``."""
        return float(self.eigenvalues[self.groups[self._check_group(group)][0]])

    def group_indices(self, group):
        return np.asarray(self.groups[self._check_group(group)])

    def group_of_eigenvalue(self, lam):
        """1-based group number holding eigenvalue ``lam``."""
        for g, idx in enumerate(self.groups, start=1):
            if self.eigenvalues[idx[0]] == lam:
                return g
        raise ValueError(f"eigenvalue {lam} is not in this basis")

    def multiplicity(self, group):
        return len(self.groups[self._check_group(group)])

    def _check_group(self, group):
        if int(group) != group or not 1 <= group <= len(self.groups):
            raise ValueError(f"group must be in 1..{len(self.groups)}, got {group!r}")
        return int(group) - 1

    def unit(self, position):
        """Coefficient vector of the ``position``-th (0-based) basis function."""
        e = np.zeros(self.size)
        e[position] = 1.0
        return e

    def check(self, a, name="state"):
        return check_field(a, self.size, name)


def build_basis(domain, n_modes):
    """Build the Dirichlet eigenbasis for ``domain`` holding at least ``n_modes`` modes.

    On the square, ties in the eigenvalue are ordered lexicographically in
    ``(k1, k2)`` and the basis is extended until the last eigenvalue group
    is complete, so the returned size may exceed ``n_modes``.

    Raises
    ------
    ResolutionTooLowError
        If ``domain.quadrature_points_per_dim`` is below twice the largest
        mode index per dimension.
    """
    if not isinstance(domain, DomainSpec):
        domain = DomainSpec(DomainKind(domain))
    if int(n_modes) != n_modes or n_modes < 1:
        raise ValueError(f"n_modes must be a positive integer, got {n_modes!r}")
    modes = _enumerate_modes(domain.kind, int(n_modes))
    k_max = max(max(m) for m in modes)
    M = domain.quadrature_points_per_dim
    if M is None:
        M = 2 * k_max
    if M < 2 * k_max:
        raise ResolutionTooLowError(
            f"{M} quadrature points per dimension; dealiasing floor is 2*{k_max} = {2 * k_max}")

    eigenvalues = np.array([sum(k * k for k in m) for m in modes], dtype=float)
    groups, start = [], 0
    for i in range(1, len(modes) + 1):
        if i == len(modes) or eigenvalues[i] != eigenvalues[start]:
            groups.append(tuple(range(start, i)))
            start = i

    h = np.pi / (M + 1)
    x = np.arange(1, M + 1) * h
    if domain.kind is DomainKind.INTERVAL:
        grid = x[:, None]
        weights = np.full(M, h)
        synthesis = _sine_matrix([m[0] for m in modes], M)
    else:
        X, Y = np.meshgrid(x, x, indexing="ij")
        grid = np.column_stack([X.ravel(), Y.ravel()])
        weights = np.full(M * M, h * h)
        S = _sine_matrix(np.arange(1, k_max + 1), M)
        synthesis = np.stack(
            [np.outer(S[:, k1 - 1], S[:, k2 - 1]).ravel() for k1, k2 in modes], axis=1)
    analysis = synthesis.T * weights
    for arr in (eigenvalues, grid, weights, synthesis, analysis):
        arr.setflags(write=False)
    return EigenBasis(domain, tuple(modes), eigenvalues, tuple(groups), grid, weights,
                      synthesis, analysis)


def synthesize(basis, a):
    """Grid values of the field with coefficients ``a``."""
    return basis.synthesis @ basis.check(a)


def analyze(basis, values):
    """Coefficients of grid values ``values`` (quadrature projection)."""
    values = check_field(values, basis.grid.shape[0], "grid values")
    return basis.analysis @ values


def inner_product(a, b):
    """L2 inner product of two coefficient vectors on the same basis."""
    a = check_field(a, name="a")
    b = check_field(b, a.shape[0], name="b")
    return float(a @ b)


def quadrature_inner_product(basis, u, v):
    """Quadrature inner product of two grid functions."""
    return float(np.sum(basis.weights * u * v))


class SineTransform(TransformerMixin, BaseEstimator):
    """Estimator wrapper: grid samples <-> Dirichlet eigen-coefficients.

    Rows of ``X`` are fields sampled on the basis quadrature grid.

    >>> tr = SineTransform(domain="interval", n_modes=4).fit()
    >>> tr.transform(tr.inverse_transform([[1.0, 0, 0, 0]])).round(12).tolist()
    [[1.0, 0.0, 0.0, 0.0]]
    """

    def __init__(self, domain="interval", n_modes=16, quadrature_points_per_dim=None):
        self.domain = domain
        self.n_modes = n_modes
        self.quadrature_points_per_dim = quadrature_points_per_dim

    def fit(self, X=None, y=None):
        self.basis_ = build_basis(DomainSpec(self.domain, self.quadrature_points_per_dim),
                                  self.n_modes)
        self.n_features_in_ = self.basis_.grid.shape[0]
        return self

    def transform(self, X):
        check_is_fitted(self, "basis_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.basis_.grid.shape[0]:
            raise SizeMismatchError(
                f"expected {self.basis_.grid.shape[0]} grid values per row, got {X.shape[1]}")
        return X @ self.basis_.analysis.T

    def inverse_transform(self, X):
        check_is_fitted(self, "basis_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.basis_.size:
            raise SizeMismatchError(f"expected {self.basis_.size} coefficients, got {X.shape[1]}")
        return X @ self.basis_.synthesis.T
