"""Catalog of gradient flows and their Galerkin realizations.

Every flow is written as ``a' = -L a + N(a, t)`` in coefficient space, with
``L`` the diagonal stiff part (``lambda_k`` or ``lambda_k**m``) and ``N``
the remaining terms.  The integrator treats ``L`` exactly.

The Lyapunov functional follows the convention that it *increases* along
orbits: ``d/dt V(u(t)) = ||u_t||^2``.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import erfc

from .basis import EigenBasis
from .exceptions import GalerkinOverflowError, UndefinedPotentialError

_SQRT_PI = np.sqrt(np.pi)


@dataclass(frozen=True)
class Nonlinearity:
    """A pointwise function with its derivative and antiderivative (``F(0) = 0``)."""

    f: Callable
    df: Callable
    F: Callable | None = None
    name: str = "custom"


def _flat_f(u):
    u = np.asarray(u, dtype=float)
    out = u.copy()
    big = np.abs(u) >= 1e-8
    ub = u[big]
    out[big] = ub - np.exp(-1.0 / (ub * ub))
    return out


def _flat_df(u):
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    big = np.abs(u) >= 1e-8
    ub = u[big]
    out[big] = 1.0 - 2.0 / ub**3 * np.exp(-1.0 / (ub * ub))
    return out


def _flat_F(u):
    # int_0^u exp(-1/s^2) ds = sign(u) (|u| e^{-1/u^2} - sqrt(pi) erfc(1/|u|))
    u = np.asarray(u, dtype=float)
    out = 0.5 * u * u
    big = np.abs(u) >= 1e-8
    ab = np.abs(u[big])
    out[big] -= np.sign(u[big]) * (ab * np.exp(-1.0 / (ab * ab)) - _SQRT_PI * erfc(1.0 / ab))
    return out


ALLEN_CAHN = Nonlinearity(lambda u: u - u**3, lambda u: 1.0 - 3.0 * u**2,
                          lambda u: 0.5 * u**2 - 0.25 * u**4, "allen_cahn")
CUBIC = Nonlinearity(lambda u: u**3, lambda u: 3.0 * u**2, lambda u: 0.25 * u**4, "cubic")
FLAT = Nonlinearity(_flat_f, _flat_df, _flat_F, "flat")
HEAT = Nonlinearity(lambda u: np.zeros_like(u), lambda u: np.zeros_like(u),
                    lambda u: np.zeros_like(u), "heat")
LINEAR = Nonlinearity(lambda u: u, lambda u: np.ones_like(u), lambda u: 0.5 * u**2, "linear")

NONLINEARITIES = {nl.name: nl for nl in (ALLEN_CAHN, CUBIC, FLAT, HEAT, LINEAR)}


class DecayProfile:
    """Time profile ``h(t)`` of a decaying perturbation.

    Use :meth:`power_law`, :meth:`custom` (callables) or :meth:`sampled`.
    """

    def __init__(self, h, dh, d2h=None, kind="custom", alpha=None):
        self._h, self._dh, self._d2h = h, dh, d2h
        self.kind = kind
        self.alpha = alpha

    @classmethod
    def power_law(cls, alpha):
        """``h(t) = (1 + t)**(-alpha)``."""
        alpha = float(alpha)
        if not alpha > 0:
            raise ValueError(f"power-law exponent must be positive, got {alpha}")
        return cls(lambda t: (1.0 + t) ** -alpha,
                   lambda t: -alpha * (1.0 + t) ** (-alpha - 1.0),
                   lambda t: alpha * (alpha + 1.0) * (1.0 + t) ** (-alpha - 2.0),
                   kind="power_law", alpha=alpha)

    @classmethod
    def custom(cls, h, dh, d2h=None):
        return cls(h, dh, d2h, kind="custom")

    @classmethod
    def sampled(cls, times, values):
        """Monotone cubic interpolation of positive samples."""
        interp = PchipInterpolator(np.asarray(times, float), np.asarray(values, float),
                                   extrapolate=True)
        return cls(interp, interp.derivative(), interp.derivative(2), kind="sampled")

    def __call__(self, t):
        return self._h(np.asarray(t, dtype=float) if np.ndim(t) else float(t))

    value = __call__

    def derivative(self, t):
        return self._dh(np.asarray(t, dtype=float) if np.ndim(t) else float(t))

    def second_derivative(self, t, eps=1e-5):
        if self._d2h is not None:
            return self._d2h(np.asarray(t, dtype=float) if np.ndim(t) else float(t))
        return (self.derivative(t + eps) - self.derivative(t - eps)) / (2 * eps)

    def __repr__(self):
        if self.kind == "power_law":
            return f"DecayProfile.power_law({self.alpha})"
        return f"DecayProfile({self.kind})"


def _checked(out):
    if not np.all(np.isfinite(out)):
        raise GalerkinOverflowError("non-finite value in right-hand side")
    return out


class Flow:
    """Base class; subclasses define the linear part and the nonlinear term."""

    basis: EigenBasis
    perturbed = False

    @property
    def linear_part(self):
        """Diagonal of ``L`` in ``a' = -L a + N(a, t)``."""
        return self.basis.eigenvalues

    def nonlinear(self, a, t=0.0):
        raise NotImplementedError

    def rhs(self, a, t=0.0):
        with np.errstate(over="ignore", invalid="ignore"):
            out = self.nonlinear(a, t) - self.linear_part * a
        return _checked(out)

    def lyapunov(self, a):
        raise NotImplementedError

    def lyapunov_difference(self, a, b):
        """``V(b) - V(a)``; overridden where a cancellation-free form exists."""
        return self.lyapunov(b) - self.lyapunov(a)

    def jacobian(self, a, t=0.0):
        raise NotImplementedError


def _local_jacobian(basis, df, u):
    return (basis.analysis * df(u)) @ basis.synthesis


@dataclass(frozen=True, eq=False)
class LocalFlow(Flow):
    """``u_t = Laplace u + f(u)`` with ``f`` applied pseudospectrally."""

    basis: EigenBasis
    nonlinearity: Nonlinearity

    def nonlinear(self, a, t=0.0):
        u = self.basis.synthesis @ a
        with np.errstate(over="ignore", invalid="ignore"):
            fu = self.nonlinearity.f(u)
        return _checked(self.basis.analysis @ fu)

    def lyapunov(self, a):
        if self.nonlinearity.F is None:
            raise UndefinedPotentialError(f"no antiderivative for {self.nonlinearity.name}")
        u = self.basis.synthesis @ a
        return float(-0.5 * np.sum(self.basis.eigenvalues * a * a)
                     + np.sum(self.basis.weights * self.nonlinearity.F(u)))

    def jacobian(self, a, t=0.0):
        u = self.basis.synthesis @ a
        J = _local_jacobian(self.basis, self.nonlinearity.df, u)
        J[np.diag_indices_from(J)] -= self.basis.eigenvalues
        return 0.5 * (J + J.T)


@dataclass(frozen=True, eq=False)
class NonlocalCubicFlow(Flow):
    """``u_t = -(-Laplace)^m u + lambda_l^m u - (int u^2) u``, solved mode by mode.

    ``l`` is the 1-based eigenvalue group number; the linear coefficient is
    ``lambda_l ** m``.
    """

    basis: EigenBasis
    l: int
    m: int = 1
    _lam_m: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.basis._check_group(self.l)
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"polyharmonic order must be an integer >= 1, got {self.m!r}")
        lam_m = self.basis.eigenvalues ** self.m
        lam_m.setflags(write=False)
        object.__setattr__(self, "_lam_m", lam_m)

    @property
    def linear_part(self):
        return self._lam_m

    @property
    def lambda_l(self):
        return self.basis.group_eigenvalue(self.l) ** self.m

    def nonlinear(self, a, t=0.0):
        with np.errstate(over="ignore", invalid="ignore"):
            return _checked((self.lambda_l - a @ a) * a)

    def rhs(self, a, t=0.0):
        with np.errstate(over="ignore", invalid="ignore"):
            return _checked((self.lambda_l - self._lam_m - a @ a) * a)

    def lyapunov(self, a):
        s = a @ a
        return float(-0.5 * np.sum(self._lam_m * a * a) + 0.5 * self.lambda_l * s - 0.25 * s * s)

    def lyapunov_difference(self, a, b):
        # squares differenced as (b - a)(b + a) to avoid cancellation
        d2 = (b - a) * (b + a)
        ds = np.sum(d2)
        return float(np.sum((0.5 * (self.lambda_l - self._lam_m)) * d2)
                     - 0.25 * ds * (a @ a + b @ b))

    def jacobian(self, a, t=0.0):
        J = -2.0 * np.outer(a, a)
        J[np.diag_indices_from(J)] += self.lambda_l - self._lam_m - a @ a
        return J


@dataclass(frozen=True, eq=False)
class NonlocalGeneralFlow(Flow):
    """``u_t = Laplace u + mu u - g'(int u^2) u``.

    The potential is ``-1/2 int|Du|^2 + mu/2 int u^2 - 1/2 g(int u^2)``, whose
    gradient is exactly the right-hand side.  ``d2g`` falls back to a central
    difference of ``dg`` when omitted.
    """

    basis: EigenBasis
    mu: float
    g: Callable
    dg: Callable
    d2g: Callable | None = None

    def nonlinear(self, a, t=0.0):
        with np.errstate(over="ignore", invalid="ignore"):
            return _checked((self.mu - self.dg(a @ a)) * a)

    def lyapunov(self, a):
        s = a @ a
        return float(-0.5 * np.sum(self.basis.eigenvalues * a * a) + 0.5 * self.mu * s
                     - 0.5 * self.g(s))

    def _d2g(self, s):
        if self.d2g is not None:
            return self.d2g(s)
        eps = 1e-6 * max(1.0, abs(s))
        return (self.dg(s + eps) - self.dg(s - eps)) / (2 * eps)

    def jacobian(self, a, t=0.0):
        s = a @ a
        J = -2.0 * self._d2g(s) * np.outer(a, a)
        J[np.diag_indices_from(J)] += self.mu - self.dg(s) - self.basis.eigenvalues
        return J


@dataclass(frozen=True, eq=False)
class PerturbedFlow(Flow):
    """``u_t = V'(u) + h(t) W'(u)`` with a pointwise ``W'``.

    ``V`` is defined for the base flow only; ``W`` (the antiderivative in
    ``forcing.F``) enters the modified energy identity.
    """

    base: Flow
    h: DecayProfile
    forcing: Nonlinearity
    perturbed = True

    def __post_init__(self):
        if getattr(self.base, "perturbed", False):
            raise ValueError("the base of a perturbed flow must itself be unperturbed")

    @property
    def basis(self):
        return self.base.basis

    @property
    def linear_part(self):
        return self.base.linear_part

    def forcing_term(self, a):
        b = self.basis
        return _checked(b.analysis @ self.forcing.f(b.synthesis @ a))

    def nonlinear(self, a, t=0.0):
        return self.base.nonlinear(a, t) + self.h(t) * self.forcing_term(a)

    def lyapunov(self, a):
        raise UndefinedPotentialError(
            "perturbed flows have no Lyapunov functional; use the base flow and W")

    def forcing_potential(self, a):
        """``W(u) = int W(u(x)) dx`` by quadrature."""
        if self.forcing.F is None:
            raise UndefinedPotentialError("forcing has no antiderivative W")
        b = self.basis
        return float(np.sum(b.weights * self.forcing.F(b.synthesis @ a)))

    def jacobian(self, a, t=0.0):
        u = self.basis.synthesis @ a
        JW = _local_jacobian(self.basis, self.forcing.df, u)
        return self.base.jacobian(a, t) + self.h(t) * 0.5 * (JW + JW.T)


# -- module-level API --------------------------------------------------------

def local(basis, nonlinearity):
    if isinstance(nonlinearity, str):
        nonlinearity = NONLINEARITIES[nonlinearity]
    return LocalFlow(basis, nonlinearity)


def nonlocal_cubic(basis, l, m=1):
    return NonlocalCubicFlow(basis, l, m)


def nonlocal_general(basis, mu, g, dg, d2g=None):
    return NonlocalGeneralFlow(basis, float(mu), g, dg, d2g)


def perturbed(base, h, forcing=LINEAR):
    if isinstance(forcing, str):
        forcing = NONLINEARITIES[forcing]
    return PerturbedFlow(base, h, forcing)


def rhs(flow, state, t=0.0):
    """Time derivative of the coefficients at ``state``.

    Raises :class:`GalerkinOverflowError` on non-finite intermediates.
    """
    return flow.rhs(flow.basis.check(state), t)


def lyapunov(flow, state):
    return flow.lyapunov(flow.basis.check(state))


def jacobian(flow, state, t=0.0):
    """Frechet derivative of :func:`rhs` in the coefficient basis (symmetric)."""
    return flow.jacobian(flow.basis.check(state), t)
