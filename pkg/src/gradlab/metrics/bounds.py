"""Displacement bounds from tail energies, perturbation-class checks and omega-limits."""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from ..exceptions import HypothesisFailedError
from ..integrate import Status, tail_energies
from .rates import fit_rate

HYPOTHESIS_RTOL = 1e-3
MAX_PAIR_SAMPLES = 2000


def _thin(traj, max_samples):
    n = len(traj.times)
    if n <= max_samples:
        return traj.times, traj.states
    idx = np.unique(np.linspace(0, n - 1, max_samples).round().astype(int))
    return traj.times[idx], traj.states[idx]


def _max_forward_displacement(states, chunk=64):
    """``max_{j >= i} ||u_i - u_j||`` for every ``i``."""
    n = len(states)
    out = np.zeros(n)
    for s in range(0, n, chunk):
        block = states[s:s + chunk]
        d = np.linalg.norm(block[:, None, :] - states[None, :, :], axis=2)
        rows = np.arange(s, s + len(block))
        d[np.arange(n)[None, :] < rows[:, None]] = 0.0
        out[s:s + len(block)] = d.max(axis=1)
    return out


def zelenyak_constant(C8, beta):
    """Partition-lemma constant for tail-energy rate ``beta``."""
    return float(np.sqrt(C8) * (1.0 / (1.0 - np.exp(-beta / 2.0)) + 1.0))


@dataclass(frozen=True)
class ZelenyakReport:
    holds: bool
    C9: float
    worst_ratio: float
    C8: float
    beta: float


def zelenyak_bound_check(traj, C8, beta, max_samples=MAX_PAIR_SAMPLES):
    """Check ``||u(t) - u(tau)|| <= C9 exp(-beta t / 2)`` over recorded pairs ``t <= tau``.

    The premise ``int_t^inf ||u_t||^2 <= C8 exp(-beta t)`` is first verified
    on the sample grid (relative slack 1e-3 for the trapezoid tail).  The
    trajectory is thinned uniformly to at most ``max_samples`` samples for
    the pairwise test.

    Raises :class:`HypothesisFailedError` when the premise fails.
    """
    if traj.status is Status.BLOW_UP:
        raise HypothesisFailedError("trajectory blew up")
    tails = tail_energies(traj)
    bound = C8 * np.exp(-beta * traj.times)
    if np.any(tails > bound * (1 + HYPOTHESIS_RTOL)):
        i = int(np.argmax(tails - bound))
        raise HypothesisFailedError(
            f"tail energy {tails[i]:.3e} exceeds C8*exp(-beta t)={bound[i]:.3e} at t={traj.times[i]}")
    C9 = zelenyak_constant(C8, beta)
    times, states = _thin(traj, max_samples)
    disp = _max_forward_displacement(states)
    rhs = C9 * np.exp(-beta * times / 2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(disp > 0, disp / rhs, 0.0)
    worst = float(np.max(ratios))
    return ZelenyakReport(worst <= 1.0, C9, worst, float(C8), float(beta))


def fit_tail_energy_exponential(traj):
    """Fit ``tail(t) ~ C8 exp(-beta t)`` and return ``(C8, beta)``.

    ``beta`` comes from an exponential fit of the recorded tail energies;
    ``C8`` is the smallest constant making the bound hold on the grid.
    """
    tails = tail_energies(traj)
    fit = fit_rate(traj.times, tails, models=("exponential",))
    beta = fit.rate
    C8 = float(np.max(tails * np.exp(beta * traj.times)))
    return C8, beta


@dataclass(frozen=True)
class PerturbedBoundReport:
    holds: bool
    worst_ratio: float
    h_scale: float
    t_min: float


def sqrt_h_tail(h, t):
    """``int_{t-1}^inf sqrt(h(s)) ds``."""
    if h.kind == "power_law":
        a = h.alpha
        if a <= 2:
            return np.inf
        # int_{t-1}^inf (1 + s)^(-a/2) ds = 2/(a-2) * t^(-(a-2)/2)
        return 2.0 / (a - 2.0) * t ** (-(a - 2.0) / 2.0)
    val, _ = quad(lambda s: np.sqrt(h(s)), t - 1.0, np.inf, limit=200)
    return val


def perturbed_bound_check(traj, h, t_min=2.0, max_samples=MAX_PAIR_SAMPLES):
    """Check ``||u(t) - u(tau)|| <= sqrt(c) int_{t-1}^inf sqrt(h)`` for ``t_min <= t <= tau``.

    ``c`` is the smallest constant with ``tail_energy(t) <= c h(t)`` on the
    grid and is reported as ``h_scale``.
    """
    if traj.status is Status.BLOW_UP:
        raise HypothesisFailedError("trajectory blew up")
    tails = tail_energies(traj)
    c = float(np.max(tails / h(traj.times)))
    times, states = _thin(traj, max_samples)
    sel = times >= t_min
    if not np.any(sel):
        raise ValueError(f"no samples with t >= {t_min}")
    first = int(np.argmax(sel))
    disp = _max_forward_displacement(states[first:])
    majorant = np.sqrt(c) * np.array([sqrt_h_tail(h, t) for t in times[first:]])
    if not np.all(np.isfinite(majorant)):
        raise HypothesisFailedError("sqrt(h) is not integrable")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(disp > 0, disp / majorant, 0.0)
    worst = float(np.max(ratios)) if len(ratios) else 0.0
    return PerturbedBoundReport(worst <= 1.0, worst, c, float(t_min))


@dataclass(frozen=True)
class HClassReport:
    positive_decreasing: bool
    vanishes: bool
    sqrt_integrable: bool
    slow_decay: bool
    sqrt_integral: float
    log_derivative_at_probe: float
    details: dict = field(default_factory=dict)

    @property
    def all_true(self):
        return self.positive_decreasing and self.vanishes and self.sqrt_integrable and self.slow_decay


def _sqrt_integral_to(h, T):
    edges = np.concatenate([[0.0], np.geomspace(1.0, T, int(np.ceil(np.log10(T))) + 1)])
    edges = np.unique(edges[edges <= T])
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += quad(lambda s: np.sqrt(h(s)), a, b, limit=200, epsabs=0, epsrel=1e-12)[0]
    return total


def _tail_beyond(h, T):
    """Power-law extrapolation of ``int_T^inf sqrt(h)`` from the local exponent at ``T``."""
    hT = float(h(T))
    if hT == 0.0:
        return 0.0, np.inf
    p = -T * float(h.derivative(T)) / (2.0 * hT)
    if p <= 1.0:
        return np.inf, p
    return np.sqrt(hT) * T / (p - 1.0), p


def h_class_check(h, T_probe=1e6, n_grid=400):
    """Numerical verdicts on the admissibility conditions for a decay profile.

    * ``positive_decreasing``: ``h > 0`` and ``h' < 0`` on a log-spaced grid
      over ``[0, T_probe]`` (points where ``h`` underflows are skipped).
    * ``vanishes``: ``h(T_probe) <= 1e-3 h(0)``.
    * ``sqrt_integrable``: the quadrature of ``sqrt(h)`` plus a power-law tail
      estimate is finite and changes by less than 1e-6 (relative) between
      ``T_probe / 10`` and ``T_probe``.
    * ``slow_decay``: ``|h'/h| < 0.01`` at ``T_probe`` (or at the last grid
      point where ``h`` is representable).
    """
    grid = np.concatenate([[0.0], np.geomspace(1e-3, T_probe, n_grid)])
    hv = np.array([float(h(t)) for t in grid])
    dh = np.array([float(h.derivative(t)) for t in grid])
    live = ~((hv == 0.0) & (dh == 0.0))
    positive_decreasing = bool(np.any(live) and np.all(hv[live] > 0) and np.all(dh[live] < 0))
    vanishes = bool(hv[-1] <= 1e-3 * hv[0])

    totals = []
    for T in (T_probe / 10.0, T_probe):
        tail, p = _tail_beyond(h, T)
        totals.append(_sqrt_integral_to(h, T) + tail)
    sqrt_integrable = bool(np.isfinite(totals[1])
                           and abs(totals[1] - totals[0]) <= 1e-6 * abs(totals[1]))

    last = int(np.flatnonzero(hv > 0)[-1]) if np.any(hv > 0) else 0
    ratio = dh[last] / hv[last] if hv[last] > 0 else -np.inf
    slow_decay = bool(ratio < 0 and abs(ratio) < 0.01)
    return HClassReport(positive_decreasing, vanishes, sqrt_integrable, slow_decay,
                        float(totals[1]), float(ratio),
                        {"T_probe": T_probe, "integral_at_T_over_10": float(totals[0])})


def omega_limit_single(traj, candidate, tol, slack=1e-12):
    """True iff ``||u(t) - candidate||`` ends below ``tol``, non-increasing, and finally < tol/10.

    ``slack`` absorbs round-off in the monotonicity test.
    """
    if traj.status is Status.BLOW_UP:
        raise ValueError("omega-limit is undefined for a blown-up trajectory")
    candidate = np.asarray(candidate, dtype=float)
    d = np.linalg.norm(traj.states - candidate[None, :], axis=1)
    above = np.flatnonzero(d >= tol)
    start = above[-1] + 1 if len(above) else 0
    if start >= len(d):
        return False
    tail = d[start:]
    monotone = bool(np.all(np.diff(tail) <= slack * (1.0 + np.linalg.norm(candidate))))
    return monotone and bool(tail[-1] < tol / 10.0)
