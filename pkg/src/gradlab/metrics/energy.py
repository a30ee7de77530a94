"""Energy identity, Lyapunov limit and Lojasiewicz exponent diagnostics."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import InsufficientDataError, UndefinedPotentialError
from ..integrate import tail_energies
from .rates import MIN_SAMPLES, VALUE_FLOOR, fit_rate

_FD_STEP = 1e-5


def _rhs_time_derivative(flow, a, t, ut):
    """``d/dt rhs(u(t), t)`` along the orbit, by a central difference in (a, t)."""
    s = _FD_STEP / max(1.0, float(np.linalg.norm(ut)))
    return (flow.rhs(a + s * ut, t + s) - flow.rhs(a - s * ut, t - s)) / (2 * s)


def _hermite(dt, f0, f1, df0, df1):
    """Endpoint-corrected trapezoid rule, exact for cubics."""
    return 0.5 * dt * (f0 + f1) + dt * dt / 12.0 * (df0 - df1)


def energy_identity_residual(flow, traj):
    """Largest defect of ``d/dt V(u) = ||u_t||^2`` over the recorded intervals.

    On each interval the increment of ``V`` divided by its length is compared
    with the interval mean of ``||u_t||^2``, integrated with the
    endpoint-corrected trapezoid rule.  For a perturbed flow the identity
    ``d/dt V + d/dt(h W) - h' W = ||u_t||^2`` is checked instead.

    Raises :class:`UndefinedPotentialError` if ``V`` (or ``W``) is unavailable.
    """
    times, states = traj.times, traj.states
    if len(times) < 2:
        return 0.0
    perturbed = getattr(flow, "perturbed", False)
    base = flow.base if perturbed else flow
    base.lyapunov(states[0])  # raises when V is undefined
    if perturbed:
        flow.forcing_potential(states[0])

    ut = [flow.rhs(a, t) for t, a in zip(times, states)]
    f = np.array([u @ u for u in ut])
    df = np.array([2.0 * (u @ _rhs_time_derivative(flow, a, t, u))
                   for t, a, u in zip(times, states, ut)])
    if perturbed:
        W = np.array([flow.forcing_potential(a) for a in states])
        h, dh, d2h = flow.h(times), flow.h.derivative(times), flow.h.second_derivative(times)
        dW = np.array([flow.forcing_term(a) @ u for a, u in zip(states, ut)])
        g, dg = dh * W, d2h * W + dh * dW

    worst = 0.0
    for i in range(len(times) - 1):
        dt = times[i + 1] - times[i]
        dE = base.lyapunov_difference(states[i], states[i + 1])
        if perturbed:
            dE += h[i + 1] * W[i + 1] - h[i] * W[i] - _hermite(dt, g[i], g[i + 1], dg[i], dg[i + 1])
        q = _hermite(dt, f[i], f[i + 1], df[i], df[i + 1])
        worst = max(worst, abs(dE - q) / dt)
    return float(worst)


def tail_extrapolation(traj, fit_samples=None):
    """Estimated ``int_{t_last}^inf ||u_t||^2`` from a decay fit of ``||u_t||^2``.

    Returns 0 when there are too few samples above the floor to fit or the
    fitted law is not integrable.
    """
    f = traj.ut_norms ** 2
    times = traj.times
    if fit_samples is not None:
        times, f = times[-fit_samples:], f[-fit_samples:]
    # ||u_t|| is trusted down to the value floor, so its square down to floor**2
    floor = VALUE_FLOOR**2
    n_above = int(np.count_nonzero(f > floor))
    if n_above < MIN_SAMPLES:
        return 0.0
    try:
        # a short trailing window tracks the local decay law at the end of the run
        fit = fit_rate(times, f, floor=floor, tail_fraction=max(0.1, MIN_SAMPLES / n_above))
    except InsufficientDataError:
        return 0.0
    tail = fit.tail_integral(float(traj.times[-1]))
    return float(tail) if np.isfinite(tail) else 0.0


def lyapunov_limit(traj):
    """Estimate ``B = lim V(u(t))`` as the final value plus the extrapolated tail energy."""
    if np.isnan(traj.lyapunov_values[-1]):
        raise UndefinedPotentialError("trajectory carries no Lyapunov values")
    return float(traj.lyapunov_values[-1] + tail_extrapolation(traj))


def lyapunov_gaps(traj):
    """``B - V(u(t_i))`` at every sample, via recorded tail energies (no cancellation)."""
    return tail_energies(traj) + tail_extrapolation(traj)


@dataclass(frozen=True)
class LojasiewiczEstimate:
    theta: float
    slope: float
    pairs_used: int
    window: tuple


def lojasiewicz_estimate(flow, traj, window=None, min_pairs=10, floor=VALUE_FLOOR):
    """Empirical Lojasiewicz exponent from ``||V'(u)|| ~ |V(u) - B|^(1 - theta)``.

    Regresses ``log ||u_t||`` on ``log |V - B|``; ``theta = 1 - slope`` clipped
    to ``[0, 1/2]``.  ``window`` selects a time range; by default the trailing
    half of the samples where both quantities exceed ``floor`` is used.
    ``flow`` is accepted for symmetry with the other diagnostics and may be
    ``None``.
    """
    gaps = lyapunov_gaps(traj)
    g = traj.ut_norms
    t = traj.times
    keep = (gaps > floor) & (g > floor) & np.isfinite(g)
    if window is not None:
        keep &= (t >= window[0]) & (t <= window[1])
    idx = np.flatnonzero(keep)
    if window is None:
        idx = idx[len(idx) // 2:]
    if len(idx) < min_pairs:
        raise InsufficientDataError(f"{len(idx)} usable (gap, ||u_t||) pairs; need {min_pairs}")
    slope = float(np.polyfit(np.log(gaps[idx]), np.log(g[idx]), 1)[0])
    theta = float(np.clip(1.0 - slope, 0.0, 0.5))
    return LojasiewiczEstimate(theta, slope, len(idx), (float(t[idx[0]]), float(t[idx[-1]])))


def lojasiewicz_from_pairs(gaps, norms):
    """Exponent from explicit ``(|V - B|, ||V'||)`` pairs."""
    gaps, norms = np.asarray(gaps, float), np.asarray(norms, float)
    if len(gaps) < 10:
        raise InsufficientDataError("need at least 10 pairs")
    slope = float(np.polyfit(np.log(gaps), np.log(norms), 1)[0])
    return LojasiewiczEstimate(float(np.clip(1.0 - slope, 0.0, 0.5)), slope, len(gaps),
                               (np.nan, np.nan))
