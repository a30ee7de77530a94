"""Scalar centre-manifold ODEs with slower-than-algebraic decay.

``flat_exp``:     a' = -rho2 exp(-1 / (4 rho1^2 a^2))
``nonlocal_log``: a' = -g'(a^2) a,  g(s) = s^{3/2} exp(-1/s)

Both are one-dimensional gradient flows ``a' = V'(a)``; the returned
trajectories carry ``V`` and ``|a'|`` so the energy diagnostics apply.
"""

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc

from ..exceptions import GradlabError
from ..integrate import Status, Trajectory

POINTS_PER_DECADE = 64


class StepFailure(GradlabError, RuntimeError):
    pass


def _flat_exp(rho1, rho2):
    c = 1.0 / (4.0 * rho1**2)

    def F(a):
        return -rho2 * np.exp(-c / (a * a))

    def dF(a):
        return F(a) * 2.0 * c / a**3

    def V(a):
        # -rho2 * int_0^a exp(-c/s^2) ds
        return -rho2 * (a * np.exp(-c / (a * a)) - np.sqrt(np.pi * c) * erfc(np.sqrt(c) / a))

    return F, dF, V


def _g(s):
    return s**1.5 * np.exp(-1.0 / s)


def _dg(s):
    return np.exp(-1.0 / s) * (1.5 * np.sqrt(s) + 1.0 / np.sqrt(s))


def _d2g(s):
    return np.exp(-1.0 / s) * ((1.5 * np.sqrt(s) + 1.0 / np.sqrt(s)) / s**2
                               + 0.75 / np.sqrt(s) - 0.5 * s**-1.5)


def _nonlocal_log():
    def F(a):
        return -_dg(a * a) * a

    def dF(a):
        s = a * a
        return -(2.0 * s * _d2g(s) + _dg(s))

    def V(a):
        return -0.5 * _g(a * a)

    return F, dF, V


def slow_flow_time_grid(t_end, points_per_decade=POINTS_PER_DECADE):
    """Uniform on [0, 1], then geometric with ``points_per_decade`` per decade."""
    head = np.linspace(0.0, 1.0, points_per_decade + 1)
    if t_end <= 1.0:
        return head[head <= t_end] if t_end in head else np.append(head[head < t_end], t_end)
    n = int(np.ceil(points_per_decade * np.log10(t_end)))
    return np.concatenate([head, np.geomspace(1.0, t_end, n + 1)[1:]])


def _midpoint_step(F, dF, a, dt):
    x = a + dt * F(a)
    if x <= 0:
        x = 0.5 * a
    for _ in range(50):
        m = 0.5 * (a + x)
        G = x - a - dt * F(m)
        dG = 1.0 - 0.5 * dt * dF(m)
        dx = G / dG
        x -= dx
        if x <= 0 or not np.isfinite(x):
            break
        if abs(dx) <= 1e-15 * abs(x):
            return x
    # bracketed fallback: the update lies in (0, a) since F < 0
    G = lambda y: y - a - dt * F(0.5 * (a + y))
    lo = np.finfo(float).tiny
    if G(lo) * G(a) > 0:
        raise StepFailure(f"implicit midpoint step failed from a={a} with dt={dt}")
    return brentq(G, lo, a, xtol=1e-300, rtol=4 * np.finfo(float).eps)


def scalar_slow_flow(kind, rho1=1.0, rho2=1.0, a0=0.5, t_end=1e6,
                     points_per_decade=POINTS_PER_DECADE):
    """Integrate a scalar slow-decay flow by implicit midpoint on a stretched grid.

    Raises :class:`StepFailure` if the iterate stops being positive.
    """
    if a0 <= 0:
        raise ValueError("a0 must be positive")
    if kind == "flat_exp":
        F, dF, V = _flat_exp(float(rho1), float(rho2))
    elif kind == "nonlocal_log":
        F, dF, V = _nonlocal_log()
    else:
        raise ValueError(f"unknown slow flow {kind!r}; expected 'flat_exp' or 'nonlocal_log'")
    times = slow_flow_time_grid(float(t_end), points_per_decade)
    a = np.empty_like(times)
    a[0] = a0
    for i in range(1, len(times)):
        a[i] = _midpoint_step(F, dF, a[i - 1], times[i] - times[i - 1])
        if not a[i] > 0:
            raise StepFailure(f"non-positive iterate at t={times[i]}")
    return Trajectory.from_arrays(times, a, V(a), np.abs(F(a)), Status.MAX_TIME)
