"""Integrating-factor RK4 time stepping for Galerkin systems."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._validation import check_positive
from .exceptions import GalerkinOverflowError, UndefinedPotentialError


class Status(str, Enum):
    CONVERGED = "converged"
    MAX_TIME = "max_time"
    BLOW_UP = "blow_up"


@dataclass(frozen=True)
class IntegratorParams:
    dt: float = 1e-3
    t_end: float = 10.0
    record_stride: int = 1
    stationary_tol: float = 0.0
    blowup_threshold: float = 1e6

    def __post_init__(self):
        check_positive(self.dt, "dt")
        check_positive(self.t_end, "t_end")
        if self.dt >= 1:
            raise ValueError(f"dt must be < 1, got {self.dt}")
        if int(self.record_stride) != self.record_stride or self.record_stride < 1:
            raise ValueError(f"record_stride must be a positive integer, got {self.record_stride}")
        if self.stationary_tol < 0:
            raise ValueError("stationary_tol must be non-negative")
        check_positive(self.blowup_threshold, "blowup_threshold")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded samples of an orbit.

    ``states`` has shape ``(n_samples, n_modes)``; ``lyapunov_values`` holds
    the (base-flow) Lyapunov functional and ``ut_norms`` the L2 norm of the
    right-hand side at each sample.
    """

    times: np.ndarray
    states: np.ndarray
    lyapunov_values: np.ndarray
    ut_norms: np.ndarray
    status: Status

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.states) == len(self.lyapunov_values) == len(self.ut_norms) == n):
            raise ValueError("trajectory arrays must have equal length")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        for arr in (self.times, self.states, self.lyapunov_values, self.ut_norms):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def final_time(self):
        return float(self.times[-1])

    @classmethod
    def from_arrays(cls, times, states, lyapunov_values=None, ut_norms=None,
                    status=Status.MAX_TIME):
        """Build a trajectory from raw arrays; missing columns become NaN."""
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        nan = np.full(len(times), np.nan)
        V = nan.copy() if lyapunov_values is None else np.asarray(lyapunov_values, dtype=float)
        g = nan.copy() if ut_norms is None else np.asarray(ut_norms, dtype=float)
        return cls(times.copy(), states.copy(), V.copy(), g.copy(), Status(status))


def _potential(flow):
    base = getattr(flow, "base", flow)
    try:
        base.lyapunov(np.zeros(base.basis.size))
    except UndefinedPotentialError:
        return None
    return base.lyapunov


class _LawsonRK4:
    """Classical RK4 on ``b = exp(L t) a``; exact on the linear part."""

    def __init__(self, flow, dt):
        self.flow = flow
        self.set_dt(dt)

    def set_dt(self, dt):
        L = self.flow.linear_part
        self.dt = dt
        self.E = np.exp(-L * dt)
        self.E2 = np.exp(-L * dt / 2)

    def step(self, a, t):
        N, dt, E, E2 = self.flow.nonlinear, self.dt, self.E, self.E2
        with np.errstate(over="raise", invalid="raise"):
            try:
                k1 = N(a, t)
                k2 = N(E2 * (a + 0.5 * dt * k1), t + 0.5 * dt)
                k3 = N(E2 * a + 0.5 * dt * k2, t + 0.5 * dt)
                k4 = N(E * a + dt * (E2 * k3), t + dt)
                out = E * a + dt / 6.0 * (E * k1 + 2.0 * E2 * (k2 + k3) + k4)
            except FloatingPointError as exc:
                raise GalerkinOverflowError(str(exc)) from exc
        if not np.all(np.isfinite(out)):
            raise GalerkinOverflowError("non-finite state after step")
        return out


def integrate(flow, init, params=IntegratorParams()):
    """Integrate ``flow`` from ``init`` with fixed-step integrating-factor RK4.

    Stops with ``status='converged'`` once a recorded sample has
    ``||u_t|| < stationary_tol``, with ``'blow_up'`` once the coefficient
    norm reaches ``blowup_threshold``, otherwise at ``t_end``.  A step that
    overflows is retried with successively halved sub-steps so the last
    recorded state is finite and past the threshold.
    """
    a = flow.basis.check(init, "init").copy()
    V = _potential(flow)
    stepper = _LawsonRK4(flow, params.dt)
    n_steps = int(np.ceil(params.t_end / params.dt - 1e-9))

    times, states = [], []

    def record(t, state):
        times.append(t)
        states.append(state.copy())

    record(0.0, a)
    t, status = 0.0, Status.MAX_TIME
    tol = params.stationary_tol
    for i in range(1, n_steps + 1):
        h = min(params.dt, params.t_end - t)
        if h != stepper.dt:
            stepper.set_dt(h)
        try:
            a_new = stepper.step(a, t)
            t_new = t + h
        except GalerkinOverflowError:
            a_new, t_new = _bisect_blowup(flow, a, t, h, params.blowup_threshold)
            record(t_new, a_new)
            status = Status.BLOW_UP
            break
        a, t = a_new, t_new
        if np.linalg.norm(a) >= params.blowup_threshold:
            record(t, a)
            status = Status.BLOW_UP
            break
        if i % params.record_stride == 0 or i == n_steps:
            record(t, a)
            if tol > 0 and np.linalg.norm(flow.rhs(a, t)) < tol:
                status = Status.CONVERGED
                break

    times = np.asarray(times)
    states = np.asarray(states)
    ut = np.empty(len(times))
    Vs = np.full(len(times), np.nan)
    for k, (s, x) in enumerate(zip(times, states)):
        try:
            ut[k] = np.linalg.norm(flow.rhs(x, s))
        except GalerkinOverflowError:
            ut[k] = np.inf
        if V is not None:
            with np.errstate(over="ignore", invalid="ignore"):
                Vs[k] = V(x)
    return Trajectory(times, states, Vs, ut, status)


def _bisect_blowup(flow, a, t, h, threshold, max_halvings=60):
    """Advance with halved sub-steps until the norm passes ``threshold``."""
    stepper = _LawsonRK4(flow, h / 2)
    for _ in range(max_halvings):
        try:
            a_try = stepper.step(a, t)
        except GalerkinOverflowError:
            stepper.set_dt(stepper.dt / 2)
            continue
        a, t = a_try, t + stepper.dt
        if np.linalg.norm(a) >= threshold:
            return a, t
    return a, t


def tail_energy(traj, t):
    """Trapezoid quadrature of ``||u_t||^2`` over ``[t, t_last]``.

    Raises ``ValueError`` if ``t`` lies outside the recorded range or the
    trajectory blew up.
    """
    if traj.status is Status.BLOW_UP:
        raise ValueError("tail energy is undefined for a blown-up trajectory")
    times = traj.times
    if not times[0] <= t <= times[-1]:
        raise ValueError(f"t={t} outside recorded range [{times[0]}, {times[-1]}]")
    return float(tail_energies(traj, np.array([t]))[0])


def tail_energies(traj, at=None):
    """Vectorized :func:`tail_energy`; defaults to every recorded time."""
    times = traj.times
    if len(times) == 1:
        return np.zeros(len(times) if at is None else np.size(at))
    f = traj.ut_norms ** 2
    seg = 0.5 * np.diff(times) * (f[1:] + f[:-1])
    cum_from_end = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    if at is None:
        return cum_from_end
    at = np.asarray(at, dtype=float)
    i = np.clip(np.searchsorted(times, at, side="right") - 1, 0, len(times) - 2)
    t0, t1 = times[i], times[i + 1]
    f_at = f[i] + (f[i + 1] - f[i]) * (at - t0) / (t1 - t0)
    partial = 0.5 * (t1 - at) * (f_at + f[i + 1])
    return partial + cum_from_end[i + 1]
