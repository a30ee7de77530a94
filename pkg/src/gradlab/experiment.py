"""Config-driven experiment pipeline: build basis, solve, analyze, report.

A config is a JSON object::

    {
      "id": "prop41-iii",
      "domain": "interval", "n_modes": 16,
      "flow": {"kind": "nonlocal_cubic", "l": 2, "m": 1},
      "initial": [[1, 0.1]],
      "solver": "integrate",
      "integrator": {"dt": 1e-3, "t_end": 20, "stationary_tol": 1e-10},
      "analyses": [{"type": "lojasiewicz", "expected": 0.5, "tol": 0.05}],
      "seed": 0
    }

``initial`` lists ``(mode, value)`` pairs; ``mode`` is a 1-based basis
position or, on the square, a ``[k1, k2]`` pair.  Flow kinds are
``local``, ``nonlocal_cubic``, ``nonlocal_general``, ``perturbed`` and
``scalar`` (the slow-decay ODEs, which need no basis).  Group selectors
``l``/``j`` are 1-based group numbers; ``l_eigenvalue``/``j_eigenvalue``
select by eigenvalue instead.
"""

import copy
import json
import logging
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import flows as fl
from .basis import DomainSpec, build_basis
from .exceptions import ConfigError, GradlabError
from .integrate import IntegratorParams, Status, Trajectory, integrate
from .metrics import (
    energy_identity_residual,
    fit_rate,
    fit_tail_energy_exponential,
    h_class_check,
    lojasiewicz_estimate,
    omega_limit_single,
    perturbed_bound_check,
    scalar_slow_flow,
    zelenyak_bound_check,
)
from .nonlocal_model import classify_rate, closed_form, closed_form_path, hr_check

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

FLOW_KINDS = ("local", "nonlocal_cubic", "nonlocal_general", "perturbed", "scalar")
SOLVERS = ("integrate", "closed_form", "none")

G_FUNCTIONS = {
    # g(s) = s^{3/2} exp(-1/s)
    "slow_log": (lambda s: s**1.5 * math.exp(-1.0 / s) if s > 0 else 0.0,
                 lambda s: math.exp(-1.0 / s) * (1.5 * math.sqrt(s) + 1.0 / math.sqrt(s))
                 if s > 0 else 0.0),
    # g(s) = s^2 / 2 reproduces the cubic non-local model
    "quadratic": (lambda s: 0.5 * s * s, lambda s: s),
}


@dataclass
class Assertion:
    name: str
    measured: object
    expected: object
    tolerance: object
    passed: bool

    def to_dict(self):
        return {"name": self.name, "measured": _jsonable(self.measured),
                "expected": _jsonable(self.expected), "tolerance": _jsonable(self.tolerance),
                "passed": bool(self.passed)}


@dataclass
class Report:
    experiment_id: str
    config: dict
    results: dict = field(default_factory=dict)
    assertions: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    context: object = field(default=None, repr=False, compare=False)

    @property
    def passed(self):
        return all(a.passed for a in self.assertions)

    def check(self, name, measured, expected, tolerance, passed):
        self.assertions.append(Assertion(name, measured, expected, tolerance, bool(passed)))

    def to_dict(self, include_timings=True):
        out = {
            "schema_version": SCHEMA_VERSION,
            "experiment_id": self.experiment_id,
            "passed": self.passed,
            "config": _jsonable(self.config),
            "results": _jsonable(self.results),
            "assertions": [a.to_dict() for a in self.assertions],
        }
        if include_timings:
            out["timings"] = _jsonable(self.timings)
        return out


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


# -- config parsing ------------------------------------------------------------

def load_config(path):
    """Read a JSON config file; parse errors carry the line and column."""
    text = Path(path).read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be an object")
    validate_config(cfg)
    return cfg


def _require(cfg, key, where="config"):
    if key not in cfg:
        raise ConfigError(f"{where}: missing field '{key}'")
    return cfg[key]


def validate_config(cfg):
    _require(cfg, "id")
    flow = _require(cfg, "flow")
    _validate_flow(flow, "flow")
    solver = cfg.get("solver", "integrate")
    if solver not in SOLVERS:
        raise ConfigError(f"field 'solver': unknown solver {solver!r}; expected one of {SOLVERS}")
    if flow["kind"] != "scalar":
        if cfg.get("domain", "interval") not in ("interval", "square"):
            raise ConfigError(f"field 'domain': unknown domain {cfg.get('domain')!r}")
        n = cfg.get("n_modes", 16)
        if not isinstance(n, int) or n < 1:
            raise ConfigError(f"field 'n_modes': must be a positive integer, got {n!r}")
    for i, an in enumerate(cfg.get("analyses", [])):
        if "type" not in an:
            raise ConfigError(f"field 'analyses[{i}]': missing 'type'")
        if an["type"] not in ANALYSES:
            raise ConfigError(f"field 'analyses[{i}].type': unknown analysis {an['type']!r}")
    return cfg


def _validate_flow(flow, where):
    if not isinstance(flow, dict):
        raise ConfigError(f"field '{where}': must be an object")
    kind = flow.get("kind")
    if kind not in FLOW_KINDS:
        raise ConfigError(f"field '{where}.kind': unknown flow {kind!r}; expected one of {FLOW_KINDS}")
    if kind == "local" and flow.get("nonlinearity") not in fl.NONLINEARITIES:
        raise ConfigError(f"field '{where}.nonlinearity': unknown nonlinearity "
                          f"{flow.get('nonlinearity')!r}; expected one of {sorted(fl.NONLINEARITIES)}")
    if kind == "nonlocal_general" and flow.get("g") not in G_FUNCTIONS:
        raise ConfigError(f"field '{where}.g': unknown g {flow.get('g')!r}")
    if kind == "perturbed":
        _validate_flow(_require(flow, "base", where), f"{where}.base")
        if flow["base"]["kind"] in ("perturbed", "scalar"):
            raise ConfigError(f"field '{where}.base.kind': cannot perturb a {flow['base']['kind']} flow")
        if flow.get("forcing", "linear") not in fl.NONLINEARITIES:
            raise ConfigError(f"field '{where}.forcing': unknown forcing {flow.get('forcing')!r}")
        _require(flow, "h", where)
    if kind == "scalar" and flow.get("name") not in ("flat_exp", "nonlocal_log"):
        raise ConfigError(f"field '{where}.name': unknown scalar flow {flow.get('name')!r}")


def _group(basis, spec, key):
    if f"{key}_eigenvalue" in spec:
        try:
            return basis.group_of_eigenvalue(spec[f"{key}_eigenvalue"])
        except ValueError as exc:
            raise ConfigError(f"field '{key}_eigenvalue': {exc}") from exc
    g = spec.get(key)
    if not isinstance(g, int) or not 1 <= g <= basis.n_groups:
        raise ConfigError(f"field '{key}': group must be an integer in 1..{basis.n_groups}, got {g!r}")
    return g


def make_decay_profile(spec):
    if isinstance(spec, dict) and "power_law" in spec:
        return fl.DecayProfile.power_law(spec["power_law"])
    if isinstance(spec, dict) and "times" in spec and "values" in spec:
        return fl.DecayProfile.sampled(spec["times"], spec["values"])
    raise ConfigError(f"field 'h': expected {{'power_law': alpha}} or sampled times/values, got {spec!r}")


def make_flow(basis, spec):
    kind = spec["kind"]
    if kind == "local":
        return fl.local(basis, spec["nonlinearity"])
    if kind == "nonlocal_cubic":
        return fl.nonlocal_cubic(basis, _group(basis, spec, "l"), spec.get("m", 1))
    if kind == "nonlocal_general":
        g, dg = G_FUNCTIONS[spec["g"]]
        mu = spec.get("mu", float(basis.eigenvalues[0]))
        return fl.nonlocal_general(basis, mu, np.vectorize(g), dg)
    if kind == "perturbed":
        return fl.perturbed(make_flow(basis, spec["base"]), make_decay_profile(spec["h"]),
                            spec.get("forcing", "linear"))
    raise ConfigError(f"flow kind {kind!r} has no Galerkin realization")


def make_initial(basis, pairs):
    a = np.zeros(basis.size)
    if isinstance(pairs, dict):
        pairs = pairs.get("pairs", [])
    for i, item in enumerate(pairs):
        try:
            mode, value = item
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"field 'initial[{i}]': expected [mode, value]") from exc
        if isinstance(mode, (list, tuple)):
            if tuple(mode) not in basis.modes:
                raise ConfigError(f"field 'initial[{i}]': mode {mode} is not in the basis")
            pos = basis.modes.index(tuple(mode))
        else:
            if not isinstance(mode, int) or not 1 <= mode <= basis.size:
                raise ConfigError(f"field 'initial[{i}]': mode must be in 1..{basis.size}, got {mode!r}")
            pos = mode - 1
        a[pos] = float(value)
    return a


def _sample_times(spec, default_stop):
    spec = spec or {}
    start, stop = spec.get("start", 0.0), spec.get("stop", default_stop)
    num = spec.get("num", 1001)
    if spec.get("spacing", "linear") == "log":
        return np.geomspace(start, stop, num)
    return np.linspace(start, stop, num)


# -- pipeline ------------------------------------------------------------------

@dataclass
class Context:
    config: dict
    basis: object = None
    flow: object = None
    init: np.ndarray = None
    trajectory: Trajectory = None
    rng: np.random.Generator = None
    dt: float = None


def _closed_form_series(ctx, an):
    flow_spec = ctx.config["flow"]
    l = _group(ctx.basis, flow_spec, "l")
    m = flow_spec.get("m", 1)
    init = make_initial(ctx.basis, an["initial"]) if "initial" in an else ctx.init
    times = _sample_times(an.get("times"), ctx.config.get("integrator", {}).get("t_end", 10.0))
    return times, closed_form_path(ctx.basis, init, l, m, times), l, m, init


def _component(states, spec, times):
    """Scalar series selected by ``spec`` from a state history."""
    if spec == "norm":
        return np.linalg.norm(states, axis=1)
    if isinstance(spec, dict) and "mode" in spec:
        vals = states[:, spec["mode"] - 1]
        if "target" in spec:
            return np.abs(vals - spec["target"])
        return np.abs(vals)
    if isinstance(spec, int):
        return np.abs(states[:, spec - 1])
    raise ConfigError(f"field 'component': cannot interpret {spec!r}")


def _a_oracle_match(ctx, an, rep):
    tr = ctx.trajectory
    flow_spec = ctx.config["flow"]
    l = _group(ctx.basis, flow_spec, "l")
    cf = closed_form_path(ctx.basis, ctx.init, l, flow_spec.get("m", 1), tr.times)
    err = float(np.max(np.abs(cf - tr.states)))
    rep.results["oracle_sup_error"] = err
    rep.check("oracle_sup_error", err, 0.0, an.get("tol", 1e-6), err <= an.get("tol", 1e-6))


def _a_classify(ctx, an, rep):
    flow_spec = ctx.config["flow"]
    cls = classify_rate(ctx.basis, ctx.init, _group(ctx.basis, flow_spec, "l"), flow_spec.get("m", 1))
    rep.results["classification"] = {"case": cls.label, "j": cls.j,
                                     "predicted_rate": cls.predicted_rate,
                                     "limit_norm": cls.limit_norm, "t_prefactor": cls.t_prefactor}
    if "expect_case" in an:
        rep.check("case", cls.label, an["expect_case"], None, cls.label == an["expect_case"])


def _a_limit_norm(ctx, an, rep):
    flow_spec = ctx.config["flow"]
    l = _group(ctx.basis, flow_spec, "l")
    a = closed_form(ctx.basis, ctx.init, l, flow_spec.get("m", 1), an.get("t", 50.0))
    norm = float(np.linalg.norm(a))
    expected = classify_rate(ctx.basis, ctx.init, l, flow_spec.get("m", 1)).limit_norm
    tol = an.get("tol", 1e-8)
    rep.results["limit_norm"] = norm
    rep.check("limit_norm", norm, expected, tol, abs(norm - expected) <= tol)


def _a_scaled_value(ctx, an, rep):
    """``|a_mode(t)| * sqrt(2 t)`` from the closed form, compared to a range."""
    flow_spec = ctx.config["flow"]
    l = _group(ctx.basis, flow_spec, "l")
    t = an["t"]
    a = closed_form(ctx.basis, ctx.init, l, flow_spec.get("m", 1), t)
    val = float(abs(a[an.get("mode", 1) - 1]) * math.sqrt(2.0 * t))
    lo, hi = an["range"]
    rep.results[f"scaled_a{an.get('mode', 1)}_at_{t:g}"] = val
    rep.check(f"a{an.get('mode', 1)}*sqrt(2t) at t={t:g}", val, [lo, hi], None, lo <= val <= hi)


def _a_rate_fit(ctx, an, rep):
    if an.get("source", "closed_form") == "closed_form":
        times, states, *_ = _closed_form_series(ctx, an)
    else:
        times, states = ctx.trajectory.times, ctx.trajectory.states
    vals = _component(states, an["component"], times)
    keep = np.ones_like(vals, dtype=bool)
    if "window" in an:
        keep &= (times >= an["window"][0]) & (times <= an["window"][1])
    if "value_window" in an:
        keep &= (vals >= an["value_window"][0]) & (vals <= an["value_window"][1])
    fit = fit_rate(times[keep], vals[keep], **({"tail_fraction": an["tail_fraction"]}
                                                if "tail_fraction" in an else {}))
    name = an.get("name", "rate_fit")
    rep.results[name] = {"model": fit.model, "amplitude": fit.amplitude, "rate": fit.rate,
                         "residual": fit.residual, "window": fit.window,
                         "runner_up": fit.runner_up, "margin": fit.margin,
                         "ambiguous": fit.ambiguous}
    if "expect_model" in an:
        rep.check(f"{name}.model", fit.model, an["expect_model"], None,
                  fit.model == an["expect_model"])
    if "expect_rate" in an:
        exp = an["expect_rate"]
        tol = an["abs_tol"] if "abs_tol" in an else an.get("rel_tol", 0.05) * abs(exp)
        rep.check(f"{name}.rate", fit.rate, exp, tol, abs(fit.rate - exp) <= tol)


def _a_hr_check(ctx, an, rep):
    b = ctx.basis
    j, l = _group(b, an, "j"), _group(b, an, "l")
    res = hr_check(b, j, l, an.get("m", 1), an.get("n_samples", 8),
                   seed=int(ctx.rng.integers(2**31)))
    rep.results["hr_check"] = {"manifold_dim": res.manifold_dim, "kernel_dims": res.kernel_dims,
                               "spectral_gaps": res.spectral_gaps, "passed": res.passed}
    rep.check("kernel_dim == manifold_dim", res.kernel_dims, res.manifold_dim, 0,
              all(k == res.manifold_dim for k in res.kernel_dims))
    if "expected_gap" in an:
        tol = an.get("gap_tol", 1e-6)
        worst = float(max(abs(g - an["expected_gap"]) for g in res.spectral_gaps))
        rep.check("spectral_gap", res.spectral_gaps, an["expected_gap"], tol, worst <= tol)


def _a_energy_identity(ctx, an, rep):
    r = energy_identity_residual(ctx.flow, ctx.trajectory)
    rep.results["energy_identity_residual"] = r
    tol = an.get("tol", 1e-6)
    rep.check("energy_identity_residual", r, 0.0, tol, r <= tol)
    if an.get("refinement_factor"):
        p = ctx.config["integrator"]
        params = IntegratorParams(**{**p, "dt": p["dt"] / 2})
        r2 = energy_identity_residual(ctx.flow, integrate(ctx.flow, ctx.init, params))
        ratio = r / r2 if r2 > 0 else math.inf
        rep.results["energy_identity_residual_half_dt"] = r2
        rep.results["energy_identity_reduction"] = ratio
        rep.check("energy_identity_reduction", ratio, an["refinement_factor"], None,
                  ratio >= an["refinement_factor"])


def _a_zelenyak(ctx, an, rep):
    if an.get("synthetic"):
        t = np.linspace(0.0, an.get("t_end", 30.0), an.get("num", 3001))
        traj = Trajectory.from_arrays(t, np.exp(-t / 2)[:, None], None, 0.5 * np.exp(-t / 2))
        C8, beta = 0.25, 1.0
        name = "zelenyak_synthetic"
    else:
        traj = ctx.trajectory
        C8, beta = fit_tail_energy_exponential(traj)
        name = "zelenyak_trajectory"
    res = zelenyak_bound_check(traj, C8, beta)
    rep.results[name] = {"holds": res.holds, "C8": C8, "beta": beta, "C9": res.C9,
                         "worst_ratio": res.worst_ratio}
    rep.check(f"{name}.worst_ratio", res.worst_ratio, 1.0, None, res.holds)


def _a_lojasiewicz(ctx, an, rep):
    est = lojasiewicz_estimate(ctx.flow, ctx.trajectory, window=an.get("window"))
    rep.results["lojasiewicz"] = {"theta": est.theta, "slope": est.slope,
                                  "pairs_used": est.pairs_used, "window": est.window}
    if "theta_max" in an:
        rep.check("theta", est.theta, an["theta_max"], "upper bound", est.theta <= an["theta_max"])
    if "expected" in an:
        tol = an.get("tol", 0.05)
        rep.check("theta", est.theta, an["expected"], tol, abs(est.theta - an["expected"]) <= tol)


def _a_slow_bound(ctx, an, rep):
    tr = ctx.trajectory
    rho1 = ctx.config["flow"].get("rho1", 1.0)
    lo, hi = an.get("window", [1e3, 1e6])
    w = (tr.times >= lo) & (tr.times <= hi)
    scaled = tr.states[w, 0] * np.sqrt(np.log(tr.times[w]))
    bound = 1.0 / (3.0 * rho1)
    rep.results["slow_bound_min_scaled"] = float(scaled.min())
    rep.check("min a*sqrt(ln t)", float(scaled.min()), bound, "lower bound",
              bool(np.all(scaled >= bound)))


def _a_log_decay(ctx, an, rep):
    """``a(t) sqrt(ln 2t)`` at a probe time for the nonlocal_log scalar flow."""
    traj = scalar_slow_flow("nonlocal_log", a0=an.get("a0", 0.5), t_end=an.get("t", 1e6))
    t, a = traj.times[-1], traj.states[-1, 0]
    val = float(a * math.sqrt(math.log(2 * t)))
    lo, hi = an.get("range", [0.9, 1.1])
    rep.results["nonlocal_log_scaled"] = val
    rep.check(f"a*sqrt(ln 2t) at t={t:g}", val, [lo, hi], None, lo <= val <= hi)


def _a_omega_limit(ctx, an, rep):
    cand = make_initial(ctx.basis, an["candidate"])
    res = omega_limit_single(ctx.trajectory, cand, an.get("tol", 1e-3))
    name = an.get("name", "omega_limit")
    rep.results[name] = res
    expect = an.get("expect", True)
    rep.check(name, res, expect, an.get("tol", 1e-3), res == expect)


def _a_perturbed_bound(ctx, an, rep):
    res = perturbed_bound_check(ctx.trajectory, ctx.flow.h, t_min=an.get("t_min", 2.0))
    rep.results["perturbed_bound"] = {"holds": res.holds, "worst_ratio": res.worst_ratio,
                                      "h_scale": res.h_scale, "t_min": res.t_min}
    rep.check("perturbed_bound.worst_ratio", res.worst_ratio, 1.0, None, res.holds)


def _a_h_class(ctx, an, rep):
    h = ctx.flow.h if an.get("h") is None else make_decay_profile(an["h"])
    res = h_class_check(h, an.get("T_probe", 1e6))
    rep.results["h_class"] = {"positive_decreasing": res.positive_decreasing,
                              "vanishes": res.vanishes, "sqrt_integrable": res.sqrt_integrable,
                              "slow_decay": res.slow_decay, "sqrt_integral": res.sqrt_integral}
    rep.check("h_class.all_true", res.all_true, True, None, res.all_true)
    if "expected_integral" in an:
        tol = an.get("tol", 1e-4)
        rep.check("int sqrt(h)", res.sqrt_integral, an["expected_integral"], tol,
                  abs(res.sqrt_integral - an["expected_integral"]) <= tol)


def _a_blow_up(ctx, an, rep):
    tr = ctx.trajectory
    blew = tr.status is Status.BLOW_UP
    rep.results["blow_up"] = {"status": tr.status.value, "time": tr.final_time,
                              "final_norm": float(np.linalg.norm(tr.final_state))}
    rep.check("status", tr.status.value, "blow_up" if an.get("expect", True) else "not blow_up",
              None, blew == an.get("expect", True))
    rep.check("blow_up_time_finite", tr.final_time, "finite", None,
              math.isfinite(tr.final_time) and tr.final_time < ctx.config["integrator"]["t_end"])


def _a_status(ctx, an, rep):
    rep.results["status"] = ctx.trajectory.status.value
    rep.check("status", ctx.trajectory.status.value, an["expect"], None,
              ctx.trajectory.status.value == an["expect"])


ANALYSES = {
    "oracle_match": _a_oracle_match,
    "classify": _a_classify,
    "limit_norm": _a_limit_norm,
    "scaled_value": _a_scaled_value,
    "rate_fit": _a_rate_fit,
    "hr_check": _a_hr_check,
    "energy_identity": _a_energy_identity,
    "zelenyak": _a_zelenyak,
    "lojasiewicz": _a_lojasiewicz,
    "slow_bound": _a_slow_bound,
    "log_decay": _a_log_decay,
    "omega_limit": _a_omega_limit,
    "perturbed_bound": _a_perturbed_bound,
    "h_class": _a_h_class,
    "blow_up": _a_blow_up,
    "status": _a_status,
}


def apply_overrides(cfg, seed=None, dt=None, t_end=None, n_modes=None):
    cfg = copy.deepcopy(cfg)
    if seed is not None:
        cfg["seed"] = seed
    if n_modes is not None:
        cfg["n_modes"] = n_modes
    if dt is not None or t_end is not None:
        integ = cfg.setdefault("integrator", {})
        if dt is not None:
            integ["dt"] = dt
        if t_end is not None:
            integ["t_end"] = t_end
    return cfg


def run_experiment(cfg):
    """Execute the pipeline described by ``cfg`` and return a :class:`Report`.

    Configuration problems raise :class:`ConfigError`.  A library error
    inside an analysis becomes a failed assertion; solver errors propagate.
    """
    validate_config(cfg)
    rep = Report(str(cfg["id"]), copy.deepcopy(cfg))
    ctx = Context(cfg, rng=np.random.default_rng(cfg.get("seed", 0)))
    t_start = time.perf_counter()
    flow_spec = cfg["flow"]

    tic = time.perf_counter()
    if flow_spec["kind"] == "scalar":
        ctx.trajectory = scalar_slow_flow(flow_spec["name"], flow_spec.get("rho1", 1.0),
                                          flow_spec.get("rho2", 1.0), flow_spec.get("a0", 0.5),
                                          flow_spec.get("t_end", 1e6))
    else:
        domain = DomainSpec(cfg.get("domain", "interval"), cfg.get("quadrature_points_per_dim"))
        ctx.basis = build_basis(domain, cfg.get("n_modes", 16))
        ctx.flow = make_flow(ctx.basis, flow_spec)
        ctx.init = make_initial(ctx.basis, cfg.get("initial", []))
        solver = cfg.get("solver", "integrate")
        if solver == "integrate":
            try:
                params = IntegratorParams(**cfg.get("integrator", {}))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"field 'integrator': {exc}") from exc
            ctx.trajectory = integrate(ctx.flow, ctx.init, params)
        elif solver == "closed_form":
            if flow_spec["kind"] != "nonlocal_cubic":
                raise ConfigError("field 'solver': closed_form needs a nonlocal_cubic flow")
            times, states, *_ = _closed_form_series(ctx, {"times": cfg.get("times")})
            V = np.array([ctx.flow.lyapunov(a) for a in states])
            ut = np.array([np.linalg.norm(ctx.flow.rhs(a)) for a in states])
            ctx.trajectory = Trajectory.from_arrays(times, states, V, ut)
    rep.timings["solve_seconds"] = time.perf_counter() - tic
    log.debug("%s: solve finished in %.3f s", rep.experiment_id, rep.timings["solve_seconds"])
    if ctx.trajectory is not None:
        rep.results["trajectory"] = {"samples": len(ctx.trajectory),
                                     "status": ctx.trajectory.status.value,
                                     "t_final": ctx.trajectory.final_time}

    for an in cfg.get("analyses", []):
        tic = time.perf_counter()
        try:
            ANALYSES[an["type"]](ctx, an, rep)
        except ConfigError:
            raise
        except GradlabError as exc:
            rep.check(an["type"], f"{type(exc).__name__}: {exc}", "no error", None, False)
        rep.timings[an.get("name", an["type"])] = time.perf_counter() - tic
        log.debug("%s: analysis %s finished", rep.experiment_id, an.get("name", an["type"]))

    total = time.perf_counter() - t_start
    rep.timings["total_seconds"] = total
    if "budget_seconds" in cfg:
        rep.check("runtime_seconds", total, cfg["budget_seconds"], "upper bound",
                  total <= cfg["budget_seconds"])
    rep.context = ctx
    return rep


# -- artifacts -----------------------------------------------------------------

def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def trajectory_csv(traj):
    """CSV text with header ``t,V,ut_norm,a_1,...,a_n`` and 17 significant digits."""
    n = traj.states.shape[1]
    lines = [",".join(["t", "V", "ut_norm"] + [f"a_{k}" for k in range(1, n + 1)])]
    for t, V, g, a in zip(traj.times, traj.lyapunov_values, traj.ut_norms, traj.states):
        lines.append(",".join(f"{x:.17g}" for x in (t, V, g, *a)))
    return "\n".join(lines) + "\n"


def write_artifacts(report, out_dir):
    """Write ``<id>.json``, ``<id>.csv`` (when a trajectory exists) and ``<id>.log``."""
    out_dir = Path(out_dir)
    stem = report.experiment_id
    paths = {}
    ctx = report.context
    if ctx is not None and ctx.trajectory is not None:
        paths["csv"] = out_dir / f"{stem}.csv"
        _atomic_write(paths["csv"], trajectory_csv(ctx.trajectory))
    paths["json"] = out_dir / f"{stem}.json"
    _atomic_write(paths["json"], json.dumps(report.to_dict(), indent=2) + "\n")
    paths["log"] = out_dir / f"{stem}.log"
    _atomic_write(paths["log"], format_summary(report) + "\n")
    return paths


def format_summary(report):
    lines = [f"experiment {report.experiment_id}: {'PASS' if report.passed else 'FAIL'}"]
    for a in report.assertions:
        lines.append(f"  [{'pass' if a.passed else 'FAIL'}] {a.name}: measured={_fmt(a.measured)} "
                     f"expected={_fmt(a.expected)} tol={_fmt(a.tolerance)}")
    return "\n".join(lines)


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6g}"
    if isinstance(x, list) and len(x) > 4:
        return f"[{_fmt(x[0])}, ..., {_fmt(x[-1])}] ({len(x)} values)"
    return str(x)
