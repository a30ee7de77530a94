"""Pinned experiment configurations reproducing the quantitative claims."""

import copy
import math

from .exceptions import UnknownPresetError

_SQRT3 = math.sqrt(3.0)

_NONLOCAL_L2 = {"kind": "nonlocal_cubic", "l": 2, "m": 1}
_NONLOCAL_L1 = {"kind": "nonlocal_cubic", "l": 1, "m": 1}
_CASE_III_RUN = {"dt": 1e-3, "t_end": 20.0, "record_stride": 1, "stationary_tol": 1e-10}

_PRESETS = {
    "oracle-match": {
        "domain": "interval", "n_modes": 16, "flow": _NONLOCAL_L2,
        "initial": [[1, 0.1], [2, 0.05]],
        "solver": "integrate", "integrator": {"dt": 1e-3, "t_end": 10.0},
        "analyses": [{"type": "oracle_match", "tol": 1e-6}],
        "budget_seconds": 5.0,
    },
    "energy-identity": {
        "domain": "interval", "n_modes": 16, "flow": _NONLOCAL_L2,
        "initial": [[1, 0.1], [2, 0.05]],
        "solver": "integrate", "integrator": {"dt": 1e-3, "t_end": 10.0},
        "analyses": [{"type": "energy_identity", "tol": 1e-6, "refinement_factor": 4.0}],
    },
    "prop41-i": {
        "domain": "interval", "n_modes": 16, "flow": _NONLOCAL_L1,
        "initial": [[2, 0.1]],
        "solver": "integrate", "integrator": {"dt": 1e-3, "t_end": 10.0, "record_stride": 10},
        "analyses": [
            {"type": "classify", "expect_case": "i"},
            {"type": "rate_fit", "name": "norm_decay", "source": "trajectory",
             "component": "norm", "expect_model": "exponential", "expect_rate": 3.0,
             "rel_tol": 0.05},
        ],
    },
    "prop41-ii": {
        "domain": "interval", "n_modes": 16, "flow": _NONLOCAL_L1,
        "initial": [[1, 0.3]],
        "solver": "closed_form",
        "times": {"start": 1e2, "stop": 1e4, "num": 401, "spacing": "log"},
        "integrator": {"t_end": 1e4},
        "analyses": [
            {"type": "classify", "expect_case": "ii"},
            {"type": "scaled_value", "t": 1e4, "mode": 1, "range": [0.99, 1.01]},
            {"type": "rate_fit", "name": "a1_decay", "component": 1,
             "times": {"start": 1e2, "stop": 1e4, "num": 401, "spacing": "log"},
             "window": [1e2, 1e4], "expect_model": "algebraic", "expect_rate": 0.5,
             "abs_tol": 0.005},
        ],
    },
    "prop41-iii": {
        "domain": "interval", "n_modes": 16, "flow": _NONLOCAL_L2,
        "initial": [[1, 0.1]],
        "solver": "integrate", "integrator": _CASE_III_RUN,
        "analyses": [
            {"type": "classify", "expect_case": "iii"},
            {"type": "limit_norm", "t": 50.0, "tol": 1e-8},
            {"type": "rate_fit", "name": "a1_deviation", "component": {"mode": 1, "target": _SQRT3},
             "times": {"start": 0.0, "stop": 10.0, "num": 10001},
             "value_window": [1e-12, 1e-2], "tail_fraction": 1.0,
             "expect_model": "exponential", "expect_rate": 6.0, "rel_tol": 0.05},
            {"type": "rate_fit", "name": "a2_decay", "initial": [[1, 0.1], [2, 0.05]],
             "component": 2, "times": {"start": 0.0, "stop": 10.0, "num": 10001},
             "value_window": [1e-12, 1e-2], "tail_fraction": 1.0,
             "expect_model": "exponential", "expect_rate": 3.0, "rel_tol": 0.05},
            {"type": "lojasiewicz", "expected": 0.5, "tol": 0.05},
            {"type": "omega_limit", "candidate": [[1, _SQRT3]], "tol": 1e-3, "expect": True},
            {"type": "omega_limit", "name": "omega_limit_wrong_branch",
             "candidate": [[1, -_SQRT3]], "tol": 1e-3, "expect": False},
        ],
    },
    "hr-square": {
        "domain": "square", "n_modes": 64, "flow": {"kind": "nonlocal_cubic", "l_eigenvalue": 10},
        "solver": "none",
        "analyses": [{"type": "hr_check", "j_eigenvalue": 5, "l_eigenvalue": 10, "n_samples": 8,
                      "expected_gap": 3.0, "gap_tol": 1e-6}],
        "budget_seconds": 10.0,
    },
    "hr-interval": {
        "domain": "interval", "n_modes": 16, "flow": _NONLOCAL_L2,
        "solver": "none",
        "analyses": [{"type": "hr_check", "j": 1, "l": 2, "n_samples": 8,
                      "expected_gap": 3.0, "gap_tol": 1e-6}],
    },
    "zelenyak": {
        "domain": "interval", "n_modes": 16, "flow": _NONLOCAL_L2,
        "initial": [[1, 0.1]],
        "solver": "integrate", "integrator": _CASE_III_RUN,
        "analyses": [{"type": "zelenyak", "synthetic": True}, {"type": "zelenyak"}],
    },
    "slow-decay": {
        "flow": {"kind": "scalar", "name": "flat_exp", "rho1": 1.0, "rho2": 1.0, "a0": 0.5,
                 "t_end": 1e6},
        "analyses": [
            {"type": "slow_bound", "window": [1e3, 1e6]},
            {"type": "lojasiewicz", "window": [1e3, 1e6], "theta_max": 0.1},
            {"type": "log_decay", "a0": 0.5, "t": 1e6, "range": [0.9, 1.1]},
        ],
        "budget_seconds": 2.0,
    },
    "lojasiewicz-flat": {
        "flow": {"kind": "scalar", "name": "flat_exp", "rho1": 1.0, "rho2": 1.0, "a0": 0.5,
                 "t_end": 1e6},
        "analyses": [{"type": "lojasiewicz", "window": [1e3, 1e6], "theta_max": 0.1}],
    },
    "perturbed-alpha3": {
        "domain": "interval", "n_modes": 16,
        "flow": {"kind": "perturbed", "base": _NONLOCAL_L2, "h": {"power_law": 3.0},
                 "forcing": "linear"},
        "initial": [[1, 0.1]],
        "solver": "integrate", "integrator": {"dt": 1e-2, "t_end": 200.0},
        "analyses": [
            {"type": "omega_limit", "candidate": [[1, _SQRT3]], "tol": 1e-3, "expect": True},
            {"type": "perturbed_bound", "t_min": 10.0},
            {"type": "h_class", "expected_integral": 2.0, "tol": 1e-4},
            {"type": "energy_identity", "tol": 1e-5},
        ],
    },
    "blow-up": {
        "domain": "interval", "n_modes": 16, "flow": {"kind": "local", "nonlinearity": "cubic"},
        "initial": [[1, 10.0]],
        "solver": "integrate", "integrator": {"dt": 1e-4, "t_end": 1.0, "blowup_threshold": 1e6},
        "analyses": [{"type": "blow_up", "expect": True}],
    },
}


def preset_names():
    return sorted(_PRESETS)


def preset(name):
    """Return a fresh copy of the pinned config ``name``."""
    if name not in _PRESETS:
        raise UnknownPresetError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    cfg = copy.deepcopy(_PRESETS[name])
    cfg = {"id": name, **cfg}
    cfg.setdefault("seed", 0)
    return cfg
