"""Spectral Galerkin laboratory for convergence of gradient flows with branching equilibria."""

from .basis import DomainKind, DomainSpec, EigenBasis, SineTransform, analyze, build_basis, \
    inner_product, synthesize
from .equilibria import Equilibrium, analyze_spectrum, newton_equilibrium
from .flows import DecayProfile, Nonlinearity, jacobian, local, lyapunov, nonlocal_cubic, \
    nonlocal_general, perturbed, rhs
from .integrate import IntegratorParams, Status, Trajectory, integrate, tail_energy
from .nonlocal_model import classify_rate, closed_form, equilibria, hr_check, project_onto_Sk

__version__ = "0.1.0"
