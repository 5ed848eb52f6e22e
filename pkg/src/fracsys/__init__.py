"""Spectral solvers for the fractional Lane-Emden type system A^s u = v^p, A^s v = f(u) on boxes."""

from .energy import (
    ARCheck, HyperbolaClass, Nonlinearity, PowerParams, Regime, ar_check, classify, grad_phi_general,
    grad_phi_power, hamiltonian, lagrangian, nonlinearity, phi_general, phi_power, polynomial_nonlinearity,
    power_nonlinearity, theta_threshold,
)
from .hypotheses import HypothesisReport, ParameterError, Violation, alpha_range, hypothesis_gate
from .solvers import (
    SolveOptions, SolverReport, TraceRow, minimize_direct, mountain_pass, picard_sublinear, recover_v,
    solve_general, system_residuals,
)
from .spectral import (
    Basis, Domain, NodalField, SpectralField, apply_power, build_basis, dual_norm, inner_theta,
    invert_power, read_field, sample, theta_norm, to_nodal, to_spectral, write_field,
)
from .verify import (
    RegularityProbe, UniquenessReport, critical_sweep, positivity_check, regularity_probe, residual_pair,
    symmetry_check, uniqueness_harness,
)

__version__ = "0.1.0"
