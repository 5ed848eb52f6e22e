"""Numerical checks of the qualitative claims: residuals, positivity, symmetry,
uniqueness for pq < 1, regularity surrogates and sweeps towards the critical
hyperbola.  The theorem gates live in ``hypotheses`` and are re-exported here.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .energy import PowerParams, Regime, classify
from .hypotheses import HypothesisReport, ParameterError, Violation, alpha_range, hypothesis_gate
from .solvers import (
    SolveOptions, SolverReport, minimize_direct, mountain_pass, picard_sublinear, system_residuals,
)
from .spectral import Basis, NodalField, SpectralField, build_basis, Domain, theta_norm, to_nodal

__all__ = [
    "HypothesisReport", "Violation", "hypothesis_gate", "alpha_range", "residual_pair",
    "positivity_check", "symmetry_check", "RegularityProbe", "regularity_probe",
    "UniquenessReport", "uniqueness_harness", "random_positive_start", "SweepRow",
    "critical_sweep", "SWEEP_COLUMNS",
]


def residual_pair(u: SpectralField, v: SpectralField, params: PowerParams) -> tuple[float, float]:
    """Weak-form residuals of both equations, measured in the dual of Theta^s."""
    return system_residuals(u, v, params)


def positivity_check(u: NodalField | SpectralField, tol: float = 1e-8) -> bool:
    if isinstance(u, SpectralField):
        u = to_nodal(u)
    return bool(u.values.min() >= -tol)


def symmetry_check(u: SpectralField, tol: float = 1e-10) -> bool:
    """True iff u is even about every midplane, i.e. all modes with an even index vanish."""
    m = u.basis.mode_indices()
    has_even = np.any(m % 2 == 0, axis=-1)
    return bool(np.all(np.abs(u.coeffs[has_even]) <= tol))


@dataclass
class RegularityProbe:
    sup_norm: float
    sup_norm_refined: float
    tail_fraction: dict[float, float]
    decay_exponent: float
    rough: bool

    @property
    def sup_change(self) -> float:
        """Relative change of the sup norm under grid refinement M -> 2M."""
        ref = max(abs(self.sup_norm_refined), np.finfo(float).tiny)
        return abs(self.sup_norm_refined - self.sup_norm) / ref


def regularity_probe(u: SpectralField, s: float = 0.5, floor: float = 1e-13) -> RegularityProbe:
    """Computable stand-ins for boundedness and smoothness of a field.

    decay_exponent is the least-squares slope of log|xi_k| against
    log lambda_k over coefficients above ``floor`` times the largest one.
    The field is flagged rough when that slope exceeds -dim/4, the rate at
    which the L2 series stops converging.
    """
    b = u.basis
    M = b.grid_size
    sup = float(np.abs(to_nodal(u, M).values).max())
    sup_ref = float(np.abs(to_nodal(u, 2 * M).values).max())

    high = np.any(b.mode_indices() > b.modes // 2, axis=-1)
    tails = {}
    for alpha in (float(s), 2.0 * float(s)):
        e = b.eigenvalues**alpha * u.coeffs**2
        total = float(e.sum())
        tails[alpha] = float(e[high].sum() / total) if total > 0 else 0.0

    c = np.abs(u.coeffs)
    keep = c > floor * c.max() if c.max() > 0 else np.zeros_like(c, dtype=bool)
    if keep.sum() >= 2 and np.ptp(np.log(b.eigenvalues[keep])) > 0:
        slope = float(np.polyfit(np.log(b.eigenvalues[keep]), np.log(c[keep]), 1)[0])
    else:
        slope = float("-inf")
    return RegularityProbe(sup, sup_ref, tails, slope, slope > -b.dim / 4)


def random_positive_start(basis: Basis, s: float, rng: np.random.Generator) -> SpectralField:
    """|Gaussian| coefficients smoothed by A^{-s}, with a random overall scale."""
    c = np.abs(rng.standard_normal(basis.shape)) / basis.eigenvalues**s
    scale = 10.0 ** rng.uniform(-2.0, 1.0)
    return SpectralField(basis, scale * c / np.abs(c).max())


@dataclass
class UniquenessReport:
    passed: bool
    spread: float
    tol: float
    runs: list[SolverReport] = field(default_factory=list)
    inconclusive: bool = False
    weak: bool = False

    def summary(self) -> str:
        status = "inconclusive" if self.inconclusive else ("pass" if self.passed else "FAIL")
        weak = " (weak evidence: single start)" if self.weak else ""
        return f"{status}: {len(self.runs)} runs, Theta^2s spread {self.spread:.3e} (tol {self.tol:g}){weak}"


def uniqueness_harness(
    params: PowerParams,
    k_starts: int,
    opts: SolveOptions | None = None,
    *,
    basis: Basis | None = None,
    tol: float = 1e-5,
) -> UniquenessReport:
    """Run both sublinear solvers from k seeded positive starts and compare all limits."""
    cls = classify(params)
    if cls.tag is not Regime.SUBLINEAR:
        raise ParameterError(f"uniqueness harness needs pq < 1; got {cls.describe()}")
    if k_starts < 1:
        raise ValueError("k_starts must be >= 1")
    opts = opts or SolveOptions()
    basis = basis or build_basis(Domain.unit(params.n), 32)
    s = float(params.s)
    rng = np.random.default_rng(opts.seed)
    runs = []
    for _ in range(k_starts):
        init = random_positive_start(basis, s, rng)
        runs.append(minimize_direct(params, init, opts))
        runs.append(picard_sublinear(params, init, opts))
    spread = max(
        (theta_norm(a.u - b.u, 2 * s) for a, b in itertools.combinations(runs, 2)),
        default=0.0,
    )
    inconclusive = not all(r.converged for r in runs)
    return UniquenessReport(not inconclusive and spread <= tol, spread, tol, runs,
                            inconclusive, weak=k_starts == 1)


SWEEP_COLUMNS = ("q", "energy", "sup_norm", "theta2s_norm", "iterations", "converged")


@dataclass
class SweepRow:
    q: float
    energy: float
    sup_norm: float
    theta2s_norm: float
    iterations: int
    converged: bool

    def as_tuple(self):
        return tuple(getattr(self, c) for c in SWEEP_COLUMNS)


def critical_sweep(
    base: PowerParams,
    q_values,
    opts: SolveOptions | None = None,
    *,
    basis: Basis | None = None,
) -> list[SweepRow]:
    """Mountain-pass solutions for each q, all of which must lie below the critical hyperbola.

    The whole list is validated before any solve runs.
    """
    q_values = list(q_values)
    bad = []
    for q in q_values:
        cls = classify(PowerParams(base.n, base.s, base.p, q))
        if cls.tag is not Regime.SUBCRITICAL:
            bad.append(Violation("q", f"{q} -> {cls.describe()}", "superlinear-subcritical"))
    if bad:
        raise ParameterError("critical_sweep refused: " + "; ".join(map(str, bad)), bad)
    rows = []
    for q in q_values:
        params = PowerParams(base.n, base.s, base.p, q)
        rep = mountain_pass(params, opts, basis=basis)
        rows.append(SweepRow(
            float(q), float(rep.energy), float(np.abs(to_nodal(rep.u).values).max()),
            theta_norm(rep.u, 2 * float(base.s)), rep.iterations, rep.converged,
        ))
    return rows
