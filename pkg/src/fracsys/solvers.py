"""Solution procedures for the power system and for general nonlinearities.

* ``minimize_direct``: energy descent for pq < 1 (the energy is coercive and
  bounded below, and its minimizer is the positive solution).
* ``picard_sublinear``: the Green-operator iteration u <- A^{-s}[(A^{-s}[u^q])^p].
* ``mountain_pass`` / ``solve_general``: descent on the Nehari ray-maximum
  manifold for superlinear problems, where 0 is a local minimum and the
  energy goes to -inf along rays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import energy as en
from .energy import HyperbolaClass, Nonlinearity, PowerParams, Regime, classify
from .hypotheses import ParameterError, hypothesis_gate
from .spectral import (
    Basis, Domain, SpectralField, analyze, build_basis, dual_norm, synthesize, theta_norm,
)

log = logging.getLogger(__name__)


@dataclass
class SolveOptions:
    max_iters: int = 5000
    grad_tol: float = 1e-8
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    initial_step: float = 1.0
    max_backtracks: int = 60
    # cap on a single descent step relative to the iterate (dual descent only)
    max_rel_step: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (self.grad_tol > 0 and self.initial_step > 0 and self.armijo_c > 0):
            raise ValueError("tolerances and step sizes must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass
class TraceRow:
    energy: float
    grad_norm: float
    step: float = float("nan")
    clamp: float = 0.0


@dataclass
class SolverReport:
    solver: str
    u: SpectralField
    v: SpectralField
    energy: float
    residual_u: float
    residual_v: float
    iterations: int
    converged: bool
    classification: HyperbolaClass | None = None
    trace: list[TraceRow] = field(default_factory=list)
    message: str = ""
    degenerate: bool = False

    @property
    def residual(self) -> float:
        return max(self.residual_u, self.residual_v)


# -- recovery of v and residuals -------------------------------------------------


def _nodal(u: SpectralField) -> np.ndarray:
    return synthesize(u.coeffs, u.basis, u.basis.grid_size)


def _project(values: np.ndarray, basis: Basis) -> SpectralField:
    return SpectralField(basis, analyze(values, basis))


def recover_v(u: SpectralField, params: PowerParams, route: str = "green") -> SpectralField:
    """v from u: A^{-s} P[(u+)^q] ("green", default) or P[(A^s u)^{1/p}] ("direct")."""
    b = u.basis
    s = float(params.s)
    if route == "green":
        up = np.maximum(_nodal(u), 0.0)
        return SpectralField(b, analyze(up ** float(params.q), b) / b.eigenvalues**s)
    if route == "direct":
        w = synthesize(b.eigenvalues**s * u.coeffs, b, b.grid_size)
        return _project(np.abs(w) ** (1.0 / float(params.p) - 1.0) * w, b)
    raise ValueError(f"unknown route {route!r}")


def system_residuals(u: SpectralField, v: SpectralField, params: PowerParams) -> tuple[float, float]:
    """Dual Theta^s norms of A^s u - P[(v+)^p] and A^s v - P[(u+)^q]."""
    u._check(v)
    b, s = u.basis, float(params.s)
    lam_s = b.eigenvalues**s
    vp = np.maximum(_nodal(v), 0.0)
    up = np.maximum(_nodal(u), 0.0)
    r1 = SpectralField(b, lam_s * u.coeffs - analyze(vp ** float(params.p), b))
    r2 = SpectralField(b, lam_s * v.coeffs - analyze(up ** float(params.q), b))
    return dual_norm(r1, s), dual_norm(r2, s)


def general_residuals(u: SpectralField, v: SpectralField, nl: Nonlinearity, p: float, s: float) -> tuple[float, float]:
    """Same as ``system_residuals`` with v^p taken as |v|^{p-1} v and u^q replaced by f(u)."""
    b = u.basis
    lam_s = b.eigenvalues ** float(s)
    vn = _nodal(v)
    r1 = SpectralField(b, lam_s * u.coeffs - analyze(np.abs(vn) ** (p - 1.0) * vn, b))
    r2 = SpectralField(b, lam_s * v.coeffs - analyze(nl.f(_nodal(u)), b))
    return dual_norm(r1, s), dual_norm(r2, s)


def _require(params: PowerParams, allowed: set[Regime], solver: str) -> HyperbolaClass:
    cls = classify(params)
    if cls.tag not in allowed:
        raise ParameterError(
            f"{solver} needs regime {sorted(r.value for r in allowed)}; got {cls.describe()}"
        )
    return cls


def _is_zero(u: SpectralField) -> bool:
    return not np.any(u.coeffs)


def _degenerate(solver, params, cls, basis, msg) -> SolverReport:
    z = basis.zeros()
    return SolverReport(solver, z, z, 0.0, 0.0, 0.0, 0, True, cls, message=msg, degenerate=True)


# -- sublinear: direct minimization ------------------------------------------------


def minimize_direct(params: PowerParams, init: SpectralField, opts: SolveOptions | None = None) -> SolverReport:
    """Minimize the reduced energy for pq < 1 by gradient descent with Armijo backtracking.

    The iterate is the recovered field v (with u = A^{-s} P[(v+)^p]), so the
    discrete stationarity condition is the projected system itself and the
    minimizer coincides with the fixed point of ``picard_sublinear``.  The
    descent uses Barzilai-Borwein trial steps, capped at ``max_rel_step``
    times the iterate norm, then halves until the Armijo condition holds.
    Stops when the dual residual of the first equation is below grad_tol.
    """
    opts = opts or SolveOptions()
    cls = _require(params, {Regime.SUBLINEAR}, "minimize_direct")
    b = init.basis
    v = recover_v(init, params)
    if _is_zero(init) or not np.any(_nodal(v) > 0):
        return _degenerate("minimize_direct", params, cls, b,
                           "degenerate start: zero is a critical point, nothing to descend from")

    E = lambda x: en.phi_power_dual(x, params)
    trace: list[TraceRow] = []
    converged, message = False, f"no convergence in {opts.max_iters} iterations"
    prev = None
    step = opts.initial_step
    f0 = E(v)
    it = 0
    for it in range(1, opts.max_iters + 1):
        u = en.u_from_v(v, params)
        res = system_residuals(u, recover_v(u, params), params)[0]
        g = en.grad_phi_power_dual(v, params).coeffs
        gn2 = float(np.sum(g * g))
        trace.append(TraceRow(f0, res, step))
        if res <= opts.grad_tol:
            converged, message = True, "residual below tolerance"
            break
        if prev is not None:
            ds, dg = v.coeffs - prev[0], g - prev[1]
            curv = float(np.sum(ds * dg))
            if curv > 0:
                step = float(np.sum(ds * ds)) / curv
        cap = opts.max_rel_step * float(np.linalg.norm(v.coeffs)) / np.sqrt(gn2)
        step = min(step, cap)
        for _ in range(opts.max_backtracks):
            trial = SpectralField(b, v.coeffs - step * g)
            f1 = E(trial)
            if f1 <= f0 - opts.armijo_c * step * gn2:
                break
            step *= opts.backtrack
        else:
            message = f"stagnation: Armijo failed after {opts.max_backtracks} halvings"
            # at round-off level the energy cannot decrease any further
            break
        prev = (v.coeffs, g)
        v, f0 = trial, f1
    u = en.u_from_v(v, params)
    v_out = recover_v(u, params)
    r1, r2 = system_residuals(u, v_out, params)
    converged = converged or max(r1, r2) <= opts.grad_tol
    return SolverReport("minimize_direct", u, v_out, en.phi_power(u, params), r1, r2,
                        it, converged, cls, trace, message)


# -- sublinear: Green-operator iteration ------------------------------------------


def picard_sublinear(params: PowerParams, init: SpectralField, opts: SolveOptions | None = None) -> SolverReport:
    """Iterate u <- A^{-s} P[(v+)^p], v = A^{-s} P[(u+)^q] until the Theta^{2s} update is below grad_tol.

    Negative grid values are clamped to zero before each power; the largest
    clamped magnitude of the sweep is recorded in the trace.
    """
    opts = opts or SolveOptions()
    cls = _require(params, {Regime.SUBLINEAR}, "picard_sublinear")
    b = init.basis
    if _is_zero(init) or not np.any(_nodal(init) > 0):
        return _degenerate("picard_sublinear", params, cls, b,
                           "degenerate start: zero is a fixed point of the iteration")
    p, q, s = float(params.p), float(params.q), float(params.s)
    lam_s = b.eigenvalues**s
    u = init
    trace: list[TraceRow] = []
    converged = False
    it = 0
    for it in range(1, opts.max_iters + 1):
        un = _nodal(u)
        vc = analyze(np.maximum(un, 0.0) ** q, b) / lam_s
        vn = synthesize(vc, b, b.grid_size)
        u_new = SpectralField(b, analyze(np.maximum(vn, 0.0) ** p, b) / lam_s)
        clamp = max(0.0, -float(un.min()), -float(vn.min()))
        diff = theta_norm(u_new - u, 2 * s)
        u = u_new
        trace.append(TraceRow(en.phi_power(u, params), diff, 1.0, clamp))
        if diff <= opts.grad_tol:
            converged = True
            break
    v = recover_v(u, params)
    r1, r2 = system_residuals(u, v, params)
    msg = "update below tolerance" if converged else f"no convergence in {opts.max_iters} iterations"
    return SolverReport("picard_sublinear", u, v, en.phi_power(u, params), r1, r2,
                        it, converged, cls, trace, msg)


# -- superlinear: mountain pass via the Nehari ray maximum --------------------------


def _power_ray_max(u: SpectralField, params: PowerParams) -> float | None:
    """argmax_t Phi(t u) for t > 0 in closed form, or None if Phi grows along the ray."""
    p, q = float(params.p), float(params.q)
    a = en._principal_term(u, p, float(params.s))
    up = np.maximum(_nodal(u), 0.0)
    bq = np.sum(up ** (q + 1.0)) * u.basis.cell_volume() / (q + 1.0)
    if not (a > 0 and bq > 0):
        return None
    return (a * (p + 1.0) / (p * bq * (q + 1.0))) ** (1.0 / (q - 1.0 / p))


def _general_ray_max(u: SpectralField, grad: Callable[[SpectralField], SpectralField]) -> float | None:
    """Root of t -> Phi'(t u)[u], bracketed by doubling / halving from t = 1."""

    def slope(t):
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                d = float(np.sum(grad(t * u).coeffs * u.coeffs))
            except FloatingPointError:
                return -np.inf
        return d if np.isfinite(d) else -np.inf

    lo, hi = 1.0, 1.0
    if slope(1.0) > 0:
        for _ in range(200):
            hi *= 2.0
            if slope(hi) < 0:
                break
        else:
            return None
        lo = hi / 2.0
    else:
        for _ in range(200):
            lo /= 2.0
            if slope(lo) > 0:
                break
            if lo < 1e-12:
                return None
        else:
            return None
        hi = lo * 2.0
    return brentq(slope, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _nehari_descent(solver, E, grad, ray_max, start, s, opts, cls) -> tuple:
    b = start.basis
    t0 = ray_max(start)
    if t0 is None:
        raise ParameterError(f"{solver}: energy has no maximum along the starting ray")
    u = t0 * start
    f0 = E(u)
    trace: list[TraceRow] = []
    converged, message = False, f"no convergence in {opts.max_iters} iterations"
    step = opts.initial_step
    it = 0
    for it in range(1, opts.max_iters + 1):
        g = grad(u)
        pg = SpectralField(b, g.coeffs / b.eigenvalues ** (2 * s))
        res = dual_norm(g, 2 * s)
        trace.append(TraceRow(f0, res, step))
        if res <= opts.grad_tol:
            converged, message = True, "preconditioned gradient below tolerance"
            break
        step = min(opts.initial_step, 2.0 * step)
        # below this the Armijo decrease is not resolvable in the energy
        noise = 64 * np.finfo(float).eps * max(1.0, abs(f0))
        for _ in range(opts.max_backtracks):
            cand = u - step * pg
            t = ray_max(cand)
            if t is not None:
                trial = t * cand
                f1 = E(trial)
                decrease = opts.armijo_c * step * res**2
                if f1 <= f0 - decrease or (decrease < noise and f1 <= f0 + noise):
                    break
            step *= opts.backtrack
        else:
            message = f"stagnation: Armijo failed after {opts.max_backtracks} halvings"
            break
        u, f0 = trial, f1
        if theta_norm(u, 0) < 1e-10:
            message = "collapse to zero"
            break
    if theta_norm(u, 0) < 1e-10:
        converged, message = False, "collapse to zero: no nontrivial critical point found"
    return u, f0, trace, it, converged, message


def mountain_pass(
    params: PowerParams,
    opts: SolveOptions | None = None,
    *,
    basis: Basis | None = None,
    direction: SpectralField | None = None,
) -> SolverReport:
    """Nontrivial critical point of the power-system energy for pq > 1 below the critical hyperbola.

    Each step moves along the Theta^{2s}-preconditioned gradient and rescales
    to the maximum of the energy along the new ray; the energy of the
    iterates decreases towards the mountain-pass (least-energy) level.
    """
    opts = opts or SolveOptions()
    cls = _require(params, {Regime.SUBCRITICAL}, "mountain_pass")
    if float(params.p) > 1:
        raise ParameterError(f"mountain_pass needs p <= 1, got p={params.p}")
    if basis is None:
        basis = build_basis(Domain.unit(params.n), 64)
    if basis.dim != params.n:
        raise ValueError(f"basis dimension {basis.dim} != n={params.n}")
    start = direction if direction is not None else basis.eigenfunction(*([1] * basis.dim))
    u, f0, trace, it, converged, message = _nehari_descent(
        "mountain_pass",
        lambda x: en.phi_power(x, params),
        lambda x: en.grad_phi_power(x, params),
        lambda x: _power_ray_max(x, params),
        start, float(params.s), opts, cls,
    )
    v = recover_v(u, params)
    r1, r2 = system_residuals(u, v, params)
    return SolverReport("mountain_pass", u, v, f0, r1, r2, it, converged, cls, trace, message)


def solve_general(
    nl: Nonlinearity,
    p: float,
    s: float,
    opts: SolveOptions | None = None,
    *,
    basis: Basis,
    direction: SpectralField | None = None,
) -> SolverReport:
    """Nontrivial solution of A^s u = v^p, A^s v = f(u) for p <= 1 by the same Nehari descent.

    Refuses unless the dimension/exponent window and the superlinearity
    condition on f hold.  A failed smallness test at p = 1 is tolerated when
    f(r)/r near 0 stays below lambda_1^{2s}, which still makes the origin a
    strict local minimum of the energy.
    """
    opts = opts or SolveOptions()
    p, s = float(p), float(s)
    if p > 1:
        raise ParameterError(f"solve_general handles p <= 1 only, got p={p}")
    gate = hypothesis_gate("T1", basis.dim, s, p, nl)
    blocking = [v for v in gate.violations if v.condition != "smallness"]
    notes = list(gate.ar.notes) if gate.ar else []
    if "smallness" in gate.names():
        gap = basis.lambda1 ** (2 * s)
        if p == 1 and gate.ar.small_ratio < gap:
            notes.append(f"origin is a strict local minimum: f'(0) ~ {gate.ar.small_ratio:.3g} "
                         f"< lambda_1^(2s) = {gap:.4g}")
        else:
            blocking += [v for v in gate.violations if v.condition == "smallness"]
    if blocking:
        raise ParameterError("solve_general: hypotheses fail: " + "; ".join(map(str, blocking)), blocking)

    start = direction if direction is not None else basis.eigenfunction(*([1] * basis.dim))
    grad = lambda x: en.grad_phi_general(x, nl, p, s)
    u, f0, trace, it, converged, message = _nehari_descent(
        "solve_general",
        lambda x: en.phi_general(x, nl, p, s),
        grad,
        lambda x: _general_ray_max(x, grad),
        start, s, opts, None,
    )
    b = basis
    v = SpectralField(b, analyze(nl.f(_nodal(u)), b) / b.eigenvalues**s)
    r1, r2 = general_residuals(u, v, nl, p, s)
    if notes:
        message = message + "; " + "; ".join(notes)
    return SolverReport("solve_general", u, v, f0, r1, r2, it, converged, None, trace, message)
