"""Energies of the coupled system A^s u = v^p, A^s v = f(u) and their derivatives.

All integrals are interior-grid quadratures on the basis collocation grid
(M = 2N points per axis by default).  Gradients are returned as the
coefficient vector g with Phi'(u)[phi] = sum_k g_k eta_k, i.e. the exact
gradient of the discrete energy with respect to the sine coefficients.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Callable

import numpy as np

from .spectral import SpectralField, analyze, synthesize

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PowerParams:
    """Exponents of the power system A^s u = v^p, A^s v = u^q in dimension n."""

    n: int
    s: Real
    p: Real
    q: Real

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"n must be 1, 2 or 3, got {self.n}")
        if not 0 < self.s < 1:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if not (self.p > 0 and self.q > 0):
            raise ValueError(f"p and q must be positive, got p={self.p}, q={self.q}")

    @property
    def pq(self) -> float:
        return float(self.p) * float(self.q)


@dataclass(frozen=True)
class Nonlinearity:
    """Right-hand side f of the second equation together with F = int_0^r f.

    ``theta`` and ``r0`` are the claimed Ambrosetti-Rabinowitz constants
    (theta F(r) <= f(r) r for |r| >= r0).  ``sides`` says on which half-lines
    that claim is made: "both", or "positive" when only r >= r0 is asserted.
    """

    name: str
    f: ArrayFn
    F: ArrayFn
    theta: float
    r0: float = 0.0
    sides: str = "both"

    def __post_init__(self):
        if self.sides not in ("both", "positive"):
            raise ValueError(f"sides must be 'both' or 'positive', got {self.sides!r}")
        if self.r0 < 0:
            raise ValueError(f"r0 must be nonnegative, got {self.r0}")
        F0 = float(np.asarray(self.F(np.zeros(1)))[0])
        if F0 != 0.0:
            raise ValueError(f"antiderivative must vanish at 0, got F(0)={F0}")


def _xexp(r):
    return r * np.exp(r)


def _xexp_antiderivative(r):
    return (r - 1.0) * np.exp(r) + 1.0


def power_nonlinearity(q: float) -> Nonlinearity:
    """f(r) = |r|^(q-1) r, the odd extension of r^q."""
    q = float(q)
    return Nonlinearity(
        f"r^{q:g}",
        lambda r: np.abs(r) ** (q - 1.0) * r,
        lambda r: np.abs(r) ** (q + 1.0) / (q + 1.0),
        theta=q + 1.0,
    )


def polynomial_nonlinearity(coeffs, theta: float, r0: float = 0.0) -> Nonlinearity:
    """f(r) = sum_k coeffs[k] r^k."""
    c = np.asarray(coeffs, dtype=float)
    f_poly = np.polynomial.Polynomial(c)
    F_poly = f_poly.integ(lbnd=0.0)
    return Nonlinearity(f"poly{list(c)}", f_poly, F_poly, theta=theta, r0=r0)


def nonlinearity(name: str, **kw) -> Nonlinearity:
    """Built-in nonlinearities by config name: 're^r', 'r^q', 'r^3', 'poly'."""
    if name == "re^r":
        # F -> 1 while f(r) r -> 0 as r -> -inf, so the AR inequality can
        # only be claimed on the positive half-line.
        return Nonlinearity(
            "re^r", _xexp, _xexp_antiderivative,
            theta=kw.get("theta", 2.0), r0=kw.get("r0", 0.0), sides="positive",
        )
    if name == "r^3":
        nl = power_nonlinearity(3.0)
        return Nonlinearity("r^3", nl.f, nl.F, theta=kw.get("theta", 3.0), r0=kw.get("r0", 0.0))
    if name == "r^q":
        if "q" not in kw:
            raise ValueError("nonlinearity 'r^q' needs q")
        nl = power_nonlinearity(kw["q"])
        return Nonlinearity(nl.name, nl.f, nl.F, theta=kw.get("theta", nl.theta), r0=kw.get("r0", 0.0))
    if name == "poly":
        if "coeffs" not in kw or "theta" not in kw:
            raise ValueError("nonlinearity 'poly' needs coeffs and theta")
        return polynomial_nonlinearity(kw["coeffs"], kw["theta"], kw.get("r0", 0.0))
    raise ValueError(f"unknown nonlinearity {name!r}")


# -- power-system reduced functional -----------------------------------------


def _signed_power(x: np.ndarray, e: float) -> np.ndarray:
    return np.abs(x) ** (e - 1.0) * x if e != 1 else x


def _nodal(u: SpectralField) -> np.ndarray:
    return synthesize(u.coeffs, u.basis, u.basis.grid_size)


def _flux(u: SpectralField, s: float) -> np.ndarray:
    """Grid values of A^s u."""
    b = u.basis
    return synthesize(b.eigenvalues ** float(s) * u.coeffs, b, b.grid_size)


def _principal_term(u: SpectralField, p: float, s: float) -> float:
    w = _flux(u, s)
    return p / (p + 1.0) * np.sum(np.abs(w) ** ((p + 1.0) / p)) * u.basis.cell_volume()


def _principal_grad(u: SpectralField, p: float, s: float) -> np.ndarray:
    b = u.basis
    w = _flux(u, s)
    return b.eigenvalues**s * analyze(_signed_power(w, 1.0 / p), b)


def phi_power(u: SpectralField, params: PowerParams) -> float:
    """p/(p+1) int |A^s u|^((p+1)/p) - 1/(q+1) int (u+)^(q+1)."""
    p, q, s = float(params.p), float(params.q), float(params.s)
    _check_dim(u, params.n)
    up = np.maximum(_nodal(u), 0.0)
    return _principal_term(u, p, s) - np.sum(up ** (q + 1.0)) * u.basis.cell_volume() / (q + 1.0)


def grad_phi_power(u: SpectralField, params: PowerParams) -> SpectralField:
    p, q, s = float(params.p), float(params.q), float(params.s)
    _check_dim(u, params.n)
    up = np.maximum(_nodal(u), 0.0)
    g = _principal_grad(u, p, s) - analyze(up**q, u.basis)
    return SpectralField(u.basis, g)


def phi_general(u: SpectralField, nl: Nonlinearity, p: float, s: float) -> float:
    """p/(p+1) int |A^s u|^((p+1)/p) - int F(u)."""
    p, s = float(p), float(s)
    Fu = np.asarray(nl.F(_nodal(u)), dtype=float)
    if not np.all(np.isfinite(Fu)):
        raise FloatingPointError(f"F={nl.name} is not finite on the grid")
    return _principal_term(u, p, s) - np.sum(Fu) * u.basis.cell_volume()


def grad_phi_general(u: SpectralField, nl: Nonlinearity, p: float, s: float) -> SpectralField:
    p, s = float(p), float(s)
    fu = np.asarray(nl.f(_nodal(u)), dtype=float)
    if not np.all(np.isfinite(fu)):
        raise FloatingPointError(f"f={nl.name} is not finite on the grid")
    return SpectralField(u.basis, _principal_grad(u, p, s) - analyze(fu, u.basis))


# -- the same power-system energy in the recovered variable v -----------------
#
# Writing u = A^{-s} P[(v+)^p] turns the reduced functional into
#   Psi(v) = p/(p+1) int (v+)^(p+1) - 1/(q+1) int (u+)^(q+1),
# whose discrete critical points on the positive cone are exactly the
# projected system A^s u = P[(v+)^p], A^s v = P[(u+)^q].


def u_from_v(v: SpectralField, params: PowerParams) -> SpectralField:
    b = v.basis
    vp = np.maximum(_nodal(v), 0.0)
    return SpectralField(b, analyze(vp ** float(params.p), b) / b.eigenvalues ** float(params.s))


def phi_power_dual(v: SpectralField, params: PowerParams) -> float:
    p, q = float(params.p), float(params.q)
    b = v.basis
    vp = np.maximum(_nodal(v), 0.0)
    up = np.maximum(_nodal(u_from_v(v, params)), 0.0)
    return (p / (p + 1.0) * np.sum(vp ** (p + 1.0)) - np.sum(up ** (q + 1.0)) / (q + 1.0)) * b.cell_volume()


def grad_phi_power_dual(v: SpectralField, params: PowerParams) -> SpectralField:
    p, q, s = float(params.p), float(params.q), float(params.s)
    b = v.basis
    vn = _nodal(v)
    up = np.maximum(_nodal(u_from_v(v, params)), 0.0)
    v_rec = synthesize(analyze(up**q, b) / b.eigenvalues**s, b, b.grid_size)
    pos = vn > 0
    weight = np.zeros_like(vn)
    weight[pos] = p * vn[pos] ** (p - 1.0)
    return SpectralField(b, analyze(weight * (vn - v_rec), b))


# -- Hamiltonian and Lagrangian of the coupled system -------------------------


def hamiltonian(u: SpectralField, v: SpectralField, p: float, nl: Nonlinearity) -> float:
    """int ( |v|^(p+1)/(p+1) + F(u) )."""
    u._check(v)
    p = float(p)
    vals = np.abs(_nodal(v)) ** (p + 1.0) / (p + 1.0) + nl.F(_nodal(u))
    return float(np.sum(vals) * u.basis.cell_volume())


def lagrangian(u: SpectralField, v: SpectralField, s: float, p: float, nl: Nonlinearity) -> float:
    """int A^{s/2}u A^{s/2}v - H(u, v); strongly indefinite, diagnostic only."""
    coupling = float(np.sum(u.basis.eigenvalues ** float(s) * u.coeffs * v.coeffs))
    return coupling - hamiltonian(u, v, p, nl)


def _check_dim(u: SpectralField, n: int) -> None:
    if u.basis.dim != n:
        raise ValueError(f"field lives in dimension {u.basis.dim}, parameters say n={n}")


# -- hypotheses on f ----------------------------------------------------------


@dataclass
class ARCheck:
    """Outcome of sampling the superlinearity and smallness hypotheses on f."""

    passed: bool
    ar_ok: bool
    small_ok: bool
    theta: float
    r0: float
    threshold: float
    small_ratio: float
    witness: dict | None = None
    notes: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def theta_threshold(p: float) -> float:
    """Lower bound on theta: 2 for p > 1, 1 + 1/p for p <= 1 (strict)."""
    p = float(p)
    return 2.0 if p > 1 else 1.0 + 1.0 / p


def _ar_violation(nl: Nonlinearity, theta: float, r: np.ndarray):
    with np.errstate(over="ignore", invalid="ignore"):
        lhs = theta * np.asarray(nl.F(r), dtype=float)
        rhs = np.asarray(nl.f(r), dtype=float) * r
    # relative slack for rounding in F near equality
    bad = ~(lhs <= rhs + 1e-12 * np.maximum(np.abs(lhs), np.abs(rhs)))
    return bad, lhs, rhs


def ar_check(
    nl: Nonlinearity,
    p: float,
    r_max: float,
    grid_points: int = 2000,
    *,
    sides: str | None = None,
    small_r: float = 1e-6,
    small_tol: float = 0.01,
    search: bool = True,
) -> ARCheck:
    """Sample theta F(r) <= f(r) r on [r0, r_max] (and its mirror) and f = o(r^e) near 0.

    The exponent e is 1 for p > 1 and 1/p for p <= 1.  The AR hypothesis is
    existential in (theta, r0): when the supplied pair does not certify it
    (theta not above the threshold, or a sampled violation) and ``search`` is
    on, the check looks for theta' slightly above the threshold and the
    smallest sampled r0' <= r_max / 2 that works.
    """
    if r_max <= nl.r0:
        raise ValueError(f"r_max={r_max} must exceed r0={nl.r0}")
    if grid_points < 100:
        raise ValueError("grid_points must be at least 100")
    sides = nl.sides if sides is None else sides
    thr = theta_threshold(p)
    notes: list[str] = []

    def samples(r0):
        pos = np.linspace(r0, r_max, grid_points)
        return pos if sides == "positive" else np.concatenate([pos, -pos])

    witness = None
    theta, r0 = nl.theta, nl.r0
    bad, lhs, rhs = _ar_violation(nl, theta, samples(r0))
    ar_ok = theta > thr and not bad.any()
    if not ar_ok:
        r = samples(r0)
        if theta <= thr:
            witness = {"condition": "theta", "theta": theta, "required": f"> {thr:g}"}
        else:
            i = int(np.argmax(bad))
            witness = {"condition": "ar", "r": float(r[i]), "theta_F": float(lhs[i]), "f_r": float(rhs[i])}
    if not ar_ok and search:
        grid = np.linspace(0.0, r_max / 2, grid_points // 2)
        for margin in (0.01, 0.05, 0.25):
            cand = thr * (1.0 + margin)
            for r0c in grid[grid >= nl.r0]:
                if not _ar_violation(nl, cand, samples(r0c))[0].any():
                    notes.append(f"AR certified with theta={cand:g}, r0={r0c:g} "
                                 f"instead of supplied theta={nl.theta:g}, r0={nl.r0:g}")
                    theta, r0, ar_ok = cand, float(r0c), True
                    break
            if ar_ok:
                break

    e = 1.0 if p > 1 else 1.0 / float(p)
    rs = np.array([small_r, -small_r]) if sides == "both" else np.array([small_r])
    ratio = float(np.max(np.abs(nl.f(rs)) / np.abs(rs) ** e))
    small_ok = ratio < small_tol
    if not small_ok:
        notes.append(f"|f(r)|/|r|^{e:g} = {ratio:.3g} at |r|={small_r:g}, needs < {small_tol:g}")
        if witness is None:
            witness = {"condition": "smallness", "r": small_r, "ratio": ratio}

    return ARCheck(ar_ok and small_ok, ar_ok, small_ok, float(theta), float(r0), thr, ratio, witness, notes)


# -- exponent classification ---------------------------------------------------


class Regime(str, enum.Enum):
    SUBLINEAR = "sublinear"
    RESONANT = "resonant"
    SUBCRITICAL = "superlinear-subcritical"
    CRITICAL = "critical"
    SUPERCRITICAL = "supercritical"


@dataclass(frozen=True)
class HyperbolaClass:
    tag: Regime
    hyperbola_value: Fraction
    threshold: Fraction
    pq: Fraction

    def describe(self) -> str:
        h, t = self.hyperbola_value, self.threshold
        rel = "<" if h < t else ("=" if h == t else ">")
        return (f"{self.tag.value}: pq = {float(self.pq):.6g}, "
                f"1/(p+1) + 1/(q+1) = {_frac(h)} {rel} (n-2s)/n = {_frac(t)}")


def _frac(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    if x.denominator < 10**4:
        return f"{x} = {float(x):.6g}"
    return f"{float(x):.6g}"


def exact(x) -> Fraction:
    """Exact rational value of an int, Fraction or binary float."""
    return x if isinstance(x, Fraction) else Fraction(x)


def classify(params: PowerParams) -> HyperbolaClass:
    """Place (p, q) relative to pq = 1 and the critical hyperbola, in exact arithmetic."""
    n, s, p, q = exact(params.n), exact(params.s), exact(params.p), exact(params.q)
    pq = p * q
    hyp = 1 / (p + 1) + 1 / (q + 1)
    thr = (n - 2 * s) / n
    if pq < 1:
        tag = Regime.SUBLINEAR
    elif pq == 1:
        tag = Regime.RESONANT
    elif hyp > thr:
        tag = Regime.SUBCRITICAL
    elif hyp == thr:
        tag = Regime.CRITICAL
    else:
        tag = Regime.SUPERCRITICAL
    return HyperbolaClass(tag, hyp, thr, pq)
