"""Parameter gates for the two existence theorems, in exact rational arithmetic."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .energy import ARCheck, Nonlinearity, ar_check, exact


@dataclass(frozen=True)
class Violation:
    condition: str
    actual: str
    required: str

    def __str__(self) -> str:
        return f"{self.condition}: {self.actual} (required {self.required})"


@dataclass
class HypothesisReport:
    theorem: str
    violations: list[Violation] = field(default_factory=list)
    ar: ARCheck | None = None

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def names(self) -> set[str]:
        return {v.condition for v in self.violations}


class ParameterError(ValueError):
    """Raised when a solver is called outside the regime it is valid for."""

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


def _fmt(x: Fraction) -> str:
    return str(x) if x.denominator < 10**6 else f"{float(x):.6g}"


def hypothesis_gate(theorem: str, n: int, s, p, q_or_nl=None, *, r_max: float = 10.0) -> HypothesisReport:
    """Check the stated hypotheses of theorem "T1" (general f) or "T2" (f = u^q).

    T1: 2 <= n < 4s, 0 < p < 2s/(n - 2s), plus the AR and smallness conditions
    on f when a Nonlinearity is given.  T2: n >= 4s, 0 < p <= 1 and
    0 < q < (n + 4s)/(n - 4s) (any q > 0 when n = 4s).
    """
    theorem = theorem.upper()
    if theorem not in ("T1", "T2"):
        raise ValueError(f"theorem must be 'T1' or 'T2', got {theorem!r}")
    N, S, P = exact(n), exact(s), exact(p)
    rep = HypothesisReport(theorem)
    bad = rep.violations.append
    if not 0 < S < 1:
        bad(Violation("s_range", _fmt(S), "0 < s < 1"))
    if P <= 0:
        bad(Violation("p_range", _fmt(P), "p > 0"))

    if theorem == "T1":
        if not (2 <= N < 4 * S):
            bad(Violation("dimension", f"n={n}, 4s={_fmt(4 * S)}", "2 <= n < 4s"))
        if N > 2 * S:
            p_max = 2 * S / (N - 2 * S)
            if not P < p_max:
                bad(Violation("p_range", _fmt(P), f"p < 2s/(n-2s) = {_fmt(p_max)}"))
        else:
            bad(Violation("dimension", f"n={n}", "n > 2s"))
        if isinstance(q_or_nl, Nonlinearity) and P > 0:
            chk = ar_check(q_or_nl, float(P), r_max)
            rep.ar = chk
            if not chk.ar_ok:
                w = chk.witness or {}
                bad(Violation("ar_condition", str(w), f"theta F(r) <= f(r) r, theta > {chk.threshold:g}"))
            if not chk.small_ok:
                e = "r" if P > 1 else "r^(1/p)"
                bad(Violation("smallness", f"|f(r)|/|r|^e = {chk.small_ratio:.3g}", f"f(r) = o({e}) at 0"))
        elif q_or_nl is not None:
            raise TypeError("T1 takes a Nonlinearity (or None to skip the conditions on f)")
    else:
        if not N >= 4 * S:
            bad(Violation("dimension", f"n={n}, 4s={_fmt(4 * S)}", "n >= 4s"))
        if not P <= 1:
            bad(Violation("p_range", _fmt(P), "0 < p <= 1"))
        if q_or_nl is not None:
            Q = exact(q_or_nl)
            if Q <= 0:
                bad(Violation("q_range", _fmt(Q), "q > 0"))
            elif N > 4 * S:
                q_max = (N + 4 * S) / (N - 4 * S)
                if not Q < q_max:
                    bad(Violation("q_range", _fmt(Q), f"q < (n+4s)/(n-4s) = {_fmt(q_max)}"))
    return rep


def alpha_range(n: int, s: float, p: float | None = None):
    """Open interval of alpha with Theta^{2s-alpha} in L^{p+1} and Theta^alpha in C, or None.

    The lower end max(n/2, s) encodes alpha > n/2 (continuity) and alpha > s.
    """
    lo, hi = max(exact(n) / 2, exact(s)), 2 * exact(s)
    if lo >= hi:
        return None
    return float(lo), float(hi)
