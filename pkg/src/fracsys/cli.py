"""Command-line front end: ``fracsys run CONFIG`` and ``fracsys sweep CONFIG --axis q=...``.

A config is one JSON document, for example::

    {
      "domain": {"dim": 2, "lengths": [1.0, 1.0]},
      "modes": 32,
      "params": {"s": 0.75, "p": 0.5, "q": 0.5},
      "solver": "minimize_direct",
      "options": {"grad_tol": 1e-9},
      "output": "out/sublinear"
    }

For ``solve_general`` the ``params`` block holds only s and p, and a
``"nonlinearity": {"name": "re^r", "theta": 2.0}`` block selects f.

Exit codes: 0 converged, 1 ran but did not converge, 2 bad config,
3 refused because the parameters violate the solver's hypotheses.
The output directory is taken from --out, else from $FRACSYS_OUT, else
from the config's "output" entry, else "./fracsys-out".
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .energy import Nonlinearity, PowerParams, Regime, classify, nonlinearity
from .hypotheses import ParameterError, Violation
from .report_io import atomic_write_text, table_csv, write_run
from .solvers import SolveOptions, minimize_direct, mountain_pass, picard_sublinear, solve_general
from .spectral import Basis, Domain, build_basis, theta_norm, to_nodal
from .verify import SWEEP_COLUMNS, critical_sweep, random_positive_start

EXIT_OK, EXIT_NOT_CONVERGED, EXIT_CONFIG, EXIT_REFUSED = 0, 1, 2, 3
OUT_ENV = "FRACSYS_OUT"

SOLVERS = ("minimize_direct", "picard_sublinear", "mountain_pass", "solve_general")
_SUBLINEAR = ("minimize_direct", "picard_sublinear")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    domain: Domain
    modes: int
    solver: str
    s: float
    p: float
    q: float | None = None
    nonlinearity: Nonlinearity | None = None
    nonlinearity_spec: dict | None = None
    options: SolveOptions = field(default_factory=SolveOptions)
    output: str | None = None
    grid_size: int | None = None

    @property
    def params(self) -> PowerParams:
        return PowerParams(self.domain.dim, self.s, self.p, self.q)

    def basis(self) -> Basis:
        return build_basis(self.domain, self.modes, self.grid_size)

    def with_q(self, q: float) -> "RunConfig":
        return dataclasses.replace(self, q=q)


def _get(d: dict, key: str, kind, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing '{key}'")
    val = d[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ConfigError(f"{where}.{key}: expected {kind.__name__}, got {val!r}")
    return val


def parse_config(doc) -> RunConfig:
    """Validate a decoded JSON config; raises ConfigError with a readable message."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    dom = _get(doc, "domain", dict, "config")
    dim = _get(dom, "dim", int, "domain")
    lengths = dom.get("lengths", [1.0] * dim)
    if not isinstance(lengths, list):
        raise ConfigError("domain.lengths must be a list")
    try:
        domain = Domain(dim, tuple(float(x) for x in lengths))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"domain: {e}") from None
    modes = _get(doc, "modes", int, "config")
    solver = _get(doc, "solver", str, "config")
    if solver not in SOLVERS:
        raise ConfigError(f"solver must be one of {SOLVERS}, got {solver!r}")
    par = _get(doc, "params", dict, "config")
    s = _get(par, "s", float, "params")
    p = _get(par, "p", float, "params")

    opts_doc = doc.get("options", {})
    if not isinstance(opts_doc, dict):
        raise ConfigError("options must be an object")
    known = {f.name for f in dataclasses.fields(SolveOptions)}
    unknown = set(opts_doc) - known
    if unknown:
        raise ConfigError(f"unknown options {sorted(unknown)}; allowed {sorted(known)}")
    opts = SolveOptions(**opts_doc)

    cfg = RunConfig(domain, modes, solver, s, p, options=opts, output=doc.get("output"),
                    grid_size=doc.get("grid_size"))
    if solver == "solve_general":
        spec = _get(doc, "nonlinearity", dict, "config")
        name = _get(spec, "name", str, "nonlinearity")
        kw = {k: v for k, v in spec.items() if k != "name"}
        try:
            cfg.nonlinearity = nonlinearity(name, **kw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"nonlinearity: {e}") from None
        cfg.nonlinearity_spec = dict(spec)
    else:
        cfg.q = _get(par, "q", float, "params")
    try:
        if cfg.q is not None:
            cfg.params  # noqa: B018 - validates ranges
        cfg.basis()
    except ValueError as e:
        raise ConfigError(str(e)) from None
    return cfg


def load_config(path) -> RunConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e})") from None
    return parse_config(doc)


def _check_regime(cfg: RunConfig) -> None:
    """Raise ParameterError when the configured solver does not apply to (p, q)."""
    if cfg.solver == "solve_general":
        return
    cls = classify(cfg.params)
    allowed = Regime.SUBLINEAR if cfg.solver in _SUBLINEAR else Regime.SUBCRITICAL
    if cls.tag is not allowed:
        v = Violation("regime", cls.describe(), allowed.value)
        raise ParameterError(f"{cfg.solver} refused: {v}", [v])


def solve(cfg: RunConfig):
    _check_regime(cfg)
    basis = cfg.basis()
    if cfg.solver == "mountain_pass":
        return mountain_pass(cfg.params, cfg.options, basis=basis)
    if cfg.solver == "solve_general":
        return solve_general(cfg.nonlinearity, cfg.p, cfg.s, cfg.options, basis=basis)
    init = random_positive_start(basis, cfg.s, np.random.default_rng(cfg.options.seed))
    fn = minimize_direct if cfg.solver == "minimize_direct" else picard_sublinear
    return fn(cfg.params, init, cfg.options)


def _outdir(cfg: RunConfig, cli_out: str | None) -> Path:
    return Path(cli_out or os.environ.get(OUT_ENV) or cfg.output or "fracsys-out")


def _config_echo(cfg: RunConfig) -> dict:
    d = {
        "domain": {"dim": cfg.domain.dim, "lengths": list(cfg.domain.lengths)},
        "modes": cfg.modes,
        "solver": cfg.solver,
        "params": {"s": cfg.s, "p": cfg.p} | ({"q": cfg.q} if cfg.q is not None else {}),
        "options": dataclasses.asdict(cfg.options),
    }
    if cfg.nonlinearity_spec:
        d["nonlinearity"] = cfg.nonlinearity_spec
    return d


def cmd_run(cfg: RunConfig, out: Path) -> int:
    rep = solve(cfg)
    write_run(out, rep, {"config": _config_echo(cfg)})
    print(f"{rep.solver}: converged={rep.converged} iterations={rep.iterations} "
          f"energy={rep.energy:.12g} residual={max(rep.residual_u, rep.residual_v):.3e} -> {out}")
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def parse_axis(spec: str) -> tuple[str, list[float]]:
    name, sep, values = spec.partition("=")
    if not sep or name.strip() != "q":
        raise ConfigError(f"--axis must look like q=2,3,4 (only q can be swept), got {spec!r}")
    try:
        vals = [float(x) for x in values.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--axis: non-numeric value in {values!r}") from None
    return "q", vals


def sweep_rows(cfg: RunConfig, q_values: list[float]) -> list[tuple]:
    """Rows (q, energy, sup_norm, theta2s_norm, iterations, converged) in input order.

    Every q is checked against the solver's regime before anything runs.
    """
    if cfg.solver == "solve_general":
        raise ConfigError("sweep needs a power-system solver")
    if cfg.solver == "mountain_pass":
        rows = critical_sweep(cfg.params, q_values, cfg.options, basis=cfg.basis())
        return [r.as_tuple() for r in rows]
    bad = []
    for q in q_values:
        cls = classify(PowerParams(cfg.domain.dim, cfg.s, cfg.p, q))
        if cls.tag is not Regime.SUBLINEAR:
            bad.append(Violation("q", f"{q:g} -> {cls.describe()}", "sublinear"))
    if bad:
        raise ParameterError("sweep refused: " + "; ".join(map(str, bad)), bad)
    out = []
    for q in q_values:
        rep = solve(cfg.with_q(q))
        out.append((float(q), float(rep.energy), float(np.abs(to_nodal(rep.u).values).max()),
                    theta_norm(rep.u, 2 * cfg.s), int(rep.iterations), bool(rep.converged)))
    return out


def cmd_sweep(cfg: RunConfig, axis: str, out: Path) -> int:
    _, q_values = parse_axis(axis)
    rows = sweep_rows(cfg, q_values)
    path = atomic_write_text(out / "sweep.csv", table_csv(SWEEP_COLUMNS, rows))
    print(f"sweep: {len(rows)} rows -> {path}")
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_NOT_CONVERGED


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracsys", description=__doc__.split("\n")[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", help="JSON run configuration")
    common.add_argument("--out", help="output directory (overrides $FRACSYS_OUT and the config)")
    common.add_argument("--seed", type=int, help="seed for random starts (overrides options.seed)")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="solve once and write report, trace and fields")
    sw = sub.add_parser("sweep", parents=[common], help="solve along a q axis and write sweep.csv")
    sw.add_argument("--axis", required=True, help="axis spec, e.g. q=2,3,4")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.options = dataclasses.replace(cfg.options, seed=args.seed)
        out = _outdir(cfg, args.out)
        if args.command == "run":
            return cmd_run(cfg, out)
        return cmd_sweep(cfg, args.axis, out)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ParameterError as e:
        if e.violations:
            print("refused: parameters violate the solver's hypotheses", file=sys.stderr)
            for v in e.violations:
                print(f"  - {v}", file=sys.stderr)
        else:
            print(f"refused: {e}", file=sys.stderr)
        return EXIT_REFUSED
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
