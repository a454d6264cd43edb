"""Command-line front end.

Exit codes: 0 ok, 2 usage or validation, 3 infeasible, 4 solver failure,
5 unreadable input file.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import analysis, closedform, oracle, sim
from .closedform import UNIFORM, InputDistribution, MDParams
from .errors import (
    BellMDError, DomainError, EmptyCell, InfeasibleParams, InfeasibleStrategy,
    NoSolution, RangeError, SolverError, UnsupportedFunctional,
)
from .functional import (
    BellFunctional, chain3, classical_bound, nosignaling_bound, pfb, quantum_bound,
)

SCHEMA = "bellmd-csv/1"
REPORT_SCHEMA = "bellmd-verify/1"
# Inputs this close to 1/9 are read as exactly 1/9, so "0.1111" means the
# uniform point rather than a box that is slightly too tight to be valid.
SNAP_TOL = 1e-4
DEFAULT_VERIFY_ALPHAS = (0.5, 1.0, 1.5)
DEFAULT_VERIFY_RESTARTS = 4

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SOLVER, EXIT_FILE = 0, 2, 3, 4, 5


class BadInputFile(Exception):
    pass


def probability(text: str) -> float:
    """Parse a float or a fraction such as ``1/9``."""
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if abs(value - UNIFORM) <= SNAP_TOL:
        return UNIFORM
    return value


def _emit(obj, as_json: bool, lines: Sequence[str]):
    if as_json:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


def _fmt(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _functional(args) -> BellFunctional:
    if getattr(args, "chain", False):
        return chain3()
    if getattr(args, "pfb", None) is not None:
        return pfb(args.pfb)
    raise DomainError("choose a functional with --chain or --pfb ALPHA")


def _add_functional(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--chain", action="store_true", help="three-setting chained functional")
    g.add_argument("--pfb", type=float, metavar="ALPHA", help="pfb(alpha) functional, alpha in (0, 2)")


def _add_params(p, need_p=True):
    p.add_argument("--P", type=probability, required=need_p, help="largest input-cell probability")
    p.add_argument("--S", type=probability, default=0.0, help="smallest input-cell probability")
    p.add_argument("--G", type=float, default=1.0, help="guessing probability")
    p.add_argument("--dist", choices=[d.value for d in InputDistribution], default="general")


def _params(args) -> MDParams:
    return MDParams(args.P, args.S, args.G, InputDistribution(args.dist))


def _jobs(args) -> int:
    if getattr(args, "jobs", None):
        return max(1, args.jobs)
    env = os.environ.get("BELLMD_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise DomainError(f"BELLMD_JOBS must be an integer, got {env!r}")
    return 1


# -- bounds --------------------------------------------------------------------


def cmd_bounds(args) -> int:
    f = _functional(args)
    out = {
        "functional": f.label,
        "classical": classical_bound(f),
        "quantum": quantum_bound(f),
        "nosignaling": nosignaling_bound(f),
    }
    _emit(out, args.json, [f"{k:<12} {_fmt(v)}" for k, v in out.items()])
    return EXIT_OK


# -- fake ----------------------------------------------------------------------


def cmd_fake(args) -> int:
    f = _functional(args)
    p = _params(args)
    bound = closedform.fake_max(f, p)
    out = {
        "functional": f.label,
        "P": p.P, "S": p.S, "G": p.G, "dist": p.dist.value,
        "regime": closedform.validate(p),
        "value": bound.value,
        "branch": bound.branch.value,
        "theorem": bound.theorem.value,
        "warning": bound.warning,
    }
    if args.oracle:
        report = oracle.verify_theorem(f, p, restarts=args.restarts, seed=args.seed)
        out["oracle"] = report.to_dict()
    lines = [f"{k:<12} {_fmt(out[k])}" for k in ("functional", "P", "S", "G", "dist", "regime",
                                                  "value", "branch", "theorem")]
    if bound.warning:
        lines.append(f"warning      {bound.warning}")
    if args.oracle:
        o = out["oracle"]
        lines += [f"oracle       {_fmt(o['oracle_lower'])}",
                  f"upper        {_fmt(o['oracle_upper'])}",
                  f"verdict      {o['classification']}"]
    _emit(out, args.json, lines)
    return EXIT_OK


# -- sweep ---------------------------------------------------------------------


@dataclass
class SweepConfig:
    figure: str
    functional: BellFunctional
    P: list = field(default_factory=list)
    S: list = field(default_factory=lambda: [0.0])
    G: list = field(default_factory=lambda: [1.0])
    dist: InputDistribution = InputDistribution.GENERAL
    alphas: list = field(default_factory=list)
    oracle: bool = False

    def validate(self):
        if self.figure in ("fig5", "rates"):
            if not self.alphas:
                raise DomainError("alpha grid is empty")
            return
        if not (self.P and self.S and self.G):
            raise DomainError("sweep grid is empty")


def _linspace(lo, hi, n) -> list:
    if n < 1:
        return []
    return [float(x) for x in np.linspace(lo, hi, n)]


def sweep_config(args) -> SweepConfig:
    n = args.n
    fig = args.figure
    alpha = args.alpha
    if fig in ("fig1a", "fig2a"):
        dist = InputDistribution.GENERAL if fig == "fig1a" else InputDistribution.FACTORIZABLE
        return SweepConfig(fig, pfb(alpha), _linspace(UNIFORM, 1.0, n), _linspace(0.0, UNIFORM, n),
                           [1.0], dist)
    if fig in ("fig1b", "fig2b"):
        dist = InputDistribution.GENERAL if fig == "fig1b" else InputDistribution.FACTORIZABLE
        return SweepConfig(fig, pfb(alpha), _linspace(UNIFORM, 1.0, n), [0.0],
                           _linspace(0.5, 1.0, n), dist)
    if fig in ("fig5", "rates"):
        # Open interval: both ends are excluded from the pfb family.
        grid = [float(x) for x in np.linspace(0.0, 2.0, n + 2)[1:-1]]
        return SweepConfig(fig, chain3(), dist=InputDistribution(args.dist), alphas=grid)
    f = _functional(args)

    def axis(spec, default):
        if spec is None:
            return default
        lo, hi, k = spec
        return _linspace(probability(lo), probability(hi), int(k))

    return SweepConfig("grid", f, axis(args.P_range, _linspace(UNIFORM, 1.0, n)),
                       axis(args.S_range, [0.0]), axis(args.G_range, [1.0]),
                       InputDistribution(args.dist), oracle=args.oracle)


def _valid(p: MDParams) -> bool:
    try:
        closedform.validate(p)
        return True
    except RangeError:
        return False


def _grid_rows(cfg: SweepConfig):
    rows, skipped = [], 0
    for P in cfg.P:
        for S in cfg.S:
            for G in cfg.G:
                p = MDParams(P, S, G, cfg.dist)
                if not _valid(p):
                    skipped += 1
                    continue
                rows.append((p, closedform.fake_max(cfg.functional, p)))
    return rows, skipped


def _oracle_value(task):
    f, p = task
    if p.dist is InputDistribution.GENERAL:
        return oracle.solve_general(f, p).value
    return oracle.solve_factorizable(f, p, restarts=DEFAULT_VERIFY_RESTARTS).value


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def render_sweep(cfg: SweepConfig, jobs: int = 1) -> str:
    cfg.validate()
    f = cfg.functional
    out = []
    if cfg.figure in ("fig5", "rates"):
        rows = analysis.rate_curves(cfg.alphas)
        if cfg.figure == "rates":
            out.append(f"# {SCHEMA} rates: unknown information rate, base 3")
            out.append(",".join(analysis.RATE_HEADER))
            out += [",".join(f"{x:.10g}" for x in r) for r in rows]
        else:
            general = cfg.dist is InputDistribution.GENERAL
            out.append(f"# {SCHEMA} fig5: rates at the quantum bound, {cfg.dist.value} inputs")
            out.append("alpha,tau_pfb,tau_chain")
            for a, pg, pf, cg, cf in rows:
                out.append(",".join(f"{x:.10g}" for x in ((a, pg, cg) if general else (a, pf, cf))))
        return "\n".join(out) + "\n"

    rows, skipped = _grid_rows(cfg)
    if not rows:
        raise DomainError("no valid (P, S, G) point in the grid")
    desc = f"{f.label}, {cfg.dist.value} inputs, {skipped} invalid grid points skipped"
    if cfg.figure in ("fig1a", "fig2a"):
        out.append(f"# {SCHEMA} {cfg.figure}: I at G=1 for {desc}")
        out.append("P,S,I")
        out += [f"{p.P:.10g},{p.S:.10g},{b.value:.10g}" for p, b in rows]
    elif cfg.figure in ("fig1b", "fig2b"):
        out.append(f"# {SCHEMA} {cfg.figure}: I at S=0 for {desc}")
        out.append("P,G,I")
        out += [f"{p.P:.10g},{p.G:.10g},{b.value:.10g}" for p, b in rows]
    else:
        out.append(f"# {SCHEMA} grid: {desc}")
        header = "P,S,G,I,branch"
        values = [None] * len(rows)
        if cfg.oracle:
            header += ",oracle"
            values = _map(_oracle_value, [(f, p) for p, _ in rows], jobs)
        out.append(header)
        for (p, b), v in zip(rows, values):
            line = f"{p.P:.10g},{p.S:.10g},{p.G:.10g},{b.value:.10g},{b.branch.value}"
            if cfg.oracle:
                line += f",{v:.10g}"
            out.append(line)
    return "\n".join(out) + "\n"


def cmd_sweep(args) -> int:
    cfg = sweep_config(args)
    text = render_sweep(cfg, _jobs(args))
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise BadInputFile(f"cannot write {args.out}: {exc}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- verify --------------------------------------------------------------------


def verify_points(grid: int, uniform: bool):
    """Valid (P, S) pairs of the grid, and how many were skipped as invalid."""
    if uniform:
        return [(UNIFORM, UNIFORM)], 0
    points, skipped = [], 0
    for P in np.linspace(UNIFORM, 1.0, grid):
        for S in np.linspace(0.0, UNIFORM, grid):
            if _valid(MDParams(float(P), float(S))):
                points.append((float(P), float(S)))
            else:
                skipped += 1
    return points, skipped


def _verify_task(task):
    f, P, S, dists, restarts, seed = task
    reports = []
    general_value = None
    if "general" in dists or "factorizable" in dists:
        g = oracle.verify_theorem(f, MDParams(P, S))
        general_value = g.oracle_upper
        if "general" in dists:
            reports.append(g.to_dict())
    if "factorizable" in dists:
        r = oracle.verify_theorem(f, MDParams(P, S, dist=InputDistribution.FACTORIZABLE),
                                  restarts=restarts, seed=seed, general_value=general_value)
        reports.append(r.to_dict())
    return reports


def run_verify(functionals, grid=10, uniform=False, dists=("general", "factorizable"),
               restarts=DEFAULT_VERIFY_RESTARTS, seed=0, jobs=1) -> dict:
    points, skipped = verify_points(grid, uniform)
    tasks = [(f, P, S, tuple(dists), restarts, seed) for f in functionals for P, S in points]
    reports = [r for batch in _map(_verify_task, tasks, jobs) for r in batch]
    counts = {}
    for r in reports:
        key = f"{r['theorem']}:{r['classification']}"
        counts[key] = counts.get(key, 0) + 1
    discrepancies = sum(1 for r in reports if r["classification"] != "Match")
    return {
        "schema": REPORT_SCHEMA,
        "grid": 1 if uniform else grid,
        "seed": seed,
        "restarts": restarts,
        "functionals": [f.label for f in functionals],
        "skipped_invalid_points": skipped * len(functionals),
        "summary": {
            "points": len(reports),
            "match": len(reports) - discrepancies,
            "discrepancies": discrepancies,
            "by_theorem": dict(sorted(counts.items())),
        },
        "reports": reports,
    }


def cmd_verify(args) -> int:
    functionals = []
    if args.chain or not args.alpha:
        functionals.append(chain3())
    alphas = args.alpha if args.alpha else DEFAULT_VERIFY_ALPHAS
    functionals += [pfb(a) for a in alphas]
    dists = ("general", "factorizable") if args.dist == "both" else (args.dist,)
    if args.grid < 1:
        raise DomainError("grid must have at least one point per axis")
    result = run_verify(functionals, args.grid, args.uniform, dists, args.restarts,
                        args.seed, _jobs(args))
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise BadInputFile(f"cannot write {args.out}: {exc}")
        s = result["summary"]
        print(f"{s['points']} points: {s['match']} Match, {s['discrepancies']} discrepancies")
        for k, v in s["by_theorem"].items():
            print(f"  {k:<24} {v}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- certify -------------------------------------------------------------------


def cmd_certify(args) -> int:
    f = _functional(args)
    p = _params(args)
    v = analysis.certify_randomness(args.observed, f, p, strict=args.strict)
    out = {
        "functional": f.label, "P": p.P, "S": p.S, "dist": p.dist.value,
        "observed": v.observed, "threshold": v.threshold, "certified": v.certified,
        "margin": v.margin, "source": v.source,
    }
    lines = [f"{k:<12} {_fmt(out[k])}" for k in out]
    _emit(out, args.json, lines)
    return EXIT_OK


# -- simulate ------------------------------------------------------------------


def _load_model(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise BadInputFile(f"cannot read model {path}: {exc}")
    try:
        return oracle.EveModel.from_dict(data)
    except (DomainError, AttributeError) as exc:
        raise BadInputFile(f"malformed model {path}: {exc}")


def cmd_simulate(args) -> int:
    if args.table1:
        if args.P is None:
            raise DomainError("--table1 needs --P")
        p = MDParams(args.P, args.S)
        closedform.validate(p)
        model = oracle.table1_model(args.alpha, p)
        f = pfb(args.alpha)
    else:
        model = _load_model(args.model)
        f = _functional(args) if (args.chain or args.pfb is not None) else pfb(args.alpha)
    exact = oracle.evaluate_model(f, model)
    trials = sim.sample_trials(model, args.n, args.seed)
    if args.trials_csv:
        trials.to_csv(args.trials_csv)
    est = sim.estimate_bell(trials, f)
    marg = sim.empirical_input_marginals(trials)
    sigma = sim.marginal_sigma(args.n)
    worst = float(np.max(np.abs(marg - UNIFORM)) / sigma)
    z = (est.value - exact) / est.stderr if est.stderr > 0 else (0.0 if est.value == exact else math.inf)
    out = {
        "functional": f.label,
        "n": args.n,
        "seed": args.seed,
        "generator": sim.GENERATOR,
        "estimate": est.value,
        "stderr": est.stderr,
        "exact": exact,
        "z": z,
        "marginals": marg.tolist(),
        "max_marginal_sigma": worst,
        "marginals_ok": worst <= 3.0,
    }
    lines = [f"{k:<18} {_fmt(out[k])}" for k in
             ("functional", "n", "seed", "estimate", "stderr", "exact", "z",
              "max_marginal_sigma", "marginals_ok")]
    _emit(out, args.json, lines)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bellmd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="classical, quantum and no-signaling bounds")
    _add_functional(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("fake", help="largest value Eve can fake")
    _add_functional(p)
    _add_params(p)
    p.add_argument("--oracle", action="store_true", help="also solve the LP oracle")
    p.add_argument("--restarts", type=int, default=DEFAULT_VERIFY_RESTARTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fake)

    p = sub.add_parser("sweep", help="CSV surfaces for the figures or a custom grid")
    p.add_argument("figure", choices=["fig1a", "fig1b", "fig2a", "fig2b", "fig5", "rates", "grid"])
    _add_functional(p, required=False)
    p.add_argument("--alpha", type=float, default=1.0, help="alpha for the pfb figures")
    p.add_argument("--n", type=int, default=50, help="points per axis")
    p.add_argument("--dist", choices=[d.value for d in InputDistribution], default="general")
    p.add_argument("--P-range", nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--S-range", nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--G-range", nargs=3, metavar=("LO", "HI", "N"))
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="closed forms against the LP oracle over a grid")
    p.add_argument("--chain", action="store_true", help="include chain3 when --alpha is given")
    p.add_argument("--alpha", type=float, action="append", help="pfb alpha (repeatable)")
    p.add_argument("--uniform", action="store_true", help="only the uniform point P = S = 1/9")
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--dist", choices=["general", "factorizable", "both"], default="both")
    p.add_argument("--restarts", type=int, default=DEFAULT_VERIFY_RESTARTS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("certify", help="is an observed value beyond what Eve can fake?")
    _add_functional(p)
    _add_params(p)
    p.add_argument("--observed", type=float, required=True)
    p.add_argument("--strict", action="store_true", help="use the oracle when it beats the closed form")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="Monte-Carlo estimate from a hidden-variable model")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--table1", action="store_true", help="built-in four-strategy model")
    src.add_argument("--model", help="model JSON file")
    _add_functional(p, required=False)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--P", type=probability)
    p.add_argument("--S", type=probability, default=0.0)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials-csv")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BadInputFile as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except (InfeasibleParams, InfeasibleStrategy) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (RangeError, DomainError, UnsupportedFunctional, EmptyCell, NoSolution, BellMDError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
