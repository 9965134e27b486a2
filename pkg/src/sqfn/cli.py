"""Command-line front end: gen, apply, verify, sweep.

Exit codes: 0 all checks pass, 1 a check failed (the report is still
written), 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import lab
from ._parallel import set_max_workers
from .averaging import ScaleGrid
from .field import GridSpec, PlaneWave, ScalarField, lp_norm, parse_generator, sample
from .io import load_field, save_field
from .maximal import hl_maximal, maximal_representation, spherical_maximal
from .spectral import half_laplacian, riesz
from .squarefn import (mu_omega, sato_sigma, square_S, square_S_tilde, square_T,
                       square_T_tilde, square_W)
from .weights import WeightSpec, weighted_lp_norm

SUITES = ("representation", "isometry", "pointwise", "parts", "polarization",
          "mollifier", "maximal")
OPS = ("T", "S", "W", "Ttilde", "Stilde", "muomega", "sigma", "riesz", "halflap",
       "sphmax", "hlmax")


class UsageError(Exception):
    pass


def _first_coordinate(u):
    return u[:, 0]


# ---------------------------------------------------------------------------
# argument parsing

def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker cap; 1 gives byte-identical reports")
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help="key = value file of defaults")

    p = argparse.ArgumentParser(prog="sqfn", description=__doc__.splitlines()[0],
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="sample a field to a file")
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--size", type=int, default=256)
    g.add_argument("--box", type=float, default=1.0)
    g.add_argument("--gen", default="gaussian:sigma=0.1")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    a = sub.add_parser("apply", parents=[common], help="apply an operator to a field file")
    a.add_argument("--op", choices=OPS, required=True)
    a.add_argument("--in", dest="inp", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--tmin", type=float, default=None, help="default h")
    a.add_argument("--tmax", type=float, default=None, help="default L/4")
    a.add_argument("--scales-per-octave", type=int, default=8)
    a.add_argument("--p", type=float, default=2.0, help="exponent of the reported norm")
    a.add_argument("--alpha", default="none", help="power-weight exponent for the reported norm")
    a.add_argument("--eps", type=float, default=0.5, help="sigma: kernel exponent epsilon")
    a.add_argument("--component", type=int, default=0, help="riesz: output component")
    a.add_argument("--tails", action="store_true", help="close the scale integral beyond the window")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--dim", type=int, default=2)
    v.add_argument("--size", type=int, default=256)
    v.add_argument("--box", type=float, default=1.0)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--report", required=True)
    v.add_argument("--format", choices=("csv", "json"), default="json")

    s = sub.add_parser("sweep", parents=[common], help="norm-equivalence sweep")
    s.add_argument("--suite", choices=("equivalence",), default="equivalence")
    s.add_argument("--p-list", default="1.5,2,3")
    s.add_argument("--alpha", default="none")
    s.add_argument("--corpus-size", type=int, default=10)
    s.add_argument("--dim", type=int, default=2)
    s.add_argument("--size", type=int, default=256)
    s.add_argument("--box", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--report", required=True)
    s.add_argument("--format", choices=("csv", "json"), default="json")
    return p


def read_config(path) -> dict:
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}") from e
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{k}: expected 'key = value'")
        out[key.strip().lstrip("-").replace("-", "_")] = val.strip()
    return out


def parse_args(argv):
    parser = _parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, rest = pre.parse_known_args(argv)
    command = next((a for a in rest if a in ("gen", "apply", "verify", "sweep")), None)
    if known.config and command:
        cfg = read_config(known.config)
        sp = parser._subparsers._group_actions[0].choices[command]
        dests = {act.dest: act for act in sp._actions}
        for key, val in cfg.items():
            key = "inp" if key == "in" else key
            if key not in dests or key in ("help", "config"):
                raise UsageError(f"unknown config key {key!r}")
            act = dests[key]
            if act.type is not None:
                try:
                    val = act.type(val)
                except ValueError as e:
                    raise UsageError(f"bad value for {key}: {val!r}") from e
            if act.choices is not None and val not in act.choices:
                raise UsageError(f"bad value for {key}: {val!r}")
            # config values become defaults; explicit flags still win
            act.default = val
            act.required = False
    return parser.parse_args(argv)


# ---------------------------------------------------------------------------
# commands

def _grid(args) -> GridSpec:
    try:
        return GridSpec(args.dim, args.size, args.box)
    except ValueError as e:
        raise UsageError(str(e)) from e


def _alpha(text):
    if text is None or str(text).lower() == "none":
        return None
    return WeightSpec(float(text))


def cmd_gen(args) -> int:
    grid = _grid(args)
    gen = parse_generator(args.gen, seed=args.seed)
    save_field(sample(grid, gen), args.out)
    return 0


def cmd_apply(args) -> int:
    f = load_field(args.inp)
    grid = f.grid
    tmin = grid.h if args.tmin is None else args.tmin
    tmax = grid.L / 4 if args.tmax is None else args.tmax
    sc = ScaleGrid.for_grid(grid, tmin, tmax, args.scales_per_octave)
    op = args.op
    tails = args.tails
    if op == "T":
        out = square_T(f, sc, tails=tails)
    elif op == "S":
        out = square_S(f, sc, tails=tails)
    elif op == "W":
        out = square_W(f, sc, tails=tails)
    elif op == "Ttilde":
        out = square_T_tilde(f, sc, tails=tails)
    elif op == "Stilde":
        out = square_S_tilde(f, sc, tails=tails)
    elif op == "muomega":
        out = mu_omega(_first_coordinate, f, sc, tails=tails)
    elif op == "sigma":
        out = sato_sigma(_first_coordinate, args.eps, f, sc, tails=tails)
    elif op == "riesz":
        if not 0 <= args.component < grid.n:
            raise UsageError("riesz component out of range")
        out = riesz(f)[args.component]
    elif op == "halflap":
        out = half_laplacian(f)
    elif op == "sphmax":
        out = spherical_maximal(f, sc)
    else:
        out = hl_maximal(f, sc)
    save_field(out, args.out)
    w = _alpha(args.alpha)
    norm = weighted_lp_norm(out, w, args.p) if w else lp_norm(out, args.p)
    print(f"{op}: norm_p={args.p:g} alpha={args.alpha} value={norm!r}")
    return 0


def _merge(name, params, reports) -> lab.ExperimentReport:
    items = []
    for r in reports:
        for it in r.items:
            items.append({"experiment": r.experiment, **it, "pass": r.passed})
    constants = {}
    for r in reports:
        for k, v in r.constants.items():
            constants.setdefault(k, v)
    thresholds = {}
    for r in reports:
        thresholds.update(r.thresholds)
    return lab.ExperimentReport(name, params, items, constants, thresholds,
                                passed=all(r.passed for r in reports))


def run_suite(suite: str, grid: GridSpec, seed: int) -> lab.ExperimentReport:
    h, L, n = grid.h, grid.L, grid.n
    params = {"suite": suite, "n": n, "N": grid.N, "L": L, "seed": seed}
    if suite == "representation":
        reps = [lab.verify_representation(f, t, name=d)
                for d, f in lab.smooth_corpus(grid, 6, seed)
                for t in (L / 32, L / 16, L / 8) if t >= h]
    elif suite == "isometry":
        sc = ScaleGrid.for_grid(grid, h, L / 4)
        kmax = grid.N / 32 if n == 1 else grid.N / 8
        corpus = lab.bandlimited_corpus(grid, 5, seed, kmin=8, kmax=kmax)
        reps = [lab.estimate_isometry_constants(corpus, sc)]
    elif suite in ("pointwise", "parts"):
        reps = []
        corpus = lab.smooth_corpus(grid, 4, seed)
        if suite == "pointwise":
            sc = ScaleGrid.covering(8 * h, L / 4)
            for d, f in corpus:
                reps.append(lab.verify_pointwise_inequality(f, sc, "stated", name=d))
                reps.append(lab.verify_pointwise_inequality(f, sc, "sqrt", name=d))
        d, f = corpus[0]
        for x in _probe_points(f):
            reps.append(lab.verify_parts_identity(f, x, 8 * h, L / 8))
    elif suite == "polarization":
        sc = ScaleGrid.for_grid(grid, h, L / 4)
        kmax = grid.N / 32 if n == 1 else grid.N / 8
        (_, g), (_, q) = lab.bandlimited_corpus(grid, 2, seed, kmin=8, kmax=kmax)
        wave = sample(grid, PlaneWave((int(kmax) + 4,) + (0,) * (n - 1)))
        reps = [lab.verify_polarization(g, g, sc), lab.verify_polarization(g, q, sc),
                lab.verify_polarization(g, wave, sc)]
    elif suite == "mollifier":
        sc = ScaleGrid.covering(8 * h, L / 4)
        reps = [lab.verify_mollifier_domination(f, e, sc, name=d)
                for d, f in lab.smooth_corpus(grid, 3, seed) for e in (4 * h, 8 * h)]
    elif suite == "maximal":
        sc = ScaleGrid.covering(8 * h, L / 4)
        reps = []
        for d, f in lab.smooth_corpus(grid, 3, seed):
            a = spherical_maximal(f, sc).values
            b = maximal_representation(f, sc).values
            rel = float(np.abs(a - b).max() / max(np.abs(a).max(), 1e-300))
            reps.append(lab.ExperimentReport(
                "maximal", params, [{"field": d, "relative_discrepancy": rel}],
                thresholds={"relative_discrepancy": 1e-3}, passed=rel <= 1e-3))
    else:
        raise UsageError(f"unknown suite {suite!r}")
    return _merge(suite, params, reps)


def _probe_points(f: ScalarField, count: int = 5):
    """Lattice points where |f| is at least 10% of its maximum, spread out."""
    g = f.grid
    mask = np.abs(f.values) >= 0.1 * np.abs(f.values).max()
    idx = np.argwhere(mask)
    pick = np.linspace(0, len(idx) - 1, count).round().astype(int)
    return [g.point(idx[i]) for i in pick]


def cmd_verify(args) -> int:
    rep = run_suite(args.suite, _grid(args), args.seed)
    rep.save(args.report, args.format)
    return 0 if rep.passed else 1


def cmd_sweep(args) -> int:
    grid = _grid(args)
    try:
        p_list = [float(v) for v in str(args.p_list).split(",") if v.strip()]
    except ValueError as e:
        raise UsageError(f"bad --p-list {args.p_list!r}") from e
    if not p_list or any(p < 1 for p in p_list):
        raise UsageError("p values must be >= 1")
    w = _alpha(args.alpha)
    corpus = lab.smooth_corpus(grid, args.corpus_size, args.seed)
    try:
        rep = lab.norm_equivalence_sweep(corpus, p_list, w)
    except ValueError as e:
        raise UsageError(str(e)) from e
    rep.params["seed"] = args.seed
    rep.save(args.report, args.format)
    return 0 if rep.passed else 1


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 2
    except UsageError as e:
        print(f"sqfn: error: {e}", file=sys.stderr)
        return 2
    try:
        threads = getattr(args, "threads", None)
        if threads is not None:
            if threads < 1:
                raise UsageError("--threads must be >= 1")
            set_max_workers(threads)
        cmd = {"gen": cmd_gen, "apply": cmd_apply, "verify": cmd_verify,
               "sweep": cmd_sweep}[args.command]
        return cmd(args)
    except UsageError as e:
        print(f"sqfn: error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"sqfn: error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
