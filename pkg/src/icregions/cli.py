"""Command-line entry point: ``icregions <command> ...``.

Exit codes: 0 success (or Provable), 1 usage/input error, 2 negative verdict.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import channels as chmod
from . import fm, geometry, prover, sim
from .regions import RegionError

EXIT_OK, EXIT_INPUT, EXIT_NEGATIVE = 0, 1, 2
THEOREMS = ("modulo", "det-cap", "zchannel", "int-noise", "cribbing", "state-cribbing")
MAX_SLICES = 5_000_000


class CLIError(Exception):
    pass


def _default_step(args, alphabet_size: int) -> float:
    if args.grid_step is not None:
        return args.grid_step
    return 0.01 if alphabet_size <= 2 else 0.05


def _summary_csv(rows: list[tuple[str, float]]) -> str:
    return "boundary,max_sum_rate\n" + "".join(f"{name},{value:.12g}\n" for name, value in rows)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _sum_rate(bd: geometry.RegionBoundary) -> float:
    w = [1.0 if lab in ("R1", "R2") else 0.0 for lab in bd.labels]
    return geometry.max_weighted_sum(bd, w)


# -- region ------------------------------------------------------------------------

def _load_channel(args, expected, theorem):
    if not args.channel:
        raise CLIError(f"--theorem {theorem} needs --channel FILE")
    try:
        ch = chmod.load_channel(args.channel)
    except (OSError, ValueError, KeyError) as exc:
        raise CLIError(f"cannot read channel file: {exc}") from None
    if theorem == "state-cribbing" and isinstance(ch, chmod.CribbingZIC):
        ch = chmod.StateCribbingZIC.from_cribbing(ch)
    if not isinstance(ch, expected):
        raise CLIError(f"theorem {theorem} does not apply to a {type(ch).__name__} channel")
    return ch


def _region_problem(args) -> geometry.GridProblem:
    t = args.theorem
    if t == "modulo":
        if args.m is None or args.lam is None:
            raise CLIError("--theorem modulo needs --m and --lambda")
        size = args.m ** args.levels
        return geometry.modulo_problem(size, args.lam, _default_step(args, size))
    if t in ("det-cap", "zchannel", "int-noise"):
        if args.channel:
            ch = _load_channel(args, chmod.DeterministicSDZIC, t)
        elif args.m is not None and args.lam is not None:
            ch = chmod.expand_modulo(args.m, args.levels, args.lam)
        else:
            raise CLIError(f"--theorem {t} needs --channel FILE or --m/--lambda")
        chmod.require_injective(ch)
        step = _default_step(args, max(len(ch.x1), len(ch.x2)))
        if t == "int-noise":
            return geometry.int_noise_problem(ch, step)
        return geometry.det_capacity_problem(ch, step, zchannel=(t == "zchannel"))
    expected = chmod.CribbingZIC if t == "cribbing" else chmod.StateCribbingZIC
    ch = _load_channel(args, expected, t)
    chmod.require_injective(ch)
    step = args.grid_step if args.grid_step is not None else 0.1
    return geometry.cribbing_problem(ch, args.w_size, step, args.w_cap)


def cmd_region(args) -> int:
    problem = _region_problem(args)
    if len(problem) > MAX_SLICES:
        raise CLIError(f"grid has {len(problem)} slices; raise --grid-step")
    bd = problem.closure()
    polys = []
    for k, src in enumerate(bd.provenance):
        item = {"slice": int(src), "polytope": problem.member(int(src)).to_json()}
        if bd.params is not None:
            item["params"] = [float(v) for v in bd.params[k]]
        polys.append(item)
    out = Path(args.out)
    _write(out.with_suffix(".csv"), bd.to_csv())
    _write(out.with_suffix(".json"),
           json.dumps({"theorem": args.theorem, "boundary": bd.to_json(), "polytopes": polys}, indent=1) + "\n")
    _write(out.with_name(out.stem + "_summary.csv"), _summary_csv([(args.theorem, _sum_rate(bd))]))
    print(f"{len(bd.points)} extreme points; max sum-rate {_sum_rate(bd):.6f}")
    return EXIT_OK


# -- figures ------------------------------------------------------------------------

def _fig_step(args, default: float) -> float:
    return args.grid_step if args.grid_step is not None else default


def cmd_figure(args) -> int:
    outdir = Path(args.out_dir)
    if args.name == "fig8":
        bd = geometry.modulo_region(2, 0.5, _fig_step(args, 0.01))
        files = {"fig8_capacity.csv": bd.to_csv(),
                 "fig8_summary.csv": _summary_csv([("capacity", _sum_rate(bd))])}
    else:
        levels = 2 if args.name == "fig9a" else 3
        cap = geometry.modulo_region_reduced(2 ** levels, 0.5)
        sep = geometry.separation_problem(levels, _fig_step(args, 0.02)).closure()
        com = geometry.communicate_state_problem(levels, _fig_step(args, 0.05 if levels > 2 else 0.01)).closure()
        rows = [("capacity", _sum_rate(cap)), ("separation", _sum_rate(sep)), ("communicate_state", _sum_rate(com))]
        p = args.name
        files = {f"{p}_capacity.csv": cap.to_csv(), f"{p}_separation.csv": sep.to_csv(),
                 f"{p}_communicate_state.csv": com.to_csv(), f"{p}_summary.csv": _summary_csv(rows),
                 f"{p}_gap.csv": "scheme,gap\n"
                                 f"separation,{geometry.gap(cap, sep):.12g}\n"
                                 f"communicate_state,{geometry.gap(cap, com):.12g}\n"}
    for name, text in files.items():
        _write(outdir / name, text)
    print("wrote " + ", ".join(sorted(files)))
    return EXIT_OK


# -- fm / prove / simulate -------------------------------------------------------------

def cmd_fm(args) -> int:
    try:
        system = fm.parse_system(Path(args.file).read_text())
    except OSError as exc:
        raise CLIError(f"cannot read {args.file}: {exc}") from None
    targets = [v for v in args.eliminate.split(",") if v]
    out = fm.eliminate(system, targets)
    if not args.keep_redundant:
        out = fm.remove_redundant(out, geometric=not args.pairwise)
    text = out.to_text()
    if out.pairwise_only and not args.pairwise:
        text = "# redundancy removal used pairwise checks only\n" + text
    if args.out:
        _write(Path(args.out), text)
    sys.stdout.write(text)
    return EXIT_NEGATIVE if out.infeasible else EXIT_OK


def cmd_prove(args) -> int:
    try:
        query = prover.parse_query(Path(args.file).read_text())
    except OSError as exc:
        raise CLIError(f"cannot read {args.file}: {exc}") from None
    res = prover.prove(query.target, query.constraints)
    prover.verify_certificate(query.target, query.constraints, res, args.tolerance)
    print(res.verdict)
    if res.provable:
        G = prover.elemental_inequalities(query.space.k)
        used = np.nonzero(res.y > 1e-12)[0]
        print(f"certificate: {len(used)} elemental inequalities, {len(res.z)} constraint multipliers")
        for lab, z in zip(query.constraints.labels, res.z):
            print(f"  {lab}: {z:.6g}")
    else:
        h = res.ray
        print("violating point of the constrained cone (target = -1):")
        for m in range(query.space.dim):
            if abs(h[m]) > 1e-12:
                print(f"  H({','.join(query.space.subset_names(m + 1))}) = {h[m]:.6g}")
    return EXIT_OK if res.provable else EXIT_NEGATIVE


def cmd_simulate(args) -> int:
    seed = args.seed if args.seed is not None else 0
    cfg = sim.SimConfig(args.n, args.r1, args.r1p, args.lam, args.trials, seed)
    res = sim.simulate(cfg, args.workers)
    text = sim.CSV_HEADER + "\n" + sim.csv_row(cfg, res, sim.analytic_error(cfg)) + "\n"
    if args.out:
        _write(Path(args.out), text)
    sys.stdout.write(text)
    return EXIT_OK


# -- parser -------------------------------------------------------------------------

def _globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--tolerance", type=float, default=argparse.SUPPRESS if suppress else 1e-9,
                   help="numerical tolerance for certificates and containment")
    p.add_argument("--grid-step", type=float, default=d, help="pmf grid step (must divide 1)")
    p.add_argument("--seed", type=int, default=d, help="64-bit seed for randomized commands")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="icregions", description=__doc__.splitlines()[0])
    _globals(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("region", help="convex closure of a region formula over a pmf grid")
    _globals(r, suppress=True)
    r.add_argument("--theorem", choices=THEOREMS, required=True)
    r.add_argument("--channel", help="channel JSON file")
    r.add_argument("--m", type=int, help="modulus of the modulo-additive channel")
    r.add_argument("--levels", type=int, default=1)
    r.add_argument("--lambda", dest="lam", type=float)
    r.add_argument("--w-size", type=int, default=2, help="auxiliary alphabet size for cribbing")
    r.add_argument("--w-cap", type=int, help="cardinality cap for W (default |Y2|+3)")
    r.add_argument("--out", default="region", help="output prefix (.csv, .json, _summary.csv)")
    r.set_defaults(func=cmd_region)

    f = sub.add_parser("figure", help="regenerate figure data")
    _globals(f, suppress=True)
    f.add_argument("name", choices=("fig8", "fig9a", "fig9b"))
    f.add_argument("--out-dir", default=".")
    f.set_defaults(func=cmd_figure)

    e = sub.add_parser("fm", help="Fourier-Motzkin elimination")
    _globals(e, suppress=True)
    e.add_argument("file")
    e.add_argument("--eliminate", required=True, help="comma-separated variables")
    e.add_argument("--keep-redundant", action="store_true")
    e.add_argument("--pairwise", action="store_true", help="skip the geometric redundancy test")
    e.add_argument("--out")
    e.set_defaults(func=cmd_fm)

    q = sub.add_parser("prove", help="Shannon-type inequality prover")
    _globals(q, suppress=True)
    q.add_argument("file")
    q.set_defaults(func=cmd_prove)

    s = sub.add_parser("simulate", help="Monte-Carlo run of stuck-at multicoding")
    _globals(s, suppress=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--r1", type=float, required=True)
    s.add_argument("--r1p", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except chmod.InjectivityError as exc:
        w = exc.witness
        print(f"error: channel is not injective: x2={w.x2}, t1={w.t1_a} and t1={w.t1_b} both give y2={w.y2}",
              file=sys.stderr)
        return EXIT_INPUT
    except (CLIError, ValueError, RegionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except prover.ProverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
