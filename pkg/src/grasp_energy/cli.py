"""
grasp-energy command line.

    grasp-energy map   --l1 1.6 --l2 1.2 --r1 0.2 --r2 0.1 --w 0.8 --r 0.8 --mu-s 0.4 -o out/
    grasp-energy cage  ... same design/object flags ... -o out/
    grasp-energy sweep --preset desk -o store/ [--config cfg.json] [--set grid.dx=0.25]
    grasp-energy manip --store store/ --scenario both
    grasp-energy rank  --store store/ --object 0.4,0.1
    grasp-energy plot  --store store/ --figure cage_vs_tip

Angles are given in degrees.  Exit codes: 0 success, 1 validation error,
2 quarantined pairs present.
"""
import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .caging import caging_score, write_trajectories
from .contact_solver import ActuationCommand
from .energy_map import GridSpec, build_energy_map
from .kinematics import GrasperDesign, ObjectSpec
from .manipulation import SCENARIO_A, SCENARIO_B, write_report
from .plotting import (plot_best_designs, plot_cage_vs_tip, plot_manipulation, plot_map,
                       plot_param_ranges)
from .sweep import (ENV_JOBS, PRESETS, ConfigError, ScoreCache, SweepConfig, SweepResult,
                    apply_overrides, cage_vs_tip_table, default_jobs, manipulation_for_object,
                    rank_designs, run_sweep)

log = logging.getLogger("grasp_energy")

EXIT_OK, EXIT_INVALID, EXIT_QUARANTINE = 0, 1, 2


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for quarantined pairs
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _pair(text):
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {text!r}")
    return a, b


def _add_design_args(p):
    g = p.add_argument_group("design")
    g.add_argument("--l1", type=float, required=True)
    g.add_argument("--l2", type=float, required=True)
    g.add_argument("--r1", type=float, required=True)
    g.add_argument("--r2", type=float, required=True)
    g.add_argument("--w", type=float, required=True)
    g.add_argument("--theta1-limits", type=_pair, default=(0.0, 180.0), metavar="LO,HI",
                   help="proximal joint limits in degrees")
    g.add_argument("--theta2-limits", type=_pair, default=(-5.0, 90.0), metavar="LO,HI",
                   help="distal joint limits in degrees")
    g = p.add_argument_group("object and command")
    g.add_argument("--r", type=float, required=True, help="object radius")
    g.add_argument("--mu-s", type=float, required=True, help="static friction coefficient")
    g.add_argument("--f-left", type=float, default=1.0)
    g.add_argument("--f-right", type=float, default=1.0)
    g = p.add_argument_group("grid")
    g.add_argument("--dx", type=float, default=0.05)
    g.add_argument("--grid", default=None, metavar="X0,Y0,DX,DY,NX,NY",
                   help="explicit grid instead of the design's full reach")


def _design(args):
    t1 = tuple(np.deg2rad(args.theta1_limits))
    t2 = tuple(np.deg2rad(args.theta2_limits))
    return (GrasperDesign(args.l1, args.l2, args.r1, args.r2, args.w,
                          theta1_limits=t1, theta2_limits=t2),
            ObjectSpec(args.r, args.mu_s), ActuationCommand(args.f_left, args.f_right))


def _grid(args):
    if args.grid is None:
        return None
    parts = args.grid.split(",")
    if len(parts) != 6:
        raise UsageError("--grid needs X0,Y0,DX,DY,NX,NY")
    x0, y0, dx, dy = (float(v) for v in parts[:4])
    return GridSpec(x0, y0, dx, dy, int(parts[4]), int(parts[5]))


def _outdir(path):
    path = path or "."
    os.makedirs(path, exist_ok=True)
    return path


def _build(args):
    design, obj, cmd = _design(args)
    return build_energy_map(design, obj, cmd, grid=_grid(args), dx=args.dx, strict=False)


def cmd_map(args):
    emap = _build(args)
    out = _outdir(args.output)
    emap.to_csv(os.path.join(out, "map.csv"))
    with open(os.path.join(out, "map.json"), "w") as fh:
        json.dump(emap.header(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    plot_map(emap, os.path.join(out, "map.svg"))
    print(f"{emap.n_reachable} reachable of {emap.grid.nx * emap.grid.ny} points, "
          f"{int(emap.equilibrium.sum())} in equilibrium -> {out}")
    return EXIT_OK


def cmd_cage(args):
    emap = _build(args)
    out = _outdir(args.output)
    score = caging_score(emap, keep_trajectories=True)
    rec = dict(score.to_dict(), lambda_hat=score.normalized, n_reachable=emap.n_reachable)
    with open(os.path.join(out, "caging.json"), "w") as fh:
        json.dump(rec, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_trajectories(score.trajectories, os.path.join(out, "trajectories.jsonl"))
    print(json.dumps(rec, sort_keys=True))
    return EXIT_OK


def load_config(args):
    if args.config:
        with open(args.config) as fh:
            d = json.load(fh)
    else:
        d = dict(PRESETS[args.preset])
    d = apply_overrides(d, args.set)
    return SweepConfig.from_dict(d)


def cmd_sweep(args):
    config = load_config(args)
    out = args.output or config.output
    if not out:
        raise UsageError("sweep needs an output directory (-o)")
    jobs = args.jobs or default_jobs()

    def progress(k, n, rec):
        if args.verbose or k == n or k % max(1, n // 20) == 0:
            print(f"[{k}/{n}] {rec['status']} {rec['design']} {rec['object']}", flush=True)

    result = run_sweep(config, jobs=jobs, output=out, progress=progress)
    bad = result.quarantined
    print(f"{len(result.records)} pairs, {len(bad)} quarantined -> {out}")
    return EXIT_QUARANTINE if bad else EXIT_OK


def _objects(result, specs):
    if not specs:
        return list(result.objects)
    out = []
    for r, mu in specs:
        o = ObjectSpec(r, mu)
        if o not in result.objects:
            raise UsageError(f"object r={r:g}, mu_s={mu:g} is not in the sweep")
        out.append(o)
    return out


def _store(args):
    if not os.path.exists(os.path.join(args.store, "results.jsonl")):
        raise UsageError(f"{args.store} has no results.jsonl")
    return SweepResult.load(args.store)


def cmd_manip(args):
    result = _store(args)
    scen = [SCENARIO_A, SCENARIO_B] if args.scenario == "both" else [args.scenario]
    out = _outdir(args.output or os.path.join(args.store, "manip"))
    cache = ScoreCache(result, os.path.join(args.store, "extra_scores.jsonl"))
    reports = []
    for obj in _objects(result, args.object):
        for s in scen:
            rep, _ = manipulation_for_object(result, obj, s, cache)
            write_report(rep, os.path.join(out, f"report_{s}_r{obj.r:g}_mu{obj.mu_s:g}.json"))
            reports.append(rep)
            print(f"scenario {s} r={obj.r:g} mu_s={obj.mu_s:g}: metric {rep['metric']:.6g}")
    plot_manipulation(reports, os.path.join(out, "manipulation.svg"))
    return EXIT_OK


def cmd_rank(args):
    result = _store(args)
    for obj in _objects(result, args.object):
        print(f"r={obj.r:g} mu_s={obj.mu_s:g}")
        for k, d in enumerate(rank_designs(result, obj)[: args.top]):
            rec = result.record(d, obj)
            print(f"  {k + 1:3d}  l1={d.l1:g} l2={d.l2:g} r1={d.r1:g} r2={d.r2:g} w={d.w:g}  "
                  f"lambda={rec.get('lambda', 0.0):.4f} caged={rec.get('n_caged', 0)} "
                  f"tip={rec.get('n_tip', 0)}")
    return EXIT_OK


def _load_reports(path):
    reps = []
    if os.path.isdir(path):
        for name in sorted(os.listdir(path)):
            if name.startswith("report_") and name.endswith(".json"):
                with open(os.path.join(path, name)) as fh:
                    reps.append(json.load(fh))
    return reps


def cmd_plot(args):
    out = _outdir(args.output or args.store)
    path = os.path.join(out, f"{args.figure}.svg")
    has_store = os.path.exists(os.path.join(args.store, "results.jsonl"))
    result = SweepResult.load(args.store) if has_store else None
    if result is None or not result.records:
        log.warning("empty result store: %s", args.store)
    if args.figure == "cage_vs_tip":
        plot_cage_vs_tip(cage_vs_tip_table(result) if result else {}, path)
    elif args.figure == "param_ranges":
        ranges = {}
        for rep in _load_reports(os.path.join(args.store, "manip")):
            if rep["scenario"] == SCENARIO_B:
                o = rep["object"]
                ranges[f"r={o['r']:g} mu_s={o['mu_s']:g}"] = rep["parameter_ranges"]
        if result and not ranges:
            cache = ScoreCache(result, os.path.join(args.store, "extra_scores.jsonl"))
            for obj in result.objects:
                rep, _ = manipulation_for_object(result, obj, SCENARIO_B, cache)
                ranges[f"r={obj.r:g} mu_s={obj.mu_s:g}"] = rep["parameter_ranges"]
        plot_param_ranges(ranges, path)
    else:
        maps = []
        if result:
            cmd = result.config.actuation
            for obj in result.objects:
                best = rank_designs(result, obj)[0]
                maps.append(build_energy_map(best, obj, cmd, dx=result.config.dx, strict=False))
        plot_best_designs(maps, path)
    print(path)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="grasp-energy", description=__doc__.split("\n\n")[0].strip(),
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("map", help="build one energy map (CSV, JSON header, SVG)")
    _add_design_args(m)
    m.add_argument("-o", "--output", default=".")
    m.set_defaults(func=cmd_map)

    c = sub.add_parser("cage", help="caging score and trajectories of one map")
    _add_design_args(c)
    c.add_argument("-o", "--output", default=".")
    c.set_defaults(func=cmd_cage)

    s = sub.add_parser("sweep", help="run a design-space sweep")
    s.add_argument("--preset", choices=sorted(PRESETS), default="smoke")
    s.add_argument("--config", default=None, help="JSON config file (overrides --preset)")
    s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="dotted config override, repeatable")
    s.add_argument("-j", "--jobs", type=int, default=None,
                   help=f"worker processes (default ${ENV_JOBS} or 1)")
    s.add_argument("-o", "--output", default=None)
    s.set_defaults(func=cmd_sweep)

    for name, func, hlp in (("manip", cmd_manip, "manipulation metric reports"),
                            ("rank", cmd_rank, "designs ranked by caging score"),
                            ("plot", cmd_plot, "figures from a result store")):
        q = sub.add_parser(name, help=hlp)
        q.add_argument("--store", required=True)
        q.add_argument("--object", type=_pair, action="append", metavar="R,MU_S")
        q.set_defaults(func=func)
        if name == "manip":
            q.add_argument("--scenario", choices=[SCENARIO_A, SCENARIO_B, "both"], default="both")
            q.add_argument("-o", "--output", default=None)
        elif name == "rank":
            q.add_argument("--top", type=int, default=10)
        else:
            q.add_argument("--figure", choices=["cage_vs_tip", "param_ranges", "best_designs"],
                           default="cage_vs_tip")
            q.add_argument("-o", "--output", default=None)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
