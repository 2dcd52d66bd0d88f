"""Command line entry point: ``edgecache <command> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .errors import EdgeCacheError
from .harness import config as cfg
from .harness.export import (
    plot_placement_svg,
    plot_summary_svg,
    read_results_csv,
    write_placement_csv,
    write_results_csv,
)
from .harness.runner import make_scene, run, verify
from .optimizer import write_history_csv

log = logging.getLogger("edgecache")


def _spec(args, **changes):
    spec = cfg.load_config(args.config)
    seed = args.seed
    if seed is None and cfg.SEED_ENV in os.environ:
        seed = cfg.default_seed()
    if seed is not None:
        changes["seeds"] = (int(seed),)
    return spec.replace(**changes) if changes else spec


def _write_outputs(spec, result, out_dir, stem):
    out_dir = Path(out_dir)
    csv_path = write_results_csv(result, out_dir / f"{stem}.csv")
    plot_summary_svg(result, out_dir / f"{stem}.svg", title=spec.name)
    written = [csv_path, out_dir / f"{stem}.svg"]
    first = result.records[0].seed if result.records else None
    for rec in result.records:
        if rec.error is not None or rec.seed != first:
            continue
        tag = f"{stem}_{rec.scheme}" + (f"_{rec.sweep_param}{rec.sweep_value}" if rec.sweep_param else "")
        if rec.history is not None:
            written.append(write_history_csv(rec, out_dir / f"{tag}_history_seed{rec.seed}.csv"))
        if rec.placement is not None and not rec.sweep_param:
            topo = make_scene(spec, rec.seed).topology
            written.append(write_placement_csv(rec.placement, topo, out_dir / f"{tag}_placement_seed{rec.seed}.csv"))
            written.append(plot_placement_svg(rec.placement.eta, rec.placement.capacities, topo.node_class(),
                                              out_dir / f"{tag}_placement_seed{rec.seed}.svg"))
    return written


def _report(result):
    for (scheme, value), (mean, std, n) in sorted(result.aggregates().items(), key=lambda kv: str(kv[0])):
        point = f" @ {value}" if value != "" else ""
        print(f"{scheme}{point}: mean sigma={mean:.4f} std={std:.4f} n={n}")
    for rec in result.errors:
        print(f"error: {rec.scheme} seed={rec.seed} {rec.sweep_param}={rec.sweep_value}: {rec.error}",
              file=sys.stderr)


def cmd_optimize(args):
    spec = _spec(args, schemes=("mpso",))
    result = run(spec)
    _report(result)
    _write_outputs(spec, result, args.out_dir, "optimize")
    return 0


def cmd_baseline(args):
    spec = _spec(args, schemes=(args.scheme,))
    result = run(spec)
    _report(result)
    _write_outputs(spec, result, args.out_dir, f"baseline_{args.scheme}")
    return 0


def cmd_run(args):
    spec = _spec(args)
    result = run(spec)
    _report(result)
    _write_outputs(spec, result, args.out_dir, "run")
    return 0


def cmd_sweep(args):
    cast = float if args.param == "alpha" else int
    values = tuple(cast(v) for v in args.values)
    iters = tuple(args.iters) if args.iters else None
    spec = _spec(args, sweep=cfg.Sweep(args.param, values, iters))
    result = run(spec)
    _report(result)
    _write_outputs(spec, result, args.out_dir, f"sweep_{args.param}")
    return 0


def cmd_verify(args):
    spec = _spec(args)
    report = verify(spec, trials=args.trials, phy_trials=args.phy_trials)
    print(report)
    print("verification " + ("passed" if report.passed else "FAILED"))
    return 1 if (args.strict and not report.passed) else 0


def cmd_export(args):
    rows = read_results_csv(args.results)
    out = Path(args.out) if args.out else Path(args.results).with_suffix(f".{args.format}")
    if args.format == "svg":
        plot_summary_svg(rows, out)
    else:
        if out.resolve() == Path(args.results).resolve():
            print(f"{out} already is the CSV export", file=sys.stderr)
            return 0
        out.write_text(Path(args.results).read_text())
    print(out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="edgecache", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("config", help="config file or preset name (e.g. paper-sec5)")
        p.add_argument("--seed", type=int, default=None,
                       help=f"run a single seed (default: ${cfg.SEED_ENV} if set, else the config's seeds)")
        p.add_argument("--out-dir", default="results")
        return p

    p = with_config(sub.add_parser("optimize", help="run M-PSO on every seed"))
    p.set_defaults(func=cmd_optimize)

    p = with_config(sub.add_parser("baseline", help="evaluate a baseline placement"))
    p.add_argument("--scheme", choices=("random", "equal"), required=True)
    p.set_defaults(func=cmd_baseline)

    p = with_config(sub.add_parser("run", help="run every configured scheme"))
    p.set_defaults(func=cmd_run)

    p = with_config(sub.add_parser("sweep", help="sweep one parameter"))
    p.add_argument("--param", choices=cfg.SWEEP_PARAMS, required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--iters", nargs="+", type=int, help="max_iters per sweep value")
    p.set_defaults(func=cmd_sweep)

    p = with_config(sub.add_parser("verify", help="check analytic values against Monte Carlo oracles"))
    p.add_argument("--trials", type=int, default=10**6)
    p.add_argument("--phy-trials", type=int, default=10**5)
    p.add_argument("--strict", action="store_true", help="exit 1 when any check fails")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="re-export a results CSV as csv or svg")
    p.add_argument("results")
    p.add_argument("--format", choices=("csv", "svg"), required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (EdgeCacheError, OSError) as exc:
        print(f"edgecache: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
