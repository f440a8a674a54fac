"""Command-line entry point.

Every sub-command takes ``--config FILE`` (flat JSON) plus ``--set key=value``
overrides; stage commands read and write the same files the pipeline writes.
Exit codes: 0 success, 1 stage failure, 2 configuration error, 3 all trials failed.
"""
import argparse
import sys

from . import pipeline as pl
from .config import ConfigError, RunConfig, parse_value
from .planner import NoPathFound
from .simulator import run_trial
from .spline import IrregularSpline, SplineCollision, build_grid, fit_spline
from .timescale import BaselineDiverged
from .workspace import WorkspaceError
from ._io import atomic_write

EXIT_OK, EXIT_STAGE, EXIT_CONFIG, EXIT_ALL_FAILED = 0, 1, 2, 3


def load_config(args):
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    sets = {}
    for item in args.set or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        sets[key.strip()] = parse_value(val)
    cfg = cfg.override(**sets)
    cfg = cfg.override(trials=getattr(args, "trials", None),
                       workers=getattr(args, "workers", None),
                       out_dir=getattr(args, "out_dir", None),
                       repeat=getattr(args, "repeat", None))
    if getattr(args, "seed", None) is not None:
        cfg = cfg.override(seed=args.seed)
    return cfg.validate()


def cmd_gen_world(cfg, args):
    w = pl.make_world(cfg, cfg.seed)
    atomic_write(args.out, pl.world_text(w, pl.provenance(cfg, cfg.seed, "gen-world")))
    print(f"wrote {args.out} ({len(w.obstacles)} obstacles)")


def cmd_plan(cfg, args):
    w, _ = pl.load_world(args.world)
    path, _, _, infl, attempts = pl.prepare_reference(w, cfg, cfg.seed)
    atomic_write(args.out, pl.path_text(path, pl.provenance(cfg, cfg.seed, "plan",
                                                            inflation=infl, attempts=attempts)))
    print(f"wrote {args.out} ({len(path)} waypoints, inflation {infl})")


def cmd_fit(cfg, args):
    path, meta = pl.load_path(args.path)
    ref = fit_spline(path, cfg.horizon)
    seed = meta["seed"] if meta else cfg.seed
    atomic_write(args.out, pl.spline_text(ref, pl.provenance(cfg, seed, "fit")))
    print(f"wrote {args.out} ({len(ref.knots) - 1} cubic pieces)")


def _grid(cfg, args):
    w, _ = pl.load_world(args.world)
    ref, _ = pl.load_spline(args.spline)
    return w, build_grid(ref, cfg.M, w)


def cmd_scale(cfg, args):
    w, g = _grid(cfg, args)
    profile, log = pl.scale_reference(g, cfg, cfg.seed, w)
    atomic_write(args.out, pl.profile_text(profile, pl.provenance(cfg, cfg.seed, "scale")))
    s = pl.profile_stats(profile)
    print(f"wrote {args.out}: baseline violations {log.n_violations}, min alpha "
          f"{s['min_alpha']:.3f}, mean alpha {s['mean_alpha']:.3f}, "
          f"modified {s['modified_pct']:.1f}%")


def cmd_run(cfg, args):
    w, g = _grid(cfg, args)
    profile = pl.load_profile(args.profile)[0] if args.profile else None
    case = "scaled" if profile is not None else "nominal"
    res = run_trial(w, g, profile, cfg.tracker(), cfg.sim(cfg.seed))
    atomic_write(args.out, pl.trial_text(res, pl.provenance(cfg, cfg.seed, "run", case=case,
                                                            trial=args.trial)))
    m = pl.mt.trial_metrics(res, cfg.exclude_post_arrival)
    print(f"wrote {args.out}: {res.status} after {len(res)} samples, "
          f"delta>0 {m.pct_delta_pos:.2f}%, mean delta {m.mean_delta:.3f}")


def cmd_trials(cfg, args):
    indices = range(cfg.trials) if not args.only else args.only
    out = pl.run_trials(cfg, indices)
    n_ok = sum(s["status"] == "ok" for s in out)
    for s in out:
        if s["status"] != "ok":
            print(f"trial {s['trial']} failed: {s['reason']}", file=sys.stderr)
    print(f"{n_ok} of {len(out)} trials completed in {cfg.out_dir}")
    return EXIT_OK if n_ok else EXIT_ALL_FAILED


def _summarize(report):
    print(f"{report['n_ok']} of {report['n_requested']} trials completed")
    if report["n_ok"]:
        for name in ("pct_delta_pos", "mean_delta", "max_delta", "mean_speed"):
            row = report["comparison"]["metrics"][name]
            print(f"  {name:14s} nominal {row['nominal_mean']:9.4f}  scaled "
                  f"{row['scaled_mean']:9.4f}  reduction {100 * row['reduction']:6.1f}%")
        print(f"  mean alpha {report['profile']['mean_alpha']['mean']:.3f}, modified "
              f"{report['profile']['modified_pct']['mean']:.1f}%")


def cmd_report(cfg, args):
    report = pl.build_report(cfg)
    _summarize(report)
    return EXIT_OK if report["n_ok"] else EXIT_ALL_FAILED


def cmd_pipeline(cfg, args):
    report = pl.run_pipeline(cfg)
    _summarize(report)
    print(f"outputs in {cfg.out_dir}")
    return EXIT_OK if report["n_ok"] else EXIT_ALL_FAILED


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("--seed", type=int, help="seed (master seed for batch commands)")

    p = argparse.ArgumentParser(prog="reachscale", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen-world", parents=[common], help="sample a workspace")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen_world)

    s = sub.add_parser("plan", parents=[common], help="plan a verified waypoint path")
    s.add_argument("--world", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_plan)

    s = sub.add_parser("fit", parents=[common], help="fit the reference spline")
    s.add_argument("--path", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("scale", parents=[common], help="build the time-scaling profile")
    s.add_argument("--world", required=True)
    s.add_argument("--spline", required=True)
    s.add_argument("--repeat", type=int, help="baseline/update passes (default 1)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scale)

    s = sub.add_parser("run", parents=[common], help="simulate one trial")
    s.add_argument("--world", required=True)
    s.add_argument("--spline", required=True)
    s.add_argument("--profile", help="scaling profile CSV; omit for the nominal run")
    s.add_argument("--trial", type=int, default=0, help="trial index recorded in the output")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_run)

    for name, func, hlp in (("trials", cmd_trials, "run the per-trial stages of a batch"),
                            ("report", cmd_report, "aggregate a finished batch"),
                            ("pipeline", cmd_pipeline, "trials followed by report")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--trials", type=int)
        s.add_argument("--out", dest="out_dir")
        if name != "report":
            s.add_argument("--workers", type=int)
        if name == "trials":
            s.add_argument("--only", type=int, nargs="+", metavar="INDEX",
                           help="run only these trial indices")
        s.set_defaults(func=func)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code = args.func(cfg, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, KeyError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STAGE
    except (WorkspaceError, NoPathFound, SplineCollision, IrregularSpline, BaselineDiverged,
            pl.ReferenceFailed) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
