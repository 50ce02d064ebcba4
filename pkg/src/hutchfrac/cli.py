"""Command-line front end.

Exit codes: 0 ok, 1 verification failure, 2 config error, 3 non-convergence,
4 remetrization build failure.  ``CONFIG`` is a JSON file path or
``corpus:NAME`` for a built-in example.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import corpus
from .errors import ConfigError, HutchfracError, RemetrizationError
from .hutchinson import attractor_deterministic, chaos_game
from .io import (
    RunConfig, config_from_dict, config_to_dict, dumps_json, load_config, sanitize, write_csv,
    write_ppm,
)
from .metrics import Cloud, directed_max, set_threads
from .oscillation import CONDITIONS, ClassifyConfig, classify
from .remetrize import (
    build_banach_power, build_remetrized, verify_banach_under, verify_edelstein_under,
    verify_krasnoselskii_under,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NONCONVERGED, EXIT_REMETRIZE = 0, 1, 2, 3, 4


class _Out:
    def __init__(self, quiet: bool):
        self.quiet = quiet

    def line(self, text: str) -> None:
        if not self.quiet:
            print(text, flush=True)


def _threads(value: Optional[str]) -> int:
    env = os.environ.get("HUTCHFRAC_THREADS")
    raw = env if env else value
    if raw in (None, "", "auto"):
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"threads must be an integer or 'auto', got {raw!r}") from None
    if n < 1:
        raise ConfigError("threads must be positive")
    return n


def _load(spec: str) -> RunConfig:
    if spec.startswith("corpus:"):
        name, _, box = spec[len("corpus:"):].partition("@")
        try:
            entry = corpus.load_example(name, **({"box": float(box)} if box else {}))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        # round-trip through the JSON form so corpus and file configs behave alike
        return config_from_dict(json.loads(dumps_json(config_to_dict(entry.run_config()))))
    return load_config(spec)


def _stop_metric(cfg: RunConfig):
    members = cfg.multimetric.members
    return members[0] if len(members) == 1 else directed_max(members)


def cmd_attractor(args, out: _Out) -> int:
    cfg = _load(args.config)
    opts = dict(cfg.options.get("attractor", {}))
    tol = args.tol if args.tol is not None else float(opts.get("tol", 1e-6))
    max_iter = args.max_iter if args.max_iter is not None else int(opts.get("max_iter", 50))
    try:
        trace = attractor_deterministic(
            cfg.system, opts.get("seed", "corners"), _stop_metric(cfg),
            tol=tol, max_iter=max_iter, dedup_tol=opts.get("dedup_tol"), snap=opts.get("snap"))
    except ValueError as exc:
        raise ConfigError(f"attractor options: {exc}") from exc
    cloud = trace.final_cloud
    if args.out_csv:
        write_csv(cloud, args.out_csv)
    if args.render_ppm:
        write_ppm(cloud, cfg.system.domain, args.render_ppm, args.width, args.height)
    if args.figure:
        from .plotting import plot_attractor
        plot_attractor(cloud, cfg.system.domain, args.figure, trace.residuals, cfg.name)
    summary = {"name": cfg.name, **trace.summary()}
    out.line(json.dumps(sanitize(summary)))
    return EXIT_OK if trace.converged else EXIT_NONCONVERGED


def cmd_chaos(args, out: _Out) -> int:
    cfg = _load(args.config)
    box = cfg.system.domain
    start = (np.array([float(v) for v in args.start.split(",")]) if args.start
             else box.lo + 0.5 * (box.hi - box.lo))
    if start.size != box.dim:
        raise ConfigError(f"--start needs {box.dim} coordinates")
    try:
        cloud = chaos_game(cfg.system, start, args.iterations, args.burn_in, seed=args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.out_csv:
        write_csv(cloud, args.out_csv)
    if args.render_ppm:
        write_ppm(cloud, box, args.render_ppm, args.width, args.height)
    if args.figure:
        from .plotting import plot_attractor
        plot_attractor(cloud, box, args.figure, None, cfg.name)
    out.line(json.dumps({"name": cfg.name, "seed": args.seed, "iterations": args.iterations,
                         "burn_in": args.burn_in, "points": len(cloud)}))
    return EXIT_OK


def _classify_config(cfg: RunConfig, seed: Optional[int]) -> ClassifyConfig:
    opts = dict(cfg.options.get("classify", {}))
    if seed is not None:
        opts["seed"] = seed
    try:
        return ClassifyConfig(**opts)
    except TypeError as exc:
        raise ConfigError(f"classify options: {exc}") from exc


def cmd_classify(args, out: _Out) -> int:
    cfg = _load(args.config)
    ccfg = _classify_config(cfg, args.seed_given)
    try:
        report = classify(cfg.system, cfg.multimetric, ccfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    doc = {"name": cfg.name, "report": report.to_dict(), "subsystems": []}
    for idx in cfg.options.get("subsystems", []):
        sub = classify(cfg.system.subsystem(idx), cfg.multimetric, ccfg)
        doc["subsystems"].append({"maps": list(idx), "report": sub.to_dict()})
    text = dumps_json(doc)
    if args.report_json:
        Path(args.report_json).write_text(text)
        for m in report.metrics:
            out.line(f"{m.metric}: " + " ".join(f"{c}={m.status(c)}" for c in CONDITIONS))
    else:
        out.line(text.rstrip("\n"))
    if args.figure:
        from .plotting import plot_verdicts
        plot_verdicts(report, args.figure, cfg.name)
    return EXIT_OK


def cmd_remetrize(args, out: _Out) -> int:
    cfg = _load(args.config)
    opts = dict(cfg.options.get("remetrize", {}))
    members = cfg.multimetric.members
    try:
        base = members[int(opts.get("base", 0))]
    except IndexError:
        raise ConfigError("remetrize.base is not a metric index") from None
    doc = {"name": cfg.name, "base": base.label(), "verify": args.verify}
    try:
        if args.verify == "banach-power":
            m = args.m if args.m is not None else int(opts.get("m", 1))
            a = args.a if args.a is not None else float(opts.get("a", 1.1))
            bp = build_banach_power(cfg.system, base, m, a)
            check = verify_banach_under(bp, pair_samples=args.pairs, seed=args.seed)
            doc.update({"construction": "banach_power", "m": bp.m, "lambda": bp.lam, "a": bp.a,
                        "depth": bp.depth, "result": check.to_dict()})
        else:
            eps = args.eps if args.eps is not None else float(opts.get("eps", 1e-3))
            K = (Cloud(np.array(opts["invariant_cloud"], float)) if "invariant_cloud" in opts
                 else Cloud(cfg.system.domain.corners()))
            rm = build_remetrized(cfg.system, base, K=K, eps=eps,
                                  depth_cap=int(opts.get("depth_cap", 24)))
            if args.verify == "edelstein":
                check = verify_edelstein_under(rm, pair_samples=args.pairs, seed=args.seed)
            else:
                check = verify_krasnoselskii_under(rm, a_low=args.a_low, b_high=args.b_high,
                                                   pair_samples=args.pairs, seed=args.seed)
            doc.update({"construction": "remetrized", "eps": eps, "depth": rm.depth,
                        "tail_bound": rm.tail_bound, "result": check.to_dict()})
    except RemetrizationError as exc:
        word = None if exc.word is None else cfg.system.word_label(exc.word)
        doc.update({"error": str(exc), "word": word, "tail_bound": exc.tail_bound})
        if args.report_json:
            Path(args.report_json).write_text(dumps_json(doc))
        print(f"remetrization failed: {exc}", file=sys.stderr)
        return EXIT_REMETRIZE
    text = dumps_json(doc)
    if args.report_json:
        Path(args.report_json).write_text(text)
        out.line(json.dumps(sanitize({k: doc[k] for k in doc if k != "result"})))
    else:
        out.line(text.rstrip("\n"))
    return EXIT_OK if check.ok else EXIT_VERIFY


def cmd_verify(args, out: _Out) -> int:
    from .acceptance import run_suite

    results = run_suite(args.suite)
    for r in results:
        out.line(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_export(args, out: _Out) -> int:
    try:
        entry = corpus.load_example(args.name, **({"box": args.box} if args.box else {}))
    except (KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    text = dumps_json(config_to_dict(entry.run_config()))
    if args.out:
        Path(args.out).write_text(text)
    else:
        out.line(text.rstrip("\n"))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="random seed (default 0)")
    common.add_argument("--threads", default=argparse.SUPPRESS,
                        help="worker threads or 'auto'; HUTCHFRAC_THREADS overrides")

    p = argparse.ArgumentParser(prog="hutchfrac", parents=[common],
                                description="Iterated function systems: attractors, "
                                            "contraction classification, remetrization.")
    sub = p.add_subparsers(dest="command", required=True)

    def raster_flags(sp):
        sp.add_argument("--out-csv", help="write the cloud as CSV")
        sp.add_argument("--render-ppm", help="write a binary PPM raster of the cloud")
        sp.add_argument("--width", type=int, default=512)
        sp.add_argument("--height", type=int, default=512)
        sp.add_argument("--figure", help="write a matplotlib figure (PNG/SVG/PDF by extension)")

    sp = sub.add_parser("attractor", parents=[common], help="deterministic attractor iteration")
    sp.add_argument("config")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--max-iter", type=int)
    raster_flags(sp)
    sp.set_defaults(func=cmd_attractor)

    sp = sub.add_parser("chaos", parents=[common], help="chaos-game point cloud")
    sp.add_argument("config")
    sp.add_argument("--iterations", type=int, default=100_000)
    sp.add_argument("--burn-in", type=int, default=100)
    sp.add_argument("--start", help="comma-separated start point (default: box centre)")
    raster_flags(sp)
    sp.set_defaults(func=cmd_chaos)

    sp = sub.add_parser("classify", parents=[common], help="six-way contraction verdicts")
    sp.add_argument("config")
    sp.add_argument("--report-json")
    sp.add_argument("--figure", help="write a verdict-grid figure")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("remetrize", parents=[common], help="build and audit a remetrization")
    sp.add_argument("config")
    sp.add_argument("--eps", type=float)
    sp.add_argument("--pairs", type=int, default=500)
    sp.add_argument("--verify", choices=("edelstein", "krasnoselskii", "banach-power"),
                    default="edelstein")
    sp.add_argument("--a", type=float, help="Banach-power base a > 1")
    sp.add_argument("--m", type=int, help="power m with F^m Banach contracting")
    sp.add_argument("--a-low", type=float, default=0.01)
    sp.add_argument("--b-high", type=float, default=3.0)
    sp.add_argument("--report-json")
    sp.set_defaults(func=cmd_remetrize)

    sp = sub.add_parser("verify", parents=[common], help="run property and acceptance suites")
    sp.add_argument("--suite", choices=("axioms", "chain", "paper-examples", "all"),
                    default="all")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("export", parents=[common], help="write a corpus entry as config JSON")
    sp.add_argument("name", choices=corpus.names())
    sp.add_argument("--box", type=float, help="box size for edelstein_exp")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export)
    return p


def main(argv: Optional[List[str]] = None, quiet: bool = False) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    args.seed_given = getattr(args, "seed", None)
    args.seed = args.seed_given if args.seed_given is not None else 0
    out = _Out(quiet)
    try:
        set_threads(_threads(getattr(args, "threads", None)))
        return args.func(args, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HutchfracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry_point() -> None:
    sys.exit(main())
