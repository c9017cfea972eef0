"""Command-line surface: synth / run / sweep / serve.

Exit codes: 0 success, 1 runtime or data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import engine
from .data import DatasetError, generate_synthetic, load_dataset, make_class_split, save_dataset
from .metrics import LearningCurve, export_curves_csv, grid_points
from .prior import PriorSchedule, SCHEDULE_KINDS
from .sampler import STRATEGY_KINDS, StrategyConfig
from .svm import SolverConfig, save_snapshot


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--strategy", default="mcle", choices=STRATEGY_KINDS)
    p.add_argument("--prior", default="constant", choices=SCHEDULE_KINDS)
    p.add_argument("--rho-prime", type=float, default=0.5)
    p.add_argument("--burn-in", type=int, default=10)
    p.add_argument("--drop-after", type=int, default=150)
    p.add_argument("--t0", type=int, default=20)
    p.add_argument("--budget", type=int, default=1)
    p.add_argument("--iters", type=int, default=300)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--bias-mode", default="constrained", choices=("constrained", "none"))
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcle")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic benchmark dataset")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--per-class", type=int, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--prior-noise", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("run", help="run one session with the simulated oracle")
    _add_run_flags(p)
    p.add_argument("--class", dest="class_name", help="target class name")
    p.add_argument("--all-unknown", action="store_true",
                   help="run every unknown class of a 75/25 class split")
    p.add_argument("--split-seed", type=int, default=0,
                   help="seed of the known/unknown class split for --all-unknown")
    p.add_argument("--out", required=True, help="RunResult JSON path")
    p.add_argument("--curve-csv", help="optional learning-curve CSV path")
    p.add_argument("--config", help="JSON file overriding the flags above")

    p = sub.add_parser("sweep", help="strategies x classes x seeds comparison")
    _add_run_flags(p)
    p.add_argument("--strategies", default="mcle,random,fplus_only,fzero_only",
                   help="comma-separated strategy list")
    p.add_argument("--classes", default="all", help="comma-separated classes or 'all'")
    p.add_argument("--seeds", type=int, default=30, help="seeds 0..N-1")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("serve", help="start the annotation HTTP service")
    p.add_argument("--data", help="dataset directory (or env MCLE_DATA_DIR)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--checkpoint-dir", help="directory for session checkpoints")
    p.add_argument("--console-dir", help="static console assets to mount at /console/")
    p.add_argument("--max-sessions", type=int, default=64)
    return parser


def cmd_synth(args) -> int:
    if args.prior_noise < 0:
        raise UsageError("--prior-noise must be >= 0")
    if args.classes < 1 or args.per_class < 1 or args.dim < 1:
        raise UsageError("--classes, --per-class and --dim must be >= 1")
    bundle = generate_synthetic(args.classes, args.per_class, args.dim,
                                args.prior_noise, args.seed)
    save_dataset(args.out, bundle)
    pool = bundle.pool
    print(f"wrote {args.out}: {pool.n_samples} samples, dim {pool.dim}, "
          f"{len(bundle.labels.class_names)} classes "
          f"({pool.train_indices.size} train / {pool.test_indices.size} test)")
    return 0


def _session_from_args(bundle, class_name, args, seed):
    strategy = StrategyConfig(kind=args.strategy, rho_prime=args.rho_prime,
                              burn_in=args.burn_in, seed=seed)
    schedule = PriorSchedule(kind=args.prior, t0=args.t0, drop_after=args.drop_after)
    solver = SolverConfig(C=args.C, bias_mode=args.bias_mode)
    return engine.create_session(bundle, class_name, strategy=strategy,
                                 schedule=schedule, solver_config=solver,
                                 B=args.budget, max_iters=args.iters)


def _write_run_outputs(session, out_path, curve_csv=None):
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    model_path = out_path.with_suffix(out_path.suffix + ".model")
    train_ids = session.bundle.pool.train_indices
    pos_of = {int(g): i for i, g in enumerate(train_ids)}
    labels_by_position = {pos_of[sid]: lab for sid, lab in session.labels.items()}
    save_snapshot(model_path, session.model, labels_by_position)
    result = engine.run_result(session, final_model_path=model_path.name)
    out_path.write_text(engine.run_result_json(result) + "\n")
    if curve_csv:
        curve = LearningCurve.from_run_result(result)
        export_curves_csv(curve_csv, [curve], grid_points(session.t))
    return result


class UsageError(Exception):
    pass


def cmd_run(args) -> int:
    if args.config:
        overrides = json.loads(Path(args.config).read_text())
        for key, value in overrides.items():
            setattr(args, key.replace("-", "_"), value)
    bundle = load_dataset(args.data)
    if args.all_unknown:
        split = make_class_split(bundle.relations.target_names, 0.75, args.split_seed)
        classes = list(split.unknown)
    elif args.class_name:
        classes = [args.class_name]
    else:
        raise UsageError("either --class or --all-unknown is required")
    multi = len(classes) > 1
    for class_name in classes:
        session = _session_from_args(bundle, class_name, args, args.seed)
        engine.run_to_completion(session)
        out = Path(args.out)
        if multi:
            out = out.with_name(f"{out.stem}.{class_name}{out.suffix}")
        _write_run_outputs(session, out, args.curve_csv if not multi else None)
        ap = session.curve[-1][1]
        print(f"{class_name}: {session.t} iterations, final test AP "
              f"{'n/a' if ap is None else f'{ap:.4f}'} -> {out}")
    return 0


def _sweep_one(task):
    data_dir, class_name, strategy_kind, seed, argdict = task
    bundle = _sweep_bundle(data_dir)
    ns = argparse.Namespace(**argdict)
    ns.strategy = strategy_kind
    session = _session_from_args(bundle, class_name, ns, seed)
    engine.run_to_completion(session)
    curve = LearningCurve(class_name=class_name, strategy=strategy_kind,
                          iterations=[t for t, _ in session.curve],
                          ap_values=[ap for _, ap in session.curve])
    return (strategy_kind, class_name, seed), curve


_BUNDLE_CACHE = {}


def _sweep_bundle(data_dir):
    if data_dir not in _BUNDLE_CACHE:
        _BUNDLE_CACHE[data_dir] = load_dataset(data_dir)
    return _BUNDLE_CACHE[data_dir]


def cmd_sweep(args) -> int:
    bundle = load_dataset(args.data)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    for s in strategies:
        if s not in STRATEGY_KINDS:
            raise UsageError(f"unknown strategy {s!r}")
    if args.classes == "all":
        classes = list(bundle.relations.target_names)
    else:
        classes = [c.strip() for c in args.classes.split(",") if c.strip()]
    argdict = vars(args).copy()

    tasks = [(args.data, c, s, seed, argdict)
             for s in strategies for c in classes for seed in range(args.seeds)]
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = dict(pool.map(_sweep_one, tasks))
    else:
        results = dict(map(_sweep_one, tasks))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    max_t = min(c.iterations[-1] for c in results.values())
    grid = grid_points(max_t)

    with open(out_dir / "runs.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy", "class", "seed"] + [f"ap@{t}" for t in grid])
        for key in sorted(results):
            strategy_kind, class_name, seed = key
            curve = results[key]
            w.writerow([strategy_kind, class_name, seed]
                       + [repr(curve.ap_at(t)) for t in grid])

    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy"] + [f"mean_ap@{t}" for t in grid])
        for s in strategies:
            rows = [results[k] for k in sorted(results) if k[0] == s]
            w.writerow([s] + [repr(float(np.mean([c.ap_at(t) for c in rows])))
                              for t in grid])

    t_ref = 50 if 50 in grid else grid[-1]
    with open(out_dir / "winrate.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["comparison", "t", "win_rate"])
        if "mcle" in strategies:
            for other in strategies:
                if other == "mcle":
                    continue
                wins = total = 0
                for c in classes:
                    for seed in range(args.seeds):
                        a = results[("mcle", c, seed)].ap_at(t_ref)
                        b = results[(other, c, seed)].ap_at(t_ref)
                        wins += a >= b
                        total += 1
                w.writerow([f"mcle_vs_{other}", t_ref, repr(wins / total)])
    print(f"{len(tasks)} runs -> {out_dir}/runs.csv, summary.csv, winrate.csv")
    return 0


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import create_app

    data_dir = args.data or os.environ.get("MCLE_DATA_DIR")
    if not data_dir:
        raise UsageError("--data or MCLE_DATA_DIR is required")
    bundle = load_dataset(data_dir)
    app = create_app(bundle, max_sessions=args.max_sessions,
                     checkpoint_dir=args.checkpoint_dir,
                     console_dir=args.console_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"synth": cmd_synth, "run": cmd_run, "sweep": cmd_sweep,
               "serve": cmd_serve}[args.command]
    try:
        return handler(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    except (DatasetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
