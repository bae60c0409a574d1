"""Command line entry point: ``softprune <command> [options]``.

Every command reads an optional YAML config, applies the shared overrides and
writes its artifacts into the output directory. Exit codes: 0 success,
2 usage, 3 I/O, 4 format, 5 infeasible, 6 divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

from . import io
from .baselines import norm_baseline, random_baseline
from .config import RunConfig, load_config, with_overrides
from .data import ImageSet, load_idx_images, split_eval_subset, synthetic_images
from .errors import ConfigError, InfeasibleError, SoftPruneError
from .evaluate import EvalReport, PruningContext, evaluate
from .gd import optimize
from .grid import grid_search
from .groups import identify_groups, total_params
from .nn import forward, init_autoencoder, train
from .pruning import CRITERIA, as_coefficients

EXIT_USAGE = 2


def _train_images(cfg: RunConfig) -> ImageSet:
    if cfg.data.synthetic:
        return synthetic_images(cfg.data.synthetic_train, cfg.seed)
    return load_idx_images(cfg.data.train_images)


def _test_images(cfg: RunConfig) -> ImageSet:
    if cfg.data.synthetic:
        return synthetic_images(cfg.data.synthetic_test, cfg.seed + 1)
    return load_idx_images(cfg.data.test_images)


def _eval_set(cfg: RunConfig) -> ImageSet:
    return split_eval_subset(_test_images(cfg), cfg.objective.eval_count)


def _model_path(args, cfg) -> Path:
    return Path(args.model) if args.model else Path(cfg.out) / "model.bin"


def _grid_image(model, evalset, path, count):
    x = evalset.images[:count]
    io.write_image_grid(x, forward(model, x), path, evalset.height, evalset.width)


def _method_block(report: EvalReport, baseline_mse: float, cfg: RunConfig) -> dict:
    d = report.to_dict(baseline_mse)
    d["target_sparsity"] = cfg.objective.target_sparsity
    d["tolerance"] = cfg.objective.tolerance
    return d


def cmd_train(args, cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    images = _train_images(cfg)
    evalset = _eval_set(cfg)
    model = init_autoencoder(cfg.arch_spec(), cfg.seed)
    t0 = time.perf_counter()
    result = train(model, images.images, cfg.train_config())
    runtime = time.perf_counter() - t0
    io.save_model(result.model, out / "model.bin", cfg.seed)
    io.write_csv(list(enumerate(result.loss_history, 1)), ["epoch", "train_mse"], out / "loss_history.csv")
    err, db = evaluate(result.model, evalset)
    _grid_image(result.model, evalset, out / "baseline.pgm", cfg.baselines.image_count)
    summary = {
        "arch": cfg.to_dict()["arch"],
        "seed": cfg.seed,
        "epochs": cfg.train.epochs,
        "learning_rate": cfg.train.learning_rate,
        "batch_size": cfg.train.batch_size,
        "precision": cfg.train.precision,
        "final_train_mse": result.loss_history[-1] if result.loss_history else None,
        "eval_mse": err,
        "eval_psnr_db": db,
        "n_params": result.model.n_params,
        "runtime_s": runtime,
    }
    io.write_json(summary, out / "train.json")
    return summary


def cmd_groups(args, cfg: RunConfig) -> dict:
    model, _ = io.load_model(_model_path(args, cfg))
    groups = identify_groups(model.arch)
    rows = groups.table()
    print(f"{'id':>3} {'component':<10} {'channels':>9} {'size':>10}")
    for r in rows:
        print(f"{r['id']:>3} {r['component']:<10} {r['channel_count']:>9} {r['size']:>10}")
    print(f"total parameters: {groups.total_params}")
    summary = {"groups": rows, "total_params": groups.total_params}
    io.write_json(summary, Path(cfg.out) / "groups.json")
    return summary


def _context(args, cfg):
    model, _ = io.load_model(_model_path(args, cfg))
    return PruningContext(model, _eval_set(cfg), cfg.criterion_obj())


def cmd_baselines(args, cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    ctx = _context(args, cfg)
    rnd = random_baseline(ctx, cfg.objective, cfg.seed, cfg.baselines.probe_budget)
    nrm = norm_baseline(ctx, cfg.objective)
    summary = {"baseline_mse": ctx.baseline_mse, "baseline_psnr_db": ctx.baseline_psnr,
               "criterion": cfg.criterion.kind}
    for name, res in (("random", rnd), ("norm_based", nrm)):
        block = _method_block(res.report, ctx.baseline_mse, cfg)
        if name == "random":
            block["probes"] = res.probes
        else:
            block["group_order"] = [i + 1 for i in res.group_order]
        summary[name] = block
        pruned = ctx.prune(res.report.coefficients)
        io.save_model(pruned, out / f"{name}_pruned.bin", cfg.seed)
        _grid_image(pruned, ctx.evalset, out / f"{name}.pgm", cfg.baselines.image_count)
    io.write_json(summary, out / "baselines.json")
    return summary


def cmd_grid_search(args, cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    ctx = _context(args, cfg)
    res = grid_search(ctx, cfg.grid_config())
    m = ctx.m
    header = [f"c{i + 1}" for i in range(m)] + ["exact_sparsity", "psnr_db", "mse"]
    io.write_csv([[*r.coefficients, r.exact_sparsity, r.psnr_db, r.mse] for r in res.records],
                 header, out / "grid_candidates.csv")
    pruned = ctx.prune(res.best.coefficients)
    io.save_model(pruned, out / "grid_search_pruned.bin", cfg.seed)
    _grid_image(pruned, ctx.evalset, out / "grid_search.pgm", cfg.baselines.image_count)
    summary = {
        "method": "grid_search",
        "points_per_group": cfg.grid.points_per_group,
        "enumerated": res.enumerated,
        "retained": res.retained,
        "evaluated": len(res.records),
        "baseline_mse": ctx.baseline_mse,
        "baseline_psnr_db": ctx.baseline_psnr,
        "criterion": cfg.criterion.kind,
        "result": _method_block(res.report, ctx.baseline_mse, cfg),
    }
    io.write_json(summary, out / "grid_search.json")
    return summary


def cmd_optimize(args, cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    ctx = _context(args, cfg)
    res = optimize(ctx, cfg.gd_config())
    m = ctx.m
    header = ["iteration"] + [f"c{i + 1}" for i in range(m)] + ["objective", "psnr_db", "exact_sparsity", "grad_norm"]
    io.write_csv([[t.iteration, *t.coefficients, t.objective, t.psnr_db, t.exact_sparsity, t.grad_norm]
                  for t in res.trace], header, out / "gd_trace.csv")
    pruned = ctx.prune(res.coefficients)
    io.save_model(pruned, out / "optimize_pruned.bin", cfg.seed)
    _grid_image(pruned, ctx.evalset, out / "optimize.pgm", cfg.baselines.image_count)
    summary = {
        "method": "gradient_descent",
        "iterations": len(res.trace),
        "objective_evaluations": res.evaluations,
        "converged": res.converged,
        "baseline_mse": ctx.baseline_mse,
        "baseline_psnr_db": ctx.baseline_psnr,
        "criterion": cfg.criterion.kind,
        "result": _method_block(res.report, ctx.baseline_mse, cfg),
    }
    io.write_json(summary, out / "optimize.json")
    return summary


def _parse_coefficients(text):
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse coefficients {text!r}") from exc


def cmd_prune(args, cfg: RunConfig) -> dict:
    out = Path(cfg.out)
    ctx = _context(args, cfg)
    if args.coefficients is None:
        raise ConfigError("prune needs --coefficients")
    c = as_coefficients(_parse_coefficients(args.coefficients), ctx.m)
    t0 = time.perf_counter()
    pruned = ctx.prune(c)
    report = ctx.report(c)
    report.runtime_s = time.perf_counter() - t0
    io.save_model(pruned, out / "pruned.bin", cfg.seed)
    summary = {
        "params_before": ctx.model.n_params,
        "params_after": pruned.n_params,
        "baseline_mse": ctx.baseline_mse,
        "criterion": cfg.criterion.kind,
        "result": _method_block(report, ctx.baseline_mse, cfg),
    }
    io.write_json(summary, out / "prune.json")
    return summary


def cmd_evaluate(args, cfg: RunConfig) -> dict:
    model, _ = io.load_model(_model_path(args, cfg))
    evalset = _eval_set(cfg)
    err, db = evaluate(model, evalset)
    base = total_params(model.arch)
    summary = {
        "mse": err,
        "psnr_db": db,
        "n_params": model.n_params,
        "baseline_params": base,
        "achieved_sparsity": (base - model.n_params) / base,
        "widths": list(model.widths),
    }
    io.write_json(summary, Path(cfg.out) / "evaluate.json")
    return summary


COMMANDS = {
    "train": cmd_train,
    "groups": cmd_groups,
    "baselines": cmd_baselines,
    "grid-search": cmd_grid_search,
    "optimize": cmd_optimize,
    "prune": cmd_prune,
    "evaluate": cmd_evaluate,
}

RESULT_FILES = {
    "train": "train.json",
    "groups": "groups.json",
    "baselines": "baselines.json",
    "grid-search": "grid_search.json",
    "optimize": "optimize.json",
    "prune": "prune.json",
    "evaluate": "evaluate.json",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="softprune", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--target-sparsity", type=float)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--grid-points", type=int)
        p.add_argument("--criterion", choices=CRITERIA)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="output directory")
        p.add_argument("--synthetic", action="store_true", help="use synthetic images instead of MNIST")
        if name != "train":
            p.add_argument("--model", help="model file (default: <out>/model.bin)")
        if name == "prune":
            p.add_argument("--coefficients", help="comma-separated coefficient vector")
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config) if args.config else RunConfig()
        cfg = with_overrides(cfg, target_sparsity=args.target_sparsity, tolerance=args.tolerance,
                             grid_points=args.grid_points, criterion=args.criterion,
                             seed=args.seed, out=args.out)
        if args.synthetic:
            cfg = dataclasses.replace(cfg, data=dataclasses.replace(cfg.data, synthetic=True))
        if not hasattr(args, "model"):
            args.model = None
        COMMANDS[args.command](args, cfg)
        return 0
    except InfeasibleError as exc:
        payload = {"status": "infeasible", "reason": exc.reason, "message": str(exc),
                   "details": exc.details}
        try:
            io.write_json(payload, Path(cfg.out) / RESULT_FILES[args.command])
        except (SoftPruneError, NameError):
            pass
        print(f"infeasible: {exc}", file=sys.stderr)
        return exc.exit_code
    except SoftPruneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
