"""Heuristic coefficient baselines: random sampling and group-norm ordering."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError
from .evaluate import EvalReport, ObjectiveConfig, PruningContext
from .pruning import C_MAX, exact_sparsity_of


@dataclass
class BaselineResult:
    report: EvalReport
    probes: int = 0
    group_order: tuple[int, ...] = ()


def random_baseline(ctx: PruningContext, cfg: ObjectiveConfig, seed: int = 0,
                    budget: int = 10_000) -> BaselineResult:
    """First uniform draw from [0, 0.95]^m whose exact sparsity is in the window."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    for probe in range(1, budget + 1):
        c = rng.uniform(0.0, C_MAX, size=ctx.m)
        if cfg.feasible(exact_sparsity_of(c, ctx.groups)):
            report = ctx.report(c)
            report.runtime_s = time.perf_counter() - t0
            return BaselineResult(report, probe)
    raise InfeasibleError(
        f"random sampling found no vector with sparsity {cfg.target_sparsity} +/- "
        f"{cfg.tolerance} in {budget} probes",
        reason="probe_budget_exhausted",
        target_sparsity=cfg.target_sparsity,
        tolerance=cfg.tolerance,
        budget=budget,
    )


def group_rms(ctx: PruningContext) -> np.ndarray:
    """Root-mean-square parameter magnitude over each group's slices."""
    out = []
    for g in ctx.groups:
        producer = ctx.model.layers[g.producer]
        consumer = ctx.model.layers[g.producer + 1]
        sq = (producer.weights ** 2).sum() + (producer.bias ** 2).sum() + (consumer.weights ** 2).sum()
        out.append(np.sqrt(sq / g.size))
    return np.asarray(out)


def _bisect(c, i, groups, target, iters=60):
    lo, hi = 0.0, C_MAX
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        c[i] = mid
        if exact_sparsity_of(c, groups) < target:
            lo = mid
        else:
            hi = mid
    # both ends straddle the target; keep whichever lands closer
    c[i] = lo
    s_lo = exact_sparsity_of(c, groups)
    c[i] = hi
    s_hi = exact_sparsity_of(c, groups)
    c[i] = lo if abs(s_lo - target) < abs(s_hi - target) else hi
    return c


def norm_baseline(ctx: PruningContext, cfg: ObjectiveConfig) -> BaselineResult:
    """Fill groups to 0.95 in ascending order of weight RMS, bisecting the last one.

    Ties in RMS go to the lower group index.
    """
    t0 = time.perf_counter()
    order = tuple(int(i) for i in np.argsort(group_rms(ctx), kind="stable"))
    lo = cfg.target_sparsity - cfg.tolerance
    c = np.zeros(ctx.m)
    for i in order:
        c[i] = C_MAX
        sp = exact_sparsity_of(c, ctx.groups)
        if sp < lo:
            continue
        if not cfg.feasible(sp):
            c = _bisect(c, i, ctx.groups, cfg.target_sparsity)
            sp = exact_sparsity_of(c, ctx.groups)
        if cfg.feasible(sp):
            report = ctx.report(c)
            report.runtime_s = time.perf_counter() - t0
            return BaselineResult(report, 0, order)
        break
    raise InfeasibleError(
        f"norm-ordered filling cannot reach sparsity {cfg.target_sparsity} +/- {cfg.tolerance}",
        reason="norm_fill_infeasible",
        target_sparsity=cfg.target_sparsity,
        tolerance=cfg.tolerance,
    )
