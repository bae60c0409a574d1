"""Exhaustive two-stage grid search over pruning coefficients.

Stage 1 enumerates every combination of grid values and keeps those whose
exact sparsity falls in the target window. That check is integer arithmetic on
channel counts, so no model is touched. Stage 2 prunes and scores each
survivor and returns the best one.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InfeasibleError
from .evaluate import EvalReport, ObjectiveConfig, PruningContext
from .groups import GroupSet
from .pruning import C_MAX, exact_sparsity_batch

CHUNK = 1 << 16


@dataclass(frozen=True)
class GridConfig:
    points_per_group: int = 10
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    workers: int = 1

    def __post_init__(self):
        if self.points_per_group < 2:
            raise ConfigError("points_per_group must be >= 2")


@dataclass
class CandidateRecord:
    coefficients: tuple[float, ...]
    exact_sparsity: float
    psnr_db: float | None = None
    mse: float | None = None

    def sort_key(self):
        # best first: highest psnr, then lowest sparsity, then smallest coefficients
        return (-self.psnr_db, self.exact_sparsity, self.coefficients)


@dataclass
class Stage1Result:
    candidates: list[CandidateRecord]
    enumerated: int


@dataclass
class GridResult:
    best: CandidateRecord
    records: list[CandidateRecord]
    enumerated: int
    retained: int
    report: EvalReport


def grid_points(n: int) -> np.ndarray:
    """``n`` evenly spaced values from 0.0 to 0.95 inclusive."""
    if n < 2:
        raise ConfigError(f"grid needs at least 2 points, got {n}")
    return C_MAX * np.arange(n) / (n - 1)


def iter_combinations(points: np.ndarray, m: int, chunk: int = CHUNK):
    """Yield all ``len(points)**m`` combinations in lexicographic order, in chunks."""
    n = len(points)
    total = n ** m
    radix = n ** np.arange(m - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        digits = (idx[:, None] // radix) % n
        yield points[digits]


def stage1_filter(groups: GroupSet, grid: GridConfig) -> Stage1Result:
    cfg = grid.objective
    points = grid_points(grid.points_per_group)
    lo, hi = cfg.target_sparsity - cfg.tolerance, cfg.target_sparsity + cfg.tolerance
    kept = []
    enumerated = 0
    for combos in iter_combinations(points, groups.m):
        enumerated += len(combos)
        sp = exact_sparsity_batch(combos, groups)
        mask = (sp >= lo - 1e-12) & (sp <= hi + 1e-12)
        for c, s in zip(combos[mask], sp[mask]):
            kept.append(CandidateRecord(tuple(float(x) for x in c), float(s)))
    if not kept:
        raise InfeasibleError(
            f"no grid combination reaches sparsity {cfg.target_sparsity} +/- {cfg.tolerance} "
            f"with {grid.points_per_group} points per group; relax the target or tolerance",
            reason="no_feasible_grid_point",
            target_sparsity=cfg.target_sparsity,
            tolerance=cfg.tolerance,
            points_per_group=grid.points_per_group,
        )
    return Stage1Result(kept, enumerated)


def _score(ctx, rec):
    err, score, sp = ctx.measure(rec.coefficients)
    return CandidateRecord(rec.coefficients, sp, score, err)


def stage2_select(candidates, ctx: PruningContext, workers: int = 1):
    """Score every candidate; returns ``(best, evaluated_records)`` in input order."""
    if not candidates:
        raise ConfigError("stage 2 needs at least one candidate")
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(lambda r: _score(ctx, r), candidates))
    else:
        records = [_score(ctx, r) for r in candidates]
    best = min(records, key=CandidateRecord.sort_key)
    return best, records


def grid_search(ctx: PruningContext, grid: GridConfig = GridConfig()) -> GridResult:
    t0 = time.perf_counter()
    s1 = stage1_filter(ctx.groups, grid)
    best, records = stage2_select(s1.candidates, ctx, grid.workers)
    runtime = time.perf_counter() - t0
    report = EvalReport(best.mse, best.psnr_db, best.exact_sparsity, best.coefficients, runtime)
    return GridResult(best, records, s1.enumerated, len(s1.candidates), report)
