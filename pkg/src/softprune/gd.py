"""Momentum gradient descent on coefficients with finite-difference gradients.

The pruning map from coefficients to a model is piecewise constant, so the
objective has no useful analytic gradient. Each coefficient is probed on both
sides with a central difference; probes are clamped into the coefficient box.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InfeasibleError
from .evaluate import EvalReport, ObjectiveConfig, PruningContext, objective_from_measure
from .pruning import C_MAX


@dataclass(frozen=True)
class GdConfig:
    step_size: float = 0.002
    momentum: float = 0.3
    fd_step: float = 0.05
    max_iters: int = 200
    converge_tol: float = 0.2
    converge_window: int = 2
    objective: ObjectiveConfig = field(default_factory=ObjectiveConfig)
    workers: int = 1

    def __post_init__(self):
        if self.step_size <= 0 or self.fd_step <= 0:
            raise ConfigError("step_size and fd_step must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError("momentum must be in [0, 1)")
        if self.max_iters < 1 or self.converge_window < 1 or self.converge_tol <= 0:
            raise ConfigError("max_iters, converge_window and converge_tol must be positive")


@dataclass
class TraceRecord:
    iteration: int
    coefficients: tuple[float, ...]
    objective: float
    psnr_db: float
    exact_sparsity: float
    grad_norm: float


@dataclass
class GdResult:
    coefficients: tuple[float, ...]
    report: EvalReport
    trace: list[TraceRecord]
    evaluations: int
    converged: bool


def clamp(c):
    return np.clip(c, 0.0, C_MAX)


def numerical_gradient(fn, c, h: float, workers: int = 1) -> np.ndarray:
    """Central differences ``(f(c + h e_i) - f(c - h e_i)) / 2h`` with clamped probes."""
    c = np.asarray(c, dtype=np.float64)
    probes = []
    for i in range(c.size):
        up, down = c.copy(), c.copy()
        up[i] += h
        down[i] -= h
        probes += [clamp(up), clamp(down)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            values = list(pool.map(fn, probes))
    else:
        values = [fn(p) for p in probes]
    values = np.asarray(values, dtype=np.float64).reshape(c.size, 2)
    return (values[:, 0] - values[:, 1]) / (2.0 * h)


def gd_step(c, velocity, g, cfg: GdConfig):
    velocity = cfg.momentum * np.asarray(velocity) - cfg.step_size * np.asarray(g)
    return clamp(np.asarray(c) + velocity), velocity


def optimize(ctx: PruningContext, cfg: GdConfig = GdConfig()) -> GdResult:
    """Start at c = 0 and descend the penalized objective.

    The returned vector is the feasible iterate with the highest score seen,
    not necessarily the last one. Raises InfeasibleError if no iterate lands
    inside the sparsity window.
    """
    ocfg = cfg.objective
    evaluations = 0

    def J(c):
        nonlocal evaluations
        evaluations += 1
        _, score, sp = ctx.measure(c)
        return objective_from_measure(score, sp, ocfg)

    t0 = time.perf_counter()
    c = np.zeros(ctx.m)
    v = np.zeros(ctx.m)
    trace = []
    best = None
    stall = 0
    prev_j = None
    converged = False
    for it in range(cfg.max_iters):
        evaluations += 1
        err, score, sp = ctx.measure(c)
        j = objective_from_measure(score, sp, ocfg)
        if ocfg.feasible(sp) and (best is None or score > best[1]):
            best = (tuple(float(x) for x in c), score, err, sp)
        if prev_j is not None and abs(j - prev_j) < cfg.converge_tol:
            stall += 1
        else:
            stall = 0
        prev_j = j
        converged = stall >= cfg.converge_window
        # the stopping iterate needs no gradient; its trace row carries NaN
        g = None if converged else numerical_gradient(J, c, cfg.fd_step, cfg.workers)
        gnorm = float("nan") if g is None else float(np.linalg.norm(g))
        trace.append(TraceRecord(it, tuple(float(x) for x in c), j, score, sp, gnorm))
        if converged:
            break
        c, v = gd_step(c, v, g, cfg)
    runtime = time.perf_counter() - t0
    if best is None:
        raise InfeasibleError(
            f"gradient descent found no iterate with sparsity {ocfg.target_sparsity} "
            f"+/- {ocfg.tolerance} in {len(trace)} iterations; relax the target or tolerance",
            reason="no_feasible_iterate",
            target_sparsity=ocfg.target_sparsity,
            tolerance=ocfg.tolerance,
            iterations=len(trace),
        )
    coeffs, score, err, sp = best
    report = EvalReport(err, score, sp, coeffs, runtime)
    return GdResult(coeffs, report, trace, evaluations, converged)
