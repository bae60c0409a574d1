"""Coefficient vectors -> channel plans -> physically smaller models.

A coefficient ``c_i`` asks for the fraction ``c_i`` of group ``i``'s channels
to be removed. The discrete count is ``k_i = min(round(c_i * n_i), n_i - 1)``
(rounding half away from zero), so every group keeps at least one channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, StructuralError
from .groups import GroupSet, PruningGroup, group_boundaries, total_params
from .nn import Autoencoder, DenseLayer

C_MAX = 0.95

NORM_L1 = "norm_l1"
NORM_L2 = "norm_l2"
RANDOM = "random"
CRITERIA = (NORM_L1, NORM_L2, RANDOM)


def as_coefficients(values, m: int | None = None) -> np.ndarray:
    """Validate a coefficient vector: finite, within [0, 0.95], length ``m``."""
    c = np.array(values, dtype=np.float64).ravel()
    if m is not None and c.size != m:
        raise ConfigError(f"expected {m} coefficients, got {c.size}")
    if not np.all(np.isfinite(c)) or np.any(c < 0.0) or np.any(c > C_MAX):
        raise ConfigError(f"coefficients must lie in [0, {C_MAX}], got {c.tolist()}")
    c.setflags(write=False)
    return c


@dataclass(frozen=True)
class Criterion:
    kind: str = NORM_L2
    seed: int = 0

    def __post_init__(self):
        if self.kind not in CRITERIA:
            raise ConfigError(f"unknown criterion {self.kind!r}; choose from {CRITERIA}")


@dataclass(frozen=True)
class PruningPlan:
    """Kept channel indices (0-based, ascending) per group.

    ``boundaries[i]`` locates group ``i`` in the model's width chain.
    """

    kept: tuple[np.ndarray, ...]
    removed_counts: tuple[int, ...]
    boundaries: tuple[int, ...]

    @property
    def kept_counts(self) -> tuple[int, ...]:
        return tuple(len(k) for k in self.kept)


def removed_counts(c, channel_counts) -> np.ndarray:
    """``k_i`` for one vector or a stack of vectors (last axis = groups)."""
    c = np.asarray(c, dtype=np.float64)
    n = np.asarray(channel_counts, dtype=np.int64)
    k = np.floor(c * n + 0.5).astype(np.int64)
    return np.minimum(k, n - 1)


def channel_importance(model: Autoencoder, group: PruningGroup, p: int) -> np.ndarray:
    """Per-channel L_p norm of the group's row, bias entry and consumer column."""
    producer = model.layers[group.producer]
    consumer = model.layers[group.producer + 1]
    if producer.out_width != consumer.in_width:
        raise StructuralError(f"group {group.id} does not match the model")
    if p == 1:
        return (np.abs(producer.weights).sum(axis=1) + np.abs(producer.bias)
                + np.abs(consumer.weights).sum(axis=0))
    sq = (producer.weights ** 2).sum(axis=1) + producer.bias ** 2 + (consumer.weights ** 2).sum(axis=0)
    return np.sqrt(sq)


def rank_channels(model: Autoencoder, group: PruningGroup, criterion: Criterion = Criterion()) -> np.ndarray:
    """Channel indices from least to most important; ties go to the lower index."""
    if criterion.kind == RANDOM:
        n = model.layers[group.producer].out_width
        return np.random.default_rng([criterion.seed, group.id]).permutation(n)
    scores = channel_importance(model, group, 1 if criterion.kind == NORM_L1 else 2)
    return np.argsort(scores, kind="stable")


def make_plan(c, groups: GroupSet, model: Autoencoder, criterion: Criterion = Criterion()) -> PruningPlan:
    c = as_coefficients(c, groups.m)
    widths = model.widths
    bounds = group_boundaries(groups)
    counts = [widths[b] for b in bounds]
    k = removed_counts(c, counts)
    kept = []
    for g, ki in zip(groups, k):
        order = rank_channels(model, g, criterion)
        kept.append(np.sort(order[ki:]))
    return PruningPlan(tuple(kept), tuple(int(x) for x in k), tuple(bounds))


def full_plan(groups: GroupSet) -> PruningPlan:
    """Plan that removes nothing."""
    widths = groups.arch.widths
    bounds = group_boundaries(groups)
    return PruningPlan(tuple(np.arange(widths[b]) for b in bounds), (0,) * len(bounds), tuple(bounds))


def _check_plan(model, plan):
    widths = model.widths
    for b, kept, k in zip(plan.boundaries, plan.kept, plan.removed_counts):
        if not 0 < b < len(widths) - 1:
            raise StructuralError(f"boundary {b} is not a hidden width")
        n = widths[b]
        if len(kept) + k != n or len(kept) < 1:
            raise StructuralError(f"plan keeps {len(kept)} and removes {k} of {n} channels")
        if len(kept) and (kept.min() < 0 or kept.max() >= n or np.any(np.diff(kept) <= 0)):
            raise StructuralError("kept indices must be unique, ascending and in range")


def apply_plan(model: Autoencoder, plan: PruningPlan) -> Autoencoder:
    """Slice away removed channels. Returns a new, smaller model."""
    _check_plan(model, plan)
    rows = {b - 1: kept for b, kept in zip(plan.boundaries, plan.kept)}
    cols = {b: kept for b, kept in zip(plan.boundaries, plan.kept)}
    layers = []
    for idx, layer in enumerate(model.layers):
        w, bias = layer.weights, layer.bias
        if idx in rows:
            w, bias = w[rows[idx]], bias[rows[idx]]
        if idx in cols:
            w = w[:, cols[idx]]
        layers.append(DenseLayer(np.ascontiguousarray(w), bias.copy(), layer.activation))
    return Autoencoder(layers, model.arch)


def pruned_widths(plan: PruningPlan, widths) -> tuple[int, ...]:
    out = list(widths)
    for b, kept in zip(plan.boundaries, plan.kept):
        out[b] = len(kept)
    return tuple(out)


def exact_sparsity(plan: PruningPlan, arch) -> float:
    """Fraction of baseline parameters removed, recounted from surviving widths."""
    base = total_params(arch)
    return (base - total_params(pruned_widths(plan, arch.widths))) / base


def exact_sparsity_of(c, groups: GroupSet) -> float:
    """Exact sparsity of the plan any criterion would build from ``c``."""
    return float(exact_sparsity_batch(np.atleast_2d(c), groups)[0])


def exact_sparsity_batch(cs, groups: GroupSet) -> np.ndarray:
    """Vectorized dry-run recount for a stack of coefficient vectors of shape (N, m)."""
    cs = np.atleast_2d(np.asarray(cs, dtype=np.float64))
    widths = groups.arch.widths
    w = np.broadcast_to(np.asarray(widths, dtype=np.int64), (cs.shape[0], len(widths))).copy()
    k = removed_counts(cs, groups.channel_counts)
    for i, b in enumerate(group_boundaries(groups)):
        w[:, b] -= k[:, i]
    kept = ((w[:, :-1] + 1) * w[:, 1:]).sum(axis=1)
    base = total_params(groups.arch)
    return (base - kept) / base


def estimated_sparsity(c, groups: GroupSet) -> float:
    """Linear estimate sum(c_i * s_i) / total_params.

    Parameters shared by two adjacent pruned groups are attributed to both, so
    this over-counts whenever neighbouring groups are pruned together.
    """
    c = as_coefficients(c, groups.m)
    return float(np.dot(c, groups.sizes) / groups.total_params)
