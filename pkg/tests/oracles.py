"""Independent reference implementations used only by the tests."""

import itertools
import math

import numpy as np

from softprune.nn import Autoencoder, DenseLayer


def masked_model(model, plan):
    """Same widths as ``model``; removed channels zeroed instead of sliced."""
    layers = [DenseLayer(l.weights.copy(), l.bias.copy(), l.activation) for l in model.layers]
    for b, kept in zip(plan.boundaries, plan.kept):
        gone = np.setdiff1d(np.arange(model.widths[b]), kept)
        layers[b - 1].weights[gone, :] = 0.0
        layers[b - 1].bias[gone] = 0.0
        layers[b].weights[:, gone] = 0.0
    return Autoencoder(layers, model.arch)


def round_half_up(x):
    return math.floor(x + 0.5)


def recount_sparsity(c, arch):
    """Remove channels by the counting rule, rebuild widths one by one, count parameters."""
    widths = list(arch.widths)
    hidden = list(range(1, len(widths) - 1))
    latent = len(arch.hidden_dims) + 1
    order = [b for b in hidden if b != latent] + [latent]
    for ci, b in zip(c, order):
        n = widths[b]
        widths[b] = n - min(round_half_up(ci * n), n - 1)
    base = sum((arch.widths[i] + 1) * arch.widths[i + 1] for i in range(len(widths) - 1))
    now = 0
    for i in range(len(widths) - 1):
        for _ in range(widths[i + 1]):
            now += widths[i] + 1
    return (base - now) / base


def enumerate_grid(points, m):
    return list(itertools.product(points, repeat=m))
