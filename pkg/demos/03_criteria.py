#!/usr/bin/env python3
# %% [markdown]
# # Which channels to drop
#
# Within a group the channels are ranked by an importance score: the L1 or L2
# norm of the channel's producer row, bias and consumer column, or a seeded
# random order. The same coefficient vector then yields different models.

# %%
import numpy as np

from softprune.data import synthetic_images, split_eval_subset
from softprune.evaluate import PruningContext
from softprune.nn import ArchSpec, TrainConfig, init_autoencoder, train
from softprune.pruning import CRITERIA, Criterion

arch = ArchSpec(784, (64, 48), 32)
model = train(init_autoencoder(arch, 0), synthetic_images(1024, 0).images, TrainConfig(epochs=5)).model
evalset = split_eval_subset(synthetic_images(256, 1), 256)

# %%
c = np.full(5, 0.3)
for kind in CRITERIA:
    ctx = PruningContext(model, evalset, Criterion(kind, seed=0))
    err, db, sp = ctx.measure(c)
    print(f"{kind:<8} psnr {db:6.2f} dB (baseline {ctx.baseline_psnr:.2f}), sparsity {sp:.4f}")
