#!/usr/bin/env python3
# %% [markdown]
# # Choosing per-group coefficients
#
# Four ways to pick a coefficient vector that hits a 30% sparsity target:
# random sampling, a norm-ordered greedy fill, exhaustive grid search and
# momentum gradient descent on a penalized objective with finite-difference
# gradients.

# %%
import time

from softprune.baselines import norm_baseline, random_baseline
from softprune.data import split_eval_subset, synthetic_images
from softprune.evaluate import ObjectiveConfig, PruningContext
from softprune.gd import GdConfig, optimize
from softprune.grid import GridConfig, grid_search
from softprune.nn import ArchSpec, TrainConfig, init_autoencoder, train

arch = ArchSpec(784, (64, 48), 32)
model = train(init_autoencoder(arch, 0), synthetic_images(1024, 0).images, TrainConfig(epochs=5)).model
evalset = split_eval_subset(synthetic_images(256, 1), 256)
objective = ObjectiveConfig(target_sparsity=0.3, tolerance=0.02)

# %%
results = {}
ctx = PruningContext(model, evalset)
results["random"] = random_baseline(ctx, objective, seed=0).report
results["norm"] = norm_baseline(ctx, objective).report
t0 = time.perf_counter()
grid = grid_search(ctx, GridConfig(6, objective))
results["grid"] = grid.report
print(f"grid: {grid.enumerated} combinations, {grid.retained} inside the window "
      f"({time.perf_counter() - t0:.1f} s)")
gd = optimize(PruningContext(model, evalset), GdConfig(step_size=0.003, fd_step=0.1, max_iters=40,
                                                       objective=objective))
results["gd"] = gd.report
print(f"gd: {len(gd.trace)} iterations, {gd.evaluations} objective calls")

# %%
for name, r in results.items():
    coeffs = ", ".join(f"{x:.2f}" for x in r.coefficients)
    print(f"{name:<7} psnr {r.psnr_db:6.2f} dB  sparsity {r.achieved_sparsity:.4f}  c = [{coeffs}]")
