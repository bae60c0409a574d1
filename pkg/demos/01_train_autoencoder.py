#!/usr/bin/env python3
# %% [markdown]
# # Training the dense autoencoder
#
# A small autoencoder trained on synthetic blob images so this runs in seconds.
# Point ``MNIST_DIR`` at a folder of IDX files to train on MNIST instead.

# %%
import os
from pathlib import Path

import numpy as np

from softprune.data import load_idx_images, split_eval_subset, synthetic_images
from softprune.evaluate import evaluate
from softprune.nn import ArchSpec, TrainConfig, init_autoencoder, train

mnist = Path(os.environ.get("MNIST_DIR", "data/mnist"))
if (mnist / "train-images-idx3-ubyte").exists():
    train_set = load_idx_images(mnist / "train-images-idx3-ubyte")
    test_set = load_idx_images(mnist / "t10k-images-idx3-ubyte")
    arch, epochs = ArchSpec(), 2
else:
    train_set, test_set = synthetic_images(1024, seed=0), synthetic_images(256, seed=1)
    arch, epochs = ArchSpec(784, (64, 48), 32), 5
print(f"{len(train_set)} training images, widths {arch.widths}")

# %% [markdown]
# Plain minibatch SGD. The loss history holds the mean training MSE per epoch.

# %%
model = init_autoencoder(arch, seed=0)
result = train(model, train_set.images, TrainConfig(epochs=epochs, batch_size=32, seed=0))
for epoch, loss in enumerate(result.loss_history, 1):
    print(f"epoch {epoch:2d}  train mse {loss:.5f}")

# %%
evalset = split_eval_subset(test_set, 256)
err, db = evaluate(result.model, evalset)
print(f"held-out mse {err:.5f}, psnr {db:.2f} dB, {result.model.n_params:,} parameters")
print("untrained psnr for comparison:", round(evaluate(model, evalset)[1], 2), "dB")
