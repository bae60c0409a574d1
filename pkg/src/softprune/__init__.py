"""Performance-aware structured pruning of a dense autoencoder.

Per-group pruning coefficients are chosen to maximize reconstruction PSNR
under a model-sparsity window, either by exhaustive grid search or by
momentum gradient descent on finite-difference gradients.
"""

from .baselines import norm_baseline, random_baseline
from .data import ImageSet, load_idx_images, split_eval_subset, synthetic_images
from .errors import InfeasibleError, SoftPruneError
from .evaluate import EvalReport, ObjectiveConfig, PruningContext, evaluate, objective, psnr
from .gd import GdConfig, gd_step, numerical_gradient, optimize
from .grid import GridConfig, grid_points, grid_search, stage1_filter, stage2_select
from .groups import GroupSet, PruningGroup, identify_groups, total_params
from .nn import ArchSpec, Autoencoder, TrainConfig, forward, init_autoencoder, mse, train
from .pruning import (
    Criterion,
    PruningPlan,
    apply_plan,
    estimated_sparsity,
    exact_sparsity,
    make_plan,
    rank_channels,
)

__version__ = "0.1.0"
