import numpy as np
import pytest

from softprune.data import synthetic_images
from softprune.errors import ConfigError, DimensionError
from softprune.evaluate import ObjectiveConfig, PruningContext, evaluate, objective, objective_from_measure, psnr
from softprune.nn import ArchSpec, init_autoencoder


class TestPsnr:
    def test_uniform_error(self):
        a = np.zeros((3, 4))
        b = np.full((3, 4), 0.1)
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-12)

    def test_perfect_is_capped(self):
        a = np.random.default_rng(0).uniform(size=(2, 9))
        assert psnr(a, a) == 100.0

    def test_mean_of_per_image(self):
        a = np.zeros((2, 4))
        b = np.vstack([np.full(4, 0.1), np.full(4, 0.01)])
        assert psnr(a, b) == pytest.approx(30.0, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            psnr(np.zeros((2, 3)), np.zeros((3, 3)))

    def test_strictly_decreasing_in_error(self):
        a = np.zeros((2, 4))
        b = np.full((2, 4), 0.05)
        worse = b.copy()
        worse[1] = 0.06
        assert psnr(a, worse) < psnr(a, b)


@pytest.fixture(scope="module")
def ctx():
    arch = ArchSpec(784, (24, 16), 8)
    return PruningContext(init_autoencoder(arch, 0), synthetic_images(32, seed=5))


class TestEvaluate:
    def test_deterministic(self, ctx):
        assert evaluate(ctx.model, ctx.evalset) == evaluate(ctx.model, ctx.evalset)

    def test_zero_coefficients_match_baseline(self, ctx):
        err, db, sp = ctx.measure(np.zeros(5))
        assert (err, db) == evaluate(ctx.model, ctx.evalset)
        assert sp == 0.0

    def test_only_uses_evalset(self, ctx):
        err, db = evaluate(ctx.model, ctx.evalset)
        more = synthetic_images(64, seed=5)
        assert evaluate(ctx.model, more.images[:32]) == (err, db)

    def test_empty(self, ctx):
        with pytest.raises(DimensionError):
            evaluate(ctx.model, np.zeros((0, 784)))


class TestObjective:
    def test_reported_operating_point(self):
        cfg = ObjectiveConfig(0.20, 0.01, 1000.0)
        assert objective_from_measure(25.34, 0.2080, cfg) == pytest.approx(-25.276, abs=1e-9)

    def test_on_target_is_negative_psnr(self):
        cfg = ObjectiveConfig(0.25, 0.01, 1000.0)
        assert objective_from_measure(21.5, 0.25, cfg) == -21.5

    def test_no_penalty(self):
        cfg = ObjectiveConfig(0.2, 0.01, 0.0)
        assert objective_from_measure(21.5, 0.9, cfg) == -21.5

    def test_pure(self, ctx):
        cfg = ObjectiveConfig()
        c = [0.3, 0.1, 0.5, 0.2, 0.4]
        assert objective(c, ctx, cfg) == objective(c, ctx, cfg)
        _, db, sp = ctx.measure(c)
        assert objective(c, ctx, cfg) == -db + 1000.0 * (sp - 0.2) ** 2

    @pytest.mark.parametrize("kw", [dict(target_sparsity=0.0), dict(target_sparsity=1.0),
                                    dict(tolerance=0.0), dict(eval_count=0)])
    def test_config_validation(self, kw):
        with pytest.raises(ConfigError):
            ObjectiveConfig(**kw)


def test_alternative_metric():
    arch = ArchSpec(784, (12,), 6)
    neg_mse = lambda a, b: -float(np.mean((a - b) ** 2))
    ctx = PruningContext(init_autoencoder(arch, 0), synthetic_images(8, 0), metric=neg_mse)
    assert ctx.baseline_psnr == -ctx.baseline_mse
