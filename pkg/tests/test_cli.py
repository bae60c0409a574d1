import json

import numpy as np
import pytest

from softprune import io
from softprune.cli import run
from softprune.data import load_idx_images, split_eval_subset, synthetic_images
from softprune.evaluate import evaluate

SMALL = """\
arch:
  input_dim: 784
  hidden_dims: [32, 24]
  latent_dim: 16
train:
  epochs: 3
objective:
  target_sparsity: 0.3
  tolerance: 0.03
  eval_count: 64
grid:
  points_per_group: 4
gd:
  max_iters: 20
  fd_step: 0.1
  step_size: 0.003
data:
  synthetic: true
  synthetic_train: 256
  synthetic_test: 96
baselines:
  probe_budget: 2000
  image_count: 4
seed: 2
"""


def strip_runtime(obj):
    if isinstance(obj, dict):
        return {k: strip_runtime(v) for k, v in obj.items() if k != "runtime_s"}
    return obj


def read_json(path):
    return json.loads(path.read_text())


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    (root / "run.yaml").write_text(SMALL)
    assert run(["train", "--config", str(root / "run.yaml"), "--out", str(root / "a")]) == 0
    return root


def cli(workdir, *args, out="a"):
    return run([*args, "--config", str(workdir / "run.yaml"), "--out", str(workdir / out)])


def test_train_outputs(workdir):
    out = workdir / "a"
    summary = read_json(out / "train.json")
    model, seed = io.load_model(out / "model.bin")
    assert seed == 2
    evalset = split_eval_subset(synthetic_images(96, 3), 64)
    assert evaluate(model, evalset) == (summary["eval_mse"], summary["eval_psnr_db"])
    history = (out / "loss_history.csv").read_text().splitlines()
    assert history[0] == "epoch,train_mse" and len(history) == 4
    assert io.read_pgm(out / "baseline.pgm").shape == (56, 4 * 28)


def test_groups(workdir, capsys):
    assert cli(workdir, "groups", "--model", str(workdir / "a" / "model.bin"), out="g") == 0
    text = capsys.readouterr().out
    data = read_json(workdir / "g" / "groups.json")
    rows = data["groups"]
    assert [r["component"] for r in rows] == ["encoder"] * 2 + ["decoder"] * 2 + ["coupling"]
    for r in rows:
        assert f"{r['channel_count']:>9} {r['size']:>10}" in text
    assert f"total parameters: {data['total_params']}" in text


def test_groups_tiny(tmp_path):
    from softprune.nn import ArchSpec, init_autoencoder
    io.save_model(init_autoencoder(ArchSpec(4, (3,), 2), 0), tmp_path / "t.bin")
    assert run(["groups", "--model", str(tmp_path / "t.bin"), "--out", str(tmp_path)]) == 0
    assert [r["size"] for r in read_json(tmp_path / "groups.json")["groups"]] == [21, 21, 14]


def test_baselines(workdir):
    assert cli(workdir, "baselines", "--model", str(workdir / "a" / "model.bin"), out="b") == 0
    data = read_json(workdir / "b" / "baselines.json")
    for name in ("random", "norm_based"):
        assert abs(data[name]["achieved_sparsity"] - 0.3) <= 0.03
        assert data[name]["delta_mse"] == pytest.approx(data[name]["mse"] - data["baseline_mse"])
    assert sorted(data["norm_based"]["group_order"]) == [1, 2, 3, 4, 5]


def _reprune(workdir, coefficients, out):
    text = ",".join(repr(c) for c in coefficients)
    assert cli(workdir, "prune", "--model", str(workdir / "a" / "model.bin"), "--coefficients", text, out=out) == 0
    return read_json(workdir / out / "prune.json")


def test_grid_search_and_reprune(workdir):
    assert cli(workdir, "grid-search", "--model", str(workdir / "a" / "model.bin"), out="gs") == 0
    data = read_json(workdir / "gs" / "grid_search.json")
    assert data["enumerated"] == 4 ** 5
    assert data["evaluated"] == data["retained"]
    rows = (workdir / "gs" / "grid_candidates.csv").read_text().splitlines()
    assert len(rows) == data["retained"] + 1
    best_csv = max(float(r.split(",")[6]) for r in rows[1:])
    assert data["result"]["psnr_db"] == best_csv
    again = _reprune(workdir, data["result"]["coefficients_full"], "gs_re")
    assert again["result"]["psnr_db"] == data["result"]["psnr_db"]
    # the saved pruned model reproduces the reported numbers
    model, _ = io.load_model(workdir / "gs" / "grid_search_pruned.bin")
    evalset = split_eval_subset(synthetic_images(96, 3), 64)
    assert evaluate(model, evalset) == (data["result"]["mse"], data["result"]["psnr_db"])


def test_optimize_and_reprune(workdir):
    assert cli(workdir, "optimize", "--model", str(workdir / "a" / "model.bin"), out="opt") == 0
    data = read_json(workdir / "opt" / "optimize.json")
    assert abs(data["result"]["achieved_sparsity"] - 0.3) <= 0.03
    trace = (workdir / "opt" / "gd_trace.csv").read_text().splitlines()
    assert len(trace) == data["iterations"] + 1
    assert data["objective_evaluations"] <= 11 * 20
    again = _reprune(workdir, data["result"]["coefficients_full"], "opt_re")
    assert again["result"]["psnr_db"] == data["result"]["psnr_db"]


def test_prune_zero_and_reload(workdir):
    data = _reprune(workdir, [0, 0, 0, 0, 0], "p0")
    assert data["params_after"] == data["params_before"]
    assert cli(workdir, "evaluate", "--model", str(workdir / "p0" / "pruned.bin"), out="p0") == 0
    ev = read_json(workdir / "p0" / "evaluate.json")
    assert ev["psnr_db"] == data["result"]["psnr_db"]
    assert ev["achieved_sparsity"] == 0.0


def test_prune_parameter_count(workdir):
    data = _reprune(workdir, [0.3, 0.3, 0.3, 0.3, 0.3], "p3")
    sp = data["result"]["achieved_sparsity"]
    assert data["params_after"] == round((1 - sp) * data["params_before"])


def test_prune_length_mismatch(workdir):
    assert cli(workdir, "prune", "--model", str(workdir / "a" / "model.bin"),
               "--coefficients", "0.1,0.2", out="bad") == 2


def test_usage_error():
    assert run(["frobnicate"]) == 2


def test_infeasible_exit_code(workdir):
    model = str(workdir / "a" / "model.bin")
    for cmd in ("grid-search", "optimize", "baselines"):
        code = cli(workdir, cmd, "--model", model, "--target-sparsity", "0.99", "--tolerance", "0.001",
                   out=f"inf_{cmd}")
        assert code == 5
        files = list((workdir / f"inf_{cmd}").glob("*.json"))
        payload = read_json(files[0])
        assert payload["status"] == "infeasible" and payload["reason"]


def test_corrupt_idx(tmp_path):
    bad = tmp_path / "bad-idx"
    bad.write_bytes(b"\x00\x00\x08\x01" + bytes(20))
    cfg = tmp_path / "c.yaml"
    cfg.write_text(f"data:\n  train_images: {bad}\n  test_images: {bad}\ntrain:\n  epochs: 1\n")
    assert run(["train", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 4


def test_missing_data(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(f"data:\n  train_images: {tmp_path / 'nope'}\n")
    assert run(["train", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3


def test_determinism(workdir):
    model = str(workdir / "a" / "model.bin")
    for cmd, name in (("baselines", "baselines.json"), ("grid-search", "grid_search.json"),
                      ("optimize", "optimize.json"), ("groups", "groups.json")):
        outs = []
        for rep in ("x", "y"):
            assert cli(workdir, cmd, "--model", model, out=f"det_{rep}_{cmd}") == 0
            outs.append(strip_runtime(read_json(workdir / f"det_{rep}_{cmd}" / name)))
        assert outs[0] == outs[1]
    assert cli(workdir, "train", out="a2") == 0
    assert (workdir / "a2" / "model.bin").read_bytes() == (workdir / "a" / "model.bin").read_bytes()
    assert strip_runtime(read_json(workdir / "a2" / "train.json")) == strip_runtime(read_json(workdir / "a" / "train.json"))
