import math

import numpy as np
import pytest

import mvts

TINY_ENCODER = {
    "hidden_channels": 8,
    "output_channels": 4,
    "hidden_groups": 4,
    "output_groups": 2,
    "widths": [3, 2],
}

SYNTH = {
    "num_channels": 4,
    "num_classes": 3,
    "windows_per_class": 10,
    "sample_rate_hz": 24,
    "window_seconds": 2,
    "class_bands": [[1, 2], [4, 5], [7, 8]],
    "seed": 3,
}


def test_synthetic_dataset_shape():
    ds = mvts.generate_synthetic(SYNTH)
    assert ds.windows.shape == (30, 4, 48)
    assert ds.windows.dtype == np.float32
    assert list(ds.labels) == [c for c in range(3) for _ in range(10)]


def test_cts_round_trip(tmp_path):
    ds = mvts.generate_synthetic(SYNTH)
    path = tmp_path / "d.cts"
    mvts.write_cts(ds, path)
    assert mvts.read_cts(path) == ds


def test_dataset_from_numpy():
    x = np.random.default_rng(0).normal(size=(6, 2, 10)).astype(np.float32)
    ds = mvts.Dataset(x, labels=np.array([0, 1, 0, 1, 0, 1], dtype=np.uint8), num_classes=2)
    np.testing.assert_array_equal(ds.windows, x)
    assert ds.select_channels([1]).num_channels == 1


def test_closed_form_losses():
    ortho = np.array([[[1.0], [0.0]], [[0.0], [1.0]]])
    assert mvts.nt_xent([ortho, ortho], tau=1.0) == pytest.approx(math.log(1 + 2 / math.e), abs=1e-9)
    unit = np.ones((2, 1, 1))
    assert mvts.cocoa([unit, unit], tau=1.0, lambda_=1.0) == pytest.approx(4 + 2 * math.e, abs=1e-9)
    assert mvts.ts2vec([np.ones((1, 3, 1)), np.zeros((1, 3, 1)) + 2]) == 0.0


def test_encoder_length():
    assert mvts.encoder_output_len(3000) == 33


def test_balanced_accuracy():
    assert mvts.balanced_accuracy([0, 1, 1, 1], [0, 0, 1, 1], 2) == 0.75


def test_pretrain_finetune_round_trip():
    data = mvts.generate_synthetic(SYNTH)
    train, val, test = mvts.split_dataset(data, seed=1)
    result = mvts.pretrain({"epochs": 1, "batch_size": 8, "encoder": TINY_ENCODER}, train, val)
    assert len(result.epochs) == 1
    assert all(math.isfinite(x) for x in result.step_losses)
    ckpt = mvts.Checkpoint.from_bytes(result.checkpoint.to_bytes())
    assert ckpt == result.checkpoint
    pool = mvts.generate_synthetic(dict(SYNTH, seed=4)).select_channels([0, 1])
    cfg = {"mode": "probe", "samples_per_class": 3, "max_epochs": 2, "patience": 1, "encoder": TINY_ENCODER}
    tuned = mvts.finetune(cfg, ckpt, pool, pool, pool)
    assert 0.0 <= tuned.balanced_accuracy <= 1.0
    scores = tuned.predict(pool)
    np.testing.assert_allclose(scores.sum(axis=1), 1.0, atol=1e-9)
    with pytest.raises(mvts.ConfigError):
        mvts.finetune(cfg, None, pool, pool, pool)


def test_config_errors_are_typed():
    with pytest.raises(mvts.ConfigError):
        mvts.generate_synthetic({"num_clases": 3})


def test_gradcheck_passes():
    report = mvts.gradcheck(instances=2)
    assert "nt_xent" in report
    assert all(ok for ok, _ in report.values())
