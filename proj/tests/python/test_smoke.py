import math

import numpy as np
import pytest

import cext

SMALL = {
    "scenario.kind": "street",
    "array.n_rx": "4",
    "array.n_tx": "4",
    "carrier.n_subcarriers": "8",
}

TINY_MODEL = {
    "model.patch": "1",
    "model.embed_dim": "16",
    "model.encoder_depth": "1",
    "model.decoder_depth": "1",
    "model.decoder_dim": "8",
    "model.heads": "2",
    "model.decoder_heads": "2",
    "model.ffn_ratio": "2",
}


def test_generate_shapes_and_power():
    ds = cext.generate(SMALL, n_samples=3, seed=5)
    assert len(ds) == 3
    h = ds.csi(0)
    assert h.shape == (4, 4, 8)
    assert h.dtype == np.complex128
    p = ds.pdp(0)
    assert p.shape[:2] == (4, 4)
    assert np.all(p >= 0)
    assert np.all(np.isfinite(h))


def test_generation_is_deterministic(tmp_path):
    a = cext.generate(SMALL, n_samples=2, seed=9)
    b = cext.generate(SMALL, n_samples=2, seed=9)
    np.testing.assert_array_equal(a.csi(1), b.csi(1))
    path = tmp_path / "d.bin"
    a.save(str(path))
    np.testing.assert_array_equal(cext.read_dataset(str(path)).csi(1), a.csi(1))


def test_features_examples():
    paths = cext.effective_paths(np.array([1.0, 0.5, 0.2]), 1e-9)
    assert [p for p, _ in paths] == [1.0, 0.5]
    total, delay = cext.extract_features(np.array([0, 1.0, 0, 0.5]), 10e-9)
    assert total == pytest.approx(1.5)
    assert delay == pytest.approx((10e-9 + 0.5 * 30e-9) / 1.5)
    with pytest.raises(cext.EmptyProfileError):
        cext.extract_features(np.zeros(4), 1e-9)


def test_mask_plan_example():
    plan = cext.mask_plan([0.3, 0.1, 0.9, 0.5], 0.5)
    assert plan["ids_shuffle"] == [1, 0, 3, 2]
    assert plan["ids_keep"] == [1, 0]
    assert plan["binary_mask"] == [0, 0, 1, 1]
    with pytest.raises(cext.ConfigError):
        cext.mask_plan([0.1, 0.2], 1.0)


def test_nmse_and_schedule():
    h = np.array([1.0, -2.0, 0.5])
    assert cext.nmse_db(np.zeros(3), h) == 0.0
    assert cext.nmse_db(h, h) == -120.0
    assert cext.lr_at(20) == pytest.approx(5e-4)
    assert cext.lr_at(220) == pytest.approx((1e-3 + 1e-6) / 2)


def test_train_evaluate_and_reload(tmp_path):
    ds = cext.generate(SMALL, n_samples=6, seed=3)
    model, history = cext.train_ce(ds, seed=1, epochs=2, model=TINY_MODEL)
    assert len(history) == 2
    assert all(math.isfinite(a) and math.isfinite(b) for a, b in history)
    rows = model.evaluate(ds, percentages=[10, 25], mask_seeds=2, split="all")
    assert [r["known_percent"] for r in rows] == [10, 25]
    path = tmp_path / "m.ckpt"
    model.save(str(path))
    again = cext.load_model(str(path)).evaluate(ds, percentages=[10, 25], mask_seeds=2, split="all")
    assert [r["nmse_masked_db"] for r in again] == [r["nmse_masked_db"] for r in rows]
    with pytest.raises(cext.IoError):
        cext.load_model(str(tmp_path / "missing.ckpt"))
