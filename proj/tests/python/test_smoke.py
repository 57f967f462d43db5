import math
import os
import pathlib

import numpy as np
import pytest

import mmhdc

DATA_DIR = pathlib.Path(os.environ.get("MMHDC_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def test_encoder_shapes_and_determinism():
    enc = mmhdc.Encoder(mmhdc.EncoderKind.onlinehd, 6, 50, seed=3)
    again = mmhdc.Encoder(mmhdc.EncoderKind.onlinehd, 6, 50, seed=3)
    assert enc.projection.shape == (6, 50)
    assert enc.phase.shape == (50,)
    x = np.linspace(-1, 1, 6)
    h = enc.encode(x)
    assert np.array_equal(h, again.encode(x))
    assert np.all(np.abs(h) <= 1.0)
    z = x @ enc.projection
    assert np.allclose(h, np.cos(z + enc.phase) * np.sin(z))
    with pytest.raises(ValueError):
        enc.encode(np.zeros(5))


def test_normalize_and_similarity():
    assert np.allclose(mmhdc.normalize_l2(np.array([3.0, 4.0])), [0.6, 0.8])
    assert mmhdc.similarity(np.array([1.0, 2.0]), np.array([3.0, 4.0])) == 11.0
    p = mmhdc.PrototypePair(np.array([2.0, -1.0]), np.zeros(2))
    assert mmhdc.margin_score(p, np.array([1.0, 0.0])) == 2.0
    assert mmhdc.predict_binary(p, np.array([1.0, 0.0])) == 1


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    h = rng.normal(scale=0.5, size=(8, 5))
    y = np.array([1, -1] * 4)
    p = mmhdc.PrototypePair(rng.normal(size=5), rng.normal(size=5))
    g_plus, g_minus = mmhdc.gradients(p, h, y, 10.0, mmhdc.Loss.squared_hinge)
    assert np.array_equal(g_minus, -g_plus)
    eps = 1e-6
    fd = np.zeros(5)
    for k in range(5):
        a = mmhdc.PrototypePair(p.plus + eps * np.eye(5)[k], p.minus)
        b = mmhdc.PrototypePair(p.plus - eps * np.eye(5)[k], p.minus)
        fa = mmhdc.objective(a, h, y, 10.0, mmhdc.Loss.squared_hinge).objective
        fb = mmhdc.objective(b, h, y, 10.0, mmhdc.Loss.squared_hinge).objective
        fd[k] = (fa - fb) / (2 * eps)
    assert np.linalg.norm(fd - g_plus) <= 1e-5 * np.linalg.norm(fd)


def test_fit_on_separable_data():
    x, y, u = mmhdc.make_separable(30, 4, 3.0, 1)
    cfg = mmhdc.MarginConfig()
    cfg.lr = 1e-2
    cfg.batch_size = 10
    cfg.epochs = 20
    proto, trace = mmhdc.fit(x, np.array(y), cfg)
    assert len(trace) == 20
    assert trace[-1]["train_accuracy"] == 1.0


def test_dual_certificate():
    x = np.array([[1.0], [-1.0]])
    y = np.array([1, -1])
    cert = mmhdc.svm_dual_solve(x, y, 10.0, 1e-12)
    assert math.isclose(cert.lam.sum(), 1.0, rel_tol=1e-12)
    assert math.isclose(cert.w[0], 1.0, rel_tol=1e-12)
    assert mmhdc.check_kkt(cert, x, y, 10.0, 1e-6) <= 1e-6
    p = mmhdc.prototype_decomposition(cert, y, x)
    assert np.allclose(p.plus - p.minus, cert.w)
    assert "gap" in str(cert)


def test_ovo_fit_predict_and_save(tmp_path):
    rng = np.random.default_rng(4)
    centers = rng.normal(size=(3, 5))
    labels = np.repeat(np.arange(3), 15)
    x = centers[labels] + 0.05 * rng.normal(size=(45, 5))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    enc = mmhdc.Encoder(mmhdc.EncoderKind.onlinehd, 5, 128, seed=2)
    settings = mmhdc.TrainSettings()
    settings.lr = 1e-3
    settings.batch_size = 16
    model = mmhdc.ovo_fit(x, labels, 3, enc, settings, 5)
    assert model.num_models == 3
    pred = np.array(model.predict_batch(x))
    assert (pred == labels).mean() == 1.0
    path = tmp_path / "model.bin"
    model.save(path)
    back = mmhdc.OvOEnsemble.load(path)
    assert back.predict(x[7]) == model.predict(x[7])


def test_idx_loader():
    subset = DATA_DIR / "mnist-subset"
    if not subset.exists():
        pytest.skip("MNIST subset not present")
    images = mmhdc.load_idx_images(subset / "t10k-images-idx3-ubyte.gz")
    labels = mmhdc.load_idx_labels(subset / "t10k-labels-idx1-ubyte.gz")
    assert images.shape == (2000, 784)
    assert len(labels) == 2000
    assert images.min() == 0.0 and images.max() == 1.0
