"""Vector-field evaluators against finite-difference and Monte-Carlo oracles,
plus model serialization and the bundled benchmark fixture."""
import json

import numpy as np
import pytest

from odeproxy.fpa import A, B, TAU, fpa_input_box, fpa_model, fpa_weight_matrix
from odeproxy.network import (
    Linear,
    ModelError,
    Scale,
    Sum,
    Tanh,
    VectorField,
    global_lipschitz_bound,
    lipschitz_bound,
    load_model,
    resnet_forward,
    save_model,
)
from odeproxy.sets import Box, interval_hull, zono_from_box


def random_field(rng, n=3):
    W1 = rng.normal(size=(n, n))
    b1 = rng.normal(size=n)
    W2 = rng.normal(size=(n, n)) / np.sqrt(n)
    layers = (Linear(W1, b1), Tanh(), Linear(W2, np.zeros(n)))
    return VectorField(layers, n)


def fd_jacobian(f, x, h=1e-6):
    n = x.size
    J = np.zeros((n, n))
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        J[:, i] = (f.eval(x + e) - f.eval(x - e)) / (2 * h)
    return J


def fd_hessian_apply(f, x, v, h=1e-5):
    return (f.jacobian(x + h * v) - f.jacobian(x - h * v)) / (2 * h)


# -- derivative oracles (acceptance criterion 7 backing) --------------------

def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(10)
    fields = [random_field(rng), fpa_model()]
    for f in fields:
        for _ in range(50):
            x = rng.normal(size=f.dim)
            J = f.jacobian(x)
            Jfd = fd_jacobian(f, x)
            rel = np.abs(J - Jfd) / (1.0 + np.abs(Jfd))
            assert rel.max() < 1e-5


def test_hessian_apply_matches_finite_differences():
    rng = np.random.default_rng(11)
    fields = [random_field(rng), fpa_model()]
    for f in fields:
        for _ in range(50):
            x = rng.normal(size=f.dim)
            v = rng.normal(size=f.dim)
            H = f.hessian_apply(x, v)
            Hfd = fd_hessian_apply(f, x, v)
            rel = np.abs(H - Hfd) / (1.0 + np.abs(Hfd))
            assert rel.max() < 1e-5


def test_eval_broadcasts_over_batches():
    f = fpa_model()
    rng = np.random.default_rng(12)
    X = rng.normal(size=(7, 5))
    batched = f.eval(X)
    for i in range(7):
        assert np.allclose(batched[i], f.eval(X[i]))


# -- interval soundness by Monte-Carlo --------------------------------------

def test_interval_eval_sound():
    rng = np.random.default_rng(13)
    f = random_field(rng)
    lo = rng.normal(size=3)
    b = Box(lo, lo + rng.uniform(0.1, 1.0, size=3))
    enc = f.interval_eval(b)
    xs = rng.uniform(b.lo, b.hi, size=(5000, 3))
    ys = f.eval(xs)
    assert np.all((ys >= enc.lo - 1e-12) & (ys <= enc.hi + 1e-12))


def test_interval_jacobian_sound():
    rng = np.random.default_rng(14)
    f = random_field(rng)
    lo = rng.normal(size=3)
    b = Box(lo, lo + rng.uniform(0.1, 1.0, size=3))
    IJ = f.interval_jacobian(b)
    for _ in range(300):
        x = rng.uniform(b.lo, b.hi)
        assert IJ.contains(f.jacobian(x), slack=1e-12)


def test_interval_hessian_apply_sound():
    rng = np.random.default_rng(15)
    f = random_field(rng)
    lo = rng.normal(size=3)
    b = Box(lo, lo + rng.uniform(0.1, 0.8, size=3))
    v = Box([-0.5, -0.1, 0.0], [0.5, 0.3, 0.2])
    IH = f.interval_hessian_apply(b, v)
    for _ in range(300):
        x = rng.uniform(b.lo, b.hi)
        w = rng.uniform(v.lo, v.hi)
        assert IH.contains(f.hessian_apply(x, w), slack=1e-10)


def test_interval_directional_taylor_sound():
    """d2/ds2 entries must cover f''(x)[w, w] for sampled x and w."""
    rng = np.random.default_rng(16)
    f = random_field(rng)
    lo = rng.normal(size=3)
    b = Box(lo, lo + rng.uniform(0.1, 0.6, size=3))
    v = Box([-0.3, -0.2, -0.1], [0.3, 0.1, 0.2])
    dd = f.interval_directional_taylor(b, v)
    h = 1e-4
    for _ in range(200):
        x = rng.uniform(b.lo, b.hi)
        w = rng.uniform(v.lo, v.hi)
        d2 = (f.eval(x + h * w) - 2 * f.eval(x) + f.eval(x - h * w)) / h ** 2
        assert np.all(d2 >= dd.d2.lo - 1e-5)
        assert np.all(d2 <= dd.d2.hi + 1e-5)


def test_interval_bilinear_taylor_sound_mixed():
    """Mixed D2 f[u, v] covered for sampled states and direction pairs."""
    rng = np.random.default_rng(17)
    f = random_field(rng)
    lo = rng.normal(size=3)
    b = Box(lo, lo + rng.uniform(0.1, 0.6, size=3))
    u = Box.point(rng.normal(size=3))
    v = Box.point(rng.normal(size=3))
    bl = f.interval_bilinear_taylor(b, u, v)
    h = 1e-4
    for _ in range(200):
        x = rng.uniform(b.lo, b.hi)
        uu, vv = u.center, v.center
        # polarization: D2f[u,v] = (f(x+hu+hv) - f(x+hu) - f(x+hv) + f(x)) / h^2
        mixed = (f.eval(x + h * uu + h * vv) - f.eval(x + h * uu)
                 - f.eval(x + h * vv) + f.eval(x)) / h ** 2
        assert np.all(mixed >= bl.duv.lo - 1e-4)
        assert np.all(mixed <= bl.duv.hi + 1e-4)


# -- residual map -----------------------------------------------------------

def test_resnet_forward_sound():
    rng = np.random.default_rng(18)
    f = fpa_model()
    b = fpa_input_box()
    out = interval_hull(resnet_forward(f, zono_from_box(b)))
    us = rng.uniform(b.lo, b.hi, size=(5000, 5))
    ys = us + f.eval(us)
    assert np.all((ys >= out.lo - 1e-9) & (ys <= out.hi + 1e-9))


def test_resnet_forward_exact_on_point():
    f = fpa_model()
    x = np.array([0.5, 0.8, 0.5, 0.2, -0.6])
    out = interval_hull(resnet_forward(f, zono_from_box(Box.point(x))))
    y = x + f.eval(x)
    assert np.allclose(out.lo, y, atol=1e-12)
    assert np.allclose(out.hi, y, atol=1e-12)


# -- Lipschitz bounds -------------------------------------------------------

def test_global_lipschitz_is_weight_norm():
    f = fpa_model()
    W = fpa_weight_matrix()
    expected = np.abs(TAU) + np.abs(W).sum(axis=1).max()
    assert abs(global_lipschitz_bound(f) - expected) < 1e-9


def test_local_lipschitz_below_global():
    f = fpa_model()
    assert lipschitz_bound(f, fpa_input_box()) <= global_lipschitz_bound(f) + 1e-12


def test_lipschitz_bound_sound_vs_sampled_jacobians():
    rng = np.random.default_rng(19)
    f = fpa_model()
    b = fpa_input_box()
    L = lipschitz_bound(f, b)
    xs = rng.uniform(b.lo, b.hi, size=(500, 5))
    norms = [np.abs(f.jacobian(x)).sum(axis=1).max() for x in xs]
    assert max(norms) <= L + 1e-12


# -- benchmark fixture ------------------------------------------------------

def test_fpa_weight_blocks():
    W = fpa_weight_matrix()
    assert np.allclose(W[:, 0:2], 0.0)  # first two states never feed back
    assert np.allclose(W[0:2, 2:5], A)
    assert np.allclose(W[2:5, 2:5], B @ A)


def test_fpa_model_matches_direct_formula():
    f = fpa_model()
    W = fpa_weight_matrix()
    rng = np.random.default_rng(20)
    for _ in range(20):
        x = rng.normal(size=5)
        assert np.allclose(f.eval(x), TAU * x + W @ np.tanh(x), atol=1e-12)


# -- serialization ----------------------------------------------------------

def test_model_json_roundtrip(tmp_path):
    f = fpa_model()
    path = tmp_path / "model.json"
    save_model(f, path)
    g = load_model(path)
    rng = np.random.default_rng(21)
    for _ in range(10):
        x = rng.normal(size=5)
        assert np.allclose(f.eval(x), g.eval(x), atol=1e-15)


def test_load_model_rejects_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ModelError):
        load_model(path)


def test_load_model_rejects_unknown_layer(tmp_path):
    path = tmp_path / "bad2.json"
    path.write_text(json.dumps({"dim": 2, "layers": [{"type": "relu"}]}))
    with pytest.raises(ModelError):
        load_model(path)


def test_non_square_field_rejected():
    with pytest.raises(ModelError):
        VectorField((Linear(np.ones((2, 3)), np.zeros(2)),), 3)


def test_sum_branch_mismatch_rejected():
    with pytest.raises(ModelError):
        VectorField((Sum(left=(Linear(np.ones((2, 2)), np.zeros(2)),),
                         right=(Linear(np.ones((1, 2)), np.zeros(1)),)),), 2)


def test_scale_layer_roundtrip():
    f = VectorField((Scale(-0.5),), 2)
    g = VectorField.from_json(f.to_json())
    x = np.array([1.0, -2.0])
    assert np.allclose(g.eval(x), -0.5 * x)
