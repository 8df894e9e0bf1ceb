"""Input augmentation, the gated forward pass, init and checkpoints."""

import math

import numpy as np
import pytest

from elastimesh import autodiff as ad
from elastimesh.autodiff import HyperDual
from elastimesh.errors import InvalidArgumentError
from elastimesh.network import (ACTIVATIONS, PinnModel, augment, forward,
                                init_model, load_model, save_model, value_batch)


def test_augment_at_origin():
    got = augment(0.0, 0.0)
    t, c = math.tan(0.1), 1.0 / math.tan(0.1)
    assert got == pytest.approx([0.0, 0.0, t, t, c, c], rel=1e-15)


def test_augment_midpoint():
    got = augment(0.5, 0.5)
    assert got[2] == pytest.approx(math.tan(0.5), rel=1e-12)
    assert got[3] == pytest.approx(0.546302, abs=1e-6)


def test_augment_finite_at_corners():
    for xi in (0.0, 1.0):
        for eta in (0.0, 1.0):
            assert np.all(np.isfinite(augment(xi, eta)))


def test_augment_rejects_out_of_range():
    with pytest.raises(InvalidArgumentError):
        augment(-0.01, 0.5)
    with pytest.raises(InvalidArgumentError):
        augment(0.5, 1.2)


def test_zero_parameters_map_to_bbox_center():
    bbox = ((-1.0, 3.0), (2.0, 4.0))
    model = init_model(depth=3, width=4, seed=0, bbox=bbox)
    model.hidden = [(np.zeros_like(W), b, np.zeros_like(V), np.zeros_like(c))
                    for W, b, V, c in model.hidden]
    model.out_w = np.zeros_like(model.out_w)
    for xi, eta in ((0.0, 0.0), (0.3, 0.9), (1.0, 0.5)):
        x, y = forward(model, xi, eta)
        assert x == pytest.approx(1.0) and y == pytest.approx(3.0)


def test_open_gate_reduces_to_plain_layer():
    # V = 0 with a large offset saturates the gate at 1; with the same
    # primitive arithmetic, removing the gate changes nothing measurable.
    model = init_model(depth=1, width=6, seed=2)
    W, b, _, _ = model.hidden[0]
    model.hidden[0] = (W, b, np.zeros_like(W), np.full(6, 50.0))
    xi, eta = 0.37, 0.81
    x, y = forward(model, xi, eta)

    u = augment(xi, eta)[None, :]
    h = ad.tanh(u @ W.T + b)  # plain (gateless) layer, same op order
    o = ad.sigmoid(h @ model.out_w.T + model.out_b)[0]
    assert abs(x - o[0]) <= 1e-20 and abs(y - o[1]) <= 1e-20


def test_forward_deterministic():
    model = init_model(depth=2, width=8, seed=5)
    a = forward(model, 0.123, 0.456)
    b = forward(model, 0.123, 0.456)
    assert a == b


def test_init_reproducible_and_glorot_bounded():
    a = init_model(depth=8, width=50, seed=42)
    b = init_model(depth=8, width=50, seed=42)
    for (Wa, ba, Va, ca), (Wb, bb, Vb, cb) in zip(a.hidden, b.hidden):
        assert np.array_equal(Wa, Wb) and np.array_equal(Va, Vb)
        assert np.array_equal(ba, bb) and np.array_equal(ca, cb)
    assert np.array_equal(a.out_w, b.out_w)

    bound = math.sqrt(6.0 / (6 + 50))
    W0 = a.hidden[0][0]
    assert np.max(np.abs(W0)) <= bound
    assert np.all(a.hidden[0][1] == 0.0)
    assert np.all(a.hidden[0][3] == 2.0)


def test_parameter_count_closed_form():
    model = init_model(depth=8, width=50, seed=0)
    first = 2 * (50 * 6 + 50)
    middle = 7 * 2 * (50 * 50 + 50)
    out = 50 * 2 + 2
    assert model.parameter_count() == first + middle + out == 36502


def test_output_always_inside_bbox(rng):
    bbox = np.array([[0.5, 2.5], [-1.0, 0.0]])
    model = init_model(depth=2, width=6, seed=0, bbox=bbox)
    # exaggerate parameters far beyond trained magnitudes
    model.hidden = [(W * 50.0, b + rng.normal(size=b.shape) * 10.0,
                     V * 50.0, c + rng.normal(size=c.shape) * 10.0)
                    for W, b, V, c in model.hidden]
    model.out_w = model.out_w * 80.0
    xi = rng.uniform(0.0, 1.0, size=200)
    eta = rng.uniform(0.0, 1.0, size=200)
    x, y = value_batch(model.params_view(), xi, eta,
                       activation=model.activation, bbox=model.bbox)
    assert np.all(x >= 0.5) and np.all(x <= 2.5)
    assert np.all(y >= -1.0) and np.all(y <= 0.0)


def test_init_validation():
    with pytest.raises(InvalidArgumentError):
        init_model(depth=0, width=4)
    with pytest.raises(InvalidArgumentError):
        init_model(activation="swish")
    with pytest.raises(InvalidArgumentError):
        init_model(bbox=((0.0, 0.0), (0.0, 1.0)))


@pytest.mark.parametrize("name", sorted(ACTIVATIONS))
def test_activation_values_and_derivatives(name):
    act = ACTIVATIONS[name]
    ref = {
        "tanh": np.tanh,
        "sigmoid": lambda z: 1.0 / (1.0 + np.exp(-z)),
        "relu": lambda z: np.maximum(z, 0.0),
        "leakyrelu": lambda z: np.where(z > 0, z, 0.01 * z),
        "elu": lambda z: np.where(z > 0, z, np.exp(np.minimum(z, 0.0)) - 1.0),
        "selu": lambda z: 1.0507009873554805 * np.where(
            z > 0, z, 1.6732632423543772 * (np.exp(np.minimum(z, 0.0)) - 1.0)),
    }[name]
    zs = np.array([-1.7, -0.4, 0.3, 1.9])
    assert act(zs) == pytest.approx(ref(zs), rel=1e-12)

    # first/second derivative channels against central differences
    h = 1e-5
    for z0 in (-1.3, -0.2, 0.4, 1.1):
        out = act(HyperDual(z0, 1.0, 1.0, 0.0))
        fd1 = (ref(np.array([z0 + h]))[0] - ref(np.array([z0 - h]))[0]) / (2 * h)
        fd2 = (ref(np.array([z0 + h]))[0] - 2 * ref(np.array([z0]))[0]
               + ref(np.array([z0 - h]))[0]) / h ** 2
        assert out.d1 == pytest.approx(fd1, rel=1e-6, abs=1e-8)
        assert out.d12 == pytest.approx(fd2, rel=1e-4, abs=1e-5)


def test_checkpoint_round_trip(tmp_path):
    model = init_model(depth=3, width=7, activation="elu", seed=9,
                       bbox=((0.0, 2.0), (1.0, 5.0)))
    path = tmp_path / "model.npz"
    save_model(model, path)
    back = load_model(path)
    assert back.depth == model.depth and back.width == model.width
    assert back.activation == model.activation
    assert np.array_equal(back.bbox, model.bbox)
    for (Wa, ba, Va, ca), (Wb, bb, Vb, cb) in zip(model.hidden, back.hidden):
        assert np.array_equal(Wa, Wb) and np.array_equal(ba, bb)
        assert np.array_equal(Va, Vb) and np.array_equal(ca, cb)
    assert np.array_equal(back.out_w, model.out_w)
    assert np.array_equal(back.out_b, model.out_b)
    # identical predictions after reload
    assert forward(back, 0.3, 0.7) == forward(model, 0.3, 0.7)
