"""The neural map (xi, eta) -> (x, y).

Inputs are augmented with shifted tangent/cotangent channels, hidden layers
are gated by data-dependent sigmoid attention, and the output is squashed
through a sigmoid and rescaled to the physical bounding box, so the image
of the map is always inside the box regardless of parameter values.

The forward pass is written once over generic arithmetic and serves four
callers: plain inference on arrays, hyper-dual jet evaluation, and both of
those with parameters wrapped as reverse-tape variables during training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import HyperDual, Var
from .errors import InvalidArgumentError, NumericError
from .pde import SecondOrderJet

#: Affine shift keeping tan/cot arguments inside [0.1, 0.9], away from poles.
_AUG_SCALE = 0.8
_AUG_OFFSET = 0.1

_SELU_LAMBDA = 1.0507009873554804934193349852946
_SELU_ALPHA = 1.6732632423543772848170429916717


# ---------------------------------------------------------------------------
# Activations (generic over ndarray | Var | HyperDual)
# ---------------------------------------------------------------------------

def _re_values(u):
    v = u.re if isinstance(u, HyperDual) else u
    return np.asarray(v.value if isinstance(v, Var) else v, dtype=float)


def _relu(u):
    return u * (_re_values(u) > 0.0).astype(float)


def _leakyrelu(u):
    v = _re_values(u)
    return u * np.where(v > 0.0, 1.0, 0.01)


def _elu(u):
    # exp is evaluated on x*(1-m), which is zero on the positive branch, so
    # large positive pre-activations cannot overflow.
    m = (_re_values(u) > 0.0).astype(float)
    neg = ad.exp(u * (1.0 - m)) - 1.0
    return u * m + neg * (1.0 - m)


def _selu(u):
    m = (_re_values(u) > 0.0).astype(float)
    neg = ad.exp(u * (1.0 - m)) - 1.0
    return (u * m + neg * ((1.0 - m) * _SELU_ALPHA)) * _SELU_LAMBDA


ACTIVATIONS = {
    "tanh": ad.tanh,
    "sigmoid": ad.sigmoid,
    "relu": _relu,
    "leakyrelu": _leakyrelu,
    "elu": _elu,
    "selu": _selu,
}


# ---------------------------------------------------------------------------
# Model container
# ---------------------------------------------------------------------------

@dataclass
class ParamsView:
    """Parameter tensors in forward order; entries are arrays or tape Vars."""

    hidden: list  # (W, b, V, c) per hidden layer
    out_w: object
    out_b: object

    def flat(self) -> list:
        out = []
        for W, b, V, c in self.hidden:
            out.extend([W, b, V, c])
        out.extend([self.out_w, self.out_b])
        return out

    @staticmethod
    def from_flat(entries: list) -> "ParamsView":
        if len(entries) < 6 or (len(entries) - 2) % 4 != 0:
            raise InvalidArgumentError("flat parameter list has wrong length")
        hidden = [tuple(entries[i:i + 4]) for i in range(0, len(entries) - 2, 4)]
        return ParamsView(hidden=hidden, out_w=entries[-2], out_b=entries[-1])


@dataclass
class PinnModel:
    """Parameters of the attention-gated map plus its output bounding box."""

    depth: int
    width: int
    activation: str
    hidden: list  # (W, b, V, c) ndarray tuples
    out_w: np.ndarray
    out_b: np.ndarray
    bbox: np.ndarray  # [[x_lo, x_hi], [y_lo, y_hi]]

    def params_view(self) -> ParamsView:
        return ParamsView(hidden=list(self.hidden), out_w=self.out_w, out_b=self.out_b)

    def set_flat(self, entries: list) -> None:
        view = ParamsView.from_flat(entries)
        self.hidden = view.hidden
        self.out_w = view.out_w
        self.out_b = view.out_b

    def parameter_count(self) -> int:
        n = 0
        for W, b, V, c in self.hidden:
            n += W.size + b.size + V.size + c.size
        return n + self.out_w.size + self.out_b.size


def init_model(depth: int = 8, width: int = 50, activation: str = "tanh",
               seed: int = 0, bbox=((0.0, 1.0), (0.0, 1.0))) -> PinnModel:
    """Glorot-uniform weights, zero biases, gate offsets at 2.0 (near open).

    Draw order is fixed (W then V per layer, then the output weights) so a
    seed pins every parameter.
    """
    if depth < 1 or width < 1:
        raise InvalidArgumentError("depth and width must be >= 1")
    if activation not in ACTIVATIONS:
        raise InvalidArgumentError(f"unknown activation {activation!r}")
    bbox = np.asarray(bbox, dtype=float)
    if bbox.shape != (2, 2) or not np.all(bbox[:, 1] > bbox[:, 0]):
        raise InvalidArgumentError("bbox must be [[x_lo, x_hi], [y_lo, y_hi]] with hi > lo")

    rng = np.random.default_rng(seed)

    def glorot(fan_in, fan_out):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-bound, bound, size=(fan_out, fan_in))

    hidden = []
    fan_in = 6
    for _ in range(depth):
        W = glorot(fan_in, width)
        V = glorot(fan_in, width)
        hidden.append((W, np.zeros(width), V, np.full(width, 2.0)))
        fan_in = width
    out_w = glorot(width, 2)
    out_b = np.zeros(2)
    return PinnModel(depth=depth, width=width, activation=activation,
                     hidden=hidden, out_w=out_w, out_b=out_b, bbox=bbox)


# ---------------------------------------------------------------------------
# Input augmentation
# ---------------------------------------------------------------------------

def _augmented_channels(xi, eta) -> list:
    s_xi = xi * _AUG_SCALE + _AUG_OFFSET
    s_eta = eta * _AUG_SCALE + _AUG_OFFSET
    return [xi, eta, ad.tan(s_xi), ad.tan(s_eta), ad.cot(s_xi), ad.cot(s_eta)]


def _validate_unit_range(xi, eta):
    for name, v in (("xi", xi), ("eta", eta)):
        arr = np.asarray(v, dtype=float)
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise InvalidArgumentError(f"{name} outside [0, 1]")


def augment(xi: float, eta: float) -> np.ndarray:
    """Six input channels for one computational point."""
    _validate_unit_range(xi, eta)
    chans = _augmented_channels(np.asarray([float(xi)]), np.asarray([float(eta)]))
    return np.array([float(c[0]) for c in chans])


# ---------------------------------------------------------------------------
# Forward pass
# ---------------------------------------------------------------------------

def _column(u, j: int):
    if isinstance(u, (HyperDual, Var)):
        return u.col(j)
    return u[:, j]


def _forward_core(params: ParamsView, U, activation: str, bbox: np.ndarray):
    """Shared forward pass; U is the (n, 6) augmented input batch."""
    act = ACTIVATIONS[activation]
    h = U
    for i, (W, b, V, c) in enumerate(params.hidden):
        z = h @ W.T + b
        gate = ad.sigmoid(h @ V.T + c)
        h = gate * act(z)
        if not np.all(np.isfinite(_re_values(h))):
            raise NumericError(f"non-finite activation in hidden layer {i}")
    o = ad.sigmoid(h @ params.out_w.T + params.out_b)
    if not np.all(np.isfinite(_re_values(o))):
        raise NumericError("non-finite value in output layer")
    x = bbox[0, 0] + (bbox[0, 1] - bbox[0, 0]) * _column(o, 0)
    y = bbox[1, 0] + (bbox[1, 1] - bbox[1, 0]) * _column(o, 1)
    return x, y


def value_batch(params: ParamsView, xi, eta, *, activation: str, bbox):
    """Map values at a batch of computational points."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    _validate_unit_range(xi, eta)
    U = np.column_stack([np.asarray(c, dtype=float)
                         for c in _augmented_channels(xi, eta)])
    return _forward_core(params, U, activation, np.asarray(bbox, dtype=float))


_PASS_SEEDS = (("xi", "xi"), ("eta", "eta"), ("xi", "eta"))


def jet_batch(params: ParamsView, xi, eta, *, activation: str, bbox) -> SecondOrderJet:
    """Second-order jets at a batch of points via three hyper-dual passes."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    _validate_unit_range(xi, eta)
    bbox = np.asarray(bbox, dtype=float)

    results = []
    for dir_a, dir_b in _PASS_SEEDS:
        xi_hd, eta_hd = ad.seeded_inputs(xi, eta, dir_a, dir_b)
        U = HyperDual.stack_columns(_augmented_channels(xi_hd, eta_hd))
        results.append(_forward_core(params, U, activation, bbox))
    (x_xx, y_xx), (x_ee, y_ee), (x_xe, y_xe) = results
    return SecondOrderJet(
        x=x_xe.re, y=y_xe.re,
        x_xi=x_xe.d1, x_eta=x_xe.d2, y_xi=y_xe.d1, y_eta=y_xe.d2,
        x_xixi=x_xx.d12, x_etaeta=x_ee.d12, x_xieta=x_xe.d12,
        y_xixi=y_xx.d12, y_etaeta=y_ee.d12, y_xieta=y_xe.d12,
    )


def forward(model: PinnModel, xi: float, eta: float) -> tuple[float, float]:
    """Physical coordinates of one computational point."""
    x, y = value_batch(model.params_view(), [float(xi)], [float(eta)],
                       activation=model.activation, bbox=model.bbox)
    return float(x[0]), float(y[0])


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------

CHECKPOINT_VERSION = 1


def save_model(model: PinnModel, path) -> None:
    arrays = {
        "format_version": np.asarray(CHECKPOINT_VERSION),
        "depth": np.asarray(model.depth),
        "width": np.asarray(model.width),
        "activation": np.asarray(model.activation),
        "bbox": model.bbox,
        "out_w": model.out_w,
        "out_b": model.out_b,
    }
    for i, (W, b, V, c) in enumerate(model.hidden):
        arrays[f"W{i}"] = W
        arrays[f"b{i}"] = b
        arrays[f"V{i}"] = V
        arrays[f"c{i}"] = c
    np.savez(path, **arrays)


def load_model(path) -> PinnModel:
    with np.load(path, allow_pickle=False) as data:
        version = int(data["format_version"])
        if version != CHECKPOINT_VERSION:
            raise InvalidArgumentError(f"unsupported checkpoint version {version}")
        depth = int(data["depth"])
        hidden = [(data[f"W{i}"], data[f"b{i}"], data[f"V{i}"], data[f"c{i}"])
                  for i in range(depth)]
        return PinnModel(
            depth=depth,
            width=int(data["width"]),
            activation=str(data["activation"]),
            hidden=hidden,
            out_w=data["out_w"],
            out_b=data["out_b"],
            bbox=data["bbox"],
        )
