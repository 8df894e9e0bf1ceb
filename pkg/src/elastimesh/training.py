"""Collocation sampling, composite loss, optimizer and the training loop.

The loss is the mean squared governing-equation residual over interior grid
nodes plus the mean squared boundary mismatch over boundary nodes, with one
learnable softmax weight per boundary curve.  Training is full batch: every
epoch evaluates jets at all interior nodes and values at all boundary nodes
on a fresh reverse tape, then takes one optimizer step over all network
parameters and the boundary-weight logits.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from . import network as net
from .errors import InvalidArgumentError, NumericError, TrainingDivergedError
from .geometry import CURVE_ORDER, DomainSpec, domain_area, domain_bbox, require_compatible
from .meshcore import CompGrid, StructuredMesh, uniform_comp_grid
from .pde import GOVERNING_EQUATIONS, LameConstants, residual_function

#: Padding applied to the physical bounding box before output rescaling,
#: keeping boundary targets away from the sigmoid saturation limits.
BBOX_MARGIN = 0.10

_DECAY_INTERVAL = 1000  # epochs per learning-rate decay step


@dataclass
class TrainConfig:
    epochs: int = 15000
    lr0: float = 1e-5
    decay: float = 0.99
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    lame: LameConstants = field(default_factory=LameConstants)
    governing: str = "navier_lame"
    ni: int = 21
    nj: int = 21
    interior_weight: float = 1.0
    seed: int = 0
    # network shape for this run
    depth: int = 8
    width: int = 50
    activation: str = "tanh"
    history_stride: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise InvalidArgumentError("epochs must be >= 1")
        if self.lr0 <= 0.0:
            raise InvalidArgumentError("lr0 must be positive")
        if not 0.0 < self.decay <= 1.0:
            raise InvalidArgumentError("decay must be in (0, 1]")
        if self.optimizer not in ("adam", "sgd"):
            raise InvalidArgumentError(f"unknown optimizer {self.optimizer!r}")
        if self.governing not in GOVERNING_EQUATIONS:
            raise InvalidArgumentError(f"unknown governing equation {self.governing!r}")
        if self.activation not in net.ACTIVATIONS:
            raise InvalidArgumentError(f"unknown activation {self.activation!r}")


#: Named run profiles: the full-size configuration and a small one that
#: keeps desk runs and CI in seconds.  The desk profile shortens the Adam
#: second-moment memory to match its epoch budget; with the default 0.999
#: the large equation-term transient at initialization suppresses effective
#: step sizes for most of a 2000-epoch run.
PROFILES = {
    "paper": {"depth": 8, "width": 50, "epochs": 15000, "lr0": 1e-5},
    "desk": {"depth": 2, "width": 16, "epochs": 2000, "lr0": 1e-3, "beta2": 0.99},
}


def apply_profile(cfg: TrainConfig, profile: str) -> TrainConfig:
    if profile not in PROFILES:
        raise InvalidArgumentError(f"unknown profile {profile!r}")
    return replace(cfg, **PROFILES[profile])


@dataclass
class BoundaryWeights:
    """Softmax distribution over the four boundary curves."""

    logits: np.ndarray = field(default_factory=lambda: np.zeros(4))

    @property
    def weights(self) -> np.ndarray:
        e = np.exp(self.logits - np.max(self.logits))
        return e / np.sum(e)


@dataclass(frozen=True)
class LossBreakdown:
    equation_term: float
    boundary_term: float
    total: float
    epoch: int


# ---------------------------------------------------------------------------
# Collocation points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryGroup:
    """Boundary nodes owned by one curve: grid positions and parameters."""

    curve: str
    xi: np.ndarray
    eta: np.ndarray
    t: np.ndarray
    flat_index: np.ndarray


@dataclass(frozen=True)
class CollocationSet:
    interior_xi: np.ndarray
    interior_eta: np.ndarray
    boundary: tuple[BoundaryGroup, ...]

    @property
    def n_interior(self) -> int:
        return self.interior_xi.size

    @property
    def n_boundary(self) -> int:
        return sum(g.t.size for g in self.boundary)


def _boundary_index_sets(ni: int, nj: int) -> dict[str, np.ndarray]:
    """(i, j) index pairs per curve; every corner belongs to exactly one
    curve, assigned in the order south, east, north, west."""
    south = np.array([(i, 0) for i in range(ni)])
    east = np.array([(ni - 1, j) for j in range(1, nj)])
    north = np.array([(i, nj - 1) for i in range(ni - 1)])
    west = np.array([(0, j) for j in range(1, nj - 1)])
    return {"south": south, "east": east, "north": north, "west": west}


def _curve_parameter(name: str, ij: np.ndarray, ni: int, nj: int) -> np.ndarray:
    if name in ("south", "north"):
        return ij[:, 0] / (ni - 1)
    return ij[:, 1] / (nj - 1)


def collocation_points(grid: CompGrid) -> CollocationSet:
    """Interior and per-curve boundary nodes of a computational grid."""
    ni, nj = grid.ni, grid.nj
    xi = np.linspace(0.0, 1.0, ni)
    eta = np.linspace(0.0, 1.0, nj)

    ii, jj = np.meshgrid(np.arange(1, ni - 1), np.arange(1, nj - 1), indexing="xy")
    interior_xi = xi[ii.ravel()]
    interior_eta = eta[jj.ravel()]

    groups = []
    for name, ij in _boundary_index_sets(ni, nj).items():
        if ij.size == 0:
            groups.append(BoundaryGroup(name, np.empty(0), np.empty(0),
                                        np.empty(0), np.empty(0, dtype=int)))
            continue
        groups.append(BoundaryGroup(
            curve=name,
            xi=xi[ij[:, 0]],
            eta=eta[ij[:, 1]],
            t=_curve_parameter(name, ij, ni, nj),
            flat_index=ij[:, 1] * ni + ij[:, 0],
        ))
    return CollocationSet(interior_xi=interior_xi, interior_eta=interior_eta,
                          boundary=tuple(groups))


def boundary_targets(domain: DomainSpec, ni: int, nj: int):
    """Flat node indices of all boundary nodes and their exact curve samples."""
    points = collocation_points(uniform_comp_grid(ni, nj))
    curves = domain.curves()
    idx_parts, target_parts = [], []
    for group in points.boundary:
        if group.t.size == 0:
            continue
        idx_parts.append(group.flat_index)
        target_parts.append(np.asarray(curves[group.curve](group.t), dtype=float).reshape(-1, 2))
    return np.concatenate(idx_parts), np.vstack(target_parts)


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------

class ModelMapping:
    """Jet/value supplier backed by a trained model."""

    def __init__(self, model: net.PinnModel):
        self.model = model

    def jets(self, xi, eta):
        return net.jet_batch(self.model.params_view(), xi, eta,
                             activation=self.model.activation, bbox=self.model.bbox)

    def values(self, xi, eta):
        return net.value_batch(self.model.params_view(), xi, eta,
                               activation=self.model.activation, bbox=self.model.bbox)


class AnalyticMapping:
    """Jet/value supplier for a closed-form map written in generic ops.

    ``fn(xi, eta) -> (x, y)`` is evaluated under hyper-dual seeds, so its
    jets are exact; useful as an oracle in tests and diagnostics.
    """

    def __init__(self, fn):
        self.fn = fn

    def jets(self, xi, eta):
        from .pde import SecondOrderJet

        xi = np.asarray(xi, dtype=float)
        eta = np.asarray(eta, dtype=float)
        passes = []
        for dir_a, dir_b in (("xi", "xi"), ("eta", "eta"), ("xi", "eta")):
            xi_hd, eta_hd = ad.seeded_inputs(xi, eta, dir_a, dir_b)
            passes.append(self.fn(xi_hd, eta_hd))
        (x_xx, y_xx), (x_ee, y_ee), (x_xe, y_xe) = passes

        def chan(v, attr):
            c = getattr(v, attr) if isinstance(v, ad.HyperDual) else (v if attr == "re" else 0.0)
            return np.broadcast_to(np.asarray(c, dtype=float), xi.shape).copy()

        return SecondOrderJet(
            x=chan(x_xe, "re"), y=chan(y_xe, "re"),
            x_xi=chan(x_xe, "d1"), x_eta=chan(x_xe, "d2"),
            y_xi=chan(y_xe, "d1"), y_eta=chan(y_xe, "d2"),
            x_xixi=chan(x_xx, "d12"), x_etaeta=chan(x_ee, "d12"), x_xieta=chan(x_xe, "d12"),
            y_xixi=chan(y_xx, "d12"), y_etaeta=chan(y_ee, "d12"), y_xieta=chan(y_xe, "d12"),
        )

    def values(self, xi, eta):
        x, y = self.fn(np.asarray(xi, dtype=float), np.asarray(eta, dtype=float))
        return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def _loss_terms(jets_fn, values_fn, domain, points, weights4, cfg,
                reference_area: float):
    """Equation and boundary terms; generic over plain and tape arithmetic.

    ``weights4`` supplies the per-curve softmax weight (floats or tape
    scalars); the per-node factor is 4*weight so uniform weights reproduce
    the plain mean.
    """
    residual = residual_function(cfg.governing, cfg.lame, reference_area)

    equation_term = 0.0
    if points.n_interior:
        jet = jets_fn(points.interior_xi, points.interior_eta)
        r1, r2 = residual(jet)
        sq = r1 * r1 + r2 * r2
        total = sq.sum() if isinstance(sq, ad.Var) else float(np.sum(sq))
        equation_term = total * (cfg.interior_weight / points.n_interior)

    boundary_term = 0.0
    n_b = points.n_boundary
    curves = domain.curves()
    for k, group in enumerate(points.boundary):
        if group.t.size == 0:
            continue
        target = np.asarray(curves[group.curve](group.t), dtype=float).reshape(-1, 2)
        x, y = values_fn(group.xi, group.eta)
        dx = x - target[:, 0]
        dy = y - target[:, 1]
        sq = dx * dx + dy * dy
        total = sq.sum() if isinstance(sq, ad.Var) else float(np.sum(sq))
        boundary_term = boundary_term + total * (4.0 / n_b) * weights4[k]
    return equation_term, boundary_term


def compute_loss(mapping, domain: DomainSpec, points: CollocationSet,
                 bw: BoundaryWeights, cfg: TrainConfig, epoch: int = 0,
                 reference_area: float | None = None) -> LossBreakdown:
    """Composite loss of any jet-supplying mapping at the collocation points."""
    if reference_area is None:
        reference_area = _reference_cell_area(domain, cfg.ni, cfg.nj)
    eq, bd = _loss_terms(mapping.jets, mapping.values, domain, points,
                         bw.weights, cfg, reference_area)
    eq, bd = float(eq), float(bd)
    total = eq + bd
    if not np.isfinite(total):
        _locate_nonfinite(mapping, points)
        raise NumericError("non-finite loss")
    return LossBreakdown(equation_term=eq, boundary_term=bd, total=total, epoch=epoch)


def _locate_nonfinite(mapping, points: CollocationSet) -> None:
    """Name the first collocation point with a non-finite map value."""
    jet = mapping.jets(points.interior_xi, points.interior_eta)
    for name, arr in jet.as_dict().items():
        bad = ~np.isfinite(np.asarray(arr, dtype=float))
        if bad.any():
            i = int(np.argmax(bad))
            raise NumericError(
                f"non-finite {name} at collocation point "
                f"(xi={points.interior_xi[i]:.6f}, eta={points.interior_eta[i]:.6f})")


def _reference_cell_area(domain: DomainSpec, ni: int, nj: int) -> float:
    return domain_area(domain) / ((ni - 1) * (nj - 1))


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------

def lr_at_epoch(epoch: int, cfg: TrainConfig) -> float:
    """Initial rate decayed once per thousand epochs."""
    return cfg.lr0 * cfg.decay ** (epoch // _DECAY_INTERVAL)


@dataclass
class AdamState:
    m: list
    v: list
    t: int = 0

    @staticmethod
    def for_params(params: list) -> "AdamState":
        return AdamState(m=[np.zeros_like(p) for p in params],
                         v=[np.zeros_like(p) for p in params])


def adam_step(params: list, grads: list, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> list:
    """One bias-corrected update; mutates ``state`` and returns new params."""
    if len(params) != len(grads):
        raise InvalidArgumentError("params and grads length mismatch")
    state.t += 1
    t = state.t
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * (g * g)
        m_hat = state.m[i] / (1.0 - beta1 ** t)
        v_hat = state.v[i] / (1.0 - beta2 ** t)
        out.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
    return out


def sgd_step(params: list, grads: list, lr: float) -> list:
    return [p - lr * g for p, g in zip(params, grads)]


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------

def tape_loss(model: net.PinnModel, bw: BoundaryWeights, domain: DomainSpec,
              points: CollocationSet, cfg: TrainConfig, reference_area: float):
    """Record one full loss evaluation on a fresh tape.

    Returns (tape, equation Var, boundary Var, total Var, parameter Vars,
    logit Var); jets at interior nodes and values at boundary nodes all flow
    through the recorded arithmetic, so one reverse sweep yields exact
    gradients for every parameter including the boundary-weight logits.
    """
    tape = ad.Tape()
    param_vars = [tape.param(p) for p in model.params_view().flat()]
    logit_var = tape.param(bw.logits)
    view = net.ParamsView.from_flat(param_vars)

    # softmax over the four curve logits, shifted by the current max for
    # numerical stability (the shift is a constant w.r.t. the tape)
    shifted = logit_var - float(np.max(bw.logits))
    exp_l = shifted.exp()
    norm = exp_l.sum()
    weights4 = [exp_l.index(k) / norm for k in range(4)]

    def jets_fn(xi, eta):
        return net.jet_batch(view, xi, eta, activation=model.activation,
                             bbox=model.bbox)

    def values_fn(xi, eta):
        return net.value_batch(view, xi, eta, activation=model.activation,
                               bbox=model.bbox)

    eq, bd = _loss_terms(jets_fn, values_fn, domain, points, weights4,
                         cfg, reference_area)
    total = eq + bd
    return tape, eq, bd, total, param_vars, logit_var


def train(domain: DomainSpec, cfg: TrainConfig,
          model: net.PinnModel | None = None):
    """Full-batch training; returns (model, boundary weights, history).

    Every epoch records the whole loss on a fresh tape and performs one
    reverse sweep, then one optimizer step over all network parameters and
    the boundary-weight logits.
    """
    require_compatible(domain, 1e-6)
    grid = uniform_comp_grid(cfg.ni, cfg.nj)
    points = collocation_points(grid)
    reference_area = _reference_cell_area(domain, cfg.ni, cfg.nj)

    if model is None:
        bbox = domain_bbox(domain, margin=BBOX_MARGIN)
        model = net.init_model(depth=cfg.depth, width=cfg.width,
                               activation=cfg.activation, seed=cfg.seed, bbox=bbox)
    bw = BoundaryWeights()

    state = AdamState.for_params(model.params_view().flat() + [bw.logits]) \
        if cfg.optimizer == "adam" else None
    history: list[LossBreakdown] = []

    for epoch in range(cfg.epochs):
        try:
            tape, eq, bd, total, param_vars, logit_var = tape_loss(
                model, bw, domain, points, cfg, reference_area)
        except NumericError as exc:
            raise TrainingDivergedError(epoch) from exc

        eq_val, bd_val = float(eq.value), float(bd.value)
        if not np.isfinite(eq_val + bd_val):
            raise TrainingDivergedError(epoch)
        if epoch % cfg.history_stride == 0 or epoch == cfg.epochs - 1:
            history.append(LossBreakdown(eq_val, bd_val, eq_val + bd_val, epoch))

        grad_map = ad.backprop(tape, total)
        grads = [grad_map[v.slot] for v in param_vars] + [grad_map[logit_var.slot]]
        flat = model.params_view().flat() + [bw.logits]

        lr = lr_at_epoch(epoch, cfg)
        if cfg.optimizer == "adam":
            flat = adam_step(flat, grads, state, lr, cfg.beta1, cfg.beta2, cfg.eps)
        else:
            flat = sgd_step(flat, grads, lr)

        model.set_flat(flat[:-1])
        bw.logits = flat[-1]

    return model, bw, history


def generate_mesh(model: net.PinnModel, grid: CompGrid) -> StructuredMesh:
    """Evaluate the trained map at every grid node."""
    x, y = net.value_batch(model.params_view(), grid.nodes[:, 0], grid.nodes[:, 1],
                           activation=model.activation, bbox=model.bbox)
    return StructuredMesh(ni=grid.ni, nj=grid.nj,
                          coords=np.column_stack([x, y]), provenance="pinn")


def write_loss_history(history: list[LossBreakdown], path) -> None:
    lines = ["epoch,equation_term,boundary_term,total"]
    lines.extend(f"{h.epoch},{h.equation_term:.17g},{h.boundary_term:.17g},{h.total:.17g}"
                 for h in history)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
