"""Governing-equation residuals evaluated on second-order jets.

Each residual is a pure arithmetic function of one jet, so it works
unchanged on scalar jets, jets batched over collocation points, and jets
whose entries are reverse-tape variables.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .errors import InvalidArgumentError


@dataclass
class SecondOrderJet:
    """Value and all first/second partials of the map (xi, eta) -> (x, y).

    The single mixed entries ``x_xieta`` / ``y_xieta`` stand for both
    orderings of the mixed partial; the map is smooth, so they coincide.
    """

    x: object
    y: object
    x_xi: object
    x_eta: object
    y_xi: object
    y_eta: object
    x_xixi: object
    x_etaeta: object
    x_xieta: object
    y_xixi: object
    y_etaeta: object
    y_xieta: object

    def map_components(self, fn) -> "SecondOrderJet":
        return SecondOrderJet(**{f.name: fn(getattr(self, f.name)) for f in fields(self)})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class LameConstants:
    """Material constants of the elastic deformation term."""

    lam: float = 1.0
    mu: float = 0.35

    def __post_init__(self):
        if not self.mu > 0:
            raise InvalidArgumentError("mu must be positive")
        if not self.lam + self.mu > 0:
            raise InvalidArgumentError("lam + mu must be positive")


def navier_lame_residual(jet: SecondOrderJet, k: LameConstants):
    """Displacement-form elasticity residual; zero on every affine map."""
    r1 = k.lam * (jet.x_xixi + jet.y_xieta) + k.mu * (2.0 * jet.x_xixi + jet.x_etaeta + jet.y_xieta)
    r2 = k.mu * (jet.x_xieta + jet.y_xixi + 2.0 * jet.y_etaeta) + k.lam * (jet.x_xieta + jet.y_etaeta)
    return r1, r2


def laplace_residual(jet: SecondOrderJet, literal_metric: bool = False):
    """Winslow-form elliptic smoothing residual.

    ``literal_metric=True`` switches the cross-metric factor to the
    asymmetric variant (x_xi*x_eta + y_xi*x_eta), kept only as a diagnostic;
    the default symmetric metric is the standard elliptic system.
    """
    g11 = jet.x_xi * jet.x_xi + jet.y_xi * jet.y_xi
    g22 = jet.x_eta * jet.x_eta + jet.y_eta * jet.y_eta
    if literal_metric:
        g12 = jet.x_xi * jet.x_eta + jet.y_xi * jet.x_eta
    else:
        g12 = jet.x_xi * jet.x_eta + jet.y_xi * jet.y_eta
    r1 = jet.x_xixi * g22 - 2.0 * jet.x_xieta * g12 + jet.x_etaeta * g11
    r2 = jet.y_xixi * g22 - 2.0 * jet.y_xieta * g12 + jet.y_etaeta * g11
    return r1, r2


def hyperbolic_residual(jet: SecondOrderJet, reference_area: float):
    """Orthogonality and cell-area system; first order only."""
    r1 = jet.x_xi * jet.x_eta + jet.y_xi * jet.y_eta
    r2 = jet.x_xi * jet.y_eta - jet.y_xi * jet.x_eta - reference_area
    return r1, r2


def monge_ampere_residual(jet: SecondOrderJet):
    r1 = jet.x_xixi * jet.x_etaeta - jet.x_xieta * jet.x_xieta - jet.x_xi * jet.x_xi + jet.x_eta * jet.x_eta
    r2 = jet.y_xixi * jet.y_etaeta - jet.y_xieta * jet.y_xieta - jet.y_xi * jet.y_xi + jet.y_eta * jet.y_eta
    return r1, r2


GOVERNING_EQUATIONS = ("hyperbolic", "monge_ampere", "laplace", "navier_lame")


def residual_function(name: str, k: LameConstants, reference_area: float = 1.0):
    """Residual evaluator for a governing-equation name."""
    if name == "navier_lame":
        return lambda jet: navier_lame_residual(jet, k)
    if name == "laplace":
        return lambda jet: laplace_residual(jet)
    if name == "hyperbolic":
        return lambda jet: hyperbolic_residual(jet, reference_area)
    if name == "monge_ampere":
        return lambda jet: monge_ampere_residual(jet)
    raise InvalidArgumentError(f"unknown governing equation {name!r}")
