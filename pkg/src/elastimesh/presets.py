"""Built-in analytic test domains.

Each preset returns a DomainSpec whose curves share corners exactly, so
they pass corner compatibility at machine precision.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .geometry import BoundaryCurve, DomainSpec, analytic_curve, polyline_curve, segment_curve


def unit_square() -> DomainSpec:
    return DomainSpec(
        south=segment_curve((0.0, 0.0), (1.0, 0.0)),
        east=segment_curve((1.0, 0.0), (1.0, 1.0)),
        north=segment_curve((0.0, 1.0), (1.0, 1.0)),
        west=segment_curve((0.0, 0.0), (0.0, 1.0)),
    )


def quarter_annulus(r0: float = 1.0, r1: float = 2.0) -> DomainSpec:
    """First-quadrant ring sector: xi runs radially, eta along the arcs.

    This orientation keeps the mapped Jacobian positive, so cells come out
    counterclockwise.
    """
    if not 0.0 < r0 < r1:
        raise InvalidArgumentError("need 0 < r0 < r1")

    def arc(radius):
        return analytic_curve(lambda t, r=radius: np.column_stack(
            [r * np.cos(0.5 * np.pi * np.atleast_1d(t)),
             r * np.sin(0.5 * np.pi * np.atleast_1d(t))]))

    return DomainSpec(
        south=segment_curve((r0, 0.0), (r1, 0.0)),
        east=arc(r1),
        north=segment_curve((0.0, r0), (0.0, r1)),
        west=arc(r0),
    )


def wavy_channel(amplitude: float = 0.15, waves: int = 2,
                 length: float = 4.0, height: float = 1.0) -> DomainSpec:
    """Channel whose floor and ceiling follow the same sine wave."""
    if height <= 2.0 * abs(amplitude):
        raise InvalidArgumentError("height must exceed twice the amplitude")

    def wall(offset):
        return analytic_curve(lambda t, y0=offset: np.column_stack(
            [length * np.atleast_1d(t),
             y0 + amplitude * np.sin(2.0 * np.pi * waves * np.atleast_1d(t))]))

    south = wall(0.0)
    north = wall(height)
    return DomainSpec(
        south=south,
        east=segment_curve(south(1.0), north(1.0)),
        north=north,
        west=segment_curve(south(0.0), north(0.0)),
    )


def s_duct(offset: float = 1.0, length: float = 3.0, height: float = 1.0) -> DomainSpec:
    """Channel following a smoothstep centerline from y=0 up to y=offset."""

    def wall(y0):
        def fn(t):
            t_arr = np.atleast_1d(t)
            shift = offset * t_arr * t_arr * (3.0 - 2.0 * t_arr)
            return np.column_stack([length * t_arr, y0 + shift])
        return analytic_curve(fn)

    south = wall(0.0)
    north = wall(height)
    return DomainSpec(
        south=south,
        east=segment_curve(south(1.0), north(1.0)),
        north=north,
        west=segment_curve(south(0.0), north(0.0)),
    )


def polyline_l() -> DomainSpec:
    """Elbow between two L-shaped polylines; exercises non-smooth input."""
    outer = polyline_curve([(0.0, 0.0), (2.0, 0.0), (2.0, 2.0)])
    inner = polyline_curve([(0.0, 1.0), (1.0, 1.0), (1.0, 2.0)])
    return DomainSpec(
        south=outer,
        east=segment_curve((2.0, 2.0), (1.0, 2.0)),
        north=inner,
        west=segment_curve((0.0, 0.0), (0.0, 1.0)),
    )


PRESETS = {
    "unit_square": unit_square,
    "quarter_annulus": quarter_annulus,
    "wavy_channel": wavy_channel,
    "s_duct": s_duct,
    "polyline_L": polyline_l,
}


def make_domain(name: str, **params) -> DomainSpec:
    if name not in PRESETS:
        raise InvalidArgumentError(
            f"unknown domain preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return PRESETS[name](**params)
