"""Boundary curves of a physical domain: sampling, fitting, compatibility.

A domain is four parametric curves (south, east, north, west) oriented so
that shared corners coincide: south and north run with xi, west and east
run with eta.  Curves come in three kinds: closed-form evaluators,
piecewise-linear interpolants of ordered points, and smooth kernel
regressions fitted to ordered points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import (DegenerateGeometryError, GeometryError,
                     InvalidArgumentError, ParseError)

#: Maximum extra training residual introduced by a well-conditioned fit.
FIT_TOL = 1e-6

#: Width of the endpoint blending window in parameter units.
_SNAP_WINDOW = 0.05


@dataclass(frozen=True)
class BoundaryCurve:
    """Parametric boundary map t in [0, 1] -> (x, y).

    ``evaluator`` accepts a scalar or a 1-D array of parameters and returns
    points with shape (2,) or (n, 2).  ``source_points`` keeps the ordered
    input points for polyline and fitted curves.
    """

    kind: str  # analytic | polyline | fitted
    evaluator: Callable
    source_points: np.ndarray | None = None

    def __call__(self, t):
        return self.evaluator(t)


@dataclass(frozen=True)
class DomainSpec:
    """Four boundary curves plus display labels."""

    south: BoundaryCurve
    east: BoundaryCurve
    north: BoundaryCurve
    west: BoundaryCurve
    names: tuple = ("south", "east", "north", "west")

    def curves(self) -> dict[str, BoundaryCurve]:
        return {"south": self.south, "east": self.east,
                "north": self.north, "west": self.west}


CURVE_ORDER = ("south", "east", "north", "west")


def analytic_curve(fn: Callable) -> BoundaryCurve:
    """Wrap a closed-form map; the function must accept array parameters."""

    def evaluator(t):
        t_arr = np.asarray(t, dtype=float)
        pts = np.asarray(fn(t_arr), dtype=float)
        if t_arr.ndim == 0:
            return pts.reshape(2)
        return pts.reshape(t_arr.size, 2)

    return BoundaryCurve(kind="analytic", evaluator=evaluator)


def segment_curve(p0, p1) -> BoundaryCurve:
    """Straight segment from p0 to p1."""
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    return analytic_curve(lambda t: np.outer(np.atleast_1d(t), p1 - p0) + p0)


def _chord_parameters(points: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    total = float(seg.sum())
    if total <= 0.0:
        raise DegenerateGeometryError("curve points are all coincident")
    return np.concatenate([[0.0], np.cumsum(seg)]) / total


def polyline_curve(points) -> BoundaryCurve:
    """Piecewise-linear curve through ordered points, chord-length parameterized."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise InvalidArgumentError("polyline needs an (n, 2) array with n >= 2")
    t_knots = _chord_parameters(pts)

    def evaluator(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        x = np.interp(t_arr, t_knots, pts[:, 0])
        y = np.interp(t_arr, t_knots, pts[:, 1])
        out = np.column_stack([x, y])
        return out.reshape(2) if np.ndim(t) == 0 else out

    return BoundaryCurve(kind="polyline", evaluator=evaluator, source_points=pts)


# ---------------------------------------------------------------------------
# Curve sampling
# ---------------------------------------------------------------------------

def sample_curve(curve: BoundaryCurve, n: int) -> np.ndarray:
    """n points at uniform parameters k/(n-1), endpoints included."""
    if n < 2:
        raise InvalidArgumentError("need at least 2 samples")
    t = np.linspace(0.0, 1.0, n)
    return np.asarray(curve(t), dtype=float).reshape(n, 2)


# ---------------------------------------------------------------------------
# Regression fit of ordered points
# ---------------------------------------------------------------------------

def _rbf_kernel(ta: np.ndarray, tb: np.ndarray, width: float) -> np.ndarray:
    d = ta[:, None] - tb[None, :]
    return np.exp(-(d * d) / (2.0 * width * width))


def _fit_dual_coefficients(K: np.ndarray, y: np.ndarray, regularization: float,
                           epsilon: float) -> np.ndarray:
    """Dual coefficients of the epsilon-insensitive kernel regression.

    With epsilon = 0 the problem is plain kernel ridge regression and is
    solved directly.  Otherwise the dual is a box-constrained quadratic with
    an L1 term, solved by cyclic coordinate descent with soft thresholding;
    iteration stops when the duality gap falls below 1e-8 (relative) or
    after a fixed sweep cap, so refits are bit-reproducible.
    """
    n = K.shape[0]
    if epsilon == 0.0:
        return np.linalg.solve(K + regularization * np.eye(n), y)

    box = 1.0 / regularization
    beta = np.zeros(n)
    diag = np.diag(K).copy()
    diag[diag <= 0.0] = 1.0
    gap_tol = 1e-8
    for _ in range(5000):
        for i in range(n):
            # residual excluding coordinate i
            r = y[i] - (K[i] @ beta - K[i, i] * beta[i])
            b = np.sign(r) * max(abs(r) - epsilon, 0.0) / diag[i]
            beta[i] = min(max(b, -box), box)
        f = K @ beta
        primal = 0.5 * beta @ f + box * np.sum(np.maximum(np.abs(y - f) - epsilon, 0.0))
        dual = -0.5 * beta @ f + y @ beta - epsilon * np.sum(np.abs(beta))
        if primal - dual <= gap_tol * max(1.0, abs(primal)):
            break
    return beta


def _smooth_ramp(u: np.ndarray) -> np.ndarray:
    """C-infinity ramp: 1 at u <= 0, 0 at u >= 1."""
    u = np.clip(u, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(u > 0.0, np.exp(-1.0 / np.where(u > 0.0, u, 1.0)), 0.0)
        b = np.where(u < 1.0, np.exp(-1.0 / np.where(u < 1.0, 1.0 - u, 1.0)), 0.0)
    return b / (a + b)


def fit_boundary_curve(points, kernel_width: float = 0.2,
                       regularization: float = 1e-6,
                       epsilon: float = 0.0) -> BoundaryCurve:
    """Smooth curve through ordered points.

    Each coordinate is regressed against the normalized cumulative chord
    length with a Gaussian kernel after removing the endpoint chord, and the
    result is blended toward the exact first/last points over the outer 5%
    of the parameter range so domain corners can match exactly.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidArgumentError("points must be an (n, 2) array")
    if pts.shape[0] < 4:
        raise InvalidArgumentError("need at least 4 points to fit a curve")
    if kernel_width <= 0.0 or regularization <= 0.0 or epsilon < 0.0:
        raise InvalidArgumentError("kernel_width and regularization must be positive, epsilon nonnegative")
    if np.all(pts == pts[0]):
        raise DegenerateGeometryError("all fit points coincide")

    t_knots = _chord_parameters(pts)
    p0, p1 = pts[0].copy(), pts[-1].copy()

    # Remove the endpoint chord so straight inputs fit exactly and the
    # kernel only models the deviation.
    chord = p0[None, :] + t_knots[:, None] * (p1 - p0)[None, :]
    K = _rbf_kernel(t_knots, t_knots, kernel_width)
    coef = np.column_stack([
        _fit_dual_coefficients(K, pts[:, d] - chord[:, d], regularization, epsilon)
        for d in range(2)
    ])

    def raw(t_arr: np.ndarray) -> np.ndarray:
        base = p0[None, :] + t_arr[:, None] * (p1 - p0)[None, :]
        return base + _rbf_kernel(t_arr, t_knots, kernel_width) @ coef

    # Endpoint snap: exact at t = 0 and t = 1, unchanged outside the windows.
    delta0 = p0 - raw(np.array([0.0]))[0]
    delta1 = p1 - raw(np.array([1.0]))[0]

    def evaluator(t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = raw(t_arr)
        out = out + _smooth_ramp(t_arr / _SNAP_WINDOW)[:, None] * delta0[None, :]
        out = out + _smooth_ramp((1.0 - t_arr) / _SNAP_WINDOW)[:, None] * delta1[None, :]
        return out.reshape(2) if np.ndim(t) == 0 else out

    return BoundaryCurve(kind="fitted", evaluator=evaluator, source_points=pts)


# ---------------------------------------------------------------------------
# Corner compatibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CornerReport:
    """Gap distance at each corner and the overall verdict."""

    gaps: dict[str, float]
    corner_tol: float
    passed: bool


_CORNER_PAIRS = {
    "south_west": (("west", 0.0), ("south", 0.0)),
    "south_east": (("south", 1.0), ("east", 0.0)),
    "north_east": (("east", 1.0), ("north", 1.0)),
    "north_west": (("north", 0.0), ("west", 1.0)),
}


def check_corner_compatibility(domain: DomainSpec, corner_tol: float = 1e-9) -> CornerReport:
    curves = domain.curves()
    gaps = {}
    for corner, ((ca, ta), (cb, tb)) in _CORNER_PAIRS.items():
        pa = np.asarray(curves[ca](ta), dtype=float).reshape(2)
        pb = np.asarray(curves[cb](tb), dtype=float).reshape(2)
        gaps[corner] = float(np.linalg.norm(pa - pb))
    return CornerReport(gaps=gaps, corner_tol=float(corner_tol),
                        passed=all(g <= corner_tol for g in gaps.values()))


def require_compatible(domain: DomainSpec, corner_tol: float) -> None:
    report = check_corner_compatibility(domain, corner_tol)
    if not report.passed:
        worst = max(report.gaps, key=report.gaps.get)
        raise GeometryError(
            f"boundary corners do not meet: {worst} gap {report.gaps[worst]:.3e} "
            f"exceeds {corner_tol:.3e}")


# ---------------------------------------------------------------------------
# Domain helpers
# ---------------------------------------------------------------------------

def domain_bbox(domain: DomainSpec, margin: float = 0.05, samples: int = 256) -> np.ndarray:
    """Axis-aligned bounding box of the boundary, padded by a relative margin."""
    pts = np.vstack([sample_curve(c, samples) for c in domain.curves().values()])
    lo = pts.min(axis=0)
    hi = pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    pad = margin * span
    return np.column_stack([lo - pad, hi + pad])


def domain_area(domain: DomainSpec, samples: int = 256) -> float:
    """Polygon area of the boundary loop (south, east, north and west
    traversed head to tail)."""
    south = sample_curve(domain.south, samples)
    east = sample_curve(domain.east, samples)
    north = sample_curve(domain.north, samples)
    west = sample_curve(domain.west, samples)
    loop = np.vstack([south, east[1:], north[::-1][1:], west[::-1][1:-1]])
    x, y = loop[:, 0], loop[:, 1]
    return float(abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)) / 2.0)


# ---------------------------------------------------------------------------
# Point-file ingestion
# ---------------------------------------------------------------------------

def read_points_csv(path) -> np.ndarray:
    """Ordered (n, 2) points from a two-column CSV; header line optional."""
    path = Path(path)
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            parts = [p.strip() for p in text.split(",")]
            if len(parts) != 2:
                raise ParseError(lineno, f"expected two comma-separated values, got {len(parts)}")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise ParseError(lineno, f"could not parse point {text!r}") from None
    if len(rows) < 2:
        raise ParseError(1, "file contains fewer than 2 points")
    return np.asarray(rows, dtype=float)
