"""Boundary curves: sampling, regression fitting, corner compatibility."""

import math

import numpy as np
import pytest

from elastimesh.errors import (DegenerateGeometryError, InvalidArgumentError,
                               ParseError)
from elastimesh.geometry import (BoundaryCurve, DomainSpec, analytic_curve,
                                 check_corner_compatibility, domain_area,
                                 fit_boundary_curve, polyline_curve,
                                 read_points_csv, sample_curve, segment_curve)
from elastimesh.presets import make_domain


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def test_sample_straight_segment():
    seg = segment_curve((0.0, 0.0), (1.0, 0.0))
    pts = sample_curve(seg, 3)
    assert pts == pytest.approx(np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]))


def test_sample_two_points_gives_endpoints():
    arc = analytic_curve(lambda t: np.column_stack(
        [np.cos(np.atleast_1d(t)), np.sin(np.atleast_1d(t))]))
    pts = sample_curve(arc, 2)
    assert pts[0] == pytest.approx([1.0, 0.0])
    assert pts[1] == pytest.approx([math.cos(1.0), math.sin(1.0)])


def test_sample_quarter_arc_midpoint():
    arc = analytic_curve(lambda t: np.column_stack(
        [np.cos(0.5 * np.pi * np.atleast_1d(t)), np.sin(0.5 * np.pi * np.atleast_1d(t))]))
    pts = sample_curve(arc, 3)
    assert pts[1] == pytest.approx([math.sqrt(2) / 2, math.sqrt(2) / 2], rel=1e-15)


def test_sample_rejects_single_point():
    with pytest.raises(InvalidArgumentError):
        sample_curve(segment_curve((0, 0), (1, 1)), 1)


def test_samples_lie_on_curve():
    curve = analytic_curve(lambda t: np.column_stack(
        [np.atleast_1d(t), np.atleast_1d(t) ** 2]))
    pts = sample_curve(curve, 17)
    t = np.linspace(0.0, 1.0, 17)
    assert np.array_equal(pts, np.column_stack([t, t ** 2]))
    assert np.array_equal(pts, sample_curve(curve, 17))  # deterministic


# ---------------------------------------------------------------------------
# Polylines
# ---------------------------------------------------------------------------

def test_polyline_reproduces_source_points():
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 2.0]])
    curve = polyline_curve(pts)
    # chord parameters: 0, 1/3, 1
    assert curve(0.0) == pytest.approx([0.0, 0.0])
    assert curve(1.0 / 3.0) == pytest.approx([1.0, 0.0])
    assert curve(1.0) == pytest.approx([1.0, 2.0])
    assert curve(2.0 / 3.0) == pytest.approx([1.0, 1.0])


def test_polyline_rejects_degenerate():
    with pytest.raises(DegenerateGeometryError):
        polyline_curve([[1.0, 1.0], [1.0, 1.0], [1.0, 1.0]])


# ---------------------------------------------------------------------------
# Regression fitting
# ---------------------------------------------------------------------------

def test_fit_collinear_points_recovers_line():
    x = np.linspace(0.0, 1.0, 5)
    curve = fit_boundary_curve(np.column_stack([x, np.zeros(5)]))
    assert curve(0.5) == pytest.approx([0.5, 0.0], abs=1e-6)
    assert curve.kind == "fitted"


def test_fit_rejects_two_points():
    with pytest.raises(InvalidArgumentError):
        fit_boundary_curve([[0.0, 0.0], [1.0, 1.0]])


def test_fit_rejects_coincident_points():
    with pytest.raises(DegenerateGeometryError):
        fit_boundary_curve([[0.5, 0.5]] * 6)


def test_fit_sine_midpoint():
    x = np.linspace(0.0, 1.0, 9)
    pts = np.column_stack([x, np.sin(np.pi * x)])
    curve = fit_boundary_curve(pts)
    # By symmetry the chord-length midpoint is the sine crest.
    assert curve(0.5)[1] == pytest.approx(1.0, abs=1e-3)


def test_fit_interpolates_in_small_regularization_limit():
    t = np.linspace(0.0, 1.0, 9)
    pts = np.column_stack([t + 0.2 * np.sin(2 * t), np.cos(1.5 * t)])
    curve = fit_boundary_curve(pts, regularization=1e-10, epsilon=0.0)
    # chord parameters of the input points
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    knots = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
    fitted = np.vstack([curve(k) for k in knots])
    assert np.max(np.abs(fitted - pts)) <= 1e-6


def test_fit_endpoints_snapped_exactly():
    rng = np.random.default_rng(3)
    pts = rng.uniform(0.0, 1.0, size=(7, 2))
    pts = pts[np.argsort(pts[:, 0])]
    curve = fit_boundary_curve(pts, regularization=1e-4)
    assert np.array_equal(np.asarray(curve(0.0)), pts[0])
    assert np.array_equal(np.asarray(curve(1.0)), pts[-1])


def test_fit_epsilon_band_residuals():
    t = np.linspace(0.0, 1.0, 11)
    pts = np.column_stack([t, np.sin(2.0 * t)])
    eps = 0.05
    curve = fit_boundary_curve(pts, epsilon=eps)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    knots = np.concatenate([[0.0], np.cumsum(seg)]) / seg.sum()
    fitted = np.vstack([curve(k) for k in knots])
    assert np.max(np.abs(fitted - pts)) <= eps + 1e-6


def test_fit_refit_bit_identical():
    t = np.linspace(0.0, 1.0, 8)
    pts = np.column_stack([t, t ** 2])
    a = fit_boundary_curve(pts, epsilon=0.01)
    b = fit_boundary_curve(pts, epsilon=0.01)
    ts = np.linspace(0.0, 1.0, 33)
    assert np.array_equal(np.asarray(a(ts)), np.asarray(b(ts)))


def test_fit_validates_hyperparameters():
    pts = np.column_stack([np.linspace(0, 1, 5), np.zeros(5)])
    with pytest.raises(InvalidArgumentError):
        fit_boundary_curve(pts, kernel_width=0.0)
    with pytest.raises(InvalidArgumentError):
        fit_boundary_curve(pts, epsilon=-0.1)


# ---------------------------------------------------------------------------
# Corner compatibility
# ---------------------------------------------------------------------------

def test_unit_square_corners_pass():
    report = check_corner_compatibility(make_domain("unit_square"), 1e-9)
    assert report.passed
    assert all(g == 0.0 for g in report.gaps.values())


def test_translated_south_fails():
    square = make_domain("unit_square")
    shifted = DomainSpec(
        south=segment_curve((0.1, 0.0), (1.1, 0.0)),
        east=square.east, north=square.north, west=square.west)
    report = check_corner_compatibility(shifted, 1e-9)
    assert not report.passed
    gaps = sorted(report.gaps.values())
    assert gaps == pytest.approx([0.0, 0.0, 0.1, 0.1])


def test_quarter_annulus_corners_pass():
    report = check_corner_compatibility(make_domain("quarter_annulus"), 1e-9)
    assert report.passed


def test_domain_area_quarter_annulus():
    # pi*(r1^2 - r0^2)/4 for radii 1, 2
    area = domain_area(make_domain("quarter_annulus"), samples=2048)
    assert area == pytest.approx(np.pi * 3.0 / 4.0, rel=1e-4)


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def test_read_points_csv_with_header(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("x,y\n0.0,0.0\n0.5,0.25\n1.0,1.0\n", encoding="utf-8")
    pts = read_points_csv(path)
    assert pts == pytest.approx(np.array([[0, 0], [0.5, 0.25], [1, 1]]))


def test_read_points_csv_headerless(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0,0\n1,2\n", encoding="utf-8")
    assert read_points_csv(path).shape == (2, 2)


def test_read_points_csv_bad_line_number(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0,0\n1,2\nbad,line\n", encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        read_points_csv(path)
    assert exc.value.line == 3


def test_read_points_csv_wrong_columns(tmp_path):
    path = tmp_path / "pts.csv"
    path.write_text("0,0\n1,2,3\n", encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        read_points_csv(path)
    assert exc.value.line == 2
