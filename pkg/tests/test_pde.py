"""Governing-equation residuals against closed forms and a symbolic oracle."""

import numpy as np
import pytest

from elastimesh.pde import (LameConstants, SecondOrderJet, hyperbolic_residual,
                            laplace_residual, monge_ampere_residual,
                            navier_lame_residual, residual_function)
from elastimesh.errors import InvalidArgumentError

LAME = LameConstants(lam=1.0, mu=0.35)


def jet(**kw):
    fields = dict.fromkeys(
        ["x", "y", "x_xi", "x_eta", "y_xi", "y_eta",
         "x_xixi", "x_etaeta", "x_xieta", "y_xixi", "y_etaeta", "y_xieta"], 0.0)
    fields.update(kw)
    return SecondOrderJet(**fields)


IDENTITY = jet(x_xi=1.0, y_eta=1.0)


def random_jet(rng):
    vals = rng.uniform(-2.0, 2.0, size=12)
    names = ["x", "y", "x_xi", "x_eta", "y_xi", "y_eta",
             "x_xixi", "x_etaeta", "x_xieta", "y_xixi", "y_etaeta", "y_xieta"]
    return SecondOrderJet(**dict(zip(names, vals)))


# ---------------------------------------------------------------------------
# Elasticity residual
# ---------------------------------------------------------------------------

def test_navier_lame_identity_jet():
    assert navier_lame_residual(IDENTITY, LAME) == (0.0, 0.0)


def test_navier_lame_single_curvature():
    r1, r2 = navier_lame_residual(jet(x_xixi=2.0), LAME)
    assert r1 == pytest.approx(3.4)  # 1.0*2 + 0.35*4
    assert r2 == 0.0


def test_navier_lame_homogeneous_in_constants(rng):
    j = random_jet(rng)
    r1, r2 = navier_lame_residual(j, LAME)
    for t in (0.5, 2.0, 7.0):
        s1, s2 = navier_lame_residual(j, LameConstants(LAME.lam * t, LAME.mu * t))
        assert s1 == pytest.approx(t * r1, rel=1e-14)
        assert s2 == pytest.approx(t * r2, rel=1e-14)


def test_navier_lame_vanishes_on_affine_jets(rng):
    for _ in range(200):
        a = rng.uniform(-5.0, 5.0, size=6)
        affine = jet(x=a[0], y=a[1], x_xi=a[2], x_eta=a[3], y_xi=a[4], y_eta=a[5])
        r1, r2 = navier_lame_residual(affine, LAME)
        assert abs(r1) <= 1e-12 and abs(r2) <= 1e-12


# ---------------------------------------------------------------------------
# Elliptic smoothing residual
# ---------------------------------------------------------------------------

def test_laplace_identity_jet():
    assert laplace_residual(IDENTITY) == (0.0, 0.0)


def test_laplace_parabolic_map():
    # x = xi^2, y = eta at xi = 0.5: x_xi = 1, x_xixi = 2, metric g22 = 1
    j = jet(x_xi=1.0, x_xixi=2.0, y_eta=1.0)
    r1, r2 = laplace_residual(j)
    assert r1 == pytest.approx(2.0)
    assert r2 == 0.0


def test_laplace_rotation_invariant_magnitude(rng):
    j = random_jet(rng)
    r = np.array(laplace_residual(j))
    theta = rng.uniform(0.0, 2.0 * np.pi)
    c, s = np.cos(theta), np.sin(theta)

    def rot(px, py):
        return c * px - s * py, s * px + c * py

    rx, ry = {}, {}
    for suffix in ("", "_xi", "_eta", "_xixi", "_etaeta", "_xieta"):
        rx[suffix], ry[suffix] = rot(getattr(j, "x" + suffix), getattr(j, "y" + suffix))
    rotated = SecondOrderJet(
        x=rx[""], y=ry[""], x_xi=rx["_xi"], x_eta=rx["_eta"],
        y_xi=ry["_xi"], y_eta=ry["_eta"], x_xixi=rx["_xixi"],
        x_etaeta=rx["_etaeta"], x_xieta=rx["_xieta"], y_xixi=ry["_xixi"],
        y_etaeta=ry["_etaeta"], y_xieta=ry["_xieta"])
    r_rot = np.array(laplace_residual(rotated))
    assert np.hypot(*r_rot) == pytest.approx(np.hypot(*r), rel=1e-12, abs=1e-12)


def test_laplace_literal_metric_flag_differs():
    j = jet(x_xi=1.0, x_eta=0.5, y_xi=0.25, y_eta=1.0, x_xieta=1.0)
    assert laplace_residual(j) != laplace_residual(j, literal_metric=True)


# ---------------------------------------------------------------------------
# Hyperbolic and Monge-Ampere residuals
# ---------------------------------------------------------------------------

def test_hyperbolic_identity_reference_area():
    assert hyperbolic_residual(IDENTITY, 1.0) == (0.0, 0.0)
    assert hyperbolic_residual(IDENTITY, 0.5) == (0.0, 0.5)


def test_hyperbolic_scaled_jet():
    scaled = jet(x_xi=2.0, y_eta=2.0)
    assert hyperbolic_residual(scaled, 4.0) == (0.0, 0.0)


def test_monge_ampere_identity_is_not_a_solution():
    r1, r2 = monge_ampere_residual(IDENTITY)
    assert r1 == -1.0 and r2 == 1.0


def test_monge_ampere_zero_jet():
    assert monge_ampere_residual(jet()) == (0.0, 0.0)


def test_monge_ampere_swap_symmetry_on_second_order_jets(rng):
    # Swapping x<->y together with xi<->eta swaps the two component
    # equations; exact when the first-order terms vanish (they flip sign
    # under the index swap otherwise).
    for _ in range(20):
        j = random_jet(rng)
        j = jet(x_xixi=j.x_xixi, x_etaeta=j.x_etaeta, x_xieta=j.x_xieta,
                y_xixi=j.y_xixi, y_etaeta=j.y_etaeta, y_xieta=j.y_xieta)
        swapped = jet(x_xixi=j.y_etaeta, x_etaeta=j.y_xixi, x_xieta=j.y_xieta,
                      y_xixi=j.x_etaeta, y_etaeta=j.x_xixi, y_xieta=j.x_xieta)
        r1, r2 = monge_ampere_residual(j)
        s1, s2 = monge_ampere_residual(swapped)
        assert s1 == pytest.approx(r2, rel=1e-14, abs=1e-14)
        assert s2 == pytest.approx(r1, rel=1e-14, abs=1e-14)


# ---------------------------------------------------------------------------
# Shared behavior
# ---------------------------------------------------------------------------

def test_zero_jet_residuals():
    z = jet()
    assert navier_lame_residual(z, LAME) == (0.0, 0.0)
    assert laplace_residual(z) == (0.0, 0.0)
    assert monge_ampere_residual(z) == (0.0, 0.0)
    assert hyperbolic_residual(z, 2.0) == (0.0, -2.0)


def test_residual_function_dispatch():
    fn = residual_function("navier_lame", LAME)
    assert fn(IDENTITY) == (0.0, 0.0)
    with pytest.raises(InvalidArgumentError):
        residual_function("heat", LAME)


# ---------------------------------------------------------------------------
# Symbolic polynomial oracle
# ---------------------------------------------------------------------------

def _poly_eval(c, xi, eta):
    out = 0.0
    for i in range(c.shape[0]):
        for j in range(c.shape[1]):
            out += c[i, j] * xi ** i * eta ** j
    return out


def _poly_dxi(c):
    out = np.zeros_like(c)
    for i in range(1, c.shape[0]):
        out[i - 1] = i * c[i]
    return out


def _poly_deta(c):
    out = np.zeros_like(c)
    for j in range(1, c.shape[1]):
        out[:, j - 1] = j * c[:, j]
    return out


def _poly_jet(cx, cy, xi, eta):
    return SecondOrderJet(
        x=_poly_eval(cx, xi, eta), y=_poly_eval(cy, xi, eta),
        x_xi=_poly_eval(_poly_dxi(cx), xi, eta),
        x_eta=_poly_eval(_poly_deta(cx), xi, eta),
        y_xi=_poly_eval(_poly_dxi(cy), xi, eta),
        y_eta=_poly_eval(_poly_deta(cy), xi, eta),
        x_xixi=_poly_eval(_poly_dxi(_poly_dxi(cx)), xi, eta),
        x_etaeta=_poly_eval(_poly_deta(_poly_deta(cx)), xi, eta),
        x_xieta=_poly_eval(_poly_deta(_poly_dxi(cx)), xi, eta),
        y_xixi=_poly_eval(_poly_dxi(_poly_dxi(cy)), xi, eta),
        y_etaeta=_poly_eval(_poly_deta(_poly_deta(cy)), xi, eta),
        y_xieta=_poly_eval(_poly_deta(_poly_dxi(cy)), xi, eta),
    )


def _oracle_residuals(name, j, lam, mu, area):
    """Literal transcriptions, independent of the module implementations."""
    if name == "navier_lame":
        return (lam * (j.x_xixi + j.y_xieta) + mu * (2 * j.x_xixi + j.x_etaeta + j.y_xieta),
                mu * (j.x_xieta + j.y_xixi + 2 * j.y_etaeta) + lam * (j.x_xieta + j.y_etaeta))
    if name == "laplace":
        g11 = j.x_xi ** 2 + j.y_xi ** 2
        g22 = j.x_eta ** 2 + j.y_eta ** 2
        g12 = j.x_xi * j.x_eta + j.y_xi * j.y_eta
        return (j.x_xixi * g22 - 2 * j.x_xieta * g12 + j.x_etaeta * g11,
                j.y_xixi * g22 - 2 * j.y_xieta * g12 + j.y_etaeta * g11)
    if name == "hyperbolic":
        return (j.x_xi * j.x_eta + j.y_xi * j.y_eta,
                j.x_xi * j.y_eta - j.y_xi * j.x_eta - area)
    return (j.x_xixi * j.x_etaeta - j.x_xieta ** 2 - j.x_xi ** 2 + j.x_eta ** 2,
            j.y_xixi * j.y_etaeta - j.y_xieta ** 2 - j.y_xi ** 2 + j.y_eta ** 2)


def test_residuals_match_symbolic_oracle_on_polynomials(rng):
    lame = LameConstants(1.0, 0.35)
    for _ in range(100):
        cx = rng.uniform(-1.5, 1.5, size=(3, 3))
        cy = rng.uniform(-1.5, 1.5, size=(3, 3))
        xi, eta = rng.uniform(0.0, 1.0, size=2)
        j = _poly_jet(cx, cy, xi, eta)
        for name in ("navier_lame", "laplace", "hyperbolic", "monge_ampere"):
            fn = residual_function(name, lame, reference_area=0.7)
            got = fn(j)
            want = _oracle_residuals(name, j, lame.lam, lame.mu, 0.7)
            assert got[0] == pytest.approx(want[0], rel=1e-8, abs=1e-12)
            assert got[1] == pytest.approx(want[1], rel=1e-8, abs=1e-12)


def test_analytic_mapping_jets_match_polynomial_partials(rng):
    # Hyper-dual jets of a polynomial map against coefficient-shift
    # differentiation (an oracle with no shared code path).
    from elastimesh.training import AnalyticMapping

    for _ in range(20):
        cx = rng.uniform(-1.0, 1.0, size=(3, 3))
        cy = rng.uniform(-1.0, 1.0, size=(3, 3))

        def poly_map(xi, eta, cx=cx, cy=cy):
            def ev(c):
                out = 0.0
                for i in range(3):
                    for j in range(3):
                        term = c[i, j]
                        for _ in range(i):
                            term = term * xi
                        for _ in range(j):
                            term = term * eta
                        out = out + term
                return out
            return ev(cx), ev(cy)

        xi0, eta0 = rng.uniform(0.1, 0.9, size=2)
        got = AnalyticMapping(poly_map).jets(np.array([xi0]), np.array([eta0]))
        want = _poly_jet(cx, cy, xi0, eta0)
        for name in want.as_dict():
            assert getattr(got, name)[0] == pytest.approx(
                getattr(want, name), rel=1e-11, abs=1e-11), name
