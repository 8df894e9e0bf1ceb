"""Algebraic baseline: bilinear transfinite interpolation (Coons patch)."""

from __future__ import annotations

import numpy as np

from .geometry import DomainSpec, require_compatible, sample_curve
from .meshcore import StructuredMesh, uniform_comp_grid

CORNER_TOL = 1e-6


def tfi_generate(domain: DomainSpec, ni: int, nj: int) -> StructuredMesh:
    """Blend the four boundary curves into an (ni, nj) mesh.

    Curve parameters are identified with normalized grid indices, corners
    are taken from the south/north curve endpoints, so every boundary node
    reproduces its own curve exactly (up to the corner gaps of the input).
    """
    require_compatible(domain, CORNER_TOL)
    grid = uniform_comp_grid(ni, nj)
    xi = np.linspace(0.0, 1.0, ni)
    eta = np.linspace(0.0, 1.0, nj)

    south = sample_curve(domain.south, ni)  # (ni, 2)
    north = sample_curve(domain.north, ni)
    west = sample_curve(domain.west, nj)  # (nj, 2)
    east = sample_curve(domain.east, nj)

    c00, c10 = south[0], south[-1]
    c01, c11 = north[0], north[-1]

    xi_c = xi[None, :, None]        # (1, ni, 1)
    eta_c = eta[:, None, None]      # (nj, 1, 1)
    edges = ((1.0 - xi_c) * west[:, None, :] + xi_c * east[:, None, :]
             + (1.0 - eta_c) * south[None, :, :] + eta_c * north[None, :, :])
    corners = ((1.0 - xi_c) * (1.0 - eta_c) * c00 + xi_c * (1.0 - eta_c) * c10
               + (1.0 - xi_c) * eta_c * c01 + xi_c * eta_c * c11)
    coords = (edges - corners).reshape(-1, 2)
    assert grid.ni == ni and grid.nj == nj
    return StructuredMesh(ni=ni, nj=nj, coords=coords, provenance="tfi")
