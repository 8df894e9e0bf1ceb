"""Hard boundary conditions: snap boundary nodes onto the input curves and
diffuse the corrections into the interior.

Boundary node j moves by delta_j = (exact curve sample) - (current position);
each interior node then receives the inverse-squared-distance weighted
average of all boundary corrections.  Distances are measured to the
boundary nodes' current (pre-snap) positions, so an interior node close to
a drifting boundary node follows it almost rigidly and the projection
cannot fold cells that the raw mesh kept valid.  The "literal" mode
measures distances to the snapped target positions instead; it is retained
for comparison only.

Either way the projection is idempotent (a second application sees zero
corrections) and every interior displacement is a convex combination of the
boundary corrections, so its magnitude never exceeds the largest one.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError
from .geometry import DomainSpec
from .meshcore import StructuredMesh
from .training import boundary_targets

_COINCIDENT_TOL = 1e-14


def apply_hard_bc(mesh: StructuredMesh, domain: DomainSpec,
                  mode: str = "idw") -> StructuredMesh:
    """Exact-boundary projection of a mesh onto its domain curves."""
    if mode not in ("idw", "literal"):
        raise InvalidArgumentError(f"unknown hard-bc mode {mode!r}")

    ni, nj = mesh.ni, mesh.nj
    flat_idx, targets = boundary_targets(domain, ni, nj)

    coords = mesh.coords.copy()
    pre_snap = coords[flat_idx]
    deltas = targets - pre_snap  # (m, 2)
    anchors = pre_snap if mode == "idw" else targets

    interior_mask = np.ones(ni * nj, dtype=bool)
    interior_mask[flat_idx] = False
    interior = np.nonzero(interior_mask)[0]

    if interior.size:
        diff = coords[interior][:, None, :] - anchors[None, :, :]
        dist2 = np.sum(diff * diff, axis=2)  # (n_interior, m)
        coincident = dist2 < _COINCIDENT_TOL ** 2
        has_hit = coincident.any(axis=1)
        w = 1.0 / np.where(coincident, 1.0, dist2)
        w[coincident] = 0.0
        corrections = (w @ deltas) / np.sum(w, axis=1, keepdims=True)
        if has_hit.any():
            # Node sits on a boundary node: take that correction directly.
            first_hit = np.argmax(coincident, axis=1)
            corrections[has_hit] = deltas[first_hit[has_hit]]
        coords[interior] += corrections

    coords[flat_idx] = targets
    provenance = mesh.provenance
    if not provenance.endswith("+hardbc"):
        provenance = provenance + "+hardbc"
    return StructuredMesh(ni=ni, nj=nj, coords=coords, provenance=provenance)
