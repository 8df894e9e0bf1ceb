"""Structured mesh representation, quality metrics and file formats.

Node order is row-major with i fastest: node (i, j) lives at flat index
j*ni + i.  Cell (i, j) is the quad of nodes (i,j), (i+1,j), (i+1,j+1),
(i,j+1); cells are indexed j*(ni-1) + i.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateCellError, InvalidArgumentError, MeshIOError, ParseError


@dataclass(frozen=True)
class CompGrid:
    """Uniform lattice over the computational unit square."""

    ni: int
    nj: int
    nodes: np.ndarray  # (ni*nj, 2) of (xi, eta)


@dataclass
class StructuredMesh:
    """Physical node coordinates on a fixed (ni, nj) lattice."""

    ni: int
    nj: int
    coords: np.ndarray  # (ni*nj, 2)
    provenance: str = "tfi"  # tfi | pinn | pinn+hardbc | imported

    def node_index(self, i: int, j: int) -> int:
        return j * self.ni + i

    def grid_view(self) -> np.ndarray:
        """Coordinates reshaped to (nj, ni, 2)."""
        return self.coords.reshape(self.nj, self.ni, 2)


@dataclass(frozen=True)
class QualityReport:
    avg_min_angle: float
    avg_max_angle: float
    avg_cell_area: float
    inverted_cells: int
    generation_time: float


def uniform_comp_grid(ni: int, nj: int) -> CompGrid:
    if ni < 2 or nj < 2:
        raise InvalidArgumentError("grid needs at least 2 nodes per direction")
    xi = np.linspace(0.0, 1.0, ni)
    eta = np.linspace(0.0, 1.0, nj)
    ee, xx = np.meshgrid(eta, xi, indexing="ij")
    return CompGrid(ni=ni, nj=nj, nodes=np.column_stack([xx.ravel(), ee.ravel()]))


# ---------------------------------------------------------------------------
# Quality metrics
# ---------------------------------------------------------------------------

def _cell_corners(mesh: StructuredMesh) -> np.ndarray:
    """Corner coordinates per cell, shape (ncells, 4, 2), in quad order."""
    g = mesh.grid_view()
    a = g[:-1, :-1]
    b = g[:-1, 1:]
    c = g[1:, 1:]
    d = g[1:, :-1]
    return np.stack([a, b, c, d], axis=2).reshape(-1, 4, 2)


def included_angles(mesh: StructuredMesh) -> np.ndarray:
    """Four interior angles per cell, degrees, in corner order.

    Angles come from the arccosine of the normalized dot product of the two
    edge vectors leaving each corner, with the dot clamped to [-1, 1].
    """
    corners = _cell_corners(mesh)
    prev = np.roll(corners, 1, axis=1)
    nxt = np.roll(corners, -1, axis=1)
    u = nxt - corners
    v = prev - corners
    nu = np.linalg.norm(u, axis=2)
    nv = np.linalg.norm(v, axis=2)
    bad = np.nonzero((nu == 0.0) | (nv == 0.0))
    if bad[0].size:
        raise DegenerateCellError(int(bad[0][0]))
    cosines = np.clip(np.sum(u * v, axis=2) / (nu * nv), -1.0, 1.0)
    return np.degrees(np.arccos(cosines))


def cell_areas(mesh: StructuredMesh) -> np.ndarray:
    """Signed shoelace area per cell; positive for counterclockwise quads."""
    corners = _cell_corners(mesh)
    x = corners[:, :, 0]
    y = corners[:, :, 1]
    xn = np.roll(x, -1, axis=1)
    yn = np.roll(y, -1, axis=1)
    return 0.5 * np.sum(x * yn - xn * y, axis=1)


def _corner_crosses(mesh: StructuredMesh) -> np.ndarray:
    """Cross product of incoming and outgoing edge at each corner."""
    corners = _cell_corners(mesh)
    e = np.roll(corners, -1, axis=1) - corners  # edge k: corner k -> k+1
    e_in = np.roll(e, 1, axis=1)
    return e_in[:, :, 0] * e[:, :, 1] - e_in[:, :, 1] * e[:, :, 0]


def inverted_cell_mask(mesh: StructuredMesh) -> np.ndarray:
    """Cells with non-positive signed area or a reflex/bow-tie corner.

    A corner whose turn direction disagrees with the cell's majority turn
    marks a fold that the signed area alone can miss.
    """
    areas = cell_areas(mesh)
    crosses = _corner_crosses(mesh)
    signs = np.sign(crosses)
    majority = np.where(np.sum(signs, axis=1) >= 0.0, 1.0, -1.0)
    mismatch = np.any(signs * majority[:, None] < 0.0, axis=1)
    return (areas <= 0.0) | mismatch


def quality_report(mesh: StructuredMesh, elapsed: float = 0.0) -> QualityReport:
    angles = included_angles(mesh)
    areas = cell_areas(mesh)
    return QualityReport(
        avg_min_angle=float(np.mean(np.min(angles, axis=1))),
        avg_max_angle=float(np.mean(np.max(angles, axis=1))),
        avg_cell_area=float(np.mean(np.abs(areas))),
        inverted_cells=int(np.count_nonzero(inverted_cell_mask(mesh))),
        generation_time=float(elapsed),
    )


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def export_vtk(mesh: StructuredMesh, path) -> None:
    """Legacy ASCII structured-grid file with z = 0."""
    lines = [
        "# vtk DataFile Version 3.0",
        "structured quad mesh",
        "ASCII",
        "DATASET STRUCTURED_GRID",
        f"DIMENSIONS {mesh.ni} {mesh.nj} 1",
        f"POINTS {mesh.ni * mesh.nj} float",
    ]
    lines.extend(f"{_fmt(x)} {_fmt(y)} 0" for x, y in mesh.coords)
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise MeshIOError(path, f"could not write VTK file: {exc}") from exc


def export_csv(mesh: StructuredMesh, path) -> None:
    """Header line 'ni,nj' then one 'x,y' line per node, full precision."""
    lines = [f"{mesh.ni},{mesh.nj}"]
    lines.extend(f"{_fmt(x)},{_fmt(y)}" for x, y in mesh.coords)
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise MeshIOError(path, f"could not write CSV file: {exc}") from exc


def import_mesh_csv(path) -> StructuredMesh:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MeshIOError(path, f"could not read CSV file: {exc}") from exc
    lines = [ln for ln in text.splitlines()]
    if not lines:
        raise ParseError(1, "empty mesh file")
    header = lines[0].split(",")
    if len(header) != 2:
        raise ParseError(1, "header must be 'ni,nj'")
    try:
        ni, nj = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(1, f"header must be two integers, got {lines[0]!r}") from None
    if ni < 2 or nj < 2:
        raise ParseError(1, f"node counts must be >= 2, got {ni},{nj}")
    expected = ni * nj
    coords = np.empty((expected, 2))
    row = 0
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        if row >= expected:
            raise ParseError(lineno, f"more than {expected} node lines")
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(lineno, "expected 'x,y'")
        try:
            coords[row] = (float(parts[0]), float(parts[1]))
        except ValueError:
            raise ParseError(lineno, f"could not parse node {line!r}") from None
        row += 1
    if row != expected:
        raise ParseError(len(lines), f"expected {expected} node lines, found {row}")
    return StructuredMesh(ni=ni, nj=nj, coords=coords, provenance="imported")
