"""Structured triangulations of the periodic unit cell with a disc inclusion.

The computational domain is the unit cell (0, 1)^2 of a square lattice with
lattice constant 1.  A circular rod of radius r < 0.5 sits at the cell centre
(0.5, 0.5).  Meshes are structured: the cell is divided into an n-by-n grid of
squares and every square is split along its lower-left to upper-right
diagonal.  Opposite edges of the cell are identified, so the periodic DOF
count is exactly n*n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

REGION_BACKGROUND = 0
REGION_DISC = 1


class GeometryError(ValueError):
    """Invalid geometry parameters or broken mesh topology."""


@dataclass(frozen=True)
class Mesh:
    """Triangle mesh of the closed unit cell [0, 1]^2.

    Attributes
    ----------
    vertices : (nv, 2) float array
        Vertex coordinates, nv = (n + 1)^2.
    triangles : (nt, 3) int array
        Vertex indices per triangle, counterclockwise, nt = 2 n^2.
    region_of_triangle : (nt,) int array
        REGION_DISC where the centroid lies strictly inside the rod,
        REGION_BACKGROUND elsewhere.
    n : int
        Grid subdivisions per edge.
    r : float
        Rod radius, 0 <= r < 0.5.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    region_of_triangle: np.ndarray
    n: int
    r: float

    def signed_areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def tagged_area(self, region: int) -> float:
        """Total area of the triangles carrying the given region tag."""
        mask = self.region_of_triangle == region
        return float(self.signed_areas()[mask].sum())


@dataclass(frozen=True)
class PeriodicMap:
    """Identification of mesh vertices with periodic degrees of freedom.

    Vertices on the right edge map to the DOF of the matching vertex on the
    left edge, top maps to bottom, and all four corners share one DOF.
    """

    dof_of_vertex: np.ndarray
    n_dofs: int


def build_unit_cell_mesh(n: int, r: float) -> Mesh:
    """Build the structured unit-cell mesh.

    Parameters
    ----------
    n : int
        Subdivisions per edge, n >= 1.
    r : float
        Rod radius; must satisfy 0 <= r < 0.5 so the rod stays strictly
        inside the cell.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise GeometryError(f"grid subdivisions must be a positive integer, got {n!r}")
    if not (0.0 <= r < 0.5):
        raise GeometryError(f"rod radius must satisfy 0 <= r < 0.5, got {r!r}")

    ticks = np.arange(n + 1) / n
    gx, gy = np.meshgrid(ticks, ticks, indexing="xy")
    vertices = np.column_stack([gx.ravel(), gy.ravel()])

    # Cell (i, j) has corners ll, lr, ul, ur; the diagonal runs ll -> ur.
    ii, jj = np.meshgrid(np.arange(n), np.arange(n), indexing="xy")
    ll = (jj * (n + 1) + ii).ravel()
    lr = ll + 1
    ul = ll + (n + 1)
    ur = ul + 1
    lower = np.column_stack([ll, lr, ur])
    upper = np.column_stack([ll, ur, ul])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    centroids = vertices[triangles].mean(axis=1)
    inside = (centroids[:, 0] - 0.5) ** 2 + (centroids[:, 1] - 0.5) ** 2 < r * r
    regions = np.where(inside, REGION_DISC, REGION_BACKGROUND).astype(np.int64)

    for arr in (vertices, triangles, regions):
        arr.setflags(write=False)
    return Mesh(vertices=vertices, triangles=triangles, region_of_triangle=regions, n=n, r=float(r))


def build_periodic_dof_map(mesh: Mesh) -> PeriodicMap:
    """Map mesh vertices onto the n^2 periodic degrees of freedom."""
    n = mesh.n
    nv = (n + 1) * (n + 1)
    if mesh.vertices.shape[0] != nv:
        raise GeometryError("vertex count does not match the structured grid")

    ticks = np.arange(n + 1) / n
    gx, gy = np.meshgrid(ticks, ticks, indexing="xy")
    expected = np.column_stack([gx.ravel(), gy.ravel()])
    if not np.array_equal(mesh.vertices, expected):
        raise GeometryError("boundary vertex offsets do not match the periodic identification")

    idx = np.arange(nv)
    i = idx % (n + 1)
    j = idx // (n + 1)
    dof = (j % n) * n + (i % n)
    dof.setflags(write=False)
    return PeriodicMap(dof_of_vertex=dof, n_dofs=n * n)


def filling_fraction_to_radius(f: float) -> float:
    """Radius of a rod occupying area fraction ``f`` of the unit cell.

    Inverts f = pi r^2.  Requires 0 <= f < pi/4 so that r < 0.5.
    """
    if not (0.0 <= f < math.pi / 4.0):
        raise GeometryError(f"filling fraction must lie in [0, pi/4), got {f!r}")
    return math.sqrt(f / math.pi)


def write_mesh_dump(mesh: Mesh, target: str | Path | IO[str]) -> None:
    """Write a plain-text mesh dump: one 'v x y' line per vertex followed by
    one 't i j k region' line per triangle."""
    lines = []
    for x, y in mesh.vertices:
        lines.append(f"v {x:.17g} {y:.17g}")
    for (a, b, c), reg in zip(mesh.triangles, mesh.region_of_triangle):
        lines.append(f"t {a} {b} {c} {reg}")
    text = "\n".join(lines) + "\n"
    if hasattr(target, "write"):
        target.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")
