"""Indicator-field evaluation on grids and surface extraction.

Field evaluation contracts the solved surface elements into one coefficient
per basis function once; queries then only evaluate basis values. On the
tensor-product extraction grid the contraction factorizes per axis, so a
65^3 grid costs a handful of small GEMMs per block.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from skimage import measure

from .assembly import BasisSet, NormalizedCloud, PointOperator, block_factors, _rest_product
from .mollify import MollifiedFamily


@dataclass
class ImplicitGrid:
    """Corner samples of the indicator field over the unit cube/square."""

    axes: list          # per-axis corner coordinates in unit space
    values: np.ndarray  # shape (n1, ..., nd)
    iso_value: float


@dataclass
class Mesh:
    vertices: np.ndarray   # (V, 3) in original coordinates
    triangles: np.ndarray  # (T, 3) vertex indices

    @property
    def empty(self) -> bool:
        return len(self.triangles) == 0


def indicator_coefficients(operator: PointOperator, mu) -> list:
    """Per-basis expansion coefficients of the reconstructed field, computed once."""
    return operator.coefficient_blocks(np.asarray(mu, dtype=float).reshape(-1))


def evaluate_field(family: MollifiedFamily, basis_set: BasisSet, coeffs: list,
                   queries) -> np.ndarray:
    """Field values at arbitrary query points (unit coordinates)."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    coords = [queries[:, ax] for ax in range(basis_set.dim)]
    out = np.zeros(len(queries))
    for block, c in zip(basis_set.blocks, coeffs):
        u = block_factors(family, block, coords, "basis")
        rest = _rest_product(u)
        out += ((rest @ c.T) * u[0]).sum(axis=1)
    return out


def compute_isovalue(operator: PointOperator, coeffs: list) -> float:
    """Mean field value over the input points; recenters the extraction level."""
    return float(operator.coefficients_to_points(coeffs).mean())


def evaluate_grid(family: MollifiedFamily, basis_set: BasisSet, coeffs: list,
                  depth: int, iso_value: float) -> ImplicitGrid:
    """Field on a dyadic corner grid with 2^depth + 1 corners per axis."""
    dim = basis_set.dim
    n = 2 ** depth + 1
    axis = np.linspace(0.0, 1.0, n)
    values = np.zeros((n,) * dim)
    for block, c in zip(basis_set.blocks, coeffs):
        f = block_factors(family, block, [axis] * dim, "basis")
        if dim == 2:
            values += f[0] @ c @ f[1].T
        else:
            t = np.tensordot(f[0], c.reshape(block.k_n), axes=(1, 0))
            t = np.tensordot(t, f[1], axes=(1, 1))        # (a, r, b)
            values += np.tensordot(t, f[2], axes=(1, 1))  # (a, b, c)
    return ImplicitGrid(axes=[axis] * dim, values=values, iso_value=iso_value)


def marching_cubes(grid: ImplicitGrid, cloud: NormalizedCloud) -> Mesh:
    """Table-driven extraction at the grid's iso-value, mapped to input units."""
    v = grid.values
    if not (v.min() < grid.iso_value < v.max()):
        warnings.warn("iso-value outside the field range: empty surface")
        return Mesh(vertices=np.zeros((0, 3)), triangles=np.zeros((0, 3), dtype=int))
    spacing = tuple(ax[1] - ax[0] for ax in grid.axes)
    verts, faces, _, _ = measure.marching_cubes(v, level=grid.iso_value, spacing=spacing)
    verts = cloud.to_original(verts)
    tri = verts[faces]
    area2 = np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    keep = area2 > 1e-14
    faces = faces[keep]
    return Mesh(vertices=verts, triangles=faces)


def _enforce_winding(contour: np.ndarray, values: np.ndarray, axes: list) -> np.ndarray:
    """Orient a closed contour so the high-field side (inside) is on its left."""
    x, y = contour[:, 0], contour[:, 1]
    signed_area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    # interior probe: offset the midpoint of the longest edge along its left normal
    seg = np.diff(contour, axis=0)
    lengths = np.linalg.norm(seg, axis=1)
    i = int(np.argmax(lengths))
    mid = 0.5 * (contour[i] + contour[i + 1])
    t = seg[i] / lengths[i]
    left = np.array([-t[1], t[0]])
    h = 0.5 * (axes[0][1] - axes[0][0])

    def field_at(p):
        fi = np.interp(p[0], axes[0], np.arange(len(axes[0])))
        fj = np.interp(p[1], axes[1], np.arange(len(axes[1])))
        i0, j0 = int(fi), int(fj)
        i0, j0 = min(i0, values.shape[0] - 2), min(j0, values.shape[1] - 2)
        di, dj = fi - i0, fj - j0
        patch = values[i0:i0 + 2, j0:j0 + 2]
        return (patch[0, 0] * (1 - di) * (1 - dj) + patch[1, 0] * di * (1 - dj)
                + patch[0, 1] * (1 - di) * dj + patch[1, 1] * di * dj)

    inside_on_left = field_at(mid + h * left) > field_at(mid - h * left)
    # counter-clockwise (positive area) must enclose the inside
    if inside_on_left != (signed_area > 0):
        return contour[::-1]
    return contour


def marching_squares(grid: ImplicitGrid, cloud: NormalizedCloud) -> list:
    """Closed iso-contours as polylines in input units, outward-consistent winding."""
    v = grid.values
    if not (v.min() < grid.iso_value < v.max()):
        warnings.warn("iso-value outside the field range: empty contour set")
        return []
    contours = measure.find_contours(v, level=grid.iso_value)
    out = []
    for c in contours:
        if len(c) < 4 or not np.allclose(c[0], c[-1]):
            continue  # open contours touch the grid boundary; not a closed loop
        pts = np.stack([np.interp(c[:, 0], np.arange(len(grid.axes[0])), grid.axes[0]),
                        np.interp(c[:, 1], np.arange(len(grid.axes[1])), grid.axes[1])],
                       axis=1)
        pts = _enforce_winding(pts, v, grid.axes)
        out.append(cloud.to_original(pts))
    return out
