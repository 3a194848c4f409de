"""Normals and area elements from the solved surface-element field."""

from dataclasses import dataclass, field

import numpy as np

from .assembly import NormalizedCloud
from .solver import SurfaceElementField


@dataclass
class OrientedCloud:
    """Input points with unit normals and per-point area elements.

    Rows whose surface-element vector is numerically zero keep a placeholder
    normal (last axis) and are marked degenerate instead of being dropped,
    preserving index alignment with the input.
    """

    points: np.ndarray
    normals: np.ndarray
    areas: np.ndarray
    degenerate: np.ndarray


def extract_normals(field: SurfaceElementField, cloud: NormalizedCloud) -> OrientedCloud:
    """normals = mu_i / |mu_i|; areas = |mu_i| mapped back to input units.

    The normalization map scales lengths by ``cloud.scale``, so a
    (dim-1)-dimensional area element picks up scale^-(dim-1) on the way back.
    """
    mu = field.mu
    norms = np.linalg.norm(mu, axis=1)
    peak = norms.max()
    if peak == 0.0:
        raise ValueError("all-zero surface elements: no orientation information")
    degenerate = norms < 1e-12 * peak
    safe = np.where(degenerate, 1.0, norms)
    normals = mu / safe[:, None]
    placeholder = np.zeros(mu.shape[1])
    placeholder[-1] = 1.0
    normals[degenerate] = placeholder
    dim = cloud.dim
    areas = norms / cloud.scale ** (dim - 1)
    return OrientedCloud(points=cloud.to_original(cloud.points), normals=normals,
                         areas=areas, degenerate=degenerate)


def pgp90(estimated: OrientedCloud | np.ndarray, truth_normals: np.ndarray) -> float:
    """Fraction of points whose estimated normal has positive dot with truth."""
    normals = estimated.normals if isinstance(estimated, OrientedCloud) else estimated
    truth_normals = np.asarray(truth_normals, dtype=float)
    if normals.shape != truth_normals.shape:
        raise ValueError(f"shape mismatch: {normals.shape} vs {truth_normals.shape}")
    return float(np.mean(np.sum(normals * truth_normals, axis=1) > 0.0))
