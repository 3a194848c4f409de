"""Vector fields whose divergence reproduces basis functions, and
divergence-free curl fields used as extra test functions.

A tensor-product basis B(x) = f1(x1) f2(x2) f3(x3) is the divergence of the
field that carries the antiderivative of one factor on that factor's axis
and zeros elsewhere. Curl fields F = curl G are divergence-free for any
twice-differentiable G; each one yields a homogeneous surface constraint.
"""

from dataclasses import dataclass

import numpy as np

from .mollify import MollifiedFamily, evaluate_mollified
from .wavelets import evaluate


@dataclass(frozen=True)
class BasisIndex:
    """One tensor-product basis function: type vector e, level j, translation k."""

    e: tuple
    j: int
    k: tuple

    @property
    def dim(self) -> int:
        return len(self.e)


def antiderivative_axis(e) -> int:
    """Axis carrying the antiderivative factor: first wavelet axis, else axis 0."""
    for ax, bit in enumerate(e):
        if bit:
            return ax
    return 0


def basis_value(table, basis: BasisIndex, points):
    """Unmollified B(x) = prod over axes of phi/psi translates."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.ones(len(points))
    for ax, bit in enumerate(basis.e):
        kind = "psi" if bit else "phi"
        out *= evaluate(table, kind, basis.j, basis.k[ax], points[:, ax])
    return out


def mollified_basis_value(family: MollifiedFamily, basis: BasisIndex, points):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.ones(len(points))
    for ax, bit in enumerate(basis.e):
        kind = "psi_bar" if bit else "phi_bar"
        out *= evaluate_mollified(family, kind, basis.j, basis.k[ax], points[:, ax])
    return out


def field_A(family: MollifiedFamily, basis: BasisIndex, points):
    """Mollified field whose divergence is the mollified basis.

    Returns an (n, dim) array with a single nonzero component on the
    antiderivative axis.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    a = antiderivative_axis(basis.e)
    comp = np.ones(len(points))
    for ax, bit in enumerate(basis.e):
        if ax == a:
            kind = "Psi_bar" if bit else "Phi_bar"
        else:
            kind = "psi_bar" if bit else "phi_bar"
        comp *= evaluate_mollified(family, kind, basis.j, basis.k[ax], points[:, ax])
    out = np.zeros_like(points)
    out[:, a] = comp
    return out


@dataclass(frozen=True)
class DivFreeKernel:
    """Parameters of one divergence-free field F = curl G.

    trig-sqrt family: G = (w2_1 cos(u), w2_2 sin(u), w2_3 sqrt(u + s)) with
    u = w1 . x; the shift s keeps the sqrt argument >= 1 over the sampling
    box. In 2-D, G is the scalar w2_1 cos(u) + w2_2 sin(u) + w2_3 sqrt(u+s)
    and F is the rotated gradient (dG/dy, -dG/dx).

    center family: G = (1/r, 1/r, 1/r) with r the distance to a center
    placed outside the sampling box.
    """

    w1: np.ndarray
    w2: np.ndarray
    shift: float = 0.0
    variant: str = "trig-sqrt"
    center: np.ndarray | None = None

    def __post_init__(self):
        if self.variant == "trig-sqrt" and not (np.any(self.w1) and np.any(self.w2)):
            raise ValueError("degenerate kernel: w1 and w2 must be nonzero")

    @property
    def dim(self) -> int:
        return len(self.w1) if self.variant == "trig-sqrt" else len(self.center)


def curl_field(kernel: DivFreeKernel, points):
    """Analytic F = curl G at the given points, shape (n, dim)."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if kernel.variant == "center":
        d = points - kernel.center
        r = np.linalg.norm(d, axis=1)
        if np.any(r == 0.0):
            raise ValueError("evaluation point coincides with the kernel center")
        if points.shape[1] == 2:
            return np.stack([-d[:, 1], d[:, 0]], axis=1) / r[:, None] ** 3
        num = np.stack([d[:, 2] - d[:, 1], d[:, 0] - d[:, 2], d[:, 1] - d[:, 0]], axis=1)
        return num / r[:, None] ** 3

    w1, w2, s = kernel.w1, kernel.w2, kernel.shift
    u = points @ w1
    arg = u + s
    if np.any(arg <= 0.0):
        raise ValueError("sqrt argument nonpositive: point outside the kernel's domain box")
    root = np.sqrt(arg)
    if points.shape[1] == 2:
        gprime = -w2[0] * np.sin(u) + w2[1] * np.cos(u) + w2[2] / (2.0 * root)
        return np.stack([w1[1] * gprime, -w1[0] * gprime], axis=1)
    f1 = w2[2] * w1[1] / (2.0 * root) - w2[1] * w1[2] * np.cos(u)
    f2 = -w2[0] * w1[2] * np.sin(u) - w2[2] * w1[0] / (2.0 * root)
    f3 = w2[1] * w1[0] * np.cos(u) + w2[0] * w1[1] * np.sin(u)
    return np.stack([f1, f2, f3], axis=1)


def _box_corners(lo, hi):
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    dim = len(lo)
    grids = np.meshgrid(*[(lo[ax], hi[ax]) for ax in range(dim)], indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def sample_kernels(count: int, seed: int, box=((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)),
                   variant: str = "trig-sqrt", dim: int = 3,
                   w1_range: float = 5.0) -> list[DivFreeKernel]:
    """Seeded kernel parameters: w1 uniform in [-w1_range, w1_range]^dim,
    rejecting tiny or near-parallel frequency vectors so kernels stay
    pairwise informative; w2 uniform directions with magnitude in [0.5, 1.5].
    """
    if count < 0:
        raise ValueError("kernel count must be nonnegative")
    rng = np.random.default_rng(seed)
    lo, hi = box
    corners = _box_corners(lo, hi)
    out: list[DivFreeKernel] = []
    accepted = np.zeros((0, dim))
    if variant == "center":
        center_box = 0.5 * (np.asarray(lo, dtype=float) + np.asarray(hi, dtype=float))
        half_diag = 0.5 * np.linalg.norm(np.asarray(hi, dtype=float) - np.asarray(lo, dtype=float))
        while len(out) < count:
            direction = rng.normal(size=dim)
            direction /= np.linalg.norm(direction)
            c = center_box + direction * half_diag * rng.uniform(1.5, 3.0)
            out.append(DivFreeKernel(w1=np.zeros(dim), w2=np.zeros(dim),
                                     variant="center", center=c))
        return out

    while len(out) < count:
        w1 = rng.uniform(-w1_range, w1_range, size=dim)
        norm = np.linalg.norm(w1)
        if norm < 0.1:
            continue
        if len(accepted):
            # reject near-parallel pairs: |sin(angle)| below 1e-6
            cross = np.linalg.norm(np.cross(accepted, w1[None, :]), axis=-1) \
                if dim == 3 else np.abs(accepted[:, 0] * w1[1] - accepted[:, 1] * w1[0])
            if np.any(cross < 1e-6 * np.linalg.norm(accepted, axis=1) * norm):
                continue
        w2 = rng.normal(size=3)  # 2-D keeps 3 weights: cos, sin and sqrt terms
        w2 = w2 / np.linalg.norm(w2) * rng.uniform(0.5, 1.5)
        shift = 1.0 + float(np.abs(corners @ w1).max())
        out.append(DivFreeKernel(w1=w1, w2=w2, shift=shift))
        accepted = np.vstack([accepted, w1])
    return out
