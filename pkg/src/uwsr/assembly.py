"""Cloud normalization, basis enumeration and constraint-system assembly.

The nonhomogeneous block couples two sparse factors: basis values at the
input points (rows) and field values at the input points (columns). The
product is dense, so it is never multiplied out; the operator applies the
factors in sequence. Per block of same-(level, type) bases, both factors
are small dense per-axis value matrices and every product reduces to GEMMs.
"""

from dataclasses import dataclass, field

import numpy as np

from .fields import BasisIndex, DivFreeKernel, antiderivative_axis, curl_field
from .mollify import MollifiedFamily
from .wavelets import SUPPORT, sample_table

# Ridge strength is alpha * REG_SCALE * diag(gram). The working scale was
# located empirically: at 1.0 the ridge dominates multi-component shapes
# (rings collapse), at ~0.01 noise robustness erodes; 0.05 holds both ends.
DEFAULT_REG_SCALE = 0.05


@dataclass
class NormalizedCloud:
    """Points mapped into the margin-padded unit cube by unit = (x - offset) * scale."""

    points: np.ndarray
    scale: float
    offset: np.ndarray
    margin: float = 0.1

    @property
    def size(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def to_unit(self, x):
        return (np.asarray(x, dtype=float) - self.offset) * self.scale

    def to_original(self, u):
        return np.asarray(u, dtype=float) / self.scale + self.offset


def normalize(points, margin: float = 0.1) -> NormalizedCloud:
    """Isotropic map of the cloud into [margin, 1-margin]^dim, centered."""
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] not in (2, 3):
        raise ValueError("points must be (M, 2) or (M, 3)")
    if len(points) < 4:
        raise ValueError("need at least 4 points")
    lo, hi = points.min(axis=0), points.max(axis=0)
    extent = float((hi - lo).max())
    if extent == 0.0:
        raise ValueError("degenerate cloud: zero bounding-box diagonal")
    scale = (1.0 - 2.0 * margin) / extent
    center = 0.5 * (lo + hi)
    offset = center - 0.5 / scale
    return NormalizedCloud(points=(points - offset) * scale, scale=scale,
                           offset=offset, margin=margin)


@dataclass(frozen=True)
class BasisBlock:
    """All translates of one (level, type) combination, k a box k_lo + [0, k_n)."""

    j: int
    e: tuple
    k_lo: tuple
    k_n: tuple

    @property
    def anti_axis(self) -> int:
        return antiderivative_axis(self.e)

    @property
    def size(self) -> int:
        return int(np.prod(self.k_n))

    def indices(self):
        for flat in range(self.size):
            k = []
            rem = flat
            for n in reversed(self.k_n):
                k.append(rem % n)
                rem //= n
            k = tuple(self.k_lo[ax] + kk for ax, kk in enumerate(reversed(k)))
            yield BasisIndex(e=self.e, j=self.j, k=k)


@dataclass
class BasisSet:
    blocks: list
    dim: int

    @property
    def size(self) -> int:
        return sum(b.size for b in self.blocks)

    def indices(self):
        for b in self.blocks:
            yield from b.indices()


def _type_vectors(dim: int):
    out = []
    for bits in range(1, 2 ** dim):
        out.append(tuple((bits >> (dim - 1 - ax)) & 1 for ax in range(dim)))
    return out


def enumerate_bases(d_max: int, cloud: NormalizedCloud, eps: float) -> BasisSet:
    """Scaling layer at level 0 plus wavelet layers 0..d_max-1 whose mollified
    support intersects the eps-dilated bounding box of the cloud."""
    if d_max < 0:
        raise ValueError("d_max must be nonnegative")
    dim = cloud.dim
    lo = cloud.points.min(axis=0)
    hi = cloud.points.max(axis=0)

    def k_range(j):
        k_lo, k_n = [], []
        for ax in range(dim):
            a = int(np.ceil(np.ldexp(lo[ax] - eps, j) - SUPPORT))
            b = int(np.floor(np.ldexp(hi[ax] + eps, j)))
            k_lo.append(a)
            k_n.append(b - a + 1)
        return tuple(k_lo), tuple(k_n)

    blocks = []
    k_lo, k_n = k_range(0)
    blocks.append(BasisBlock(j=0, e=tuple([0] * dim), k_lo=k_lo, k_n=k_n))
    for j in range(d_max):
        k_lo, k_n = k_range(j)
        for e in _type_vectors(dim):
            blocks.append(BasisBlock(j=j, e=e, k_lo=k_lo, k_n=k_n))
    return BasisSet(blocks=blocks, dim=dim)


_UNMOLLIFIED = {0: "phi", 1: "psi"}
_POINTWISE = {0: "phi_bar", 1: "psi_bar"}
_ANTIDERIVATIVE = {0: "Phi_bar", 1: "Psi_bar"}


def factor_matrix(family: MollifiedFamily, kind: str, j: int, coords,
                  k_lo: int, k_n: int) -> np.ndarray:
    """Dense (len(coords), k_n) values of every translate of one 1-D factor."""
    coords = np.asarray(coords, dtype=float)
    t = np.ldexp(coords, j)[:, None] - (k_lo + np.arange(k_n))[None, :]
    scale = np.ldexp(1.0, j) ** 0.5
    if kind in ("phi", "psi"):
        table = family.table
        vals = ("phi_values", "psi_values")[kind == "psi"]
        return scale * sample_table(getattr(table, vals), 0, table.grid_resolution,
                                    t.ravel()).reshape(t.shape)
    level = family.level(j)
    out = level.sample(kind, t.ravel()).reshape(t.shape)
    return out * scale if kind in ("phi_bar", "psi_bar") else out / scale


def block_factors(family: MollifiedFamily, block: BasisBlock, coords_per_axis,
                  side: str) -> list:
    """Per-axis factor matrices for one block.

    side 'basis': unmollified values (evaluation side). side 'field':
    mollified values with the antiderivative on the block's designated axis.
    """
    a = block.anti_axis
    out = []
    for ax, bit in enumerate(block.e):
        if side == "basis":
            kind = _UNMOLLIFIED[bit]
        else:
            kind = _ANTIDERIVATIVE[bit] if ax == a else _POINTWISE[bit]
        out.append(factor_matrix(family, kind, block.j, coords_per_axis[ax],
                                 block.k_lo[ax], block.k_n[ax]))
    return out


def _rest_product(mats: list) -> np.ndarray:
    """Elementwise product of axes 1.. flattened to (n, prod k_n)."""
    if len(mats) == 2:
        return mats[1]
    return (mats[1][:, :, None] * mats[2][:, None, :]).reshape(len(mats[1]), -1)


class PointOperator:
    """Factored nonhomogeneous block: basis values at points composed with
    field values at points, never multiplied out."""

    def __init__(self, family: MollifiedFamily, basis_set: BasisSet, points: np.ndarray):
        self.dim = basis_set.dim
        self.n_points = len(points)
        self.basis_set = basis_set
        self.blocks = []
        coords = [points[:, ax] for ax in range(self.dim)]
        for block in basis_set.blocks:
            u = block_factors(family, block, coords, "basis")
            v = block_factors(family, block, coords, "field")
            self.blocks.append({
                "block": block,
                "a": block.anti_axis,
                "u1": u[0], "u_rest": _rest_product(u),
                "v1": v[0], "v_rest": _rest_product(v),
            })
        self._check_support_bound(family)

    def _check_support_bound(self, family: MollifiedFamily):
        # Per point and block, pointwise-axis windows may not exceed the
        # support-derived width ceil(7 + 2 * 2^j eps) + 1.
        for blk in self.blocks:
            block = blk["block"]
            width = SUPPORT + 2.0 * np.ldexp(family.eps, block.j)
            bound = int(np.ceil(width)) + 1
            nnz = np.count_nonzero(blk["u1"], axis=1)
            if nnz.max(initial=0) > bound:
                raise AssertionError(
                    f"support bound violated in block {block.j}/{block.e}: "
                    f"{nnz.max()} > {bound}")

    def coefficient_blocks(self, mu: np.ndarray) -> list:
        """A mu: one coefficient tensor per block, flattened to (k1, rest)."""
        mu = mu.reshape(self.n_points, self.dim)
        out = []
        for blk in self.blocks:
            w = blk["v1"] * mu[:, blk["a"]][:, None]
            out.append(w.T @ blk["v_rest"])
        return out

    def coefficients_to_points(self, coeffs: list) -> np.ndarray:
        """B_f applied to coefficient blocks: indicator values at the points."""
        y = np.zeros(self.n_points)
        for blk, c in zip(self.blocks, coeffs):
            y += ((blk["u_rest"] @ c.T) * blk["u1"]).sum(axis=1)
        return y

    def apply(self, mu: np.ndarray) -> np.ndarray:
        return self.coefficients_to_points(self.coefficient_blocks(mu))

    def apply_transpose(self, y: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n_points, self.dim))
        for blk in self.blocks:
            c = (blk["u1"] * y[:, None]).T @ blk["u_rest"]
            out[:, blk["a"]] += ((blk["v_rest"] @ c.T) * blk["v1"]).sum(axis=1)
        return out.reshape(-1)

    def product_diagonals(self, chunk: int = 256):
        """Row and column sum-of-squares of the (dense) product, streamed.

        Needed exactly once, for the sampling-density regularization
        diagonal; the product itself is discarded chunk by chunk.
        """
        m, dim = self.n_points, self.dim
        rows_sq = np.zeros(m)
        cols_sq = np.zeros((m, dim))
        for start in range(0, m, chunk):
            sl = slice(start, min(start + chunk, m))
            width = sl.stop - sl.start
            s = np.zeros((width, m, dim))
            for blk in self.blocks:
                k = (blk["u1"][sl] @ blk["v1"].T) * (blk["u_rest"][sl] @ blk["v_rest"].T)
                s[:, :, blk["a"]] += k
            rows_sq[sl] = (s ** 2).sum(axis=(1, 2))
            cols_sq += (s ** 2).sum(axis=0)
        return rows_sq, cols_sq.reshape(-1)


def build_homogeneous(kernels: list, points: np.ndarray) -> np.ndarray:
    """Dense homogeneous block: one row per kernel, columns (point, component)."""
    m, dim = points.shape
    h = np.empty((len(kernels), m * dim))
    for r, kern in enumerate(kernels):
        h[r] = curl_field(kern, points).reshape(-1)
    return h


@dataclass
class ConstraintSystem:
    """The stacked system: nonhomogeneous rows equal one half at every input
    point, homogeneous rows equal zero; ridge diagonals follow the local
    column/row energies so regularization adapts to sampling density."""

    operator: PointOperator
    homogeneous: np.ndarray
    rhs: np.ndarray
    gram_diag_rows: np.ndarray
    gram_diag_cols: np.ndarray
    gamma_sq_rows: np.ndarray
    gamma_sq_cols: np.ndarray
    alpha: float

    @property
    def n_points(self) -> int:
        return self.operator.n_points

    @property
    def n_rows(self) -> int:
        return self.operator.n_points + len(self.homogeneous)

    @property
    def n_cols(self) -> int:
        return self.operator.n_points * self.operator.dim

    def nonhomogeneous_values(self, mu: np.ndarray) -> np.ndarray:
        return self.operator.apply(mu)

    def apply_B(self, mu: np.ndarray) -> np.ndarray:
        top = self.operator.apply(mu)
        if len(self.homogeneous) == 0:
            return top
        return np.concatenate([top, self.homogeneous @ mu])

    def apply_BT(self, y: np.ndarray) -> np.ndarray:
        m = self.operator.n_points
        out = self.operator.apply_transpose(y[:m])
        if len(self.homogeneous):
            out = out + self.homogeneous.T @ y[m:]
        return out


def assemble(cloud: NormalizedCloud, basis_set: BasisSet, family: MollifiedFamily,
             kernels: list, alpha: float = 2.0,
             reg_scale: float | None = None) -> ConstraintSystem:
    """Build the factored system plus regularization diagonals.

    reg_scale multiplies alpha * diag(gram); None selects DEFAULT_REG_SCALE.
    Passing reg_scale = 10 * M gives a ridge so strong the data term is
    swamped and the solution degenerates toward a matched filter; exposed
    for comparison runs only.
    """
    if cloud.size == 0:
        raise ValueError("empty cloud")
    op = PointOperator(family, basis_set, cloud.points)
    h = (build_homogeneous(kernels, cloud.points) if kernels
         else np.zeros((0, cloud.size * cloud.dim)))
    rows_sq, cols_sq = op.product_diagonals()
    gram_rows = np.concatenate([rows_sq, (h ** 2).sum(axis=1)])
    gram_cols = cols_sq + (h ** 2).sum(axis=0)
    scale = DEFAULT_REG_SCALE if reg_scale is None else reg_scale
    rhs = np.concatenate([np.full(cloud.size, 0.5), np.zeros(len(h))])
    return ConstraintSystem(
        operator=op,
        homogeneous=h,
        rhs=rhs,
        gram_diag_rows=gram_rows,
        gram_diag_cols=gram_cols,
        gamma_sq_rows=alpha * scale * gram_rows,
        gamma_sq_cols=alpha * scale * gram_cols,
        alpha=alpha,
    )
