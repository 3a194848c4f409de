"""Mollification of the tabulated bases, one 1-D convolution per level.

The classical bump K(x) = c * exp(1/(x^2-1)) on (-1,1) is tabulated on the
same dyadic grid as the basis functions and convolved once per kernel width;
a multiscale translate of width eps equals a rescaled translate of the
base-level function convolved at width 2^j eps, so D_max+1 convolutions
cover every basis function.
"""

from dataclasses import dataclass, field

import numpy as np

from .wavelets import WaveletTable, sample_table, cumulative_integral


@dataclass
class MollifierKernel:
    """Width-eps bump, tabulated on [-eps, eps]; entry i sits at (i-offset)/resolution."""

    width: float
    normalization: float
    values: np.ndarray
    resolution: int

    @property
    def offset(self) -> int:
        return (len(self.values) - 1) // 2

    def __call__(self, x):
        return sample_table(self.values, self.offset, self.resolution, x)


def build_kernel(eps: float, resolution: int = 1024) -> MollifierKernel:
    """K_eps(x) = (1/eps) K(x/eps), renormalized so the grid trapezoid mass is 1.

    The discrete normalization makes convolution preserve tabulated masses
    exactly, which the downstream invariants (unit phi-bar mass, zero
    psi-bar mass) rely on.
    """
    if eps <= 0:
        raise ValueError("mollifier width must be positive")
    m = int(np.ceil(eps * resolution))
    x = np.arange(-m, m + 1) / resolution
    u = x / eps
    vals = np.zeros_like(x)
    inside = np.abs(u) < 1.0
    with np.errstate(under="ignore"):
        vals[inside] = np.exp(1.0 / (u[inside] ** 2 - 1.0))
    mass = np.trapezoid(vals, dx=1.0 / resolution)
    vals /= mass
    return MollifierKernel(width=eps, normalization=1.0 / mass, values=vals,
                           resolution=resolution)


@dataclass
class MollifiedTable:
    """Convolved base-level functions on [-width, 7+width] plus antiderivatives."""

    width: float
    phi_bar: np.ndarray
    psi_bar: np.ndarray
    Psi_bar: np.ndarray
    Phi_bar: np.ndarray
    offset: int
    resolution: int
    source: WaveletTable

    def sample(self, kind: str, t):
        values = getattr(self, kind)
        right = self.Phi_bar[-1] if kind == "Phi_bar" else 0.0
        return sample_table(values, self.offset, self.resolution, t, right=right)


def mollify_base(table: WaveletTable, kernel: MollifierKernel) -> MollifiedTable:
    """Direct-quadrature convolution of phi and psi with the kernel."""
    if kernel.resolution != table.grid_resolution:
        raise ValueError("kernel and basis tables must share the grid resolution")
    step = table.step
    phi_bar = np.convolve(table.phi_values, kernel.values) * step
    psi_bar = np.convolve(table.psi_values, kernel.values) * step
    return MollifiedTable(
        width=kernel.width,
        phi_bar=phi_bar,
        psi_bar=psi_bar,
        Psi_bar=cumulative_integral(psi_bar, step),
        Phi_bar=cumulative_integral(phi_bar, step),
        offset=kernel.offset,
        resolution=table.grid_resolution,
        source=table,
    )


def _identity_table(table: WaveletTable) -> MollifiedTable:
    return MollifiedTable(
        width=0.0,
        phi_bar=table.phi_values,
        psi_bar=table.psi_values,
        Psi_bar=table.psi_antiderivative,
        Phi_bar=table.phi_antiderivative,
        offset=0,
        resolution=table.grid_resolution,
        source=table,
    )


class MollifiedFamily:
    """Per-level mollified tables: level j holds the width 2^j * eps convolution.

    eps = 0 short-circuits every level to the unmollified table.
    """

    def __init__(self, table: WaveletTable, eps: float):
        if eps < 0:
            raise ValueError("mollifier width must be nonnegative")
        self.table = table
        self.eps = eps
        self._levels: dict[int, MollifiedTable] = {}

    def level(self, j: int) -> MollifiedTable:
        if j not in self._levels:
            if self.eps == 0.0:
                self._levels[j] = _identity_table(self.table)
            else:
                width = np.ldexp(self.eps, j)
                if width >= 1.0:
                    raise ValueError(
                        f"mollifier width {width} at level {j} exceeds base-level coordinates")
                kernel = build_kernel(width, self.table.grid_resolution)
                self._levels[j] = mollify_base(self.table, kernel)
        return self._levels[j]


_POINTWISE = {"phi_bar", "psi_bar"}


def evaluate_mollified(family: MollifiedFamily, kind: str, j: int, k, x):
    """Multiscale mollified evaluation via the rescaling identity.

    kind 'phi_bar'/'psi_bar': 2^{j/2} fbar_{2^j eps}(2^j x - k); kind
    'Psi_bar'/'Phi_bar': 2^{-j/2} Fbar_{2^j eps}(2^j x - k).
    """
    level = family.level(j)
    t = np.ldexp(np.asarray(x, dtype=float), j) - k
    scale = np.ldexp(1.0, j) ** 0.5
    if kind in _POINTWISE:
        return scale * level.sample(kind, t)
    if kind in ("Psi_bar", "Phi_bar"):
        return level.sample(kind, t) / scale
    raise ValueError(f"unknown kind {kind!r}")
