"""Orientation and watertight surface reconstruction for unoriented point clouds.

The reconstructed region's smoothed indicator function is expanded in a
truncated Daubechies-4 tensor-product basis. Each expansion coefficient is a
surface integral over the unknown boundary, discretized over the input points
with per-point (normal x area) vectors as unknowns. Divergence-free test
fields supply extra homogeneous equations, and the regularized system is
solved matrix-free by conjugate gradients. Normals fall out of the solution
vector; the surface is extracted from the indicator field by marching cubes
(or marching squares in planar mode).
"""

from .wavelets import QmfFilter, WaveletTable, build_filter, cascade, evaluate
from .mollify import MollifierKernel, MollifiedTable, MollifiedFamily, build_kernel, mollify_base
from .assembly import NormalizedCloud, BasisIndex, BasisSet, normalize, enumerate_bases, assemble
from .solver import SolveReport, SurfaceElementField, solve_least_squares, solve_minimal_norm
from .pipeline import PipelineConfig, run_pipeline


__all__ = [
    "QmfFilter", "WaveletTable", "build_filter", "cascade", "evaluate",
    "MollifierKernel", "MollifiedTable", "MollifiedFamily", "build_kernel", "mollify_base",
    "NormalizedCloud", "BasisIndex", "BasisSet", "normalize", "enumerate_bases", "assemble",
    "SolveReport", "SurfaceElementField", "solve_least_squares", "solve_minimal_norm",
    "PipelineConfig", "run_pipeline",
    
]
