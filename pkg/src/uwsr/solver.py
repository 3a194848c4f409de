"""Conjugate-gradient solution of the regularized constraint system.

Two regimes: with fewer homogeneous rows than the unknown surplus the
system is underdetermined and the minimal-norm solution is found through
the row-space substitution mu = B^T xi; otherwise the ridge least-squares
normal equations are solved directly. Neither Gram matrix is ever formed.
"""

import time
from dataclasses import dataclass

import numpy as np


class SolverBreakdown(RuntimeError):
    """CG encountered nonpositive curvature (numerically indefinite operator)."""

    def __init__(self, iteration: int, curvature: float):
        super().__init__(
            f"CG breakdown at iteration {iteration}: curvature {curvature:.3e} <= 0")
        self.iteration = iteration
        self.curvature = curvature


@dataclass
class SolveReport:
    iterations: int
    relative_residual: float
    path: str
    wall_time: float
    converged: bool


@dataclass
class SurfaceElementField:
    """Per-point (normal x area) vectors, the system unknowns."""

    mu: np.ndarray  # (M, dim)

    @property
    def flat(self) -> np.ndarray:
        return self.mu.reshape(-1)

    def row_norms(self) -> np.ndarray:
        return np.linalg.norm(self.mu, axis=1)


class DenseSystem:
    """Explicit-matrix adapter with the same surface as ConstraintSystem;
    used by oracle tests and tiny experiments."""

    def __init__(self, b: np.ndarray, rhs: np.ndarray, gamma_sq_rows=None,
                 gamma_sq_cols=None, n_points=None, dim=1):
        self.b = np.asarray(b, dtype=float)
        self.rhs = np.asarray(rhs, dtype=float)
        self.n_rows, self.n_cols = self.b.shape
        self.gamma_sq_rows = (np.zeros(self.n_rows) if gamma_sq_rows is None
                              else np.asarray(gamma_sq_rows, dtype=float))
        self.gamma_sq_cols = (np.zeros(self.n_cols) if gamma_sq_cols is None
                              else np.asarray(gamma_sq_cols, dtype=float))
        self.gram_diag_rows = (self.b ** 2).sum(axis=1)
        self.gram_diag_cols = (self.b ** 2).sum(axis=0)
        self.n_points = self.n_rows if n_points is None else n_points
        self._dim = dim

    def apply_B(self, v):
        return self.b @ v

    def apply_BT(self, y):
        return self.b.T @ y

    def nonhomogeneous_values(self, v):
        return (self.b @ v)[:self.n_points]


def _dim(system) -> int:
    op = getattr(system, "operator", None)
    return op.dim if op is not None else getattr(system, "_dim", 1)


def _pcg(apply_op, rhs, precond_diag, tol, max_iter):
    x = np.zeros_like(rhs)
    r = rhs.copy()
    rhs_norm = np.linalg.norm(rhs)
    if rhs_norm == 0.0:
        return x, 0, 0.0, True
    z = r / precond_diag
    p = z.copy()
    rz = r @ z
    iterations = 0
    for iterations in range(1, max_iter + 1):
        ap = apply_op(p)
        curvature = p @ ap
        if curvature <= 0.0:
            raise SolverBreakdown(iterations, float(curvature))
        alpha = rz / curvature
        x += alpha * p
        r -= alpha * ap
        rel = np.linalg.norm(r) / rhs_norm
        if rel <= tol:
            return x, iterations, float(rel), True
        z = r / precond_diag
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, iterations, float(np.linalg.norm(r) / rhs_norm), False


def solve_least_squares(system, tol: float = 1e-7, max_iter: int = 2000):
    """(B^T B + Gamma^T Gamma) mu = B^T b by Jacobi-preconditioned CG."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    t0 = time.perf_counter()
    lam = system.gamma_sq_cols

    def op(v):
        return system.apply_BT(system.apply_B(v)) + lam * v

    rhs = system.apply_BT(system.rhs)
    precond = system.gram_diag_cols + lam
    precond = np.where(precond > 0, precond, 1.0)
    x, iters, rel, ok = _pcg(op, rhs, precond, tol, max_iter)
    report = SolveReport(iterations=iters, relative_residual=rel, path="least-squares",
                         wall_time=time.perf_counter() - t0, converged=ok)
    return SurfaceElementField(mu=x.reshape(-1, _dim(system))), report


def solve_minimal_norm(system, tol: float = 1e-7, max_iter: int = 2000):
    """xi solves (B B^T + Gamma^T Gamma) xi = b; mu = B^T xi."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    t0 = time.perf_counter()
    lam = system.gamma_sq_rows

    def op(xi):
        return system.apply_B(system.apply_BT(xi)) + lam * xi

    precond = system.gram_diag_rows + lam
    precond = np.where(precond > 0, precond, 1.0)
    xi, iters, rel, ok = _pcg(op, system.rhs, precond, tol, max_iter)
    x = system.apply_BT(xi)
    report = SolveReport(iterations=iters, relative_residual=rel, path="minimal-norm",
                         wall_time=time.perf_counter() - t0, converged=ok)
    return SurfaceElementField(mu=x.reshape(-1, _dim(system))), report


def select_path(n_points: int, n_homogeneous: int, dim: int = 3) -> str:
    """Underdetermined (rows < unknowns) takes the minimal-norm route."""
    return "minimal-norm" if n_points + n_homogeneous < dim * n_points else "least-squares"


def solve(system, n_homogeneous: int, dim: int, tol: float = 1e-7,
          max_iter: int = 2000, force_path: str | None = None):
    path = force_path or select_path(system.n_points, n_homogeneous, dim)
    if path in ("minimal-norm", "min-norm"):
        return solve_minimal_norm(system, tol=tol, max_iter=max_iter)
    if path in ("least-squares", "lsq"):
        return solve_least_squares(system, tol=tol, max_iter=max_iter)
    raise ValueError(f"unknown path {path!r}")


def calibrate_scale(system, field: SurfaceElementField) -> float:
    """Optimal global rescale of mu against the one-half constraints.

    Ridge regularization shrinks the solution magnitude without rotating
    it much; the level set and the normals are scale-invariant, but
    indicator values and area elements are not, so the gauge is fixed by
    least squares on the nonhomogeneous rows.
    """
    y = system.nonhomogeneous_values(field.flat)
    denom = y @ y
    if denom == 0.0:
        return 1.0
    b1 = system.rhs[:len(y)]
    return float((b1 @ y) / denom)
