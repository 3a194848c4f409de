"""End-to-end driver: ingest, orient, reconstruct, write artifacts."""

import json
import os
import time
from dataclasses import dataclass, asdict, field

import numpy as np

from . import io as uio
from .assembly import normalize, enumerate_bases, assemble
from .fields import sample_kernels
from .isosurface import (indicator_coefficients, compute_isovalue, evaluate_field,
                         evaluate_grid, marching_cubes, marching_squares)
from .mollify import MollifiedFamily
from .orientation import extract_normals, pgp90
from .solver import solve, calibrate_scale
from .wavelets import build_filter, cascade

REPORT_SCHEMA = 1


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    depth: int = 3                      # wavelet layers 0..depth-1 over the scaling layer
    epsilon: float | None = None        # smoothing width; None -> 0.5 * 2^-depth
    alpha: float = 2.0
    nh: str = "2M"                      # homogeneous constraint count, absolute or k*M
    seed: int = 0
    grid_depth: int = 6
    mode: str = "3d"
    tol: float = 1e-7
    max_iter: int = 2000
    kernel_family: str = "trig-sqrt"
    force_path: str | None = None
    reg_scale: float = 0.05             # ridge = alpha * reg_scale * diag(gram)
    grid_resolution: int = 1024
    margin: float = 0.1
    output_dir: str = "."

    def resolved_epsilon(self) -> float:
        return 0.5 * 2.0 ** (-self.depth) if self.epsilon is None else self.epsilon

    def resolved_nh(self, n_points: int) -> int:
        spec = str(self.nh).strip()
        if spec.lower().endswith("m"):
            return int(round(float(spec[:-1] or "1") * n_points))
        return int(spec)


def perturb_points(points: np.ndarray, fraction: float, seed: int = 0) -> np.ndarray:
    """Isotropic Gaussian noise with sigma = fraction * bounding diagonal."""
    points = np.asarray(points, dtype=float)
    diag = float(np.linalg.norm(points.max(axis=0) - points.min(axis=0)))
    rng = np.random.default_rng(seed)
    return points + rng.normal(size=points.shape) * (fraction * diag)


def _stage(timings, name, fn):
    t0 = time.perf_counter()
    try:
        out = fn()
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc
    timings[name] = time.perf_counter() - t0
    return out


def _atomic_write(path, write_fn):
    tmp = f"{path}.tmp"
    write_fn(tmp)
    os.replace(tmp, path)


def run_pipeline(config: PipelineConfig, input_path: str, extract_surface: bool = True,
                 points: np.ndarray | None = None, truth_normals: np.ndarray | None = None):
    """Run the full orientation + reconstruction pipeline.

    Returns the report dict; artifacts land in config.output_dir. ``points``
    may be passed directly (bypassing the file), mainly for tests.
    """
    t_total = time.perf_counter()
    timings: dict[str, float] = {}
    dim = 2 if config.mode == "2d" else 3

    def load():
        if points is not None:
            return np.asarray(points, dtype=float), truth_normals
        return uio.load_points(input_path)

    raw, truth = _stage(timings, "load", load)
    if dim == 2 and raw.shape[1] == 3:
        raw = raw[:, :2]
        if truth is not None:
            truth = truth[:, :2]
            norms = np.linalg.norm(truth, axis=1, keepdims=True)
            truth = truth / np.where(norms == 0, 1.0, norms)

    cloud = _stage(timings, "normalize", lambda: normalize(raw, margin=config.margin))
    eps = config.resolved_epsilon()

    def build_tables():
        table = cascade(build_filter(), config.grid_resolution)
        table.level_max = config.depth
        family = MollifiedFamily(table, eps)
        for j in range(config.depth + 1):
            family.level(j)  # one kernel + convolution per dyadic width
        return family

    family = _stage(timings, "mollify", build_tables)
    basis_set = _stage(timings, "enumerate",
                       lambda: enumerate_bases(config.depth, cloud, eps))
    n_h = config.resolved_nh(cloud.size)
    kernels = _stage(timings, "kernels", lambda: sample_kernels(
        n_h, config.seed, box=(np.zeros(dim), np.ones(dim)),
        variant=config.kernel_family, dim=dim))
    system = _stage(timings, "assemble", lambda: assemble(
        cloud, basis_set, family, kernels, alpha=config.alpha,
        reg_scale=config.reg_scale))
    field, solve_report = _stage(timings, "solve", lambda: solve(
        system, n_h, dim, tol=config.tol, max_iter=config.max_iter,
        force_path=config.force_path))

    def calibrate():
        scale = calibrate_scale(system, field)
        field.mu *= scale
        coeffs = indicator_coefficients(system.operator, field.flat)
        v_iso = compute_isovalue(system.operator, coeffs)
        corners = np.stack(np.meshgrid(*[(0.0, 1.0)] * dim, indexing="ij"),
                           axis=-1).reshape(-1, dim)
        corner_mean = float(evaluate_field(family, basis_set, coeffs, corners).mean())
        flipped = corner_mean > v_iso  # exterior must sit below the surface level
        if flipped:
            field.mu *= -1.0
            coeffs = [-c for c in coeffs]
            v_iso = -v_iso
            corner_mean = -corner_mean
        return scale, coeffs, v_iso, corner_mean, flipped

    scale, coeffs, v_iso, corner_mean, flipped = _stage(timings, "calibrate", calibrate)
    oriented = _stage(timings, "orient", lambda: extract_normals(field, cloud))

    mesh = None
    polylines = None
    if extract_surface:
        grid = _stage(timings, "evaluate_grid", lambda: evaluate_grid(
            family, basis_set, coeffs, config.grid_depth, v_iso))
        if dim == 3:
            mesh = _stage(timings, "marching_cubes", lambda: marching_cubes(grid, cloud))
        else:
            polylines = _stage(timings, "marching_squares",
                               lambda: marching_squares(grid, cloud))

    report = {
        "schema": REPORT_SCHEMA,
        "config": asdict(config),
        "counts": {"points": cloud.size, "bases": basis_set.size, "nh": n_h,
                   "degenerate_rows": int(oriented.degenerate.sum())},
        "solve": asdict(solve_report),
        "v_iso": v_iso,
        "corner_mean": corner_mean,
        "scale_calibration": scale,
        "sign_flipped": bool(flipped),
    }
    if truth is not None:
        report["pgp90"] = pgp90(oriented, truth)
    if mesh is not None:
        report["mesh"] = {"vertices": len(mesh.vertices), "triangles": len(mesh.triangles)}
    if polylines is not None:
        report["contours"] = {"count": len(polylines),
                              "vertices": int(sum(len(p) for p in polylines))}

    def write():
        os.makedirs(config.output_dir, exist_ok=True)
        stem = os.path.splitext(os.path.basename(str(input_path)))[0] or "cloud"
        outputs = {}

        def put(key, name, fn):
            path = os.path.join(config.output_dir, name)
            _atomic_write(path, fn)
            outputs[key] = path

        put("oriented_ply", f"{stem}_oriented.ply",
            lambda p: uio.save_oriented_ply(p, oriented.points, oriented.normals,
                                            oriented.areas, oriented.degenerate))
        if mesh is not None:
            put("mesh_obj", f"{stem}_mesh.obj", lambda p: uio.save_mesh_obj(p, mesh))
            put("mesh_ply", f"{stem}_mesh.ply", lambda p: uio.save_mesh_ply(p, mesh))
        if polylines is not None:
            put("contours_svg", f"{stem}_contours.svg",
                lambda p: uio.save_polylines_svg(p, polylines))
            put("contours_csv", f"{stem}_contours.csv",
                lambda p: uio.save_polylines_csv(p, polylines))
        return outputs

    outputs = _stage(timings, "write", write)
    report["timings"] = timings
    report["total_wall_time"] = time.perf_counter() - t_total
    report["outputs"] = outputs
    report_path = os.path.join(config.output_dir, "report.json")
    _atomic_write(report_path, lambda p: _dump_json(p, report))
    report["outputs"]["report"] = report_path
    return report


def _dump_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=float)
        fh.write("\n")
