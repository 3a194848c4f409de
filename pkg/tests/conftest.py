import numpy as np
import pytest

from uwsr.assembly import assemble, enumerate_bases, normalize
from uwsr.fields import sample_kernels
from uwsr.mollify import MollifiedFamily
from uwsr.solver import calibrate_scale, solve
from uwsr.wavelets import build_filter, cascade

EPS_DEFAULT = 0.5 * 2.0 ** -3


@pytest.fixture(scope="session")
def filt():
    return build_filter()


@pytest.fixture(scope="session")
def table(filt):
    return cascade(filt, 1024)


@pytest.fixture(scope="session")
def table256(filt):
    return cascade(filt, 256)


@pytest.fixture(scope="session")
def family(table):
    return MollifiedFamily(table, EPS_DEFAULT)


def run_solve(points, family, alpha=2.0, nh_mult=2.0, seed=9, dmax=3,
              force_path=None, max_iter=2000, reg_scale=0.05):
    """Shared mini-pipeline: normalize, assemble, solve, calibrate."""
    dim = points.shape[1]
    cloud = normalize(points)
    basis_set = enumerate_bases(dmax, cloud, family.eps)
    n_h = int(round(nh_mult * cloud.size))
    kernels = sample_kernels(n_h, seed, box=(np.zeros(dim), np.ones(dim)), dim=dim)
    system = assemble(cloud, basis_set, family, kernels, alpha=alpha, reg_scale=reg_scale)
    field, report = solve(system, n_h, dim, force_path=force_path, max_iter=max_iter)
    field.mu *= calibrate_scale(system, field)
    return cloud, basis_set, system, field, report


@pytest.fixture(scope="session")
def sphere_solve(family):
    """Solved unit sphere, 1000 points: (cloud, basis_set, system, field, truth)."""
    from uwsr.shapes import sphere_cloud
    pts, normals = sphere_cloud(1000, seed=5)
    cloud, basis_set, system, field, _ = run_solve(pts, family)
    return cloud, basis_set, system, field, normals
