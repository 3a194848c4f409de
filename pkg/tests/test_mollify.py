import numpy as np
import pytest

from uwsr.mollify import (MollifiedFamily, build_kernel, evaluate_mollified,
                          mollify_base)
from uwsr.wavelets import cumulative_integral, evaluate


def test_kernel_unit_mass():
    k = build_kernel(1.0, 1024)
    assert abs(np.trapezoid(k.values, dx=1.0 / 1024) - 1.0) <= 1e-10


def test_kernel_compact_support():
    k = build_kernel(1.0, 1024)
    assert k(1.0) == 0.0
    assert k(-1.0) == 0.0
    assert k(0.999) > 0.0
    assert k(1.2) == 0.0


def test_kernel_scaling_rule():
    k1 = build_kernel(1.0, 1024)
    k05 = build_kernel(0.5, 1024)
    assert abs(k05(0.0) - 2.0 * k1(0.0)) <= 1e-6 * k1(0.0)


def test_kernel_even_and_nonnegative():
    k = build_kernel(0.25, 1024)
    assert np.all(k.values >= 0.0)
    np.testing.assert_array_equal(k.values, k.values[::-1])


def test_kernel_rejects_nonpositive_width():
    with pytest.raises(ValueError):
        build_kernel(0.0)
    with pytest.raises(ValueError):
        build_kernel(-0.1)


def test_mollified_supports(table):
    eps = 1.0 / 16
    mt = mollify_base(table, build_kernel(eps, table.grid_resolution))
    assert abs(mt.sample("psi_bar", -eps - 1e-9)) == 0.0
    assert abs(mt.sample("psi_bar", 7.0 + eps + 1e-9)) == 0.0
    assert mt.sample("phi_bar", 0.5) > 0.0


def test_mollified_masses(table):
    mt = mollify_base(table, build_kernel(1.0 / 16, table.grid_resolution))
    step = table.step
    assert abs(np.trapezoid(mt.phi_bar, dx=step) - 1.0) <= 1e-8
    assert abs(np.trapezoid(mt.psi_bar, dx=step)) <= 1e-8


def test_small_width_limit(table):
    # eps -> 0 approaches the unconvolved table
    mt = mollify_base(table, build_kernel(1.0 / 256, table.grid_resolution))
    off = mt.offset
    diff = np.max(np.abs(mt.psi_bar[off:off + len(table.psi_values)] - table.psi_values))
    assert diff < 0.05 * np.max(np.abs(table.psi_values))


def test_zero_width_short_circuits(table):
    fam = MollifiedFamily(table, 0.0)
    x = np.linspace(-0.5, 7.5, 101)
    np.testing.assert_array_equal(
        evaluate_mollified(fam, "psi_bar", 2, 1, x), evaluate(table, "psi", 2, 1, x))
    np.testing.assert_array_equal(
        evaluate_mollified(fam, "Phi_bar", 1, 0, x), evaluate(table, "Phi", 1, 0, x))


def test_level0_identity(family):
    mt = family.level(0)
    x = np.linspace(-0.2, 7.2, 211)
    np.testing.assert_allclose(evaluate_mollified(family, "psi_bar", 0, 0, x),
                               mt.sample("psi_bar", x), atol=0.0)


def test_rescaling_level2(family):
    # psi-bar at level 2, translation 3 equals 2 * psibar_{4 eps}(4x - 3)
    mt2 = family.level(2)
    x = np.linspace(0.0, 1.0, 97)
    lhs = evaluate_mollified(family, "psi_bar", 2, 3, x)
    rhs = 2.0 * mt2.sample("psi_bar", 4.0 * x - 3.0)
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def _direct_convolution(table, eps, j, k, xs):
    """Quadrature oracle: int K_eps(y) psi_{j,k}(x - y) dy on the kernel grid."""
    kern = build_kernel(eps, table.grid_resolution)
    m = kern.offset
    ys = np.arange(-m, m + 1) / table.grid_resolution
    out = np.empty(len(xs))
    for i, x in enumerate(xs):
        vals = evaluate(table, "psi", j, k, x - ys)
        out[i] = np.trapezoid(kern.values * vals, dx=table.step)
    return out


def test_rescaling_identity_vs_direct_convolution(table, family):
    rng = np.random.default_rng(1)
    for j in range(4):
        ks = rng.integers(-3, 4, size=6)
        xs = rng.uniform(-0.5, 1.5, size=6)
        for k, x in zip(ks, xs):
            lhs = evaluate_mollified(family, "psi_bar", j, int(k), x)
            rhs = _direct_convolution(table, family.eps, j, int(k), np.array([x]))[0]
            assert abs(lhs - rhs) <= 1e-6


def test_antiderivative_vs_quadrature(table, family):
    # Psi-bar at level 1 equals the cumulative trapezoid of the level-1
    # psi-bar; oracle nodes on the dyadic grid so quadrature is exact
    j, k = 1, 0
    step = 1.0 / (table.grid_resolution * 2 ** j)
    xs = np.arange(-0.5, 4.5 + step, step)
    psib = evaluate_mollified(family, "psi_bar", j, k, xs)
    anti = cumulative_integral(psib, step)
    lhs = evaluate_mollified(family, "Psi_bar", j, k, xs)
    assert np.max(np.abs(lhs - anti)) <= 1e-8


def test_antiderivative_derivative_consistency(family):
    mt = family.level(0)
    step = 1.0 / mt.resolution
    dnum = np.gradient(mt.Psi_bar, step)
    assert np.max(np.abs(dnum[2:-2] - mt.psi_bar[2:-2])) <= 1e-4


def test_mass_preservation_per_level(family):
    # integral of phi-bar_{eps,j,k} is 2^{-j/2}
    xs = np.linspace(-1.0, 9.0, 40001)
    for j in range(3):
        vals = evaluate_mollified(family, "phi_bar", j, 0, xs)
        mass = np.trapezoid(vals, dx=xs[1] - xs[0])
        assert abs(mass - 2.0 ** (-j / 2)) <= 1e-7


def test_width_cap(table):
    fam = MollifiedFamily(table, 0.3)
    with pytest.raises(ValueError):
        fam.level(2)  # width 1.2 exceeds base-level coordinates
