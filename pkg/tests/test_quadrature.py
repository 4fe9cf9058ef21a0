"""Checks of the banded cell-exact quadrature engine.

Oracles here are independent of the band construction: closed forms for
step profiles, brute-force Riemann sums on sub-sampled step functions,
finite differences for gradients, and exact row-sum identities.
"""

import numpy as np
import pytest

from minfront.grids import Grid
from minfront.kernels import (
    box_kernel,
    bump_kernel,
    triangle_kernel,
    truncated_gaussian_kernel,
    w_one_component,
    w_two_component,
)
from minfront.quadrature import abs_moment_sum, discretization, pair_sum

from conftest import random_front, step_profile

KERNELS = [box_kernel(), triangle_kernel(), truncated_gaussian_kernel(), bump_kernel()]


def brute_force_quadratic(values, a, b, grid, kernel, sub=12):
    """Riemann midpoint double sum over the sub-sampled step function."""
    h = grid.h
    pad = int(np.ceil(kernel.range_ / h)) + 2
    cells = np.concatenate((np.full(pad, a), values[:-1], np.full(pad, b)))
    hs = h / sub
    fine = np.repeat(cells, sub)
    x = (np.arange(fine.size) + 0.5) * hs
    total = 0.0
    reach = int(np.ceil(kernel.range_ / hs)) + 1
    for d in range(-reach, reach + 1):
        lo, hi = max(0, d), min(fine.size, fine.size + d)
        diff = fine[lo:hi] - fine[lo - d : hi - d]
        # exact kernel mass per offset slab avoids sampling bias at jumps
        w = float(kernel.mass_between((d - 0.5) * hs, (d + 0.5) * hs))
        total += w * float(diff @ diff) * hs
    return total


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.shape)
def test_quadratic_row_sums(kernel):
    g = Grid(-3.0, 3.0, 257)
    disc = discretization(kernel, g)
    nc = g.n - 1
    cl = disc.left_closure_sym(nc)
    full = np.concatenate((disc.band_sym[::-1], disc.band_sym[1:]))
    row = np.convolve(np.ones(nc), full, mode="same") + cl + cl[::-1]
    np.testing.assert_allclose(row, 2 * g.h * kernel.total_mass, rtol=1e-12)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.shape)
def test_quadratic_energy_step_closed_form(kernel):
    g = Grid(-4.0, 4.0, 513)  # odd n puts a node exactly at 0
    p = step_profile(g, -1.0, 1.0)
    disc = discretization(kernel, g)
    got = disc.quadratic_energy(p.values, -1.0, 1.0)
    w0 = float(w_one_component(kernel)(0.0))
    assert got == pytest.approx(4.0 * w0, rel=1e-12)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.shape)
def test_quadratic_energy_vs_brute_force(kernel, rng):
    g = Grid(-3.0, 3.0, 193)
    p = random_front(g, 0.0, 1.0, rng, width_range=(0.2, 0.5))
    disc = discretization(kernel, g)
    got = disc.quadratic_energy(p.values, 0.0, 1.0)
    ref = brute_force_quadratic(p.values, 0.0, 1.0, g, kernel, sub=16)
    assert got == pytest.approx(ref, rel=2e-4)


def test_quadratic_energy_constant_zero():
    g = Grid(-2.0, 2.0, 65)
    disc = discretization(box_kernel(), g)
    assert disc.quadratic_energy(np.full(g.n, 0.7), 0.7, 0.7) == 0.0


def test_quadratic_energy_translation_invariance(rng):
    g = Grid(-4.0, 4.0, 1025)
    k = triangle_kernel()
    p = random_front(g, -1.0, 1.0, rng)
    disc = discretization(k, g)
    e0 = disc.quadratic_energy(p.values, -1.0, 1.0)
    shifted = np.empty_like(p.values)
    shifted[:5] = p.values[0]
    shifted[5:] = p.values[:-5]
    e1 = disc.quadratic_energy(shifted, -1.0, 1.0)
    assert abs(e1 - e0) < 1e-9 * max(1.0, abs(e0))


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.shape)
def test_quadratic_gradient_matches_finite_differences(kernel, rng):
    g = Grid(-2.0, 2.0, 49)
    p = random_front(g, 0.0, 1.0, rng, width_range=(0.3, 0.6))
    disc = discretization(kernel, g)
    grad = disc.quadratic_gradient(p.values, 0.0, 1.0)
    eps = 1e-6
    for k_idx in [0, 1, 10, 24, 40, 47, 48]:
        v = p.values.copy()
        v[k_idx] += eps
        ep = disc.quadratic_energy(v, 0.0, 1.0)
        v[k_idx] -= 2 * eps
        em = disc.quadratic_energy(v, 0.0, 1.0)
        fd = (ep - em) / (2 * eps)
        assert grad[k_idx] == pytest.approx(fd, rel=1e-6, abs=1e-10)


# ----------------------------------------------------------------------
# node convolution


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.shape)
def test_node_convolution_constant(kernel):
    g = Grid(-3.0, 3.0, 129)
    disc = discretization(kernel, g)
    out = disc.node_convolution(np.full(g.n, 0.4), (0.4, 0.4))
    np.testing.assert_allclose(out, 0.4 * kernel.total_mass, rtol=1e-12)


@pytest.mark.parametrize("kernel", KERNELS, ids=lambda k: k.shape)
def test_node_convolution_step_closed_form(kernel):
    g = Grid(-3.0, 3.0, 241)  # node at 0
    a, b = 0.2, 0.9
    p = step_profile(g, a, b)
    disc = discretization(kernel, g)
    got = disc.node_convolution(p.values, (a, b))
    # (J * m)(x) = a*jhat + (b - a) * ∫_{-inf}^{x} J
    expected = a * kernel.total_mass + (b - a) * np.asarray(
        kernel.mass_between(-np.inf, g.x)
    )
    np.testing.assert_allclose(got, expected, atol=1e-12)


# ----------------------------------------------------------------------
# bilinear excess


def test_bilinear_excess_constant_pair_zero():
    g = Grid(-2.0, 2.0, 65)
    disc = discretization(box_kernel(), g)
    rp, rm = 0.33, 0.01
    m = np.full(g.n, rp)
    n = np.full(g.n, rm)
    assert disc.bilinear_excess(m, (rp, rp), n, (rm, rm)) == pytest.approx(0.0, abs=1e-15)


def test_bilinear_excess_step_pair_closed_form():
    # increasing/decreasing unit steps against the box kernel: the excess
    # equals m_beta^2 for asymptotes -/+ 1 (hand integration)
    g = Grid(-4.0, 4.0, 1025)
    disc = discretization(box_kernel(), g)
    m = step_profile(g, -1.0, 1.0).values
    n = step_profile(g, 1.0, -1.0).values
    got = disc.bilinear_excess(m, (-1.0, 1.0), n, (1.0, -1.0))
    assert got == pytest.approx(1.0, rel=1e-12)


def test_bilinear_excess_translation_invariance(rng):
    g = Grid(-4.0, 4.0, 513)
    disc = discretization(triangle_kernel(), g)
    m = random_front(g, 0.1, 0.4, rng).values
    n = random_front(g, 0.4, 0.1, rng).values
    e0 = disc.bilinear_excess(m, (0.1, 0.4), n, (0.4, 0.1))
    sm, sn = np.empty_like(m), np.empty_like(n)
    sm[:7], sm[7:] = m[0], m[:-7]
    sn[:7], sn[7:] = n[0], n[:-7]
    e1 = disc.bilinear_excess(sm, (0.1, 0.4), sn, (0.4, 0.1))
    assert e1 == pytest.approx(e0, abs=1e-10)


def test_bilinear_cell_row_is_gradient(rng):
    g = Grid(-2.0, 2.0, 49)
    disc = discretization(box_kernel(), g)
    m = random_front(g, 0.1, 0.4, rng, width_range=(0.3, 0.6)).values
    n = random_front(g, 0.4, 0.1, rng, width_range=(0.3, 0.6)).values
    row = disc.bilinear_cell_row(n, (0.4, 0.1))
    eps = 1e-6
    for k_idx in [0, 5, 20, 40, 47]:
        v = m.copy()
        v[k_idx] += eps
        ep = disc.bilinear_excess(v, (0.1, 0.4), n, (0.4, 0.1))
        v[k_idx] -= 2 * eps
        em = disc.bilinear_excess(v, (0.1, 0.4), n, (0.4, 0.1))
        fd = (ep - em) / (2 * eps)
        assert g.h * row[k_idx] == pytest.approx(fd, rel=1e-6, abs=1e-10)


# ----------------------------------------------------------------------
# measure-side sums


def test_abs_moment_sum_matches_brute_force(rng):
    x = np.sort(rng.uniform(-2, 2, 200))
    w = rng.uniform(0, 1, 200)
    got = abs_moment_sum(x, w)
    ref = float(w @ np.abs(x[:, None] - x[None, :]) @ w)
    assert got == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("variant", ["one", "two"])
def test_pair_sum_matches_brute_force(variant, rng):
    x = np.sort(rng.uniform(-2, 2, 300))
    w = rng.uniform(0, 1, 300)
    w /= w.sum()
    k = triangle_kernel()
    wp = w_one_component(k) if variant == "one" else w_two_component(k)
    got = pair_sum(wp, x, w, chunk=64)
    ref = float(w @ wp(x[:, None] - x[None, :]) @ w)
    assert got == pytest.approx(ref, rel=1e-10)


def test_pair_sum_cross_sets(rng):
    x1 = np.sort(rng.uniform(-2, 2, 150))
    w1 = rng.uniform(0, 1, 150)
    x2 = np.sort(rng.uniform(-2, 2, 130))
    w2 = rng.uniform(0, 1, 130)
    wp = w_two_component(box_kernel())
    got = pair_sum(wp, x1, w1, x2, w2, chunk=41)
    ref = float(w1 @ wp(x1[:, None] - x2[None, :]) @ w2)
    assert got == pytest.approx(ref, rel=1e-10)
