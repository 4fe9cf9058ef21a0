import math

import numpy as np
import pytest
from scipy.integrate import quad

from minfront.errors import CoarseKernelTable, ValidationError
from minfront.kernels import (
    box_kernel,
    bump_kernel,
    load_kernel_csv,
    reduce_dimension,
    tabulated_kernel,
    triangle_kernel,
    truncated_gaussian_kernel,
    w_one_component,
    w_two_component,
)

ALL_SHAPES = [
    box_kernel(),
    triangle_kernel(),
    truncated_gaussian_kernel(),
    bump_kernel(),
    box_kernel(range_=1.5, mass=2.0),
    triangle_kernel(range_=0.7, mass=0.9),
]


@pytest.mark.parametrize("k", ALL_SHAPES, ids=lambda k: f"{k.shape}-R{k.range_:g}")
def test_mass_and_moment_against_quad(k):
    rng = np.random.default_rng(7)
    for _ in range(8):
        lo, hi = np.sort(rng.uniform(-1.5 * k.range_, 1.5 * k.range_, 2))
        kinks = [p for p in (-k.range_, 0.0, k.range_) if lo < p < hi]
        m_ref, _ = quad(lambda s: float(k(s)), lo, hi, limit=200, points=kinks)
        f_ref, _ = quad(lambda s: s * float(k(s)), lo, hi, limit=200, points=kinks)
        assert k.mass_between(lo, hi) == pytest.approx(m_ref, abs=1e-10)
        assert k.first_moment_between(lo, hi) == pytest.approx(f_ref, abs=1e-10)


@pytest.mark.parametrize("k", ALL_SHAPES, ids=lambda k: f"{k.shape}-R{k.range_:g}")
def test_total_mass_closed_form(k):
    ref, _ = quad(lambda s: float(k(s)), -k.range_, k.range_, limit=200, points=[0.0])
    assert k.total_mass == pytest.approx(ref, abs=1e-10)


def test_kernel_nonnegative_and_compact():
    k = triangle_kernel()
    s = np.linspace(-3, 3, 1001)
    v = k(s)
    assert np.all(v >= 0)
    assert np.all(v[np.abs(s) > k.range_] == 0)


def test_tabulated_round_trip():
    base = triangle_kernel()
    s = np.linspace(-1, 1, 2001)
    k = tabulated_kernel(s, base(s))
    assert k.total_mass == pytest.approx(base.total_mass, abs=1e-6)
    assert k.even and k.decreasing
    lo, hi = -0.3, 0.85
    assert k.mass_between(lo, hi) == pytest.approx(
        base.mass_between(lo, hi), abs=1e-7
    )


def test_tabulated_rejects_bad_tables(tmp_path):
    with pytest.raises(ValidationError):
        tabulated_kernel([0.0, 0.0, 1.0], [1.0, 1.0, 0.0])
    with pytest.raises(ValidationError):
        tabulated_kernel([0.0, 1.0], [1.0, -0.5])
    k = tabulated_kernel(np.linspace(-1, 1, 11), np.ones(11))
    with pytest.raises(CoarseKernelTable):
        k.require_resolution(0.01)


def test_csv_loader(tmp_path):
    path = tmp_path / "kern.csv"
    s = np.linspace(-1, 1, 501)
    j = np.clip(1 - np.abs(s), 0, None)
    lines = ["s,J"]
    lines += [f"{a:.17g},{b:.17g}" for a, b in zip(s, j)]
    path.write_text("\n".join(lines))
    k = load_kernel_csv(path)
    assert k.total_mass == pytest.approx(1.0, abs=1e-6)
    assert k(0.0) == pytest.approx(1.0)


# ----------------------------------------------------------------------
# single-species potential


def test_w_one_box_closed_form():
    w = w_one_component(box_kernel())
    u = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(w(u), (1.0 - u) ** 2 / 2.0, atol=1e-12)
    assert w.value_at_zero() == pytest.approx(0.5, abs=1e-12)
    assert w(2.0) == 0.0
    np.testing.assert_allclose(w(-u), w(u), atol=1e-14)


@pytest.mark.parametrize("k", ALL_SHAPES[:4], ids=lambda k: k.shape)
def test_w_one_second_derivative_is_symmetrized_kernel(k):
    w = w_one_component(k)
    u = np.linspace(0.05 * k.range_, 0.9 * k.range_, 40)
    d = 1e-4 * k.range_
    second = (w(u + d) - 2 * w(u) + w(u - d)) / d**2
    target = k(u) + k(-u)
    mask = target > 1e-3 * target.max()
    np.testing.assert_allclose(second[mask], target[mask], rtol=1e-5)


def test_w_one_not_convex_across_zero():
    w = w_one_component(box_kernel())
    d = 1e-3
    assert w(d) + w(-d) - 2 * w(0.0) < 0


def test_w_one_vanishes_at_infinity():
    for k in ALL_SHAPES[:4]:
        w = w_one_component(k)
        assert w(k.range_ + 1.0) == 0.0


# ----------------------------------------------------------------------
# two-species potential


def test_w_two_box_closed_form():
    w = w_two_component(box_kernel())
    x = np.linspace(0.0, 1.0, 101)
    np.testing.assert_allclose(w(x), x * x / 4.0, atol=1e-12)
    assert w.w_offset == pytest.approx(-0.25, abs=1e-12)
    assert w.slope_at_infinity == pytest.approx(0.5, abs=1e-14)


@pytest.mark.parametrize("k", ALL_SHAPES[:4], ids=lambda k: k.shape)
def test_w_two_structure(k):
    w = w_two_component(k)
    assert w(0.0) == 0.0
    # linear tail identity, exact beyond the range
    x = np.linspace(k.range_, 4 * k.range_, 200)
    np.testing.assert_allclose(
        w(x), w.w_offset + 0.5 * k.total_mass * x, atol=1e-10
    )
    # convex everywhere: non-negative second differences on a wide sample
    x = np.linspace(-5 * k.range_, 5 * k.range_, 2001)
    v = w(x)
    assert np.min(v[2:] - 2 * v[1:-1] + v[:-2]) >= -1e-12
    # W'' = kernel inside the support
    u = np.linspace(0.03 * k.range_, 0.9 * k.range_, 30)
    d = 1e-4 * k.range_
    second = (w(u + d) - 2 * w(u) + w(u - d)) / d**2
    target = k(u)
    mask = target > 1e-3 * target.max()
    np.testing.assert_allclose(second[mask], target[mask], rtol=1e-5)


def test_w_two_requires_even_kernel():
    s = np.array([-1.0, 0.0, 1.0])
    k = tabulated_kernel(s, np.array([0.0, 1.0, 0.5]))
    assert not k.even
    with pytest.raises(ValidationError):
        w_two_component(k)


# ----------------------------------------------------------------------
# dimensional reduction


def test_reduce_dimension_chord_length():
    u = box_kernel(range_=1.0, mass=1.0)  # height 1/2 on [-1, 1]
    jbar = reduce_dimension(u, 2)
    s = np.linspace(-0.99, 0.99, 101)
    np.testing.assert_allclose(jbar(s), np.sqrt(1 - s * s), atol=5e-4)
    assert jbar(1.5) == 0.0


def test_reduce_dimension_mass_fubini():
    # total mass of the reduced kernel equals the planar mass of U
    u = bump_kernel()
    jbar = reduce_dimension(u, 2)
    ref, _ = quad(lambda r: 2 * math.pi * r * float(u(r)), 0.0, u.range_)
    assert jbar.total_mass == pytest.approx(ref, rel=1e-6)


def test_reduce_dimension_three_dimensions():
    u = box_kernel()  # height 1/2
    jbar = reduce_dimension(u, 3)
    # closed form: pi * (R^2 - s^2) * height
    s = np.linspace(-0.9, 0.9, 61)
    np.testing.assert_allclose(jbar(s), 0.5 * math.pi * (1 - s * s), rtol=1e-6)
