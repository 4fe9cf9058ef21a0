import numpy as np
import pytest
from scipy.integrate import quad

from minfront.errors import ValidationError
from minfront.functionals import DoubleWell
from minfront.grids import Grid
from minfront.kernels import box_kernel, bump_kernel, reduce_dimension
from minfront.multidim import (
    Grid2D,
    Profile2D,
    free_energy_2d,
    joint_slice_convexity,
    solve_front_2d,
)
from minfront.solvers import SolveConfig, solve_front_1c

WELL = DoubleWell(-1.0, 1.0)
U_RADIAL = bump_kernel(range_=1.0, mass=1.0)
GRID2 = Grid2D(Grid(-8.0, 8.0, 513), 16, 4.0)


def flat_profile(grid2d, profile_1d):
    vals = np.tile(profile_1d.values[:, None], (1, grid2d.p_cells))
    return Profile2D(grid2d, vals, profile_1d.b)


def wavy_profile(grid2d, amp=1.0, wobble=0.8):
    xg = grid2d.x_grid
    p = grid2d.p_cells
    vals = np.empty((xg.n, p))
    for y in range(p):
        shift = wobble * np.sin(2 * np.pi * y / p)
        width = 0.5 + 0.3 * np.cos(2 * np.pi * y / p)
        u = 0.5 * (1 + np.tanh((xg.x - shift) / width))
        u = (u - u[0]) / (u[-1] - u[0])
        vals[:, y] = -amp + 2 * amp * np.maximum.accumulate(np.clip(u, 0, 1))
    return Profile2D(grid2d, vals, amp)


def test_transverse_slices_match_radial_kernel():
    for dy in (0.0, 0.3, 0.7, 0.95):
        sl = U_RADIAL.transverse_slice(dy)
        s = np.linspace(-1.2, 1.2, 41)
        np.testing.assert_allclose(
            sl(s), U_RADIAL(np.sqrt(s * s + dy * dy)), atol=1e-13
        )
    assert U_RADIAL.transverse_slice(1.0) is None


def test_slice_mass_sums_to_reduced_kernel():
    # transverse cell sum of slice masses approximates the reduced mass;
    # the error is the periodic trapezoid error and shrinks fast in P
    jbar = reduce_dimension(U_RADIAL, 2)
    errs = []
    for p_cells in (16, 32):
        hy = 4.0 / p_cells
        total = 0.0
        for k in range(p_cells):
            sl = U_RADIAL.transverse_slice(hy * min(k, p_cells - k))
            if sl is not None:
                total += sl.total_mass
        errs.append(abs(hy * total - jbar.total_mass) / jbar.total_mass)
    assert errs[0] < 1e-4
    assert errs[1] < 5e-6


def test_pure_phase_zero_energy():
    p2 = Profile2D(
        GRID2,
        np.ones((GRID2.x_grid.n, GRID2.p_cells)),
        1.0,
        asymptotes=(1.0, 1.0),
    )
    e = free_energy_2d(p2, WELL, U_RADIAL)
    assert e.total == pytest.approx(0.0, abs=1e-14)


def test_transverse_translate_invariance():
    p2 = wavy_profile(GRID2)
    rolled = Profile2D(GRID2, np.roll(p2.values, 3, axis=1), p2.amplitude)
    e0 = free_energy_2d(p2, WELL, U_RADIAL)
    e1 = free_energy_2d(rolled, WELL, U_RADIAL)
    assert e1.total == pytest.approx(e0.total, rel=1e-14)


def test_flat_profile_energy_reduces_to_1d():
    jbar = reduce_dimension(U_RADIAL, 2)
    front = solve_front_1c(
        WELL, jbar, GRID2.x_grid, cfg=SolveConfig(residual_tol=1e-10)
    )
    from minfront.functionals import free_energy_1c

    e1 = free_energy_1c(front.profile, WELL, jbar)
    p2 = flat_profile(GRID2, front.profile)
    e2 = free_energy_2d(p2, WELL, U_RADIAL)
    assert e2.total == pytest.approx(GRID2.period * e1.total, rel=1e-4)


def test_slice_rearrangement_never_increases_energy(rng):
    for _ in range(20):
        p2 = wavy_profile(GRID2, wobble=float(rng.uniform(0.2, 1.0)))
        noisy = p2.values + 0.15 * rng.standard_normal(p2.values.shape)
        noisy = np.clip(noisy, -1.0, 1.0)
        noisy[0, :], noisy[-1, :] = -1.0, 1.0
        rough = Profile2D(GRID2, noisy, 1.0, monotone_in_x=False)
        sorted_vals = np.sort(noisy, axis=0)
        sorted_vals[-1, :] = 1.0
        arranged = Profile2D(GRID2, sorted_vals, 1.0)
        e_rough = free_energy_2d(rough, WELL, U_RADIAL)
        e_sorted = free_energy_2d(arranged, WELL, U_RADIAL)
        assert e_sorted.interaction_term <= e_rough.interaction_term + 1e-10
        assert e_sorted.potential_term == pytest.approx(
            e_rough.potential_term, abs=1e-10
        )


def test_solver_flattens_wavy_init():
    init = wavy_profile(GRID2)
    out, res, iters = solve_front_2d(
        WELL, U_RADIAL, GRID2, init=init, cfg=SolveConfig(residual_tol=1e-9)
    )
    assert res < 1e-9
    spread = np.max(out.values.max(axis=1) - out.values.min(axis=1))
    assert spread < 1e-6


def test_flat_init_stays_flat_and_converges():
    out, res, iters = solve_front_2d(
        WELL, U_RADIAL, GRID2, cfg=SolveConfig(residual_tol=1e-9)
    )
    assert res < 1e-9
    spread = np.max(out.values.max(axis=1) - out.values.min(axis=1))
    assert spread < 1e-10


def test_solution_slice_matches_1d_front():
    # finer transverse resolution for the tight slice comparison
    grid2 = Grid2D(GRID2.x_grid, 32, 4.0)
    out, _, _ = solve_front_2d(
        WELL, U_RADIAL, grid2, cfg=SolveConfig(residual_tol=1e-10)
    )
    jbar = reduce_dimension(U_RADIAL, 2)
    front = solve_front_1c(
        WELL, jbar, grid2.x_grid, cfg=SolveConfig(residual_tol=1e-10)
    )
    diff = np.max(np.abs(out.values[:, 0] - front.profile.values))
    assert diff < 1e-5


def test_joint_slice_convexity_translate_affine():
    out, _, _ = solve_front_2d(
        WELL, U_RADIAL, GRID2, cfg=SolveConfig(residual_tol=1e-9)
    )
    shift = 24  # grid cells
    shifted = np.empty_like(out.values)
    shifted[:shift, :] = out.values[0, :]
    shifted[shift:, :] = out.values[: -shift or None, :]
    p1 = Profile2D(GRID2, shifted, out.amplitude)
    report = joint_slice_convexity(out, p1, u_radial=U_RADIAL, m_points=128)
    assert report.max_affinity_defect < 1e-6 * max(
        1.0, report.values.max() - report.values.min()
    )
    assert report.verdict == "affine"


def test_joint_slice_convexity_generic_pair():
    p0 = wavy_profile(GRID2, wobble=0.9)
    p1 = wavy_profile(GRID2, wobble=0.3)
    report = joint_slice_convexity(p0, p1, u_radial=U_RADIAL, m_points=128)
    assert report.min_second_difference > 0


def test_self_path_constant():
    p0 = wavy_profile(GRID2)
    report = joint_slice_convexity(p0, p0, u_radial=U_RADIAL, m_points=128)
    assert np.allclose(report.values, report.values[0], atol=1e-9)


def test_period_must_exceed_kernel_diameter():
    small = Grid2D(Grid(-8.0, 8.0, 513), 8, 1.5)
    p2 = Profile2D(small, np.ones((513, 8)), 1.0)
    with pytest.raises(ValidationError):
        free_energy_2d(p2, WELL, U_RADIAL)
