"""Planar fronts: a line cross a periodic transverse cell.

The transverse direction is discretized by a periodic row of cells and
the radial kernel enters through its one-dimensional slices at each
transverse offset (minimum image; the period must exceed the kernel
diameter).  Along the line everything reuses the cell-exact machinery,
so a transversally flat profile reproduces the one-dimensional problem
with the transversally integrated kernel exactly at the discrete level.

The uniqueness mechanism is the one of the two-species system: slices
at different transverse offsets play the role of different components,
and the cross interaction between slices is displacement convex.  The
solver's flatness is the observable consequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convexity import PathReport, _classify, _segment_means, _uniform_lambdas
from .errors import (
    DivergedOutOfWindow,
    MaxIterExceeded,
    UnnormalizedPotential,
    ValidationError,
)
from .functionals import EnergyBreakdown
from .grids import Grid, MonotoneProfile, midpoint_mass_grid, quantile_at
from .kernels import w_two_component
from .quadrature import discretization, pair_sum
from .solvers import SolveConfig, _crossing, _shift

__all__ = [
    "Grid2D",
    "Profile2D",
    "free_energy_2d",
    "solve_front_2d",
    "joint_slice_convexity",
]


@dataclass(frozen=True)
class Grid2D:
    """Line grid times a periodic transverse cell of ``p_cells`` rows."""

    x_grid: Grid
    p_cells: int
    period: float

    def __post_init__(self):
        if self.p_cells < 2:
            raise ValidationError("need at least 2 transverse cells")
        if self.period <= 0:
            raise ValidationError("period must be positive")

    @property
    def hy(self) -> float:
        return self.period / self.p_cells


@dataclass(frozen=True)
class Profile2D:
    """Transverse stack of line profiles, antisymmetric by default.

    ``asymptotes`` defaults to ``(-amplitude, amplitude)``; a pure-phase
    field may override it with equal values.
    """

    grid: Grid2D
    values: np.ndarray  # (n, p_cells)
    amplitude: float
    monotone_in_x: bool = True
    asymptotes: tuple | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if self.asymptotes is None:
            object.__setattr__(
                self, "asymptotes", (-self.amplitude, self.amplitude)
            )
        if vals.shape != (self.grid.x_grid.n, self.grid.p_cells):
            raise ValidationError("field shape does not match the grid")
        if self.amplitude <= 0:
            raise ValidationError("amplitude must be positive")
        if self.monotone_in_x and np.any(np.diff(vals, axis=0) < 0):
            raise ValidationError("declared monotone field is not monotone in x")

    def slice_profile(self, y_idx: int) -> MonotoneProfile:
        return MonotoneProfile(
            self.grid.x_grid,
            self.values[:, y_idx],
            self.asymptotes[0],
            self.asymptotes[1],
            boundary_tol=max(2e-6 * self.amplitude, 1e-9),
        )


class _Planar:
    """Per-offset slice discretizations bound to one planar grid."""

    def __init__(self, u_radial, grid2d: Grid2D):
        if grid2d.period <= 2.0 * u_radial.range_:
            raise ValidationError(
                "period must exceed the kernel diameter (single minimum image)"
            )
        self.grid2d = grid2d
        self.kernel = u_radial
        p = grid2d.p_cells
        hy = grid2d.hy
        self.slices = []
        for k in range(p):
            dy = hy * min(k, p - k)
            if dy >= u_radial.range_:
                self.slices.append(None)
                continue
            sl = u_radial.transverse_slice(dy)
            self.slices.append(
                discretization(sl, grid2d.x_grid) if sl is not None else None
            )
        self.slice_mass = np.array(
            [0.0 if d is None else d.kernel.total_mass for d in self.slices]
        )
        self.mass_sum = float(self.slice_mass.sum())  # sum over dy of jhat_slice
        self.h = grid2d.x_grid.h
        self.hy = hy

    def interaction(self, values, asym):
        """Ordered slice-pair sum of the cross quadratic forms."""
        va, vb = asym
        p = self.grid2d.p_cells
        cu = values[:-1, :]
        nc = cu.shape[0]
        total = 0.0
        for dy in range(p):
            disc = self.slices[dy]
            if disc is None:
                continue
            cv = np.roll(cu, -dy, axis=1)
            d_max = disc.d_max
            lin = disc.band_lin
            for d in range(-min(d_max, nc - 1), min(d_max, nc - 1) + 1):
                w = lin[d_max + d]
                if w == 0.0:
                    continue
                if d >= 0:
                    diff = cu[d:, :] - cv[: nc - d, :]
                else:
                    diff = cu[: nc + d, :] - cv[-d:, :]
                total += w * float(np.sum(diff * diff))
            cell_l, cell_r, left_c, right_c = disc._lin_closures(nc)
            total += float(cell_l @ np.sum((cu - va) ** 2, axis=1))
            total += float(cell_r @ np.sum((cu - vb) ** 2, axis=1))
            total += float(left_c @ np.sum((va - cv) ** 2, axis=1))
            total += float(right_c @ np.sum((vb - cv) ** 2, axis=1))
            w_lr, w_rl = disc._opposite_tail_weights(nc)
            total += (w_lr + w_rl) * (va - vb) ** 2 * p
        return self.hy**2 * total

    def cross_sum(self, values, asym):
        """``Σ_dy`` cell-integrated convolutions against every row."""
        va, vb = asym
        p = self.grid2d.p_cells
        cu = values[:-1, :]
        nc = cu.shape[0]
        out = np.zeros((nc, p))
        for dy in range(p):
            disc = self.slices[dy]
            if disc is None:
                continue
            cv = np.roll(cu, -dy, axis=1)
            d_max = disc.d_max
            lin = disc.band_lin
            for d in range(-min(d_max, nc - 1), min(d_max, nc - 1) + 1):
                w = lin[d_max + d]
                if w == 0.0:
                    continue
                lo, hi = max(0, d), min(nc, nc + d)
                out[lo:hi, :] += w * cv[lo - d : hi - d, :]
            cell_l, cell_r, _, _ = disc._lin_closures(nc)
            out += va * cell_l[:, None] + vb * cell_r[:, None]
        return out


def _check_even_well(well, amp):
    if abs(float(well(amp))) > 1e-12 or abs(float(well(-amp))) > 1e-12:
        raise UnnormalizedPotential("well must vanish at both phase values")


def free_energy_2d(
    p2: Profile2D, well, u_radial, kappa: float = 0.5
) -> EnergyBreakdown:
    """Planar energy: transverse cell sum of line terms plus the
    slice-coupled interaction, with the same conventions as in one
    dimension (flat profiles reduce exactly)."""
    _check_even_well(well, p2.amplitude)
    planar = _Planar(u_radial, p2.grid)
    g = p2.grid
    pot = g.hy * g.x_grid.h * float(np.sum(well(p2.values[:-1, :])))
    inter = kappa * planar.interaction(p2.values, p2.asymptotes)
    return EnergyBreakdown(pot, inter, 0.0)


def solve_front_2d(
    well,
    u_radial,
    grid2d: Grid2D,
    init: Profile2D | None = None,
    cfg: SolveConfig = SolveConfig(),
    kappa: float = 0.5,
):
    """Planar front by the damped stationarity iteration, slicewise.

    Each sweep updates all rows from the slice-coupled stationarity map,
    clamps, sorts each row monotone, and re-pins the mean mid-level
    crossing at the origin by a common shift.  Returns the solved field
    and its residual (sup-norm stationarity defect per unit area).
    """
    amp = -float(well.a)
    if abs(well.a + well.b) > 1e-12:
        raise ValidationError("planar solver expects antisymmetric phases")
    _check_even_well(well, amp)
    planar = _Planar(u_radial, grid2d)
    xg = grid2d.x_grid
    p = grid2d.p_cells
    if init is None:
        col = np.where(xg.x >= 0.0, amp, -amp).astype(float)
        values = np.tile(col[:, None], (1, p))
    else:
        values = init.values.copy()
    h, hy = xg.h, grid2d.hy
    denom = 4.0 * kappa * hy * planar.mass_sum
    theta = cfg.damping
    trace = []
    for sweep in range(1, cfg.max_iter + 1):
        cross = planar.cross_sum(values, (-amp, amp))  # (n-1, p)
        new = np.empty_like(values)
        new[:-1, :] = cross / (h * planar.mass_sum) - well.derivative(
            values[:-1, :]
        ) / denom
        new[-1, :] = amp
        values = (1.0 - theta) * values + theta * new
        if cfg.clamp:
            np.clip(values, -amp, amp, out=values)
        values.sort(axis=0)
        values[-1, :] = amp
        if cfg.pinning != "none":
            positions = []
            for y in range(p):
                pos = _crossing(xg.x, values[:, y], 0.0)
                if pos is None:
                    raise DivergedOutOfWindow("a slice lost its crossing")
                positions.append(pos)
            mean_pos = float(np.mean(positions))
            if abs(mean_pos) > 1e-15:
                for y in range(p):
                    values[:, y] = _shift(values[:, y], xg, mean_pos)
        # residual: stationarity defect per unit area
        cross = planar.cross_sum(values, (-amp, amp))
        grad = (
            h * hy * well.derivative(values[:-1, :])
            + 4.0 * kappa * hy**2 * (h * planar.mass_sum * values[:-1, :] - cross)
        )
        res = float(np.max(np.abs(grad)) / (h * hy))
        trace.append(res)
        if res <= cfg.residual_tol:
            break
    else:
        raise MaxIterExceeded(
            f"no convergence in {cfg.max_iter} sweeps (residual {res:.3e})"
        )
    out = Profile2D(grid2d, values, amp)
    return out, res, len(trace)


def joint_slice_convexity(
    p0: Profile2D,
    p1: Profile2D,
    k_points: int = 21,
    m_points: int = 256,
    u_radial=None,
) -> PathReport:
    """Planar interaction along the per-slice displacement interpolation.

    Each slice interpolates independently in its transport coordinate;
    the interaction splits into a displacement-affine local part and a
    slice-pair cross part that is convex through the globally convex
    pair potentials of the kernel slices.
    """
    if u_radial is None:
        raise ValidationError("the radial kernel is required")
    if p0.grid.p_cells != p1.grid.p_cells or p0.grid.x_grid.n != p1.grid.x_grid.n:
        raise ValidationError("profiles live on different grids")
    planar = _Planar(u_radial, p0.grid)
    amp = p0.amplitude
    g = p0.grid
    p = g.p_cells
    mass = midpoint_mass_grid(m_points)
    q0 = np.stack(
        [quantile_at(p0.slice_profile(y), mass) for y in range(p)], axis=1
    )
    q1 = np.stack(
        [quantile_at(p1.slice_profile(y), mass) for y in range(p)], axis=1
    )
    # local part: square levels, exact per mass segment, affine in lambda
    sq_bar = _segment_means(lambda u: (-amp + 2 * amp * u) ** 2 - amp * amp, mass)
    w_slices = [
        None if d is None else w_two_component(d.kernel) for d in planar.slices
    ]
    weights = np.full(m_points, 1.0 / m_points)
    jhat2 = g.hy * planar.mass_sum
    lambdas = _uniform_lambdas(k_points)
    values = []
    for lam in lambdas:
        q = (1.0 - lam) * q0 + lam * q1
        local = sum(float(sq_bar @ np.diff(q[:, y])) for y in range(p))
        cross = 0.0
        for dy in range(p):
            w_pot = w_slices[dy]
            if w_pot is None:
                continue
            for y in range(p):
                pairs = pair_sum(
                    w_pot, q[:, y], weights, q[:, (y + dy) % p], weights
                )
                cross += -4.0 * amp * amp * pairs + 4.0 * amp * amp * w_pot.w_offset
        value = 2.0 * jhat2 * g.hy * local - 2.0 * g.hy**2 * cross
        values.append(value)
    return _classify(lambdas, values)
