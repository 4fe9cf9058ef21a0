"""Damped fixed-point solvers for single and binary minimal fronts.

Both solvers iterate the stationarity map of the implemented discrete
energy (not a transcribed continuum equation), so a vanishing update is
literally a vanishing discrete gradient.  Each sweep applies, in order:
the damped update, clamping to the phase interval, monotone
rearrangement, and re-pinning of the translation gauge; the reported
residual is the sup-norm stationarity defect per unit length.

The translation gauge follows the canonical representatives: the
mid-level crossing at the origin for a single front, the crossing of
the two component profiles for a binary front.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bulk import BulkPhases, LocalFreeEnergy, bulk_phases
from .errors import (
    DivergedOutOfWindow,
    InsufficientTail,
    MaxIterExceeded,
    SubcriticalBeta,
    ValidationError,
)
from .functionals import (
    DoubleWell,
    FunctionalConfig,
    excess_free_energy_2c,
    free_energy_1c,
    grand_excess_2c,
)
from .grids import Grid, MonotoneProfile
from .quadrature import discretization

logger = logging.getLogger("minfront")

__all__ = [
    "SolveConfig",
    "DecayFit",
    "FrontSolution",
    "Problem1C",
    "Problem2C",
    "solve_front_1c",
    "solve_front_2c",
    "check_derivative_el",
    "fit_decay",
]

_EXP_CLAMP = 700.0


@dataclass(frozen=True)
class SolveConfig:
    damping: float = 0.5
    max_iter: int = 20000
    residual_tol: float = 1e-10
    pinning: str = "midpoint_at_zero"
    clamp: bool = True

    def __post_init__(self):
        if not 0.0 < self.damping <= 1.0:
            raise ValidationError("damping must lie in (0, 1]")
        if self.residual_tol <= 0:
            raise ValidationError("residual tolerance must be positive")
        if self.pinning not in ("midpoint_at_zero", "crossing_at_zero", "none"):
            raise ValidationError(f"unknown pinning mode {self.pinning!r}")


@dataclass(frozen=True)
class DecayFit:
    decay_rate: float
    fit_window: tuple
    r_squared: float
    n_points: int


@dataclass(frozen=True)
class FrontSolution:
    profiles: tuple
    residual: float
    iterations: int
    energy: float
    converged: bool
    mu: float | None = None
    decay: dict | None = None
    trace: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def profile(self) -> MonotoneProfile:
        return self.profiles[0]


def _crossing(x, values, level):
    """Sub-grid position where a non-decreasing field crosses ``level``."""
    s = values - level
    idx = np.nonzero((s[:-1] < 0) & (s[1:] >= 0))[0]
    if idx.size == 0:
        return None
    i = int(idx[0])
    if s[i + 1] == s[i]:
        return x[i]
    return float(x[i] - s[i] * (x[i + 1] - x[i]) / (s[i + 1] - s[i]))


def _shift(values, grid, delta):
    """Evaluate the field at ``x + delta`` (pin the feature at 0)."""
    if delta == 0.0:
        return values
    return np.interp(grid.x + delta, grid.x, values)


class Problem1C:
    """Discrete single-front problem bound to a grid and kernel."""

    def __init__(self, well, kernel, grid: Grid, kappa=0.5):
        if well.b <= well.a:
            raise ValidationError("well must have ordered phases a < b")
        self.well = well
        self.kernel = kernel
        self.grid = grid
        self.kappa = kappa
        self.disc = discretization(kernel, grid)
        self.row_sum = 2.0 * grid.h * kernel.total_mass

    def energy(self, values) -> float:
        pot = self.grid.h * float(np.sum(self.well(values[:-1])))
        return pot + self.kappa * self.disc.quadratic_energy(
            values, self.well.a, self.well.b
        )

    def gradient(self, values) -> np.ndarray:
        grad = self.kappa * self.disc.quadratic_gradient(
            values, self.well.a, self.well.b
        )
        grad[:-1] += self.grid.h * self.well.derivative(values[:-1])
        return grad

    def update(self, values) -> np.ndarray:
        """Exact diagonal-preconditioned stationarity step."""
        new = values - self.gradient(values) / (2.0 * self.kappa * self.row_sum)
        new[-1] = self.well.b
        return new

    def residual(self, values) -> float:
        return float(np.max(np.abs(self.gradient(values))) / self.grid.h)


class Problem2C:
    """Discrete binary-front problem at fixed bulk data."""

    def __init__(self, beta, lam, kernel, grid: Grid, bulk: BulkPhases):
        self.beta = beta
        self.lam = lam
        self.kernel = kernel
        self.grid = grid
        self.bulk = bulk
        self.disc = discretization(kernel, grid)
        mu_a = np.log(bulk.rho_plus) + beta * kernel.total_mass * bulk.rho_minus
        mu_b = np.log(bulk.rho_minus) + beta * kernel.total_mass * bulk.rho_plus
        if abs(mu_a - mu_b) > 1e-8 * max(1.0, abs(mu_a)):
            raise ValidationError("bulk pair does not share a chemical potential")
        self.mu = float(mu_a)

    def rows(self, values, asym) -> np.ndarray:
        return self.disc.bilinear_cell_row(values, asym)

    def update_one(self, other_values, other_asym) -> np.ndarray:
        row = self.rows(other_values, other_asym)
        out = np.empty(self.grid.n)
        out[:-1] = np.exp(np.clip(self.mu - self.beta * row, -_EXP_CLAMP, _EXP_CLAMP))
        return out

    def stationarity_defect(self, values, other_values, other_asym) -> np.ndarray:
        row = self.rows(other_values, other_asym)
        return np.log(values[:-1]) + self.beta * row - self.mu

    def residual(self, m_values, n_values, m_asym, n_asym) -> float:
        r1 = self.stationarity_defect(m_values, n_values, n_asym)
        r2 = self.stationarity_defect(n_values, m_values, m_asym)
        return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))

    def grand_gradient(self, m_values, n_values, m_asym, n_asym):
        """Gradients of the grand excess in both components (h-scaled)."""
        h = self.grid.h
        gm = np.zeros(self.grid.n)
        gn = np.zeros(self.grid.n)
        gm[:-1] = h * self.stationarity_defect(m_values, n_values, n_asym)
        gn[:-1] = h * self.stationarity_defect(n_values, m_values, m_asym)
        return gm, gn


def _prepare_init_1c(init, well, grid):
    if init is None:
        values = np.where(grid.x >= 0.0, well.b, well.a).astype(float)
        return values
    if isinstance(init, MonotoneProfile):
        return init.values.copy()
    return np.asarray(init, dtype=float).copy()


def solve_front_1c(
    well,
    kernel,
    grid: Grid,
    init=None,
    cfg: SolveConfig = SolveConfig(),
    kappa=0.5,
) -> FrontSolution:
    """Minimal single front by damped stationarity iteration.

    Each sweep damps the preconditioned update, clamps to the phase
    interval, sorts monotone, and re-pins the mid-level crossing at 0.
    """
    problem = Problem1C(well, kernel, grid, kappa)
    a, b = well.a, well.b
    values = _prepare_init_1c(init, well, grid)
    theta = cfg.damping
    trace = []
    level = 0.5 * (a + b)
    worse_count = 0
    prev_res = np.inf
    margin = kernel.range_ + 2 * grid.h
    for sweep in range(1, cfg.max_iter + 1):
        new = problem.update(values)
        values = (1.0 - theta) * values + theta * new
        if cfg.clamp:
            np.clip(values, a, b, out=values)
        values.sort()
        values[-1] = b
        if cfg.pinning == "midpoint_at_zero":
            pos = _crossing(grid.x, values, level)
            if pos is None:
                raise DivergedOutOfWindow("front lost its mid-level crossing")
            if abs(pos) > 1e-15:
                values = _shift(values, grid, pos)
            if abs(pos) > grid.x_max - margin:
                raise DivergedOutOfWindow("front drifted into the window edge")
        res = problem.residual(values)
        trace.append(res)
        if res <= cfg.residual_tol:
            break
        if res > prev_res:
            worse_count += 1
            if worse_count >= 3:
                theta = max(theta / 2.0, 1.0 / 64.0)
                worse_count = 0
                logger.debug("sweep %d: residual rising, damping -> %.4f", sweep, theta)
        else:
            worse_count = 0
        prev_res = res
    else:
        best = _finalize_1c(problem, values, trace, converged=False)
        raise MaxIterExceeded(
            f"no convergence in {cfg.max_iter} sweeps (residual {res:.3e})",
            best=best,
        )
    return _finalize_1c(problem, values, trace, converged=True)


def _finalize_1c(problem, values, trace, converged):
    profile = MonotoneProfile(
        problem.grid, values, problem.well.a, problem.well.b,
        boundary_tol=max(1e-6 * (problem.well.b - problem.well.a), 1e-9),
    )
    breakdown = free_energy_1c(
        profile, problem.well, problem.kernel, FunctionalConfig(kappa=problem.kappa)
    )
    solution = FrontSolution(
        profiles=(profile,),
        residual=trace[-1] if trace else np.inf,
        iterations=len(trace),
        energy=breakdown.total,
        converged=converged,
        trace=np.asarray(trace),
    )
    if converged:
        try:
            decay = fit_decay(solution)
        except InsufficientTail:
            decay = None
        solution = FrontSolution(
            profiles=solution.profiles,
            residual=solution.residual,
            iterations=solution.iterations,
            energy=solution.energy,
            converged=True,
            decay=decay,
            trace=solution.trace,
        )
    return solution


def _prepare_init_2c(init, bulk, grid):
    if init is not None:
        m_init, n_init = init
        mv = m_init.values.copy() if isinstance(m_init, MonotoneProfile) else np.array(m_init, dtype=float)
        nv = n_init.values.copy() if isinstance(n_init, MonotoneProfile) else np.array(n_init, dtype=float)
        return mv, nv
    mv = np.where(grid.x >= 0.0, bulk.rho_plus, bulk.rho_minus).astype(float)
    nv = np.where(grid.x >= 0.0, bulk.rho_minus, bulk.rho_plus).astype(float)
    return mv, nv


def solve_front_2c(
    beta: float,
    lam: float,
    kernel,
    grid: Grid,
    init=None,
    cfg: SolveConfig = SolveConfig(pinning="crossing_at_zero"),
    bulk: BulkPhases | None = None,
) -> FrontSolution:
    """Binary minimal front by damped alternating stationarity iteration.

    The two components are updated in alternation from the shared
    chemical potential; each sweep clamps to the bulk interval, sorts
    each component monotone in its own orientation, and pins the
    component crossing at the origin.
    """
    if bulk is None:
        bulk = bulk_phases(LocalFreeEnergy(beta, lam, lam, kernel.total_mass))
    if bulk.symmetric:
        raise SubcriticalBeta(
            f"beta = {beta:g} is below the critical value for lam = {lam:g}"
        )
    rm, rp = bulk.rho_minus, bulk.rho_plus
    m_asym = (rm, rp)
    n_asym = (rp, rm)
    problem = Problem2C(beta, lam, kernel, grid, bulk)
    mv, nv = _prepare_init_2c(init, bulk, grid)
    theta = cfg.damping
    trace = []
    worse_count = 0
    prev_res = np.inf
    margin = kernel.range_ + 2 * grid.h
    for sweep in range(1, cfg.max_iter + 1):
        new_m = problem.update_one(nv, n_asym)
        new_m[-1] = rp
        mv = (1.0 - theta) * mv + theta * new_m
        new_n = problem.update_one(mv, m_asym)
        new_n[-1] = rm
        nv = (1.0 - theta) * nv + theta * new_n
        if cfg.clamp:
            np.clip(mv, rm, rp, out=mv)
            np.clip(nv, rm, rp, out=nv)
        mv.sort()
        nv[::-1].sort()
        mv[-1] = rp
        nv[-1] = rm
        if cfg.pinning == "crossing_at_zero":
            pos = _crossing(grid.x, mv - nv, 0.0)
            if pos is None:
                raise DivergedOutOfWindow("component profiles no longer cross")
            if abs(pos) > 1e-15:
                mv = _shift(mv, grid, pos)
                nv = _shift(nv, grid, pos)
            if abs(pos) > grid.x_max - margin:
                raise DivergedOutOfWindow("front drifted into the window edge")
        res = problem.residual(mv, nv, m_asym, n_asym)
        trace.append(res)
        if res <= cfg.residual_tol:
            break
        if res > prev_res:
            worse_count += 1
            if worse_count >= 3:
                theta = max(theta / 2.0, 1.0 / 64.0)
                worse_count = 0
        else:
            worse_count = 0
        prev_res = res
    else:
        best = _finalize_2c(problem, mv, nv, trace, converged=False)
        raise MaxIterExceeded(
            f"no convergence in {cfg.max_iter} sweeps (residual {res:.3e})",
            best=best,
        )
    return _finalize_2c(problem, mv, nv, trace, converged=True)


def _finalize_2c(problem, mv, nv, trace, converged):
    bulk = problem.bulk
    tol = max(1e-6 * (bulk.rho_plus - bulk.rho_minus), 1e-9)
    m_prof = MonotoneProfile(
        problem.grid, mv, bulk.rho_minus, bulk.rho_plus, boundary_tol=tol
    )
    n_prof = MonotoneProfile(
        problem.grid, nv, bulk.rho_plus, bulk.rho_minus, boundary_tol=tol
    )
    energy = np.nan
    decay = None
    if converged:
        energy = excess_free_energy_2c(
            m_prof, n_prof, problem.beta, problem.lam, problem.kernel, bulk
        ).total
    solution = FrontSolution(
        profiles=(m_prof, n_prof),
        residual=trace[-1] if trace else np.inf,
        iterations=len(trace),
        energy=energy,
        converged=converged,
        mu=problem.mu,
        trace=np.asarray(trace),
    )
    if converged:
        try:
            decay = fit_decay(solution)
        except InsufficientTail:
            decay = None
        solution = FrontSolution(
            profiles=solution.profiles,
            residual=solution.residual,
            iterations=solution.iterations,
            energy=solution.energy,
            converged=True,
            mu=solution.mu,
            decay=decay,
            trace=solution.trace,
        )
    return solution


# ----------------------------------------------------------------------
# post-solve diagnostics


def check_derivative_el(front: FrontSolution, kernel, beta: float) -> float:
    """Sup-norm defect of the differentiated stationarity equations.

    Forms central-difference derivatives of both components and checks
    ``w' / w + beta (J * other')`` at interior nodes with full kernel
    support; second order in the grid spacing for converged fronts.
    """
    if len(front.profiles) != 2:
        raise ValidationError("differentiated check applies to binary fronts")
    m_prof, n_prof = front.profiles
    grid = m_prof.grid
    disc = discretization(kernel, grid)
    h = grid.h

    def central(vals):
        d = np.zeros_like(vals)
        d[1:-1] = (vals[2:] - vals[:-2]) / (2.0 * h)
        return d

    dm = central(m_prof.values)
    dn = central(n_prof.values)
    conv_dn = disc.node_convolution_centered(dn, (0.0, 0.0))
    conv_dm = disc.node_convolution_centered(dm, (0.0, 0.0))
    r1 = dm / m_prof.values + beta * conv_dn
    r2 = dn / n_prof.values + beta * conv_dm
    pad = int(np.ceil(kernel.range_ / h)) + 2
    inner = slice(pad, grid.n - pad)
    return float(max(np.max(np.abs(r1[inner])), np.max(np.abs(r2[inner]))))


def fit_decay(
    front: FrontSolution, band=(1e-12, 1e-3), min_points=20
) -> dict:
    """Exponential decay rates of every tail of a converged front.

    Fits a line to the log-distance from the asymptote over the value
    band; keys are ``(component, side)`` with sides ``left``/``right``.
    """
    fits = {}
    for ci, prof in enumerate(front.profiles):
        x = prof.grid.x
        mid = _crossing(x, prof.values, 0.5 * (prof.a + prof.b))
        if mid is None and prof.orientation == "decreasing":
            mid = _crossing(x, -prof.values, -0.5 * (prof.a + prof.b))
        if mid is None:
            raise InsufficientTail("profile has no transition region")
        for side, asym in (("left", prof.a), ("right", prof.b)):
            dev = np.abs(prof.values - asym)
            mask = (dev >= band[0]) & (dev <= band[1])
            mask &= (x < mid) if side == "left" else (x > mid)
            if int(mask.sum()) < min_points:
                raise InsufficientTail(
                    f"only {int(mask.sum())} usable points on the {side} tail"
                )
            xs = x[mask]
            ys = np.log(dev[mask])
            slope, intercept = np.polyfit(xs, ys, 1)
            fitted = slope * xs + intercept
            ss_res = float(np.sum((ys - fitted) ** 2))
            ss_tot = float(np.sum((ys - ys.mean()) ** 2))
            r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
            fits[(ci, side)] = DecayFit(
                decay_rate=float(abs(slope)),
                fit_window=(float(xs.min()), float(xs.max())),
                r_squared=r2,
                n_points=int(mask.sum()),
            )
    return fits
