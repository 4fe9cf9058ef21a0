"""Convexity certification of energies along interpolation paths.

Displacement paths are evaluated in transport coordinates, where the
structure being certified is exact rather than approximate:

* the quantile samples of the interpolants are affine in the path
  parameter by construction;
* local terms become fixed mass-segment averages contracted against the
  affine quantile increments, hence exactly affine values;
* interactions become pair-potential sums over atoms whose mutual gaps
  are affine in the parameter, hence term-by-term convex values.

What remains to certify numerically is therefore the sign structure
(strictness, and its collapse to affinity on translates), measured by
second differences on a uniform parameter grid.  Pointwise (linear)
interpolation paths are evaluated with the grid functionals, since
there the point is to exhibit nonconvexity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bulk import BulkPhases, LocalFreeEnergy, bulk_phases
from .errors import CertificationFailure, ValidationError
from .grids import MonotoneProfile, midpoint_mass_grid, quantile_at
from .kernels import w_one_component, w_two_component
from .functionals import interaction_energy, potential_energy
from .quadrature import pair_sum

__all__ = [
    "PathReport",
    "eval_path",
    "eval_joint_path",
    "certify_critical_is_min",
    "CertificationReport",
]

_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class PathReport:
    lambdas: np.ndarray
    values: np.ndarray
    min_second_difference: float
    max_affinity_defect: float
    verdict: str


def _classify(lambdas, values, neg_tol=1e-8, affine_tol=1e-7, strict_frac=1e-6):
    values = np.asarray(values, dtype=float)
    second = values[2:] - 2.0 * values[1:-1] + values[:-2]
    min_second = float(second.min()) if second.size else 0.0
    chord = values[0] + (values[-1] - values[0]) * (lambdas - lambdas[0]) / (
        lambdas[-1] - lambdas[0]
    )
    defect = float(np.max(np.abs(values - chord)))
    rng = float(values.max() - values.min())
    if min_second < -max(neg_tol, 1e-12 * max(rng, 1.0)):
        verdict = "nonconvex"
    elif defect <= max(affine_tol * max(rng, 1.0), 1e-9):
        verdict = "affine"
    elif min_second >= strict_frac * rng:
        verdict = "strictly_convex"
    else:
        verdict = "convex"
    return PathReport(lambdas, values, min_second, defect, verdict)


def _uniform_lambdas(k_points):
    if k_points < 5:
        raise ValidationError("need at least 5 path nodes including endpoints")
    return np.linspace(0.0, 1.0, k_points)


def _segment_means(levels_fn, m_grid):
    """Gauss averages of a level function over each mass segment."""
    lo = m_grid[:-1]
    width = np.diff(m_grid)
    pts = lo[:, None] + width[:, None] * 0.5 * (1.0 + _GAUSS_NODES[None, :])
    vals = levels_fn(pts)
    return vals @ (_GAUSS_WEIGHTS / 2.0)


class _DisplacementEvaluator:
    """Exact path energies of the piecewise-linear quantile family."""

    def __init__(self, p0, p1, m_points, well, kernel, kappa):
        if p0.orientation != p1.orientation:
            raise ValidationError("profiles must share orientation")
        self.a, self.b = p0.a, p0.b
        self.mass = midpoint_mass_grid(m_points)
        self.q0 = quantile_at(p0, self.mass)
        self.q1 = quantile_at(p1, self.mass)
        self.m_points = m_points
        self.well = well
        self.kernel = kernel
        self.kappa = kappa
        if well is not None:
            jump = self.b - self.a
            self.f_bar = _segment_means(
                lambda u: np.asarray(well(self.a + jump * u), dtype=float), self.mass
            )
        if kernel is not None:
            self.w_pot = w_one_component(kernel)
            self.w_atoms = np.full(m_points, 1.0 / m_points)

    def quantiles(self, lam):
        return (1.0 - lam) * self.q0 + lam * self.q1

    def potential(self, lam):
        q = self.quantiles(lam)
        return float(self.f_bar @ np.diff(q))

    def interaction(self, lam):
        q = self.quantiles(lam)
        return (
            self.kappa
            * (self.b - self.a) ** 2
            * pair_sum(self.w_pot, q, self.w_atoms)
        )


def eval_path(
    term: str,
    p0: MonotoneProfile,
    p1: MonotoneProfile,
    path_kind: str = "displacement",
    k_points: int = 21,
    *,
    well=None,
    kernel=None,
    kappa: float = 0.5,
    m_points: int = 1024,
) -> PathReport:
    """Energy values and convexity statistics along an interpolation path.

    ``term`` selects ``potential``, ``interaction`` or ``total``;
    ``path_kind`` is ``displacement`` (transport coordinates) or
    ``linear`` (pointwise mixing on the grid).
    """
    if term not in ("potential", "interaction", "total"):
        raise ValidationError(f"unknown term {term!r}")
    if term in ("potential", "total") and well is None:
        raise ValidationError("potential evaluation needs the well")
    if term in ("interaction", "total") and kernel is None:
        raise ValidationError("interaction evaluation needs the kernel")
    lambdas = _uniform_lambdas(k_points)
    if path_kind == "linear":
        values = []
        for lam in lambdas:
            mix = (1.0 - lam) * p0.values + lam * p1.values
            prof = MonotoneProfile(
                p0.grid, mix, p0.a, p0.b, boundary_tol=p0.boundary_tol
            )
            v = 0.0
            if term in ("potential", "total"):
                v += potential_energy(prof, well)
            if term in ("interaction", "total"):
                v += interaction_energy(prof, kernel, kappa)
            values.append(v)
        return _classify(lambdas, values)
    if path_kind != "displacement":
        raise ValidationError(f"unknown path kind {path_kind!r}")
    ev = _DisplacementEvaluator(p0, p1, m_points, well, kernel, kappa)
    values = []
    for lam in lambdas:
        v = 0.0
        if term in ("potential", "total"):
            v += ev.potential(lam)
        if term in ("interaction", "total"):
            v += ev.interaction(lam)
        values.append(v)
    return _classify(lambdas, values)


class _JointEvaluator:
    """Excess binary energy along per-component displacement paths."""

    def __init__(self, pair0, pair1, beta, kernel, m_points):
        (m0, n0), (m1, n1) = pair0, pair1
        if m0.orientation != "increasing" or n0.orientation != "decreasing":
            raise ValidationError(
                "pair convention: first component increasing, second decreasing"
            )
        self.beta = beta
        self.kernel = kernel
        self.w_pot = w_two_component(kernel)
        self.mass = midpoint_mass_grid(m_points)
        self.weights = np.full(m_points, 1.0 / m_points)
        self.qm0 = quantile_at(m0, self.mass)
        self.qm1 = quantile_at(m1, self.mass)
        self.qn0 = quantile_at(n0, self.mass)
        self.qn1 = quantile_at(n1, self.mass)
        self.m_asym = (m0.a, m0.b)
        self.n_asym = (n0.a, n0.b)
        # entropy-excess kernels: d/dv (v ln v) at the segment levels
        self.gm = self._entropy_row(m0.a, m0.b)
        self.gn = self._entropy_row(n0.a, n0.b)

    def _entropy_row(self, a, b):
        levels = a + (b - a) * self.mass
        return -(b - a) * (1.0 + np.log(levels)) / self.mass.size

    def value(self, lam):
        qm = (1.0 - lam) * self.qm0 + lam * self.qm1
        qn = (1.0 - lam) * self.qn0 + lam * self.qn1
        entropy = float(self.gm @ qm) + float(self.gn @ qn)
        a, b = self.m_asym
        c, d = self.n_asym
        w_term = (a - b) * (d - c) * pair_sum(
            self.w_pot, qm, self.weights, qn, self.weights
        )
        const = (b - a) * (d - c) * self.w_pot.w_offset
        moments = -0.5 * self.kernel.total_mass * (
            (b + a) * (d - c) * float(qn.mean())
            + (b - a) * (c + d) * float(qm.mean())
        )
        return entropy + self.beta * (w_term + const + moments)


def eval_joint_path(
    pair0,
    pair1,
    beta: float,
    lam_chem: float,
    kernel,
    k_points: int = 21,
    m_points: int = 1024,
    bulk: BulkPhases | None = None,
) -> PathReport:
    """Excess free energy along the joint displacement interpolation.

    The entropy terms are evaluated through their transport-coordinate
    rewrite and the cross interaction through its measure form, so the
    certified convexity is that of the interpolating family itself.
    """
    if bulk is None:
        bulk = bulk_phases(
            LocalFreeEnergy(beta, lam_chem, lam_chem, kernel.total_mass)
        )
    ev = _JointEvaluator(pair0, pair1, beta, kernel, m_points)
    lambdas = _uniform_lambdas(k_points)
    values = [ev.value(lv) for lv in lambdas]
    return _classify(lambdas, values)


@dataclass(frozen=True)
class CertificationReport:
    trials: int
    min_gap: float
    min_initial_slope: float
    passed: bool


def certify_critical_is_min(
    front,
    well,
    kernel,
    trials: int = 50,
    seed: int = 0,
    kappa: float = 0.5,
    k_points: int = 21,
    m_points: int = 1024,
    gap_tol: float = 1e-9,
    slope_tol: float = 1e-6,
) -> CertificationReport:
    """Check that no random competitor beats a converged front.

    For each competitor the energy along the displacement path from the
    front must stay above the front's energy (up to ``gap_tol``) and the
    one-sided slope at the front must not be negative beyond
    ``slope_tol``.  Raises ``CertificationFailure`` listing offenders.
    """
    if not front.converged:
        raise ValidationError("certification requires a converged front")
    profile = front.profiles[0]
    grid = profile.grid
    rng = np.random.default_rng(seed)
    offenders = []
    min_gap = np.inf
    min_slope = np.inf
    span = grid.x_max - grid.x_min
    for t in range(trials):
        kind = t % 3
        if kind == 0:
            x0 = rng.uniform(-0.1 * span, 0.1 * span)
            vals = np.where(grid.x >= x0, profile.b, profile.a).astype(float)
            competitor = MonotoneProfile(grid, vals, profile.a, profile.b)
        elif kind == 1:
            shift = rng.uniform(-0.15 * span, 0.15 * span)
            vals = np.interp(grid.x - shift, grid.x, profile.values)
            competitor = MonotoneProfile(grid, vals, profile.a, profile.b)
        else:
            centers = rng.uniform(-0.2 * span, 0.2 * span, size=3)
            widths = rng.uniform(0.02 * span, 0.08 * span, size=3)
            u = np.zeros(grid.n)
            for c, w in zip(centers, widths):
                u += rng.uniform(0.2, 1.0) * 0.5 * (1 + np.tanh((grid.x - c) / w))
            u = (u - u[0]) / (u[-1] - u[0])
            u = np.maximum.accumulate(np.clip(u, 0.0, 1.0))
            competitor = MonotoneProfile(
                grid, profile.a + (profile.b - profile.a) * u, profile.a, profile.b
            )
        report = eval_path(
            "total",
            profile,
            competitor,
            k_points=k_points,
            well=well,
            kernel=kernel,
            kappa=kappa,
            m_points=m_points,
        )
        base = report.values[0]
        gap = float(np.min(report.values) - base)
        slope = (report.values[1] - base) / (report.lambdas[1] - report.lambdas[0])
        min_gap = min(min_gap, gap)
        min_slope = min(min_slope, slope)
        if gap < -gap_tol or slope < -slope_tol:
            offenders.append((t, gap, slope))
    if offenders:
        raise CertificationFailure(
            f"{len(offenders)} competitors undercut the front", offenders
        )
    return CertificationReport(
        trials=trials, min_gap=min_gap, min_initial_slope=min_slope, passed=True
    )
