"""Uniform grids, monotone profiles, and their probability representations.

A profile on a grid stands for a function on the whole line: outside the
window it takes its boundary values (constant extension).  A monotone
profile with asymptotes ``a`` (left) and ``b`` (right) is, after the
normalization ``u = (v - a)/(b - a)``, the cumulative distribution
function of a probability measure, and that measure's generalized
inverse is the quantile function.  The three representations

    profile  <->  cell weights (probability density)  <->  quantile

are the working coordinates for everything else in the package: energies
are evaluated on profiles, transport and interpolation act on quantiles.

Conventions, fixed once here and relied on everywhere:

* the normalized profile is read as a right-continuous step function
  jumping at the grid nodes, so the node weights are successive
  differences of ``u`` and the quantile of a flat stretch is its right
  endpoint;
* quantile queries between nodes interpolate linearly on strictly
  increasing segments;
* the mass coordinate for sampled quantiles is the midpoint grid
  ``(j + 1/2)/M``, which never evaluates at mass 0 or 1 where the
  quantile is infinite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProfile, ValidationError, WindowTooSmall

__all__ = [
    "Grid",
    "MonotoneProfile",
    "ProbabilityDensity",
    "QuantileFunction",
    "profile_to_density",
    "density_to_profile",
    "quantile",
    "quantile_at",
    "profile_from_quantile",
    "translate",
    "reflect",
]

#: relative (to |b - a|) tolerance for edge values vs. asymptotes
BOUNDARY_TOL = 1e-6


@dataclass(frozen=True)
class Grid:
    """Uniform sampling window ``[x_min, x_max]`` with ``n`` nodes."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValidationError(f"grid needs at least 8 nodes, got {self.n}")
        if not self.x_max > self.x_min:
            raise ValidationError("grid window must have positive length")
        object.__setattr__(
            self, "_x", np.linspace(self.x_min, self.x_max, self.n)
        )

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return self._x

    def refined(self) -> "Grid":
        """Same window at half the spacing (nodes nest exactly)."""
        return Grid(self.x_min, self.x_max, 2 * self.n - 1)

    def reflected(self) -> "Grid":
        return Grid(-self.x_max, -self.x_min, self.n)


def _as_readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MonotoneProfile:
    """Grid samples of a monotone function with asymptotes ``a`` -> ``b``.

    ``a`` is the value at -inf, ``b`` at +inf; the orientation follows the
    sign of ``b - a``.  Values must be monotone (non-strict), lie between
    the asymptotes, and attain them at the window edges within
    ``boundary_tol``.
    """

    grid: Grid
    values: np.ndarray
    a: float
    b: float
    orientation: str = ""
    boundary_tol: float = field(default=-1.0)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_readonly(self.values))
        if self.values.shape != (self.grid.n,):
            raise ValidationError("values length does not match grid")
        tol = self.boundary_tol
        if tol < 0:
            tol = BOUNDARY_TOL * abs(self.b - self.a)
            object.__setattr__(self, "boundary_tol", tol)
        orient = self.orientation
        if not orient:
            orient = "increasing" if self.b >= self.a else "decreasing"
            object.__setattr__(self, "orientation", orient)
        if orient not in ("increasing", "decreasing"):
            raise ValidationError(f"unknown orientation {orient!r}")
        if self.a != self.b:
            natural = "increasing" if self.b > self.a else "decreasing"
            if orient != natural:
                raise ValidationError(
                    "orientation inconsistent with asymptotes"
                )
        d = np.diff(self.values)
        if orient == "increasing":
            if np.any(d < 0):
                raise ValidationError("values are not non-decreasing")
        else:
            if np.any(d > 0):
                raise ValidationError("values are not non-increasing")
        lo, hi = min(self.a, self.b), max(self.a, self.b)
        slack = 1e-12 * (hi - lo)
        if np.any(self.values < lo - slack) or np.any(self.values > hi + slack):
            raise ValidationError("values leave the asymptote interval")
        if np.any(self.values < lo) or np.any(self.values > hi):
            object.__setattr__(
                self, "values", _as_readonly(np.clip(self.values, lo, hi))
            )
        if abs(self.values[0] - self.a) > tol or abs(self.values[-1] - self.b) > tol:
            raise ValidationError(
                "edge values do not attain the asymptotes within boundary_tol"
            )

    # -- basic queries -------------------------------------------------

    @property
    def jump(self) -> float:
        return self.b - self.a

    def normalized(self) -> np.ndarray:
        """Values mapped to the mass coordinate ``[0, 1]`` (increasing)."""
        if self.a == self.b:
            raise DegenerateProfile("profile with a == b has no mass coordinate")
        u = (self.values - self.a) / (self.b - self.a)
        return np.clip(u, 0.0, 1.0)

    def __call__(self, x) -> np.ndarray:
        """Evaluate with constant extension outside the window."""
        return np.interp(x, self.grid.x, self.values)

    def with_values(self, values) -> "MonotoneProfile":
        return MonotoneProfile(
            self.grid, values, self.a, self.b, self.orientation, self.boundary_tol
        )


@dataclass(frozen=True)
class ProbabilityDensity:
    """Non-negative cell masses on a grid (midpoint cells), summing to 1."""

    grid: Grid
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _as_readonly(self.weights))
        if self.weights.shape != (self.grid.n,):
            raise ValidationError("weights length does not match grid")
        if np.any(self.weights < 0):
            raise ValidationError("weights must be non-negative")
        if abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must sum to 1 within 1e-12")

    def mean(self) -> float:
        return float(self.weights @ self.grid.x)


@dataclass(frozen=True)
class QuantileFunction:
    """Sampled generalized inverse on the midpoint mass grid."""

    m_grid: np.ndarray
    x_of_m: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "m_grid", _as_readonly(self.m_grid))
        object.__setattr__(self, "x_of_m", _as_readonly(self.x_of_m))
        if self.m_grid.shape != self.x_of_m.shape:
            raise ValidationError("mass grid and samples differ in length")
        if np.any(np.diff(self.x_of_m) < 0):
            raise ValidationError("quantile samples must be non-decreasing")
        if not np.all(np.isfinite(self.x_of_m)):
            raise ValidationError("quantile samples must be finite")

    @property
    def m(self) -> int:
        return self.m_grid.size


def midpoint_mass_grid(m_points: int) -> np.ndarray:
    return (np.arange(m_points) + 0.5) / m_points


# ----------------------------------------------------------------------
# profile <-> density


def profile_to_density(p: MonotoneProfile) -> ProbabilityDensity:
    """Cell masses of the measure whose CDF is the normalized profile.

    The defect between the edge values and the exact asymptotes is
    absorbed into the first and last cells so the result is exactly a
    probability.
    """
    u = p.normalized()
    w = np.empty(p.grid.n)
    w[0] = u[0]
    w[1:] = np.diff(u)
    w[-1] += 1.0 - u[-1]
    np.clip(w, 0.0, None, out=w)
    s = w.sum()
    if abs(s - 1.0) > 1e-12:          # guards accumulated rounding only
        w /= s
    return ProbabilityDensity(p.grid, w)


def density_to_profile(
    d: ProbabilityDensity, a: float, b: float, orientation: str = ""
) -> MonotoneProfile:
    """Profile whose normalized cumulative sum reproduces ``d``."""
    u = np.cumsum(d.weights)
    values = a + (b - a) * u
    return MonotoneProfile(d.grid, values, a, b, orientation)


# ----------------------------------------------------------------------
# profile <-> quantile


def quantile_at(p: MonotoneProfile, mass_levels: np.ndarray) -> np.ndarray:
    """Generalized inverse ``inf{x : u(x) > q}`` at given mass levels.

    Right-continuous convention: a query landing exactly on a flat
    stretch returns the right endpoint of the stretch; queries strictly
    inside an increasing segment interpolate linearly.  Levels below the
    left edge mass (or above the right) clamp to the window.
    """
    u = p.normalized()
    x = p.grid.x
    q = np.asarray(mass_levels, dtype=float)
    k = np.searchsorted(u, q, side="right")
    out = np.empty(q.shape)
    low = k == 0
    high = k == u.size
    mid = ~(low | high)
    out[low] = x[0]
    out[high] = x[-1]
    km = k[mid]
    u_lo = u[km - 1]
    du = u[km] - u_lo
    out[mid] = x[km - 1] + p.grid.h * (q[mid] - u_lo) / du
    return out


def quantile(p: MonotoneProfile, m_points: int) -> QuantileFunction:
    """Quantile function sampled on the midpoint mass grid."""
    if p.a == p.b:
        raise DegenerateProfile("constant asymptotes: no quantile")
    m_grid = midpoint_mass_grid(m_points)
    return QuantileFunction(m_grid, quantile_at(p, m_grid))


def profile_from_quantile(
    q: QuantileFunction, grid: Grid, a: float, b: float
) -> MonotoneProfile:
    """Invert a sampled quantile back onto a spatial grid.

    Uses the same right-continuous convention as :func:`quantile_at`,
    with the ends clamped to exact asymptotes: grid nodes left of the
    first quantile sample get mass 0 (value ``a``), nodes at or beyond
    the last get mass 1 (value ``b``).
    """
    slack = 1e-9 * (grid.x_max - grid.x_min)
    if q.x_of_m[0] < grid.x_min - slack or q.x_of_m[-1] > grid.x_max + slack:
        raise WindowTooSmall(
            f"quantile range [{q.x_of_m[0]:g}, {q.x_of_m[-1]:g}] exceeds "
            f"window [{grid.x_min:g}, {grid.x_max:g}]"
        )
    xs = np.clip(q.x_of_m, grid.x_min, grid.x_max)
    k = np.searchsorted(xs, grid.x, side="right")
    u = np.empty(grid.n)
    low = k == 0
    high = k == xs.size
    mid = ~(low | high)
    u[low] = 0.0
    u[high] = 1.0
    km = k[mid]
    x_lo = xs[km - 1]
    dx = xs[km] - x_lo
    u[mid] = q.m_grid[km - 1] + (q.m_grid[km] - q.m_grid[km - 1]) * (
        grid.x[mid] - x_lo
    ) / dx
    u = np.maximum.accumulate(np.clip(u, 0.0, 1.0))
    return MonotoneProfile(grid, a + (b - a) * u, a, b)


# ----------------------------------------------------------------------
# elementary transforms


def translate(p: MonotoneProfile, delta: float) -> MonotoneProfile:
    """Shift a profile right by ``delta``: ``m_new(x) = m(x - delta)``.

    Shifts by an integer number of cells move samples exactly; other
    shifts interpolate linearly and fill with the boundary values.
    """
    h = p.grid.h
    steps = delta / h
    k = int(round(steps))
    if abs(steps - k) < 1e-12:
        values = np.empty_like(p.values)
        if k >= 0:
            values[:k] = p.values[0]
            values[k:] = p.values[: p.grid.n - k]
        else:
            values[k:] = p.values[-1]
            values[:k] = p.values[-k:]
    else:
        values = np.interp(p.grid.x - delta, p.grid.x, p.values)
    return p.with_values(values)


def reflect(p: MonotoneProfile) -> MonotoneProfile:
    """Mirror ``x -> -x``; asymptotes swap and the grid window mirrors."""
    return MonotoneProfile(
        p.grid.reflected(), p.values[::-1], p.b, p.a, boundary_tol=p.boundary_tol
    )
