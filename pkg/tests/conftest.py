"""Shared builders for grids, kernels, and test profiles."""

import numpy as np
import pytest

from minfront.grids import Grid, MonotoneProfile


def smooth_front(grid, a, b, centers, widths, weights=None, rng=None):
    """Strictly increasing tanh mixture hitting the asymptotes exactly.

    The mixture is renormalized so the window edge values are exactly
    ``a`` and ``b``; that keeps round trips through the probability
    representation exact.
    """
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    widths = np.atleast_1d(np.asarray(widths, dtype=float))
    if weights is None:
        weights = np.ones_like(centers)
    weights = np.asarray(weights, dtype=float)
    x = grid.x
    u = np.zeros_like(x)
    for c, w, s in zip(centers, widths, weights):
        u += s * 0.5 * (1.0 + np.tanh((x - c) / w))
    u = (u - u[0]) / (u[-1] - u[0])
    u = np.maximum.accumulate(np.clip(u, 0.0, 1.0))
    return MonotoneProfile(grid, a + (b - a) * u, a, b)


def random_front(grid, a, b, rng, n_bumps=3, spread=0.35, width_range=(0.1, 0.3)):
    """Random smooth monotone front well inside the window.

    Default widths keep the tails below boundary tolerance at the window
    edges even after modest translations.
    """
    half = spread * 0.5 * (grid.x_max - grid.x_min)
    mid = 0.5 * (grid.x_min + grid.x_max)
    centers = mid + rng.uniform(-half, half, size=n_bumps)
    widths = rng.uniform(*width_range, size=n_bumps)
    weights = rng.uniform(0.2, 1.0, size=n_bumps)
    return smooth_front(grid, a, b, centers, widths, weights)


def step_profile(grid, a, b, x0=0.0):
    """Sharp interface: ``a`` for x < x0, ``b`` for x >= x0."""
    values = np.where(grid.x >= x0, b, a).astype(float)
    return MonotoneProfile(grid, values, a, b)


def ramp_profile(grid, a, b, x_lo=0.0, x_hi=1.0):
    """Linear transition from ``a`` on (-inf, x_lo] to ``b`` on [x_hi, inf)."""
    u = np.clip((grid.x - x_lo) / (x_hi - x_lo), 0.0, 1.0)
    return MonotoneProfile(grid, a + (b - a) * u, a, b)


def rough_profile(grid, a, b, rng, amplitude=0.25):
    """Non-monotone field with the right limits, for rearrangement tests."""
    base = random_front(grid, a, b, rng).values.copy()
    x = grid.x
    span = grid.x_max - grid.x_min
    noise = np.zeros_like(x)
    for _ in range(4):
        c = rng.uniform(grid.x_min + 0.25 * span, grid.x_max - 0.25 * span)
        w = rng.uniform(0.1, 0.5)
        noise += rng.uniform(-1.0, 1.0) * np.exp(-((x - c) / w) ** 2)
    lo, hi = min(a, b), max(a, b)
    values = np.clip(base + amplitude * (hi - lo) * noise, lo, hi)
    values[0], values[-1] = a, b
    return values


@pytest.fixture
def grid():
    # odd node count puts a node exactly at x = 0
    return Grid(-4.0, 4.0, 513)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
