"""Local thermodynamics of the binary model.

The local free energy density of two species with purely entropic local
terms and a repulsive cross coupling is

    f(m, n) = m ln m + n ln n + beta*jhat*m*n - lam1*m - lam2*n .

At equal chemical potentials the model has a symmetric minimizer at
small coupling and a mirror pair of asymmetric minimizers past a
critical inverse temperature.  The fixed-point map

    (m, n) -> (exp(mu - beta*jhat*n), exp(mu - beta*jhat*m)),  mu = lam - 1

has the minimizers among its fixed points; its iteration from an
asymmetric seed is the fast path, and a brute-force grid search over
the invariant box is the oracle that every result is checked against.

Useful closed form (used as a test anchor, and also derivable from the
degenerate-Hessian condition beta*jhat*rho_sym = 1): the critical
inverse temperature is ``beta_c = exp(2 - lam) / jhat``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, NoTransitionWarning, OracleMismatch, ValidationError

__all__ = [
    "LocalFreeEnergy",
    "BulkPhases",
    "evaluate_f",
    "phi_map",
    "symmetric_density",
    "bulk_phases",
    "find_beta_c",
    "find_beta_c_hessian",
]

_EXP_CLAMP = 700.0


@dataclass(frozen=True)
class LocalFreeEnergy:
    """Parameters of the local free energy density."""

    beta: float
    lam1: float
    lam2: float
    jhat: float

    def __post_init__(self):
        if self.beta < 0:
            raise ValidationError("inverse temperature must be non-negative")
        if self.jhat <= 0:
            raise ValidationError("kernel mass must be positive")

    @property
    def lam(self) -> float:
        if self.lam1 != self.lam2:
            raise ValidationError("operation requires equal chemical potentials")
        return self.lam1

    @property
    def mu(self) -> float:
        return self.lam - 1.0


def _xlogx(v):
    v = np.asarray(v, dtype=float)
    return np.where(v > 0, v * np.log(np.where(v > 0, v, 1.0)), 0.0)


def evaluate_f(lfe: LocalFreeEnergy, m, n):
    """Local free energy density; ``0 ln 0 = 0``."""
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    if np.any(m < 0) or np.any(n < 0):
        raise DomainError("densities must be non-negative")
    out = (
        _xlogx(m)
        + _xlogx(n)
        + lfe.beta * lfe.jhat * m * n
        - lfe.lam1 * m
        - lfe.lam2 * n
    )
    if out.ndim == 0:
        return float(out)
    return out


def phi_map(lfe: LocalFreeEnergy, m, n, mu=None):
    """One iteration of the stationarity fixed-point map."""
    if mu is None:
        mu = lfe.mu
    bj = lfe.beta * lfe.jhat
    m = np.asarray(m, dtype=float)
    n = np.asarray(n, dtype=float)
    new_m = np.exp(np.clip(mu - bj * n, -_EXP_CLAMP, _EXP_CLAMP))
    new_n = np.exp(np.clip(mu - bj * m, -_EXP_CLAMP, _EXP_CLAMP))
    if new_m.ndim == 0:
        return float(new_m), float(new_n)
    return new_m, new_n


def symmetric_density(beta: float, lam: float, jhat: float) -> float:
    """Solve ``rho = exp(lam - 1 - beta*jhat*rho)`` for the symmetric point."""
    mu = lam - 1.0
    bj = beta * jhat
    if bj == 0.0:
        return float(np.exp(mu))

    def g(r):
        return np.log(r) + bj * r - mu

    hi = np.exp(mu)
    lo = np.exp(np.clip(mu - bj * hi, -_EXP_CLAMP, _EXP_CLAMP))
    lo = max(lo * 0.5, 1e-300)
    return float(brentq(g, lo, hi * 1.0000001, xtol=1e-15, rtol=1e-15))


@dataclass(frozen=True)
class BulkPhases:
    """Minimizing densities of the local model at equal potentials."""

    rho_minus: float
    rho_plus: float
    beta: float
    lam: float
    symmetric: bool
    g: float
    c_tail: float
    mu: float

    def __post_init__(self):
        if self.rho_minus > self.rho_plus:
            raise ValidationError("bulk densities must be ordered")


def _grid_minimum(lfe: LocalFreeEnergy, points=400, refinements=2):
    """Brute-force minimizer of f over the invariant box, refined locally."""
    m_max = float(np.exp(lfe.mu))
    lo = float(np.exp(np.clip(lfe.mu - lfe.beta * lfe.jhat * m_max, -_EXP_CLAMP, 0)))
    lo = max(lo * 0.9, 1e-12)
    hi = m_max * 1.0001
    m_lo, m_hi, n_lo, n_hi = lo, hi, lo, hi
    best = None
    for _ in range(refinements + 1):
        ms = np.linspace(m_lo, m_hi, points)
        ns = np.linspace(n_lo, n_hi, points)
        mm, nn = np.meshgrid(ms, ns, indexing="ij")
        vals = evaluate_f(lfe, mm, nn)
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        best = (float(ms[i]), float(ns[j]), float(vals[i, j]))
        dm = (m_hi - m_lo) / (points - 1)
        dn = (n_hi - n_lo) / (points - 1)
        m_lo, m_hi = max(lo, ms[i] - 2 * dm), min(hi, ms[i] + 2 * dm)
        n_lo, n_hi = max(lo, ns[j] - 2 * dn), min(hi, ns[j] + 2 * dn)
    return best


def _newton_polish(lfe: LocalFreeEnergy, m, n, iters=60):
    """Newton on the stationarity system from a good seed."""
    bj = lfe.beta * lfe.jhat
    mu = lfe.mu
    for _ in range(iters):
        f1 = np.log(m) + bj * n - mu
        f2 = np.log(n) + bj * m - mu
        det = 1.0 / (m * n) - bj * bj
        if det == 0:
            break
        dm = ((1.0 / n) * f1 - bj * f2) / det
        dn = ((1.0 / m) * f2 - bj * f1) / det
        step = 1.0
        while (m - step * dm) <= 0 or (n - step * dn) <= 0:
            step *= 0.5
            if step < 1e-8:
                break
        m, n = m - step * dm, n - step * dn
        if abs(f1) + abs(f2) < 1e-14:
            break
    return m, n


def _asymmetric_fixed_point(lfe: LocalFreeEnergy, rho_sym, seed_offset):
    """Fixed point of the map from an asymmetric seed.

    A burst of plain iteration is followed by a bracketed root find on
    the composed one-variable map ``m -> exp(mu - bj exp(mu - bj m))``,
    which stays sharp arbitrarily close to the critical point where the
    iteration alone slows to a crawl.
    """
    m, n = rho_sym * (1 + seed_offset), rho_sym * (1 - seed_offset)
    for _ in range(200):
        m2, n2 = phi_map(lfe, m, n)
        if abs(m2 - m) + abs(n2 - n) < 1e-14:
            return m2, n2
        m, n = m2, n2

    bj = lfe.beta * lfe.jhat
    mu = lfe.mu
    # branch existence from the composed-map slope at the symmetric
    # point, (bj rho_sym)^2 > 1; the defect probe itself cancels to
    # noise level arbitrarily close to the critical point
    if (bj * rho_sym) ** 2 <= 1.0:
        return rho_sym, rho_sym

    def composed_defect(v):
        inner = np.exp(np.clip(mu - bj * v, -_EXP_CLAMP, _EXP_CLAMP))
        return v - np.exp(np.clip(mu - bj * inner, -_EXP_CLAMP, _EXP_CLAMP))

    hi = float(np.exp(mu)) * (1 + 1e-12)
    floor = 1e3 * np.finfo(float).eps * max(1.0, rho_sym)
    offset = 1e-9 * rho_sym
    lo = rho_sym + offset
    while composed_defect(lo) > -floor:
        offset *= 2.0
        lo = rho_sym + offset
        if lo >= hi:
            return rho_sym, rho_sym
    m = float(brentq(composed_defect, lo, hi, xtol=1e-15, rtol=1e-15))
    n = float(np.exp(np.clip(mu - bj * m, -_EXP_CLAMP, _EXP_CLAMP)))
    return m, n


def bulk_phases(
    lfe: LocalFreeEnergy, oracle_points=400, seed_offset=0.2
) -> BulkPhases:
    """Minimizers of the local model, fixed point cross-checked vs. grid.

    The fixed-point route runs from an asymmetric seed; the refined
    brute-force grid search is the oracle and a disagreement beyond 1e-5
    in position is an error.
    """
    lam = lfe.lam
    rho_sym = symmetric_density(lfe.beta, lam, lfe.jhat)
    m, n = _asymmetric_fixed_point(lfe, rho_sym, seed_offset)
    rho_plus, rho_minus = max(m, n), min(m, n)

    gm, gn, _ = _grid_minimum(lfe, points=oracle_points)
    gp, gmn = max(gm, gn), min(gm, gn)
    gp, gmn = _newton_polish(lfe, gp, gmn)
    if abs(gp - rho_plus) > 1e-5 or abs(gmn - rho_minus) > 1e-5:
        raise OracleMismatch(
            f"fixed point ({rho_plus:.8g}, {rho_minus:.8g}) vs grid oracle "
            f"({gp:.8g}, {gmn:.8g})"
        )

    scale = max(rho_plus, 1e-12)
    symmetric = (rho_plus - rho_minus) < 1e-7 * scale
    if symmetric:
        rho_plus = rho_minus = rho_sym
    g_val = float(evaluate_f(lfe, rho_plus, rho_minus))
    c_tail = float(
        _xlogx(rho_plus) + _xlogx(rho_minus)
        + lfe.beta * lfe.jhat * rho_plus * rho_minus
    )
    return BulkPhases(
        rho_minus=rho_minus,
        rho_plus=rho_plus,
        beta=lfe.beta,
        lam=lam,
        symmetric=symmetric,
        g=g_val,
        c_tail=c_tail,
        mu=lfe.mu,
    )


def find_beta_c(
    lam: float,
    jhat: float,
    beta_range=(1e-3, 1e3),
    tol=1e-6,
    cross_check_tol=1e-4,
) -> float:
    """Critical inverse temperature by bisection on the symmetry flag.

    Cross-checked against the degenerate-Hessian condition
    ``beta*jhat*rho_sym(beta) = 1``; disagreement beyond tolerance is an
    oracle error.  Returns the bisection value.
    """

    def is_asym(beta):
        return not bulk_phases(LocalFreeEnergy(beta, lam, lam, jhat)).symmetric

    lo, hi = beta_range
    if is_asym(lo) or not is_asym(hi):
        warnings.warn(
            f"no symmetric/asymmetric transition in beta range {beta_range}",
            NoTransitionWarning,
        )
        return float("nan")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if is_asym(mid):
            hi = mid
        else:
            lo = mid
    beta_c = 0.5 * (lo + hi)
    ref = find_beta_c_hessian(lam, jhat)
    if abs(beta_c - ref) > cross_check_tol * max(1.0, ref):
        raise OracleMismatch(
            f"bisection beta_c {beta_c:.8g} vs Hessian condition {ref:.8g}"
        )
    return beta_c


def find_beta_c_hessian(lam: float, jhat: float) -> float:
    """Root of ``beta*jhat*rho_sym(beta, lam) - 1`` (degenerate Hessian)."""

    def cond(beta):
        return beta * jhat * symmetric_density(beta, lam, jhat) - 1.0

    lo, hi = 1e-6, 1.0
    while cond(hi) < 0:
        hi *= 2.0
        if hi > 1e9:
            raise ValidationError("no critical temperature below 1e9")
    return float(brentq(cond, lo, hi, xtol=1e-12, rtol=1e-14))
