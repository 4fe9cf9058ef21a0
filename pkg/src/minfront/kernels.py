"""Interaction kernels and the convex pair potentials derived from them.

Every kernel shape carries exact antiderivatives: ``mass_between`` is
``∫ J`` and ``first_moment_between`` is ``∫ s·J(s)`` over an interval,
evaluated in closed form (piecewise-exactly for tabulated kernels).
All banded quadrature coefficients, tail closures, and the derived pair
potentials reduce to combinations of these two primitives, so the only
approximation anywhere downstream is the profile discretization itself.

Two pair potentials re-express interaction energies on measures:

* the single-species form, supported on the kernel range, convex on each
  half line but not across the origin;
* the two-species form, convex on the whole line, growing linearly with
  slope ``total_mass/2`` beyond the range with offset ``w_offset``.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import erf, gamma

from .errors import CoarseKernelTable, QuadratureFailure, ValidationError

__all__ = [
    "Kernel",
    "box_kernel",
    "triangle_kernel",
    "truncated_gaussian_kernel",
    "bump_kernel",
    "tabulated_kernel",
    "load_kernel_csv",
    "WPotential",
    "w_one_component",
    "w_two_component",
    "reduce_dimension",
]


class Kernel:
    """Non-negative interaction kernel with compact support ``[-R, R]``.

    Subclasses implement the evaluator and the two exact antiderivative
    primitives; everything else (total mass, symmetrized integrals, the
    pair potentials) is derived here.
    """

    shape = "abstract"

    def __init__(self, range_, even=True, decreasing=True):
        if range_ <= 0:
            raise ValidationError("kernel range must be positive")
        self.range_ = float(range_)
        self.even = bool(even)
        self.decreasing = bool(decreasing)
        self.total_mass = float(self.mass_between(-self.range_, self.range_))
        self._disc_cache = {}
        self._validate()

    # -- interface ------------------------------------------------------

    def __call__(self, s):
        raise NotImplementedError

    def _mass_primitive(self, s):
        """``∫_{-R}^{s} J(t) dt`` for clipped ``s``; vectorized."""
        raise NotImplementedError

    def _moment_primitive(self, s):
        """``∫_{-R}^{s} t J(t) dt`` for clipped ``s``; vectorized."""
        raise NotImplementedError

    # -- derived exact integrals -----------------------------------------

    def _clip(self, s):
        return np.clip(s, -self.range_, self.range_)

    def mass_between(self, lo, hi):
        """Exact ``∫_lo^hi J(s) ds`` (broadcasts over arrays)."""
        return self._mass_primitive(self._clip(hi)) - self._mass_primitive(
            self._clip(lo)
        )

    def first_moment_between(self, lo, hi):
        """Exact ``∫_lo^hi s J(s) ds`` (broadcasts over arrays)."""
        return self._moment_primitive(self._clip(hi)) - self._moment_primitive(
            self._clip(lo)
        )

    def sym_mass_between(self, lo, hi):
        """Same integral for the symmetrized kernel ``J(s) + J(-s)``."""
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        return self.mass_between(lo, hi) + self.mass_between(-hi, -lo)

    def sym_first_moment_between(self, lo, hi):
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        return self.first_moment_between(lo, hi) - self.first_moment_between(
            -hi, -lo
        )

    # -- construction-time checks -----------------------------------------

    def _validate(self):
        r = self.range_
        s = np.linspace(-r, r, 4097)
        vals = np.asarray(self(s), dtype=float)
        if np.any(vals < -1e-14):
            raise ValidationError(f"{self.shape} kernel takes negative values")
        outside = np.array([1.0 + 1e-9, 2.0, 10.0]) * r
        if np.any(np.abs(self(outside)) > 0) or np.any(np.abs(self(-outside)) > 0):
            raise ValidationError("kernel does not vanish outside its range")
        if self.shape == "tabulated":
            # Gauss panels are not exact across sample kinks; check the
            # closed-form prefix integrals for additivity instead.
            cuts = np.linspace(-r, r, 257)
            quad = float(np.sum(self.mass_between(cuts[:-1], cuts[1:])))
        else:
            quad = _panel_gauss_mass(self, -r, r)
        if abs(quad - self.total_mass) > 1e-10 * max(1.0, abs(self.total_mass)):
            raise ValidationError(
                f"quadrature mass {quad!r} disagrees with closed form "
                f"{self.total_mass!r}"
            )
        if self.even:
            if np.max(np.abs(vals - vals[::-1])) > 1e-12 * max(1.0, vals.max()):
                raise ValidationError("kernel declared even is not symmetric")
        if self.decreasing:
            pos = vals[s >= 0]
            if np.any(np.diff(pos) > 1e-12 * max(1.0, vals.max())):
                raise ValidationError(
                    "kernel declared decreasing increases on the positive axis"
                )

    def require_resolution(self, h):
        """Hook for sampled kernels; analytic shapes always pass."""

    def transverse_slice(self, dy):
        """One-dimensional slice at transverse offset ``dy`` of the
        radial kernel; ``None`` when the offset exceeds the range."""
        raise ValidationError(
            f"{self.shape} kernels have no closed-form transverse slices; "
            "use box, bump, or truncated_gaussian for planar problems"
        )


def _panel_gauss_mass(kernel, lo, hi, panels=64, order=12):
    """High-order panel Gauss-Legendre mass, used only as a cross-check."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    return float(np.sum(half[:, None] * weights[None, :] * kernel(pts)))


# ----------------------------------------------------------------------
# analytic shapes


class _BoxKernel(Kernel):
    shape = "box"

    def __init__(self, range_, height):
        self.height = float(height)
        super().__init__(range_)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(np.abs(s) <= self.range_, self.height, 0.0)

    def _mass_primitive(self, s):
        return self.height * (np.asarray(s, dtype=float) + self.range_)

    def _moment_primitive(self, s):
        s = np.asarray(s, dtype=float)
        return 0.5 * self.height * (s * s - self.range_**2)

    def transverse_slice(self, dy):
        if abs(dy) >= self.range_:
            return None
        return _BoxKernel(math.sqrt(self.range_**2 - dy * dy), self.height)


class _EvenPolynomialKernel(Kernel):
    """``J(s) = Σ_k c_k s^{2k}`` on its support; exact antiderivatives."""

    shape = "even_polynomial"

    def __init__(self, range_, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)
        super().__init__(range_)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        s2 = s * s
        for c in self.coeffs[::-1]:
            out = out * s2 + c
        return np.where(np.abs(s) <= self.range_, np.clip(out, 0.0, None), 0.0)

    def _mass_primitive(self, s):
        s = np.asarray(s, dtype=float)
        r = self.range_
        out = np.zeros_like(s)
        for k, c in enumerate(self.coeffs):
            out = out + c * (s ** (2 * k + 1) + r ** (2 * k + 1)) / (2 * k + 1)
        return out

    def _moment_primitive(self, s):
        s = np.asarray(s, dtype=float)
        r = self.range_
        out = np.zeros_like(s)
        for k, c in enumerate(self.coeffs):
            out = out + c * (s ** (2 * k + 2) - r ** (2 * k + 2)) / (2 * k + 2)
        return out


class _TriangleKernel(Kernel):
    shape = "triangle"

    def __init__(self, range_, height):
        self.height = float(height)
        super().__init__(range_)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.height * np.clip(1.0 - np.abs(s) / self.range_, 0.0, None)

    def _mass_primitive(self, s):
        s = np.asarray(s, dtype=float)
        r, c = self.range_, self.height
        neg = c * (s + r) ** 2 / (2 * r)
        pos = c * r / 2 + c * (s - s * s / (2 * r))
        return np.where(s <= 0, neg, pos)

    def _moment_primitive(self, s):
        s = np.asarray(s, dtype=float)
        r, c = self.range_, self.height
        neg = c * (s * s / 2 + s**3 / (3 * r) - r * r / 6)
        pos = -c * r * r / 6 + c * (s * s / 2 - s**3 / (3 * r))
        return np.where(s <= 0, neg, pos)


class _TruncatedGaussianKernel(Kernel):
    shape = "truncated_gaussian"

    def __init__(self, range_, height, sigma):
        self.height = float(height)
        self.sigma = float(sigma)
        super().__init__(range_)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        v = self.height * np.exp(-0.5 * (s / self.sigma) ** 2)
        return np.where(np.abs(s) <= self.range_, v, 0.0)

    def _mass_primitive(self, s):
        s = np.asarray(s, dtype=float)
        c, sg, r = self.height, self.sigma, self.range_
        scale = c * sg * math.sqrt(math.pi / 2)
        return scale * (erf(s / (sg * math.sqrt(2))) + erf(r / (sg * math.sqrt(2))))

    def _moment_primitive(self, s):
        s = np.asarray(s, dtype=float)
        c, sg, r = self.height, self.sigma, self.range_
        return c * sg * sg * (
            math.exp(-0.5 * (r / sg) ** 2) - np.exp(-0.5 * (s / sg) ** 2)
        )

    def transverse_slice(self, dy):
        if abs(dy) >= self.range_:
            return None
        return _TruncatedGaussianKernel(
            math.sqrt(self.range_**2 - dy * dy),
            self.height * math.exp(-0.5 * (dy / self.sigma) ** 2),
            self.sigma,
        )


class _BumpKernel(Kernel):
    """Polynomial bump ``(1 - (s/R)^2)^4``: C^3 at the support edge."""

    shape = "bump"

    def __init__(self, range_, height):
        self.height = float(height)
        super().__init__(range_)

    def __call__(self, s):
        u = np.asarray(s, dtype=float) / self.range_
        inside = np.abs(u) <= 1.0
        return np.where(inside, self.height * (1.0 - np.minimum(u * u, 1.0)) ** 4, 0.0)

    def _mass_primitive(self, s):
        u = np.asarray(s, dtype=float) / self.range_
        q = u - 4 * u**3 / 3 + 6 * u**5 / 5 - 4 * u**7 / 7 + u**9 / 9
        q_edge = 128.0 / 315.0
        return self.height * self.range_ * (q + q_edge)

    def _moment_primitive(self, s):
        u = np.asarray(s, dtype=float) / self.range_
        return -self.height * self.range_**2 * (1.0 - u * u) ** 5 / 10.0

    def transverse_slice(self, dy):
        """Slice ``c (A - (s/R)^2)^4`` with ``A = 1 - (dy/R)^2``: an even
        polynomial supported on ``|s| <= R sqrt(A)``."""
        r = self.range_
        if abs(dy) >= r:
            return None
        a_fac = 1.0 - (dy / r) ** 2
        coeffs = [
            self.height * math.comb(4, j) * a_fac ** (4 - j) * (-1.0) ** j / r ** (2 * j)
            for j in range(5)
        ]
        return _EvenPolynomialKernel(r * math.sqrt(a_fac), coeffs)


class _TabulatedKernel(Kernel):
    """Piecewise-linear kernel through given samples.

    Integrals are exact for the interpolant (per-segment closed forms),
    so downstream identities hold at machine precision relative to the
    tabulated shape.
    """

    shape = "tabulated"

    def __init__(self, s, j):
        s = np.asarray(s, dtype=float)
        j = np.asarray(j, dtype=float)
        if s.ndim != 1 or s.size < 2 or s.shape != j.shape:
            raise ValidationError("tabulated kernel needs matching 1-d samples")
        if np.any(np.diff(s) <= 0):
            raise ValidationError("tabulated kernel abscissae must strictly increase")
        if np.any(j < 0):
            raise ValidationError("tabulated kernel values must be non-negative")
        self.s = s
        self.j = j
        self.max_spacing = float(np.max(np.diff(s)))
        # exact prefix integrals of the linear interpolant at the nodes
        ds = np.diff(s)
        self._prefix_mass = np.concatenate(
            ([0.0], np.cumsum(0.5 * (j[:-1] + j[1:]) * ds))
        )
        seg_moment = (
            j[:-1] * (s[1:] ** 2 - s[:-1] ** 2) / 2
            + (j[1:] - j[:-1])
            / ds
            * (
                (s[1:] ** 3 - s[:-1] ** 3) / 3
                - s[:-1] * (s[1:] ** 2 - s[:-1] ** 2) / 2
            )
        )
        self._prefix_moment = np.concatenate(([0.0], np.cumsum(seg_moment)))
        rng = float(max(abs(s[0]), abs(s[-1])))
        tol = 1e-9 * max(1.0, float(j.max()))
        mirrored = np.interp(-s, s, j, left=0.0, right=0.0)
        even = bool(np.max(np.abs(j - mirrored)) <= tol)
        pos = j[s >= 0]
        decreasing = bool(np.all(np.diff(pos) <= tol))
        super().__init__(rng, even=even, decreasing=decreasing)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, self.s, self.j, left=0.0, right=0.0)

    def _segment_split(self, x):
        x = np.clip(np.asarray(x, dtype=float), self.s[0], self.s[-1])
        k = np.clip(np.searchsorted(self.s, x, side="right") - 1, 0, self.s.size - 2)
        return x, k

    def _mass_primitive(self, x):
        x, k = self._segment_split(x)
        s0, s1 = self.s[k], self.s[k + 1]
        j0, j1 = self.j[k], self.j[k + 1]
        c = (j1 - j0) / (s1 - s0)
        partial = j0 * (x - s0) + 0.5 * c * (x - s0) ** 2
        return self._prefix_mass[k] + partial

    def _moment_primitive(self, x):
        x, k = self._segment_split(x)
        s0, s1 = self.s[k], self.s[k + 1]
        j0, j1 = self.j[k], self.j[k + 1]
        c = (j1 - j0) / (s1 - s0)
        partial = j0 * (x * x - s0 * s0) / 2 + c * (
            (x**3 - s0**3) / 3 - s0 * (x * x - s0 * s0) / 2
        )
        return self._prefix_moment[k] + partial

    def _clip(self, s):
        return np.clip(s, self.s[0], self.s[-1])

    def require_resolution(self, h):
        if self.max_spacing > h / 2 + 1e-15:
            raise CoarseKernelTable(
                f"tabulated kernel spacing {self.max_spacing:g} exceeds h/2 = "
                f"{h / 2:g}; supply a finer table"
            )


# ----------------------------------------------------------------------
# factories


def box_kernel(range_=1.0, mass=1.0):
    """Constant kernel on ``[-R, R]`` with the given total mass."""
    return _BoxKernel(range_, mass / (2.0 * range_))


def triangle_kernel(range_=1.0, mass=1.0):
    return _TriangleKernel(range_, mass / range_)


def truncated_gaussian_kernel(range_=1.0, mass=1.0, sigma=None):
    if sigma is None:
        sigma = range_ / 3.0
    raw = sigma * math.sqrt(2 * math.pi) * erf(range_ / (sigma * math.sqrt(2)))
    return _TruncatedGaussianKernel(range_, mass / raw, sigma)


def bump_kernel(range_=1.0, mass=1.0):
    return _BumpKernel(range_, 315.0 * mass / (256.0 * range_))


def tabulated_kernel(s, j):
    return _TabulatedKernel(s, j)


def load_kernel_csv(path):
    """Two-column CSV ``s, J(s)``; a non-numeric first row is a header."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ValidationError(
                    f"{path}:{line_no + 1}: expected two comma-separated columns"
                )
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except ValueError:
                if line_no == 0:
                    continue  # header
                raise ValidationError(f"{path}:{line_no + 1}: non-numeric entry")
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least two sample rows")
    data = np.asarray(rows)
    return _TabulatedKernel(data[:, 0], data[:, 1])


# ----------------------------------------------------------------------
# pair potentials


class WPotential:
    """Kernel-derived pair potential on measure space.

    ``one_component``: vanishes beyond the kernel range, convex on each
    half line only.  ``two_component``: convex everywhere, exactly
    ``w_offset + slope_at_infinity*|x|`` beyond the range.
    """

    def __init__(self, variant, kernel):
        if variant not in ("one_component", "two_component"):
            raise ValidationError(f"unknown W variant {variant!r}")
        if variant == "two_component" and not kernel.even:
            raise ValidationError("two-component potential requires an even kernel")
        self.variant = variant
        self.kernel = kernel
        r = kernel.range_
        if variant == "two_component":
            self.w_offset = -float(kernel.first_moment_between(0.0, r))
            self.slope_at_infinity = kernel.total_mass / 2.0
        else:
            self.w_offset = None
            self.slope_at_infinity = 0.0
        self._fast = self._closed_form()

    def _closed_form(self):
        """Few-pass polynomial evaluators for the hot kernel shapes."""
        k = self.kernel
        r = k.range_
        if k.shape == "box":
            c = k.height
            if self.variant == "one_component":
                return lambda u: c * np.clip(r - np.abs(u), 0.0, None) ** 2
            alpha, slope = self.w_offset, self.slope_at_infinity

            def two_box(u):
                u = np.abs(u)
                return np.where(u > r, alpha + slope * u, 0.5 * c * u * u)

            return two_box
        if k.shape == "triangle":
            c = k.height
            if self.variant == "one_component":
                return lambda u: c * np.clip(r - np.abs(u), 0.0, None) ** 3 / (3.0 * r)
            alpha, slope = self.w_offset, self.slope_at_infinity

            def two_tri(u):
                u = np.abs(u)
                uc = np.minimum(u, r)
                inside = c * (uc * uc / 2.0 - uc**3 / (6.0 * r))
                return np.where(u > r, alpha + slope * u, inside)

            return two_tri
        return None

    def __call__(self, u):
        u = np.abs(np.asarray(u, dtype=float))
        if self._fast is not None:
            return self._fast(u)
        k = self.kernel
        r = k.range_
        if self.variant == "one_component":
            uc = np.minimum(u, r)
            w = k.sym_first_moment_between(uc, r) - uc * k.sym_mass_between(uc, r)
            return np.where(u >= r, 0.0, w)
        uc = np.minimum(u, r)
        inside = uc * k.mass_between(0.0, uc) - k.first_moment_between(0.0, uc)
        tail = self.w_offset + self.slope_at_infinity * u
        return np.where(u > r, tail, inside)

    def value_at_zero(self):
        return float(self(0.0))


def w_one_component(kernel) -> WPotential:
    """Potential with ``W'' = J(u) + J(-u)``, vanishing at infinity."""
    return WPotential("one_component", kernel)


def w_two_component(kernel) -> WPotential:
    """Double antiderivative of the kernel from 0: globally convex."""
    return WPotential("two_component", kernel)


# ----------------------------------------------------------------------
# dimensional reduction


def reduce_dimension(u_radial, d, n_samples=4097, tol=1e-9):
    """One-dimensional kernel of a radial kernel in ``d`` dimensions.

    Integrates the radial evaluator over the ``d-1`` transverse
    directions for each longitudinal offset and returns the result as a
    tabulated kernel with the same range.  Panel counts double until the
    integral is stable to ``tol``.
    """
    if d < 2:
        raise ValidationError("dimensional reduction needs d >= 2")
    if not u_radial.decreasing:
        raise ValidationError("radial kernel must be decreasing")
    r = u_radial.range_
    omega = 2.0 * math.pi ** ((d - 1) / 2.0) / gamma((d - 1) / 2.0)
    s = np.linspace(0.0, r, (n_samples + 1) // 2)

    def transverse(si, panels):
        rmax = math.sqrt(max(r * r - si * si, 0.0))
        if rmax == 0.0:
            return 0.0
        nodes, weights = np.polynomial.legendre.leggauss(10)
        edges = np.linspace(0.0, rmax, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        pts = mid[:, None] + half[:, None] * nodes[None, :]
        vals = u_radial(np.sqrt(si * si + pts * pts)) * pts ** (d - 2)
        return float(np.sum(half[:, None] * weights[None, :] * vals))

    jbar = np.empty_like(s)
    for i, si in enumerate(s):
        panels, prev = 8, transverse(si, 8)
        while True:
            panels *= 2
            cur = transverse(si, panels)
            if abs(cur - prev) <= tol * max(1.0, abs(cur)):
                jbar[i] = cur
                break
            if panels > 4096:
                raise QuadratureFailure(
                    f"transverse integral at offset {si:g} did not stabilize"
                )
            prev = cur
    jbar *= omega
    jbar[-1] = 0.0
    full_s = np.concatenate((-s[::-1], s[1:]))
    full_j = np.concatenate((jbar[::-1], jbar[1:]))
    return _TabulatedKernel(full_s, full_j)
