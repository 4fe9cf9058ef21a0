"""Cell-exact banded quadrature for step-interpolant profiles.

A grid profile is read as the right-continuous step function taking the
value ``m_i`` on the cell ``[x_i, x_{i+1})`` for ``i = 0..n-2``; beyond
the window the function equals the exact asymptotes (``a`` on the left
tail, ``b`` on the right).  The last node's sample is the boundary
value and carries no cell of its own.

All energy integrals of such step functions against a compactly
supported kernel reduce to banded coefficient arrays:

* ``band[d]``   = kernel integrated over a cell-cell pair at offset ``d``
* suffix sums of the band close the half-infinite tails exactly
* ``node_band`` = kernel integrated over one cell, evaluated at a node,
  used by the Euler-Lagrange fixed-point updates.

The coefficients are assembled from the kernels' exact antiderivative
primitives, so the quadrature is exact for the step interpolant; the
only discretization error anywhere is the step representation itself.

The measure-side sums (pair potentials against density atoms) live here
too: the step interpolant's jump measure is exactly the node-atom
density, which is what makes the interaction identities in
``functionals`` hold to machine precision.
"""

from __future__ import annotations

import numpy as np

from .grids import Grid

__all__ = ["Discretization", "discretization", "pair_sum", "abs_moment_sum"]


def _banded_conv(seq, band):
    """``out[k] = Σ_j band[c + (k - j)] seq[j]`` with ``c = (len-1)/2``."""
    if band.size <= seq.size:
        return np.convolve(seq, band, mode="same")
    c = (band.size - 1) // 2
    out = np.zeros_like(seq)
    for d in range(-c, c + 1):
        w = band[c + d]
        if w == 0.0:
            continue
        lo, hi = max(0, d), min(seq.size, seq.size + d)
        out[lo:hi] += w * seq[lo - d : hi - d]
    return out


def _cell_cell_band(mass, moment, h, d_max):
    """``∫∫_{cell_0 x cell_d} K(x - y) dx dy`` for ``d = 0..d_max``.

    With ``u = x - y`` the pair integral is ``∫ (h - |u - dh|) K(u) du``
    over ``[dh - h, dh + h]``, split at ``u = dh`` into two pieces that
    are linear in ``u``.
    """
    d = np.arange(d_max + 1, dtype=float)
    c = d * h
    left = (h - c) * mass(c - h, c) + moment(c - h, c)
    right = (h + c) * mass(c, c + h) - moment(c, c + h)
    return left + right


class Discretization:
    """Banded coefficients binding one kernel to one grid spacing."""

    def __init__(self, kernel, grid: Grid):
        kernel.require_resolution(grid.h)
        self.kernel = kernel
        self.grid = grid
        h = grid.h
        self.h = h
        self.n_cells = grid.n - 1
        d_max = int(np.ceil(kernel.range_ / h)) + 1

        # symmetrized band: quadratic forms with J(s) + J(-s)
        self.band_sym = _cell_cell_band(
            kernel.sym_mass_between, kernel.sym_first_moment_between, h, d_max
        )
        # plain band: bilinear forms with J itself (two-sided offsets)
        pos = _cell_cell_band(kernel.mass_between, kernel.first_moment_between, h, d_max)
        neg = _cell_cell_band(
            lambda lo, hi: kernel.mass_between(-hi, -lo),
            lambda lo, hi: -kernel.first_moment_between(-hi, -lo),
            h,
            d_max,
        )
        self.band_lin = np.concatenate((neg[1:][::-1], pos))  # d = -d_max..d_max
        self.d_max = d_max

        # node-cell band for Euler-Lagrange convolutions:
        # A[d] = ∫_{(d-1)h}^{dh} J, nonzero for |d| <= d_max + 1
        dd = np.arange(-d_max - 1, d_max + 2, dtype=float)
        self.node_band = np.asarray(kernel.mass_between((dd - 1) * h, dd * h))
        self.node_offsets = np.arange(-d_max - 1, d_max + 2)
        # node-centered variant (midpoint cells): second-order at nodes
        self.center_band = np.asarray(
            kernel.mass_between((dd - 0.5) * h, (dd + 0.5) * h)
        )

        # suffix sums close the tails: sum of band entries beyond offset k
        self.sym_suffix = np.concatenate(
            (np.cumsum(self.band_sym[::-1])[::-1], [0.0])
        )  # sym_suffix[k] = sum_{d >= k} band_sym[d]
        lin = self.band_lin
        self.lin_suffix = np.concatenate((np.cumsum(lin[::-1])[::-1], [0.0]))
        self.lin_prefix = np.concatenate(([0.0], np.cumsum(lin)))
        nb = self.node_band
        self.node_suffix = np.concatenate((np.cumsum(nb[::-1])[::-1], [0.0]))
        self.node_prefix = np.concatenate(([0.0], np.cumsum(nb)))

    # -- closures ---------------------------------------------------------

    def left_closure_sym(self, nc):
        """``W(cell_k, left tail)`` for each cell: suffix of the band."""
        k = np.arange(nc)
        return self.sym_suffix[np.minimum(k + 1, self.d_max + 1)]

    def tail_tail_sym(self, nc):
        """``W(left tail, right tail)``: zero once the window exceeds R."""
        d = np.arange(nc + 1, self.d_max + 1)
        if d.size == 0:
            return 0.0
        return float(np.sum((d - nc) * self.band_sym[d]))

    # -- quadratic energy: ∬ (m(x)-m(y))^2 J(x-y) dx dy -------------------

    def quadratic_energy(self, values, a, b):
        c = values[:-1]
        nc = c.size
        total = 0.0
        for d in range(1, min(self.d_max, nc - 1) + 1):
            diff = c[d:] - c[:-d]
            total += self.band_sym[d] * float(diff @ diff)
        cl = self.left_closure_sym(nc)
        cr = cl[::-1]
        da = c - a
        db = c - b
        total += float(cl @ (da * da)) + float(cr @ (db * db))
        total += self.tail_tail_sym(nc) * (a - b) ** 2
        return total

    def quadratic_gradient(self, values, a, b):
        """d/dm_k of :meth:`quadratic_energy`; last node is not a variable."""
        c = values[:-1]
        nc = c.size
        full = np.concatenate((self.band_sym[::-1], self.band_sym[1:]))
        conv = _banded_conv(c, full)
        row = _banded_conv(np.ones(nc), full)
        cl = self.left_closure_sym(nc)
        cr = cl[::-1]
        grad_cells = 2.0 * (
            (row + cl + cr) * c - conv - cl * a - cr * b
        )
        grad = np.zeros_like(values)
        grad[:-1] = grad_cells
        return grad

    # -- bilinear excess: ∬ J(x-y) [m(x) n(y) - ref(x)] dx dy --------------

    def _lin_closures(self, nc):
        """Tail weights for the plain band, per cell index.

        Returns four arrays: pair weights of (cell_k, left tail),
        (cell_k, right tail) for the first argument in the cell, and
        (left tail, cell_j), (right tail, cell_j) for the first argument
        in a tail.
        """
        d_max = self.d_max
        k = np.arange(nc)
        cell_left = self.lin_suffix[np.minimum(k + 1 + d_max, 2 * d_max + 1)]
        cell_right = self.lin_prefix[np.maximum(k - nc + d_max + 1, 0)]
        left_cell = self.lin_prefix[np.maximum(d_max - k, 0)]
        right_cell = self.lin_suffix[np.minimum(nc - k + d_max, 2 * d_max + 1)]
        return cell_left, cell_right, left_cell, right_cell

    def _opposite_tail_weights(self, nc):
        d = np.arange(nc + 1, self.d_max + 1)
        if d.size == 0:
            return 0.0, 0.0
        lin = self.band_lin
        w_lr = float(np.sum((d - nc) * lin[self.d_max - d]))  # x left, y right
        w_rl = float(np.sum((d - nc) * lin[self.d_max + d]))
        return w_lr, w_rl

    def bilinear_excess(self, m_values, m_asym, n_values, n_asym, split=None):
        """``∬ J(x-y) [m(x) n(y) - ref(x)] dx dy`` with step reference.

        The reference is forced by tail finiteness: it equals the
        product of left asymptotes left of the split node and the
        product of right asymptotes from it on.  ``split`` defaults to
        the node nearest 0 and is irrelevant when the two products
        coincide (the bulk-consistent binary case).
        """
        ma, mb = m_asym
        na, nb = n_asym
        ref_l = ma * na
        ref_r = mb * nb
        cm = m_values[:-1]
        cn = n_values[:-1]
        nc = cm.size
        d_max = self.d_max
        lin = self.band_lin
        if split is None:
            split = int(np.argmin(np.abs(self.grid.x)))
        ref = np.where(np.arange(nc) < split, ref_l, ref_r)
        total = 0.0
        row = np.zeros(nc)  # truncated in-window row sums for the reference
        for d in range(-min(d_max, nc - 1), min(d_max, nc - 1) + 1):
            w = lin[d_max + d]
            if w == 0.0:
                continue
            if d >= 0:
                total += w * float(cm[d:] @ cn[: nc - d])
                row[d:] += w
            else:
                total += w * float(cm[: nc + d] @ cn[-d:])
                row[: nc + d] += w
        total -= float(ref @ row)
        cell_l, cell_r, left_c, right_c = self._lin_closures(nc)
        total += float(cell_l @ (cm * na - ref))
        total += float(cell_r @ (cm * nb - ref))
        total += float(left_c @ (ma * cn - ref_l))
        total += float(right_c @ (mb * cn - ref_r))
        w_lr, w_rl = self._opposite_tail_weights(nc)
        total += w_lr * (ma * nb - ref_l) + w_rl * (mb * na - ref_r)
        return total

    def quadratic_cross(self, u_values, v_values, asym):
        """``∬ (u(x1) - v(x2))^2 J(x1 - x2) dx1 dx2`` for shared asymptotes.

        Ordered-pair cross form between two fields on the same grid with
        the same tail constants; reduces to :meth:`quadratic_energy`
        (for even kernels) when the fields coincide.
        """
        va, vb = asym
        cu = u_values[:-1]
        cv = v_values[:-1]
        nc = cu.size
        d_max = self.d_max
        lin = self.band_lin
        total = 0.0
        for d in range(-min(d_max, nc - 1), min(d_max, nc - 1) + 1):
            w = lin[d_max + d]
            if w == 0.0:
                continue
            if d >= 0:
                diff = cu[d:] - cv[: nc - d]
            else:
                diff = cu[: nc + d] - cv[-d:]
            total += w * float(diff @ diff)
        cell_l, cell_r, left_c, right_c = self._lin_closures(nc)
        total += float(cell_l @ (cu - va) ** 2) + float(cell_r @ (cu - vb) ** 2)
        total += float(left_c @ (va - cv) ** 2) + float(right_c @ (vb - cv) ** 2)
        w_lr, w_rl = self._opposite_tail_weights(nc)
        total += (w_lr + w_rl) * (va - vb) ** 2
        return total

    def bilinear_cell_row(self, n_values, n_asym):
        """Cell-averaged convolution ``∫_{cell_k} (J * n)(x) dx / h``.

        This is the stationarity kernel of the bilinear energy: the
        gradient of ``∬ J m n`` with respect to the cell value ``m_k``
        equals ``h`` times this row.
        """
        na, nb = n_asym
        cn = n_values[:-1]
        nc = cn.size
        conv = _banded_conv(cn, self.band_lin)
        cell_l, cell_r, _, _ = self._lin_closures(nc)
        return (conv + cell_l * na + cell_r * nb) / self.h

    def node_convolution(self, values, asym):
        """``(J * step)(x_k)`` at every node, tails closed exactly."""
        va, vb = asym
        c = values[:-1]
        nc = c.size
        n = values.size
        off = self.node_offsets  # d = k - j
        out = np.zeros(n)
        for idx, d in enumerate(off):
            w = self.node_band[idx]
            if w == 0.0:
                continue
            k_lo = max(0, d)
            k_hi = min(n, nc + d)
            if k_lo < k_hi:
                out[k_lo:k_hi] += w * c[k_lo - d : k_hi - d]
        k = np.arange(n)
        # left tail: offsets d >= k + 1 ; right tail: d <= k - nc
        lo_idx = np.minimum(k + 1 - off[0], off.size)
        out += va * self.node_suffix[lo_idx]
        hi_idx = np.maximum(k - nc - off[0] + 1, 0)
        out += vb * self.node_prefix[hi_idx]
        return out

    def node_convolution_centered(self, values, asym):
        """``(J * field)(x_k)`` with node-centered cells.

        Second-order at the nodes for smooth fields; used by the
        differentiated-equation diagnostics.  All ``n`` samples carry a
        cell; tails start half a cell beyond the window.
        """
        va, vb = asym
        n = values.size
        off = self.node_offsets
        out = np.zeros(n)
        for idx, d in enumerate(off):
            w = self.center_band[idx]
            if w == 0.0:
                continue
            k_lo = max(0, d)
            k_hi = min(n, n + d)
            if k_lo < k_hi:
                out[k_lo:k_hi] += w * values[k_lo - d : k_hi - d]
        k = np.arange(n)
        r = self.kernel.range_
        h = self.h
        out += va * np.asarray(self.kernel.mass_between((k + 0.5) * h, r + h))
        out += vb * np.asarray(
            self.kernel.mass_between(-r - h, -(n - 1 - k + 0.5) * h)
        )
        return out


def discretization(kernel, grid: Grid) -> Discretization:
    """Cached coefficient bundle for a kernel/grid pair."""
    key = (round(grid.h, 14), grid.n)
    cache = kernel._disc_cache
    if key not in cache:
        cache[key] = Discretization(kernel, grid)
    return cache[key]


# ----------------------------------------------------------------------
# measure-side sums


def pair_sum(w_potential, x1, w1, x2=None, w2=None, chunk=2048):
    """``Σ_ij w1_i w2_j W(x1_i - x2_j)`` for sorted atom positions.

    For the two-component potential the exact linear tail is summed in
    closed form via prefix moments and only the near-range part is
    evaluated pointwise, so the cost is one banded double sum.
    """
    x1 = np.asarray(x1, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    if x2 is None:
        x2, w2 = x1, w1
    else:
        x2 = np.asarray(x2, dtype=float)
        w2 = np.asarray(w2, dtype=float)
    r = w_potential.kernel.range_
    total = 0.0
    if w_potential.variant == "two_component":
        alpha = w_potential.w_offset
        slope = w_potential.slope_at_infinity
        total += alpha * float(w1.sum()) * float(w2.sum())
        total += slope * abs_moment_sum(x1, w1, x2, w2)

        def near(dx):
            return w_potential(dx) - (alpha + slope * np.abs(dx))

    else:
        near = w_potential
    for start in range(0, x1.size, chunk):
        xs = x1[start : start + chunk]
        ws = w1[start : start + chunk]
        lo = np.searchsorted(x2, xs[0] - r)
        hi = np.searchsorted(x2, xs[-1] + r, side="right")
        if lo >= hi:
            continue
        dx = xs[:, None] - x2[None, lo:hi]
        # both variants of `near` vanish identically beyond the range
        total += float(ws @ near(dx) @ w2[lo:hi])
    return total


def abs_moment_sum(x1, w1, x2=None, w2=None):
    """``Σ_ij w1_i w2_j |x1_i - x2_j|`` in O(N log N) via merged prefixes."""
    x1 = np.asarray(x1, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    if x2 is None:
        x2, w2 = x1, w1
    # Σ_j w2_j |x - x2_j| = x (W_below - W_above) - (P_below - P_above)
    cum_w = np.concatenate(([0.0], np.cumsum(w2)))
    cum_p = np.concatenate(([0.0], np.cumsum(w2 * x2)))
    idx = np.searchsorted(x2, x1, side="left")
    w_below = cum_w[idx]
    p_below = cum_p[idx]
    w_above = cum_w[-1] - w_below
    p_above = cum_p[-1] - p_below
    per_atom = x1 * (w_below - w_above) - (p_below - p_above)
    return float(w1 @ per_atom)
