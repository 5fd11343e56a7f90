"""Block updater for continuous noise, driven by polynomial surrogates.

Instead of pattern discovery, single entries of the block vectors are
adjusted one at a time.  Changing one entry only affects one column (or row)
of the reconstruction, so the exact one-dimensional cost is sampled at a few
points, an interpolating polynomial is fitted, and the polynomial is
minimized over [0, 1] in closed form.  The surrogate degree grows with the
cycle count: low degrees move fast early on, high degrees polish.

Any additive objective can be plugged in; squared Frobenius is the default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .matrix import NonNegMatrix, maxtimes_values_excluding
from .objective import frobenius_sq

__all__ = [
    "CancerParams",
    "CancerUpdater",
    "PolyFit",
    "update_block",
    "adjust_one_element",
    "polymin",
    "column_cost",
    "updates_per_block",
    "surrogate_degree",
]

_SIGN_GRID = 257  # sign-change localization grid for the surrogate derivative
_BISECT_ITERS = 64


@dataclass(frozen=True)
class CancerParams:
    """max_degree: largest surrogate degree (> 2); update_fraction: fraction
    of the block vector entries adjusted per update (0 < f < 1).  Abscissae
    are equispaced by default; ``random_abscissae`` samples them instead."""

    max_degree: int = 16
    update_fraction: float = 0.1
    random_abscissae: bool = False

    def __post_init__(self):
        if self.max_degree <= 2:
            raise ValueError("max_degree must be > 2")
        if not (0 < self.update_fraction < 1):
            raise ValueError("update_fraction must be in (0, 1)")


def updates_per_block(n, m, fraction):
    """Number of adjust passes per block update, floor(f*(n+m)/2), at least 1."""
    return max(1, int(fraction * (n + m) / 2))


def surrogate_degree(count, rank, max_degree):
    """Degree schedule 2 + (completed cycles mod max_degree)."""
    return 2 + ((count - 1) // rank) % max_degree


def _horner(coeffs, x):
    """Evaluate polynomials given as (deg+1, m) ascending coefficients."""
    res = np.broadcast_to(coeffs[-1], np.broadcast(coeffs[-1], x).shape).copy()
    for d in range(coeffs.shape[0] - 2, -1, -1):
        res = res * x + coeffs[d]
    return res


@dataclass(frozen=True)
class PolyFit:
    """Interpolating polynomial through deg+1 samples (ascending coeffs)."""

    degree: int
    coefficients: np.ndarray
    sample_x: np.ndarray
    sample_y: np.ndarray

    @classmethod
    def fit(cls, xs, ys):
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if xs.ndim != 1 or xs.shape != ys.shape:
            raise ValueError("samples must be two equal-length vectors")
        deg = xs.size - 1
        if deg < 2:
            raise ValueError("need at least 3 samples (degree >= 2)")
        vander = xs[:, None] ** np.arange(deg + 1)
        coeffs = np.linalg.solve(vander, ys)
        fitted = cls(deg, coeffs, xs, ys)
        resid = np.abs(fitted(xs) - ys)
        if resid.max() > 1e-8 * max(1.0, float(np.abs(ys).max())):
            raise ValueError("interpolation residual exceeds tolerance")
        return fitted

    def __call__(self, x):
        return _horner(self.coefficients[:, None], np.asarray(x, float))


def column_cost(a_col, n_col, b, x, obj, observed=None):
    """Exact cost of one column when its block entry is set to ``x``:
    sum of phi(a_i, max(n_i, b_i * x)) over observed entries."""
    a = np.asarray(a_col, dtype=np.float64)
    nv = np.asarray(n_col, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    vals = obj.phi(a, np.maximum(nv, bv * x))
    if observed is not None:
        vals = np.where(np.asarray(observed, bool), vals, 0.0)
    return float(vals.sum())


def _abscissae(deg, rng):
    if rng is None:
        return (np.arange(deg + 1) + 0.5) / (deg + 1)
    pts = np.sort(rng.random(deg + 1))
    if np.unique(pts).size < deg + 1:  # vanishing probability; keep solvable
        return (np.arange(deg + 1) + 0.5) / (deg + 1)
    return pts


def _polymin_batch(a_cols, n_cols, b, deg, obj, observed, x_max, rng):
    """Surrogate-minimize every column cost over [0, x_max].

    Returns (errs, xs) with the surrogate minimum value and its location per
    column.  Candidates are the real roots of the surrogate derivative
    (located by sign changes and refined by bisection) plus both interval
    endpoints; ties resolve to the smallest x.
    """
    if deg < 2:
        raise ValueError("degree must be >= 2")
    a_cols = np.asarray(a_cols, dtype=np.float64)
    n_cols = np.asarray(n_cols, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    ncols = a_cols.shape[1]
    w = None if observed is None else np.asarray(observed, bool)

    def costs_at(x):
        vals = obj.phi(a_cols, np.maximum(n_cols, (b * x)[:, None]))
        if w is not None:
            vals = np.where(w, vals, 0.0)
        return vals.sum(axis=0)

    if x_max <= 0 or not b.any():
        # degenerate interval, or a zero b making every cost constant in x:
        # the lowest candidate (x = 0) wins outright
        zero = costs_at(0.0)
        return zero, np.zeros(ncols)

    pts = _abscissae(deg, rng) * x_max
    samples = np.stack([costs_at(x) for x in pts])  # (deg+1, ncols)
    vander = pts[:, None] ** np.arange(deg + 1)
    coeffs = np.linalg.solve(vander, samples)  # (deg+1, ncols)
    dcoeffs = coeffs[1:] * np.arange(1, deg + 1)[:, None]

    grid = np.linspace(0.0, x_max, _SIGN_GRID)
    dvals = _horner(dcoeffs, grid[:, None])  # (grid, ncols)
    signs = np.sign(dvals)

    # interior candidates: grid points where the derivative vanishes, plus
    # bisection-refined roots inside cells with a strict sign change
    zero_t, zero_c = np.nonzero(signs == 0)
    flip_t, flip_c = np.nonzero(signs[:-1] * signs[1:] < 0)
    lo = grid[flip_t]
    hi = grid[flip_t + 1]
    if flip_c.size:
        dcf = dcoeffs[:, flip_c]
        slo = signs[flip_t, flip_c]
        for _ in range(_BISECT_ITERS):
            mid = 0.5 * (lo + hi)
            smid = np.sign(_horner(dcf, mid))
            hit = smid == 0
            same = smid == slo
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
            lo = np.where(hit, mid, lo)
            hi = np.where(hit, mid, hi)
    roots = 0.5 * (lo + hi)

    interior_c = np.concatenate([zero_c, flip_c])
    interior_x = np.concatenate([grid[zero_t], roots])
    per_col = np.bincount(interior_c, minlength=ncols) if interior_c.size else \
        np.zeros(ncols, dtype=np.intp)
    width = int(per_col.max()) if interior_c.size else 0

    cand = np.full((width + 2, ncols), x_max)
    cand[0] = 0.0
    if interior_c.size:
        order = np.lexsort((interior_x, interior_c))
        sc = interior_c[order]
        sx = interior_x[order]
        starts = np.zeros(ncols, dtype=np.intp)
        np.cumsum(per_col[:-1], out=starts[1:])
        slot = np.arange(sc.size) - starts[sc] + 1
        cand[slot, sc] = sx

    gvals = _horner(coeffs, cand)
    pick = np.argmin(gvals, axis=0)  # rows are x-ascending: ties take lowest x
    cols = np.arange(ncols)
    xs = np.maximum(cand[pick, cols], 0.0)
    return gvals[pick, cols], xs


def polymin(a_col, n_col, b, deg, obj=None, observed=None, x_max=1.0, rng=None):
    """Approximately minimize one column cost via its polynomial surrogate.

    Returns (approximate error, x*) where the error is the surrogate value
    at x*.  A degenerate interval (x_max <= 0) returns the exact cost at 0.
    """
    obj = obj if obj is not None else frobenius_sq()
    a = np.asarray(a_col, dtype=np.float64)[:, None]
    nv = np.asarray(n_col, dtype=np.float64)[:, None]
    w = None if observed is None else np.asarray(observed, bool)[:, None]
    errs, xs = _polymin_batch(a, nv, np.asarray(b, float), deg, obj, w, x_max, rng)
    return float(errs[0]), float(xs[0])


def _adjust(a, w, N, b, c, deg, obj, rng):
    """One pass of adjust-one-element on plain arrays; returns the new c."""
    current = np.maximum(N, np.outer(b, c))
    base_vals = obj.phi(a, current)
    if w is not None:
        base_vals = np.where(w, base_vals, 0.0)
    base = base_vals.sum(axis=0)
    errs, xs = _polymin_batch(a, N, b, deg, obj, w, 1.0, rng)
    gains = base - errs
    j = int(np.argmax(gains))
    out = c.copy()
    out[j] = xs[j]  # written even when no column improves
    return out


def adjust_one_element(A, N, b, c, deg, obj=None, rng=None):
    """Replace the single entry of c whose update most improves the fit.

    For every column the exact current cost is compared with the surrogate
    minimum from ``polymin``; the best column is written unconditionally.
    """
    obj = obj if obj is not None else frobenius_sq()
    if isinstance(A, NonNegMatrix):
        a = A.filled(0.0)
        w = None if A.is_fully_observed else A.observed
    else:
        a = np.asarray(A, dtype=np.float64)
        w = None
    return _adjust(
        a,
        w,
        np.asarray(N, dtype=np.float64),
        np.asarray(b, dtype=np.float64),
        np.asarray(c, dtype=np.float64),
        deg,
        obj,
        rng,
    )


def update_block(A, B, C, count, params, obj=None, rng=None):
    """Refine the current block by alternating single-element updates.

    The block vectors start from their current values; c and b are adjusted
    alternately floor(f*(n+m)/2) times (at least once) with the surrogate
    degree from the cycle schedule.  Expects data scaled to [0, 1]; see the
    factorize pipeline.
    """
    obj = obj if obj is not None else frobenius_sq()
    n, m = A.shape
    k = B.shape[1]
    block = (count - 1) % k + 1
    N = maxtimes_values_excluding(B, C, block)
    niters = updates_per_block(n, m, params.update_fraction)
    deg = surrogate_degree(count, k, params.max_degree)
    b = B[:, block - 1].copy()
    c = C[block - 1, :].copy()
    if isinstance(A, NonNegMatrix):
        a = A.filled(0.0)
        w = None if A.is_fully_observed else A.observed
    else:
        a = np.asarray(A, dtype=np.float64)
        w = None
    at = np.ascontiguousarray(a.T)
    wt = None if w is None else np.ascontiguousarray(w.T)
    Nt = np.ascontiguousarray(N.T)
    for _ in range(niters):
        c = _adjust(a, w, N, b, c, deg, obj, rng)
        b = _adjust(at, wt, Nt, c, b, deg, obj, rng)
    return b, c


class CancerUpdater:
    """BlockUpdater carrying its objective and abscissa randomness."""

    def __init__(self, params=None, objective=None, seed=None):
        self.params = params if params is not None else CancerParams()
        self.objective = objective if objective is not None else frobenius_sq()
        self._rng = np.random.default_rng(seed)

    def reseed(self, seed):
        self._rng = np.random.default_rng(seed)

    def update_block(self, A, B, C, count):
        rng = self._rng if self.params.random_abscissae else None
        return update_block(A, B, C, count, self.params, self.objective, rng)
