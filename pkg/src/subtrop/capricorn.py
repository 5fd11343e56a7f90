"""Block updater for discrete (flipping) noise.

A rank-1 block has all its rows proportional to each other, so two rows that
locally belong to the same block have a locally constant elementwise ratio.
The updater finds candidate blocks by bucketing log-ratios against a seed
row, recovers block values with a closed-form least-squares fit, and then
expands the block row- and column-wise wherever the expansion would improve
coverage without overshooting the data too much.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix import NonNegMatrix, PatternMatrix, maxtimes_values_excluding

__all__ = [
    "CapricornParams",
    "CapricornUpdater",
    "update_block",
    "correlations_with_row",
    "find_row_set",
    "recover_block",
    "add_rows",
    "pattern_correlation",
    "expansion_impact",
]


@dataclass(frozen=True)
class CapricornParams:
    """Knobs for block discovery.

    bucket_size: minimum bucket population for a ratio set to count.
    delta: width of a log-ratio bucket.
    theta: largest acceptable expansion impact (overcoverage / improvement).
    tau: rows whose pattern correlation trails the runner-up by more than
        tau are dropped from a block pattern.
    """

    bucket_size: int = 3
    delta: float = 0.01
    theta: float = 0.5
    tau: float = 0.5

    def __post_init__(self):
        if self.bucket_size < 1:
            raise ValueError("bucket_size must be >= 1")
        if not (self.delta > 0):
            raise ValueError("delta must be positive")
        if not (self.theta > 0):
            raise ValueError("theta must be positive")
        if not (0 <= self.tau <= 1):
            raise ValueError("tau must be within [0, 1]")


def _residual_values(M):
    """Plain array view of a residual: NaN where covered/missing."""
    if isinstance(M, NonNegMatrix):
        return M.values
    return np.asarray(M, dtype=np.float64)


def find_row_set(u, v, bucket_size, delta):
    """Indices where u/v is nearly constant, found by bucketing log-ratios.

    Only indices where both vectors are strictly positive (and not NaN) are
    considered.  The log-ratio range is split into buckets of width
    ``delta`` and the most populous bucket wins (lowest bucket on ties).
    Returns an empty array when the winner has fewer than ``bucket_size``
    members.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    with np.errstate(invalid="ignore"):
        valid = (u > 0) & (v > 0)
    idx = np.nonzero(valid)[0]
    if idx.size == 0:
        return idx
    ratios = np.log(u[idx] / v[idx])
    rmin = ratios.min()
    rmax = ratios.max()
    if rmax == rmin:
        members = idx
    else:
        nbuckets = int(math.ceil((rmax - rmin) / delta))
        which = np.minimum((ratios - rmin) // delta, nbuckets - 1).astype(np.intp)
        counts = np.bincount(which, minlength=nbuckets)
        members = idx[which == int(np.argmax(counts))]
    if members.size < bucket_size:
        return np.empty(0, dtype=np.intp)
    return members


def pattern_correlation(bits, idx, i):
    """Correlation <H_i, H_idx> / (<H_i, H_i> + 1) between pattern rows."""
    bits = np.asarray(bits)
    hi = bits[i].astype(np.float64)
    hx = bits[idx].astype(np.float64)
    return float(hi @ hx) / (float(hi @ hi) + 1.0)


def correlations_with_row(R, idx, bucket_size, delta, tau):
    """Pattern of the block the seed row ``idx`` passes through.

    Missing entries of R count as zero.  Each row is flagged on the index
    set where it is proportional to the seed row; the seed row's own pattern
    is replaced by that of the second most correlated row, and rows whose
    correlation trails that row's by more than ``tau`` are dropped.
    """
    Rv = np.nan_to_num(_residual_values(R), nan=0.0)
    n, m = Rv.shape
    H = np.zeros((n, m), dtype=np.uint8)
    if n < 2:
        return PatternMatrix(H)
    seed = Rv[idx]
    for i in range(n):
        members = find_row_set(seed, Rv[i], bucket_size, delta)
        H[i, members] = 1
    rowsums = H.sum(axis=1).astype(np.int64)
    rowsums[idx] = -1  # the seed row competes for nothing
    s = int(np.argmax(rowsums))
    H[idx] = H[s]
    dots = (H @ H[idx]).astype(np.float64)
    self_dots = H.sum(axis=1).astype(np.float64)
    phi = dots / (self_dots + 1.0)
    H[phi < phi[s] - tau] = 0
    return PatternMatrix(H)


def recover_block(R, b_idx, c_idx):
    """Best rank-1 fit of R restricted to ``b_idx x c_idx``.

    One of the rows in ``b_idx`` serves as the block's row vector c; the
    column vector is the closed-form Frobenius least-squares fit
    b_i = <R_i, c> / <c, c> (clamped at zero).  Every candidate row is
    tried and the lowest-index best fit wins.

    Missing entries contribute nothing: each b_i is fitted over the columns
    observed in both row i and the representing row, and candidates are
    compared on observed cells only.  Zeroing missing entries inside the
    normal equations instead would shrink b whenever block overlap masks
    part of a row, and exact blocks would stop being a fixed point of the
    update cycle.
    """
    raw = _residual_values(R)
    n, m = raw.shape
    b_idx = np.asarray(b_idx, dtype=np.intp)
    c_idx = np.asarray(c_idx, dtype=np.intp)
    b = np.zeros(n)
    c = np.zeros(m)
    if b_idx.size == 0 or c_idx.size == 0:
        return b, c
    sub = raw[np.ix_(b_idx, c_idx)]
    w = ~np.isnan(sub)
    z = np.where(w, sub, 0.0)
    num = z @ z.T  # masked cells hold zeros, so this sums joint-observed terms
    den = w.astype(np.float64) @ (z * z).T
    with np.errstate(divide="ignore", invalid="ignore"):
        fits = np.where(den > 0, num / den, 0.0)
    np.maximum(fits, 0.0, out=fits)
    totals = (z * z).sum()
    # residual error of candidate p over observed cells:
    # sum_i (T_i - 2 b_ip num_ip + b_ip^2 den_ip)
    errors = totals - (2.0 * fits * num - fits * fits * den).sum(axis=0)
    errors = np.where((z * z).sum(axis=1) > 0, errors, np.inf)
    p = int(np.argmin(errors))
    if not np.isfinite(errors[p]):
        return b, c  # every candidate row is all zero
    b[b_idx] = fits[:, p]
    c[c_idx] = z[p]
    return b, c


def expansion_impact(alpha, c_vals, a_vals):
    """Overcoverage-per-improvement score for adding a row at weight alpha.

    The numerator is the mass by which alpha*c overshoots the data row and
    the denominator is the L1 improvement over leaving the row at zero.
    Both sums must run over the whole row (columns outside the block's
    support contribute nothing); restricting them to the matched ratio set
    would make the score vacuous, since the set was chosen to fit.
    Returns +inf when the improvement is not positive.
    """
    c_vals = np.asarray(c_vals, dtype=np.float64)
    a_vals = np.asarray(a_vals, dtype=np.float64)
    scaled = alpha * c_vals
    num = float(np.maximum(0.0, scaled - a_vals).sum())
    den = float((a_vals - np.abs(a_vals - scaled)).sum())
    if den <= 0:
        return math.inf
    return num / den


def add_rows(b, c, A, theta, bucket_size, delta):
    """Expand a block by setting zero entries of b wherever a row of A is
    nearly a multiple of c and the expansion impact stays within theta."""
    av = A.values if isinstance(A, NonNegMatrix) else np.asarray(A, float)
    b = np.asarray(b, dtype=np.float64).copy()
    c = np.asarray(c, dtype=np.float64)
    support = c > 0
    for i in np.nonzero(b == 0)[0]:
        members = find_row_set(c, av[i], bucket_size, delta)
        if members.size == 0:
            continue
        alpha = float((av[i, members] / c[members]).mean())
        scored = support & ~np.isnan(av[i])
        if expansion_impact(alpha, c[scored], av[i][scored]) <= theta:
            b[i] = alpha
    return b


def update_block(A, B, C, count, params):
    """Propose a replacement for the current block given data and factors.

    The residual keeps entries of A not yet covered by the other blocks and
    masks the rest; a seed row with maximal uncovered mass anchors pattern
    discovery, and the recovered core block is expanded row- and
    column-wise.  Returns all-zero vectors when no usable pattern exists.
    """
    n, m = A.shape
    k = B.shape[1]
    block = (count - 1) % k + 1
    covered = maxtimes_values_excluding(B, C, block)
    a = A.values if isinstance(A, NonNegMatrix) else np.asarray(A, float)
    # the strict comparison needs slack: blocks rewritten up to rescaling
    # reproduce coverage only to the last ulp, and a stray "uncovered" cell
    # carries a full-magnitude foreign value into the pattern search
    with np.errstate(invalid="ignore"):
        residual = np.where(covered < a * (1.0 - 1e-12), a, np.nan)
    zero = (np.zeros(n), np.zeros(m))
    filled = np.nan_to_num(residual, nan=0.0)
    if not filled.any():
        return zero
    seed = int(np.argmax(filled.sum(axis=1)))
    H = correlations_with_row(residual, seed, params.bucket_size, params.delta,
                              params.tau).bits
    if not H.any():
        return zero
    r = int(np.argmax(H.sum(axis=1)))
    cstar = int(np.argmax(H.sum(axis=0)))
    b_idx = np.nonzero(H[:, cstar])[0]
    c_idx = np.nonzero(H[r, :])[0]
    b, c = recover_block(residual, b_idx, c_idx)
    At = A.transpose() if isinstance(A, NonNegMatrix) else NonNegMatrix(a.T)
    b = add_rows(b, c, A, params.theta, params.bucket_size, params.delta)
    c = add_rows(c, b, At, params.theta, params.bucket_size, params.delta)
    return b, c


class CapricornUpdater:
    """Deterministic BlockUpdater wrapping ``update_block``."""

    def __init__(self, params=None):
        self.params = params if params is not None else CapricornParams()

    def update_block(self, A, B, C, count):
        return update_block(A, B, C, count, self.params)
