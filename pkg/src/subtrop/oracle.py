"""Independent brute-force references for the test suite.

Everything here recomputes results through its own arithmetic path (grid
search, exhaustive enumeration, direct inequality evaluation) so the main
solvers can be checked against code that shares none of their internals.
"""

from __future__ import annotations

import itertools

import numpy as np

from .matrix import NonNegMatrix

__all__ = [
    "grid_min_gamma",
    "exhaustive_subtropical_rank_binary",
    "exhaustive_boolean_rank",
    "check_sparsity_bound",
    "maxplus_product",
    "maxplus_error_sq",
    "check_maxplus_transfer",
]


def grid_min_gamma(a_col, n_col, b, obj, grid_points, observed=None, x_max=1.0):
    """Minimize the one-column cost on an equispaced grid over [0, x_max].

    Returns (error, x) at the best grid point; ties go to the lowest point.
    """
    if grid_points < 2:
        raise ValueError("need at least 2 grid points")
    a = np.asarray(a_col, dtype=np.float64)
    nv = np.asarray(n_col, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    xs = np.linspace(0.0, x_max, grid_points)
    vals = obj.phi(a[:, None], np.maximum(nv[:, None], np.outer(bv, xs)))
    if observed is not None:
        vals = np.where(np.asarray(observed, bool)[:, None], vals, 0.0)
    errs = vals.sum(axis=0)
    best = int(np.argmin(errs))  # first minimum: lowest grid point on ties
    return float(errs[best]), float(xs[best])


def _as_binary(A):
    arr = np.asarray(A.values if isinstance(A, NonNegMatrix) else A)
    arr = arr.astype(np.float64)
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("matrix must be binary")
    return arr


def exhaustive_subtropical_rank_binary(A):
    """Smallest k admitting binary factors with max-times product equal to A.

    Enumerate every binary left factor; for a fixed left factor the largest
    right factor that keeps the product dominated is canonical, so checking
    it alone is exhaustive.  Dimensions above 4 are refused.
    """
    a = _as_binary(A)
    n, m = a.shape
    if n > 4 or m > 4:
        raise ValueError("exhaustive search is limited to 4x4 matrices")
    if not a.any():
        return 0
    for k in range(1, min(n, m) + 1):
        total = 2 ** (n * k)
        chunk = 4096
        for start in range(0, total, chunk):
            codes = np.arange(start, min(start + chunk, total))
            bits = (codes[:, None] >> np.arange(n * k)) & 1
            B = bits.reshape(-1, n, k).astype(np.float64)
            # canonical right factor: C[s, j] = 1 iff column s of B fits
            # inside column j of A
            fits = np.all(B[:, :, :, None] <= a[None, :, None, :], axis=1)
            C = fits.astype(np.float64)
            prod = (B[:, :, :, None] * C[:, None, :, :]).max(axis=2)
            if np.any(np.all(prod == a[None], axis=(1, 2))):
                return k
    return min(n, m)  # unreachable: B = A, C = identity always works


def _maximal_rectangles(a):
    """Closed all-ones submatrices as (cell bitmask) integers."""
    n, m = a.shape
    rects = set()
    rows_all = range(n)
    for r in range(1, n + 1):
        for row_set in itertools.combinations(rows_all, r):
            cols = [j for j in range(m) if all(a[i, j] for i in row_set)]
            if not cols:
                continue
            # close the rectangle: take every row containing all those columns
            rows = [i for i in range(n) if all(a[i, j] for j in cols)]
            mask = 0
            for i in rows:
                for j in cols:
                    mask |= 1 << (i * m + j)
            rects.add(mask)
    return sorted(rects)


def exhaustive_boolean_rank(A):
    """Minimum number of all-ones submatrices covering the ones of A.

    Independent reference for the rank comparison on binary matrices: exact
    set cover over closed rectangles, deepening on the cover size.
    """
    a = _as_binary(A)
    n, m = a.shape
    target = 0
    for i in range(n):
        for j in range(m):
            if a[i, j]:
                target |= 1 << (i * m + j)
    if target == 0:
        return 0
    rects = _maximal_rectangles(a)

    def cover(remaining, budget):
        if remaining == 0:
            return True
        if budget == 0:
            return False
        lowest = remaining & -remaining  # first uncovered cell
        for rect in rects:
            if rect & lowest and cover(remaining & ~rect, budget - 1):
                return True
        return False

    for k in range(1, n * m + 1):
        if cover(target, k):
            return k
    raise RuntimeError("unreachable: single cells are rectangles")


def _own_maxtimes(Bv, Cv):
    # deliberately not the production kernel
    return (Bv[:, :, None] * Cv[None, :, :]).max(axis=1)


def check_sparsity_bound(B, C, A=None):
    """Verify s(B) + s(C) >= s(A) for a dominated decomposition.

    A defaults to the product itself.  Returns (holds, slack); a supplied A
    that fails to dominate the product is a precondition violation.
    """
    Bv = np.asarray(B.values if isinstance(B, NonNegMatrix) else B, dtype=np.float64)
    Cv = np.asarray(C.values if isinstance(C, NonNegMatrix) else C, dtype=np.float64)
    prod = _own_maxtimes(Bv, Cv)
    if A is None:
        Av = prod
    else:
        Av = np.asarray(A.values if isinstance(A, NonNegMatrix) else A, dtype=np.float64)
        if Av.shape != prod.shape:
            raise ValueError(f"shape mismatch: {Av.shape} vs {prod.shape}")
        if np.any(Av < prod):
            raise ValueError("product is not dominated by the supplied matrix")

    def frac_zero(M):
        return (M.size - np.count_nonzero(M)) / M.size

    slack = frac_zero(Bv) + frac_zero(Cv) - frac_zero(Av)
    return slack >= 0, float(slack)


# ---------------------------------------------------------------------------
# max-plus (tropical) helpers; the bottom element is passed as -inf but all
# pairwise "products" (sums) are formed only between finite entries

def _split_bottom(M):
    arr = np.asarray(M, dtype=np.float64)
    finite = ~np.isneginf(arr)
    if not np.all(np.isfinite(arr[finite])):
        raise ValueError("max-plus entries must be finite or -inf")
    return np.where(finite, arr, 0.0), finite


def maxplus_product(B, C):
    """Tropical product max_d(B[i,d] + C[d,j]); -inf acts as the bottom."""
    Bf, Bok = _split_bottom(B)
    Cf, Cok = _split_bottom(C)
    if Bf.shape[1] != Cf.shape[0]:
        raise ValueError("inner dimensions differ")
    sums = Bf[:, :, None] + Cf[None, :, :]
    valid = Bok[:, :, None] & Cok[None, :, :]
    sums = np.where(valid, sums, -np.inf)
    return sums.max(axis=1)


def maxplus_error_sq(A, B, C):
    """Exact squared Frobenius gap ||A - B (x) C||_F^2 in max-plus terms.

    Entries where both sides are bottom contribute zero; a one-sided bottom
    makes the gap infinite.
    """
    Av = np.asarray(A, dtype=np.float64)
    prod = maxplus_product(B, C)
    both_bottom = np.isneginf(Av) & np.isneginf(prod)
    one_bottom = np.isneginf(Av) ^ np.isneginf(prod)
    if one_bottom.any():
        return float("inf")
    diff = np.where(both_bottom, 0.0, Av - prod)
    return float((diff * diff).sum())


def check_maxplus_transfer(A, B, C, lam):
    """Check the error-transfer bound from max-plus to max-times.

    Given ||A - B (x) C||_F^2 <= lam in max-plus arithmetic, the exponentiated
    matrices must satisfy ||exp(A) - exp(B) (x*) exp(C)||_F^2 <= M^2 * lam with
    M = exp(N), N the largest entry of max(A, B (x) C).  exp(-inf) is 0.
    """
    Av = np.asarray(A, dtype=np.float64)
    if np.isinf(lam):
        return True  # vacuous bound
    prod_plus = maxplus_product(B, C)
    peak = max(float(Av.max()), float(prod_plus.max()))
    big_m = np.exp(peak)  # exp(-inf) = 0 when everything is bottom
    expA = np.exp(Av)
    prod_times = _own_maxtimes(np.exp(np.asarray(B, float)), np.exp(np.asarray(C, float)))
    lhs = float(((expA - prod_times) ** 2).sum())
    rhs = big_m * big_m * lam
    return lhs <= rhs * (1 + 1e-12) + 1e-12
