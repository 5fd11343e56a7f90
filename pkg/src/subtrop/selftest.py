"""Self-contained property battery behind the hidden selftest subcommand.

Runs the same families of randomized checks the test suite uses: the factor
sparsity bound on dominated decompositions, the max-plus to max-times error
transfer, rank agreement on binary matrices, and surrogate-minimizer
soundness.  Prints one line per family.
"""

from __future__ import annotations

import itertools

import numpy as np

from .cancer import polymin
from .objective import frobenius_sq
from .oracle import (
    check_maxplus_transfer,
    check_sparsity_bound,
    exhaustive_boolean_rank,
    exhaustive_subtropical_rank_binary,
    grid_min_gamma,
    maxplus_error_sq,
)

__all__ = ["run_battery"]


def _check_sparsity(trials, rng):
    bad = 0
    for t in range(trials):
        n = int(rng.integers(2, 21))
        k = int(rng.integers(1, 9))
        m = int(rng.integers(2, 21))
        density = float(rng.uniform(0.1, 1.0))
        B = np.where(rng.random((n, k)) < density, rng.random((n, k)), 0.0)
        C = np.where(rng.random((k, m)) < density, rng.random((k, m)), 0.0)
        prod = (B[:, :, None] * C[None, :, :]).max(axis=1)
        if t % 2 == 0:
            A = prod
        else:
            A = prod + np.where(rng.random((n, m)) < 0.3, rng.random((n, m)), 0.0)
        holds, _ = check_sparsity_bound(B, C, A)
        bad += 0 if holds else 1
    return bad


def _check_transfer(trials, rng):
    bad = 0
    for t in range(trials):
        B = rng.uniform(-2, 2, size=(5, 3))
        C = rng.uniform(-2, 2, size=(3, 5))
        if t % 4 == 0:
            B[rng.random((5, 3)) < 0.2] = -np.inf
        prod = np.max(
            np.where(
                np.isneginf(B)[:, :, None] | np.isneginf(C)[None, :, :],
                -np.inf,
                np.where(np.isneginf(B), 0, B)[:, :, None]
                + np.where(np.isneginf(C), 0, C)[None, :, :],
            ),
            axis=1,
        )
        A = prod + rng.uniform(-0.3, 0.3, size=(5, 5))
        A[np.isneginf(prod)] = -np.inf
        lam = maxplus_error_sq(A, B, C)
        if not check_maxplus_transfer(A, B, C, lam):
            bad += 1
    return bad


def _check_ranks(quick):
    size = 64 if quick else 512
    bad = 0
    for code in range(size):
        bits = [(code >> i) & 1 for i in range(9)]
        A = np.array(bits, dtype=float).reshape(3, 3)
        if exhaustive_subtropical_rank_binary(A) != exhaustive_boolean_rank(A):
            bad += 1
    return bad, size


def _check_polymin(trials, rng):
    obj = frobenius_sq()
    bad_quad = 0
    bad_grid = 0
    for _ in range(trials):
        a = rng.random(20)
        b = rng.random(20)
        # exactly quadratic case: nothing dominates
        _, x = polymin(a, np.zeros(20), b, 2, obj)
        closed = float(np.clip(a @ b / (b @ b), 0.0, 1.0))
        if abs(x - closed) > 1e-6:
            bad_quad += 1
        # general case with a competing reconstruction
        nvec = np.where(rng.random(20) < 0.5, rng.random(20), 0.0)
        _, x = polymin(a, nvec, b, 10, obj)
        true_at_x = float(((a - np.maximum(nvec, b * x)) ** 2).sum())
        gmin, _ = grid_min_gamma(a, nvec, b, obj, 2001)
        xs = np.linspace(0, 1, 2001)
        vals = ((a[:, None] - np.maximum(nvec[:, None], np.outer(b, xs))) ** 2).sum(
            axis=0
        )
        span = float(vals.max() - vals.min())
        if true_at_x > gmin + 0.05 * span + 1e-12:
            bad_grid += 1
    return bad_quad, bad_grid


def run_battery(quick=False, quiet=False):
    """Run all families; returns True when every check passes."""
    rng = np.random.default_rng(20240817)
    ok = True

    def report(name, bad, total):
        nonlocal ok
        line = f"ok {name} ({total} trials)" if bad == 0 else \
            f"FAIL {name} ({bad}/{total} violations)"
        ok = ok and bad == 0
        if not quiet or bad:
            print(line)

    trials = 100 if quick else 1000
    report("sparsity-bound", _check_sparsity(trials, rng), trials)
    trials = 50 if quick else 200
    report("maxplus-transfer", _check_transfer(trials, rng), trials)
    bad, size = _check_ranks(quick)
    report("binary-rank-agreement", bad, size)
    trials = 20 if quick else 100
    bad_quad, bad_grid = _check_polymin(trials, rng)
    report("polymin-quadratic", bad_quad, trials)
    report("polymin-grid-margin", bad_grid, trials)
    return ok
