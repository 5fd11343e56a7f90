"""Additive elementwise reconstruction objectives.

An additive objective scores a reconstruction R against data A as
``sum(phi(A[i, j], R[i, j]))`` over the observed entries of A, for some
elementwise cost phi with phi(a, a) = 0 and phi >= 0.  Three instances are
provided: squared Frobenius, L1, and the Jensen-Shannon divergence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .matrix import NonNegMatrix

__all__ = [
    "AdditiveObjective",
    "frobenius_sq",
    "l1",
    "jensen_shannon",
    "by_name",
    "scale_input",
    "evaluate",
    "relative_frobenius",
]


@dataclass(frozen=True)
class AdditiveObjective:
    """Named elementwise cost, vectorized over arrays."""

    name: str
    phi: Callable[[np.ndarray, np.ndarray], np.ndarray]


def _phi_frobenius(a, r):
    a = np.asarray(a, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    d = a - r
    return d * d


def _phi_l1(a, r):
    a = np.asarray(a, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    return np.abs(a - r)


def _phi_js(a, r):
    a = np.asarray(a, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if np.any(a < 0) or np.any(r < 0):
        raise ValueError("jensen-shannon divergence needs nonnegative arguments")
    s = a + r
    pa = a > 0
    pr = r > 0
    # 0 * log(0 / x) = 0; both arguments zero gives 0 (continuous extension)
    ra = np.divide(2.0 * a, s, out=np.ones_like(s), where=pa)
    rb = np.divide(2.0 * r, s, out=np.ones_like(s), where=pr)
    return np.where(pa, a * np.log(ra), 0.0) + np.where(pr, r * np.log(rb), 0.0)


def frobenius_sq():
    """Squared Frobenius cost: phi(a, r) = (a - r)^2."""
    return AdditiveObjective("frobenius", _phi_frobenius)


def l1():
    """Sum of absolute differences: phi(a, r) = |a - r|."""
    return AdditiveObjective("l1", _phi_l1)


def jensen_shannon():
    """Jensen-Shannon divergence: a*log(2a/(a+r)) + r*log(2r/(a+r))."""
    return AdditiveObjective("js", _phi_js)


_BY_NAME = {"frobenius": frobenius_sq, "l1": l1, "js": jensen_shannon}


def by_name(name):
    """Look up an objective by its CLI name (frobenius | l1 | js)."""
    try:
        return _BY_NAME[name]()
    except KeyError:
        raise ValueError(
            f"unknown objective {name!r}; expected one of {sorted(_BY_NAME)}"
        ) from None


def scale_input(obj, factor):
    """Objective that costs its arguments as if multiplied by ``factor``.

    Used to report errors in original data units while running on input that
    was divided by ``factor``.
    """
    if not (factor > 0):
        raise ValueError("scale factor must be positive")
    base = obj.phi
    return AdditiveObjective(obj.name, lambda a, r: base(factor * a, factor * r))


def evaluate(obj, A, R):
    """Total cost of reconstruction R on the observed entries of A.

    R must be fully observed; masked entries of A contribute zero.
    """
    if isinstance(R, NonNegMatrix):
        if not R.is_fully_observed:
            raise ValueError("reconstruction must be fully observed")
        Rv = R.values
    else:
        Rv = np.asarray(R, dtype=np.float64)
    if A.shape != Rv.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {Rv.shape}")
    costs = obj.phi(A.filled(0.0), Rv)
    if A.is_fully_observed:
        return float(costs.sum())
    return float(np.where(A.observed, costs, 0.0).sum())


def relative_frobenius(A, R):
    """Relative Frobenius error ||A - R||_F / ||A||_F over observed entries."""
    if isinstance(R, NonNegMatrix):
        Rv = R.values
    else:
        Rv = np.asarray(R, dtype=np.float64)
    if A.shape != Rv.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {Rv.shape}")
    w = A.observed
    a = A.filled(0.0)
    denom = float(np.sqrt((a[w] ** 2).sum()))
    if denom == 0.0:
        raise ValueError("relative error undefined for an all-zero matrix")
    num = float(np.sqrt(((a[w] - Rv[w]) ** 2).sum()))
    return num / denom
