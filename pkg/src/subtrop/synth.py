"""Seeded synthetic data generation, noise models, and holdout sampling.

Clean instances are max-times products of random sparse factors whose
nonzeros are uniform on (0, 1].  Three noise models are provided:

* tropical density noise: elementwise max with a sparse uniform matrix of a
  given density (the output always dominates the clean data);
* tropical flip noise: a number of entries proportional to the nonzero
  count is replaced by fresh uniform values;
* gaussian noise: additive white noise, truncated below zero.

All generators are bit-reproducible under a fixed seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .matrix import NonNegMatrix, maxtimes_values

__all__ = [
    "NoiseSpec",
    "SynthInstance",
    "NOISE_KINDS",
    "gen_factors",
    "apply_tropical_density_noise",
    "apply_tropical_flip_noise",
    "apply_gaussian_noise",
    "make_instance",
    "sample_holdout",
    "mask_holdout",
]

NOISE_KINDS = ("tropical_density", "tropical_flip", "gaussian", "none")


def _canonical_kind(kind):
    k = kind.replace("-", "_")
    if k not in NOISE_KINDS:
        raise ValueError(f"unknown noise kind {kind!r}; expected one of {NOISE_KINDS}")
    return k


@dataclass(frozen=True)
class NoiseSpec:
    """Noise model selector: kind, level (density / flip fraction / sigma),
    and an optional private seed."""

    kind: str
    level: float
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", _canonical_kind(self.kind))
        if self.level < 0:
            raise ValueError("noise level must be nonnegative")
        if self.kind == "tropical_density" and self.level > 1:
            raise ValueError("density noise level must be within [0, 1]")

    def apply(self, A, seed=None):
        s = self.seed if self.seed is not None else seed
        if self.kind == "tropical_density":
            return apply_tropical_density_noise(A, self.level, s)
        if self.kind == "tropical_flip":
            return apply_tropical_flip_noise(A, self.level, s)
        if self.kind == "gaussian":
            return apply_gaussian_noise(A, self.level, s)
        return A  # "none"


@dataclass(frozen=True)
class SynthInstance:
    """Planted factorization: clean product, noisy copy, true factors."""

    clean: NonNegMatrix
    noisy: NonNegMatrix
    true_B: NonNegMatrix
    true_C: NonNegMatrix
    spec: dict = field(default_factory=dict)


def _values_fully_observed(A, who):
    if isinstance(A, NonNegMatrix):
        if not A.is_fully_observed:
            raise ValueError(f"{who} requires a fully observed matrix")
        return A.values
    return np.asarray(A, dtype=np.float64)


def _sparse_uniform(rng, rows, cols, count):
    """rows x cols matrix with ``count`` nonzeros uniform on (0, 1]."""
    flat = np.zeros(rows * cols)
    pos = rng.choice(rows * cols, size=count, replace=False)
    flat[pos] = 1.0 - rng.random(count)
    return flat.reshape(rows, cols)


def gen_factors(rows, cols, rank, density, seed=None):
    """Random factor pair with exactly floor(density * entries) nonzeros each."""
    if not (0 < density <= 1):
        raise ValueError("density must be in (0, 1]")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    count_b = int(density * rows * rank)
    count_c = int(density * rank * cols)
    if count_b < rank or count_c < rank:
        warnings.warn(
            "factor density so low that some blocks may be empty",
            stacklevel=2,
        )
    B = _sparse_uniform(rng, rows, rank, count_b)
    C = _sparse_uniform(rng, rank, cols, count_c)
    return NonNegMatrix(B), NonNegMatrix(C)


def apply_tropical_density_noise(A, level, seed=None):
    """Elementwise max of A with a uniform matrix thinned to ``level`` density."""
    if not (0 <= level <= 1):
        raise ValueError("density noise level must be within [0, 1]")
    a = _values_fully_observed(A, "tropical density noise")
    rng = np.random.default_rng(seed)
    noise = rng.random(a.shape)
    kill = int((1.0 - level) * a.size)
    pos = rng.choice(a.size, size=kill, replace=False)
    noise.reshape(-1)[pos] = 0.0
    return NonNegMatrix(np.maximum(a, noise))


def apply_tropical_flip_noise(A, alpha, seed=None):
    """Replace floor(alpha * nnz(A)) random entries with fresh uniform values."""
    if alpha < 0:
        raise ValueError("flip fraction must be nonnegative")
    a = _values_fully_observed(A, "tropical flip noise")
    count = int(alpha * np.count_nonzero(a))
    if count > a.size:
        raise ValueError(
            f"flip budget {count} exceeds matrix size {a.size}"
        )
    rng = np.random.default_rng(seed)
    out = a.copy()
    pos = rng.choice(a.size, size=count, replace=False)
    out.reshape(-1)[pos] = 1.0 - rng.random(count)
    return NonNegMatrix(out)


def apply_gaussian_noise(A, sigma, seed=None):
    """Add white noise with std ``sigma`` and truncate below zero."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    a = _values_fully_observed(A, "gaussian noise")
    if sigma == 0:
        return NonNegMatrix(a.copy())
    rng = np.random.default_rng(seed)
    return NonNegMatrix(np.maximum(a + rng.normal(0.0, sigma, size=a.shape), 0.0))


def make_instance(rows, cols, rank, density, noise=None, seed=None):
    """Planted instance: factors, clean product, and an optional noisy copy."""
    rng = np.random.default_rng(seed)
    B, C = gen_factors(rows, cols, rank, density, rng)
    clean = NonNegMatrix(maxtimes_values(B.values, C.values))
    if noise is None or noise.kind == "none" or noise.level == 0:
        noisy = clean
    else:
        noisy = noise.apply(clean, seed=int(rng.integers(2**63)))
    params = {
        "rows": rows,
        "cols": cols,
        "rank": rank,
        "density": density,
        "noise": None if noise is None else noise.kind,
        "level": None if noise is None else noise.level,
        "seed": seed,
    }
    return SynthInstance(clean, noisy, B, C, params)


def sample_holdout(A, fraction=None, per_row=None, nonzeros_only=False, seed=None):
    """Boolean mask of held-out entries, drawn from the observed part of A.

    Either a global ``fraction`` of the candidate entries or a fixed
    ``per_row`` count; ``nonzeros_only`` restricts candidates to nonzero
    entries.  Rows too small for the per-row count raise, listing offenders.
    """
    if (fraction is None) == (per_row is None):
        raise ValueError("specify exactly one of fraction / per_row")
    candidates = A.observed.copy()
    if nonzeros_only:
        candidates &= A.filled(0.0) > 0
    rng = np.random.default_rng(seed)
    holdout = np.zeros(A.shape, dtype=bool)
    if fraction is not None:
        if not (0 <= fraction <= 1):
            raise ValueError("fraction must be within [0, 1]")
        flat = np.nonzero(candidates.reshape(-1))[0]
        count = int(fraction * flat.size)
        if count:
            pick = rng.choice(flat.size, size=count, replace=False)
            holdout.reshape(-1)[flat[pick]] = True
        return holdout
    if per_row < 0:
        raise ValueError("per-row count must be nonnegative")
    short = [i for i in range(A.rows) if candidates[i].sum() < per_row]
    if short:
        raise ValueError(
            f"rows with fewer than {per_row} eligible entries: {short}"
        )
    for i in range(A.rows):
        cols = np.nonzero(candidates[i])[0]
        pick = rng.choice(cols.size, size=per_row, replace=False)
        holdout[i, cols[pick]] = True
    return holdout


def mask_holdout(A, holdout):
    """Copy of A with the holdout entries turned into missing values."""
    holdout = np.asarray(holdout, dtype=bool)
    if holdout.shape != A.shape:
        raise ValueError(f"holdout shape {holdout.shape} != {A.shape}")
    return NonNegMatrix(A.values, mask=A.observed & ~holdout)
