"""Greedy cyclic rank-1 framework for subtropical factorization.

Factors start at zero and the solver repeatedly replaces one rank-1 block
with whatever a pluggable block updater proposes, cycling through the blocks
``cycles`` times.  Updates may worsen the fit (there is no rollback), so the
best factors seen are tracked and returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .matrix import Factorization, NonNegMatrix, maxtimes_values
from .objective import evaluate

__all__ = ["BlockUpdater", "TraceRecord", "EquatorTrace", "run"]


@runtime_checkable
class BlockUpdater(Protocol):
    """Strategy producing a replacement rank-1 block for the current index."""

    def update_block(self, A, B, C, count):
        """Return (b, c): a nonnegative column n-vector and row m-vector."""
        ...


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    block: int
    error: float
    best_error: float
    updater_failed: bool = False


class EquatorTrace:
    """Per-iteration error log; row 0 is the all-zero starting state."""

    def __init__(self):
        self.records = []

    def append(self, record):
        self.records.append(record)

    def errors(self):
        return np.array([r.error for r in self.records])

    def best_errors(self):
        return np.array([r.best_error for r in self.records])

    def final_best(self):
        return self.records[-1].best_error

    def __len__(self):
        return len(self.records)

    def to_csv(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("iteration,block,error,best_error\n")
            for r in self.records:
                fh.write(
                    f"{r.iteration},{r.block},{r.error:.17g},{r.best_error:.17g}\n"
                )


def run(A, rank, cycles, updater, obj, seed=None):
    """Run the cyclic block-update loop and return the best factors seen.

    Arguments:
        A: data matrix (may have missing entries).
        rank: number of rank-1 blocks k (>= 1).
        cycles: number of full passes M over the blocks (>= 1).
        updater: BlockUpdater instance.
        obj: AdditiveObjective used both by best-tracking and the trace.
        seed: forwarded to ``updater.reseed`` when the updater supports it.

    Returns (Factorization, EquatorTrace).  A failing updater leaves its
    block unchanged and is flagged in the trace.
    """
    if rank < 1:
        raise ValueError("rank must be >= 1")
    if cycles < 1:
        raise ValueError("cycles must be >= 1")
    if seed is not None and hasattr(updater, "reseed"):
        updater.reseed(seed)

    n, m = A.shape
    B = np.zeros((n, rank))
    C = np.zeros((rank, m))
    best_error = evaluate(obj, A, np.zeros((n, m)))
    best_B = B.copy()
    best_C = C.copy()

    trace = EquatorTrace()
    trace.append(TraceRecord(0, 0, best_error, best_error))

    for count in range(1, rank * cycles + 1):
        block = (count - 1) % rank + 1
        failed = False
        try:
            b, c = updater.update_block(A, B, C, count)
            b = np.asarray(b, dtype=np.float64).reshape(n)
            c = np.asarray(c, dtype=np.float64).reshape(m)
            if (
                np.any(b < 0)
                or np.any(c < 0)
                or not np.all(np.isfinite(b))
                or not np.all(np.isfinite(c))
            ):
                raise ValueError("updater returned negative or non-finite values")
        except Exception:
            failed = True
        else:
            B[:, block - 1] = b
            C[block - 1, :] = c
        error = evaluate(obj, A, maxtimes_values(B, C))
        if error < best_error:
            best_error = error
            best_B = B.copy()
            best_C = C.copy()
        trace.append(TraceRecord(count, block, error, best_error, failed))

    fact = Factorization(
        B=NonNegMatrix(best_B),
        C=NonNegMatrix(best_C),
        rank=rank,
        scale=1.0,
        objective_name=obj.name,
    )
    return fact, trace
