"""High-level factorization entry point shared by the CLI and experiments.

Wires together the block updaters, objective defaults, and the input
rescaling that the continuous-noise solver needs: its surrogate minimizer
searches block values in [0, 1], so the data is divided by its largest
observed value before the run and the left factor is multiplied back
afterwards.  Errors are tracked in original data units throughout.
"""

from __future__ import annotations

import numpy as np

from . import equator
from .cancer import CancerParams, CancerUpdater
from .capricorn import CapricornParams, CapricornUpdater
from .matrix import Factorization, NonNegMatrix
from .objective import AdditiveObjective, by_name, scale_input

__all__ = [
    "ALGORITHMS",
    "DEFAULT_CYCLES",
    "DEFAULT_OBJECTIVE",
    "factorize",
]

ALGORITHMS = ("capricorn", "cancer")

DEFAULT_CYCLES = {"capricorn": 4, "cancer": 14}
DEFAULT_OBJECTIVE = {"capricorn": "l1", "cancer": "frobenius"}


def _resolve_objective(objective, algorithm):
    if objective is None:
        objective = DEFAULT_OBJECTIVE[algorithm]
    if isinstance(objective, AdditiveObjective):
        return objective
    return by_name(objective)


def factorize(
    A,
    rank,
    algorithm="cancer",
    cycles=None,
    objective=None,
    seed=None,
    rescale=True,
    capricorn_params=None,
    cancer_params=None,
):
    """Factorize A into ``rank`` blocks with the chosen algorithm.

    ``cycles`` and ``objective`` default per algorithm (4 passes with the L1
    objective for capricorn, 14 with squared Frobenius for cancer).  Returns
    (Factorization, EquatorTrace); trace errors are in original data units.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(
            f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}"
        )
    obj = _resolve_objective(objective, algorithm)
    if cycles is None:
        cycles = DEFAULT_CYCLES[algorithm]

    scale = 1.0
    A_run = A
    obj_run = obj
    if algorithm == "capricorn":
        updater = CapricornUpdater(capricorn_params)
    else:
        if rescale:
            observed_vals = A.values[A.observed]
            peak = float(observed_vals.max()) if observed_vals.size else 0.0
            if peak > 0 and peak != 1.0:
                scale = peak
                A_run = NonNegMatrix(A.values / scale)
                obj_run = scale_input(obj, scale)
        updater = CancerUpdater(cancer_params, objective=obj_run, seed=seed)

    fact, trace = equator.run(A_run, rank, cycles, updater, obj_run, seed=seed)
    if scale != 1.0:
        fact = Factorization(
            B=NonNegMatrix(fact.B.values * scale),
            C=fact.C,
            rank=fact.rank,
            scale=scale,
            objective_name=obj.name,
        )
    return fact, trace
