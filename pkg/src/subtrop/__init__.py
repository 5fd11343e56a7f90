"""Approximate low-rank matrix factorization over the max-times algebra.

The max-times (subtropical) algebra replaces addition with the maximum, so a
factorization reconstructs each entry from the single largest rank-1
contribution.  The package provides the greedy cyclic solver with two block
updaters (pattern-based for discrete noise, surrogate-based for continuous
noise), synthetic data and noise generators, holdout prediction metrics, and
brute-force oracles for testing.
"""

__version__ = "0.1.0"

from .matrix import (
    Factorization,
    NonNegMatrix,
    PatternMatrix,
    dominates,
    maxtimes_product,
    maxtimes_product_excluding,
    pattern,
    read_csv,
    sparsity,
    transpose,
    write_csv,
)
from .objective import (
    AdditiveObjective,
    evaluate,
    frobenius_sq,
    jensen_shannon,
    l1,
    relative_frobenius,
)
from .equator import BlockUpdater, EquatorTrace, run
from .capricorn import CapricornParams, CapricornUpdater
from .cancer import CancerParams, CancerUpdater, polymin
from .pipeline import factorize
from .synth import NoiseSpec, SynthInstance, gen_factors, make_instance, sample_holdout
from .metrics import PredictionReport, prediction_report

__all__ = [
    "__version__",
    "Factorization",
    "NonNegMatrix",
    "PatternMatrix",
    "dominates",
    "maxtimes_product",
    "maxtimes_product_excluding",
    "pattern",
    "read_csv",
    "sparsity",
    "transpose",
    "write_csv",
    "AdditiveObjective",
    "evaluate",
    "frobenius_sq",
    "jensen_shannon",
    "l1",
    "relative_frobenius",
    "BlockUpdater",
    "EquatorTrace",
    "run",
    "CapricornParams",
    "CapricornUpdater",
    "CancerParams",
    "CancerUpdater",
    "polymin",
    "factorize",
    "NoiseSpec",
    "SynthInstance",
    "gen_factors",
    "make_instance",
    "sample_holdout",
    "PredictionReport",
    "prediction_report",
]
