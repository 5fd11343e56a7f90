"""Reconstruction and prediction quality measures over holdout sets.

Distance-style measures (relative Frobenius, RMSE, MAE, Jensen-Shannon) are
computed over the held-out entries only.  Ranking measures (mean reciprocal
rank, Spearman's rho, Kendall's tau) compare, per row, the ordering of the
held-out entries under the true and predicted values, and average over rows
with enough entries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .matrix import NonNegMatrix
from .objective import jensen_shannon

__all__ = [
    "PredictionReport",
    "METRIC_NAMES",
    "prediction_accuracy",
    "rmse",
    "mae",
    "js_holdout",
    "relative_frobenius_holdout",
    "mean_reciprocal_rank",
    "spearman_rho",
    "kendall_tau",
    "prediction_report",
]

METRIC_NAMES = (
    "frobenius",
    "rmse",
    "mae",
    "js",
    "accuracy",
    "accuracy_nonzero",
    "spearman_rho",
    "kendall_tau",
    "mrr",
    "mrr_optimistic",
)


def _holdout_pairs(A_true, A_hat, holdout):
    t = A_true.filled(0.0) if isinstance(A_true, NonNegMatrix) else np.asarray(A_true, float)
    p = A_hat.filled(0.0) if isinstance(A_hat, NonNegMatrix) else np.asarray(A_hat, float)
    h = np.asarray(holdout, dtype=bool)
    if t.shape != p.shape or t.shape != h.shape:
        raise ValueError(
            f"shape mismatch: true {t.shape}, predicted {p.shape}, holdout {h.shape}"
        )
    return t, p, h


def prediction_accuracy(A_true, A_hat, holdout, ignore_zeros=False):
    """Fraction of held-out entries predicted exactly after integer rounding.

    With ``ignore_zeros`` entries whose true value is zero are excluded from
    both numerator and denominator.
    """
    t, p, h = _holdout_pairs(A_true, A_hat, holdout)
    if ignore_zeros:
        h = h & (t != 0)
    count = int(h.sum())
    if count == 0:
        raise ValueError("empty holdout set")
    return float((np.rint(p[h]) == t[h]).sum() / count)


def rmse(A_true, A_hat, holdout):
    """Root mean square error over the holdout entries."""
    t, p, h = _holdout_pairs(A_true, A_hat, holdout)
    if not h.any():
        raise ValueError("empty holdout set")
    return float(np.sqrt(((t[h] - p[h]) ** 2).mean()))


def mae(A_true, A_hat, holdout):
    """Mean absolute error over the holdout entries."""
    t, p, h = _holdout_pairs(A_true, A_hat, holdout)
    if not h.any():
        raise ValueError("empty holdout set")
    return float(np.abs(t[h] - p[h]).mean())


def js_holdout(A_true, A_hat, holdout):
    """Mean elementwise Jensen-Shannon divergence over the holdout entries."""
    t, p, h = _holdout_pairs(A_true, A_hat, holdout)
    if not h.any():
        raise ValueError("empty holdout set")
    return float(jensen_shannon().phi(t[h], p[h]).mean())


def relative_frobenius_holdout(A_true, A_hat, holdout):
    """Relative Frobenius error restricted to the holdout entries."""
    t, p, h = _holdout_pairs(A_true, A_hat, holdout)
    if not h.any():
        raise ValueError("empty holdout set")
    denom = float(np.sqrt((t[h] ** 2).sum()))
    if denom == 0:
        return float("nan")
    return float(np.sqrt(((t[h] - p[h]) ** 2).sum()) / denom)


def _row_sets(t, p, h, min_entries):
    for i in range(t.shape[0]):
        cols = np.nonzero(h[i])[0]
        if cols.size >= min_entries:
            yield t[i, cols], p[i, cols]


def mean_reciprocal_rank(A_true, A_hat, holdout, optimistic=False):
    """Mean over rows of 1 / (best predicted rank of a truly top-rated item).

    Ranks are taken within each row's holdout set under the predicted
    values, descending.  Ties share the averaged rank, or the smallest
    possible rank when ``optimistic``.
    """
    t, p, h = _holdout_pairs(A_true, A_hat, holdout)
    method = "min" if optimistic else "average"
    rrs = []
    for true_r, pred_r in _row_sets(t, p, h, 1):
        ranks = stats.rankdata(-pred_r, method=method)
        top = true_r == true_r.max()
        rrs.append(1.0 / ranks[top].min())
    if not rrs:
        raise ValueError("no rows with holdout entries")
    return float(np.mean(rrs))


def _rank_correlation(A_true, A_hat, holdout, statistic):
    t, p, h = _holdout_pairs(A_true, A_hat, holdout)
    values = []
    skipped = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # constant rows are handled via NaN
        for true_r, pred_r in _row_sets(t, p, h, 2):
            r = statistic(true_r, pred_r)
            if np.isnan(r):
                skipped += 1  # zero variance on either side
            else:
                values.append(r)
    mean = float(np.mean(values)) if values else float("nan")
    return mean, len(values), skipped


def spearman_rho(A_true, A_hat, holdout):
    """Tie-corrected Spearman rank correlation, averaged over eligible rows."""
    mean, _, _ = _rank_correlation(
        A_true, A_hat, holdout, lambda a, b: stats.spearmanr(a, b).statistic
    )
    return mean


def kendall_tau(A_true, A_hat, holdout):
    """Tie-corrected (tau-b) Kendall correlation, averaged over eligible rows."""
    mean, _, _ = _rank_correlation(
        A_true, A_hat, holdout, lambda a, b: stats.kendalltau(a, b).statistic
    )
    return mean


@dataclass(frozen=True)
class PredictionReport:
    """Holdout metric bundle plus evaluation counts."""

    metrics: dict
    n_holdout: int
    rows_with_holdout: int
    rows_rank_eligible: int
    rows_skipped_degenerate: int

    def to_dict(self):
        out = dict(self.metrics)
        out["n_holdout"] = self.n_holdout
        out["rows_with_holdout"] = self.rows_with_holdout
        out["rows_rank_eligible"] = self.rows_rank_eligible
        out["rows_skipped_degenerate"] = self.rows_skipped_degenerate
        return out


def prediction_report(A_true, A_hat, holdout, metrics=None):
    """Compute the selected metrics (default: all) over one holdout set."""
    selected = METRIC_NAMES if metrics is None else tuple(metrics)
    unknown = set(selected) - set(METRIC_NAMES)
    if unknown:
        raise ValueError(f"unknown metrics: {sorted(unknown)}")
    t, p, h = _holdout_pairs(A_true, A_hat, holdout)
    rows_with = sum(1 for _ in _row_sets(t, p, h, 1))
    _, rank_rows, skipped = _rank_correlation(
        A_true, A_hat, holdout, lambda a, b: stats.spearmanr(a, b).statistic
    )
    values = {}
    for name in selected:
        if name == "frobenius":
            values[name] = relative_frobenius_holdout(A_true, A_hat, holdout)
        elif name == "rmse":
            values[name] = rmse(A_true, A_hat, holdout)
        elif name == "mae":
            values[name] = mae(A_true, A_hat, holdout)
        elif name == "js":
            values[name] = js_holdout(A_true, A_hat, holdout)
        elif name == "accuracy":
            values[name] = prediction_accuracy(A_true, A_hat, holdout)
        elif name == "accuracy_nonzero":
            values[name] = prediction_accuracy(
                A_true, A_hat, holdout, ignore_zeros=True
            )
        elif name == "spearman_rho":
            values[name] = spearman_rho(A_true, A_hat, holdout)
        elif name == "kendall_tau":
            values[name] = kendall_tau(A_true, A_hat, holdout)
        elif name == "mrr":
            values[name] = mean_reciprocal_rank(A_true, A_hat, holdout)
        elif name == "mrr_optimistic":
            values[name] = mean_reciprocal_rank(
                A_true, A_hat, holdout, optimistic=True
            )
    return PredictionReport(
        metrics=values,
        n_holdout=int(h.sum()),
        rows_with_holdout=rows_with,
        rows_rank_eligible=rank_rows + skipped,
        rows_skipped_degenerate=skipped,
    )
