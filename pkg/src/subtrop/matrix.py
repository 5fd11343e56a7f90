"""Dense nonnegative matrices with missing-entry masks and max-times products.

The max-times (subtropical) product replaces the sum in an ordinary matrix
product with a maximum: ``(B @* C)[i, j] = max_s B[i, s] * C[s, j]``.  Every
reconstructed entry is therefore owned by a single rank-1 block
("winner takes it all").  Matrices here are dense, row-major float64, and may
carry a per-entry observed/missing mask; missing entries hold NaN and carry
no value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "NonNegMatrix",
    "PatternMatrix",
    "Factorization",
    "maxtimes_product",
    "maxtimes_product_excluding",
    "pattern",
    "dominates",
    "sparsity",
    "transpose",
    "read_csv",
    "write_csv",
]


class NonNegMatrix:
    """A dense nonnegative real matrix with an optional missing-entry mask.

    ``values`` is an immutable (rows, cols) float64 array holding NaN at
    missing positions.  ``mask`` is either None (fully observed) or a boolean
    array with True marking observed entries.  Observed values must be finite
    and >= 0.
    """

    __slots__ = ("_values", "_mask")

    def __init__(self, values, mask=None):
        arr = np.array(values, dtype=np.float64, order="C")
        if arr.ndim != 2:
            raise ValueError(f"matrix needs 2 dimensions, got {arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"matrix dimensions must be positive, got {arr.shape}")
        if mask is not None:
            m = np.array(mask, dtype=bool)
            if m.shape != arr.shape:
                raise ValueError(f"mask shape {m.shape} != value shape {arr.shape}")
            arr[~m] = np.nan
        nan = np.isnan(arr)
        observed = ~nan
        vals = arr[observed]
        if vals.size and (np.any(vals < 0) or not np.all(np.isfinite(vals))):
            raise ValueError("observed entries must be finite and nonnegative")
        self._values = arr
        self._mask = None if not nan.any() else observed
        self._values.setflags(write=False)
        if self._mask is not None:
            self._mask.setflags(write=False)

    @property
    def values(self):
        """(rows, cols) float64 array; missing entries are NaN."""
        return self._values

    @property
    def mask(self):
        """Boolean observed-entry mask, or None when fully observed."""
        return self._mask

    @property
    def observed(self):
        """Boolean mask of observed entries (all True when no mask)."""
        if self._mask is None:
            return np.ones(self._values.shape, dtype=bool)
        return self._mask

    @property
    def is_fully_observed(self):
        return self._mask is None

    @property
    def shape(self):
        return self._values.shape

    @property
    def rows(self):
        return self._values.shape[0]

    @property
    def cols(self):
        return self._values.shape[1]

    def filled(self, fill=0.0):
        """Return a plain array with missing entries replaced by ``fill``."""
        if self._mask is None:
            return self._values.copy()
        return np.where(self._mask, self._values, fill)

    def transpose(self):
        """Transpose; the mask transposes along with the values."""
        return NonNegMatrix(self._values.T)

    def count_missing(self):
        return 0 if self._mask is None else int((~self._mask).sum())

    def __repr__(self):
        miss = self.count_missing()
        tail = f", missing={miss}" if miss else ""
        return f"NonNegMatrix({self.rows}x{self.cols}{tail})"


@dataclass(frozen=True)
class PatternMatrix:
    """Binary indicator of a matrix's nonzero positions."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.array(self.bits, dtype=np.uint8)
        if b.ndim != 2:
            raise ValueError("pattern needs 2 dimensions")
        if np.any(b > 1):
            raise ValueError("pattern entries must be 0 or 1")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @property
    def rows(self):
        return self.bits.shape[0]

    @property
    def cols(self):
        return self.bits.shape[1]

    def __eq__(self, other):
        if not isinstance(other, PatternMatrix):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(
            np.all(self.bits == other.bits)
        )

    def __hash__(self):
        return hash((self.bits.shape, self.bits.tobytes()))


@dataclass(frozen=True)
class Factorization:
    """A rank-k pair of nonnegative factors plus run metadata.

    ``scale`` records the factor by which the input was divided before the
    run (the left factor has already been multiplied back, so
    ``reconstruct()`` is directly comparable with the original data).
    """

    B: NonNegMatrix
    C: NonNegMatrix
    rank: int
    scale: float = 1.0
    objective_name: str = ""

    def __post_init__(self):
        if not self.B.is_fully_observed or not self.C.is_fully_observed:
            raise ValueError("factor matrices cannot have missing entries")
        if self.B.cols != self.rank or self.C.rows != self.rank:
            raise ValueError(
                f"factor shapes {self.B.shape} x {self.C.shape} "
                f"do not match rank {self.rank}"
            )
        if not (self.scale > 0):
            raise ValueError("scale must be positive")

    def reconstruct(self):
        """Max-times product of the factors."""
        return maxtimes_product(self.B, self.C)


# ---------------------------------------------------------------------------
# raw-array kernels (shared by the solvers, which keep factors as ndarrays)

def maxtimes_values(B, C):
    """Max-times product of two plain arrays; rank 0 gives all zeros."""
    B = np.asarray(B, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    n, k = B.shape
    k2, m = C.shape
    if k != k2:
        raise ValueError(f"inner dimensions differ: {k} vs {k2}")
    out = np.zeros((n, m))
    for s in range(k):
        np.maximum(out, np.outer(B[:, s], C[s]), out=out)
    return out


def maxtimes_values_excluding(B, C, block):
    """Product of plain factor arrays with 1-based ``block`` removed."""
    B = np.asarray(B, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    k = B.shape[1]
    if not 1 <= block <= k:
        raise ValueError(f"block index {block} out of range 1..{k}")
    keep = [s for s in range(k) if s != block - 1]
    return maxtimes_values(B[:, keep], C[keep, :])


# ---------------------------------------------------------------------------
# operations on NonNegMatrix

def _as_values(M, who):
    if isinstance(M, NonNegMatrix):
        if not M.is_fully_observed:
            raise ValueError(f"{who} must not have missing entries")
        return M.values
    return np.asarray(M, dtype=np.float64)


def maxtimes_product(B, C):
    """Max-times matrix product of two fully observed matrices."""
    Bv = _as_values(B, "left factor")
    Cv = _as_values(C, "right factor")
    return NonNegMatrix(maxtimes_values(Bv, Cv))


def maxtimes_product_excluding(B, C, block):
    """Max-times product with the 1-based rank-1 ``block`` removed.

    With a single block this is the rank-0 decomposition, an all-zero matrix.
    """
    Bv = _as_values(B, "left factor")
    Cv = _as_values(C, "right factor")
    return NonNegMatrix(maxtimes_values_excluding(Bv, Cv, block))


def pattern(A):
    """Binary pattern of a fully observed matrix (1 where the entry is > 0)."""
    Av = _as_values(A, "pattern input")
    return PatternMatrix((Av > 0).astype(np.uint8))


def dominates(X, A, region=None):
    """True iff X >= A on ``region`` (default: entries observed in both)."""
    Xm = X if isinstance(X, NonNegMatrix) else NonNegMatrix(np.asarray(X, float))
    Am = A if isinstance(A, NonNegMatrix) else NonNegMatrix(np.asarray(A, float))
    if Xm.shape != Am.shape:
        raise ValueError(f"shape mismatch: {Xm.shape} vs {Am.shape}")
    if region is None:
        region = Xm.observed & Am.observed
    else:
        region = np.asarray(region, dtype=bool)
        if region.shape != Xm.shape:
            raise ValueError(f"region shape {region.shape} != {Xm.shape}")
    x = Xm.filled(0.0)
    a = Am.filled(0.0)
    return bool(np.all(x[region] >= a[region]))


def sparsity(A):
    """Fraction of zero entries, (n*m - nnz) / (n*m); needs full observation."""
    Av = _as_values(A, "sparsity input")
    total = Av.size
    return float((total - np.count_nonzero(Av)) / total)


def transpose(A):
    """Transpose, carrying any mask along."""
    if isinstance(A, NonNegMatrix):
        return A.transpose()
    return NonNegMatrix(np.asarray(A, dtype=np.float64).T)


# ---------------------------------------------------------------------------
# CSV interchange: one matrix row per line, `NaN` marks a missing entry

_FLOAT_FMT = "%.17g"  # full float64 round-trip (spec floor is 12 significant digits)


def write_csv(A, path, header=None):
    """Write a matrix as CSV; missing entries are emitted as ``NaN``."""
    vals = A.values if isinstance(A, NonNegMatrix) else np.asarray(A, float)
    with open(path, "w", encoding="utf-8") as fh:
        if header is not None:
            fh.write(header.rstrip("\n") + "\n")
        for row in vals:
            fh.write(
                ",".join("NaN" if np.isnan(v) else _FLOAT_FMT % v for v in row)
            )
            fh.write("\n")


def read_csv(path, skip_header=False):
    """Read a matrix from CSV; the token ``NaN`` (any case) is a missing entry."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in (line.strip() for line in fh) if ln]
    if skip_header and lines:
        lines = lines[1:]
    if not lines:
        raise ValueError(f"{path}: no data rows")
    for i, line in enumerate(lines, start=1):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ValueError(
                f"{path}: row {i} has {len(cells)} cells, expected {width}"
            )
        parsed = []
        for j, cell in enumerate(cells, start=1):
            token = cell.strip()
            if token.lower() == "nan":
                parsed.append(np.nan)
                continue
            try:
                parsed.append(float(token))
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell at row {i}, column {j}: {token!r}"
                ) from None
        rows.append(parsed)
    return NonNegMatrix(np.array(rows, dtype=np.float64))
