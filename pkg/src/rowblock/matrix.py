"""Core matrix types: CSR and dense matrices, column partitions, row groupings.

Everything downstream (blocking, metrics, kernels) consumes these types.
All of them are immutable after construction and safe to share across
threads; the backing numpy arrays are marked read-only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "CsrMatrix",
    "DenseMatrix",
    "ColumnPartition",
    "RowGroup",
    "RowGrouping",
    "csr_from_triplets",
    "permute_rows",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse rows with 64-bit float values.

    Row i occupies ``col_idx[row_ptr[i]:row_ptr[i+1]]`` with columns
    strictly increasing inside each row and no explicitly stored zeros.
    Blocking only ever reads ``row_ptr``/``col_idx`` (the pattern view);
    ``values`` is untouched until a kernel or VBR payload needs it.
    """

    n_rows: int
    n_cols: int
    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row_ptr", _freeze(np.asarray(self.row_ptr, dtype=np.int64)))
        object.__setattr__(self, "col_idx", _freeze(np.asarray(self.col_idx, dtype=np.int64)))
        object.__setattr__(self, "values", _freeze(np.asarray(self.values, dtype=np.float64)))

    @property
    def nnz(self) -> int:
        return int(self.row_ptr[-1])

    @property
    def density(self) -> float:
        """Overall density: nnz divided by the full matrix area."""
        area = self.n_rows * self.n_cols
        return self.nnz / area if area else 0.0

    def row_nnz(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def row_cols(self, i: int) -> np.ndarray:
        """Column indices of row i (pattern-only view, no values)."""
        return self.col_idx[self.row_ptr[i] : self.row_ptr[i + 1]]

    def row_values(self, i: int) -> np.ndarray:
        return self.values[self.row_ptr[i] : self.row_ptr[i + 1]]

    def to_dense(self) -> np.ndarray:
        """Dense (n_rows, n_cols) float64 array with the same entries."""
        out = np.zeros((self.n_rows, self.n_cols), dtype=np.float64)
        rows = np.repeat(np.arange(self.n_rows), self.row_nnz())
        out[rows, self.col_idx] = self.values
        return out

    def validate(self) -> None:
        """Raise ValueError if any CSR invariant is violated."""
        if self.row_ptr.shape != (self.n_rows + 1,):
            raise ValueError("row_ptr must have length n_rows+1")
        if self.row_ptr[0] != 0 or np.any(np.diff(self.row_ptr) < 0):
            raise ValueError("row_ptr must be non-decreasing and start at 0")
        nnz = self.nnz
        if self.col_idx.shape != (nnz,) or self.values.shape != (nnz,):
            raise ValueError("col_idx/values length must equal nnz")
        if nnz:
            if self.col_idx.min() < 0 or self.col_idx.max() >= self.n_cols:
                raise ValueError("column index out of range")
            for i in range(self.n_rows):
                cols = self.row_cols(i)
                if cols.size > 1 and np.any(np.diff(cols) <= 0):
                    raise ValueError(f"row {i}: columns not strictly increasing")
            if np.any(self.values == 0.0):
                raise ValueError("explicit zeros stored")


@dataclass(frozen=True)
class DenseMatrix:
    """Row-major dense float64 matrix; ``data`` has shape (n_rows, n_cols)."""

    n_rows: int
    n_cols: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.size != self.n_rows * self.n_cols:
            raise ValueError("data length must equal n_rows * n_cols")
        object.__setattr__(self, "data", _freeze(data.reshape(self.n_rows, self.n_cols)))

    @classmethod
    def from_array(cls, a) -> "DenseMatrix":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        return cls(a.shape[0], a.shape[1], a)

    @classmethod
    def zeros(cls, n_rows: int, n_cols: int) -> "DenseMatrix":
        return cls(n_rows, n_cols, np.zeros((n_rows, n_cols)))


@dataclass(frozen=True)
class ColumnPartition:
    """Fixed partition of the columns into contiguous segments.

    ``boundaries`` is strictly increasing, starts at 0 and ends at
    ``n_cols``; segment j covers columns [boundaries[j], boundaries[j+1]).
    """

    n_cols: int
    boundaries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=np.int64)
        if b.size == 0 or b[0] != 0 or b[-1] != self.n_cols:
            raise ValueError("boundaries must start at 0 and end at n_cols")
        if np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", _freeze(b))

    @classmethod
    def uniform(cls, n_cols: int, width: int) -> "ColumnPartition":
        """Segments of the given width; the last one may be narrower."""
        if width < 1:
            raise ValueError("width must be >= 1")
        b = np.arange(0, n_cols, width, dtype=np.int64)
        return cls(n_cols, np.append(b, n_cols))

    @property
    def n_segments(self) -> int:
        return len(self.boundaries) - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.boundaries)

    @property
    def max_width(self) -> int:
        return int(self.widths.max()) if self.n_segments else 0

    def segment_of(self, cols) -> np.ndarray:
        """Segment index for each column index (vectorized)."""
        return np.searchsorted(self.boundaries, np.asarray(cols), side="right") - 1


@dataclass(frozen=True)
class RowGroup:
    """One group of rows: members in merge order (``rows[0]`` is the seed),
    the group's quotient pattern (OR of the members' quotient rows, as
    sorted segment indices), and the seed's quotient pattern size."""

    rows: np.ndarray
    pattern: np.ndarray
    seed_size: int

    def __post_init__(self):
        object.__setattr__(self, "rows", _freeze(np.asarray(self.rows, dtype=np.int64)))
        object.__setattr__(self, "pattern", _freeze(np.asarray(self.pattern, dtype=np.int64)))

    @property
    def n_rows(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class RowGrouping:
    """Partition of the rows into groups, as produced by the blocking loop.

    ``group_of[i]`` is the group id of row i; ``groups[g].rows`` lists the
    members of group g in the order they were merged.
    """

    group_of: np.ndarray
    groups: tuple

    def __post_init__(self):
        object.__setattr__(self, "group_of", _freeze(np.asarray(self.group_of, dtype=np.int64)))
        object.__setattr__(self, "groups", tuple(self.groups))

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def n_rows(self) -> int:
        return len(self.group_of)

    def heights(self) -> np.ndarray:
        return np.array([g.n_rows for g in self.groups], dtype=np.int64)


def _csr_from_coo(n_rows, n_cols, rows, cols, vals, *, sum_duplicates: bool):
    """Canonical CSR from unordered coordinates; sums or rejects duplicates,
    drops resulting zeros."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if rows.size:
        if rows.min() < 0 or rows.max() >= n_rows:
            raise ValueError("row index out of range")
        if cols.min() < 0 or cols.max() >= n_cols:
            raise ValueError("column index out of range")
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    if rows.size > 1:
        dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
        if np.any(dup):
            if not sum_duplicates:
                k = int(np.flatnonzero(dup)[0])
                raise ValueError(f"duplicate coordinate ({rows[k]}, {cols[k]})")
            # collapse runs of equal (row, col) by segment-summing values
            first = np.concatenate(([True], ~dup))
            starts = np.flatnonzero(first)
            vals = np.add.reduceat(vals, starts)
            rows, cols = rows[starts], cols[starts]
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    row_ptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n_rows), out=row_ptr[1:])
    return CsrMatrix(n_rows, n_cols, row_ptr, cols, vals)


def csr_from_triplets(n_rows: int, n_cols: int, triplets) -> CsrMatrix:
    """Build a canonical CsrMatrix from (row, col, value) triplets.

    Indices must be in range and coordinates unique; explicit zeros are
    dropped. Raises ValueError otherwise.
    """
    if n_rows < 0 or n_cols < 0:
        raise ValueError("dimensions must be non-negative")
    triplets = list(triplets)
    if not triplets:
        return CsrMatrix(n_rows, n_cols, np.zeros(n_rows + 1, np.int64), [], [])
    rows, cols, vals = zip(*triplets)
    return _csr_from_coo(n_rows, n_cols, rows, cols, vals, sum_duplicates=False)


def permute_rows(A: CsrMatrix, perm) -> CsrMatrix:
    """Reorder rows so that output row i is input row perm[i].

    ``perm`` must be a bijection on {0..n_rows-1}; nnz and row contents are
    preserved.
    """
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (A.n_rows,) or not np.array_equal(np.sort(perm), np.arange(A.n_rows)):
        raise ValueError("perm must be a permutation of 0..n_rows-1")
    counts = A.row_nnz()[perm]
    row_ptr = np.zeros(A.n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=row_ptr[1:])
    col_idx = np.empty(A.nnz, dtype=np.int64)
    values = np.empty(A.nnz, dtype=np.float64)
    for i, src in enumerate(perm):
        s, e = A.row_ptr[src], A.row_ptr[src + 1]
        col_idx[row_ptr[i] : row_ptr[i + 1]] = A.col_idx[s:e]
        values[row_ptr[i] : row_ptr[i + 1]] = A.values[s:e]
    return CsrMatrix(A.n_rows, A.n_cols, row_ptr, col_idx, values)
