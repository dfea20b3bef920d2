"""MatrixMarket coordinate file reading and writing.

Supports `real`, `integer` and `pattern` fields with `general` or
`symmetric` storage. Symmetric files are expanded to full storage on read;
duplicate entries are summed (the usual community convention). `array`
and complex files are rejected.
"""

from __future__ import annotations

import numpy as np

from .matrix import CsrMatrix, _csr_from_coo

__all__ = ["MatrixMarketError", "read_matrix_market", "write_matrix_market"]

_FIELDS = ("real", "integer", "pattern")
_SYMMETRIES = ("general", "symmetric")


class MatrixMarketError(ValueError):
    """Parse failure; carries the offending line number."""

    def __init__(self, path, lineno, message):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


def read_matrix_market(path) -> CsrMatrix:
    """Read a MatrixMarket coordinate file into a canonical CsrMatrix.

    Pattern entries get value 1.0; symmetric storage is mirrored to full
    storage; duplicates are summed. Raises MatrixMarketError on malformed
    input and on unsupported (`array`, complex, hermitian, skew) headers.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        header = fh.readline()
        if not header.lower().startswith("%%matrixmarket"):
            raise MatrixMarketError(path, 1, "missing %%MatrixMarket header")
        parts = header.strip().split()
        if len(parts) != 5 or parts[1].lower() != "matrix":
            raise MatrixMarketError(path, 1, f"malformed header: {header.strip()!r}")
        layout, field, symmetry = (p.lower() for p in parts[2:5])
        if layout != "coordinate":
            raise MatrixMarketError(path, 1, f"unsupported layout {layout!r} (only coordinate)")
        if field not in _FIELDS:
            raise MatrixMarketError(path, 1, f"unsupported field {field!r}")
        if symmetry not in _SYMMETRIES:
            raise MatrixMarketError(path, 1, f"unsupported symmetry {symmetry!r}")

        lineno = 1
        size = None
        for line in fh:
            lineno += 1
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            toks = line.split()
            if len(toks) != 3:
                raise MatrixMarketError(path, lineno, "size line must be 'rows cols nnz'")
            try:
                size = tuple(int(t) for t in toks)
            except ValueError:
                raise MatrixMarketError(path, lineno, f"bad size line {line!r}") from None
            break
        if size is None:
            raise MatrixMarketError(path, lineno, "missing size line")
        n_rows, n_cols, n_entries = size
        if n_rows < 0 or n_cols < 0 or n_entries < 0:
            raise MatrixMarketError(path, lineno, "negative size")

        want = 2 if field == "pattern" else 3
        rows = np.empty(n_entries, dtype=np.int64)
        cols = np.empty(n_entries, dtype=np.int64)
        vals = np.ones(n_entries, dtype=np.float64)
        k = 0
        for line in fh:
            lineno += 1
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            toks = line.split()
            if len(toks) != want:
                raise MatrixMarketError(path, lineno, f"expected {want} fields, got {len(toks)}")
            if k >= n_entries:
                raise MatrixMarketError(path, lineno, "more entries than declared")
            try:
                i, j = int(toks[0]), int(toks[1])
                if want == 3:
                    vals[k] = float(toks[2])
            except ValueError:
                raise MatrixMarketError(path, lineno, f"bad entry {line!r}") from None
            if not (1 <= i <= n_rows and 1 <= j <= n_cols):
                raise MatrixMarketError(path, lineno, f"index ({i}, {j}) out of range")
            rows[k], cols[k] = i - 1, j - 1
            k += 1
        if k != n_entries:
            raise MatrixMarketError(path, lineno, f"declared {n_entries} entries, found {k}")

    if symmetry == "symmetric":
        off = rows != cols
        mirrored_r, mirrored_c = cols[off], rows[off]
        rows = np.concatenate([rows, mirrored_r])
        cols = np.concatenate([cols, mirrored_c])
        vals = np.concatenate([vals, vals[off]])
    return _csr_from_coo(n_rows, n_cols, rows, cols, vals, sum_duplicates=True)


def write_matrix_market(path, A: CsrMatrix, comment: str | None = None) -> None:
    """Write a CsrMatrix as `coordinate real general` (full storage, 1-based)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        if comment:
            for ln in comment.splitlines():
                fh.write(f"% {ln}\n")
        fh.write(f"{A.n_rows} {A.n_cols} {A.nnz}\n")
        rows = np.repeat(np.arange(A.n_rows), A.row_nnz())
        for i, j, v in zip(rows, A.col_idx, A.values):
            fh.write(f"{i + 1} {j + 1} {v:.17g}\n")
