"""Variable-block-row storage: groups of rows crossed with the column
partition, nonzero blocks stored densely.

A VbrMatrix is defined relative to a row permutation (group members are
laid out contiguously) and stores a dense payload for every block that
contains at least one nonzero of the source matrix. Fill-in zeros exist
only inside stored blocks, so reconstructing through the permutation
reproduces the source matrix exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .matrix import ColumnPartition, CsrMatrix, RowGrouping, _csr_from_coo, _freeze

__all__ = [
    "VbrBlock",
    "VbrMatrix",
    "vbr_from_grouping",
    "fill_in",
    "vbr_to_dense",
    "vbr_to_csr",
    "vbr_to_json",
    "vbr_from_json",
    "save_vbr",
    "load_vbr",
]


@dataclass(frozen=True)
class VbrBlock:
    """One stored block: its block-column index and a dense row-major
    payload of shape (block-row height, segment width)."""

    bcol: int
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _freeze(np.asarray(self.data, dtype=np.float64)))


@dataclass(frozen=True)
class VbrMatrix:
    """Blocked matrix: row partition over permuted rows x column partition.

    ``row_perm[i]`` is the source row stored at permuted position i;
    ``row_partition`` gives block-row extents over permuted positions;
    ``block_rows[g]`` lists the stored blocks of block row g with strictly
    increasing block-column indices.
    """

    n_rows: int
    n_cols: int
    row_partition: np.ndarray
    col_partition: ColumnPartition
    row_perm: np.ndarray
    block_rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "row_partition", _freeze(np.asarray(self.row_partition, np.int64)))
        object.__setattr__(self, "row_perm", _freeze(np.asarray(self.row_perm, np.int64)))
        object.__setattr__(self, "block_rows", tuple(tuple(br) for br in self.block_rows))

    @property
    def n_block_rows(self) -> int:
        return len(self.row_partition) - 1

    @property
    def n_stored_blocks(self) -> int:
        return sum(len(br) for br in self.block_rows)

    @property
    def stored_area(self) -> int:
        return sum(int(b.data.size) for br in self.block_rows for b in br)

    @property
    def nnz(self) -> int:
        return sum(int(np.count_nonzero(b.data)) for br in self.block_rows for b in br)

    def block_row_height(self, g: int) -> int:
        return int(self.row_partition[g + 1] - self.row_partition[g])


def vbr_from_grouping(A: CsrMatrix, grouping: RowGrouping,
                      partition: ColumnPartition) -> VbrMatrix:
    """Materialize the VBR form of A under the given row grouping.

    The row permutation lists group members contiguously (groups in id
    order, members in merge order). A block is stored iff it contains at
    least one nonzero; stored blocks are dense with fill-in zeros.
    """
    if len(grouping.group_of) != A.n_rows or partition.n_cols != A.n_cols:
        raise ValueError("grouping/partition inconsistent with matrix dimensions")
    bounds = partition.boundaries
    row_perm = (np.concatenate([g.rows for g in grouping.groups])
                if grouping.n_groups else np.empty(0, np.int64))
    heights = grouping.heights()
    row_partition = np.zeros(grouping.n_groups + 1, dtype=np.int64)
    np.cumsum(heights, out=row_partition[1:])
    block_rows = []
    for grp in grouping.groups:
        # stored block columns are recomputed from the data so the
        # "stored iff nonzero" invariant holds for any caller-built grouping
        segs = sorted({
            int(s)
            for i in grp.rows
            for s in np.unique(partition.segment_of(A.row_cols(i)))
        })
        payloads = {
            s: np.zeros((grp.n_rows, int(bounds[s + 1] - bounds[s])))
            for s in segs
        }
        for local, i in enumerate(grp.rows):
            cols = A.row_cols(i)
            vals = A.row_values(i)
            seg_of = partition.segment_of(cols)
            for s in np.unique(seg_of):
                mask = seg_of == s
                payloads[int(s)][local, cols[mask] - bounds[s]] = vals[mask]
        block_rows.append(tuple(VbrBlock(s, payloads[s]) for s in segs))
    return VbrMatrix(A.n_rows, A.n_cols, row_partition, partition, row_perm, block_rows)


def fill_in(V: VbrMatrix) -> int:
    """Zeros stored inside nonzero blocks: stored area minus nnz."""
    return V.stored_area - V.nnz


def vbr_to_dense(V: VbrMatrix) -> np.ndarray:
    """Dense reconstruction in the source matrix's original row order."""
    out = np.zeros((V.n_rows, V.n_cols))
    bounds = V.col_partition.boundaries
    for g in range(V.n_block_rows):
        lo, hi = V.row_partition[g], V.row_partition[g + 1]
        rows = V.row_perm[lo:hi]
        for blk in V.block_rows[g]:
            out[rows, bounds[blk.bcol] : bounds[blk.bcol + 1]] = blk.data
    return out


def vbr_to_csr(V: VbrMatrix) -> CsrMatrix:
    """Canonical CSR of the reconstructed matrix (fill-in dropped)."""
    rows, cols, vals = [], [], []
    bounds = V.col_partition.boundaries
    for g in range(V.n_block_rows):
        lo, hi = V.row_partition[g], V.row_partition[g + 1]
        orig = V.row_perm[lo:hi]
        for blk in V.block_rows[g]:
            r, c = np.nonzero(blk.data)
            rows.append(orig[r])
            cols.append(c + bounds[blk.bcol])
            vals.append(blk.data[r, c])
    if not rows:
        return _csr_from_coo(V.n_rows, V.n_cols, [], [], [], sum_duplicates=False)
    return _csr_from_coo(V.n_rows, V.n_cols, np.concatenate(rows),
                         np.concatenate(cols), np.concatenate(vals),
                         sum_duplicates=False)


# ---------------------------------------------------------------------------
# JSON interchange (debugging only; payloads are stored as flat lists)

def vbr_to_json(V: VbrMatrix) -> dict:
    return {
        "n_rows": V.n_rows,
        "n_cols": V.n_cols,
        "row_partition": V.row_partition.tolist(),
        "col_boundaries": V.col_partition.boundaries.tolist(),
        "row_perm": V.row_perm.tolist(),
        "blocks": [
            {"brow": g, "bcol": b.bcol, "data": b.data.ravel().tolist()}
            for g in range(V.n_block_rows)
            for b in V.block_rows[g]
        ],
    }


def vbr_from_json(doc: dict) -> VbrMatrix:
    part = ColumnPartition(doc["col_boundaries"][-1], np.asarray(doc["col_boundaries"]))
    row_partition = np.asarray(doc["row_partition"], dtype=np.int64)
    widths = part.widths
    block_rows: list[list[VbrBlock]] = [[] for _ in range(len(row_partition) - 1)]
    for b in doc["blocks"]:
        g, bcol = b["brow"], b["bcol"]
        h = int(row_partition[g + 1] - row_partition[g])
        block_rows[g].append(VbrBlock(bcol, np.asarray(b["data"]).reshape(h, widths[bcol])))
    return VbrMatrix(doc["n_rows"], doc["n_cols"], row_partition, part,
                     np.asarray(doc["row_perm"]), block_rows)


def save_vbr(path, V: VbrMatrix) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(vbr_to_json(V), fh)


def load_vbr(path) -> VbrMatrix:
    with open(path, "r", encoding="ascii") as fh:
        return vbr_from_json(json.load(fh))
