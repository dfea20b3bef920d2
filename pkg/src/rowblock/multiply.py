"""Reference sparse-times-dense kernels and the tensor-unit cost estimator.

Both kernels accumulate in float64 in a fixed order per output row, so for
a given input the result is bit-identical whatever the thread count: the
threads only split disjoint output rows, never a reduction.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .matrix import ColumnPartition, CsrMatrix, DenseMatrix, RowGrouping
from .vbr import VbrMatrix

__all__ = ["TcuModel", "TcuCost", "spmm_csr", "spmm_vbr", "tcu_cost",
           "tcu_cost_from_grouping"]


@dataclass(frozen=True)
class TcuModel:
    """Accelerator with a unit that multiplies sqrt(m) x sqrt(m) dense
    tiles; ell is its latency cost. Multiplying r x c by c x s costs
    r*c*s/sqrt(m) + c*s*ell/m (all model constants taken as 1)."""

    m: float
    ell: float

    def __post_init__(self):
        if self.m < 1 or self.ell <= 0:
            raise ValueError("require m >= 1 and ell > 0")


class TcuCost(NamedTuple):
    blocked: float
    trivial: float


def _chunks(n: int, parts: int):
    if n == 0:
        return []
    parts = max(1, min(parts, n))
    step = (n + parts - 1) // parts
    return [(lo, min(lo + step, n)) for lo in range(0, n, step)]


def spmm_csr(A: CsrMatrix, B: DenseMatrix, threads: int = 1) -> DenseMatrix:
    """Row-by-row sparse-times-dense product: C[i,:] = sum_j a_ij * B[j,:]."""
    if A.n_cols != B.n_rows:
        raise ValueError(f"dimension mismatch: {A.n_cols} vs {B.n_rows}")
    C = np.zeros((A.n_rows, B.n_cols))
    Bd = B.data

    def run(span):
        for i in range(*span):
            s, e = A.row_ptr[i], A.row_ptr[i + 1]
            if e > s:
                C[i] = A.values[s:e] @ Bd[A.col_idx[s:e]]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, _chunks(A.n_rows, threads)))
    else:
        run((0, A.n_rows))
    return DenseMatrix(A.n_rows, B.n_cols, C)


def spmm_vbr(V: VbrMatrix, B: DenseMatrix, threads: int = 1) -> DenseMatrix:
    """Block-based product: every stored block hits a dense micro-GEMM and
    accumulates into its block row; the output is un-permuted back to the
    source row order."""
    if V.n_cols != B.n_rows:
        raise ValueError(f"dimension mismatch: {V.n_cols} vs {B.n_rows}")
    C = np.zeros((V.n_rows, B.n_cols))
    Bd = B.data
    bounds = V.col_partition.boundaries

    def run(span):
        for g in range(*span):
            lo, hi = V.row_partition[g], V.row_partition[g + 1]
            if hi == lo or not V.block_rows[g]:
                continue
            acc = np.zeros((hi - lo, B.n_cols))
            for blk in V.block_rows[g]:
                acc += blk.data @ Bd[bounds[blk.bcol] : bounds[blk.bcol + 1]]
            C[V.row_perm[lo:hi]] = acc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, _chunks(V.n_block_rows, threads)))
    else:
        run((0, V.n_block_rows))
    return DenseMatrix(V.n_rows, B.n_cols, C)


def _blocked_cost(heights_and_widths, n_dense_cols: int, model: TcuModel) -> float:
    sqrt_m = math.sqrt(model.m)
    total = 0.0
    for r, c in heights_and_widths:
        total += r * c * n_dense_cols / sqrt_m + c * n_dense_cols * model.ell / model.m
    return total


def _trivial_cost(n_rows: int, n_cols: int, n_dense_cols: int, model: TcuModel) -> float:
    sqrt_m = math.sqrt(model.m)
    return (n_rows * n_cols * n_dense_cols / sqrt_m
            + n_cols * n_dense_cols * model.ell / model.m)


def tcu_cost(V: VbrMatrix, n_dense_cols: int, model: TcuModel) -> TcuCost:
    """Analytical cost of multiplying the blocking by an n_dense_cols-wide
    dense matrix on the tile unit, next to the cost of the trivial dense
    product.

    Per block row: r*c*N/sqrt(m) + c*N*ell/m, where c is the total column
    count of its stored segments. Heights are used as-is (no padding up to
    sqrt(m)).
    """
    widths = V.col_partition.widths
    hw = [
        (V.block_row_height(g), int(sum(widths[b.bcol] for b in V.block_rows[g])))
        for g in range(V.n_block_rows)
    ]
    return TcuCost(_blocked_cost(hw, n_dense_cols, model),
                   _trivial_cost(V.n_rows, V.n_cols, n_dense_cols, model))


def tcu_cost_from_grouping(grouping: RowGrouping, partition: ColumnPartition,
                           n_rows: int, n_cols: int, n_dense_cols: int,
                           model: TcuModel) -> TcuCost:
    """Same estimate as tcu_cost but straight from a grouping, without
    materializing payloads."""
    widths = partition.widths
    hw = [(g.n_rows, int(widths[g.pattern].sum())) for g in grouping.groups]
    return TcuCost(_blocked_cost(hw, n_dense_cols, model),
                   _trivial_cost(n_rows, n_cols, n_dense_cols, model))
