"""Seeded synthetic matrices: block-structured patterns, recursive
quadrant (power-law) graphs, and row scrambling.

All generation runs on numpy's PCG64 generator with the seed carried in
each spec object, so outputs are bit-identical across platforms for a
fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix import CsrMatrix, _csr_from_coo, permute_rows

__all__ = [
    "BlockedMatrixSpec",
    "RmatSpec",
    "gen_blocked",
    "gen_rmat",
    "rmat_edge_draws",
    "scramble",
]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class BlockedMatrixSpec:
    """Block-structured pattern: the matrix is tiled into delta x delta
    blocks, a fraction theta of blocks is nonzero, and each nonzero block
    has in-block density rho."""

    n_rows: int
    n_cols: int
    delta: int
    theta: float
    rho: float
    seed: int

    def __post_init__(self):
        if self.delta < 1 or self.n_rows % self.delta or self.n_cols % self.delta:
            raise ValueError("delta must divide both dimensions")
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("theta must be in (0, 1]")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must be in (0, 1]")

    @property
    def n_blocks(self) -> int:
        return (self.n_rows // self.delta) * (self.n_cols // self.delta)


@dataclass(frozen=True)
class RmatSpec:
    """Recursive quadrant graph on 2**log2_nodes nodes with
    nodes * avg_degree edge draws and quadrant probabilities (a, b, c, d)."""

    log2_nodes: int
    avg_degree: int
    probabilities: tuple = (0.57, 0.19, 0.19, 0.05)
    seed: int = 0

    def __post_init__(self):
        if self.log2_nodes < 0 or self.avg_degree < 0:
            raise ValueError("log2_nodes and avg_degree must be non-negative")
        p = tuple(float(x) for x in self.probabilities)
        if len(p) != 4 or any(x < 0 for x in p) or abs(sum(p) - 1.0) > 1e-9:
            raise ValueError("probabilities must be 4 non-negatives summing to 1")
        object.__setattr__(self, "probabilities", p)

    @property
    def n_nodes(self) -> int:
        return 1 << self.log2_nodes

    @property
    def n_edge_draws(self) -> int:
        return self.n_nodes * self.avg_degree


def gen_blocked(spec: BlockedMatrixSpec) -> CsrMatrix:
    """Sample exactly round(theta*B) blocks without replacement and fill
    each with exactly round(rho*delta^2) cells of value 1.0.

    nnz is exactly the product of the two counts; identical seeds give
    identical matrices.
    """
    d = spec.delta
    bc = spec.n_cols // d
    n_sel = _round_half_up(spec.theta * spec.n_blocks)
    per_block = _round_half_up(spec.rho * d * d)
    rng = np.random.default_rng(spec.seed)
    blocks = np.sort(rng.choice(spec.n_blocks, size=n_sel, replace=False))
    rows = np.empty(n_sel * per_block, dtype=np.int64)
    cols = np.empty(n_sel * per_block, dtype=np.int64)
    for k, b in enumerate(blocks):
        cells = rng.choice(d * d, size=per_block, replace=False)
        sl = slice(k * per_block, (k + 1) * per_block)
        rows[sl] = (b // bc) * d + cells // d
        cols[sl] = (b % bc) * d + cells % d
    return _csr_from_coo(spec.n_rows, spec.n_cols, rows, cols,
                         np.ones(rows.size), sum_duplicates=False)


def rmat_edge_draws(spec: RmatSpec):
    """Raw (row, col) edge draws before duplicate collapse.

    Each draw picks a quadrant per recursion level with probabilities
    (a, b, c, d) = (top-left, top-right, bottom-left, bottom-right).
    """
    a, b, c, _ = spec.probabilities
    cum = np.array([a, a + b, a + b + c])
    rng = np.random.default_rng(spec.seed)
    rows = np.zeros(spec.n_edge_draws, dtype=np.int64)
    cols = np.zeros(spec.n_edge_draws, dtype=np.int64)
    for _level in range(spec.log2_nodes):
        quad = np.searchsorted(cum, rng.random(spec.n_edge_draws), side="right")
        rows = (rows << 1) | (quad >> 1)
        cols = (cols << 1) | (quad & 1)
    return rows, cols


def gen_rmat(spec: RmatSpec) -> CsrMatrix:
    """Adjacency pattern of the recursive quadrant graph: duplicates
    collapsed, self-loops kept, all values 1.0."""
    rows, cols = rmat_edge_draws(spec)
    n = spec.n_nodes
    keys = np.unique(rows * n + cols)
    return _csr_from_coo(n, n, keys // n, keys % n,
                         np.ones(keys.size), sum_duplicates=False)


def scramble(A: CsrMatrix, seed: int):
    """Uniform random row permutation (Fisher-Yates over PCG64).

    Returns (permuted matrix, perm) with output row i = input row perm[i];
    ``permute_rows(scrambled, np.argsort(perm))`` restores the input.
    """
    rng = np.random.default_rng(seed)
    perm = rng.permutation(A.n_rows)
    return permute_rows(A, perm), perm
