"""rowblock: similarity-based row blocking of sparse matrices.

Groups the rows of a CSR matrix against a fixed column partition so that
nonzeros cluster into dense variable-height blocks, with an optional merge
rule that provably bounds the density of every block. Ships blocking
quality metrics, seeded synthetic generators, reference SpMM kernels and
an analytical tile-unit cost model.
"""

from .blocking import (
    GroupState,
    MergePolicy,
    QuotientRow,
    block_1sa,
    block_naive_sa,
    check_grouping,
    compress_rows,
    merge_condition,
    pathological_matrix,
    quotient_hash,
    quotient_row,
    similarity,
    singleton_grouping,
    uniform_grouping,
)
from .generators import (
    BlockedMatrixSpec,
    RmatSpec,
    gen_blocked,
    gen_rmat,
    rmat_edge_draws,
    scramble,
)
from .matrix import (
    ColumnPartition,
    CsrMatrix,
    DenseMatrix,
    RowGroup,
    RowGrouping,
    csr_from_triplets,
    permute_rows,
)
from .metrics import (
    BlockingCurve,
    BlockingStats,
    DensityReport,
    blocking_curve,
    blocking_stats,
    curve_select,
    verify_density_bound,
)
from .mtxio import MatrixMarketError, read_matrix_market, write_matrix_market
from .multiply import TcuCost, TcuModel, spmm_csr, spmm_vbr, tcu_cost, tcu_cost_from_grouping
from .vbr import (
    VbrBlock,
    VbrMatrix,
    fill_in,
    load_vbr,
    save_vbr,
    vbr_from_grouping,
    vbr_from_json,
    vbr_to_csr,
    vbr_to_dense,
    vbr_to_json,
)

__version__ = "0.1.0"
