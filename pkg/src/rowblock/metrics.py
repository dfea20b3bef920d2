"""Blocking quality: in-block density, average block height, fill-in,
curves over the similarity threshold, and the group-density verifier.

Stats are computed from the grouping's patterns directly (no VBR payloads
are materialized). Density rho' is total nnz over total stored-block area;
the block height delta_h' is averaged per stored nonzero block (a
per-group mean is also exposed for diagnostics).
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .blocking import MergePolicy, block_1sa
from .matrix import ColumnPartition, CsrMatrix, RowGrouping

__all__ = [
    "BlockingStats",
    "BlockingCurve",
    "GroupDensity",
    "DensityReport",
    "blocking_stats",
    "blocking_curve",
    "curve_select",
    "verify_density_bound",
]


@dataclass(frozen=True)
class BlockingStats:
    """Quality numbers for one blocking of one matrix."""

    rho_prime: float
    delta_h_prime: float
    n_groups: int
    n_stored_blocks: int
    fill_in: int
    nnz: int
    stored_area: int
    group_mean_height: float
    tau: float | None = None
    density_bound_ok: bool | None = None


@dataclass(frozen=True)
class BlockingCurve:
    """Stats per tau, ascending, all computed from the same input and
    partition; ``meta`` carries matrix provenance for reports."""

    points: tuple
    meta: dict

    def taus(self):
        return [t for t, _ in self.points]


def blocking_stats(A: CsrMatrix, grouping: RowGrouping, partition: ColumnPartition,
                   tau: float | None = None, check_bound: bool = False) -> BlockingStats:
    """Compute density/height/fill-in for a blocking.

    With ``check_bound`` the group-density verifier runs and its verdict
    lands in ``density_bound_ok`` (meaningful for bounded-policy
    groupings; requires ``tau``).
    """
    if A.nnz == 0:
        raise ValueError("blocking stats are undefined for an empty matrix")
    widths = partition.widths
    area = 0
    n_blocks = 0
    height_sum = 0  # over stored blocks
    for grp in grouping.groups:
        w = int(widths[grp.pattern].sum())
        area += grp.n_rows * w
        n_blocks += len(grp.pattern)
        height_sum += grp.n_rows * len(grp.pattern)
    heights = grouping.heights()
    bound_ok = None
    if check_bound:
        if tau is None:
            raise ValueError("check_bound requires tau")
        bound_ok = verify_density_bound(A, grouping, partition, tau).all_ok
    return BlockingStats(
        rho_prime=A.nnz / area,
        delta_h_prime=height_sum / n_blocks if n_blocks else 0.0,
        n_groups=grouping.n_groups,
        n_stored_blocks=n_blocks,
        fill_in=area - A.nnz,
        nnz=A.nnz,
        stored_area=area,
        group_mean_height=float(heights.mean()) if grouping.n_groups else 0.0,
        tau=tau,
        density_bound_ok=bound_ok,
    )


def _curve_point(args):
    A, partition, tau, policy, use_compression = args
    p = MergePolicy(similarity=policy.similarity, tau=tau,
                    bounded=policy.bounded, pattern_update=policy.pattern_update)
    g = block_1sa(A, partition, p, use_compression=use_compression)
    return tau, blocking_stats(A, g, partition, tau=tau, check_bound=policy.bounded)


def blocking_curve(A: CsrMatrix, partition: ColumnPartition, taus,
                   policy: MergePolicy = MergePolicy(), use_compression: bool = True,
                   jobs: int = 1, meta: dict | None = None) -> BlockingCurve:
    """Run the grouping once per tau on the same input and collect stats.

    ``taus`` must be non-empty, strictly increasing, within [0, 1]. Points
    are independent; ``jobs`` > 1 evaluates them in a process pool (the
    result order is by tau either way).
    """
    taus = [float(t) for t in taus]
    if not taus or any(not 0.0 <= t <= 1.0 for t in taus):
        raise ValueError("taus must be non-empty and within [0, 1]")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise ValueError("taus must be strictly increasing")
    work = [(A, partition, t, policy, use_compression) for t in taus]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(_curve_point, work))
    else:
        points = [_curve_point(w) for w in work]
    base = {"n_rows": A.n_rows, "n_cols": A.n_cols, "nnz": A.nnz}
    if meta:
        base.update(meta)
    return BlockingCurve(tuple(points), base)


def curve_select(curve: BlockingCurve, at_height: float | None = None,
                 at_density: float | None = None):
    """Pick the curve point whose block height (or density) is closest to
    the target; ties go to the larger tau. Returns (tau, stats)."""
    if (at_height is None) == (at_density is None):
        raise ValueError("pass exactly one of at_height / at_density")
    if not curve.points:
        raise ValueError("empty curve")
    best = None
    best_key = None
    for tau, stats in curve.points:  # ascending tau; <= keeps the later one
        key = (abs(stats.delta_h_prime - at_height) if at_height is not None
               else abs(stats.rho_prime - at_density))
        if best_key is None or key <= best_key:
            best, best_key = (tau, stats), key
    return best


@dataclass(frozen=True)
class GroupDensity:
    """Per-group verdict of the density verifier."""

    group: int
    n_rows: int
    pattern_size: int
    stored_cols: int
    element_nnz: int
    quotient_nnz: int
    element_density: float
    quotient_density: float
    element_ok: bool
    quotient_ok: bool


@dataclass(frozen=True)
class DensityReport:
    groups: tuple
    element_bound: float
    quotient_bound: float
    all_ok: bool

    @property
    def n_violations(self) -> int:
        return sum(1 for g in self.groups if not (g.element_ok and g.quotient_ok))


def verify_density_bound(A: CsrMatrix, grouping: RowGrouping,
                         partition: ColumnPartition, tau: float) -> DensityReport:
    """Check the guaranteed density of every group of a bounded-policy
    blocking.

    For each group, the element density over (member rows x the columns of
    the group's non-empty segments) must be at least tau / (2 * max
    segment width), and the quotient density over (member rows x pattern
    segments) at least tau / 2. Comparisons are exact (rational
    arithmetic), no tolerance. Groups with empty patterns have no stored
    area and pass vacuously.
    """
    from .blocking import _quotient_bits

    widths = partition.widths
    max_w = partition.max_width if partition.n_segments else 1
    f_tau = Fraction(float(tau))
    elem_bound = f_tau / (2 * max_w)
    quot_bound = f_tau / 2
    row_nnz = A.row_nnz()
    _, quot_sizes = _quotient_bits(A, partition)
    checks = []
    ok = True
    for gid, grp in enumerate(grouping.groups):
        lam = len(grp.pattern)
        if lam == 0:
            checks.append(GroupDensity(gid, grp.n_rows, 0, 0, 0, 0, 1.0, 1.0, True, True))
            continue
        stored_cols = int(widths[grp.pattern].sum())
        k_elem = int(row_nnz[grp.rows].sum())
        k_quot = int(quot_sizes[grp.rows].sum())
        h = grp.n_rows
        e_ok = Fraction(k_elem, h * stored_cols) >= elem_bound
        q_ok = Fraction(k_quot, h * lam) >= quot_bound
        ok &= e_ok and q_ok
        checks.append(GroupDensity(gid, h, lam, stored_cols, k_elem, k_quot,
                                   k_elem / (h * stored_cols), k_quot / (h * lam),
                                   bool(e_ok), bool(q_ok)))
    return DensityReport(tuple(checks), float(elem_bound), float(quot_bound), bool(ok))
