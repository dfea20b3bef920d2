"""Similarity-based row grouping against a fixed column partition.

Rows are projected onto the column partition ("quotient rows": one bit per
segment), identical quotient rows are compressed away, and a single greedy
scan merges similar rows into groups. The merge rule is pluggable: Jaccard
or cosine similarity against the group's current pattern, optionally with a
pattern-size cap that guarantees a lower bound on the density of every
group (see metrics.verify_density_bound).

The scan itself is the classic one-pass loop: the first unassigned row
seeds a group, every later unassigned row is tested once against the
group's pattern at the moment its turn comes, and accepted rows may update
the pattern for subsequent tests. Internally rows are packed into uint64
bitsets so candidate evaluation is vectorized; the semantics are exactly
those of the scalar loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .matrix import ColumnPartition, CsrMatrix, RowGroup, RowGrouping, csr_from_triplets

__all__ = [
    "QuotientRow",
    "MergePolicy",
    "GroupState",
    "quotient_row",
    "quotient_hash",
    "compress_rows",
    "similarity",
    "merge_condition",
    "block_1sa",
    "block_naive_sa",
    "pathological_matrix",
    "singleton_grouping",
    "uniform_grouping",
    "check_grouping",
]


@dataclass(frozen=True)
class QuotientRow:
    """A row projected onto the column partition: the sorted segment
    indices holding at least one nonzero, plus the source rows sharing
    this pattern (more than one after compression)."""

    segments: np.ndarray
    source_rows: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "segments", np.asarray(self.segments, dtype=np.int64))
        object.__setattr__(self, "source_rows", np.asarray(self.source_rows, dtype=np.int64))

    @property
    def size(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class MergePolicy:
    """Merge rule for the grouping scan.

    similarity: "jaccard" or "cosine" (binary-pattern form).
    tau: similarity threshold in [0, 1].
    bounded: also require the merged pattern size to stay within
        seed_size / (1 - tau/2), which guarantees group density.
    pattern_update: OR accepted rows into the group pattern so later
        candidates are compared against the union.
    """

    similarity: str = "jaccard"
    tau: float = 0.5
    bounded: bool = True
    pattern_update: bool = True

    def __post_init__(self):
        if self.similarity not in ("jaccard", "cosine"):
            raise ValueError(f"unknown similarity {self.similarity!r}")
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError("tau must be in [0, 1]")


@dataclass
class GroupState:
    """Mutable state of one group while the scan runs: current pattern,
    the seed's pattern size, and the members merged so far."""

    pattern: set
    seed_size: int
    members: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# quotient rows and packed bitsets

def quotient_row(cols, partition: ColumnPartition) -> np.ndarray:
    """Sorted segment indices hit by the given column indices."""
    cols = np.asarray(cols, dtype=np.int64)
    if cols.size and (cols.min() < 0 or cols.max() >= partition.n_cols):
        raise ValueError("column index out of range for the partition")
    return np.unique(partition.segment_of(cols))


def quotient_hash(segments) -> int:
    """Cheap pattern hash: the sum of the (0-based) nonzero segment indices."""
    return int(np.sum(np.asarray(segments, dtype=np.int64), initial=0))


def _popcount_rows(words: np.ndarray) -> np.ndarray:
    """Per-row popcount of a (m, W) uint64 bit matrix."""
    return np.bitwise_count(words).sum(axis=-1, dtype=np.int64)


def _quotient_bits(A: CsrMatrix, partition: ColumnPartition):
    """Pack every row's quotient pattern into uint64 words.

    Returns (bits, sizes): bits is (n_rows, W) with bit j of row i set iff
    row i has a nonzero in segment j; sizes is the per-row pattern size.
    """
    n_seg = partition.n_segments
    n_words = max(1, (n_seg + 63) // 64)
    bits = np.zeros((A.n_rows, n_words), dtype=np.uint64)
    sizes = np.zeros(A.n_rows, dtype=np.int64)
    if A.nnz and n_seg:
        seg = partition.segment_of(A.col_idx)
        row = np.repeat(np.arange(A.n_rows, dtype=np.int64), A.row_nnz())
        key = np.unique(row * n_seg + seg)
        r, s = key // n_seg, (key % n_seg).astype(np.uint64)
        np.bitwise_or.at(bits, (r, (s >> np.uint64(6)).astype(np.int64)),
                         np.uint64(1) << (s & np.uint64(63)))
        sizes = np.bincount(r, minlength=A.n_rows).astype(np.int64)
    return bits, sizes


def _segments_of_words(words: np.ndarray) -> np.ndarray:
    """Sorted segment indices encoded by one packed pattern."""
    u8 = words.view(np.uint8)
    return np.flatnonzero(np.unpackbits(u8, bitorder="little")).astype(np.int64)


def compress_rows(A: CsrMatrix, partition: ColumnPartition) -> list:
    """Collapse rows with identical quotient patterns into QuotientRows.

    Output is ordered by the smallest source row of each class; each class
    lists its source rows in ascending order. Patterns are compared
    exactly (the cheap additive hash is collision-prone, so membership is
    keyed on the full packed pattern).
    """
    bits, _ = _quotient_bits(A, partition)
    classes: dict[bytes, list] = {}
    for i in range(A.n_rows):
        classes.setdefault(bits[i].tobytes(), []).append(i)
    return [
        QuotientRow(_segments_of_words(bits[rows[0]]), rows)
        for rows in classes.values()
    ]


# ---------------------------------------------------------------------------
# similarity and the merge condition

def similarity(a, b, kind: str = "jaccard") -> float:
    """Similarity of two segment sets in [0, 1].

    jaccard = |A∩B| / |A∪B|; cosine (binary form) = |A∩B| / sqrt(|A||B|).
    Two empty sets are defined as identical (similarity 1).
    """
    a, b = set(np.asarray(a).tolist()), set(np.asarray(b).tolist())
    if not a and not b:
        return 1.0
    inter = len(a & b)
    if kind == "jaccard":
        return inter / len(a | b)
    if kind == "cosine":
        denom = math.sqrt(len(a) * len(b))
        return inter / denom if denom else 0.0
    raise ValueError(f"unknown similarity {kind!r}")


def merge_condition(group: GroupState, segments, policy: MergePolicy) -> bool:
    """Decide whether a candidate row joins the group.

    Accepts iff similarity(pattern, candidate) >= tau and, under the
    bounded policy, the merged pattern size stays within
    seed_size / (1 - tau/2). The threshold test is evaluated in product
    form (|A∩B| >= tau * denom), matching the vectorized scan exactly.
    """
    cand = set(np.asarray(segments).tolist())
    inter = len(group.pattern & cand)
    union = len(group.pattern) + len(cand) - inter
    if policy.similarity == "jaccard":
        ok = inter >= policy.tau * union
    else:
        ok = inter >= policy.tau * math.sqrt(len(group.pattern) * len(cand))
        if policy.tau > 0.0:
            ok = ok and (len(cand) == 0) == (len(group.pattern) == 0)
    if ok and policy.bounded:
        ok = union <= group.seed_size / (1.0 - 0.5 * policy.tau)
    return bool(ok)


# ---------------------------------------------------------------------------
# the grouping scan

def _greedy_merge(bits: np.ndarray, sizes: np.ndarray, policy: MergePolicy):
    """One-pass greedy grouping over pre-ordered work items.

    Returns a list of (member item ids in merge order, seed pattern size).
    Candidate verdicts are computed vectorized against the current pattern
    and recomputed for the remaining suffix whenever the pattern grows, so
    every item is judged against the exact pattern state of its turn.
    """
    n = len(sizes)
    tau = policy.tau
    jaccard = policy.similarity == "jaccard"
    cap = None
    unassigned = np.ones(n, dtype=bool)
    out = []
    for i in range(n):
        if not unassigned[i]:
            continue
        unassigned[i] = False
        pattern = bits[i].copy()
        psize = int(sizes[i])
        seed_size = psize
        members = [i]
        if policy.bounded:
            cap = seed_size / (1.0 - 0.5 * tau)
        cand = np.flatnonzero(unassigned[i + 1 :]) + (i + 1)
        pos = 0
        while pos < cand.size:
            sub = cand[pos:]
            inter = _popcount_rows(bits[sub] & pattern)
            union = psize + sizes[sub] - inter
            if jaccard:
                # product form handles empties: both empty accepts, one empty
                # accepts only at tau=0
                ok = inter >= tau * union
            else:
                ok = inter >= tau * np.sqrt(psize * sizes[sub])
                if tau > 0.0:  # cosine with exactly one empty side is 0
                    ok &= (sizes[sub] == 0) == (psize == 0)
            if policy.bounded:
                ok &= union <= cap
            hits = np.flatnonzero(ok)
            if hits.size == 0:
                break
            grew = False
            for h in hits:
                j = int(sub[h])
                members.append(j)
                unassigned[j] = False
                if policy.pattern_update and inter[h] < sizes[j]:
                    pattern |= bits[j]
                    psize = int(union[h])
                    pos += int(h) + 1
                    grew = True
                    break
            if not grew:
                break
        out.append((members, seed_size))
    return out


def _build_grouping(A, bits, sizes, merged, source_lists) -> RowGrouping:
    n_words = bits.shape[1] if bits.ndim == 2 else 1
    group_of = np.empty(A.n_rows, dtype=np.int64)
    groups = []
    for gid, (members, seed_size) in enumerate(merged):
        rows = np.concatenate([source_lists[m] for m in members]) if members else np.empty(0, np.int64)
        pat = np.zeros(n_words, dtype=np.uint64)
        for m in members:
            pat |= bits[m]
        group_of[rows] = gid
        groups.append(RowGroup(rows, _segments_of_words(pat), seed_size))
    return RowGrouping(group_of, groups)


def block_1sa(A: CsrMatrix, partition: ColumnPartition, policy: MergePolicy,
              use_compression: bool = True) -> RowGrouping:
    """Group the rows of A by greedy similarity against the partition.

    Rows are scanned in index order; each unassigned row seeds a group and
    every later unassigned row is tested once with the policy's merge
    condition. With ``use_compression`` the scan runs over the compressed
    quotient rows (identical patterns pre-merged, ordered by smallest
    source row) and group membership expands to all source rows.
    Deterministic for fixed input.
    """
    bits, sizes = _quotient_bits(A, partition)
    if use_compression:
        classes: dict[bytes, list] = {}
        for i in range(A.n_rows):
            classes.setdefault(bits[i].tobytes(), []).append(i)
        reps = np.array([rows[0] for rows in classes.values()], dtype=np.int64)
        source_lists = [np.asarray(rows, dtype=np.int64) for rows in classes.values()]
        work_bits, work_sizes = bits[reps], sizes[reps]
    else:
        source_lists = [np.array([i], dtype=np.int64) for i in range(A.n_rows)]
        work_bits, work_sizes = bits, sizes
    merged = _greedy_merge(work_bits, work_sizes, policy)
    return _build_grouping(A, work_bits, work_sizes, merged, source_lists)


def block_naive_sa(A: CsrMatrix, policy: MergePolicy) -> RowGrouping:
    """Baseline grouping on raw column sets: width-1 segments, no pattern
    update, no size cap. Only the similarity kind and tau are taken from
    the policy."""
    naive = MergePolicy(similarity=policy.similarity, tau=policy.tau,
                        bounded=False, pattern_update=False)
    return block_1sa(A, ColumnPartition.uniform(A.n_cols, 1), naive)


def pathological_matrix(length: int) -> CsrMatrix:
    """Adversarial pattern for plain threshold merging.

    ``length`` rows with a single nonzero in column 0, followed by
    floor(length**(1/4)) rows where the j-th extra row fills the first
    j+1 columns. Plain merging at tau >= 0.5 chains all of them into one
    group whose density decays like length**(-1/4); the bounded rule
    refuses the chain.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    if length == 0:
        return csr_from_triplets(0, 0, [])
    tail = math.isqrt(math.isqrt(length))
    triplets = [(i, 0, 1.0) for i in range(length)]
    for j in range(tail):
        triplets.extend((length + j, c, 1.0) for c in range(j + 1))
    return csr_from_triplets(length + tail, max(tail, 1), triplets)


# ---------------------------------------------------------------------------
# ready-made groupings and validation

def singleton_grouping(A: CsrMatrix, partition: ColumnPartition) -> RowGrouping:
    """Every row its own group."""
    bits, sizes = _quotient_bits(A, partition)
    groups = [
        RowGroup(np.array([i]), _segments_of_words(bits[i]), int(sizes[i]))
        for i in range(A.n_rows)
    ]
    return RowGrouping(np.arange(A.n_rows), groups)


def uniform_grouping(A: CsrMatrix, partition: ColumnPartition, height: int) -> RowGrouping:
    """Consecutive rows grouped in chunks of the given height (last chunk
    may be shorter)."""
    if height < 1:
        raise ValueError("height must be >= 1")
    bits, sizes = _quotient_bits(A, partition)
    group_of = np.arange(A.n_rows) // height
    groups = []
    for g in range(int(group_of[-1]) + 1 if A.n_rows else 0):
        rows = np.arange(g * height, min((g + 1) * height, A.n_rows))
        pat = np.zeros(bits.shape[1], dtype=np.uint64)
        for i in rows:
            pat |= bits[i]
        groups.append(RowGroup(rows, _segments_of_words(pat), int(sizes[rows[0]])))
    return RowGrouping(group_of, groups)


def check_grouping(A: CsrMatrix, partition: ColumnPartition, g: RowGrouping) -> None:
    """Raise ValueError unless g is a valid grouping of A's rows: a total
    map onto 0..H-1 consistent with the member lists, and every group
    pattern equal to the OR of its members' quotient rows."""
    if len(g.group_of) != A.n_rows:
        raise ValueError("group_of length differs from n_rows")
    seen = np.zeros(A.n_rows, dtype=bool)
    bits, sizes = _quotient_bits(A, partition)
    for gid, grp in enumerate(g.groups):
        if grp.n_rows == 0:
            raise ValueError(f"group {gid} is empty")
        if np.any(seen[grp.rows]):
            raise ValueError(f"group {gid} reuses a row")
        seen[grp.rows] = True
        if np.any(g.group_of[grp.rows] != gid):
            raise ValueError(f"group {gid} inconsistent with group_of")
        pat = np.zeros(bits.shape[1], dtype=np.uint64)
        for i in grp.rows:
            pat |= bits[i]
        if not np.array_equal(_segments_of_words(pat), grp.pattern):
            raise ValueError(f"group {gid} pattern is not the OR of its members")
        if sizes[grp.rows[0]] != grp.seed_size:
            raise ValueError(f"group {gid} seed_size mismatch")
    if not np.all(seen):
        raise ValueError("some rows belong to no group")
