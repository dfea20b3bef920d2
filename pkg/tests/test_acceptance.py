"""Acceptance suite: one test per contract criterion (A1-A8), each printing
a PASS line with the measured numbers when it holds.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import itertools
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from rowblock import (
    BlockedMatrixSpec,
    ColumnPartition,
    DenseMatrix,
    MergePolicy,
    RmatSpec,
    block_1sa,
    block_naive_sa,
    blocking_curve,
    blocking_stats,
    csr_from_triplets,
    curve_select,
    gen_blocked,
    pathological_matrix,
    rmat_edge_draws,
    scramble,
    spmm_csr,
    spmm_vbr,
    vbr_from_grouping,
    verify_density_bound,
)
from rowblock.cli import load_manifest

from conftest import random_csr

EXPERIMENTS = Path(__file__).resolve().parent.parent / "experiments"


def report(name, detail):
    print(f"\n[{name}] PASS: {detail}")


# ---------------------------------------------------------------------------
# A1: guaranteed group density under the bounded policy - exact, no tolerance

def test_a1_density_bound_property_suite():
    t0 = time.time()
    sizes = [128, 256, 512, 1024]
    densities = np.geomspace(0.001, 0.3, 13)
    n_matrices = 104
    taus = (0.3, 0.5, 0.7, 0.9)
    dws = (1, 2, 4, 8)
    violations = 0
    runs = 0
    for k in range(n_matrices):
        rng = np.random.default_rng(10_000 + k)
        n = sizes[k % len(sizes)]
        A = random_csr(rng, n, n, float(densities[k % len(densities)]))
        for dw, tau in itertools.product(dws, taus):
            q = ColumnPartition.uniform(n, dw)
            g = block_1sa(A, q, MergePolicy(similarity="jaccard", tau=tau,
                                            bounded=True, pattern_update=True))
            rep = verify_density_bound(A, g, q, tau)
            violations += rep.n_violations
            runs += 1
    elapsed = time.time() - t0
    assert violations == 0
    assert elapsed < 300
    report("A1", f"{n_matrices} matrices, {runs} blockings, 0 violations, "
                 f"{elapsed:.1f}s")


# ---------------------------------------------------------------------------
# A2/A3 share the recovery family from the shipped manifest

@pytest.fixture(scope="module")
def recovery_family():
    t0 = time.time()
    manifest = load_manifest(EXPERIMENTS / "blocking_recovery.json")
    out = []
    for src in manifest.matrices:
        A = src.load(manifest.base_dir)
        part = ColumnPartition.uniform(A.n_cols, manifest.partition_widths[0])
        curve = blocking_curve(A, part, manifest.taus, manifest.policy,
                               use_compression=manifest.compress)
        out.append((src, A, curve))
    return out, time.time() - t0


def test_a2_blocking_recovery(recovery_family):
    family, build_s = recovery_family
    t0 = time.time()
    floors = {0.5: 0.95, 0.2: 0.45, 0.1: 0.45, 0.05: 0.45}
    worst = {}
    for src, _, curve in family:
        rho = src.params["rho"]
        _, st = curve_select(curve, at_height=32)
        ratio = st.rho_prime / rho
        worst[rho] = min(worst.get(rho, np.inf), ratio)
        assert ratio >= floors[rho], (src.id, ratio)
    elapsed = build_s + (time.time() - t0)
    assert elapsed < 600
    detail = ", ".join(f"rho={r}: worst ratio {worst[r]:.3f} >= {floors[r]}"
                       for r in sorted(worst))
    report("A2", f"{detail}; {elapsed:.1f}s")


def test_a3_dominates_naive_baseline(recovery_family):
    family, _ = recovery_family
    t0 = time.time()
    taus = [round(0.1 * k, 1) for k in range(1, 11)]
    wins = total = 0
    for src, A, curve in family:
        unit = ColumnPartition.uniform(A.n_cols, 1)
        naive_pts = []
        for tau in taus:
            g = block_naive_sa(A, MergePolicy(similarity="cosine", tau=tau))
            naive_pts.append(blocking_stats(A, g, unit, tau=tau))
        for _, st in curve.points:
            matched = [p.rho_prime for p in naive_pts
                       if abs(p.delta_h_prime - st.delta_h_prime)
                       <= 0.1 * st.delta_h_prime]
            total += 1
            # no match means the baseline never reached this block height
            if not matched or st.rho_prime >= max(matched):
                wins += 1
    frac = wins / total
    assert frac >= 0.90
    report("A3", f"{wins}/{total} (matrix, tau) pairs won at matched height "
                 f"(+-10%): {100 * frac:.1f}% >= 90%; {time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# A4: the adversarial chain decays like l**-1/4; the bounded rule refuses it

def test_a4_pathological_construction():
    t0 = time.time()
    tau = 0.5
    lengths = (256, 4096, 65536)
    densities = []
    for length in lengths:
        P = pathological_matrix(length)
        unit = ColumnPartition.uniform(P.n_cols, 1)
        plain = block_1sa(P, unit, MergePolicy(tau=tau, bounded=False,
                                               pattern_update=True))
        assert plain.n_groups == 1  # the whole chain collapses into one group
        rep = verify_density_bound(P, plain, unit, tau)
        c = rep.groups[0]
        got = Fraction(c.quotient_nnz, c.n_rows * c.pattern_size)
        q = math.isqrt(math.isqrt(length))
        expected = Fraction(length + q * (q + 1) // 2, (length + q) * q)
        assert got == expected  # closed form of the construction
        densities.append(float(got))

        bounded = block_1sa(P, unit, MergePolicy(tau=tau, bounded=True,
                                                 pattern_update=True))
        assert verify_density_bound(P, bounded, unit, tau).all_ok

    fitted_c = max(d * length ** 0.25 for d, length in zip(densities, lengths))
    assert fitted_c <= 1.1
    scaled = [d * length ** 0.25 for d, length in zip(densities, lengths)]
    assert scaled[0] > scaled[1] > scaled[2]  # decreasing in length
    assert all(d < tau / 2 for d in densities[1:])  # below tau/2 from l=4096
    elapsed = time.time() - t0
    assert elapsed < 60
    report("A4", f"chain densities {['%.4f' % d for d in densities]} ~ "
                 f"c*l^-1/4 with c={fitted_c:.4f}; bounded policy all >= "
                 f"{tau / 2}; {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# A5: kernel oracle equivalence and thread-count reproducibility

def test_a5_spmm_oracle_equivalence():
    t0 = time.time()
    worst_rel = 0.0
    for k in range(50):
        rng = np.random.default_rng(40_000 + k)
        n = int(rng.integers(64, 513))
        m = int(rng.integers(64, 513))
        n_dense = int(rng.integers(16, 513))
        A = random_csr(rng, n, m, float(rng.uniform(0.01, 0.25)))
        dw = int(rng.choice([1, 4, 16, 32, 7]))
        q = ColumnPartition.uniform(m, dw)
        policy = MergePolicy(tau=float(rng.choice([0.2, 0.5, 0.8])),
                             bounded=bool(rng.integers(2)))
        V = vbr_from_grouping(A, block_1sa(A, q, policy), q)
        B = DenseMatrix.from_array(rng.random((m, n_dense)))

        C_csr = spmm_csr(A, B).data
        C_vbr = spmm_vbr(V, B).data
        # independent ground truth: plain C-level triple-loop contraction
        C_ref = np.einsum("ij,jk->ik", A.to_dense(), B.data, optimize=False)

        nz = C_ref != 0
        for C in (C_csr, C_vbr):
            rel = np.abs(C - C_ref)[nz] / np.abs(C_ref)[nz]
            worst_rel = max(worst_rel, float(rel.max(initial=0.0)))
            assert np.all(rel <= 1e-9)
            assert np.array_equal(C[~nz], C_ref[~nz])  # exact zeros

        assert np.array_equal(C_csr, spmm_csr(A, B, threads=8).data)
        assert np.array_equal(C_vbr, spmm_vbr(V, B, threads=8).data)
    elapsed = time.time() - t0
    assert elapsed < 120
    report("A5", f"50 instances, worst relative error {worst_rel:.2e} <= 1e-9, "
                 f"1-thread == 8-thread exactly; {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# A6: the cost model obeys the guaranteed-density bound

def test_a6_tcu_cost_bound():
    t0 = time.time()
    m_cap, ell, n_dense = 256.0, 16.0, 1024
    sqrt_m = math.sqrt(m_cap)
    grid = list(itertools.product([256, 512], [0.2, 0.3],
                                  [0.8, 0.85, 0.9, 1.0], [0.3, 0.5, 0.7]))
    cases = (grid + grid)[:50]
    qual_total = violations = 0
    for k, (n, theta, rho, tau) in enumerate(cases):
        A = gen_blocked(BlockedMatrixSpec(n, n, 32, theta, rho, seed=1000 + k))
        S, _ = scramble(A, 2000 + k)
        unit = ColumnPartition.uniform(n, 1)
        g = block_1sa(S, unit, MergePolicy(tau=tau, bounded=True))
        qual = [grp for grp in g.groups if grp.n_rows >= sqrt_m]
        assert qual, f"instance {k} produced no group with >= sqrt(m) rows"
        qual_total += len(qual)
        row_nnz = S.row_nnz()
        blocked = sum(grp.n_rows * len(grp.pattern) * n_dense / sqrt_m
                      + len(grp.pattern) * n_dense * ell / m_cap
                      for grp in qual)
        nnz_qual = sum(int(row_nnz[grp.rows].sum()) for grp in qual)
        bound = (2.0 / tau) * (nnz_qual * n_dense / sqrt_m
                               + nnz_qual * n_dense * ell / m_cap ** 1.5)
        violations += blocked > bound
    assert violations == 0
    report("A6", f"50 instances, {qual_total} qualifying groups, 0 violations "
                 f"of the 2/tau bound; {time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# A7: generator exactness

def test_a7_generator_exactness():
    t0 = time.time()
    checked = 0
    for delta, theta, rho in itertools.product([8, 16, 32], [0.1, 0.37, 0.8],
                                               [0.05, 0.33, 0.9]):
        spec = BlockedMatrixSpec(256, 256, delta, theta, rho, seed=99)
        n_sel = math.floor(theta * spec.n_blocks + 0.5)
        per_block = math.floor(rho * delta * delta + 0.5)
        assert gen_blocked(spec).nnz == n_sel * per_block
        checked += 1
    assert checked == 27

    spec = RmatSpec(14, 8, seed=5)  # 2**17 draws
    r, c = rmat_edge_draws(spec)
    half = spec.n_nodes // 2
    quad = (r >= half).astype(int) * 2 + (c >= half).astype(int)
    counts = np.bincount(quad, minlength=4)
    n = spec.n_edge_draws
    sigmas = []
    for kq, p in enumerate(spec.probabilities):
        sigma = math.sqrt(p * (1 - p) / n)
        dev = abs(counts[kq] / n - p)
        sigmas.append(dev / sigma)
        assert dev <= 3 * sigma
    report("A7", f"27-point nnz grid exact; quadrant deviations "
                 f"{['%.2f' % s for s in sigmas]} sigma (all <= 3); "
                 f"{time.time() - t0:.1f}s")


# ---------------------------------------------------------------------------
# A8: the scan scales no worse than quadratically in the rows

def test_a8_complexity_smoke():
    def fixed_k_matrix(n, k, seed):
        rng = np.random.default_rng(seed)
        trip = [(i, int(c), 1.0) for i in range(n)
                for c in rng.choice(n, size=k, replace=False)]
        return csr_from_triplets(n, n, trip)

    def clock(A):
        q = ColumnPartition.uniform(A.n_cols, 4)
        best = float("inf")
        for _ in range(3):
            t0 = time.perf_counter()
            block_1sa(A, q, MergePolicy(tau=0.9, bounded=True),
                      use_compression=False)
            best = min(best, time.perf_counter() - t0)
        return best

    t256 = clock(fixed_k_matrix(256, 8, 1))
    t1024 = clock(fixed_k_matrix(1024, 8, 2))
    ratio = t1024 / t256
    assert ratio <= 20.0
    report("A8", f"runtime 256 rows: {t256 * 1e3:.2f}ms, 1024 rows: "
                 f"{t1024 * 1e3:.2f}ms, ratio {ratio:.1f} <= 20")
