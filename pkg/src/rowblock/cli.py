"""Command-line front end: generate, block, sweep, bench.

Every command is a pure function of its flags, input files and seeds, so
rerunning produces byte-identical data outputs (wall-clock timings in
bench.csv excluded). Exit codes: 0 success, 1 runtime failure, 2 usage
error. The default output directory is taken from $ROWBLOCK_OUT when set.
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blocking import MergePolicy, block_1sa, block_naive_sa
from .generators import BlockedMatrixSpec, RmatSpec, gen_blocked, gen_rmat, scramble
from .matrix import ColumnPartition, CsrMatrix, DenseMatrix
from .metrics import BlockingCurve, blocking_stats, curve_select
from .mtxio import read_matrix_market, write_matrix_market
from .multiply import TcuModel, spmm_csr, spmm_vbr, tcu_cost_from_grouping
from .vbr import vbr_from_grouping

__all__ = ["ExperimentManifest", "MatrixSource", "load_manifest", "run_sweep", "main"]

SWEEP_COLUMNS = [
    "matrix", "dw", "tau", "n_rows", "n_cols", "nnz", "n_groups",
    "n_stored_blocks", "rho_prime", "delta_h_prime", "group_mean_height",
    "fill_in", "stored_area", "density_bound_ok", "tcu_blocked", "tcu_trivial",
]

BENCH_COLUMNS = [
    "matrix", "dw", "tau", "kernel", "threads", "n_dense", "runs",
    "median_s", "mean_s", "tcu_blocked", "tcu_trivial",
]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _write_csv(path, columns, rows) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c)) for c in columns) + "\n")


# ---------------------------------------------------------------------------
# experiment manifests

@dataclass(frozen=True)
class MatrixSource:
    """One input matrix: a generator spec or an .mtx path, plus the seed
    used to scramble its rows (None leaves the rows alone)."""

    id: str
    kind: str  # blocked | rmat | mtx
    params: dict
    scramble_seed: int | None = None

    def load(self, base_dir: Path) -> CsrMatrix:
        if self.kind == "blocked":
            A = gen_blocked(BlockedMatrixSpec(
                n_rows=self.params["rows"], n_cols=self.params["cols"],
                delta=self.params["delta"], theta=self.params["theta"],
                rho=self.params["rho"], seed=self.params["seed"]))
        elif self.kind == "rmat":
            A = gen_rmat(RmatSpec(
                log2_nodes=self.params["log2_nodes"],
                avg_degree=self.params["avg_degree"],
                probabilities=tuple(self.params.get(
                    "probabilities", (0.57, 0.19, 0.19, 0.05))),
                seed=self.params["seed"]))
        elif self.kind == "mtx":
            path = Path(self.params["path"])
            if not path.is_absolute():
                path = base_dir / path
            A = read_matrix_market(path)
        else:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        if self.scramble_seed is not None:
            A, _ = scramble(A, self.scramble_seed)
        return A


@dataclass(frozen=True)
class ExperimentManifest:
    """A whole sweep: matrices, partition widths, tau list, merge policy,
    and optional point selection / cost-model annotation."""

    matrices: tuple
    partition_widths: tuple
    taus: tuple
    policy: MergePolicy = MergePolicy()
    mode: str = "1sa"  # 1sa | naive
    compress: bool = True
    select: dict | None = None
    dense_width: int | None = None
    tcu: TcuModel | None = None
    output_dir: str | None = None
    base_dir: Path = field(default=Path("."), compare=False)

    def __post_init__(self):
        if not self.taus or any(not 0.0 <= t <= 1.0 for t in self.taus):
            raise ValueError("taus must be non-empty and within [0, 1]")
        if self.mode not in ("1sa", "naive"):
            raise ValueError(f"unknown mode {self.mode!r}")


def load_manifest(path) -> ExperimentManifest:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    matrices = []
    for m in doc["matrices"]:
        m = dict(m)
        matrices.append(MatrixSource(
            id=str(m.pop("id")), kind=m.pop("kind"),
            scramble_seed=m.pop("scramble_seed", None), params=m))
    pol = doc.get("policy", {})
    policy = MergePolicy(
        similarity=pol.get("similarity", "jaccard"),
        tau=0.5,  # per-point taus come from the sweep list
        bounded=pol.get("bounded", True),
        pattern_update=pol.get("pattern_update", True))
    tcu = doc.get("tcu")
    return ExperimentManifest(
        matrices=tuple(matrices),
        partition_widths=tuple(int(w) for w in doc["partition_widths"]),
        taus=tuple(float(t) for t in doc["taus"]),
        policy=policy,
        mode=doc.get("mode", "1sa"),
        compress=bool(doc.get("compress", True)),
        select=doc.get("select"),
        dense_width=doc.get("dense_width"),
        tcu=TcuModel(**tcu) if tcu else None,
        output_dir=doc.get("output_dir"),
        base_dir=path.parent)


def _sweep_point(task):
    A, sid, dw, tau, manifest = task
    if manifest.mode == "naive":
        part = ColumnPartition.uniform(A.n_cols, 1)
        policy = MergePolicy(similarity=manifest.policy.similarity, tau=tau,
                             bounded=False, pattern_update=False)
        g = block_naive_sa(A, policy)
        check = False
    else:
        part = ColumnPartition.uniform(A.n_cols, dw)
        policy = MergePolicy(similarity=manifest.policy.similarity, tau=tau,
                             bounded=manifest.policy.bounded,
                             pattern_update=manifest.policy.pattern_update)
        g = block_1sa(A, part, policy, use_compression=manifest.compress)
        check = manifest.policy.bounded
    st = blocking_stats(A, g, part, tau=tau, check_bound=check)
    row = {
        "matrix": sid, "dw": dw, "tau": tau,
        "n_rows": A.n_rows, "n_cols": A.n_cols, "nnz": st.nnz,
        "n_groups": st.n_groups, "n_stored_blocks": st.n_stored_blocks,
        "rho_prime": st.rho_prime, "delta_h_prime": st.delta_h_prime,
        "group_mean_height": st.group_mean_height,
        "fill_in": st.fill_in, "stored_area": st.stored_area,
        "density_bound_ok": st.density_bound_ok,
    }
    if manifest.dense_width and manifest.tcu:
        cost = tcu_cost_from_grouping(g, part, A.n_rows, A.n_cols,
                                      manifest.dense_width, manifest.tcu)
        row["tcu_blocked"], row["tcu_trivial"] = cost.blocked, cost.trivial
    return row, st


def run_sweep(manifest: ExperimentManifest, jobs: int = 1):
    """Evaluate every (matrix, partition width, tau) point of the manifest.

    Points are independent jobs; with ``jobs`` > 1 they fan out over a
    process pool. Returns (rows, summary): CSV-ready dicts in manifest
    order and a JSON-ready summary with the selected point per
    (matrix, width).
    """
    widths = manifest.partition_widths if manifest.mode == "1sa" else (1,)
    loaded = [(src, src.load(manifest.base_dir)) for src in manifest.matrices]
    tasks = [(A, src.id, dw, tau, manifest)
             for src, A in loaded for dw in widths for tau in manifest.taus]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]

    rows = [row for row, _ in results]
    summary = []
    per_curve = len(manifest.taus)
    for k, (src, A) in enumerate(loaded):
        for w, dw in enumerate(widths):
            entry = {"id": src.id, "dw": dw, "n_rows": A.n_rows,
                     "n_cols": A.n_cols, "nnz": A.nnz}
            if manifest.select:
                lo = (k * len(widths) + w) * per_curve
                stats = [st for _, st in results[lo : lo + per_curve]]
                bc = BlockingCurve(tuple(zip(manifest.taus, stats)), {})
                tau, st = curve_select(bc, at_height=manifest.select.get("at_height"),
                                       at_density=manifest.select.get("at_density"))
                mode = "at_height" if "at_height" in manifest.select else "at_density"
                entry["selected"] = {
                    "mode": mode, "target": manifest.select[mode],
                    "tau": tau, "rho_prime": st.rho_prime,
                    "delta_h_prime": st.delta_h_prime, "n_groups": st.n_groups,
                }
            summary.append(entry)
    return rows, {"matrices": summary}


# ---------------------------------------------------------------------------
# commands

def _out_dir(arg: str | None) -> Path:
    d = Path(arg or os.environ.get("ROWBLOCK_OUT", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _policy_from_flags(args) -> MergePolicy:
    kind = getattr(args, "policy", "bounded")
    sim = getattr(args, "similarity", None)
    if kind == "bounded":
        return MergePolicy(similarity=sim or "jaccard", tau=args.tau,
                           bounded=True, pattern_update=True)
    if kind == "plain":
        return MergePolicy(similarity=sim or "jaccard", tau=args.tau,
                           bounded=False, pattern_update=True)
    if kind == "naive":
        return MergePolicy(similarity=sim or "cosine", tau=args.tau,
                           bounded=False, pattern_update=False)
    raise ValueError(f"unknown policy {kind!r}")


def cmd_generate(args) -> int:
    if args.generator == "blocked":
        A = gen_blocked(BlockedMatrixSpec(args.rows, args.cols, args.delta,
                                          args.theta, args.rho, args.seed))
    else:
        A = gen_rmat(RmatSpec(args.log2_nodes, args.avg_degree,
                              tuple(args.probs), args.seed))
    write_matrix_market(args.out, A)
    print(f"wrote {args.out}: {A.n_rows} x {A.n_cols}, nnz {A.nnz}, "
          f"density {A.density:.6g}")
    return 0


def cmd_block(args) -> int:
    A = read_matrix_market(args.input)
    if args.scramble_seed is not None:
        A, _ = scramble(A, args.scramble_seed)
    policy = _policy_from_flags(args)
    part = ColumnPartition.uniform(A.n_cols, args.dw)
    if args.policy == "naive":
        grouping = block_naive_sa(A, policy)
        part = ColumnPartition.uniform(A.n_cols, 1)
    else:
        grouping = block_1sa(A, part, policy, use_compression=not args.no_compress)
    stats = blocking_stats(A, grouping, part, tau=args.tau,
                           check_bound=policy.bounded)
    if args.out:
        doc = {
            "n_rows": A.n_rows,
            "group_of": grouping.group_of.tolist(),
            "groups": [{"rows": g.rows.tolist(), "pattern": g.pattern.tolist(),
                        "seed_size": g.seed_size} for g in grouping.groups],
        }
        with open(args.out, "w", encoding="ascii") as fh:
            json.dump(doc, fh)
    print(f"groups={stats.n_groups} stored_blocks={stats.n_stored_blocks} "
          f"rho_prime={stats.rho_prime:.6g} delta_h_prime={stats.delta_h_prime:.6g} "
          f"fill_in={stats.fill_in} density_bound_ok={_fmt(stats.density_bound_ok)}")
    return 0


def cmd_sweep(args) -> int:
    manifest = load_manifest(args.manifest)
    rows, summary = run_sweep(manifest, jobs=args.jobs)
    out = _out_dir(args.out_dir or manifest.output_dir)
    _write_csv(out / "curves.csv", SWEEP_COLUMNS, rows)
    with open(out / "summary.json", "w", encoding="ascii") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out / 'curves.csv'} ({len(rows)} rows) and {out / 'summary.json'}")
    return 0


def _time_kernel(fn, runs: int):
    times = []
    for _ in range(runs):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), statistics.fmean(times)


def cmd_bench(args) -> int:
    A = read_matrix_market(args.input)
    if args.scramble_seed is not None:
        A, _ = scramble(A, args.scramble_seed)
    policy = _policy_from_flags(args)
    model = TcuModel(m=args.tcu_m, ell=args.tcu_ell)
    rng = np.random.default_rng(args.dense_seed)
    rows = []
    name = Path(args.input).name
    for dw in args.dw:
        part = ColumnPartition.uniform(A.n_cols, dw)
        grouping = block_1sa(A, part, policy)
        V = vbr_from_grouping(A, grouping, part)
        for n_dense in args.n_dense:
            B = DenseMatrix.from_array(rng.random((A.n_cols, n_dense)))
            C_csr = spmm_csr(A, B, threads=args.threads)
            C_vbr = spmm_vbr(V, B, threads=args.threads)
            err = np.max(np.abs(C_csr.data - C_vbr.data))
            scale = max(1.0, float(np.max(np.abs(C_csr.data))))
            if err > 1e-9 * scale:
                raise RuntimeError(f"kernel mismatch before timing: max err {err}")
            cost = tcu_cost_from_grouping(grouping, part, A.n_rows, A.n_cols,
                                          n_dense, model)
            for kernel, fn in (("csr", lambda: spmm_csr(A, B, threads=args.threads)),
                               ("vbr", lambda: spmm_vbr(V, B, threads=args.threads))):
                med, mean = _time_kernel(fn, args.runs)
                rows.append({
                    "matrix": name, "dw": dw, "tau": args.tau, "kernel": kernel,
                    "threads": args.threads, "n_dense": n_dense, "runs": args.runs,
                    "median_s": med, "mean_s": mean,
                    "tcu_blocked": cost.blocked, "tcu_trivial": cost.trivial,
                })
    out = Path(args.out) if args.out else _out_dir(None) / "bench.csv"
    _write_csv(out, BENCH_COLUMNS, rows)
    print(f"wrote {out} ({len(rows)} rows)")
    return 0


# ---------------------------------------------------------------------------
# parser

def _tau_type(s: str) -> float:
    t = float(s)
    if not 0.0 <= t <= 1.0:
        raise argparse.ArgumentTypeError(f"tau must be in [0, 1], got {s}")
    return t


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rowblock",
                                description="Row blocking of sparse matrices: "
                                            "generate, block, sweep, bench.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic matrix as .mtx")
    gsub = g.add_subparsers(dest="generator", required=True)
    gb = gsub.add_parser("blocked", help="block-structured random pattern")
    gb.add_argument("--rows", type=int, required=True)
    gb.add_argument("--cols", type=int, required=True)
    gb.add_argument("--delta", type=int, required=True, help="block edge")
    gb.add_argument("--theta", type=float, required=True, help="nonzero-block fraction")
    gb.add_argument("--rho", type=float, required=True, help="in-block density")
    gb.add_argument("--seed", type=int, required=True)
    gb.add_argument("--out", required=True)
    gr = gsub.add_parser("rmat", help="recursive quadrant graph")
    gr.add_argument("--log2-nodes", type=int, required=True)
    gr.add_argument("--avg-degree", type=int, required=True)
    gr.add_argument("--probs", type=float, nargs=4, default=[0.57, 0.19, 0.19, 0.05],
                    metavar=("A", "B", "C", "D"))
    gr.add_argument("--seed", type=int, required=True)
    gr.add_argument("--out", required=True)

    b = sub.add_parser("block", help="group the rows of an .mtx file")
    b.add_argument("input")
    b.add_argument("--dw", type=int, required=True, help="column partition width")
    b.add_argument("--tau", type=_tau_type, required=True)
    b.add_argument("--policy", choices=["bounded", "plain", "naive"], default="bounded")
    b.add_argument("--similarity", choices=["jaccard", "cosine"])
    b.add_argument("--no-compress", action="store_true")
    b.add_argument("--scramble-seed", type=int)
    b.add_argument("--out", help="write the grouping as JSON")

    s = sub.add_parser("sweep", help="run a manifest of blocking curves")
    s.add_argument("manifest")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out-dir")

    be = sub.add_parser("bench", help="time the kernels on a blocked matrix")
    be.add_argument("input")
    be.add_argument("--dw", type=int, nargs="+", required=True)
    be.add_argument("--tau", type=_tau_type, required=True)
    be.add_argument("-N", "--n-dense", type=int, nargs="+", required=True)
    be.add_argument("--threads", type=int, default=1)
    be.add_argument("--runs", type=int, default=3)
    be.add_argument("--policy", choices=["bounded", "plain"], default="bounded")
    be.add_argument("--similarity", choices=["jaccard", "cosine"])
    be.add_argument("--scramble-seed", type=int)
    be.add_argument("--dense-seed", type=int, default=0)
    be.add_argument("--tcu-m", type=float, default=256.0)
    be.add_argument("--tcu-ell", type=float, default=16.0)
    be.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {"generate": cmd_generate, "block": cmd_block,
                "sweep": cmd_sweep, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except (ValueError, OSError, RuntimeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
