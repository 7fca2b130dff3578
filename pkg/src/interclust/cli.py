"""Command-line interface.

Subcommands: `simulate` runs one seeded oracle session on a planted (or
file-based) instance and writes the run log; `export-curves` turns run logs
into a per-iteration CSV; `baseline-split` applies one of the comparison
splitters to a cluster from disk; `serve` starts the HTTP session API.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .baselines import split_2median, split_spectral
from .core import Clustering, DomainError, Model, ModelConfig, TreeMode
from .datagen import perturb, plant_instance, prune_outliers
from .edits import split_local
from .fileio import read_clustering, read_matrix
from .harness import RunRecord, export_curves_to, run_session

MODEL_ALIASES = {"eta": Model.ETA_MERGE, "cc": Model.ETA_MERGE_CC, "unrestricted": Model.UNRESTRICTED}
TREE_ALIASES = {
    "global": TreeMode.GLOBAL,
    "local": TreeMode.LOCAL,
    "threshold": TreeMode.THRESHOLD_GRAPH,
    "robust": TreeMode.ROBUST_GLOBAL,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="interclust")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run one seeded oracle session")
    sim.add_argument("--model", choices=sorted(MODEL_ALIASES), default="eta")
    sim.add_argument("--eta", type=float, default=0.7)
    sim.add_argument("--p-keep", type=float, default=0.5)
    sim.add_argument("--prune", type=int, default=0, help="outliers removed per target cluster")
    sim.add_argument("--tree", choices=sorted(TREE_ALIASES), default="global")
    sim.add_argument("--min-blob", type=int, default=3)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--cap", type=int, default=20_000)
    sim.add_argument("--out", required=True, help="run log (JSON lines)")
    sim.add_argument("--n", type=int, default=150)
    sim.add_argument("--k", type=int, default=10)
    sim.add_argument("--within", type=float, default=0.9)
    sim.add_argument("--across", type=float, default=0.1)
    sim.add_argument("--jitter", type=float, default=0.02)
    sim.add_argument("--matrix", help="similarity matrix file instead of a planted instance")
    sim.add_argument("--target", help="target clustering file (with --matrix)")
    sim.add_argument("--initial", help="initial clustering file (default: perturbed target)")

    exp = sub.add_parser("export-curves", help="write per-iteration CSV for run logs")
    exp.add_argument("logs", nargs="+", help="run logs produced by simulate")
    exp.add_argument("--csv", required=True)

    base = sub.add_parser("baseline-split", help="split one cluster with a baseline algorithm")
    base.add_argument("--algo", required=True, choices=["clean", "2median", "spectral-gap", "spectral-balanced"])
    base.add_argument("--matrix", required=True)
    base.add_argument("--clustering", required=True)
    base.add_argument("--cluster-id", type=int, required=True, help="cluster id as written in the file")
    base.add_argument("--target", help="target clustering file; adds the evaluate_split record")
    base.add_argument("--out", help="write the JSON record here instead of stdout")

    srv = sub.add_parser("serve", help="start the HTTP session API")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8732)
    srv.add_argument("--data-dir", default="./interclust-data")
    srv.add_argument("--ui-dir", default=None, help="static frontend assets to serve at /")
    return parser


def _cmd_simulate(args) -> int:
    if args.matrix:
        if not args.target:
            print("simulate: --matrix needs --target", file=sys.stderr)
            return 2
        s = read_matrix(args.matrix)
        target = read_clustering(args.target)
    else:
        s, target = plant_instance(
            args.n, args.k, args.within, args.across, args.jitter, seed=[args.seed, 0]
        )
    if args.prune:
        s, target = prune_outliers(s, target, args.prune)
    if args.initial:
        initial = read_clustering(args.initial)
    else:
        initial = perturb(target, args.p_keep, seed=[args.seed, 1])
    cfg = ModelConfig(
        MODEL_ALIASES[args.model], eta=args.eta, tree_mode=TREE_ALIASES[args.tree], min_blob=args.min_blob
    )
    meta = {"p_keep": args.p_keep, "prune": args.prune, "n": target.n, "k": len(target)}
    record = run_session(s, target, initial, cfg, seed=[args.seed, 2], cap=args.cap, meta=meta)
    record.save(args.out)
    print(
        f"{record.termination} after {len(record.iterations)} edits "
        f"({record.split_count} splits, {record.merge_count} merges); "
        f"initial delta={record.initial_report.delta} delta_cc={record.initial_report.delta_cc}"
    )
    for check in record.bound_checks:
        print(f"  {check.theorem}: observed {check.observed:g} vs bound {check.bound:g} -> "
              f"{'ok' if check.ok else 'VIOLATED'}")
    for warning in record.warnings:
        print(f"  warning: {warning}")
    return 0


def _cmd_export_curves(args) -> int:
    records = [RunRecord.load(path) for path in args.logs]
    export_curves_to(args.csv, records)
    print(f"wrote {args.csv} ({sum(len(r.iterations) + 1 for r in records)} rows)")
    return 0


def _cmd_baseline_split(args) -> int:
    s = read_matrix(args.matrix)
    text = Path(args.clustering).read_text(encoding="utf-8")
    members = set()
    labels: dict[int, int] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        point, cid = (int(x) for x in line.split("\t"))
        labels[point] = cid
        if cid == args.cluster_id:
            members.add(point)
    if not members:
        print(f"baseline-split: no points carry cluster id {args.cluster_id}", file=sys.stderr)
        return 2

    if args.algo == "clean":
        before = Clustering.from_labels([labels[p] for p in range(len(labels))])
        work = before.copy()
        local_id = work.cluster_of(next(iter(members)))
        result = split_local(work, local_id, s)
        part1, part2 = (sorted(a.members) for a in result.added)
        after = work
    elif args.algo == "2median":
        side_a, side_b = split_2median(s, members)
        part1, part2 = sorted(side_a), sorted(side_b)
        after = None
    else:
        mode = "gap" if args.algo == "spectral-gap" else "balanced"
        side_a, side_b = split_spectral(s, members, mode)
        part1, part2 = sorted(side_a), sorted(side_b)
        after = None

    record = {"algo": args.algo, "cluster_id": args.cluster_id, "part1": part1, "part2": part2}
    if args.target:
        from .baselines import evaluate_split

        target = read_clustering(args.target)
        before = Clustering.from_labels([labels[p] for p in range(len(labels))])
        if after is None:
            others = [sorted(c.members) for c in before if not c.members & members]
            after = Clustering(others + [part1, part2])
        clean, cc_delta = evaluate_split(before, after, target)
        record["is_clean"] = clean
        record["cc_delta"] = cc_delta
    payload = json.dumps(record, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(args.data_dir, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "export-curves":
            return _cmd_export_curves(args)
        if args.command == "baseline-split":
            return _cmd_baseline_split(args)
        return _cmd_serve(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
