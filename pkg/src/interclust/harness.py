"""End-to-end experiment runner.

A session loops oracle request -> local edit -> error report until the
proposed clustering equals the target or an iteration cap is reached, then
audits the run against the relevant theorem bounds.  Randomness is split off
one root seed per session (numpy SeedSequence; child 0 feeds the oracle), so
records are bit-reproducible from (config, seed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path
from typing import Sequence

import numpy as np

from . import edits
from .core import (
    Clustering,
    DomainError,
    EditRequest,
    ErrorReport,
    Model,
    ModelConfig,
    SimilarityMatrix,
    TreeMode,
    error_report,
)
from .datagen import perturb, plant_instance, prune_outliers
from .fileio import read_jsonl, write_jsonl
from .linkage import LinkageTree, build_average_linkage, build_robust_tree
from .oracle import SimulatedOracle


@dataclass(frozen=True)
class IterationRecord:
    request: EditRequest
    result: edits.EditResult
    report: ErrorReport

    def to_dict(self) -> dict:
        return {
            "type": "edit",
            "request": self.request.to_dict(),
            "result": self.result.to_dict(),
            "report": self.report.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IterationRecord":
        return cls(
            EditRequest.from_dict(d["request"]),
            edits.EditResult.from_dict(d["result"]),
            ErrorReport.from_dict(d["report"]),
        )


@dataclass(frozen=True)
class BoundCheck:
    theorem: str
    bound: float
    observed: float
    ok: bool

    def to_dict(self) -> dict:
        return {"theorem": self.theorem, "bound": self.bound, "observed": self.observed, "ok": self.ok}

    @classmethod
    def from_dict(cls, d: dict) -> "BoundCheck":
        return cls(d["theorem"], float(d["bound"]), float(d["observed"]), bool(d["ok"]))


@dataclass
class RunRecord:
    config: ModelConfig
    seed: object
    cap: int
    initial_report: ErrorReport
    iterations: list[IterationRecord]
    termination: str  # "converged" | "capped"
    bound_checks: list[BoundCheck]
    warnings: list[str] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.termination == "converged"

    @property
    def split_count(self) -> int:
        return sum(1 for it in self.iterations if it.request.kind == "split")

    @property
    def merge_count(self) -> int:
        return sum(1 for it in self.iterations if it.request.kind == "merge")

    def reports(self) -> list[ErrorReport]:
        """Initial report followed by the post-edit report of every iteration."""
        return [self.initial_report] + [it.report for it in self.iterations]

    def to_records(self) -> list[dict]:
        head = {
            "type": "config",
            "config": self.config.to_dict(),
            "seed": self.seed,
            "cap": self.cap,
            "warnings": self.warnings,
            "meta": self.meta,
        }
        init = {"type": "init", "report": self.initial_report.to_dict()}
        tail = {
            "type": "end",
            "termination": self.termination,
            "bound_checks": [b.to_dict() for b in self.bound_checks],
        }
        return [head, init] + [it.to_dict() for it in self.iterations] + [tail]

    @classmethod
    def from_records(cls, records: list[dict]) -> "RunRecord":
        if not records or records[0].get("type") != "config" or records[-1].get("type") != "end":
            raise DomainError("malformed run log")
        head, init, tail = records[0], records[1], records[-1]
        return cls(
            config=ModelConfig.from_dict(head["config"]),
            seed=head["seed"],
            cap=int(head["cap"]),
            initial_report=ErrorReport.from_dict(init["report"]),
            iterations=[IterationRecord.from_dict(d) for d in records[2:-1]],
            termination=tail["termination"],
            bound_checks=[BoundCheck.from_dict(b) for b in tail["bound_checks"]],
            warnings=list(head.get("warnings", [])),
            meta=dict(head.get("meta", {})),
        )

    def save(self, path: str | Path) -> None:
        write_jsonl(path, self.to_records())

    @classmethod
    def load(cls, path: str | Path) -> "RunRecord":
        return cls.from_records(read_jsonl(path))


def build_tree(s: SimilarityMatrix, cfg: ModelConfig) -> LinkageTree | None:
    if cfg.tree_mode is TreeMode.GLOBAL:
        return build_average_linkage(s, range(s.n))
    if cfg.tree_mode is TreeMode.ROBUST_GLOBAL:
        return build_robust_tree(s, range(s.n), cfg.min_blob)
    return None


def _merge_log_term(eta: float, n: int) -> float:
    # log_{1/(1-eta)} n; at eta = 1 one impure merge fully depletes a block,
    # so the depletion count degenerates to 1
    if eta >= 1.0:
        return 1.0
    return max(1.0, math.log(n) / math.log(1.0 / (1.0 - eta)))


def _bound_checks(
    cfg: ModelConfig,
    init: ErrorReport,
    record_splits: int,
    record_merges: int,
    converged: bool,
    n: int,
    k: int,
    eps: float,
    audit_c: float,
) -> list[BoundCheck]:
    checks: list[BoundCheck] = []
    split_bound = float(init.delta_o)
    # at most delta_o splits: each split lowers delta_o by exactly 1 and merges
    # never raise it (they may lower it too, so equality is not guaranteed)
    split_ok = record_splits <= init.delta_o
    if cfg.model is Model.ETA_MERGE:
        checks.append(BoundCheck("split_budget", split_bound, record_splits, split_ok))
        merge_bound = 2.0 * (init.delta_u + k) * _merge_log_term(cfg.eta, n)
        checks.append(BoundCheck("merge_budget", merge_bound, record_merges, record_merges <= merge_bound))
    elif cfg.model is Model.ETA_MERGE_CC:
        total = record_splits + record_merges
        checks.append(BoundCheck("cc_edit_budget", float(init.delta_cc), total, total <= init.delta_cc))
    else:
        checks.append(BoundCheck("split_budget", split_bound, record_splits, split_ok))
        merge_bound = math.log(max(k, 2) / eps) * float(init.delta_u) ** 2
        checks.append(
            BoundCheck("merge_audit", merge_bound, record_merges, record_merges <= audit_c * merge_bound)
        )
    return checks


def run_session(
    s: SimilarityMatrix,
    target: Clustering,
    initial: Clustering,
    cfg: ModelConfig,
    seed=0,
    cap: int = 20_000,
    split_policy: str = "uniform",
    eps: float = 0.05,
    audit_c: float = 1.0,
    meta: dict | None = None,
) -> RunRecord:
    """Drive one oracle session to convergence or the iteration cap."""
    if not (s.n == target.n == initial.n):
        raise DomainError("matrix, target and initial clustering disagree on n")
    tree = build_tree(s, cfg)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    oracle = SimulatedOracle(target, cfg, rng, split_policy=split_policy)
    working = initial.copy()
    iterations: list[IterationRecord] = []
    termination = "capped"
    for _ in range(cap):
        request = oracle.next_request(working)
        if request is None:
            termination = "converged"
            break
        result = edits.apply(working, request, cfg, s, tree)
        oracle.observe(working, result)
        iterations.append(IterationRecord(request, result, error_report(working, target)))
    else:
        if oracle.next_request(working) is None:
            termination = "converged"

    init_report = error_report(initial, target)
    splits = sum(1 for it in iterations if it.request.kind == "split")
    merges = len(iterations) - splits
    checks = _bound_checks(
        cfg, init_report, splits, merges, termination == "converged", target.n, len(target), eps, audit_c
    )
    return RunRecord(
        config=cfg,
        seed=seed,
        cap=cap,
        initial_report=init_report,
        iterations=iterations,
        termination=termination,
        bound_checks=checks,
        warnings=cfg.validity_warnings(),
        meta=meta or {},
    )


# ---------------------------------------------------------------------------
# Sweeps and curve export
# ---------------------------------------------------------------------------


@dataclass
class SweepGrid:
    models: Sequence[Model] = (Model.ETA_MERGE,)
    etas: Sequence[float] = (0.7,)
    p_keeps: Sequence[float] = (0.5,)
    prunes: Sequence[int] = (0,)
    tree_modes: Sequence[TreeMode] = (TreeMode.GLOBAL,)
    seeds: Sequence[int] = (0,)
    n: int = 150
    k: int = 10
    within: float = 0.9
    across: float = 0.1
    jitter: float = 0.02
    min_blob: int = 3
    cap: int = 20_000


def sweep(grid: SweepGrid) -> list[RunRecord]:
    """Cross product of the grid; one planted-and-perturbed run per cell.

    The same base seed reuses the same planted instance across parameter
    settings, mirroring how the experiments vary one knob at a time.
    """
    records: list[RunRecord] = []
    for model, eta, p_keep, prune, tree_mode, seed in product(
        grid.models, grid.etas, grid.p_keeps, grid.prunes, grid.tree_modes, grid.seeds
    ):
        s, target = plant_instance(grid.n, grid.k, grid.within, grid.across, grid.jitter, seed=[seed, 0])
        if prune:
            s, target = prune_outliers(s, target, prune)
        initial = perturb(target, p_keep, seed=[seed, 1])
        cfg = ModelConfig(model, eta=eta, tree_mode=tree_mode, min_blob=grid.min_blob)
        meta = {"p_keep": p_keep, "prune": prune, "n": target.n, "k": len(target)}
        records.append(run_session(s, target, initial, cfg, seed=[seed, 2], cap=grid.cap, meta=meta))
    return records


CURVE_COLUMNS = [
    "model",
    "eta",
    "tree_mode",
    "p_keep",
    "prune",
    "seed",
    "termination",
    "iterations_to_converge",
    "iteration",
    "delta",
    "delta_cc",
    "mean_delta",
    "mean_delta_cc",
]


def export_curves(records: Sequence[RunRecord]) -> str:
    """Long-format CSV: one row per (run, iteration), plus group means.

    The mean columns average runs sharing every parameter except the seed;
    runs that ended early are padded with their final value (0 when
    converged), which is a presentation choice, not part of any guarantee.
    """
    lines = [",".join(CURVE_COLUMNS)]
    groups: dict[tuple, list[list[tuple[int, int]]]] = {}
    keyed: list[tuple[tuple, RunRecord, list[tuple[int, int]]]] = []
    for rec in records:
        key = (
            rec.config.model.value,
            rec.config.eta,
            rec.config.tree_mode.value,
            rec.meta.get("p_keep", ""),
            rec.meta.get("prune", ""),
        )
        series = [(rep.delta, rep.delta_cc) for rep in rec.reports()]
        groups.setdefault(key, []).append(series)
        keyed.append((key, rec, series))

    def group_mean(key: tuple, i: int) -> tuple[float, float]:
        series_list = groups[key]
        ds = [srs[min(i, len(srs) - 1)] for srs in series_list]
        return (sum(d for d, _ in ds) / len(ds), sum(c for _, c in ds) / len(ds))

    def fmt_seed(seed) -> str:
        if isinstance(seed, (list, tuple)):
            return "/".join(str(x) for x in seed)
        return str(seed)

    for key, rec, series in keyed:
        iters = len(rec.iterations) if rec.converged else ""
        for i, (delta, delta_cc) in enumerate(series):
            mean_d, mean_cc = group_mean(key, i)
            row = [
                key[0],
                str(key[1]),
                key[2],
                str(key[3]),
                str(key[4]),
                fmt_seed(rec.seed),
                rec.termination,
                str(iters),
                str(i),
                str(delta),
                str(delta_cc),
                f"{mean_d:.6g}",
                f"{mean_cc:.6g}",
            ]
            lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def export_curves_to(path: str | Path, records: Sequence[RunRecord]) -> None:
    Path(path).write_text(export_curves(records), encoding="utf-8")
