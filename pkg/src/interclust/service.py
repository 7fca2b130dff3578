"""HTTP session API for the human-oracle UI.

Sessions are event-sourced: every applied edit is appended to a per-session
JSON-lines log, and state is rebuilt on restart by replaying the logged
results against the initial clustering.  One lock per session serializes
edits; reads serve the last committed state.
"""

from __future__ import annotations

import threading
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .core import (
    Clustering,
    DomainError,
    EditRequest,
    ModelConfig,
    SimilarityMatrix,
    SplitInfeasible,
    error_report,
)
from . import edits
from .fileio import (
    append_jsonl,
    clustering_from_tsv,
    clustering_to_tsv,
    matrix_to_bytes,
    read_jsonl,
    sniff_matrix,
)
from .harness import build_tree
from .linkage import LinkageTree

REPRESENTATIVES = 5
DEFAULT_PAGE_SIZE = 50
MAX_PAGE_SIZE = 200


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class Session:
    def __init__(
        self,
        sid: str,
        s: SimilarityMatrix,
        clustering: Clustering,
        cfg: ModelConfig,
        target: Clustering | None,
        log_path: Path,
    ):
        self.id = sid
        self.matrix = s
        self.clustering = clustering
        self.cfg = cfg
        self.target = target
        self.log_path = log_path
        self.tree: LinkageTree | None = build_tree(s, cfg)
        self.lock = threading.Lock()
        self.edit_count = 0

    def representatives(self, members: set[int]) -> list[int]:
        pts = sorted(members)
        if len(pts) == 1:
            return pts
        sub = self.matrix.values[np.ix_(pts, pts)]
        sums = sub.sum(axis=0) - np.diag(sub)
        order = sorted(range(len(pts)), key=lambda i: (-sums[i], pts[i]))
        return [pts[i] for i in order[:REPRESENTATIVES]]

    def cluster_summary(self, cid: int) -> dict:
        c = self.clustering.cluster(cid)
        return {
            "id": c.id,
            "size": len(c),
            "pure": c.pure,
            "representatives": self.representatives(c.members),
        }


class ServiceState:
    def __init__(self, data_dir: Path):
        self.artifacts_dir = data_dir / "artifacts"
        self.sessions_dir = data_dir / "sessions"
        self.artifacts_dir.mkdir(parents=True, exist_ok=True)
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.sessions: dict[str, Session] = {}
        self._restore()

    # -- artifacts -----------------------------------------------------------

    def save_matrix(self, data: bytes) -> str:
        try:
            s = sniff_matrix(data)
        except (DomainError, UnicodeDecodeError) as exc:
            raise ApiError(422, "bad_matrix", f"cannot parse matrix: {exc}") from exc
        aid = f"m-{uuid.uuid4().hex[:12]}"
        (self.artifacts_dir / f"{aid}.simmat").write_bytes(matrix_to_bytes(s))
        return aid

    def save_clustering(self, text: str) -> str:
        try:
            c = clustering_from_tsv(text)
        except DomainError as exc:
            raise ApiError(422, "bad_clustering", f"cannot parse clustering: {exc}") from exc
        aid = f"c-{uuid.uuid4().hex[:12]}"
        (self.artifacts_dir / f"{aid}.tsv").write_text(clustering_to_tsv(c), encoding="utf-8")
        return aid

    def load_matrix(self, aid: str) -> SimilarityMatrix:
        path = self.artifacts_dir / f"{aid}.simmat"
        if not path.exists():
            raise ApiError(404, "unknown_artifact", f"no matrix artifact {aid!r}")
        return sniff_matrix(path.read_bytes())

    def load_clustering(self, aid: str) -> Clustering:
        path = self.artifacts_dir / f"{aid}.tsv"
        if not path.exists():
            raise ApiError(404, "unknown_artifact", f"no clustering artifact {aid!r}")
        return clustering_from_tsv(path.read_text(encoding="utf-8"))

    # -- sessions ------------------------------------------------------------

    def create_session(self, matrix_id: str, initial_id: str, target_id: str | None, cfg: ModelConfig) -> Session:
        s = self.load_matrix(matrix_id)
        initial = self.load_clustering(initial_id)
        target = self.load_clustering(target_id) if target_id else None
        if initial.n != s.n or (target is not None and target.n != s.n):
            raise ApiError(422, "universe_mismatch", "matrix and clusterings disagree on the point count")
        sid = f"s-{uuid.uuid4().hex[:12]}"
        log_path = self.sessions_dir / f"{sid}.jsonl"
        head = {
            "type": "create",
            "session": sid,
            "matrix": matrix_id,
            "initial": initial_id,
            "target": target_id,
            "config": cfg.to_dict(),
        }
        if target is not None:
            head["report"] = error_report(initial, target).to_dict()
        append_jsonl(log_path, head)
        session = Session(sid, s, initial, cfg, target, log_path)
        self.sessions[sid] = session
        return session

    def _restore(self) -> None:
        for log_path in sorted(self.sessions_dir.glob("*.jsonl")):
            records = read_jsonl(log_path)
            if not records or records[0].get("type") != "create":
                continue
            head = records[0]
            s = self.load_matrix(head["matrix"])
            clustering = self.load_clustering(head["initial"])
            target = self.load_clustering(head["target"]) if head.get("target") else None
            cfg = ModelConfig.from_dict(head["config"])
            session = Session(head["session"], s, clustering, cfg, target, log_path)
            for rec in records[1:]:
                if rec.get("type") == "edit":
                    edits.replay(session.clustering, edits.EditResult.from_dict(rec["result"]))
                    session.edit_count += 1
            session.clustering.validate()
            self.sessions[head["session"]] = session

    def session(self, sid: str) -> Session:
        if sid not in self.sessions:
            raise ApiError(404, "unknown_session", f"no session {sid!r}")
        return self.sessions[sid]


def create_app(data_dir: str | Path, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="interclust", version="0.1.0")
    state = ServiceState(Path(data_dir))
    app.state.engine = state

    @app.exception_handler(ApiError)
    async def _api_error(_req: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.exception_handler(DomainError)
    async def _domain_error(_req: Request, exc: DomainError):
        return JSONResponse(status_code=422, content={"code": "invalid", "message": str(exc)})

    # -- artifacts -------------------------------------------------------------

    @app.post("/artifacts/matrix", status_code=201)
    async def upload_matrix(request: Request):
        return {"id": state.save_matrix(await request.body())}

    @app.post("/artifacts/clustering", status_code=201)
    async def upload_clustering(request: Request):
        body = await request.body()
        return {"id": state.save_clustering(body.decode("utf-8"))}

    # -- sessions --------------------------------------------------------------

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.json()
        for key in ("matrix", "initial"):
            if key not in body:
                raise ApiError(422, "missing_field", f"session needs a {key!r} artifact id")
        cfg = ModelConfig.from_dict(body.get("config", {}))
        session = state.create_session(body["matrix"], body["initial"], body.get("target"), cfg)
        return {"id": session.id, "warnings": cfg.validity_warnings()}

    @app.get("/sessions/{sid}")
    def get_session(sid: str):
        session = state.session(sid)
        with session.lock:
            converged = None
            if session.target is not None:
                converged = session.clustering.same_partition(session.target)
            return {
                "id": session.id,
                "n": session.clustering.n,
                "clusters": len(session.clustering),
                "edits": session.edit_count,
                "config": session.cfg.to_dict(),
                "has_target": session.target is not None,
                "converged": converged,
            }

    @app.get("/sessions/{sid}/clusters")
    def get_clusters(sid: str, page: int = 0, page_size: int = DEFAULT_PAGE_SIZE):
        session = state.session(sid)
        page_size = max(1, min(page_size, MAX_PAGE_SIZE))
        with session.lock:
            ids = session.clustering.cluster_ids()
            start = page * page_size
            chunk = ids[start : start + page_size]
            return {
                "page": page,
                "page_size": page_size,
                "total": len(ids),
                "clusters": [session.cluster_summary(cid) for cid in chunk],
            }

    @app.get("/sessions/{sid}/clusters/{cid}")
    def get_cluster(sid: str, cid: int):
        session = state.session(sid)
        with session.lock:
            if cid not in session.clustering:
                raise ApiError(404, "unknown_cluster", f"no cluster {cid} in session {sid!r}")
            summary = session.cluster_summary(cid)
            pts = sorted(session.clustering.cluster(cid).members)
            summary["members"] = pts
            summary["similarity"] = [
                [round(float(session.matrix.values[a, b]), 6) if a != b else 1.0 for b in pts]
                for a in pts
            ]
            return summary

    @app.post("/sessions/{sid}/edits")
    def submit_edit(sid: str, body: dict):
        session = state.session(sid)
        kind = body.get("kind")
        if kind not in ("split", "merge"):
            raise ApiError(422, "bad_request", "kind must be 'split' or 'merge'")
        try:
            request = EditRequest(kind, int(body["i"]), int(body["j"]) if kind == "merge" else None)
        except (KeyError, TypeError, ValueError):
            raise ApiError(422, "bad_request", "need integer cluster id(s) in 'i' (and 'j')") from None
        except DomainError as exc:
            raise ApiError(422, "bad_request", str(exc)) from None
        with session.lock:
            for cid in (request.i,) if kind == "split" else (request.i, request.j):
                if cid not in session.clustering:
                    raise ApiError(404, "unknown_cluster", f"no cluster {cid} in session {sid!r}")
            try:
                result = edits.apply(session.clustering, request, session.cfg, session.matrix, session.tree)
            except SplitInfeasible as exc:
                raise ApiError(409, "split_infeasible", str(exc)) from None
            session.edit_count += 1
            entry = {"type": "edit", "request": request.to_dict(), "result": result.to_dict()}
            if session.target is not None:
                entry["report"] = error_report(session.clustering, session.target).to_dict()
            append_jsonl(session.log_path, entry)
            response = {
                "result": result.to_dict(),
                "clusters": len(session.clustering),
                "added": [session.cluster_summary(a.id) for a in result.added],
                "removed": list(result.removed),
            }
            if "report" in entry:
                response["report"] = entry["report"]
            return response

    @app.get("/sessions/{sid}/metrics")
    def get_metrics(sid: str):
        session = state.session(sid)
        with session.lock:
            if session.target is None:
                raise ApiError(409, "target_unknown", "session was created without a target clustering")
            report = error_report(session.clustering, session.target)
            return {"report": report.to_dict(), "converged": report.delta == 0}

    @app.get("/sessions/{sid}/log")
    def get_log(sid: str):
        session = state.session(sid)
        with session.lock:
            return {"entries": read_jsonl(session.log_path)}

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
