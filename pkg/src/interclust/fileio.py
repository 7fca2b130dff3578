"""On-disk formats: similarity matrices, clustering files, JSONL corpora/logs.

Matrix formats: dense CSV whose header row is the point count, or binary
little-endian row-major float64 behind the 8-byte magic ``SIMMAT01`` (the
magic is followed by the point count as a little-endian uint64).
Clustering files: UTF-8 text, one ``point_id<TAB>cluster_id`` line per point.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Iterable

import numpy as np

from .core import Clustering, DomainError, SimilarityMatrix

SIMMAT_MAGIC = b"SIMMAT01"


# ---------------------------------------------------------------------------
# Similarity matrices
# ---------------------------------------------------------------------------


def matrix_to_csv(s: SimilarityMatrix) -> str:
    lines = [str(s.n)]
    for row in s.values:
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"


def matrix_from_csv(text: str) -> SimilarityMatrix:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise DomainError("empty matrix file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise DomainError("matrix CSV must start with a header row holding n") from None
    if len(lines) != n + 1:
        raise DomainError(f"expected {n} matrix rows, found {len(lines) - 1}")
    values = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    if values.shape != (n, n):
        raise DomainError("matrix rows do not match the declared size")
    return SimilarityMatrix(values)


def matrix_to_bytes(s: SimilarityMatrix) -> bytes:
    header = SIMMAT_MAGIC + struct.pack("<Q", s.n)
    return header + np.ascontiguousarray(s.values, dtype="<f8").tobytes()


def matrix_from_bytes(data: bytes) -> SimilarityMatrix:
    if len(data) < 16 or data[:8] != SIMMAT_MAGIC:
        raise DomainError("not a SIMMAT01 payload")
    (n,) = struct.unpack("<Q", data[8:16])
    expected = 16 + 8 * n * n
    if len(data) != expected:
        raise DomainError(f"SIMMAT01 payload must hold {n}x{n} float64 values")
    values = np.frombuffer(data, dtype="<f8", offset=16).reshape(n, n)
    return SimilarityMatrix(values.astype(np.float64))


def sniff_matrix(data: bytes) -> SimilarityMatrix:
    """Accept either format: binary when the magic matches, CSV otherwise."""
    if data[:8] == SIMMAT_MAGIC:
        return matrix_from_bytes(data)
    return matrix_from_csv(data.decode("utf-8"))


def write_matrix(path: str | Path, s: SimilarityMatrix, binary: bool = False) -> None:
    path = Path(path)
    if binary:
        path.write_bytes(matrix_to_bytes(s))
    else:
        path.write_text(matrix_to_csv(s), encoding="utf-8")


def read_matrix(path: str | Path) -> SimilarityMatrix:
    return sniff_matrix(Path(path).read_bytes())


# ---------------------------------------------------------------------------
# Clusterings
# ---------------------------------------------------------------------------


def clustering_to_tsv(c: Clustering) -> str:
    assignments = c.assignments()
    return "".join(f"{p}\t{assignments[p]}\n" for p in range(c.n))


def clustering_from_tsv(text: str) -> Clustering:
    """Parse a point/cluster table.

    The file carries membership only: cluster ids are renumbered densely and
    every cluster starts impure.
    """
    labels: dict[int, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DomainError(f"line {lineno}: expected point_id<TAB>cluster_id")
        try:
            point, cid = int(parts[0]), int(parts[1])
        except ValueError:
            raise DomainError(f"line {lineno}: ids must be integers") from None
        if point in labels:
            raise DomainError(f"line {lineno}: duplicate point {point}")
        labels[point] = cid
    if not labels:
        raise DomainError("empty clustering file")
    if set(labels) != set(range(len(labels))):
        raise DomainError("point ids must be dense in [0, n)")
    return Clustering.from_labels([labels[p] for p in range(len(labels))])


def write_clustering(path: str | Path, c: Clustering) -> None:
    Path(path).write_text(clustering_to_tsv(c), encoding="utf-8")


def read_clustering(path: str | Path) -> Clustering:
    return clustering_from_tsv(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# JSON lines
# ---------------------------------------------------------------------------


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def append_jsonl(path: str | Path, record: dict) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def read_jsonl(path: str | Path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(json.loads(line))
    return out


def read_corpus_jsonl(path: str | Path) -> tuple[list[str], list[str], list[str]]:
    """Corpus file: one {id, label, text} object per line.

    Returns (texts, labels, ids) in file order.
    """
    texts, labels, ids = [], [], []
    for rec in read_jsonl(path):
        for key in ("id", "label", "text"):
            if key not in rec:
                raise DomainError(f"corpus record missing {key!r}")
        ids.append(str(rec["id"]))
        labels.append(str(rec["label"]))
        texts.append(str(rec["text"]))
    if not texts:
        raise DomainError("empty corpus file")
    return texts, labels, ids
