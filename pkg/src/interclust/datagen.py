"""Experiment inputs: planted instances, perturbations, pruning, documents.

Planted instances are synthetic stand-ins for the proprietary and newsgroup
data: similarities fall in a within band and a strictly lower across band,
so strict threshold separation holds by construction.
"""

from __future__ import annotations

import logging
import re
from typing import Iterable, Sequence

Seed = int | Sequence[int]

import numpy as np

from .core import Clustering, DomainError, SimilarityMatrix

logger = logging.getLogger(__name__)

_TOKEN_SPLIT = re.compile(r"[^0-9a-z]+")


def plant_instance(
    n: int,
    k: int,
    within: float = 0.9,
    across: float = 0.1,
    jitter: float = 0.0,
    seed: Seed = 0,
) -> tuple[SimilarityMatrix, Clustering]:
    """Random instance with k planted clusters of size >= 2 over n points.

    Pair similarities are uniform in [within-jitter, within+jitter] inside a
    cluster and [across-jitter, across+jitter] across clusters; the bands may
    not overlap, so the output always passes check_strict_threshold.
    """
    if k < 1 or n < 2 * k:
        raise DomainError(f"need n >= 2k for clusters of size >= 2, got n={n}, k={k}")
    if not within - jitter > across + jitter >= 0:
        raise DomainError("bands must satisfy within-jitter > across+jitter >= 0")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    sizes = 2 + rng.multinomial(n - 2 * k, np.full(k, 1.0 / k))
    labels = np.repeat(np.arange(k), sizes)
    target = Clustering.from_labels(labels, pure=True)
    values = rng.uniform(across - jitter, across + jitter, size=(n, n))
    for c in target:
        idx = np.asarray(sorted(c.members))
        values[np.ix_(idx, idx)] = rng.uniform(
            within - jitter, within + jitter, size=(len(idx), len(idx))
        )
    values = np.triu(values, 1)
    return SimilarityMatrix(values + values.T), target


def perturb(target: Clustering, p_keep: float, seed: Seed = 0) -> Clustering:
    """Initial clustering: each point keeps its target label with probability
    p_keep, otherwise moves to one of the other labels uniformly at random.

    Labels that end up empty simply drop out; every resulting cluster starts
    impure.
    """
    if not 0.0 <= p_keep <= 1.0:
        raise DomainError(f"p_keep must lie in [0, 1], got {p_keep}")
    ids = sorted(c.id for c in target)
    k = len(ids)
    if k < 2 and p_keep < 1.0:
        raise DomainError("cannot reassign points with fewer than 2 target clusters")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    pos = {cid: i for i, cid in enumerate(ids)}
    labels = np.array([pos[cid] for cid in target.assignments()])
    moved = rng.random(target.n) >= p_keep
    if moved.any():
        draw = rng.integers(0, k - 1, size=int(moved.sum()))
        own = labels[moved]
        labels[moved] = draw + (draw >= own)
    return Clustering.from_labels(labels)


def prune_outliers(
    s: SimilarityMatrix, target: Clustering, per_cluster: int
) -> tuple[SimilarityMatrix, Clustering]:
    """Drop the `per_cluster` worst outliers of every target cluster.

    The outlier is the point with minimum sum-similarity to the rest of its
    own cluster, recomputed after each removal (ties go to the smallest id).
    Surviving points are reindexed densely; similarities between them are
    untouched.
    """
    if per_cluster < 0:
        raise DomainError("per_cluster must be >= 0")
    survivors: list[int] = []
    for c in target:
        if len(c) <= per_cluster:
            raise DomainError(f"cluster {c.id} would be emptied by pruning {per_cluster}")
        members = sorted(c.members)
        for _ in range(per_cluster):
            block = s.values[np.ix_(members, members)]
            sums = block.sum(axis=0) - np.diag(block)
            members.pop(int(np.argmin(sums)))  # argmin takes the smallest id on ties
        survivors.extend(members)
    survivors.sort()
    idx = np.asarray(survivors, dtype=np.intp)
    new_values = s.values[np.ix_(idx, idx)]
    old_label = target.assignments()
    new_labels = [old_label[p] for p in survivors]
    return SimilarityMatrix(new_values), Clustering.from_labels(new_labels, pure=True)


def inject_outliers(
    s: SimilarityMatrix, target: Clustering, fraction: float = 0.05, seed: Seed = 0
) -> tuple[SimilarityMatrix, list[int]]:
    """Turn a random `fraction` of points into zero-similarity outliers.

    The chosen points keep their target membership but lose all similarity
    evidence, which breaks stability and pushes them to the top of linkage
    trees.  Clusters always keep at least two unaffected points.
    """
    if not 0.0 <= fraction < 1.0:
        raise DomainError("fraction must lie in [0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    count = max(1, round(fraction * target.n)) if fraction > 0 else 0
    intact = {c.id: len(c) for c in target}
    outliers: list[int] = []
    order = rng.permutation(target.n)
    for p in map(int, order):
        if len(outliers) == count:
            break
        cid = target.cluster_of(p)
        if intact[cid] <= 2:
            continue
        intact[cid] -= 1
        outliers.append(p)
    values = s.values.copy()
    for p in outliers:
        values[p, :] = 0.0
        values[:, p] = 0.0
    return SimilarityMatrix(values), sorted(outliers)


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs; no stemming, no stop words."""
    return [t for t in _TOKEN_SPLIT.split(text.lower()) if t]


def ingest_documents(corpus: Sequence[Iterable[str]]) -> SimilarityMatrix:
    """Cosine similarity between tf-idf vectors of the given token streams.

    Raw term counts weighted by log(n_docs / doc_frequency), L2-normalized;
    the dot product of normalized vectors is then the cosine, in [0, 1].
    Documents with no weighted terms get a zero vector (similarity 0 to
    everything) and a logged warning.
    """
    docs = [list(d) for d in corpus]
    if not docs:
        raise DomainError("empty corpus")
    vocab: dict[str, int] = {}
    for d in docs:
        for t in d:
            vocab.setdefault(t, len(vocab))
    n_docs = len(docs)
    counts = np.zeros((n_docs, max(len(vocab), 1)))
    for i, d in enumerate(docs):
        for t in d:
            counts[i, vocab[t]] += 1.0
    df = (counts > 0).sum(axis=0)
    idf = np.zeros(counts.shape[1])
    present = df > 0
    idf[present] = np.log(n_docs / df[present])
    weighted = counts * idf
    norms = np.linalg.norm(weighted, axis=1)
    for i, nrm in enumerate(norms):
        if nrm == 0.0:
            logger.warning("document %d has no weighted terms; similarity 0 to everything", i)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = weighted / safe[:, None]
    values = np.clip(unit @ unit.T, 0.0, 1.0)
    values = np.triu(values, 1)
    return SimilarityMatrix(values + values.T)
