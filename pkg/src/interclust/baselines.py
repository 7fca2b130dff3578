"""Comparison splitters and the split evaluator.

Three reference techniques for splitting a known over-cluster: the optimal
2-median partition under distance 1 - similarity, and two sweeps of the
second-smallest Laplacian eigenvector (conductance-minimizing and
similarity-gap).  The eigenvector comes from a deflated power iteration; the
dense eigensolver is used only as an independent oracle in the tests.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .core import Clustering, DomainError, SimilarityMatrix, error_report

TWO_MEDIAN_CAP = 400
POWER_TOL = 1e-8
POWER_MAX_ITER = 10_000


def split_2median(s: SimilarityMatrix, members) -> tuple[set[int], set[int]]:
    """Optimal 2-median bipartition with d = 1 - similarity.

    All center pairs are tried exhaustively (quadratic in the cluster size,
    hence the hard cap); points go to the nearer center, ties to the first.
    """
    pts = sorted(set(members))
    if len(pts) < 2:
        raise DomainError("split_2median needs at least 2 points")
    if len(pts) > TWO_MEDIAN_CAP:
        raise DomainError(
            f"split_2median is exhaustive and capped at {TWO_MEDIAN_CAP} points; "
            "sample the cluster down first"
        )
    sub = 1.0 - s.values[np.ix_(pts, pts)]
    np.fill_diagonal(sub, 0.0)
    best_cost, best = None, None
    for a, b in combinations(range(len(pts)), 2):
        to_a = sub[a] <= sub[b]  # ties go to the first center
        cost = float(np.where(to_a, sub[a], sub[b]).sum())
        if best_cost is None or cost < best_cost:
            best_cost, best = cost, to_a
    side_a = {pts[i] for i in np.nonzero(best)[0]}
    return side_a, set(pts) - side_a


def _connected_components(weights: np.ndarray) -> list[list[int]]:
    m = weights.shape[0]
    seen = [False] * m
    comps = []
    for start in range(m):
        if seen[start]:
            continue
        stack, comp = [start], []
        seen[start] = True
        while stack:
            x = stack.pop()
            comp.append(x)
            for y in np.nonzero(weights[x] > 0.0)[0]:
                if not seen[y]:
                    seen[y] = True
                    stack.append(int(y))
        comps.append(sorted(comp))
    return comps


def fiedler_vector(weights: np.ndarray, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> np.ndarray:
    """Second-smallest eigenvector of L = D - W by deflated power iteration.

    Iterates M = cI - L (c above the spectrum, so the smallest eigenvalues of
    L become the largest of M) while projecting out the all-ones eigenvector.
    Deterministic: fixed-seed start vector.
    """
    m = weights.shape[0]
    deg = weights.sum(axis=1)
    lap = np.diag(deg) - weights
    shift = 2.0 * float(deg.max()) + 1.0
    v = np.random.default_rng(0).standard_normal(m)
    v -= v.mean()
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = shift * v - lap @ v
        w -= w.mean()  # deflate the constant eigenvector
        norm = np.linalg.norm(w)
        if norm == 0.0:
            break
        w /= norm
        if min(np.linalg.norm(w - v), np.linalg.norm(w + v)) < tol:
            v = w
            break
        v = w
    return v


def split_spectral(s: SimilarityMatrix, members, mode: str) -> tuple[set[int], set[int]]:
    """Sweep cut of the Fiedler vector over the induced similarity graph.

    mode="balanced": the prefix cut of smallest conductance
    cut(A, B) / min(vol A, vol B).  mode="gap": the cut between the adjacent
    sorted vertices with smallest similarity.  A disconnected induced graph
    is split along its connected components directly.
    """
    if mode not in ("balanced", "gap"):
        raise DomainError(f"unknown spectral mode {mode!r}")
    pts = sorted(set(members))
    if len(pts) < 2:
        raise DomainError("split_spectral needs at least 2 points")
    weights = s.values[np.ix_(pts, pts)].copy()
    np.fill_diagonal(weights, 0.0)

    comps = _connected_components(weights)
    if len(comps) > 1:
        comps.sort(key=lambda c: (-len(c), c[0]))
        side = {pts[i] for i in comps[0]}
        return side, set(pts) - side

    v = fiedler_vector(weights)
    order = np.lexsort((np.arange(len(pts)), v))
    deg = weights.sum(axis=1)
    total_vol = float(deg.sum())

    best_idx, best_key = None, None
    if mode == "gap":
        for i in range(len(pts) - 1):
            gap_sim = float(weights[order[i], order[i + 1]])
            if best_key is None or gap_sim < best_key:
                best_key, best_idx = gap_sim, i
    else:
        vol = 0.0
        cut = 0.0
        for i in range(len(pts) - 1):
            x = order[i]
            cut += float(deg[x]) - 2.0 * float(weights[x, order[: i + 1]].sum())
            vol += float(deg[x])
            conductance = cut / min(vol, total_vol - vol)
            if best_key is None or conductance < best_key:
                best_key, best_idx = conductance, i
    side = {pts[i] for i in order[: best_idx + 1]}
    return side, set(pts) - side


def evaluate_split(before: Clustering, after: Clustering, target: Clustering) -> tuple[bool, int]:
    """(is_clean, cc_delta) for a single binary split.

    `after` must equal `before` with exactly one cluster replaced by two; the
    split is clean when no target cluster has points in both halves.
    """
    gone = before.canonical() - after.canonical()
    new = after.canonical() - before.canonical()
    if len(gone) != 1 or len(new) != 2:
        raise DomainError("after must differ from before by exactly one binary split")
    (whole,) = gone
    h1, h2 = sorted(new, key=min)
    if h1 | h2 != whole or (h1 & h2):
        raise DomainError("the two new clusters must partition the removed one")
    clean = True
    for c in target:
        if c.members & h1 and c.members & h2:
            clean = False
            break
    cc_delta = error_report(after, target).delta_cc - error_report(before, target).delta_cc
    return clean, cc_delta
