"""Average-linkage trees and the two tree queries used by every edit.

Trees are built bottom-up by merging the pair of current roots with the
highest average pairwise similarity.  Ties are broken by the sorted pair of
minimum member ids, which makes construction fully deterministic.  Average
similarities are maintained as cross-sums (Lance-Williams style), so one
tree costs O(n^2) memory and O(n^3 / 3) vectorized element operations.
"""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .core import Clustering, DomainError, SimilarityMatrix


class TreeNode:
    """One node of a linkage tree; valid for the lifetime of its tree."""

    __slots__ = ("members", "children", "rank", "depth", "post_index")

    def __init__(self, members: frozenset[int], children: tuple["TreeNode", "TreeNode"] | None, rank: int):
        self.members = members
        self.children = children
        self.rank = rank  # creation order within the tree
        self.depth = 0
        self.post_index = 0

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    def __len__(self) -> int:
        return len(self.members)

    def __repr__(self) -> str:
        return f"TreeNode({sorted(self.members)!r}, rank={self.rank})"


class LinkageTree:
    """Binary merge tree over a point set, with read-only queries."""

    def __init__(self, root: TreeNode, nodes: list[TreeNode]):
        self.root = root
        self.nodes = nodes  # creation order: children always precede parents
        self.points = root.members
        leaves = [nd for nd in nodes if nd.is_leaf]
        if len(leaves) != len(self.points) or len(nodes) != 2 * len(leaves) - 1:
            raise DomainError("malformed tree: need n leaves and n-1 internal nodes")
        self._leaf_of = {next(iter(nd.members)): nd for nd in leaves}
        self._annotate()

    def _annotate(self) -> None:
        self.root.depth = 0
        for nd in reversed(self.nodes):  # parents precede children in reverse creation order
            if nd.children:
                for ch in nd.children:
                    ch.depth = nd.depth + 1
        order = 0
        stack: list[tuple[TreeNode, bool]] = [(self.root, False)]
        while stack:
            nd, expanded = stack.pop()
            if expanded or nd.is_leaf:
                nd.post_index = order
                order += 1
            else:
                stack.append((nd, True))
                stack.append((nd.children[1], False))
                stack.append((nd.children[0], False))

    # -- queries -------------------------------------------------------------

    def find_split_node(self, members: Iterable[int]) -> TreeNode:
        """Deepest node containing all of `members`; its children split them."""
        mset = frozenset(members)
        if len(mset) < 2:
            raise DomainError("find_split_node needs at least 2 points")
        if not mset <= self.points:
            raise DomainError("points missing from the tree")
        node = self.root
        while node.children:
            for ch in node.children:
                if mset <= ch.members:
                    node = ch
                    break
            else:
                return node
        raise AssertionError("descended to a leaf containing 2+ points")

    def find_merge_node(self, ci: Iterable[int], cj: Iterable[int], eta1: float, eta2: float) -> TreeNode:
        """Deepest node holding >= eta1|ci| points of ci and >= eta2|cj| of cj.

        Ties among equally deep qualifying nodes go to the first one in
        post-order.  The root always qualifies, so a node always exists.
        """
        ci, cj = set(ci), set(cj)
        if not ci or not cj:
            raise DomainError("find_merge_node needs two non-empty sets")
        if not (0 < eta1 <= 1 and 0 < eta2 <= 1):
            raise DomainError("eta fractions must lie in (0, 1]")
        need_i, need_j = eta1 * len(ci), eta2 * len(cj)
        counts: dict[int, tuple[int, int]] = {}
        best: TreeNode | None = None
        for nd in self.nodes:
            if nd.is_leaf:
                p = next(iter(nd.members))
                cnt = (1 if p in ci else 0, 1 if p in cj else 0)
            else:
                a, b = (counts[ch.rank] for ch in nd.children)
                cnt = (a[0] + b[0], a[1] + b[1])
            counts[nd.rank] = cnt
            if cnt[0] >= need_i and cnt[1] >= need_j:
                if best is None or (nd.depth, -nd.post_index) > (best.depth, -best.post_index):
                    best = nd
        assert best is not None  # the root qualifies whenever ci, cj are in the tree
        return best

    def is_laminar(self, target: Clustering) -> tuple[bool, tuple[TreeNode, int] | None]:
        """True iff no node straddles a target-cluster boundary.

        On failure also returns the first offending (node, target cluster id)
        in creation order.
        """
        if not self.points <= set(range(target.n)):
            raise DomainError("tree points missing from the target universe")
        cluster_sizes = {c.id: len(c) for c in target}
        counts: dict[int, dict[int, int]] = {}
        for nd in self.nodes:
            if nd.is_leaf:
                c = {target.cluster_of(next(iter(nd.members))): 1}
            else:
                a, b = (counts[ch.rank] for ch in nd.children)
                if len(a) < len(b):
                    a, b = b, a
                c = dict(a)
                for key, v in b.items():
                    c[key] = c.get(key, 0) + v
            counts[nd.rank] = c
            if len(c) > 1:
                for cid, cnt in c.items():
                    if cnt != cluster_sizes[cid]:
                        return False, (nd, cid)
        return True, None

    # -- export / construction helpers ----------------------------------------

    def to_newick(self) -> str:
        parts: dict[int, str] = {}
        for nd in self.nodes:
            if nd.is_leaf:
                parts[nd.rank] = str(next(iter(nd.members)))
            else:
                a, b = nd.children
                parts[nd.rank] = f"({parts[a.rank]},{parts[b.rank]})"
        return parts[self.root.rank] + ";"

    @classmethod
    def from_nested(cls, nested) -> "LinkageTree":
        """Build a tree from nested pairs of point ids, e.g. ((0, 3), (1, 2))."""
        nodes: list[TreeNode] = []

        def build(spec) -> TreeNode:
            if isinstance(spec, int):
                nd = TreeNode(frozenset([spec]), None, len(nodes))
            else:
                if len(spec) != 2:
                    raise DomainError("nested tree spec must be binary")
                left = build(spec[0])
                right = build(spec[1])
                nd = TreeNode(left.members | right.members, (left, right), len(nodes))
            nodes.append(nd)
            return nd

        return cls(build(nested), nodes)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _agglomerate(values: np.ndarray, roots: list[TreeNode], nodes: list[TreeNode]) -> TreeNode:
    """Merge the given roots into one tree by maximum average similarity.

    Appends the internal nodes it creates to `nodes` so creation ranks stay
    globally unique across construction phases.
    """
    m = len(roots)
    if m == 1:
        return roots[0]
    slot_node: list[TreeNode] = list(roots)
    sizes = np.array([len(r) for r in roots], dtype=np.float64)
    minid = np.array([min(r.members) for r in roots], dtype=np.int64)
    if all(len(r) == 1 for r in roots):
        pts = np.array([next(iter(r.members)) for r in roots], dtype=np.intp)
        cross = values[np.ix_(pts, pts)].copy()
    else:
        ind = np.zeros((m, values.shape[0]))
        for i, r in enumerate(roots):
            ind[i, sorted(r.members)] = 1.0
        cross = ind @ values @ ind.T
        cross = np.triu(cross, 1)  # BLAS may break symmetry in the last bit
        cross = cross + cross.T
    np.fill_diagonal(cross, 0.0)

    active = list(range(m))
    while len(active) > 1:
        idx = np.asarray(active, dtype=np.intp)
        avg = cross[np.ix_(idx, idx)] / np.outer(sizes[idx], sizes[idx])
        np.fill_diagonal(avg, -np.inf)
        top = avg.max()
        cand = np.argwhere(avg == top)
        best_key, best_pair = None, None
        for a, b in cand:
            if a >= b:
                continue
            i, j = idx[a], idx[b]
            key = (min(minid[i], minid[j]), max(minid[i], minid[j]))
            if best_key is None or key < best_key:
                best_key, best_pair = key, (i, j)
        assert best_pair is not None  # cross stays exactly symmetric
        i, j = best_pair
        left, right = slot_node[i], slot_node[j]
        if min(right.members) < min(left.members):
            left, right = right, left
        merged = TreeNode(left.members | right.members, (left, right), len(nodes))
        nodes.append(merged)
        cross[i, :] += cross[j, :]
        cross[:, i] += cross[:, j]
        cross[i, i] = 0.0
        sizes[i] += sizes[j]
        minid[i] = min(minid[i], minid[j])
        slot_node[i] = merged
        active.remove(j)
    return slot_node[active[0]]


def _make_leaves(points: Iterable[int]) -> list[TreeNode]:
    return [TreeNode(frozenset([p]), None, rank) for rank, p in enumerate(sorted(points))]


def build_average_linkage(s: SimilarityMatrix, points: Iterable[int]) -> LinkageTree:
    """Global (or induced) average-linkage tree over the given points."""
    pts = sorted(set(points))
    if not pts:
        raise DomainError("cannot build a tree over an empty point set")
    if pts[-1] >= s.n or pts[0] < 0:
        raise DomainError("points outside the similarity matrix")
    nodes = _make_leaves(pts)
    root = _agglomerate(s.values, list(nodes), nodes)
    return LinkageTree(root, nodes)


def _blob_components(s: SimilarityMatrix, pts: list[int], min_blob: int) -> list[set[int]]:
    """Connected components of the per-point nearest-neighbor graph.

    Each point contributes edges to its min_blob - 1 most similar neighbors
    (ties by smaller id), which forces every component with at least one
    edge-bearing point to reach min_blob points.  Zero-similarity neighbors
    never qualify, so fully dissimilar points stay isolated.
    """
    k = min_blob - 1
    parent = {p: p for p in pts}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if k > 0:
        arr = np.asarray(pts, dtype=np.intp)
        sub = s.values[np.ix_(arr, arr)].copy()
        np.fill_diagonal(sub, -np.inf)
        for a, p in enumerate(pts):
            order = np.lexsort((arr, -sub[a]))  # similarity desc, then id asc
            taken = 0
            for b in order:
                if taken == k:
                    break
                if sub[a, b] <= 0.0:
                    break
                ra, rb = find(p), find(pts[b])
                if ra != rb:
                    parent[ra] = rb
                taken += 1
    comps: dict[int, set[int]] = {}
    for p in pts:
        comps.setdefault(find(p), set()).add(p)
    return sorted(comps.values(), key=min)


def build_robust_tree(s: SimilarityMatrix, points: Iterable[int], min_blob: int) -> LinkageTree:
    """Average-linkage tree built blob-first, pushing stray points to the top.

    Points are grouped into blobs of at least `min_blob` similar points
    (nearest-neighbor components, greedily split at tree nodes when larger
    than 4 * min_blob); each blob gets its own average-linkage tree, the blob
    trees are agglomerated by average linkage, and only then are the leftover
    points (from components smaller than min_blob) attached.
    """
    if min_blob < 1:
        raise DomainError("min_blob must be >= 1")
    pts = sorted(set(points))
    if not pts:
        raise DomainError("cannot build a tree over an empty point set")

    blobs: list[set[int]] = []
    leftover: list[int] = []
    for comp in _blob_components(s, pts, min_blob):
        if len(comp) < min_blob:
            leftover.extend(comp)
        elif len(comp) <= 4 * min_blob:
            blobs.append(comp)
        else:
            inner = build_average_linkage(s, comp)
            stack = [inner.root]
            while stack:
                nd = stack.pop()
                if len(nd) > 4 * min_blob and nd.children:
                    stack.extend(nd.children)
                else:
                    blobs.append(set(nd.members))

    nodes = _make_leaves(pts)
    leaf_of = {next(iter(nd.members)): nd for nd in nodes}
    roots = []
    for blob in sorted(blobs, key=min):
        roots.append(_agglomerate(s.values, [leaf_of[p] for p in sorted(blob)], nodes))
    if roots:
        main = _agglomerate(s.values, roots, nodes)
        final = [main] + [leaf_of[p] for p in sorted(leftover)]
    else:
        final = [leaf_of[p] for p in sorted(leftover)]
    root = _agglomerate(s.values, final, nodes)
    return LinkageTree(root, nodes)
