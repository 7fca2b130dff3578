"""The local edit procedures.

Every procedure consumes an oracle request plus the configured tree/graph
machinery, mutates the Clustering in place under exclusive access, and
returns an EditResult describing exactly what changed.  Edits are local by
construction: no point outside the requested clusters ever moves.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .core import (
    Cluster,
    Clustering,
    DomainError,
    EditRequest,
    Model,
    ModelConfig,
    SimilarityMatrix,
    SplitInfeasible,
    TreeMode,
)
from .linkage import LinkageTree, build_average_linkage


class EditKind(str, Enum):
    SPLIT_APPLIED = "split_applied"
    MERGE_CARVED_PURE = "merge_carved_pure"
    MERGE_COMBINED = "merge_combined"
    MERGE_RESPLIT = "merge_resplit"
    CC_MERGE_MOVED = "cc_merge_moved"


@dataclass(frozen=True)
class AddedCluster:
    id: int
    members: frozenset[int]
    pure: bool

    def to_list(self) -> list:
        return [self.id, sorted(self.members), self.pure]


@dataclass(frozen=True)
class EditResult:
    """Outcome of one edit.

    `removed` holds ids that no longer exist; `added` holds the post-edit
    state of every cluster the edit created or modified.  Replaying a log
    therefore means: drop `removed`, upsert `added`.  `touched_points` are
    the points whose cluster id changed.
    """

    kind: EditKind
    removed: tuple[int, ...]
    added: tuple[AddedCluster, ...]
    touched_points: frozenset[int]
    note: str | None = None

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind.value,
            "removed": list(self.removed),
            "added": [a.to_list() for a in self.added],
            "touched": sorted(self.touched_points),
        }
        if self.note:
            d["note"] = self.note
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EditResult":
        return cls(
            EditKind(d["kind"]),
            tuple(d["removed"]),
            tuple(AddedCluster(a[0], frozenset(a[1]), bool(a[2])) for a in d["added"]),
            frozenset(d["touched"]),
            d.get("note"),
        )


def replay(clustering: Clustering, result: EditResult) -> None:
    """Apply a logged EditResult to a clustering without re-running the edit."""
    for cid in result.removed:
        if cid in clustering:
            clustering.remove_cluster(cid)
    for a in result.added:
        clustering.upsert_cluster(a.id, a.members, a.pure)


# ---------------------------------------------------------------------------
# Splits
# ---------------------------------------------------------------------------


def _apply_split(c: Clustering, cluster: Cluster, halves: tuple[set[int], set[int]]) -> EditResult:
    h1, h2 = (frozenset(h) for h in halves)
    assert h1 and h2 and not (h1 & h2) and (h1 | h2) == cluster.members
    members = frozenset(cluster.members)
    c.remove_cluster(cluster.id)
    a = c.add_cluster(h1, pure=False)
    b = c.add_cluster(h2, pure=False)
    return EditResult(
        EditKind.SPLIT_APPLIED,
        removed=(cluster.id,),
        added=(AddedCluster(a.id, h1, False), AddedCluster(b.id, h2, False)),
        touched_points=members,
    )


def split_global(c: Clustering, cid: int, tree: LinkageTree) -> EditResult:
    """Split at the tree node where the cluster's points first come apart."""
    cluster = c.cluster(cid)
    if len(cluster) < 2:
        raise SplitInfeasible(f"cluster {cid} has a single point")
    node = tree.find_split_node(cluster.members)
    n1, n2 = node.children
    return _apply_split(c, cluster, (n1.members & cluster.members, n2.members & cluster.members))


def split_local(c: Clustering, cid: int, s: SimilarityMatrix) -> EditResult:
    """Split at the root of an average-linkage tree over the cluster alone."""
    cluster = c.cluster(cid)
    if len(cluster) < 2:
        raise SplitInfeasible(f"cluster {cid} has a single point")
    local = build_average_linkage(s, cluster.members)
    n1, n2 = local.root.children
    return _apply_split(c, cluster, (set(n1.members), set(n2.members)))


# ---------------------------------------------------------------------------
# Merges
# ---------------------------------------------------------------------------


def _purity_fractions(ci: Cluster, cj: Cluster, eta: float) -> tuple[float, float]:
    # a "pure" cluster may only be absorbed whole
    return (1.0 if ci.pure else eta, 1.0 if cj.pure else eta)


def _carve(c: Clustering, ci: Cluster, cj: Cluster, carved: frozenset[int], note: str | None) -> EditResult:
    removed: list[int] = []
    added: list[AddedCluster] = []
    for cl in (ci, cj):
        part = carved & cl.members
        if part == cl.members:
            c.remove_cluster(cl.id)
            removed.append(cl.id)
        elif part:
            c.remove_points(cl.id, part)
            added.append(AddedCluster(cl.id, frozenset(cl.members), cl.pure))
    new = c.add_cluster(carved, pure=True)
    added.append(AddedCluster(new.id, carved, True))
    return EditResult(
        EditKind.MERGE_CARVED_PURE,
        removed=tuple(removed),
        added=tuple(added),
        touched_points=carved,
        note=note,
    )


def merge_eta(c: Clustering, i: int, j: int, eta: float, tree: LinkageTree) -> EditResult:
    """Carve the deepest tree node with enough points of both clusters.

    The carved points become a new cluster marked pure; the remainders of the
    two inputs shrink in place (and are deleted when emptied).
    """
    ci, cj = c.cluster(i), c.cluster(j)
    eta1, eta2 = _purity_fractions(ci, cj, eta)
    node = tree.find_merge_node(ci.members, cj.members, eta1, eta2)
    note = "merge_node_at_root" if node is tree.root else None
    carved = frozenset(node.members & (ci.members | cj.members))
    return _carve(c, ci, cj, carved, note)


def merge_local(c: Clustering, i: int, j: int, eta: float, s: SimilarityMatrix) -> EditResult:
    """merge_eta against a local tree built over the two clusters only."""
    ci, cj = c.cluster(i), c.cluster(j)
    eta1, eta2 = _purity_fractions(ci, cj, eta)
    local = build_average_linkage(s, ci.members | cj.members)
    node = local.find_merge_node(ci.members, cj.members, eta1, eta2)
    note = "merge_node_at_root" if node is local.root else None
    carved = frozenset(node.members & (ci.members | cj.members))
    return _carve(c, ci, cj, carved, note)


def merge_threshold(c: Clustering, i: int, j: int, eta: float, s: SimilarityMatrix) -> EditResult:
    """Grow a similarity-threshold graph over the union until one connected
    component holds enough points of both clusters, then carve it."""
    ci, cj = c.cluster(i), c.cluster(j)
    eta1, eta2 = _purity_fractions(ci, cj, eta)
    need_i, need_j = eta1 * len(ci), eta2 * len(cj)
    pts = sorted(ci.members | cj.members)
    edges = sorted(
        ((x, y) for ai, x in enumerate(pts) for y in pts[ai + 1 :]),
        key=lambda e: (-s.values[e[0], e[1]], e),
    )
    parent = {p: p for p in pts}
    stats = {p: (1 if p in ci.members else 0, 1 if p in cj.members else 0, {p}) for p in pts}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    carved: frozenset[int] | None = None
    for x, y in edges:
        rx, ry = find(x), find(y)
        if rx == ry:
            continue
        ax, aj, mx = stats[rx]
        bx, bj, my = stats[ry]
        if len(my) > len(mx):
            rx, ry = ry, rx
            mx, my = my, mx
        parent[ry] = rx
        stats[rx] = (ax + bx, aj + bj, mx | my)
        cnt_i, cnt_j, comp = stats[rx]
        if cnt_i >= need_i and cnt_j >= need_j:
            carved = frozenset(comp)
            break
    assert carved is not None  # the full union always qualifies
    return _carve(c, ci, cj, carved, None)


def merge_cc(c: Clustering, i: int, j: int, eta: float, tree: LinkageTree) -> EditResult:
    """Correlation-clustering merge: the larger cluster absorbs the found
    node's share of the smaller one; no new cluster and no purity flags."""
    ci, cj = c.cluster(i), c.cluster(j)
    node = tree.find_merge_node(ci.members, cj.members, eta, eta)
    note = "merge_node_at_root" if node is tree.root else None
    absorber, donor = (ci, cj) if (len(ci), cj.id) > (len(cj), ci.id) else (cj, ci)
    moved = frozenset(node.members & donor.members)
    c.remove_points(donor.id, moved)
    c.add_points(absorber.id, moved)
    removed: tuple[int, ...] = ()
    added = [AddedCluster(absorber.id, frozenset(absorber.members), absorber.pure)]
    if donor.members:
        added.append(AddedCluster(donor.id, frozenset(donor.members), donor.pure))
    else:
        c.remove_cluster(donor.id)
        removed = (donor.id,)
    return EditResult(EditKind.CC_MERGE_MOVED, removed, tuple(added), moved, note)


def merge_unrestricted(
    c: Clustering,
    i: int,
    j: int,
    tree: LinkageTree | None = None,
    s: SimilarityMatrix | None = None,
) -> EditResult:
    """Split the union; keep it whole only when the split reproduces the inputs.

    With a global `tree` the union is split at its find_split_node; with a
    similarity matrix instead, a local tree over the union is used.
    """
    ci, cj = c.cluster(i), c.cluster(j)
    union = ci.members | cj.members
    if tree is not None:
        node = tree.find_split_node(union)
        h1, h2 = (frozenset(ch.members & union) for ch in node.children)
    elif s is not None:
        local = build_average_linkage(s, union)
        h1, h2 = (ch.members for ch in local.root.children)
    else:
        raise DomainError("merge_unrestricted needs a tree or a similarity matrix")

    union = frozenset(union)
    if {h1, h2} == {frozenset(ci.members), frozenset(cj.members)}:
        pure = ci.pure and cj.pure
        c.remove_cluster(i)
        c.remove_cluster(j)
        new = c.add_cluster(union, pure=pure)
        return EditResult(
            EditKind.MERGE_COMBINED,
            removed=(i, j),
            added=(AddedCluster(new.id, union, pure),),
            touched_points=union,
        )
    c.remove_cluster(i)
    c.remove_cluster(j)
    a = c.add_cluster(h1, pure=False)
    b = c.add_cluster(h2, pure=False)
    return EditResult(
        EditKind.MERGE_RESPLIT,
        removed=(i, j),
        added=(AddedCluster(a.id, h1, False), AddedCluster(b.id, h2, False)),
        touched_points=union,
    )


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------


def apply(
    c: Clustering,
    request: EditRequest,
    cfg: ModelConfig,
    s: SimilarityMatrix,
    tree: LinkageTree | None = None,
) -> EditResult:
    """Run the procedure selected by the model and tree mode.

    `tree` is the prebuilt global (or robust) tree; local and threshold-graph
    modes work from the similarity matrix alone.
    """
    uses_global = cfg.tree_mode in (TreeMode.GLOBAL, TreeMode.ROBUST_GLOBAL)
    if uses_global and tree is None:
        raise DomainError(f"tree mode {cfg.tree_mode.value} needs a prebuilt tree")

    if request.kind == "split":
        if uses_global:
            return split_global(c, request.i, tree)
        return split_local(c, request.i, s)

    i, j = request.i, request.j
    if cfg.model is Model.ETA_MERGE:
        if uses_global:
            return merge_eta(c, i, j, cfg.eta, tree)
        if cfg.tree_mode is TreeMode.LOCAL:
            return merge_local(c, i, j, cfg.eta, s)
        return merge_threshold(c, i, j, cfg.eta, s)
    if cfg.model is Model.ETA_MERGE_CC:
        if uses_global:
            return merge_cc(c, i, j, cfg.eta, tree)
        if cfg.tree_mode is TreeMode.LOCAL:
            local = build_average_linkage(s, c.cluster(i).members | c.cluster(j).members)
            return merge_cc(c, i, j, cfg.eta, local)
        raise DomainError("the cc model has no threshold-graph merge procedure")
    # unrestricted
    if uses_global:
        return merge_unrestricted(c, i, j, tree=tree)
    if cfg.tree_mode is TreeMode.LOCAL:
        return merge_unrestricted(c, i, j, s=s)
    raise DomainError("the unrestricted model has no threshold-graph merge procedure")
