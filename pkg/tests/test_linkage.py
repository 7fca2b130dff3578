import numpy as np
import pytest

from interclust.core import Clustering, DomainError, SimilarityMatrix, check_strict_threshold
from interclust.linkage import LinkageTree, build_average_linkage, build_robust_tree

from conftest import planted_matrix
from oracles import naive_average_linkage


def as_nested(node):
    if node.is_leaf:
        return next(iter(node.members))
    return tuple(as_nested(ch) for ch in node.children)


def grid_matrix(rng, n, grid=64):
    """Random symmetric similarities on a 1/grid lattice: exact float sums."""
    values = rng.integers(1, grid, size=(n, n)).astype(np.float64) / grid
    values = np.triu(values, 1)
    return SimilarityMatrix(values + values.T)


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def test_build_trivial_trees(planted6):
    s, _ = planted6
    one = build_average_linkage(s, {3})
    assert one.root.is_leaf and one.points == frozenset({3})
    two = build_average_linkage(s, {1, 4})
    assert not two.root.is_leaf
    assert {frozenset(ch.members) for ch in two.root.children} == {frozenset({1}), frozenset({4})}
    with pytest.raises(DomainError):
        build_average_linkage(s, set())


def test_build_planted_separates_blocks(planted6):
    s, target = planted6
    tree = build_average_linkage(s, range(6))
    assert {frozenset(ch.members) for ch in tree.root.children} == {
        frozenset({0, 1, 2}),
        frozenset({3, 4, 5}),
    }
    ok, violation = tree.is_laminar(target)
    assert ok and violation is None


def test_build_matches_naive_recomputation():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(2, 28))
        s = grid_matrix(rng, n)
        tree = build_average_linkage(s, range(n))
        expected = naive_average_linkage(s.values, range(n))
        assert as_nested(tree.root) == expected


def test_build_is_deterministic(planted6):
    s, _ = planted6
    a = build_average_linkage(s, range(6))
    b = build_average_linkage(s, range(6))
    assert as_nested(a.root) == as_nested(b.root)
    assert a.to_newick() == b.to_newick()


def test_node_bookkeeping(planted6):
    s, _ = planted6
    tree = build_average_linkage(s, range(6))
    assert len(tree.nodes) == 11  # 6 leaves + 5 internal
    assert tree.root.depth == 0
    for nd in tree.nodes:
        if nd.children:
            a, b = nd.children
            assert a.members | b.members == nd.members
            assert not a.members & b.members
            assert a.depth == b.depth == nd.depth + 1
            assert a.rank < nd.rank and b.rank < nd.rank


# ---------------------------------------------------------------------------
# find_split_node
# ---------------------------------------------------------------------------


def test_find_split_node(planted6):
    s, _ = planted6
    tree = build_average_linkage(s, range(6))
    assert tree.find_split_node(range(6)) is tree.root
    assert tree.find_split_node({2, 3}) is tree.root  # blocks each miss one point
    node = tree.find_split_node({4, 5})
    in_first = sum(1 for ch in node.children if ch.members & {4, 5} == {4})
    assert in_first == 1  # children separate 4 from 5
    with pytest.raises(DomainError):
        tree.find_split_node({2})
    with pytest.raises(DomainError):
        tree.find_split_node({2, 99})


def test_find_split_node_partitions_members():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(3, 30))
        s = grid_matrix(rng, n)
        tree = build_average_linkage(s, range(n))
        members = set(map(int, rng.choice(n, size=int(rng.integers(2, n + 1)), replace=False)))
        node = tree.find_split_node(members)
        halves = [ch.members & members for ch in node.children]
        assert halves[0] and halves[1]
        assert halves[0] | halves[1] == members


# ---------------------------------------------------------------------------
# find_merge_node
# ---------------------------------------------------------------------------


def test_find_merge_node(planted6):
    s, _ = planted6
    tree = build_average_linkage(s, range(6))
    node = tree.find_merge_node({0, 1}, {2}, 1.0, 1.0)
    assert node.members == frozenset({0, 1, 2})
    assert tree.find_merge_node({0, 1, 2}, {3, 4, 5}, 1.0, 1.0) is tree.root
    # the deepest qualifying node holds points of both disjoint sets, so it
    # can never be a leaf
    deep = tree.find_merge_node({0}, {5}, 0.5, 0.5)
    assert len(deep) >= 2
    with pytest.raises(DomainError):
        tree.find_merge_node(set(), {1}, 1.0, 1.0)


def test_find_merge_node_above_half_is_pure_on_laminar_trees():
    # with both fractions > 0.5 on a laminar tree, the found node must sit
    # inside the one target cluster the two sets share
    rng = np.random.default_rng(29)
    checked = 0
    while checked < 25:
        n = int(rng.integers(12, 40))
        k = int(rng.integers(2, 5))
        labels = np.concatenate([np.repeat(np.arange(k), 2), rng.integers(0, k, size=n - 2 * k)])
        target = Clustering.from_labels(labels)
        s = planted_matrix(target.member_sets(), n)
        tree = build_average_linkage(s, range(n))
        lab = target.assignments()
        home = rng.integers(k)
        pool = [p for p in range(n) if lab[p] == home]
        other = [p for p in range(n) if lab[p] != home]
        if len(pool) < 4:
            continue
        rng.shuffle(pool)
        ci = set(pool[: len(pool) // 2]) | set(other[:1])
        cj = set(pool[len(pool) // 2 :])
        eta1 = len(pool) // 2 / len(ci) if other else 1.0
        if eta1 <= 0.5:
            continue
        node = tree.find_merge_node(ci, cj, eta1, 1.0)
        assert len({lab[p] for p in node.members}) == 1
        checked += 1


def test_find_merge_node_prefers_depth_then_post_order():
    tree = LinkageTree.from_nested((((0, 1), (2, 3)), (4, 5)))
    # both {0,1} and {2,3} qualify for eta=0.5 of ci={0,2}, cj={1,3};
    # both sit at depth 2: post-order reaches {0,1} first
    node = tree.find_merge_node({0, 2}, {1, 3}, 0.5, 0.5)
    assert node.members == frozenset({0, 1})
    # deeper qualifying nodes win over shallower ones
    node = tree.find_merge_node({2}, {3}, 1.0, 1.0)
    assert node.members == frozenset({2, 3})


# ---------------------------------------------------------------------------
# is_laminar
# ---------------------------------------------------------------------------


def test_is_laminar_violation_reported():
    target = Clustering([{0, 1, 2}, {3, 4, 5}])
    bad = LinkageTree.from_nested(((0, 3), ((1, 2), (4, 5))))
    ok, violation = bad.is_laminar(target)
    assert not ok
    node, cid = violation
    assert node.members == frozenset({0, 3})


def test_is_laminar_single_cluster_always_true():
    tree = LinkageTree.from_nested(((0, 2), (1, 3)))
    ok, _ = tree.is_laminar(Clustering([{0, 1, 2, 3}]))
    assert ok


def test_laminar_on_threshold_instances():
    rng = np.random.default_rng(17)
    for _ in range(30):
        n = int(rng.integers(8, 60))
        k = int(rng.integers(2, 6))
        labels = np.concatenate([np.repeat(np.arange(k), 2), rng.integers(0, k, size=n - 2 * k)])
        target = Clustering.from_labels(labels)
        jitter = float(rng.uniform(0, 0.05))
        values = rng.uniform(0.1 - jitter, 0.1 + jitter, size=(n, n))
        values = (values + values.T) / 2
        for c in target:
            idx = np.asarray(sorted(c.members))
            block = rng.uniform(0.9 - jitter, 0.9 + jitter, size=(len(idx), len(idx)))
            values[np.ix_(idx, idx)] = (block + block.T) / 2
        s = SimilarityMatrix(values)
        assert check_strict_threshold(target, s) is not None
        ok, _ = build_average_linkage(s, range(n)).is_laminar(target)
        assert ok


# ---------------------------------------------------------------------------
# Robust tree
# ---------------------------------------------------------------------------


def test_robust_min_blob_one_matches_plain(planted6):
    s, target = planted6
    plain = build_average_linkage(s, range(6))
    robust = build_robust_tree(s, range(6), min_blob=1)
    assert as_nested(robust.root) == as_nested(plain.root)


def test_robust_blobs_recover_planted_blocks(planted6):
    s, target = planted6
    for min_blob in (2, 3):
        tree = build_robust_tree(s, range(6), min_blob=min_blob)
        assert {frozenset(ch.members) for ch in tree.root.children} == {
            frozenset({0, 1, 2}),
            frozenset({3, 4, 5}),
        }
        ok, _ = tree.is_laminar(target)
        assert ok


def test_robust_outlier_attaches_at_root():
    target = Clustering([{0, 1, 2}, {3, 4, 5}])
    values = planted_matrix(target.member_sets(), 7).values.copy()
    values[6, :] = 0.0
    values[:, 6] = 0.0
    s = SimilarityMatrix(values)
    tree = build_robust_tree(s, range(7), min_blob=2)
    assert {frozenset(ch.members) for ch in tree.root.children} == {
        frozenset(range(6)),
        frozenset({6}),
    }


def test_robust_oversized_component_is_split():
    # one tight 12-point block: component size 12 > 4*min_blob=8 forces a
    # greedy split into smaller blobs, and the final tree still has 23 nodes
    target = Clustering([set(range(12))])
    s = planted_matrix(target.member_sets(), 12)
    tree = build_robust_tree(s, range(12), min_blob=2)
    assert len(tree.nodes) == 23
    assert tree.points == frozenset(range(12))


def test_newick_roundtrip_shape(planted6):
    s, _ = planted6
    tree = build_average_linkage(s, range(6))
    text = tree.to_newick()
    assert text.endswith(";") and text.count("(") == 5
    rebuilt = LinkageTree.from_nested(as_nested(tree.root))
    assert rebuilt.to_newick() == text
