"""Domain types, clustering distances, and oracle-model definitions.

Points are dense integer ids in [0, n).  A Clustering partitions them into
clusters that carry a stable integer id and a pure/impure flag.  Similarity
is a symmetric n-by-n matrix with the diagonal fixed at 1.0 (and never read
by any algorithm).  Everything in this module is pure; only the edit
procedures mutate a Clustering, under exclusive access.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

import numpy as np


class DomainError(ValueError):
    """An input violates a documented precondition (universe mismatch, bad parameter)."""


class SplitInfeasible(Exception):
    """Split requested on a cluster with fewer than 2 points."""


# ---------------------------------------------------------------------------
# Similarity
# ---------------------------------------------------------------------------


class SimilarityMatrix:
    """Symmetric pairwise similarity over points [0, n).

    The underlying array is treated as read-only after construction.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DomainError(f"similarity matrix must be square, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DomainError("similarity matrix contains non-finite values")
        if not np.array_equal(values, values.T):
            raise DomainError("similarity matrix must be symmetric")
        values = values.copy()
        np.fill_diagonal(values, 1.0)  # self-similarity: defined, never read
        self.values = values

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def sim(self, x: int, y: int) -> float:
        return float(self.values[x, y])

    def submatrix(self, points: Iterable[int]) -> np.ndarray:
        idx = np.asarray(sorted(points), dtype=np.intp)
        return self.values[np.ix_(idx, idx)]


# ---------------------------------------------------------------------------
# Clusters and clusterings
# ---------------------------------------------------------------------------


@dataclass
class Cluster:
    id: int
    members: set[int]
    pure: bool = False

    def __len__(self) -> int:
        return len(self.members)


class Clustering:
    """A partition of points [0, n) into clusters.

    Cluster ids are never reused within a session: every cluster created
    through :meth:`add_cluster` gets a fresh id from an internal counter.
    """

    def __init__(
        self,
        member_sets: Iterable[Iterable[int]],
        n: int | None = None,
        pure: bool | Iterable[bool] = False,
    ):
        sets = [set(m) for m in member_sets]
        if isinstance(pure, bool):
            flags = [pure] * len(sets)
        else:
            flags = list(pure)
            if len(flags) != len(sets):
                raise DomainError("pure flags do not match cluster count")
        points: set[int] = set()
        for m in sets:
            if not m:
                raise DomainError("empty cluster in clustering")
            if points & m:
                raise DomainError("clusters are not disjoint")
            points |= m
        if n is None:
            n = len(points)
        if points != set(range(n)):
            raise DomainError(f"clusters must partition [0, {n})")
        self._n = n
        self._clusters: dict[int, Cluster] = {}
        self._index: list[int] = [-1] * n
        self._next_id = 0
        for m, flag in zip(sets, flags):
            self.add_cluster(m, pure=flag)

    @classmethod
    def from_labels(cls, labels: Iterable[int], pure: bool = False) -> "Clustering":
        """Group points by label value; label order of first appearance fixes cluster order."""
        groups: dict[int, set[int]] = {}
        for point, lab in enumerate(labels):
            groups.setdefault(lab, set()).add(point)
        return cls(groups.values(), pure=pure)

    # -- read API ----------------------------------------------------------

    @property
    def n(self) -> int:
        return self._n

    def __len__(self) -> int:
        return len(self._clusters)

    def __contains__(self, cid: int) -> bool:
        return cid in self._clusters

    def __iter__(self) -> Iterator[Cluster]:
        return iter(sorted(self._clusters.values(), key=lambda c: c.id))

    def cluster(self, cid: int) -> Cluster:
        try:
            return self._clusters[cid]
        except KeyError:
            raise DomainError(f"unknown cluster id {cid}") from None

    def cluster_ids(self) -> list[int]:
        return sorted(self._clusters)

    def cluster_of(self, point: int) -> int:
        if not 0 <= point < self._n:
            raise DomainError(f"point {point} outside universe [0, {self._n})")
        return self._index[point]

    def assignments(self) -> list[int]:
        """Point -> cluster id, as a dense list."""
        return list(self._index)

    def member_sets(self) -> list[frozenset[int]]:
        return [frozenset(c.members) for c in self]

    def canonical(self) -> frozenset[frozenset[int]]:
        """Id- and purity-blind representation, for partition equality."""
        return frozenset(frozenset(c.members) for c in self._clusters.values())

    def same_partition(self, other: "Clustering") -> bool:
        return self._n == other._n and self.canonical() == other.canonical()

    def copy(self) -> "Clustering":
        out = Clustering.__new__(Clustering)
        out._n = self._n
        out._clusters = {c.id: Cluster(c.id, set(c.members), c.pure) for c in self._clusters.values()}
        out._index = list(self._index)
        out._next_id = self._next_id
        return out

    def validate(self) -> None:
        """Assert the partition invariant; used by tests and replay checks."""
        seen: set[int] = set()
        for c in self._clusters.values():
            if not c.members:
                raise AssertionError(f"cluster {c.id} is empty")
            if seen & c.members:
                raise AssertionError("clusters overlap")
            seen |= c.members
            for p in c.members:
                if self._index[p] != c.id:
                    raise AssertionError(f"index out of sync at point {p}")
        if seen != set(range(self._n)):
            raise AssertionError("clusters do not cover the universe")

    # -- mutation API (edits module only) -----------------------------------

    def add_cluster(self, members: Iterable[int], pure: bool = False) -> Cluster:
        m = set(members)
        if not m:
            raise DomainError("cannot add an empty cluster")
        cid = self._next_id
        self._next_id += 1
        cluster = Cluster(cid, m, pure)
        self._clusters[cid] = cluster
        for p in m:
            self._index[p] = cid
        return cluster

    def remove_cluster(self, cid: int) -> None:
        self._clusters.pop(cid)

    def remove_points(self, cid: int, points: Iterable[int]) -> None:
        """Shrink a cluster in place; the caller deletes it if emptied."""
        self._clusters[cid].members -= set(points)

    def add_points(self, cid: int, points: Iterable[int]) -> None:
        pts = set(points)
        self._clusters[cid].members |= pts
        for p in pts:
            self._index[p] = cid

    def upsert_cluster(self, cid: int, members: Iterable[int], pure: bool) -> None:
        """Create or overwrite a cluster under a fixed id (log replay only)."""
        m = set(members)
        if not m:
            raise DomainError("cannot upsert an empty cluster")
        self._clusters[cid] = Cluster(cid, m, pure)
        for p in m:
            self._index[p] = cid
        self._next_id = max(self._next_id, cid + 1)


# ---------------------------------------------------------------------------
# Edit requests and model configuration
# ---------------------------------------------------------------------------


class Model(str, Enum):
    ETA_MERGE = "eta"
    ETA_MERGE_CC = "cc"
    UNRESTRICTED = "unrestricted"


class TreeMode(str, Enum):
    GLOBAL = "global"
    LOCAL = "local"
    THRESHOLD_GRAPH = "threshold"
    ROBUST_GLOBAL = "robust"


@dataclass(frozen=True)
class EditRequest:
    kind: str  # "split" | "merge"
    i: int
    j: int | None = None

    def __post_init__(self):
        if self.kind not in ("split", "merge"):
            raise DomainError(f"unknown edit kind {self.kind!r}")
        if self.kind == "merge":
            if self.j is None or self.j == self.i:
                raise DomainError("merge needs two distinct cluster ids")
        elif self.j is not None:
            raise DomainError("split takes a single cluster id")

    @classmethod
    def split(cls, cid: int) -> "EditRequest":
        return cls("split", cid)

    @classmethod
    def merge(cls, i: int, j: int) -> "EditRequest":
        return cls("merge", min(i, j), max(i, j))

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "i": self.i}
        if self.j is not None:
            d["j"] = self.j
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "EditRequest":
        return cls(d["kind"], d["i"], d.get("j"))


@dataclass(frozen=True)
class ModelConfig:
    model: Model = Model.ETA_MERGE
    eta: float = 0.7
    tree_mode: TreeMode = TreeMode.GLOBAL
    min_blob: int = 3  # robust-tree blob size; ignored by other tree modes

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise DomainError(f"eta must lie in (0, 1], got {self.eta}")
        if self.min_blob < 1:
            raise DomainError("min_blob must be >= 1")

    def validity_warnings(self) -> list[str]:
        """Structured warnings when eta sits below the proven guarantee range.

        Runs are allowed to proceed regardless; the warnings travel with the
        run metadata instead.
        """
        warnings = []
        if self.model is Model.ETA_MERGE:
            if self.tree_mode is TreeMode.THRESHOLD_GRAPH:
                pass  # guaranteed for any eta > 0
            elif self.eta <= 0.5:
                warnings.append(f"eta={self.eta} <= 0.5: merge guarantee does not apply")
        elif self.model is Model.ETA_MERGE_CC and self.eta <= 2 / 3:
            warnings.append(f"eta={self.eta} <= 2/3: cc-merge guarantee does not apply")
        return warnings

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "eta": self.eta,
            "tree_mode": self.tree_mode.value,
            "min_blob": self.min_blob,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(
            model=Model(d.get("model", "eta")),
            eta=float(d.get("eta", 0.7)),
            tree_mode=TreeMode(d.get("tree_mode", "global")),
            min_blob=int(d.get("min_blob", 3)),
        )


# ---------------------------------------------------------------------------
# Distances and error reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ErrorReport:
    delta_u: int
    delta_o: int
    delta: int
    delta_cco: int
    delta_ccu: int
    delta_cc: int

    def __post_init__(self):
        if self.delta != self.delta_u + self.delta_o:
            raise DomainError("delta must equal delta_u + delta_o")
        if self.delta_cc != self.delta_cco + self.delta_ccu:
            raise DomainError("delta_cc must equal delta_cco + delta_ccu")

    @classmethod
    def build(cls, delta_u: int, delta_o: int, delta_cco: int, delta_ccu: int) -> "ErrorReport":
        return cls(delta_u, delta_o, delta_u + delta_o, delta_cco, delta_ccu, delta_cco + delta_ccu)

    @property
    def zero(self) -> bool:
        return self.delta == 0 and self.delta_cc == 0

    def to_dict(self) -> dict:
        return {
            "delta_u": self.delta_u,
            "delta_o": self.delta_o,
            "delta": self.delta,
            "delta_cco": self.delta_cco,
            "delta_ccu": self.delta_ccu,
            "delta_cc": self.delta_cc,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ErrorReport":
        return cls(*(int(d[k]) for k in ("delta_u", "delta_o", "delta", "delta_cco", "delta_ccu", "delta_cc")))


def _require_same_universe(a: Clustering, b: Clustering) -> None:
    if a.n != b.n:
        raise DomainError(f"point universes differ: {a.n} vs {b.n}")


def cluster_distance(members: Iterable[int], target: Clustering) -> int:
    """Number of *additional* target clusters containing points of `members`.

    0 when the whole set sits inside one target cluster.
    """
    seen: set[int] = set()
    count = 0
    for p in members:
        cid = target.cluster_of(p)
        seen.add(cid)
        count += 1
    if count == 0:
        raise DomainError("cluster_distance of an empty set")
    return len(seen) - 1


def error_report(proposed: Clustering, target: Clustering) -> ErrorReport:
    """All six error fields for a (proposed, target) pair.

    delta_u / delta_o are the two directed distances; delta_cco / delta_ccu
    count *ordered* point pairs co-clustered in exactly one of the two
    partitions, so both are even.
    """
    _require_same_universe(proposed, target)
    p_idx = proposed.assignments()
    t_idx = target.assignments()
    inter: Counter[tuple[int, int]] = Counter(zip(p_idx, t_idx))

    p_partners: dict[int, set[int]] = {}
    t_partners: dict[int, set[int]] = {}
    p_sizes: Counter[int] = Counter()
    t_sizes: Counter[int] = Counter()
    same_both = 0
    for (pi, ti), c in inter.items():
        p_partners.setdefault(pi, set()).add(ti)
        t_partners.setdefault(ti, set()).add(pi)
        p_sizes[pi] += c
        t_sizes[ti] += c
        same_both += c * (c - 1)

    delta_o = sum(len(v) - 1 for v in p_partners.values())
    delta_u = sum(len(v) - 1 for v in t_partners.values())
    same_p = sum(s * (s - 1) for s in p_sizes.values())
    same_t = sum(s * (s - 1) for s in t_sizes.values())
    return ErrorReport.build(delta_u, delta_o, same_p - same_both, same_t - same_both)


# ---------------------------------------------------------------------------
# Structural checks on (target, similarity) pairs
# ---------------------------------------------------------------------------


def check_stability(target: Clustering, s: SimilarityMatrix) -> list[tuple]:
    """Violations of average-linkage stability over a testable subfamily.

    Checked subsets: A = {x} and A = C_i \\ {x} for every cluster C_i and
    x in C_i, against every single foreign point A' = {y}.  Sound for
    reporting violations; the full check over all subsets is exponential.
    Returns tuples (kind, cluster_id, x, y, within_avg, across_avg).
    """
    if target.n != s.n:
        raise DomainError("similarity matrix and clustering disagree on n")
    sims = s.values
    violations: list[tuple] = []
    for c in target:
        if len(c) < 2:
            continue
        idx = np.asarray(sorted(c.members), dtype=np.intp)
        outside = np.asarray(sorted(set(range(target.n)) - c.members), dtype=np.intp)
        if outside.size == 0:
            continue
        block = sims[np.ix_(idx, idx)]
        within_avg = (block.sum(axis=1) - np.diag(block)) / (len(c) - 1)
        cross = sims[np.ix_(idx, outside)]
        # A = {x}: mean similarity to the rest of C_i must beat every single outsider
        for a, x in enumerate(idx):
            bad = np.nonzero(cross[a] >= within_avg[a])[0]
            for b in bad:
                violations.append(("singleton", c.id, int(x), int(outside[b]), float(within_avg[a]), float(cross[a, b])))
        # A = C_i \ {x}: S(A, {x}) is the same within average; S(A, {y}) is the
        # mean of y's similarities into C_i with x excluded
        col_into = cross.sum(axis=0)  # per outsider y: sum of sims into C_i
        for a, x in enumerate(idx):
            across = (col_into - cross[a]) / (len(c) - 1)
            bad = np.nonzero(across >= within_avg[a])[0]
            for b in bad:
                violations.append(("complement", c.id, int(x), int(outside[b]), float(within_avg[a]), float(across[b])))
    return violations


def check_strict_separation(target: Clustering, s: SimilarityMatrix) -> list[tuple[int, int, int]]:
    """Exhaustive strict-separation check; returns violating triples (x, y, z).

    A violation is S(x, y) <= S(x, z) with y in x's cluster and z outside.
    """
    if target.n != s.n:
        raise DomainError("similarity matrix and clustering disagree on n")
    sims = s.values
    labels = np.asarray(target.assignments())
    violations: list[tuple[int, int, int]] = []
    for x in range(target.n):
        same = np.nonzero((labels == labels[x]) & (np.arange(target.n) != x))[0]
        other = np.nonzero(labels != labels[x])[0]
        if same.size == 0 or other.size == 0:
            continue
        row = sims[x]
        worst_same = same[np.argmin(row[same])]
        best_other = other[np.argmax(row[other])]
        if row[worst_same] <= row[best_other]:
            violations.append((x, int(worst_same), int(best_other)))
    return violations


def check_strict_threshold(target: Clustering, s: SimilarityMatrix) -> float | None:
    """A threshold t with every within-pair > t >= every across-pair, or None."""
    if target.n != s.n:
        raise DomainError("similarity matrix and clustering disagree on n")
    sims = s.values
    labels = np.asarray(target.assignments())
    same = labels[:, None] == labels[None, :]
    off = ~np.eye(target.n, dtype=bool)
    within = sims[same & off]
    across = sims[~same]
    if within.size == 0 and across.size == 0:
        return 0.0  # single point: vacuously separated
    if across.size == 0:
        return float(within.min()) - 1.0
    if within.size == 0:
        return float(across.max())
    lo, hi = float(across.max()), float(within.min())
    if hi <= lo:
        return None
    return (lo + hi) / 2.0


# ---------------------------------------------------------------------------
# Oracle feasibility
# ---------------------------------------------------------------------------


def target_profile(cluster: Cluster, target: Clustering) -> Counter:
    """Target cluster id -> number of `cluster`'s points inside it."""
    return Counter(target.cluster_of(p) for p in cluster.members)


def feasible_splits(proposed: Clustering, target: Clustering) -> list[int]:
    """Ids of proposed clusters intersecting two or more target clusters."""
    _require_same_universe(proposed, target)
    return [c.id for c in proposed if len(target_profile(c, target)) >= 2]


def feasible_merges(
    proposed: Clustering, target: Clustering, model: Model, eta: float = 1.0
) -> list[tuple[int, int]]:
    """Cluster-id pairs the oracle may ask to merge under the given model.

    Eta models need one shared target cluster holding at least an
    eta-fraction of each cluster; the unrestricted model needs one shared
    target cluster with at least one point from each.
    """
    _require_same_universe(proposed, target)
    buckets: dict[int, list[int]] = {}
    for c in proposed:
        profile = target_profile(c, target)
        if model is Model.UNRESTRICTED:
            qualifying = profile.keys()
        else:
            qualifying = [t for t, cnt in profile.items() if cnt >= eta * len(c)]
        for t in qualifying:
            buckets.setdefault(t, []).append(c.id)
    pairs: set[tuple[int, int]] = set()
    for ids in buckets.values():
        ids.sort()
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                pairs.add((ids[a], ids[b]))
    return sorted(pairs)
