"""Simulated user: samples feasible split/merge requests against the target.

The oracle knows the hidden target clustering.  Each call enumerates the
edits that are feasible under the configured model and (by default) draws
one uniformly at random; deterministic adversarial policies cover the
worst-case sequences the eta-model guarantees also apply to.

Feasibility is computed from per-cluster target-intersection profiles that
are invalidated incrementally: an edit only touches the clusters named in
the request, so only their profiles are recounted.
"""

from __future__ import annotations

from collections import Counter

import numpy as np

from .core import Clustering, DomainError, EditRequest, Model, ModelConfig
from .edits import EditResult

SPLIT_POLICIES = ("uniform", "splits_first")
ADVERSARIAL_POLICIES = ("largest_merge", "splits_first")


class SimulatedOracle:
    """Stateful oracle for one session; owns its RNG stream."""

    def __init__(
        self,
        target: Clustering,
        cfg: ModelConfig,
        rng: np.random.Generator,
        split_policy: str = "uniform",
    ):
        if split_policy not in SPLIT_POLICIES:
            raise DomainError(f"unknown split policy {split_policy!r}")
        self.target = target
        self.cfg = cfg
        self.rng = rng
        self.split_policy = split_policy
        self._profiles: dict[int, Counter] | None = None

    # -- profile cache -------------------------------------------------------

    def _profile(self, proposed: Clustering, cid: int) -> Counter:
        return Counter(self.target.cluster_of(p) for p in proposed.cluster(cid).members)

    def _ensure_profiles(self, proposed: Clustering) -> dict[int, Counter]:
        if self._profiles is None:
            self._profiles = {c.id: self._profile(proposed, c.id) for c in proposed}
        return self._profiles

    def observe(self, proposed: Clustering, result: EditResult) -> None:
        """Invalidate cached profiles for the clusters the edit touched."""
        if self._profiles is None:
            return
        for cid in result.removed:
            self._profiles.pop(cid, None)
        for a in result.added:
            self._profiles[a.id] = Counter(self.target.cluster_of(p) for p in a.members)

    # -- feasibility ----------------------------------------------------------

    def feasible_edits(self, proposed: Clustering) -> tuple[list[int], list[tuple[int, int]]]:
        profiles = self._ensure_profiles(proposed)
        splits = sorted(cid for cid, prof in profiles.items() if len(prof) >= 2)
        eta = self.cfg.eta
        buckets: dict[int, list[int]] = {}
        for cid, prof in profiles.items():
            size = len(proposed.cluster(cid).members)
            if self.cfg.model is Model.UNRESTRICTED:
                qualifying = prof.keys()
            else:
                qualifying = [t for t, cnt in prof.items() if cnt >= eta * size]
            for t in qualifying:
                buckets.setdefault(t, []).append(cid)
        pairs: set[tuple[int, int]] = set()
        for ids in buckets.values():
            ids.sort()
            for a in range(len(ids)):
                for b in range(a + 1, len(ids)):
                    pairs.add((ids[a], ids[b]))
        return splits, sorted(pairs)

    # -- request sampling -------------------------------------------------------

    def next_request(self, proposed: Clustering) -> EditRequest | None:
        """One feasible request, or None once the target is reached."""
        if proposed.same_partition(self.target):
            return None
        splits, merges = self.feasible_edits(proposed)
        if self.split_policy == "splits_first" and splits:
            return EditRequest.split(splits[int(self.rng.integers(len(splits)))])
        edits = [EditRequest.split(cid) for cid in splits]
        edits += [EditRequest.merge(i, j) for i, j in merges]
        assert edits, "no feasible edit although the target is not reached"
        return edits[int(self.rng.integers(len(edits)))]


def next_request(
    proposed: Clustering,
    target: Clustering,
    cfg: ModelConfig,
    rng: np.random.Generator,
) -> EditRequest | None:
    """Single uniform draw without a persistent oracle."""
    return SimulatedOracle(target, cfg, rng).next_request(proposed)


def adversarial_request(
    proposed: Clustering,
    target: Clustering,
    cfg: ModelConfig,
    policy: str = "largest_merge",
) -> EditRequest | None:
    """Deterministic worst-case-style request, for stress-testing the bounds."""
    if policy not in ADVERSARIAL_POLICIES:
        raise DomainError(f"unknown adversarial policy {policy!r}")
    if proposed.same_partition(target):
        return None
    oracle = SimulatedOracle(target, cfg, np.random.default_rng(0))
    splits, merges = oracle.feasible_edits(proposed)
    if policy == "splits_first":
        if splits:
            return EditRequest.split(splits[0])
        return EditRequest.merge(*merges[0])
    if merges:
        sizes = {c.id: len(c.members) for c in proposed}
        best = max(merges, key=lambda p: (sizes[p[0]] + sizes[p[1]], (-p[0], -p[1])))
        return EditRequest.merge(*best)
    return EditRequest.split(splits[0])
