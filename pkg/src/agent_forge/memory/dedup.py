"""Greedy perceptual-hash clustering of observed screens."""

from dataclasses import dataclass, field
from typing import List, Optional, Set

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_threshold
from .phash import phash, phash_similarity

DEFAULT_TAU = 0.95


@dataclass
class ScreenNode:
    node_id: int
    representative: object  # Observation
    phash: int
    members: List[str] = field(default_factory=list)
    neighbors: Set[int] = field(default_factory=set)
    functionalities: list = field(default_factory=list)
    predecessor: Optional[tuple] = None  # (before Observation, ActionCommand)
    flagged: bool = False

    @property
    def screen_ref(self):
        return self.representative.key


def campaign_observations(trajectories):
    """Unique observations in campaign order (trajectory, then step)."""
    seen = set()
    out = []
    for traj in trajectories:
        for obs in traj.observations():
            key = obs.key
            if key not in seen:
                seen.add(key)
                out.append(obs)
    return out


def greedy_cluster(hashes, tau=DEFAULT_TAU):
    """Assign each hash to the first representative within ``tau``, else found a cluster.

    Returns ``(representative_indices, labels)``.
    """
    reps = []
    labels = []
    for i, h in enumerate(hashes):
        for node, r in enumerate(reps):
            if phash_similarity(h, hashes[r]) >= tau:
                labels.append(node)
                break
        else:
            reps.append(i)
            labels.append(len(reps) - 1)
    return reps, labels


def dedup_screens(trajectories, tau=DEFAULT_TAU):
    """Cluster every observation of ``trajectories`` into unique screens.

    Returns ``(nodes, mapping)`` where ``mapping`` sends each observation key
    to its node id. Representatives are the first member of each cluster and
    are never reassigned.
    """
    tau = check_threshold(tau, "tau")
    observations = campaign_observations(trajectories)
    hashes = [phash(o.render) for o in observations]
    reps, labels = greedy_cluster(hashes, tau)
    nodes = [ScreenNode(n, observations[r], hashes[r]) for n, r in enumerate(reps)]
    mapping = {}
    for obs, label in zip(observations, labels):
        nodes[label].members.append(obs.key)
        mapping[obs.key] = label
    return nodes, mapping


class ScreenDeduplicator(ClusterMixin, BaseEstimator):
    """Estimator form of the greedy clustering over render grids or raw hashes.

    After ``fit``, ``labels_`` holds the cluster of each input and
    ``representative_hashes_`` the hash of each cluster's first member.
    ``predict`` assigns new inputs to the first matching cluster, or -1.
    """

    def __init__(self, threshold=DEFAULT_TAU):
        self.threshold = threshold

    @staticmethod
    def _hashes(X):
        return [int(x) if np.ndim(x) == 0 else phash(x) for x in X]

    def fit(self, X, y=None):
        tau = check_threshold(self.threshold, "threshold")
        hashes = self._hashes(X)
        reps, labels = greedy_cluster(hashes, tau)
        self.representative_indices_ = np.array(reps, dtype=int)
        self.representative_hashes_ = [hashes[r] for r in reps]
        self.labels_ = np.array(labels, dtype=int)
        return self

    def predict(self, X):
        check_is_fitted(self, "labels_")
        out = []
        for h in self._hashes(X):
            for node, rep in enumerate(self.representative_hashes_):
                if phash_similarity(h, rep) >= self.threshold:
                    out.append(node)
                    break
            else:
                out.append(-1)
        return np.array(out, dtype=int)
