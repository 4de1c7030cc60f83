"""Three-stage construction of the per-app environment memory and its store."""

import logging
import os
import shutil
import tempfile
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .._validation import check_threshold
from ..exceptions import ValidationError
from ..providers.embedding import embed_one
from ..sim.env import ActionCommand
from ..store import ObservationStore, read_jsonl, write_jsonl
from .annotate import Functionality, annotate_screen, find_predecessor
from .dedup import DEFAULT_TAU, ScreenNode, dedup_screens
from .graph import build_neighborhood, directed_edges
from .index import (
    DEFAULT_DIVERSITY,
    DEFAULT_K,
    RetrievalIndex,
    build_index,
    read_matrix,
    retrieve_related,
    to_f32,
    write_matrix,
)

logger = logging.getLogger(__name__)


@dataclass
class EnvironmentMemory:
    app_name: str
    nodes: list
    index: RetrievalIndex
    edges: Counter = field(default_factory=Counter)  # directed (src, dst) -> count
    diversity_threshold: float = DEFAULT_DIVERSITY

    @property
    def functionalities(self):
        return [f for n in self.nodes for f in n.functionalities]

    def functionality(self, fid):
        return self._by_id()[fid]

    def _by_id(self):
        cache = self.__dict__.get("_fid_cache")
        if cache is None or len(cache) != sum(len(n.functionalities) for n in self.nodes):
            cache = {f.id: f for f in self.functionalities}
            self.__dict__["_fid_cache"] = cache
        return cache

    def predecessors(self, node_id):
        return sorted(a for (a, b) in self.edges if b == node_id)

    def successors(self, node_id):
        return sorted(b for (a, b) in self.edges if a == node_id)

    def query_vector(self, node_id, embedder):
        """Renormalised mean of the node's functionality embeddings.

        Nodes without functionalities (or whose mean vanishes) fall back to the
        embedding of the app name.
        """
        vecs = [f.embedding for f in self.nodes[node_id].functionalities if f.embedding is not None]
        if vecs:
            mean = np.mean(vecs, axis=0)
            norm = np.linalg.norm(mean)
            if norm > 0:
                return mean / norm
        return embed_one(embedder, self.app_name)

    def related(self, node_id, embedder, k=DEFAULT_K):
        """Long-term memory for ``node_id``: related functionalities from distant screens."""
        exclude = {node_id} | set(self.nodes[node_id].neighbors)
        ids = retrieve_related(self.index, self.query_vector(node_id, embedder), k, exclude,
                               self.diversity_threshold)
        return [self.functionality(i) for i in ids]


def _split_by_app(trajectories):
    groups = {}
    for t in trajectories:
        groups.setdefault(t.app_name, []).append(t)
    return groups


def build_memory(trajectories, providers, tau=DEFAULT_TAU, diversity_threshold=DEFAULT_DIVERSITY,
                 jobs=1):
    """Build the environment memory of one app from its exploration trajectories.

    Stage 1 clusters screens by perceptual hash, stage 2 links neighbours and
    annotates every unique screen (in parallel when ``jobs > 1``), stage 3
    embeds all functionalities and builds the diverse retrieval index.
    """
    trajectories = list(trajectories)
    if not trajectories:
        raise ValidationError("at least one trajectory is required", field="trajectories")
    apps = {t.app_name for t in trajectories}
    if len(apps) != 1:
        raise ValidationError(f"trajectories span several apps: {sorted(apps)}", field="trajectories")
    (app_name,) = apps
    tau = check_threshold(tau, "tau")
    diversity_threshold = check_threshold(diversity_threshold, "diversity_threshold")

    nodes, mapping = dedup_screens(trajectories, tau)

    build_neighborhood(nodes, mapping, trajectories)
    edges = directed_edges(mapping, trajectories)
    for node in nodes:
        node.predecessor = find_predecessor(node, mapping, trajectories)

    def annotate(node):
        return annotate_screen(node, node.predecessor, app_name, providers.annotator)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(annotate, nodes))
    else:
        for node in nodes:
            annotate(node)
    next_id = 0
    for node in nodes:  # dense ids in (screen, record) order
        for f in node.functionalities:
            f.id = next_id
            next_id += 1

    index = build_index([f for n in nodes for f in n.functionalities], providers.embedder,
                        diversity_threshold)
    return EnvironmentMemory(app_name, nodes, index, edges, diversity_threshold)


def build_memories(trajectories, providers, tau=DEFAULT_TAU, diversity_threshold=DEFAULT_DIVERSITY,
                   jobs=1):
    """One memory per app, keyed by app name (apps in first-seen order)."""
    return {app: build_memory(group, providers, tau, diversity_threshold, jobs)
            for app, group in _split_by_app(trajectories).items()}


class MemoryBuilder(BaseEstimator):
    """Estimator wrapper: ``fit(trajectories)`` builds ``memories_`` for every app."""

    def __init__(self, providers=None, tau=DEFAULT_TAU, diversity_threshold=DEFAULT_DIVERSITY, jobs=1):
        self.providers = providers
        self.tau = tau
        self.diversity_threshold = diversity_threshold
        self.jobs = jobs

    def fit(self, X, y=None):
        if self.providers is None:
            raise ValidationError("providers must be set before fit", field="providers")
        self.memories_ = build_memories(X, self.providers, self.tau, self.diversity_threshold, self.jobs)
        return self

    def transform(self, X):
        check_is_fitted(self, "memories_")
        return [self.memories_[t.app_name] for t in X]


# --- persistence -------------------------------------------------------------

def memory_dir(root, app_name):
    return Path(root) / "memory" / app_name


def save_memory(memory, root):
    """Write the store for one app atomically (staged in a temp dir, then swapped in)."""
    store = ObservationStore(root)
    final = memory_dir(root, memory.app_name)
    final.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(dir=final.parent, prefix=f".{memory.app_name}."))
    try:
        node_rows = []
        for n in memory.nodes:
            row = {"id": n.node_id, "representative": store.put(n.representative),
                   "members": list(n.members), "phash": f"{n.phash:016x}",
                   "neighbors": sorted(n.neighbors), "flagged": n.flagged, "predecessor": None}
            if n.predecessor is not None:
                before, action = n.predecessor
                row["predecessor"] = {"before": store.put(before), "action": action.to_json()}
            node_rows.append(row)
        write_jsonl(staging / "nodes.jsonl", node_rows)
        write_jsonl(staging / "edges.jsonl",
                    [{"src": a, "dst": b, "count": c} for (a, b), c in sorted(memory.edges.items())])
        funcs = sorted(memory.functionalities, key=lambda f: f.id)
        write_jsonl(staging / "functionalities.jsonl", [f.to_json() for f in funcs])
        dim = memory.index.dim
        emb = np.array([f.embedding for f in funcs]) if funcs else np.zeros((0, dim))
        write_matrix(staging / "embeddings.bin", emb)
        write_matrix(staging / "index.bin", memory.index.vectors.reshape(len(memory.index), dim))
        write_jsonl(staging / "meta.jsonl", [{"app": memory.app_name,
                                              "diversity_threshold": memory.diversity_threshold}])
        if final.exists():
            shutil.rmtree(final)
        os.replace(staging, final)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    return final


def load_memory(root, app_name):
    store = ObservationStore(root)
    base = memory_dir(root, app_name)
    meta = read_jsonl(base / "meta.jsonl")[0]
    nodes = []
    for row in read_jsonl(base / "nodes.jsonl"):
        node = ScreenNode(row["id"], store.get(row["representative"]), int(row["phash"], 16),
                          list(row["members"]), set(row["neighbors"]), [], None, row["flagged"])
        if row["predecessor"]:
            node.predecessor = (store.get(row["predecessor"]["before"]),
                                ActionCommand.from_json(row["predecessor"]["action"]))
        nodes.append(node)
    edges = Counter({(r["src"], r["dst"]): r["count"] for r in read_jsonl(base / "edges.jsonl")})
    embeddings = read_matrix(base / "embeddings.bin")
    indexed = []
    for row, vec in zip(read_jsonl(base / "functionalities.jsonl"), embeddings):
        f = Functionality(row["id"], row["screen_id"], row["kind"], row["label"],
                          row["description"], to_f32(vec), row["indexed"])
        nodes[f.screen_id].functionalities.append(f)
        if f.indexed:
            indexed.append(f)
    vectors = read_matrix(base / "index.bin")
    index = RetrievalIndex(np.array([f.id for f in indexed], dtype=int),
                           np.array([f.screen_id for f in indexed], dtype=int), vectors)
    return EnvironmentMemory(meta["app"], nodes, index, edges, meta["diversity_threshold"])


def list_memories(root):
    base = Path(root) / "memory"
    if not base.exists():
        return []
    return sorted(p.name for p in base.iterdir() if p.is_dir() and not p.name.startswith("."))
