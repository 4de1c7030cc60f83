"""Per-app candidate synthesis and the instruction store."""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .._validation import check_int
from ..memory.index import DEFAULT_K, read_matrix, write_matrix
from ..providers.mock import stable_seed
from ..store import read_jsonl, write_jsonl
from .context import build_context
from .filtering import TaskInstruction
from .generate import generate_instructions

logger = logging.getLogger(__name__)


def context_seed(seed, app_name, screen_id, round_):
    return stable_seed(seed, app_name, screen_id, round_) % (2**31)


def synthesize_candidates(memory, providers, seed=0, contexts_per_node=1, k=DEFAULT_K, jobs=1):
    """Generate candidates from every screen of ``memory``, ``contexts_per_node`` times each.

    Each round re-draws the context with a fresh seed. Output order is
    (round, screen, task) regardless of ``jobs``.
    """
    contexts_per_node = check_int(contexts_per_node, "contexts_per_node", 1)
    contexts = [build_context(memory, node.node_id, context_seed(seed, memory.app_name, node.node_id, r),
                              providers.embedder, k)
                for r in range(contexts_per_node) for node in memory.nodes]

    def run(ctx):
        return generate_instructions(ctx, providers.generator)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(run, contexts))
    else:
        batches = [run(c) for c in contexts]
    return [c for batch in batches for c in batch]


def instructions_dir(root):
    return Path(root) / "instructions"


def save_instructions(instructions, root):
    """Write ``instructions/{app}.jsonl`` plus one AFIX embedding matrix per app."""
    base = instructions_dir(root)
    by_app = {}
    for ins in instructions:
        by_app.setdefault(ins.app, []).append(ins)
    written = []
    for app, rows in sorted(by_app.items()):
        emb_name = f"{app}.emb.bin"
        if all(r.embedding is not None for r in rows):
            write_matrix(base / emb_name, np.array([r.embedding for r in rows]))
            refs = [f"{emb_name}#{i}" for i in range(len(rows))]
        else:
            refs = [None] * len(rows)
        written.append(write_jsonl(base / f"{app}.jsonl",
                                   [r.to_json(ref) for r, ref in zip(rows, refs)]))
    return written


def load_instructions(root):
    """All stored instructions, apps in alphabetical order."""
    base = instructions_dir(root)
    out = []
    for path in sorted(base.glob("*.jsonl")):
        rows = read_jsonl(path)
        matrix = None
        emb_path = base / f"{path.stem}.emb.bin"
        if emb_path.exists():
            matrix = read_matrix(emb_path)
        for i, row in enumerate(rows):
            out.append(TaskInstruction.from_json(row, matrix[i] if matrix is not None else None))
    return out
