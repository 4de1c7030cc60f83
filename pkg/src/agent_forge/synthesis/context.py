"""Memory views handed to the instruction generator for one focal screen."""

import random
from dataclasses import dataclass, field
from typing import List, Optional

from ..memory.annotate import Functionality
from ..memory.dedup import ScreenNode
from ..memory.index import DEFAULT_K

MAX_SUCCESSORS = 3


@dataclass
class SynthesisContext:
    app_name: str
    focal: ScreenNode
    predecessor: Optional[ScreenNode] = None
    successors: List[ScreenNode] = field(default_factory=list)
    long_term: List[Functionality] = field(default_factory=list)
    seed: int = 0

    @property
    def short_term(self):
        head = [self.predecessor] if self.predecessor is not None else []
        return head + list(self.successors)

    def functionalities(self):
        """Every functionality in the context: focal, then short-term, then long-term."""
        out = list(self.focal.functionalities)
        for node in self.short_term:
            out.extend(node.functionalities)
        out.extend(self.long_term)
        return out


def build_context(memory, screen_id, seed, embedder, k=DEFAULT_K):
    """Assemble focal, short-term and long-term views of ``screen_id``.

    The predecessor is a seeded choice among screens with an observed
    transition into the focal screen; successors are a seeded sample of up
    to three screens it leads to. Long-term memory comes from the retrieval
    index, excluding the focal screen and all of its neighbours.
    """
    focal = memory.nodes[screen_id]
    rng = random.Random(seed)
    inbound = memory.predecessors(screen_id)
    outbound = memory.successors(screen_id)
    predecessor = memory.nodes[rng.choice(inbound)] if inbound else None
    picked = rng.sample(outbound, min(MAX_SUCCESSORS, len(outbound)))
    successors = [memory.nodes[i] for i in picked]
    long_term = memory.related(screen_id, embedder, k)
    return SynthesisContext(memory.app_name, focal, predecessor, successors, long_term, seed)
