"""Environment memory: unique screens, their neighbourhoods and functionalities."""

from .annotate import Functionality, annotate_screen, annotation_request, find_predecessor
from .builder import (
    EnvironmentMemory,
    MemoryBuilder,
    build_memories,
    build_memory,
    list_memories,
    load_memory,
    save_memory,
)
from .dedup import DEFAULT_TAU, ScreenDeduplicator, ScreenNode, dedup_screens, greedy_cluster
from .graph import build_neighborhood, directed_edges
from .index import (
    DiversityFilter,
    RetrievalIndex,
    build_index,
    diversity_filter,
    read_matrix,
    retrieve_related,
    write_matrix,
)
from .phash import DHashTransformer, hamming, phash, phash_similarity

__all__ = [
    "DEFAULT_TAU", "DHashTransformer", "DiversityFilter", "EnvironmentMemory", "Functionality",
    "MemoryBuilder", "RetrievalIndex", "ScreenDeduplicator", "ScreenNode", "annotate_screen",
    "annotation_request", "build_index", "build_memories", "build_memory", "build_neighborhood",
    "dedup_screens", "directed_edges", "diversity_filter", "find_predecessor", "greedy_cluster",
    "hamming", "list_memories", "load_memory", "phash", "phash_similarity", "read_matrix",
    "retrieve_related", "save_memory", "write_matrix",
]
