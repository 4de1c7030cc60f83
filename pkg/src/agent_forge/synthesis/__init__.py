"""Memory-augmented instruction synthesis and quality filtering."""

from .context import SynthesisContext, build_context
from .filtering import (
    InstructionFilter,
    QualityScores,
    TaskInstruction,
    filter_instructions,
    parse_scores,
    rank_key,
    score_candidate,
)
from .generate import CandidateInstruction, generate_instructions, parse_tasks, synthesis_request
from .run import load_instructions, save_instructions, synthesize_candidates

__all__ = [
    "CandidateInstruction", "InstructionFilter", "QualityScores", "SynthesisContext",
    "TaskInstruction", "build_context", "filter_instructions", "generate_instructions",
    "load_instructions", "parse_scores", "parse_tasks", "rank_key", "save_instructions",
    "score_candidate", "synthesis_request", "synthesize_candidates",
]
