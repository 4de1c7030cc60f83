"""Prompt assembly and response parsing for instruction generation."""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

from .. import prompts
from ..exceptions import ProviderError, ValidationError
from ..providers.chat import GenerationRequest, ImagePart, TextPart, parse_json_list

logger = logging.getLogger(__name__)

MAX_TASKS_PER_CALL = 3
MAX_INSTRUCTION_CHARS = 600


@dataclass
class CandidateInstruction:
    text: str
    reasoning: str
    source_screen: int
    app_name: str
    embedding: Optional[Any] = field(default=None, repr=False, compare=False)
    scores: Optional[Any] = None

    def __post_init__(self):
        if not isinstance(self.text, str) or not self.text.strip():
            raise ValidationError("instruction text must be non-empty", field="text")
        if len(self.text) > MAX_INSTRUCTION_CHARS:
            raise ValidationError(f"instruction longer than {MAX_INSTRUCTION_CHARS} chars", field="text")


def _functionality_lines(functionalities):
    return "\n".join(f"- [{f.kind}] {f.label}: {f.description}" for f in functionalities) or "- (none)"


def synthesis_request(context, seed=None):
    parts = [ImagePart(context.focal.screen_ref, context.focal.representative.render),
             TextPart("## Recalled screen\nFunctionalities:\n"
                      + _functionality_lines(context.focal.functionalities))]
    for role, node in ([("Previous screen", context.predecessor)] if context.predecessor else []) + \
            [("Reachable screen", n) for n in context.successors]:
        parts.append(ImagePart(node.screen_ref, node.representative.render))
        parts.append(TextPart(f"## Short-term memory: {role}\nFunctionalities:\n"
                              + _functionality_lines(node.functionalities)))
    parts.append(TextPart("## Long-term memory: related functionalities from other screens\n"
                          + _functionality_lines(context.long_term)))
    parts.append(TextPart(f"Current app: {context.app_name}\n\n" + prompts.SYNTHESIS_TASK_FOOTER))
    metadata = {
        "task": "synthesize",
        "app_name": context.app_name,
        "functionalities": [{"label": f.label, "description": f.description}
                            for f in context.functionalities()],
    }
    return GenerationRequest(prompts.SYNTHESIS_SYSTEM, tuple(parts), 0.0,
                             context.seed if seed is None else seed, metadata)


def parse_tasks(raw, context):
    """Turn a generator response into at most three candidates; bad records are skipped."""
    records = parse_json_list(raw)
    if records is None:
        logger.warning("unparseable generator output for %s screen %d", context.app_name,
                       context.focal.node_id)
        return []
    if len(records) > MAX_TASKS_PER_CALL:
        records = records[:MAX_TASKS_PER_CALL]
    out = []
    for rec in records:
        if not isinstance(rec, dict):
            continue
        try:
            out.append(CandidateInstruction(rec.get("task"), str(rec.get("reasoning", "")),
                                            context.focal.node_id, context.app_name))
        except ValidationError as exc:
            logger.warning("dropping generated task: %s", exc)
    return out


def generate_instructions(context, generator, seed=None):
    """Prompt ``generator`` with ``context`` and return 0 to 3 candidates."""
    try:
        raw = generator.chat_generate(synthesis_request(context, seed))
    except ProviderError as exc:
        logger.warning("generator failed for %s screen %d: %s", context.app_name,
                       context.focal.node_id, exc)
        return []
    return parse_tasks(raw, context)
