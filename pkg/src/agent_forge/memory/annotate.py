"""Functionality annotation of unique screens."""

import logging
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .. import prompts
from ..exceptions import AnnotationParseError, ProviderError
from ..providers.annotations import parse_annotations
from ..providers.chat import GenerationRequest, ImagePart, TextPart

logger = logging.getLogger(__name__)


@dataclass
class Functionality:
    id: int
    screen_id: int
    kind: str
    label: str
    description: str
    embedding: Optional[Any] = field(default=None, repr=False, compare=False)
    indexed: bool = False

    def to_json(self):
        return {"id": self.id, "screen_id": self.screen_id, "kind": self.kind, "label": self.label,
                "description": self.description, "indexed": self.indexed}


def find_predecessor(node, mapping, trajectories):
    """First transition (campaign order) entering ``node`` from another node."""
    for traj in trajectories:
        for rec in traj.transitions:
            if mapping[rec.after.key] == node.node_id and mapping[rec.before.key] != node.node_id:
                return rec.before, rec.action
    return None


def mark_action_area(obs, action):
    """Copy of ``obs.render`` with the acted-on element outlined in black."""
    grid = np.array(obs.render, copy=True)
    node = obs.node(action.element_id) if action.element_id is not None else None
    if node is None or node.bbox == (0, 0, 0, 0):
        return grid
    x0, y0, x1, y1 = node.bbox
    x1 = min(x1, grid.shape[1]) - 1
    y1 = min(y1, grid.shape[0] - 1)
    grid[y0, x0 : x1 + 1] = 0
    grid[y1, x0 : x1 + 1] = 0
    grid[y0 : y1 + 1, x0] = 0
    grid[y0 : y1 + 1, x1] = 0
    return grid


def annotation_request(node, predecessor, app_name):
    after = node.representative
    parts = []
    if predecessor is not None:
        before, action = predecessor
        parts.append(ImagePart(f"{before.key}#marked", mark_action_area(before, action)))
        parts.append(ImagePart(after.key, after.render))
        parts.append(TextPart(prompts.ANNOTATION_USER.format(app_name=app_name, action_type=str(action))))
    else:
        parts.append(ImagePart(after.key, after.render))
        parts.append(TextPart(prompts.ANNOTATION_USER_NO_CONTEXT.format(app_name=app_name)))
    metadata = {
        "task": "annotate",
        "app_name": app_name,
        "screen_title": after.title,
        "a11y": [n.to_json() for n in after.a11y],
    }
    return GenerationRequest(prompts.ANNOTATION_SYSTEM, tuple(parts), 0.0, None, metadata)


def annotate_screen(node, predecessor, app_name, annotator, first_id=0):
    """Ask the annotator for the functionalities of ``node``'s representative.

    A response without a parseable list, or a provider failure, leaves the
    node with no functionalities and ``flagged=True``; the campaign goes on.
    """
    request = annotation_request(node, predecessor, app_name)
    try:
        records = parse_annotations(annotator.chat_generate(request))
    except (AnnotationParseError, ProviderError) as exc:
        logger.warning("screen %d of %s skipped: %s", node.node_id, app_name, exc)
        node.flagged = True
        node.functionalities = []
        return []
    out = [Functionality(first_id + i, node.node_id, r.kind, r.label, r.description)
           for i, r in enumerate(records)]
    node.functionalities = out
    return out
