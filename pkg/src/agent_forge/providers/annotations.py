"""Screen annotation records and the tolerant parser for annotator output."""

import json
import logging
from dataclasses import dataclass

from ..exceptions import AnnotationParseError, ValidationError
from .chat import parse_json_list

logger = logging.getLogger(__name__)

KINDS = ("functionality", "data")


@dataclass(frozen=True)
class AnnotationRecord:
    kind: str
    label: str
    description: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}", field="kind")
        if not self.label or not self.description:
            raise ValidationError("label and description must be non-empty")

    def to_json(self):
        return {"type": self.kind, "label": self.label, "description": self.description}


def serialize_annotations(records):
    return json.dumps([r.to_json() for r in records], ensure_ascii=False)


def parse_annotations(raw):
    """Parse annotator output into records.

    Prose around the list is ignored: the outermost ``[...]`` span is decoded.
    Entries that are not valid records are dropped with a warning; a response
    with no decodable list raises :class:`AnnotationParseError`.
    """
    items = parse_json_list(raw)
    if items is None:
        raise AnnotationParseError("no JSON list found in annotator response", raw=raw)
    records = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            logger.warning("annotation entry %d is not an object; skipped", i)
            continue
        try:
            records.append(
                AnnotationRecord(
                    kind=str(item.get("type", "")),
                    label=str(item.get("label", "")),
                    description=str(item.get("description", "")),
                )
            )
        except ValidationError as exc:
            logger.warning("annotation entry %d rejected: %s", i, exc)
    return records
