"""Request types for text generation and the chat-backend protocol."""

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Protocol, Sequence, Union

import numpy as np

from ..exceptions import ValidationError


@dataclass(frozen=True)
class TextPart:
    text: str


@dataclass(frozen=True)
class ImagePart:
    """Reference to a stored render. ``pixels`` is the resolved grayscale grid."""

    ref: str
    pixels: Any = field(default=None, repr=False, compare=False)


Part = Union[TextPart, ImagePart]


@dataclass(frozen=True)
class GenerationRequest:
    """A single chat request.

    ``metadata`` never goes over the wire. It carries structured context
    (task kind, element lists, sim handles) that offline mock backends read
    in place of looking at screenshots.
    """

    system_text: str
    user_parts: Sequence[Part]
    temperature: float = 0.0
    seed: Optional[int] = None
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.user_parts:
            raise ValidationError("at least one user part is required", field="user_parts")
        if self.temperature < 0:
            raise ValidationError("temperature must be non-negative", field="temperature")
        for i, part in enumerate(self.user_parts):
            if isinstance(part, ImagePart):
                if part.pixels is None:
                    raise ValidationError(
                        f"image {part.ref!r} does not resolve to a stored render",
                        field=f"user_parts[{i}]",
                    )
            elif not isinstance(part, TextPart):
                raise ValidationError(f"unknown part type {type(part).__name__}", field=f"user_parts[{i}]")

    @property
    def task(self):
        return self.metadata.get("task")

    def user_text(self):
        return "\n".join(p.text for p in self.user_parts if isinstance(p, TextPart))

    def digest(self):
        """Stable hash of the request content (text, image refs, sampling)."""
        payload = {
            "system": self.system_text,
            "parts": [
                {"text": p.text} if isinstance(p, TextPart) else {"image": p.ref}
                for p in self.user_parts
            ],
            "temperature": self.temperature,
            "seed": self.seed,
        }
        blob = json.dumps(payload, sort_keys=True, ensure_ascii=True).encode()
        return hashlib.sha256(blob).hexdigest()


class ChatBackend(Protocol):
    def chat_generate(self, request: GenerationRequest) -> str: ...


class Embedder(Protocol):
    dim: int

    def embed_texts(self, texts: Sequence[str]) -> np.ndarray: ...


def extract_json_span(raw, opener="[", closer="]"):
    """Return the outermost ``opener ... closer`` span of ``raw`` or None."""
    start = raw.find(opener)
    end = raw.rfind(closer)
    if start == -1 or end == -1 or end < start:
        return None
    return raw[start : end + 1]


def parse_json_list(raw):
    """Parse the outermost bracketed JSON list in ``raw``; None if impossible."""
    if not isinstance(raw, str):
        return None
    span = extract_json_span(raw)
    if span is None:
        return None
    try:
        value = json.loads(span)
    except json.JSONDecodeError:
        return None
    return value if isinstance(value, list) else None


def parse_json_object(raw):
    if not isinstance(raw, str):
        return None
    span = extract_json_span(raw, "{", "}")
    if span is None:
        return None
    try:
        value = json.loads(span)
    except json.JSONDecodeError:
        return None
    return value if isinstance(value, dict) else None
