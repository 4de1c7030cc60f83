"""The five model roles the pipeline talks to, bundled."""

from dataclasses import dataclass
from typing import Any, Mapping

from ..exceptions import ValidationError
from .embedding import HashingEmbedder
from .mock import MockBackend
from .remote import OpenAICompatibleClient, RemoteChat, RemoteEmbedder

ROLES = ("embedder", "generator", "annotator", "monitor", "judge")

DEFAULT_MODELS = {
    "embedder": "text-embedding-3-large",
    "generator": "gemini-3.1-pro-preview",
    "annotator": "gemini-3.1-pro-preview",
    "monitor": "gemini-3.1-pro-preview",
    "judge": "gemini-3.1-pro-preview",
}


@dataclass
class ProviderBundle:
    embedder: Any
    generator: Any
    annotator: Any
    monitor: Any
    judge: Any
    kind: str = "mock"

    @classmethod
    def mock(cls, seed=0, dim=256):
        # distinct seeds per role keep the roles independent of each other
        return cls(
            embedder=HashingEmbedder(dim),
            generator=MockBackend(seed),
            annotator=MockBackend(seed + 1),
            monitor=MockBackend(seed + 2),
            judge=MockBackend(seed + 3),
            kind="mock",
        )

    @classmethod
    def remote(cls, base_url=None, api_key=None, models: Mapping[str, str] = None,
               temperature=None, transport=None):
        models = {**DEFAULT_MODELS, **(models or {})}
        client = OpenAICompatibleClient(base_url, api_key, transport=transport)
        return cls(
            embedder=RemoteEmbedder(client, models["embedder"]),
            generator=RemoteChat(client, models["generator"], temperature),
            annotator=RemoteChat(client, models["annotator"], temperature),
            monitor=RemoteChat(client, models["monitor"], temperature),
            judge=RemoteChat(client, models["judge"], temperature),
            kind="remote",
        )

    @classmethod
    def from_settings(cls, settings):
        """Build from the ``[providers]`` config section."""
        backend = settings.get("backend", "mock")
        if backend == "mock":
            return cls.mock(int(settings.get("seed", 0)), int(settings.get("dim", 256)))
        if backend == "remote":
            return cls.remote(settings.get("base_url"), None, settings.get("models"),
                              settings.get("temperature"))
        raise ValidationError(f"unknown backend {backend!r}", field="providers.backend")
