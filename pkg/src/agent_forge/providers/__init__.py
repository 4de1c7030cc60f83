"""Model providers: embeddings, chat generation, annotation parsing, mocks."""

from .annotations import AnnotationRecord, parse_annotations, serialize_annotations
from .bundle import ProviderBundle
from .chat import GenerationRequest, ImagePart, TextPart
from .embedding import HashingEmbedder, fnv1a_64, tokenize
from .mock import MockBackend, ScriptedBackend
from .remote import OpenAICompatibleClient, RemoteChat, RemoteEmbedder


def embed_texts(embedder, texts):
    return embedder.embed_texts(texts)


def chat_generate(backend, request):
    return backend.chat_generate(request)


__all__ = [
    "AnnotationRecord", "GenerationRequest", "HashingEmbedder", "ImagePart", "MockBackend",
    "OpenAICompatibleClient", "ProviderBundle", "RemoteChat", "RemoteEmbedder",
    "ScriptedBackend", "TextPart", "chat_generate", "embed_texts", "fnv1a_64",
    "parse_annotations", "serialize_annotations", "tokenize",
]
