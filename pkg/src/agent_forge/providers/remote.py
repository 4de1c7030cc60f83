"""OpenAI-compatible HTTP backend for chat completions and embeddings."""

import base64
import io
import logging
import os
import time

import httpx
import numpy as np
from PIL import Image

from ..exceptions import DecodeError, InvariantViolation, TransportError, ValidationError
from .chat import ImagePart, TextPart
from .embedding import check_texts, normalize_rows

logger = logging.getLogger(__name__)

API_KEY_ENV = "AGENT_FORGE_API_KEY"
BASE_URL_ENV = "AGENT_FORGE_BASE_URL"

RETRY_ATTEMPTS = 3
RETRY_BACKOFF_S = 0.5


def image_data_url(pixels):
    buf = io.BytesIO()
    Image.fromarray(np.asarray(pixels, dtype=np.uint8), mode="L").save(buf, format="PNG")
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")


def request_messages(request):
    content = []
    for part in request.user_parts:
        if isinstance(part, TextPart):
            content.append({"type": "text", "text": part.text})
        elif isinstance(part, ImagePart):
            content.append({"type": "image_url", "image_url": {"url": image_data_url(part.pixels)}})
    messages = []
    if request.system_text:
        messages.append({"role": "system", "content": request.system_text})
    messages.append({"role": "user", "content": content})
    return messages


class OpenAICompatibleClient:
    """Minimal JSON-over-HTTP client with bounded retries.

    Transport errors, HTTP 429 and 5xx responses are retried up to
    ``attempts`` times with exponential backoff; other 4xx responses fail
    immediately.
    """

    def __init__(self, base_url=None, api_key=None, timeout=60.0, attempts=RETRY_ATTEMPTS,
                 backoff=RETRY_BACKOFF_S, transport=None, sleep=time.sleep):
        base_url = base_url or os.environ.get(BASE_URL_ENV)
        if not base_url:
            raise ValidationError(f"no base URL given and ${BASE_URL_ENV} is unset", field="base_url")
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV, "")
        self.attempts = attempts
        self.backoff = backoff
        self._sleep = sleep
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        self._http = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def post(self, path, payload):
        url = f"{self.base_url}/{path.lstrip('/')}"
        last_error = None
        for attempt in range(self.attempts):
            if attempt:
                self._sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self._http.post(url, json=payload)
            except httpx.HTTPError as exc:
                last_error = TransportError(f"POST {url} failed: {exc}")
                logger.warning("attempt %d/%d: %s", attempt + 1, self.attempts, last_error)
                continue
            status = response.status_code
            if status == 429 or status >= 500:
                last_error = TransportError(f"POST {url} returned HTTP {status}", status_code=status)
                logger.warning("attempt %d/%d: %s", attempt + 1, self.attempts, last_error)
                continue
            if status >= 400:
                raise TransportError(
                    f"POST {url} returned HTTP {status}: {response.text[:200]}",
                    status_code=status, retriable=False,
                )
            try:
                return response.json()
            except ValueError as exc:
                raise DecodeError(f"response from {url} is not JSON", raw=response.text) from exc
        raise last_error

    def close(self):
        self._http.close()


class RemoteChat:
    """Chat-completions backend for one model name."""

    def __init__(self, client, model, temperature=None, max_tokens=None):
        self.client = client
        self.model = model
        self.temperature = temperature
        self.max_tokens = max_tokens

    def chat_generate(self, request):
        payload = {
            "model": self.model,
            "messages": request_messages(request),
            "temperature": request.temperature if self.temperature is None else self.temperature,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        if self.max_tokens:
            payload["max_tokens"] = self.max_tokens
        body = self.client.post("chat/completions", payload)
        try:
            content = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise DecodeError("malformed chat completion response", raw=body) from exc
        if isinstance(content, list):  # some servers return content parts
            content = "".join(p.get("text", "") for p in content if isinstance(p, dict))
        if not isinstance(content, str):
            raise DecodeError("chat completion content is not text", raw=body)
        return content


class RemoteEmbedder:
    """Embeddings backend; vectors are L2-normalised client-side."""

    def __init__(self, client, model, batch_size=256):
        self.client = client
        self.model = model
        self.batch_size = batch_size
        self.dim = None

    def embed_texts(self, texts):
        texts = check_texts(texts)
        rows = []
        for start in range(0, len(texts), self.batch_size):
            batch = texts[start : start + self.batch_size]
            body = self.client.post("embeddings", {"model": self.model, "input": batch})
            try:
                data = sorted(body["data"], key=lambda d: d.get("index", 0))
                vectors = [d["embedding"] for d in data]
            except (KeyError, TypeError) as exc:
                raise DecodeError("malformed embeddings response", raw=body) from exc
            if len(vectors) != len(batch):
                raise DecodeError(
                    f"expected {len(batch)} embeddings, got {len(vectors)}", raw=body
                )
            rows.extend(vectors)
        dims = {len(v) for v in rows}
        if len(dims) != 1:
            raise InvariantViolation(f"embedding dimensions differ within a batch: {sorted(dims)}")
        (dim,) = dims
        if self.dim is None:
            self.dim = dim
        elif self.dim != dim:
            raise InvariantViolation(f"backend dimension changed from {self.dim} to {dim}")
        return normalize_rows(np.asarray(rows, dtype=np.float64))
