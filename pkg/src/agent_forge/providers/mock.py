"""Deterministic offline backends.

``MockBackend`` answers every chat role the pipeline uses by dispatching on
``request.metadata["task"]``. Outputs depend only on the request content and
the backend seed, never on call order or process state, so repeated runs are
byte-identical. The annotator reads the accessibility tree passed in the
metadata; the generator composes instructions in the sim clause grammar so
that generated tasks can be grounded and verified.
"""

import hashlib
import json
import random
import re
from collections import deque
from threading import Lock

from ..exceptions import ProviderError
from ..sim.goals import ask_clause, open_clause, set_clause, toggle_clause
from ..sim.spec import LEXICON

REWRITE_TAG = "[rewritten]"

_OPENS = re.compile(r"this button opens the '([^']+)' screen")
_TOGGLE = re.compile(r"this toggle switches '([^']+)' on or off \(currently (on|off)\)")
_INPUT = re.compile(r"this text field edits '([^']+)' \(currently '([^']*)'\)")
_CLAUSE_SPLIT = re.compile(r",|;|\band\b|\bthen\b")
_APP_PREFIX = re.compile(r"^\s*in [^,]+,\s*", re.IGNORECASE)


def stable_seed(*parts):
    blob = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "big")


def describe_element(app_name, screen_title, node):
    """Functionality description the mock annotator emits for one a11y node."""
    where = f"In {app_name} > {screen_title}"
    kind = node["kind"]
    label = node["label"]
    if not node["interactable"]:
        return "data", f"{where}, this text shows '{label}'."
    if kind == "nav":
        title = re.sub(r"^(Up to|Go to) ", "", label)
        return "functionality", f"{where}, this button opens the '{title}' screen."
    if kind == "toggle":
        state = "on" if node.get("value") else "off"
        return "functionality", f"{where}, this toggle switches '{label}' on or off (currently {state})."
    if kind == "input":
        return "functionality", (
            f"{where}, this text field edits '{label}' (currently '{node.get('value') or ''}')."
        )
    if kind == "back":
        return "functionality", f"{where}, this '{label}' button returns to the previous screen."
    return "functionality", f"{where}, the '{label}' button shows more information."


class MockBackend:
    """Offline stand-in for every chat role."""

    def __init__(self, seed=0):
        self.seed = seed

    def chat_generate(self, request):
        task = request.task
        handler = getattr(self, f"_do_{task}", None)
        if handler is None:
            raise ProviderError(f"mock backend cannot handle task {task!r}")
        return handler(request)

    def _rng(self, request):
        return random.Random(stable_seed(self.seed, request.seed, request.digest()))

    # annotator ---------------------------------------------------------
    def _do_annotate(self, request):
        meta = request.metadata
        records = []
        for node in meta.get("a11y", []):
            kind, description = describe_element(meta["app_name"], meta.get("screen_title", ""), node)
            records.append({"type": kind, "label": node["label"], "description": description})
        return json.dumps(records, ensure_ascii=False)

    # generator ---------------------------------------------------------
    def _do_synthesize(self, request):
        meta = request.metadata
        rng = self._rng(request)
        app = meta["app_name"]
        clauses = []  # (kind, label, current value)
        seen = set()
        for f in meta.get("functionalities", []):
            desc = f["description"]
            m = _TOGGLE.search(desc)
            if m:
                key = ("t", m.group(1))
                if key not in seen:
                    seen.add(key)
                    clauses.append(("toggle", m.group(1), m.group(2)))
                continue
            m = _INPUT.search(desc)
            if m:
                key = ("i", m.group(1))
                if key not in seen:
                    seen.add(key)
                    clauses.append(("input", m.group(1), m.group(2)))
                continue
            m = _OPENS.search(desc)
            if m:
                key = ("n", m.group(1))
                if key not in seen:
                    seen.add(key)
                    clauses.append(("nav", m.group(1), None))
        if not clauses:
            return "[]"
        tasks = []
        n_tasks = rng.randint(1, 3)
        for t in range(n_tasks):
            if t == 0:
                picked = clauses[:2]
            else:
                picked = rng.sample(clauses, min(len(clauses), rng.randint(1, 3)))
            tasks.append(self._compose(app, picked, rng))
        return json.dumps(tasks, ensure_ascii=False)

    def _compose(self, app, picked, rng):
        if len(picked) == 1 and picked[0][0] == "input" and rng.random() < 0.3:
            label = picked[0][1]
            return {"reasoning": f"Reading '{label}' requires navigating to its settings page.",
                    "task": f"In {app}, {ask_clause(label)}? Answer with the value only."}
        parts = []
        nav = None
        for kind, label, current in picked:
            if kind == "toggle":
                parts.append(toggle_clause(label, current != "on"))
            elif kind == "input":
                choices = [w for w in LEXICON if w != current]
                parts.append(set_clause(label, rng.choice(choices)))
            elif nav is None:
                nav = open_clause(label)
        if nav is not None:
            parts.append(nav)
        if len(parts) == 1:
            body = parts[0]
        else:
            body = ", ".join(parts[:-1]) + " and " + parts[-1]
        labels = ", ".join(f"'{p[1]}'" for p in picked)
        return {"reasoning": f"Combines {labels} into one multi-step goal.",
                "task": f"In {app}, {body}."}

    # quality scorer ----------------------------------------------------
    def _do_score(self, request):
        text = request.metadata["text"]
        rng = random.Random(stable_seed(self.seed, "score", text))
        n_clauses = len(re.findall(r"turn (?:on|off) '|set '|open the '|current value of '", text))
        complexity = max(1, min(5, 1 + n_clauses))
        clarity = 3 if rng.random() < 0.2 else rng.choice((4, 5))
        reasonableness = 3 if rng.random() < 0.15 else rng.choice((4, 5))
        if n_clauses == 0:
            clarity = 2
        return json.dumps({"complexity": complexity, "clarity": clarity,
                           "reasonableness": reasonableness})

    # decomposer --------------------------------------------------------
    def _do_decompose(self, request):
        text = _APP_PREFIX.sub("", request.metadata["text"])
        phrases = []
        for clause in _CLAUSE_SPLIT.split(text):
            clause = clause.strip(" .?!").lower()
            clause = re.sub(r"\s+", " ", clause)
            if clause and clause not in phrases:
                phrases.append(clause)
        return json.dumps(phrases)

    # chain-of-thought rewriter -----------------------------------------
    def _do_rewrite(self, request):
        thought = request.metadata.get("thought", "")
        return f"{REWRITE_TAG} {thought}".rstrip()


class ScriptedBackend:
    """Returns queued responses in order; raises ``error`` instances when queued.

    Useful for exercising parse and failure paths without a network.
    """

    def __init__(self, responses):
        self._queue = deque(responses)
        self._lock = Lock()
        self.requests = []

    def chat_generate(self, request):
        with self._lock:
            self.requests.append(request)
            if not self._queue:
                raise ProviderError("scripted backend exhausted")
            item = self._queue.popleft()
        if isinstance(item, BaseException):
            raise item
        return item
