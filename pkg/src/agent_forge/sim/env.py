"""Environment state, observations, actions and the pure step function."""

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from ..exceptions import InvalidActionError, ValidationError
from .render import DEFAULT_HEIGHT, DEFAULT_WIDTH, render_screen

ACTION_KINDS = ("click", "type", "back", "complete", "answer")
TERMINAL_KINDS = ("complete", "answer")
# tie-break order used by the planner
ACTION_KIND_ORDER = {"click": 0, "type": 1, "back": 2, "complete": 3, "answer": 4}


@dataclass(frozen=True)
class ActionCommand:
    kind: str
    element_id: Optional[int] = None
    text: Optional[str] = None

    def __post_init__(self):
        if self.kind not in ACTION_KINDS:
            raise ValidationError(f"unknown action kind {self.kind!r}", field="kind")
        if self.kind in ("click", "type") and self.element_id is None:
            raise ValidationError(f"{self.kind} needs an element id", field="element_id")
        if self.kind in ("type", "answer") and self.text is None:
            raise ValidationError(f"{self.kind} needs text", field="text")

    @classmethod
    def click(cls, element_id):
        return cls("click", element_id)

    @classmethod
    def type_text(cls, element_id, text):
        return cls("type", element_id, text)

    @classmethod
    def back(cls):
        return cls("back")

    @classmethod
    def complete(cls):
        return cls("complete")

    @classmethod
    def answer(cls, text):
        return cls("answer", None, text)

    @property
    def is_terminal(self):
        return self.kind in TERMINAL_KINDS

    def sort_key(self):
        return (-1 if self.element_id is None else self.element_id, ACTION_KIND_ORDER[self.kind])

    def same_target(self, other):
        """True when both actions have the same kind and target element."""
        return self.kind == other.kind and self.element_id == other.element_id

    def to_json(self):
        out = {"kind": self.kind}
        if self.element_id is not None:
            out["element_id"] = self.element_id
        if self.text is not None:
            out["text"] = self.text
        return out

    @classmethod
    def from_json(cls, d):
        return cls(d["kind"], d.get("element_id"), d.get("text"))

    def __str__(self):
        if self.kind == "click":
            return f"click({self.element_id})"
        if self.kind == "type":
            return f"type({self.element_id}, {self.text!r})"
        if self.kind == "answer":
            return f"answer({self.text!r})"
        return f"{self.kind}()"


@dataclass(frozen=True)
class EnvState:
    current_screen: int
    data: Tuple[Tuple[str, object], ...]
    history_stack: Tuple[int, ...] = ()
    terminated: bool = False

    @property
    def values(self):
        return dict(self.data)

    def with_value(self, name, value):
        data = tuple((k, value if k == name else v) for k, v in self.data)
        return replace(self, data=data)


@dataclass(frozen=True)
class A11yNode:
    element_id: int
    kind: str
    label: str
    interactable: bool
    bbox: Tuple[int, int, int, int]
    value: object = None

    def to_json(self):
        out = {"id": self.element_id, "kind": self.kind, "label": self.label,
               "interactable": self.interactable, "bbox": list(self.bbox)}
        if self.value is not None:
            out["value"] = self.value
        return out

    @classmethod
    def from_json(cls, d):
        return cls(d["id"], d["kind"], d["label"], d["interactable"], tuple(d["bbox"]),
                   d.get("value"))


def _digest(*chunks):
    h = hashlib.sha1()
    for chunk in chunks:
        h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True, eq=False)
class Observation:
    """What an agent sees: a render plus the accessibility tree.

    ``state`` is the simulator state the observation was rendered from; only
    oracle components (planner expert, oracle monitor) read it.
    """

    screen_id: int
    render: np.ndarray = field(repr=False)
    a11y: Tuple[A11yNode, ...]
    state: Optional[EnvState] = field(default=None, repr=False)
    title: str = ""

    @property
    def render_hash(self):
        h, w = self.render.shape
        return _digest(f"{w}x{h}:".encode(), self.render.tobytes())

    @property
    def a11y_digest(self):
        blob = json.dumps([self.title] + [n.to_json() for n in self.a11y], sort_keys=True).encode()
        return _digest(blob)

    @property
    def key(self):
        """Content identity: two observations with equal keys are the same screen state."""
        return _digest(self.render_hash.encode(), self.a11y_digest.encode())

    @property
    def structure_digest(self):
        """Screen-level fingerprint that ignores data values."""
        blob = json.dumps([self.title] + [[n.element_id, n.kind, n.label, n.interactable]
                                          for n in self.a11y]).encode()
        return _digest(blob)

    def interactable_ids(self):
        return [n.element_id for n in self.a11y if n.interactable]

    def node(self, element_id):
        for n in self.a11y:
            if n.element_id == element_id:
                return n
        return None

    def __eq__(self, other):
        return isinstance(other, Observation) and self.key == other.key

    def __hash__(self):
        return hash(self.key)


@dataclass(frozen=True)
class TransitionRecord:
    before: Observation
    action: ActionCommand
    after: Observation
    error: Optional[str] = None


def initial_state(spec):
    return EnvState(0, tuple(spec.data_fields), (), False)


def observe(spec, state, width=DEFAULT_WIDTH, height=DEFAULT_HEIGHT):
    screen = spec.screen(state.current_screen)
    values = state.values
    grid, bboxes = render_screen(screen, values, width, height)
    a11y = tuple(
        A11yNode(e.element_id, e.kind, e.label, e.interactable, bboxes[e.element_id],
                 values.get(e.field) if e.field is not None else None)
        for e in screen.elements
    )
    return Observation(state.current_screen, grid, a11y, state, screen.title)


def reset(spec):
    """Home screen, initial data, empty back stack."""
    return observe(spec, initial_state(spec))


def apply_action(spec, state, action):
    """Return the successor state, raising InvalidActionError for illegal actions."""
    if state.terminated:
        raise InvalidActionError("episode already terminated")
    if action.is_terminal:
        return replace(state, terminated=True)
    if action.kind == "back":
        if not state.history_stack:
            return state
        return replace(state, current_screen=state.history_stack[-1],
                       history_stack=state.history_stack[:-1])
    screen = spec.screen(state.current_screen)
    el = screen.element(action.element_id)
    if el is None or not el.interactable:
        raise InvalidActionError(
            f"element {action.element_id} is not interactable on screen {screen.screen_id}",
            element_id=action.element_id,
        )
    if action.kind == "type":
        if el.kind != "input":
            raise InvalidActionError(
                f"element {el.element_id} ({el.kind}) does not accept text", element_id=el.element_id
            )
        return state.with_value(el.field, action.text)
    # click
    if el.kind == "nav":
        return replace(state, current_screen=el.target,
                       history_stack=state.history_stack + (state.current_screen,))
    if el.kind == "toggle":
        return state.with_value(el.field, not state.values[el.field])
    if el.kind == "back":
        return apply_action(spec, state, ActionCommand.back())
    return state  # input focus or dead button


def step(spec, state, action):
    """Pure transition: ``(state, action) -> (new_state, observation, record)``."""
    before = observe(spec, state)
    new_state = apply_action(spec, state, action)
    after = before if new_state == state else observe(spec, new_state)
    return new_state, after, TransitionRecord(before, action, after)


class SimEnvironment:
    """Stateful adapter around one app spec.

    This is the environment interface the pipeline targets; a device-backed
    adapter would expose the same ``reset``/``step``/``observation`` surface.
    Invalid actions are recorded on the returned transition and leave the
    state untouched.
    """

    def __init__(self, spec):
        self.spec = spec
        self.state = initial_state(spec)
        self._obs = None

    @property
    def app_name(self):
        return self.spec.app_name

    def reset(self):
        self.state = initial_state(self.spec)
        self._obs = observe(self.spec, self.state)
        return self._obs

    @property
    def observation(self):
        if self._obs is None:
            self._obs = observe(self.spec, self.state)
        return self._obs

    @property
    def terminated(self):
        return self.state.terminated

    def step(self, action):
        before = self.observation
        try:
            new_state = apply_action(self.spec, self.state, action)
        except InvalidActionError as exc:
            return TransitionRecord(before, action, before, error=str(exc))
        if new_state != self.state:
            self.state = new_state
            self._obs = observe(self.spec, new_state)
        return TransitionRecord(before, action, self._obs)
