"""Verifiable task goals and the phrase grammar linking them to instruction text.

Sim-grounded instructions are built from a small set of clauses so that any
instruction produced by the offline generator can be turned back into a
checkable goal:

* ``turn on 'Wifi'`` / ``turn off 'Wifi'``
* ``set 'Device Name' to 'ember'``
* ``open the 'Display' screen``
* ``what is the current value of 'Nickname'?`` (question answering)
"""

import re
from dataclasses import dataclass
from typing import Optional, Tuple

from ..exceptions import ValidationError


@dataclass(frozen=True)
class TaskGoal:
    target_screen: Optional[int] = None
    required_data: Tuple[Tuple[str, object], ...] = ()
    required_answer: Optional[str] = None

    def __post_init__(self):
        if self.target_screen is None and not self.required_data and self.required_answer is None:
            raise ValidationError("a goal needs a target screen, required data or an answer")
        object.__setattr__(self, "required_data", tuple(sorted(self.required_data)))

    @property
    def fields(self):
        return tuple(k for k, _ in self.required_data)

    def to_json(self):
        return {"target_screen": self.target_screen,
                "required_data": [[k, v] for k, v in self.required_data],
                "required_answer": self.required_answer}

    @classmethod
    def from_json(cls, d):
        return cls(d.get("target_screen"), tuple((k, v) for k, v in d.get("required_data", ())),
                   d.get("required_answer"))


def normalize_answer(text):
    return text.strip().casefold()


def state_satisfies(state, goal):
    """Screen and data components only (the answer is checked separately)."""
    if goal.target_screen is not None and state.current_screen != goal.target_screen:
        return False
    values = state.values
    return all(values.get(k) == v for k, v in goal.required_data)


def goal_check(state, goal, final_answer=None):
    """True iff every present goal component matches exactly."""
    if not state_satisfies(state, goal):
        return False
    if goal.required_answer is not None:
        if final_answer is None:
            return False
        return normalize_answer(final_answer) == normalize_answer(goal.required_answer)
    return True


# --- phrase grammar -------------------------------------------------------

_TOGGLE = re.compile(r"turn (on|off) '([^']+)'")
_SET = re.compile(r"set '([^']+)' to '([^']*)'")
_OPEN = re.compile(r"open the '([^']+)' screen")
_ASK = re.compile(r"what is the current value of '([^']+)'")


def toggle_clause(label, on):
    return f"turn {'on' if on else 'off'} '{label}'"


def set_clause(label, value):
    return f"set '{label}' to '{value}'"


def open_clause(title):
    return f"open the '{title}' screen"


def ask_clause(label):
    return f"what is the current value of '{label}'"


def ground_instruction(spec, text):
    """Map an instruction written in the clause grammar to a TaskGoal of ``spec``.

    Returns None when the text contains no recognisable clause, names an
    unknown element, or contradicts itself.
    """
    by_label = {}
    for name, (screen_id, el) in spec.field_elements.items():
        by_label[el.label.casefold()] = (name, screen_id, el)
    titles = {s.title.casefold(): s.screen_id for s in spec.screens}

    required = {}
    target = None
    answer = None

    def put(name, value):
        if name in required and required[name] != value:
            raise KeyError(name)
        required[name] = value

    try:
        for on, label in _TOGGLE.findall(text):
            name, _, el = by_label[label.casefold()]
            if el.kind != "toggle":
                return None
            put(name, on == "on")
        for label, value in _SET.findall(text):
            name, _, el = by_label[label.casefold()]
            if el.kind != "input":
                return None
            put(name, value)
        for title in _OPEN.findall(text):
            target = titles[title.casefold()]
        asks = _ASK.findall(text)
        if asks:
            name, screen_id, el = by_label[asks[-1].casefold()]
            answer = str(spec.initial_data[name])
            if name in required:
                answer = str(required[name])
            target = screen_id
    except KeyError:
        return None
    if target is None and not required and answer is None:
        return None
    return TaskGoal(target, tuple(required.items()), answer)
