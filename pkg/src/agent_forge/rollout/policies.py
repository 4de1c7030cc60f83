"""Expert and learner policies.

A policy exposes ``decide(task, observation, history, guidance=None)`` and
returns ``(thought, action)``. Every policy here is deterministic given its
inputs and its seed, and keeps no per-call state, so one instance can serve
concurrent rollouts.
"""

import json
import logging
import random
from threading import Lock

from .. import prompts
from .._validation import check_probability
from ..exceptions import DecodeError, PlanningError, ValidationError
from ..providers.chat import GenerationRequest, ImagePart, TextPart, parse_json_object
from ..providers.mock import stable_seed
from ..sim.env import ActionCommand
from ..sim.goals import state_satisfies
from ..sim.spec import LEXICON

logger = logging.getLogger(__name__)


def _describe(action, observation):
    node = observation.node(action.element_id) if action.element_id is not None else None
    if action.kind == "click" and node is not None:
        return f"tap '{node.label}'"
    if action.kind == "type" and node is not None:
        return f"type '{action.text}' into '{node.label}'"
    if action.kind == "answer":
        return f"answer '{action.text}'"
    if action.kind == "complete":
        return "report the task as done"
    return "go back"


class OraclePolicy:
    """Shortest-path expert for simulated apps.

    Reads the true environment state carried on the observation, so it only
    works against :class:`~agent_forge.sim.env.SimEnvironment`. Once the goal
    holds it terminates (answering for question tasks); when no route exists
    it backs out.
    """

    def __init__(self, specs):
        self.specs = dict(specs)

    def decide(self, task, observation, history, guidance=None):
        spec = self.specs[task.app]
        state = observation.state
        goal = task.goal
        if goal is None or state is None:
            raise ValidationError("the oracle expert needs a grounded task and a sim observation")
        prefix = f"Noted: {guidance} " if guidance else ""
        if state_satisfies(state, goal):
            if goal.required_answer is not None:
                action = ActionCommand.answer(goal.required_answer)
            else:
                action = ActionCommand.complete()
            return f"{prefix}Everything the task asks for is in place, so I {_describe(action, observation)}.", action
        try:
            plan = spec.planner.plan(state, goal)
        except PlanningError:
            action = ActionCommand.back()
            return f"{prefix}Nothing on '{observation.title}' leads toward the goal, so I go back.", action
        action = plan[0]
        return (f"{prefix}On '{observation.title}' the goal is {len(plan)} actions away; "
                f"next I {_describe(action, observation)}."), action


def random_action(observation, rng):
    """Uniform over every listed element (interactable or not) plus back."""
    choices = [n.element_id for n in observation.a11y] + [None]
    pick = rng.choice(choices)
    if pick is None:
        return ActionCommand.back()
    node = observation.node(pick)
    if node.kind == "input":
        return ActionCommand.type_text(pick, rng.choice(LEXICON))
    return ActionCommand.click(pick)


class NoisyPolicy:
    """With probability ``epsilon`` act at random, otherwise follow ``base``.

    The coin is derived from (seed, task, step index, observation), so
    decisions are reproducible and independent of call order. Random moves
    are never terminal.
    """

    def __init__(self, base, epsilon=0.3, seed=0):
        self.base = base
        self.epsilon = check_probability(epsilon, "epsilon")
        self.seed = seed

    def _rng(self, task, observation, history):
        return random.Random(stable_seed(self.seed, task.task_id, len(history), observation.key))

    def decide(self, task, observation, history, guidance=None):
        rng = self._rng(task, observation, history)
        if rng.random() < self.epsilon:
            action = random_action(observation, rng)
            return f"Trying something on '{observation.title}': {_describe(action, observation)}.", action
        return self.base.decide(task, observation, history, guidance)


class TabularLearner:
    """Learner that memorises the actions of successful trajectories.

    ``update`` stores, per (task, state), the last action taken there in a
    successful trajectory; ``decide`` replays a stored action when one exists
    and otherwise defers to ``fallback``. The key is the full sim state
    (screen, data, back stack) when the observation carries it: screens that
    render alike can differ in data elsewhere in the app or in where "back"
    leads. Keyed that way, replaying the last action seen at each state walks
    a successful trajectory forward to its end. Without a sim state the
    observation reference is used.
    """

    def __init__(self, fallback):
        self.fallback = fallback
        self.table = {}
        self._lock = Lock()

    @staticmethod
    def state_key(observation, observation_ref=None):
        state = getattr(observation, "state", None)
        if state is not None:
            return state.current_screen, state.data, state.history_stack
        return observation.key if observation is not None else observation_ref

    def update(self, trajectories):
        with self._lock:
            for traj in trajectories:
                for step in traj.steps:
                    key = self.state_key(step.observation, step.observation_ref)
                    self.table[(traj.task.task_id, key)] = (step.thought, step.action)
        return self

    def decide(self, task, observation, history, guidance=None):
        hit = self.table.get((task.task_id, self.state_key(observation)))
        if hit is not None:
            return hit
        return self.fallback.decide(task, observation, history, guidance)


def _history_text(history, limit=10):
    lines = [f"{s.t}. {s.action}" + (f" (failed: {s.action_error})" if s.action_error else "")
             for s in history[-limit:]]
    return "\n".join(lines) or "(none)"


def _elements_text(observation):
    return "\n".join(
        f"[{n.element_id}] {n.kind} '{n.label}'" + ("" if n.interactable else " (static)")
        + (f" = {n.value!r}" if n.value is not None else "")
        for n in observation.a11y
    )


def parse_action(obj):
    """Decode ``{"kind": ..., "element_id": ..., "text": ...}`` into an action."""
    if not isinstance(obj, dict):
        raise DecodeError("action must be an object", raw=json.dumps(obj))
    try:
        element = obj.get("element_id")
        return ActionCommand(obj.get("kind"), None if element is None else int(element), obj.get("text"))
    except (ValidationError, TypeError, ValueError) as exc:
        raise DecodeError(f"bad action: {exc}", raw=json.dumps(obj)) from exc


class ChatPolicy:
    """Policy backed by a chat model that replies with ``{thought, action}`` JSON."""

    def __init__(self, backend, temperature=0.0):
        self.backend = backend
        self.temperature = temperature

    def request(self, task, observation, history, guidance=None):
        text = (f"Task: {task.instruction}\nPrevious actions:\n{_history_text(history)}\n"
                f"Current screen '{observation.title}' elements:\n{_elements_text(observation)}")
        if guidance:
            text += f"\nSupervisor note: {guidance}"
        parts = (ImagePart(observation.key, observation.render), TextPart(text))
        return GenerationRequest(prompts.POLICY_SYSTEM, parts, self.temperature, None,
                                 {"task": "act", "app_name": task.app})

    def decide(self, task, observation, history, guidance=None):
        raw = self.backend.chat_generate(self.request(task, observation, history, guidance))
        obj = parse_json_object(raw)
        if obj is None or "action" not in obj:
            raise DecodeError("policy reply has no action", raw=raw)
        return str(obj.get("thought", "")), parse_action(obj["action"])
