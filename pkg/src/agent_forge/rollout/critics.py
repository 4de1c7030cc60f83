"""Deviation monitors and success judges."""

import logging

from .. import prompts
from ..exceptions import DecodeError, InvalidActionError
from ..providers.chat import GenerationRequest, ImagePart, TextPart, parse_json_object
from ..sim.env import apply_action, initial_state
from ..sim.goals import goal_check
from .types import MonitorVerdict

logger = logging.getLogger(__name__)


class OracleMonitor:
    """Flags a learner step that failed to bring the goal strictly closer.

    Distances come from the sim planner; an unreachable goal counts as
    infinitely far.
    """

    def __init__(self, specs):
        self.specs = dict(specs)

    def _distance(self, task, observation):
        d = self.specs[task.app].planner.distance(observation.state, task.goal)
        return float("inf") if d is None else d

    def assess(self, task, history, previous, current):
        before = self._distance(task, previous)
        after = self._distance(task, current)
        if after < before:
            return MonitorVerdict(False, f"Progress: {before:g} -> {after:g} actions left.")
        last = history[-1] if history else None
        what = f"'{last.action}'" if last is not None else "The last action"
        failed = f" failed ({last.action_error})" if last is not None and last.action_error else ""
        return MonitorVerdict(True, f"{what}{failed} did not move toward the goal "
                                    f"({before:g} -> {after:g} actions left); return to the path "
                                    f"from '{current.title}'.")


class ChatMonitor:
    """Monitor backed by a chat model returning ``{deviated, analysis}``."""

    def __init__(self, backend, history_window=5):
        self.backend = backend
        self.history_window = history_window

    def assess(self, task, history, previous, current):
        lines = "\n".join(f"{s.t}. {s.action}" for s in history[-self.history_window:]) or "(none)"
        parts = (ImagePart(previous.key, previous.render), ImagePart(current.key, current.render),
                 TextPart(f"Task: {task.instruction}\nRecent actions:\n{lines}"))
        raw = self.backend.chat_generate(GenerationRequest(
            prompts.MONITOR_SYSTEM, parts, 0.0, None, {"task": "monitor", "app_name": task.app}))
        obj = parse_json_object(raw)
        if obj is None or not isinstance(obj.get("deviated"), bool):
            raise DecodeError("monitor reply has no boolean 'deviated'", raw=raw)
        analysis = str(obj.get("analysis", "")).strip()
        if obj["deviated"] and not analysis:
            analysis = "The latest action moved away from the task."
        return MonitorVerdict(obj["deviated"], analysis)


def replay_state(spec, actions):
    """State reached by applying ``actions`` from reset, skipping invalid ones."""
    state = initial_state(spec)
    for action in actions:
        try:
            state = apply_action(spec, state, action)
        except InvalidActionError:
            continue
    return state


class GoalJudge:
    """Replays a trajectory in the sim and checks its goal exactly."""

    def __init__(self, specs):
        self.specs = dict(specs)

    def judge(self, trajectory):
        if not trajectory.retained or trajectory.task.goal is None:
            return False
        state = replay_state(self.specs[trajectory.task.app], [s.action for s in trajectory.steps])
        return goal_check(state, trajectory.task.goal, trajectory.answer)


class ChatJudge:
    """Judge backed by a chat model returning ``{success, reason}``."""

    def __init__(self, backend):
        self.backend = backend

    def judge(self, trajectory):
        if not trajectory.retained:
            return False
        steps = "\n".join(f"{s.t}. {s.action}" for s in trajectory.steps)
        parts = [TextPart(f"Task: {trajectory.task.instruction}\nActions:\n{steps}\n"
                          f"Final answer: {trajectory.answer or '(none)'}")]
        last = trajectory.steps[-1].observation if trajectory.steps else None
        if last is not None:
            parts.insert(0, ImagePart(last.key, last.render))
        raw = self.backend.chat_generate(GenerationRequest(
            prompts.JUDGE_SYSTEM, tuple(parts), 0.0, None, {"task": "judge"}))
        obj = parse_json_object(raw)
        if obj is None or not isinstance(obj.get("success"), bool):
            raise DecodeError("judge reply has no boolean 'success'", raw=raw)
        return obj["success"]
