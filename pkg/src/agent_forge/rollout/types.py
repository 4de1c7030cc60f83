"""Records produced by rollouts: steps, trajectories, monitor verdicts, samples."""

from dataclasses import dataclass, field, replace
from typing import Any, List, Optional

from ..exceptions import ValidationError
from ..sim.env import ActionCommand
from ..sim.goals import TaskGoal

EXPERT = "e"
LEARNER = "l"
ROLES = (EXPERT, LEARNER)

STRATEGIES = ("expert", "self-evolution", "random-switch", "error-intervention")
OUTCOMES = ("completed", "answer", "step_budget_exhausted", "aborted")
RETAINED_OUTCOMES = ("completed", "answer")
DEFAULT_MAX_STEPS = 30


@dataclass(frozen=True)
class RolloutTask:
    """An instruction bound to its app and, when verifiable, its goal."""

    task_id: str
    app: str
    instruction: str
    goal: Optional[TaskGoal] = None

    def to_json(self):
        return {"task_id": self.task_id, "app": self.app, "instruction": self.instruction,
                "goal": self.goal.to_json() if self.goal else None}

    @classmethod
    def from_json(cls, d):
        goal = TaskGoal.from_json(d["goal"]) if d.get("goal") else None
        return cls(d["task_id"], d["app"], d["instruction"], goal)


@dataclass(frozen=True)
class MonitorVerdict:
    deviated: bool
    analysis: str = ""

    def __post_init__(self):
        if self.deviated and not self.analysis.strip():
            raise ValidationError("a deviation verdict needs an analysis", field="analysis")

    def to_json(self):
        return {"deviated": self.deviated, "analysis": self.analysis}

    @classmethod
    def from_json(cls, d):
        return cls(bool(d["deviated"]), d.get("analysis", ""))


@dataclass
class TrajectoryStep:
    t: int
    observation_ref: str
    thought: str
    action: ActionCommand
    z: str
    monitor_verdict: Optional[MonitorVerdict] = None
    action_error: Optional[str] = None
    rewrite_failed: bool = False
    observation: Any = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.z not in ROLES:
            raise ValidationError(f"z must be one of {ROLES}, got {self.z!r}", field="z")

    def to_json(self):
        out = {"t": self.t, "observation": self.observation_ref, "thought": self.thought,
               "action": self.action.to_json(), "z": self.z,
               "monitor_verdict": self.monitor_verdict.to_json() if self.monitor_verdict else None,
               "action_error": self.action_error}
        if self.rewrite_failed:
            out["rewrite_failed"] = True
        return out

    @classmethod
    def from_json(cls, d):
        verdict = MonitorVerdict.from_json(d["monitor_verdict"]) if d.get("monitor_verdict") else None
        return cls(d["t"], d["observation"], d["thought"], ActionCommand.from_json(d["action"]),
                   d["z"], verdict, d.get("action_error"), d.get("rewrite_failed", False))


@dataclass
class Trajectory:
    task: RolloutTask
    strategy: str
    steps: List[TrajectoryStep] = field(default_factory=list)
    outcome: str = "step_budget_exhausted"
    answer: Optional[str] = None
    seeds: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy {self.strategy!r}", field="strategy")
        if self.outcome not in OUTCOMES:
            raise ValidationError(f"unknown outcome {self.outcome!r}", field="outcome")

    @property
    def retained(self):
        return self.outcome in RETAINED_OUTCOMES

    @property
    def z_sequence(self):
        return [s.z for s in self.steps]

    def copy(self):
        return replace(self, steps=[replace(s) for s in self.steps], seeds=dict(self.seeds))

    def to_json(self):
        return {"task": self.task.to_json(), "strategy": self.strategy, "outcome": self.outcome,
                "answer": self.answer, "seeds": self.seeds,
                "steps": [s.to_json() for s in self.steps]}

    @classmethod
    def from_json(cls, d):
        return cls(RolloutTask.from_json(d["task"]), d["strategy"],
                   [TrajectoryStep.from_json(s) for s in d["steps"]], d["outcome"], d.get("answer"),
                   dict(d.get("seeds", {})))


@dataclass
class TrainingSample:
    """One expert step with the full mixed-policy history before it."""

    task_id: str
    app: str
    instruction: str
    history: List[TrajectoryStep]
    target_thought: str
    target_action: ActionCommand

    def to_json(self):
        return {"task_id": self.task_id, "app": self.app, "instruction": self.instruction,
                "history": [s.to_json() for s in self.history],
                "target_thought": self.target_thought, "target_action": self.target_action.to_json()}

    @classmethod
    def from_json(cls, d):
        return cls(d["task_id"], d["app"], d["instruction"],
                   [TrajectoryStep.from_json(s) for s in d["history"]], d["target_thought"],
                   ActionCommand.from_json(d["target_action"]))
