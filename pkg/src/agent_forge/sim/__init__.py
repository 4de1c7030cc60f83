"""Deterministic simulated mobile apps: specs, stepping, rendering, goals, planning."""

from .env import (
    A11yNode,
    ActionCommand,
    EnvState,
    Observation,
    SimEnvironment,
    TransitionRecord,
    apply_action,
    initial_state,
    observe,
    reset,
    step,
)
from .goals import TaskGoal, goal_check, ground_instruction, state_satisfies
from .planner import Planner, shortest_plan
from .render import read_pgm, render_screen, write_pgm
from .spec import (
    LEXICON,
    SimAppSpec,
    SimScreenSpec,
    UiElement,
    generate_app,
    generate_suite,
    load_spec,
    save_spec,
)

__all__ = [
    "A11yNode", "ActionCommand", "EnvState", "LEXICON", "Observation", "Planner",
    "SimAppSpec", "SimEnvironment", "SimScreenSpec", "TaskGoal", "TransitionRecord",
    "UiElement", "apply_action", "generate_app", "generate_suite", "goal_check",
    "ground_instruction", "initial_state", "load_spec", "observe", "read_pgm",
    "render_screen", "reset", "save_spec", "shortest_plan", "state_satisfies", "step",
    "write_pgm",
]
