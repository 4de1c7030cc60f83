"""Training-sample extraction, reasoning rewrites and intervention counts."""

import json
import logging
from dataclasses import replace
from pathlib import Path

from .. import prompts
from ..exceptions import ProviderError
from ..providers.chat import GenerationRequest, ImagePart, TextPart
from ..store import atomic_write_text, read_json, write_json
from .types import EXPERT, LEARNER, TrainingSample, Trajectory

logger = logging.getLogger(__name__)


def extract_training_samples(trajectory):
    """One sample per expert step, each carrying every step before it.

    Only trajectories that ended with the agent reporting completion (or an
    answer) yield samples.
    """
    if not trajectory.retained:
        return []
    task = trajectory.task
    return [TrainingSample(task.task_id, task.app, task.instruction, list(trajectory.steps[:i]),
                           step.thought, step.action)
            for i, step in enumerate(trajectory.steps) if step.z == EXPERT]


def count_interventions(trajectory):
    """Number of learner-to-expert handovers in the step labels."""
    z = trajectory.z_sequence if isinstance(trajectory, Trajectory) else list(trajectory)
    return sum(1 for a, b in zip(z, z[1:]) if a == LEARNER and b == EXPERT)


def rewrite_request(trajectory, index):
    step = trajectory.steps[index]
    history = "\n".join(f"{s.t}. {s.action}" for s in trajectory.steps[:index]) or "(none)"
    text = (f"Task: {trajectory.task.instruction}\nPrevious actions:\n{history}\n"
            f"Chosen action: {step.action}\nOriginal reasoning: {step.thought}")
    parts = [TextPart(text)]
    if step.observation is not None:
        parts.insert(0, ImagePart(step.observation_ref, step.observation.render))
    return GenerationRequest(prompts.REWRITE_SYSTEM, tuple(parts), 0.0, None,
                             {"task": "rewrite", "thought": step.thought})


def rewrite_thoughts(trajectory, generator):
    """Copy of ``trajectory`` with every step's reasoning rewritten.

    Actions, labels and order are untouched. A step whose rewrite fails
    keeps its original thought and is flagged ``rewrite_failed``.
    """
    out = trajectory.copy()
    for i, step in enumerate(out.steps):
        try:
            text = generator.chat_generate(rewrite_request(trajectory, i))
        except ProviderError as exc:
            logger.warning("rewrite failed at step %d of %s: %s", i, trajectory.task.task_id, exc)
            text = None
        if isinstance(text, str) and text.strip():
            out.steps[i] = replace(step, thought=text.strip())
        else:
            out.steps[i] = replace(step, rewrite_failed=True)
    return out


def write_training_jsonl(samples, path):
    text = "".join(json.dumps(s.to_json(), sort_keys=True, ensure_ascii=False) + "\n" for s in samples)
    return atomic_write_text(path, text)


def read_training_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [TrainingSample.from_json(json.loads(line)) for line in fh if line.strip()]


def trajectory_path(root, strategy, task_id):
    return Path(root) / "trajectories" / strategy / f"{task_id}.json"


def save_trajectory(trajectory, root):
    return write_json(trajectory_path(root, trajectory.strategy, trajectory.task.task_id),
                      trajectory.to_json())


def load_trajectories(root, strategy):
    base = Path(root) / "trajectories" / strategy
    return [Trajectory.from_json(read_json(p)) for p in sorted(base.glob("*.json"))]
