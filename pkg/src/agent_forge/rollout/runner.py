"""Binding instructions to environments and running a strategy over many tasks."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

from ..exceptions import ValidationError
from ..providers.mock import stable_seed
from ..sim.env import SimEnvironment
from ..sim.goals import ground_instruction
from .critics import ChatJudge, ChatMonitor, GoalJudge, OracleMonitor
from .engine import (
    DEFAULT_MAX_INTERVENTIONS,
    DEFAULT_MIN_EXPERT_STEPS,
    DEFAULT_P,
    rollout_error_intervention,
    rollout_expert,
    rollout_random_switch,
    self_evolution,
)
from .policies import ChatPolicy, NoisyPolicy, OraclePolicy, TabularLearner
from .types import DEFAULT_MAX_STEPS, STRATEGIES, RolloutTask

logger = logging.getLogger(__name__)


def build_tasks(instructions, specs):
    """Ground each instruction against its app; instructions that do not ground are skipped."""
    specs = {s.app_name: s for s in specs}
    tasks = []
    for ins in instructions:
        spec = specs.get(ins.app)
        goal = ground_instruction(spec, ins.text) if spec is not None else None
        if goal is None:
            logger.info("instruction %s has no verifiable goal; skipped", ins.id)
            continue
        tasks.append(RolloutTask(ins.id, ins.app, ins.text, goal))
    return tasks


@dataclass
class Policies:
    expert: Any
    learner: Any
    monitor: Any
    judge: Any


def sim_policies(specs, epsilon=0.3, seed=0):
    """Oracle expert, monitor and judge plus an epsilon-noisy learner for sim apps."""
    specs = {s.app_name: s for s in specs}
    expert = OraclePolicy(specs)
    return Policies(expert, NoisyPolicy(expert, epsilon, seed), OracleMonitor(specs), GoalJudge(specs))


def chat_policies(providers):
    learner_backend = getattr(providers, "learner", None) or providers.generator
    return Policies(ChatPolicy(providers.generator), ChatPolicy(learner_backend),
                    ChatMonitor(providers.monitor), ChatJudge(providers.judge))


def run_strategy(strategy, tasks, specs, policies, seed=0, p=DEFAULT_P,
                 max_interventions=DEFAULT_MAX_INTERVENTIONS,
                 min_expert_steps=DEFAULT_MIN_EXPERT_STEPS, max_steps=DEFAULT_MAX_STEPS,
                 rounds=3, jobs=1):
    """Roll out every task under ``strategy``; results follow task order.

    Each rollout owns a fresh environment. For self-evolution the learner is
    wrapped in a :class:`TabularLearner` and only the latest successful
    trajectory per task is returned.
    """
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}",
                              field="rollout.strategy")
    specs = {s.app_name: s for s in specs}

    def env_for(task):
        return SimEnvironment(specs[task.app])

    if strategy == "self-evolution":
        trajs, _ = self_evolution(tasks, env_for, TabularLearner(policies.learner), policies.judge,
                                  rounds, max_steps)
        latest = {t.task.task_id: t for t in trajs}
        return [latest[t.task_id] for t in tasks if t.task_id in latest]

    def run(task):
        env = env_for(task)
        if strategy == "expert":
            return rollout_expert(task, env, policies.expert, max_steps)
        if strategy == "random-switch":
            return rollout_random_switch(task, env, policies.expert, policies.learner, p,
                                         stable_seed(seed, "switch", task.task_id) % (2**31), max_steps)
        return rollout_error_intervention(task, env, policies.learner, policies.expert, policies.monitor,
                                          max_interventions, min_expert_steps, max_steps)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, tasks))
    return [run(t) for t in tasks]
