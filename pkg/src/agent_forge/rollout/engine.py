"""Rollout strategies that mix expert and learner control."""

import logging
import random

from .._validation import check_int, check_probability
from ..exceptions import AgentForgeError, ProviderError
from .types import DEFAULT_MAX_STEPS, EXPERT, LEARNER, Trajectory, TrajectoryStep

logger = logging.getLogger(__name__)

DEFAULT_P = 0.5
DEFAULT_MAX_INTERVENTIONS = 2
DEFAULT_MIN_EXPERT_STEPS = 3


def _execute(env, traj, thought, action, z):
    """Run ``action`` and append the step; returns True when the episode ended."""
    obs = env.observation
    record = env.step(action)
    traj.steps.append(TrajectoryStep(len(traj.steps), obs.key, thought, action, z,
                                     action_error=record.error, observation=obs))
    if action.is_terminal and record.error is None:
        traj.outcome = "answer" if action.kind == "answer" else "completed"
        traj.answer = action.text if action.kind == "answer" else None
        return True
    return False


def _guarded(traj, body):
    """Run ``body``; provider failures mark the trajectory aborted."""
    try:
        body()
    except ProviderError as exc:
        logger.warning("rollout of %s aborted: %s", traj.task.task_id, exc)
        traj.outcome = "aborted"
    return traj


def rollout_expert(task, env, expert, max_steps=DEFAULT_MAX_STEPS):
    """Expert-only rollout: every step is labelled ``e``."""
    max_steps = check_int(max_steps, "max_steps", 1)
    traj = Trajectory(task, "expert")

    def body():
        env.reset()
        for _ in range(max_steps):
            thought, action = expert.decide(task, env.observation, traj.steps)
            if _execute(env, traj, thought, action, EXPERT):
                return

    return _guarded(traj, body)


def rollout_learner(task, env, learner, max_steps=DEFAULT_MAX_STEPS, strategy="self-evolution"):
    """Learner-only rollout: every step is labelled ``l``."""
    max_steps = check_int(max_steps, "max_steps", 1)
    traj = Trajectory(task, strategy)

    def body():
        env.reset()
        for _ in range(max_steps):
            thought, action = learner.decide(task, env.observation, traj.steps)
            if _execute(env, traj, thought, action, LEARNER):
                return

    return _guarded(traj, body)


def rollout_random_switch(task, env, expert, learner, p=DEFAULT_P, seed=0, max_steps=DEFAULT_MAX_STEPS):
    """Query both policies each step and hand control to the learner at random.

    When the proposals disagree (different kind or target element) a seeded
    coin lets the learner's action run with probability ``p``. The learner
    never gets to end the episode: a terminal learner proposal is replaced
    by the expert's action. Agreeing proposals run the expert's action.
    """
    p = check_probability(p, "p")
    max_steps = check_int(max_steps, "max_steps", 1)
    traj = Trajectory(task, "random-switch", seeds={"switch": seed})
    rng = random.Random(seed)

    def body():
        env.reset()
        for _ in range(max_steps):
            obs = env.observation
            e_thought, e_action = expert.decide(task, obs, traj.steps)
            l_thought, l_action = learner.decide(task, obs, traj.steps)
            use_learner = False
            if not e_action.same_target(l_action):
                use_learner = rng.random() < p and not l_action.is_terminal
            if use_learner:
                ended = _execute(env, traj, l_thought, l_action, LEARNER)
            else:
                ended = _execute(env, traj, e_thought, e_action, EXPERT)
            if ended:
                return

    return _guarded(traj, body)


def rollout_error_intervention(task, env, learner, expert, monitor,
                               max_interventions=DEFAULT_MAX_INTERVENTIONS,
                               min_expert_steps=DEFAULT_MIN_EXPERT_STEPS,
                               max_steps=DEFAULT_MAX_STEPS):
    """Learner-led rollout with monitor-triggered expert takeovers.

    After each non-terminal learner step the monitor compares the last two
    observations. A deviation verdict, while fewer than
    ``max_interventions`` takeovers have happened, hands control to the
    expert together with the monitor's analysis. The expert then acts for
    ``min_expert_steps`` steps (fewer only if it ends the episode) before
    the learner resumes. The monitor stays silent during expert control.
    """
    max_interventions = check_int(max_interventions, "max_interventions", 1)
    min_expert_steps = check_int(min_expert_steps, "min_expert_steps", 1)
    max_steps = check_int(max_steps, "max_steps", 1)
    traj = Trajectory(task, "error-intervention")

    def body():
        env.reset()
        interventions = 0
        expert_left = 0
        guidance = None
        for _ in range(max_steps):
            obs = env.observation
            if expert_left > 0:
                thought, action = expert.decide(task, obs, traj.steps, guidance)
                if _execute(env, traj, thought, action, EXPERT):
                    return
                expert_left -= 1
                if expert_left == 0:
                    guidance = None
                continue
            thought, action = learner.decide(task, obs, traj.steps)
            if _execute(env, traj, thought, action, LEARNER):
                return
            verdict = monitor.assess(task, traj.steps, obs, env.observation)
            traj.steps[-1].monitor_verdict = verdict
            if verdict.deviated and interventions < max_interventions:
                interventions += 1
                expert_left = min_expert_steps
                guidance = verdict.analysis

    return _guarded(traj, body)


def _env_for(env, task):
    return env(task) if callable(env) else env


def self_evolution(tasks, env, learner, judge, rounds=3, max_steps=DEFAULT_MAX_STEPS):
    """Iterate learner rollouts, judging them and feeding successes back.

    ``env`` is an environment or a callable mapping a task to one. Returns
    every judged-successful trajectory (all rounds) and the learner, whose
    ``update`` hook receives each round's successes.
    """
    rounds = check_int(rounds, "rounds", 0)
    kept = []
    for r in range(rounds):
        successes = []
        for task in tasks:
            traj = rollout_learner(task, _env_for(env, task), learner, max_steps)
            traj.seeds["round"] = r
            try:
                ok = judge.judge(traj)
            except AgentForgeError as exc:
                logger.warning("judge failed on %s in round %d: %s", task.task_id, r, exc)
                continue
            if ok:
                successes.append(traj)
        logger.info("self-evolution round %d: %d/%d successful", r, len(successes), len(tasks))
        learner.update(successes)
        kept.extend(successes)
    return kept, learner
