"""Policy-switching rollouts and training-sample extraction."""

from .critics import ChatJudge, ChatMonitor, GoalJudge, OracleMonitor, replay_state
from .engine import (
    rollout_error_intervention,
    rollout_expert,
    rollout_learner,
    rollout_random_switch,
    self_evolution,
)
from .policies import ChatPolicy, NoisyPolicy, OraclePolicy, TabularLearner, parse_action, random_action
from .runner import Policies, build_tasks, chat_policies, run_strategy, sim_policies
from .samples import (
    count_interventions,
    extract_training_samples,
    load_trajectories,
    read_training_jsonl,
    rewrite_thoughts,
    save_trajectory,
    write_training_jsonl,
)
from .types import (
    EXPERT,
    LEARNER,
    STRATEGIES,
    MonitorVerdict,
    RolloutTask,
    TrainingSample,
    Trajectory,
    TrajectoryStep,
)

__all__ = [
    "EXPERT", "LEARNER", "STRATEGIES", "ChatJudge", "ChatMonitor", "ChatPolicy", "GoalJudge",
    "MonitorVerdict", "NoisyPolicy", "OracleMonitor", "OraclePolicy", "Policies", "RolloutTask",
    "TabularLearner", "TrainingSample", "Trajectory", "TrajectoryStep", "build_tasks",
    "chat_policies", "count_interventions", "extract_training_samples", "load_trajectories",
    "parse_action", "random_action", "read_training_jsonl", "replay_state", "rewrite_thoughts",
    "rollout_error_intervention", "rollout_expert", "rollout_learner", "rollout_random_switch",
    "run_strategy", "save_trajectory", "self_evolution", "sim_policies", "write_training_jsonl",
]
