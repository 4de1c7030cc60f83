"""Random-walk exploration of an environment."""

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List

from ._validation import check_int
from .exceptions import AgentForgeError
from .sim.env import ActionCommand, SimEnvironment, TransitionRecord
from .sim.spec import LEXICON
from .store import ObservationStore, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

DEFAULT_SESSION_STEPS = 10


class ElementBlacklist:
    """Elements that did nothing when activated, keyed by screen fingerprint.

    Only ever grows.
    """

    def __init__(self, entries=()):
        self._entries = set(entries)

    def add(self, fingerprint, element_id):
        self._entries.add((fingerprint, element_id))

    def __contains__(self, item):
        return item in self._entries

    def __len__(self):
        return len(self._entries)

    @property
    def entries(self):
        return frozenset(self._entries)


@dataclass
class ExplorationTrajectory:
    app_name: str
    session_id: int
    seed: int
    transitions: List[TransitionRecord] = field(default_factory=list)

    def observations(self):
        """Every observation in visiting order (first ``o_t``, then each ``o_{t+1}``)."""
        if not self.transitions:
            return []
        return [self.transitions[0].before] + [t.after for t in self.transitions]


def random_walk(env, steps=DEFAULT_SESSION_STEPS, blacklist=None, seed=0, session_id=0):
    """Run one session from the home screen.

    At each step an interactable, non-blacklisted element of the current screen
    is drawn uniformly; inputs receive a random lexicon word, everything else
    is clicked. An activation that leaves both the render and the a11y tree
    unchanged blacklists the element for the rest of the campaign. The session
    ends early when the current screen has no candidate left.
    """
    steps = check_int(steps, "steps", minimum=0)
    blacklist = ElementBlacklist() if blacklist is None else blacklist
    rng = random.Random(seed)
    traj = ExplorationTrajectory(env.app_name, session_id, seed)
    env.reset()
    for _ in range(steps):
        obs = env.observation
        fingerprint = obs.structure_digest
        candidates = sorted(i for i in obs.interactable_ids() if (fingerprint, i) not in blacklist)
        if not candidates:
            break
        element_id = rng.choice(candidates)
        if obs.node(element_id).kind == "input":
            action = ActionCommand.type_text(element_id, rng.choice(LEXICON))
        else:
            action = ActionCommand.click(element_id)
        record = env.step(action)
        after = record.after
        if after.render_hash == obs.render_hash and after.a11y_digest == obs.a11y_digest:
            blacklist.add(fingerprint, element_id)
        traj.transitions.append(record)
    return traj


def _explore_app(spec, sessions_per_app, base_seed, steps):
    blacklist = ElementBlacklist()
    out = []
    failures = 0
    for s in range(sessions_per_app):
        try:
            out.append(random_walk(SimEnvironment(spec), steps, blacklist, base_seed + s, s))
        except AgentForgeError as exc:
            failures += 1
            logger.warning("%s session %d failed: %s", spec.app_name, s, exc)
    if failures == sessions_per_app:
        raise AgentForgeError(f"every exploration session of {spec.app_name} failed")
    return out


def run_campaign(specs, sessions_per_app, base_seed=0, steps=DEFAULT_SESSION_STEPS, jobs=1):
    """Explore every app; returns trajectories in (app, session) order.

    Session ``i`` uses seed ``base_seed + i``. Apps may run in parallel, but
    the sessions of one app share a blacklist and run serially.
    """
    sessions_per_app = check_int(sessions_per_app, "sessions_per_app", minimum=1)
    specs = list(specs)
    if jobs > 1 and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_app = list(pool.map(lambda sp: _explore_app(sp, sessions_per_app, base_seed, steps), specs))
    else:
        per_app = [_explore_app(sp, sessions_per_app, base_seed, steps) for sp in specs]
    return [t for group in per_app for t in group]


# --- persistence -------------------------------------------------------------

def trajectory_path(root, app_name, session_id):
    return Path(root) / "exploration" / app_name / f"session_{session_id:04d}.jsonl"


def save_trajectories(trajectories, root):
    """Write one JSONL file per session; observations go to the content store."""
    store = ObservationStore(root)
    paths = []
    for traj in trajectories:
        rows = []
        for t, rec in enumerate(traj.transitions):
            rows.append({
                "app": traj.app_name, "session": traj.session_id, "seed": traj.seed, "step": t,
                "action": rec.action.to_json(), "before": store.put(rec.before),
                "after": store.put(rec.after), "error": rec.error,
            })
        if not rows:
            rows.append({"app": traj.app_name, "session": traj.session_id, "seed": traj.seed,
                         "step": None})
        paths.append(write_jsonl(trajectory_path(root, traj.app_name, traj.session_id), rows))
    return paths


def load_trajectories(root):
    """Load every stored session, ordered by (app directory, session)."""
    store = ObservationStore(root)
    base = Path(root) / "exploration"
    out = []
    for app_dir in sorted(p for p in base.iterdir() if p.is_dir()):
        for path in sorted(app_dir.glob("session_*.jsonl")):
            rows = read_jsonl(path)
            traj = ExplorationTrajectory(rows[0]["app"], rows[0]["session"], rows[0]["seed"])
            for row in rows:
                if row.get("step") is None:
                    continue
                traj.transitions.append(TransitionRecord(
                    store.get(row["before"]), ActionCommand.from_json(row["action"]),
                    store.get(row["after"]), row.get("error"),
                ))
            out.append(traj)
    return out
