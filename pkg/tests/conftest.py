import random
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from agent_forge.explorer import run_campaign  # noqa: E402
from agent_forge.memory import build_memories  # noqa: E402
from agent_forge.providers import ProviderBundle  # noqa: E402
from agent_forge.sim.goals import TaskGoal  # noqa: E402
from agent_forge.sim.spec import LEXICON, generate_app, generate_suite  # noqa: E402


@pytest.fixture(scope="session")
def providers():
    return ProviderBundle.mock(0)


@pytest.fixture(scope="session")
def small_app():
    return generate_app(10, 6, n_fields=4, seed=1, app_name="Notes")


@pytest.fixture(scope="session")
def suite3():
    return generate_suite(3, 20, 8, 10, seed=0)


@pytest.fixture(scope="session")
def campaign3(suite3):
    return run_campaign(suite3, 30, base_seed=0, steps=10)


@pytest.fixture(scope="session")
def memories3(campaign3, providers):
    return build_memories(campaign3, providers)


def random_goal(spec, rng, n_fields=2, with_screen=True):
    fields = dict(spec.data_fields)
    names = rng.sample(sorted(fields), min(n_fields, len(fields)))
    req = []
    for name in names:
        v = fields[name]
        if isinstance(v, bool):
            req.append((name, not v))
        else:
            req.append((name, rng.choice([w for w in LEXICON if w != v])))
    target = rng.randrange(len(spec.screens)) if with_screen else None
    return TaskGoal(target, tuple(req))


@pytest.fixture
def rng():
    return random.Random(1234)


def unit_rows(rng_np, n, d):
    X = rng_np.normal(size=(n, d))
    return X / np.linalg.norm(X, axis=1, keepdims=True)


ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, name, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n} [{'PASS' if ok else 'FAIL'}] {name}: {detail}")
