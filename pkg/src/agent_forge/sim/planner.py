"""Breadth-first planning over the product graph (screen x goal-relevant data).

A product node is ``(screen_id, sat)`` where ``sat`` is a tuple of booleans,
one per field named in the goal, telling whether that field currently holds
the required value. Edges come from clicking nav links (move), clicking
toggles of goal fields (flip the bit) and typing into goal inputs (set the
bit). Back navigation is not planned over: it depends on the unbounded
history stack, and generated apps always carry an explicit "Up" link, so
every screen stays reachable without it.
"""

from collections import deque
from itertools import product

from ..exceptions import PlanningError
from .env import ActionCommand
from .goals import state_satisfies


class Planner:
    def __init__(self, spec):
        self.spec = spec
        self._cache = {}

    def node_of(self, state, goal):
        values = state.values
        sat = tuple(values.get(k) == v for k, v in goal.required_data)
        return state.current_screen, sat

    def moves(self, node, goal):
        """Outgoing ``(action, successor)`` pairs in tie-break order."""
        screen_id, sat = node
        index = {k: i for i, k in enumerate(goal.fields)}
        required = dict(goal.required_data)
        out = []
        for el in sorted(self.spec.screen(screen_id).elements, key=lambda e: e.element_id):
            if not el.interactable:
                continue
            if el.kind == "nav":
                out.append((ActionCommand.click(el.element_id), (el.target, sat)))
            elif el.kind == "toggle" and el.field in index:
                i = index[el.field]
                flipped = sat[:i] + (not sat[i],) + sat[i + 1 :]
                out.append((ActionCommand.click(el.element_id), (screen_id, flipped)))
            elif el.kind == "input" and el.field in index:
                i = index[el.field]
                out.append((ActionCommand.type_text(el.element_id, str(required[el.field])),
                            (screen_id, sat[:i] + (True,) + sat[i + 1 :])))
        return out

    def is_goal_node(self, node, goal):
        screen_id, sat = node
        return all(sat) and (goal.target_screen is None or screen_id == goal.target_screen)

    def distances(self, goal):
        """Distance-to-goal for every product node (reverse BFS, cached per goal)."""
        cached = self._cache.get(goal)
        if cached is not None:
            return cached
        k = len(goal.required_data)
        nodes = [(s.screen_id, sat) for s in self.spec.screens
                 for sat in product((False, True), repeat=k)]
        reverse = {n: [] for n in nodes}
        for n in nodes:
            for _, succ in self.moves(n, goal):
                if succ != n:
                    reverse[succ].append(n)
        dist = {}
        queue = deque()
        for n in nodes:
            if self.is_goal_node(n, goal):
                dist[n] = 0
                queue.append(n)
        while queue:
            cur = queue.popleft()
            for prev in reverse[cur]:
                if prev not in dist:
                    dist[prev] = dist[cur] + 1
                    queue.append(prev)
        self._cache[goal] = dist
        return dist

    def distance(self, state, goal):
        """Minimum number of actions to reach the goal, or None if unreachable."""
        return self.distances(goal).get(self.node_of(state, goal))

    def plan(self, state, goal):
        dist = self.distances(goal)
        node = self.node_of(state, goal)
        if node not in dist:
            raise PlanningError(f"goal {goal} is unreachable from screen {state.current_screen}")
        actions = []
        while dist[node] > 0:
            for action, succ in self.moves(node, goal):
                if dist.get(succ) == dist[node] - 1:
                    actions.append(action)
                    node = succ
                    break
            else:  # pragma: no cover - BFS distances guarantee a successor
                raise PlanningError("distance map is inconsistent")
        return actions


def shortest_plan(spec, state, goal):
    """Minimum-length action sequence from ``state`` to a goal-satisfying state.

    Among shortest plans, the one whose actions are smallest by (element id,
    action kind) at every step is returned. An already-satisfied goal yields
    an empty plan.
    """
    if state_satisfies(state, goal):
        return []
    return spec.planner.plan(state, goal)
