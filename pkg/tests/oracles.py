"""Brute-force reference implementations used to check the package.

Everything here is written from the definitions, with plain loops and none
of the package's own helpers, so that agreement is meaningful.
"""

import math
from collections import deque

import numpy as np

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1
ROUND = 12  # cosine comparisons are made on scores rounded to 12 decimals


def fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def tokens(text):
    out, cur = [], []
    for ch in text.lower():
        if ("a" <= ch <= "z") or ("0" <= ch <= "9"):
            cur.append(ch)
        elif cur:
            out.append("".join(cur))
            cur = []
    if cur:
        out.append("".join(cur))
    return out


def hashing_embed(text, dim=256):
    vec = [0.0] * dim
    for tok in tokens(text):
        h = fnv1a(tok.encode("utf-8"))
        vec[h % dim] += -1.0 if h >> 63 else 1.0
    norm = math.sqrt(sum(v * v for v in vec))
    if norm == 0:
        vec = [0.0] * dim
        vec[0] = 1.0
        return vec
    return [v / norm for v in vec]


def dhash(grid):
    """Difference hash straight from the pixel loops."""
    rows = [[int(v) for v in r] for r in np.asarray(grid)]
    H, W = len(rows), len(rows[0])
    cells = []
    for r in range(8):
        y0, y1 = (r * H) // 8, ((r + 1) * H) // 8
        y1 = max(y1, y0 + 1)
        line = []
        for c in range(9):
            x0, x1 = (c * W) // 9, ((c + 1) * W) // 9
            x1 = max(x1, x0 + 1)
            total = 0
            count = 0
            for y in range(y0, y1):
                for x in range(x0, x1):
                    total += rows[y][x]
                    count += 1
            line.append(total / count)
        cells.append(line)
    bits = 0
    for r in range(8):
        for c in range(8):
            bits = (bits << 1) | (1 if cells[r][c] > cells[r][c + 1] else 0)
    return bits


def hash_similarity(a, b):
    return 1 - bin(a ^ b).count("1") / 64


def greedy_clusters(hashes, tau):
    reps, labels = [], []
    for h in hashes:
        found = None
        for k, r in enumerate(reps):
            if hash_similarity(h, r) >= tau:
                found = k
                break
        if found is None:
            reps.append(h)
            found = len(reps) - 1
        labels.append(found)
    return reps, labels


def campaign_keys(trajectories):
    seen, order = set(), []
    for traj in trajectories:
        obs = [traj.transitions[0].before] + [t.after for t in traj.transitions] if traj.transitions else []
        for o in obs:
            if o.key not in seen:
                seen.add(o.key)
                order.append(o)
    return order


def edge_recount(mapping, trajectories):
    undirected = set()
    for traj in trajectories:
        for rec in traj.transitions:
            a, b = mapping[rec.before.key], mapping[rec.after.key]
            if a != b:
                undirected.add(frozenset((a, b)))
    return undirected


def full_cosines(X, Y=None):
    X = np.asarray(X, dtype=float)
    Y = X if Y is None else np.asarray(Y, dtype=float)
    out = np.zeros((len(X), len(Y)))
    for i in range(len(X)):
        for j in range(len(Y)):
            out[i, j] = round(float(sum(float(a) * float(b) for a, b in zip(X[i], Y[j]))), ROUND)
    return out


def diversity_admit(C, order, threshold, eligible=None, limit=None):
    """Greedy admission on a precomputed cosine matrix ``C``."""
    kept = []
    for i in order:
        if eligible is not None and not eligible[i]:
            continue
        if all(C[i, j] < threshold for j in kept):
            kept.append(i)
            if limit is not None and len(kept) == limit:
                break
    return kept


def diversified_topk(vectors, ids, screens, query, k, exclude, threshold):
    C = full_cosines(vectors)
    sims = full_cosines(vectors, [query])[:, 0]
    order = sorted(range(len(ids)), key=lambda i: (-sims[i], ids[i]))
    eligible = [s not in exclude for s in screens]
    return [ids[i] for i in diversity_admit(C, order, threshold, eligible, k)]


def three_stage_filter(items, clarity_min, reason_min, threshold, cap):
    """``items``: (app, text, (complexity, clarity, reasonableness), vector)."""
    ok = [it for it in items if it[2][1] >= clarity_min and it[2][2] >= reason_min]
    ok.sort(key=lambda it: (-it[2][0], -it[2][1], -it[2][2], it[1]))
    C = full_cosines([it[3] for it in ok]) if ok else np.zeros((0, 0))
    kept = diversity_admit(C, range(len(ok)), threshold)
    per_app = {}
    for i in kept:
        per_app.setdefault(ok[i][0], [])
        if len(per_app[ok[i][0]]) < cap:
            per_app[ok[i][0]].append(ok[i][1])
    return per_app


def product_bfs_distance(spec, state, goal, apply_action):
    """Shortest action count over (screen, goal-field values) by stepping the real env.

    Moves are clicks on every interactable element except back buttons and
    typing the required value into goal inputs.
    """
    from agent_forge.exceptions import InvalidActionError
    from agent_forge.sim.env import ActionCommand, EnvState

    req = dict(goal.required_data)

    def key(s):
        vals = s.values
        return s.current_screen, tuple(vals.get(k) == v for k, v in sorted(req.items()))

    def done(s):
        if goal.target_screen is not None and s.current_screen != goal.target_screen:
            return False
        vals = s.values
        return all(vals.get(k) == v for k, v in req.items())

    start = EnvState(state.current_screen, state.data, (), False)
    seen = {key(start)}
    queue = deque([(start, 0)])
    while queue:
        s, d = queue.popleft()
        if done(s):
            return d
        screen = spec.screen(s.current_screen)
        for el in screen.elements:
            if not el.interactable or el.kind == "back":
                continue
            actions = [ActionCommand.click(el.element_id)]
            if el.kind == "input" and el.field in req:
                actions.append(ActionCommand.type_text(el.element_id, req[el.field]))
            for a in actions:
                try:
                    nxt = apply_action(spec, s, a)
                except InvalidActionError:
                    continue
                nxt = EnvState(nxt.current_screen, nxt.data, (), False)
                if key(nxt) not in seen:
                    seen.add(key(nxt))
                    queue.append((nxt, d + 1))
    return None


def undirected_reachable(spec):
    adj = {s.screen_id: set() for s in spec.screens}
    for s in spec.screens:
        for e in s.elements:
            if e.kind == "nav":
                adj[s.screen_id].add(e.target)
                adj[e.target].add(s.screen_id)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen
