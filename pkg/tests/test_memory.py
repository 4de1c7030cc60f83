import dataclasses
import filecmp
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import unit_rows
from agent_forge.exceptions import ProviderError, ValidationError
from agent_forge.explorer import ExplorationTrajectory, random_walk, run_campaign
from agent_forge.memory import (
    DHashTransformer,
    DiversityFilter,
    Functionality,
    MemoryBuilder,
    RetrievalIndex,
    ScreenDeduplicator,
    annotate_screen,
    build_index,
    build_memories,
    build_memory,
    build_neighborhood,
    dedup_screens,
    diversity_filter,
    find_predecessor,
    list_memories,
    load_memory,
    phash,
    phash_similarity,
    read_matrix,
    retrieve_related,
    save_memory,
    write_matrix,
)
from agent_forge.memory.dedup import ScreenNode
from agent_forge.providers import HashingEmbedder, MockBackend, ProviderBundle, ScriptedBackend
from agent_forge.sim import ActionCommand, SimAppSpec, SimEnvironment, SimScreenSpec, UiElement, generate_app, reset


class RowEmbedder:
    """Returns preset vectors looked up by text."""

    def __init__(self, table):
        self.table = table
        self.dim = len(next(iter(table.values())))

    def embed_texts(self, texts):
        return np.array([self.table[t] for t in texts], dtype=float)


def _chain_app(n):
    screens = []
    for i in range(n):
        els = [UiElement(0, "nav", f"Next page {i}", True, min(i + 1, n - 1))]
        if i:
            els.append(UiElement(1, "nav", f"Up to page {i - 1}", True, i - 1))
        els += [UiElement(2 + j, "terminal", f"{'wxyz'[j]}{i * 7 + j} item {'k' * (i % 4)}", True)
                for j in range(i % 3 + 1)]
        screens.append(SimScreenSpec(i, f"Page {i} {'X' * i}", tuple(els)))
    return SimAppSpec("Chain", tuple(screens), (), 0)


def _walk(spec, actions):
    env = SimEnvironment(spec)
    env.reset()
    traj = ExplorationTrajectory(spec.app_name, 0, 0)
    for a in actions:
        traj.transitions.append(env.step(a))
    return traj


class TestPHash:
    def test_constant_grid_is_zero(self):
        assert phash(np.full((160, 96), 77, dtype=np.uint8)) == 0

    def test_render_matches_pixel_oracle(self, campaign3):
        obs = [o for t in campaign3[:6] for o in t.observations()][:25]
        for o in obs:
            assert phash(o.render) == oracles.dhash(o.render)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(8, 40), st.integers(9, 40), st.integers(0, 2**32 - 1))
    def test_random_grid_matches_oracle(self, h, w, seed):
        grid = np.random.default_rng(seed).integers(0, 256, size=(h, w), dtype=np.uint8)
        assert phash(grid) == oracles.dhash(grid)

    def test_similarity_examples(self):
        h = 0x0123456789ABCDEF
        assert phash_similarity(h, h) == 1.0
        assert phash_similarity(h, h ^ 0b10101) == 0.953125
        assert phash_similarity(h, h ^ ((1 << 64) - 1)) == 0.0

    def test_transformer(self, small_app):
        grid = reset(small_app).render
        assert list(DHashTransformer().fit_transform([grid, grid])) == [phash(grid)] * 2


class TestDedup:
    def test_identical_renders_one_node(self, small_app):
        obs = reset(small_app)
        ded = ScreenDeduplicator(0.95).fit([obs.render] * 4)
        assert ded.labels_.tolist() == [0, 0, 0, 0]

    def test_below_threshold_splits(self):
        a = 0
        b = (1 << 7) - 1  # 7 differing bits -> 0.890625
        ded = ScreenDeduplicator(0.95).fit([a, b])
        assert ded.labels_.tolist() == [0, 1]
        assert ded.predict([b, 1]).tolist() == [1, 0]

    def test_tau_range(self):
        with pytest.raises(ValidationError):
            dedup_screens([], tau=0.0)

    def test_matches_greedy_oracle(self, campaign3):
        trajs = [t for t in campaign3 if t.app_name == campaign3[0].app_name]
        nodes, mapping = dedup_screens(trajs, 0.95)
        order = oracles.campaign_keys(trajs)
        reps, labels = oracles.greedy_clusters([oracles.dhash(o.render) for o in order], 0.95)
        assert len(nodes) == len(reps)
        assert [mapping[o.key] for o in order] == labels
        assert sum(len(n.members) for n in nodes) == len(order)
        for n in nodes:
            assert n.representative.key == n.members[0]

    def test_states_of_one_screen_collapse(self, small_app):
        trajs = run_campaign([small_app], 40, base_seed=0)
        nodes, _ = dedup_screens(trajs)
        visited = {o.screen_id for t in trajs for o in t.observations()}
        assert len(nodes) == len(visited)


class TestNeighborhood:
    def test_single_transition(self):
        spec = _chain_app(3)
        traj = _walk(spec, [_click(0)])
        nodes, mapping = dedup_screens([traj])
        nb = build_neighborhood(nodes, mapping, [traj])
        assert nb == {0: {1}, 1: {0}}

    def test_self_loop_dropped(self):
        spec = _chain_app(3)
        traj = _walk(spec, [_click(2)])  # dead button: same screen
        nodes, mapping = dedup_screens([traj])
        assert build_neighborhood(nodes, mapping, [traj]) == {0: set()}

    def test_matches_recount(self, campaign3):
        trajs = [t for t in campaign3 if t.app_name == campaign3[1].app_name]
        nodes, mapping = dedup_screens(trajs)
        nb = build_neighborhood(nodes, mapping, trajs)
        expected = oracles.edge_recount(mapping, trajs)
        got = {frozenset((a, b)) for a, ns in nb.items() for b in ns}
        assert got == expected
        for a, ns in nb.items():
            assert a not in ns
            assert all(a in nb[b] for b in ns)


def _click(i):
    return ActionCommand.click(i)


class TestAnnotate:
    def _node(self, spec, screen_id=0):
        obs = reset(spec)
        return ScreenNode(screen_id, obs, phash(obs.render), [obs.key])

    def test_mock_mirrors_spec(self):
        spec = SimAppSpec("Demo", (
            SimScreenSpec(0, "Home", (UiElement(0, "nav", "Open Settings", True, 1),
                                      UiElement(1, "toggle", "Wifi", True, None, "wifi"),
                                      UiElement(2, "input", "Nickname", True, None, "nick"))),
            SimScreenSpec(1, "Settings", (UiElement(0, "nav", "Up to Home", True, 0),)),
        ), (("nick", "ember"), ("wifi", True)), 0)
        funcs = annotate_screen(self._node(spec), None, "Demo", MockBackend(0))
        assert [f.label for f in funcs] == ["Open Settings", "Wifi", "Nickname"]
        assert all(f.screen_id == 0 and f.description for f in funcs)

    def test_empty_screen(self, small_app):
        node = self._node(small_app)
        node.representative = dataclasses.replace(node.representative, a11y=())
        assert annotate_screen(node, None, "Notes", MockBackend(0)) == []
        assert not node.flagged

    def test_deterministic(self, small_app):
        a = annotate_screen(self._node(small_app), None, "Notes", MockBackend(0))
        b = annotate_screen(self._node(small_app), None, "Notes", MockBackend(0))
        assert a == b

    @pytest.mark.parametrize("reply", ["no list here", ProviderError("down")])
    def test_failure_flags_node(self, small_app, reply, caplog):
        node = self._node(small_app)
        assert annotate_screen(node, None, "Notes", ScriptedBackend([reply])) == []
        assert node.flagged and "skipped" in caplog.text

    def test_predecessor_context_marks_action(self):
        spec = _chain_app(3)
        traj = _walk(spec, [_click(0), _click(0)])
        nodes, mapping = dedup_screens([traj])
        before, action = find_predecessor(nodes[2], mapping, [traj])
        assert before.screen_id == 1 and action == _click(0)
        assert find_predecessor(nodes[0], mapping, [traj]) is None
        backend = ScriptedBackend(["[]"])
        annotate_screen(nodes[2], (before, action), "Chain", backend)
        req = backend.requests[0]
        images = [p for p in req.user_parts if getattr(p, "pixels", None) is not None]
        assert len(images) == 2
        assert not np.array_equal(images[0].pixels, before.render)


class TestIndex:
    def _funcs(self, X):
        return [Functionality(i, i // 3, "functionality", f"f{i}", f"text {i}") for i in range(len(X))], \
            RowEmbedder({f"text {i}": X[i] for i in range(len(X))})

    def test_duplicate_description_skipped(self):
        funcs = [Functionality(0, 0, "data", "a", "same words"), Functionality(1, 1, "data", "b", "same words")]
        index = build_index(funcs, HashingEmbedder())
        assert index.ids.tolist() == [0]
        assert funcs[1].embedding is not None and not funcs[1].indexed

    def test_orthogonal_all_admitted(self):
        funcs, emb = self._funcs(np.eye(6))
        assert build_index(funcs, emb).ids.tolist() == list(range(6))

    def test_fifty_entries_match_oracle(self):
        rng = np.random.default_rng(0)
        base = unit_rows(rng, 12, 8)
        X = np.array([base[rng.integers(12)] + 0.35 * rng.normal(size=8) for _ in range(50)])
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        funcs, emb = self._funcs(X)
        rng.shuffle(funcs)  # admission order is by (screen, id), not input order
        index = build_index(funcs, emb)
        X32 = X.astype(np.float32).astype(float)
        C = oracles.full_cosines(X32)
        expected = oracles.diversity_admit(C, range(50), 0.8)
        assert index.ids.tolist() == expected
        assert 10 < len(expected) < 50
        for i in index.ids:
            for j in index.ids:
                if i != j:
                    assert C[i, j] < 0.8

    def test_diversity_filter_estimator(self):
        X = np.array([[1, 0], [1, 0], [0, 1.0]])
        assert DiversityFilter(0.8).fit(X).get_support().tolist() == [0, 2]
        assert diversity_filter(X, 0.8) == [0, 2]

    def test_matrix_format(self, tmp_path):
        X = unit_rows(np.random.default_rng(1), 4, 5)
        path = write_matrix(tmp_path / "m.bin", X)
        blob = path.read_bytes()
        assert blob[:4] == b"AFIX" and len(blob) == 16 + 4 * 20
        assert np.allclose(read_matrix(path), X, atol=1e-7)
        path.write_bytes(b"NOPE" + blob[4:])
        with pytest.raises(ValidationError):
            read_matrix(path)


class TestRetrieve:
    def _index(self, n=200, d=16, seed=3):
        rng = np.random.default_rng(seed)
        centers = unit_rows(rng, 25, d)
        X = np.array([centers[rng.integers(25)] + 0.4 * rng.normal(size=d) for _ in range(n)])
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        return RetrievalIndex(np.arange(n), rng.integers(0, 20, size=n), X), rng

    def test_k_zero(self):
        index, _ = self._index(10)
        assert retrieve_related(index, index.vectors[0], k=0) == []

    def test_all_excluded(self):
        index = RetrievalIndex(np.arange(5), np.array([1, 1, 2, 2, 3]), np.eye(5))
        assert retrieve_related(index, np.eye(5)[0], 30, exclude={1, 2, 3}) == []

    def test_empty_index(self):
        index = RetrievalIndex(np.zeros(0, int), np.zeros(0, int), np.zeros((0, 4)))
        assert retrieve_related(index, np.ones(4) / 2, 5) == []

    def test_matches_exhaustive_scan(self):
        index, rng = self._index()
        for trial in range(5):
            q = unit_rows(rng, 1, 16)[0]
            exclude = set(rng.choice(20, size=4, replace=False).tolist())
            got = retrieve_related(index, q, 30, exclude)
            expected = oracles.diversified_topk(index.vectors, index.ids.tolist(),
                                                index.screen_ids.tolist(), q, 30, exclude, 0.8)
            assert got == expected
            assert not {int(index.screen_ids[i]) for i in got} & exclude


class TestBuildMemory:
    def test_empty_input(self, providers):
        with pytest.raises(ValidationError):
            build_memory([], providers)

    def test_mixed_apps_rejected(self, providers, campaign3):
        with pytest.raises(ValidationError):
            build_memory([campaign3[0], campaign3[-1]], providers)

    def test_chain_of_eleven(self, providers):
        spec = generate_app(30, 8, 12, seed=0)
        adj = {s.screen_id: [(e.element_id, e.target) for e in s.elements if e.kind == "nav"]
               for s in spec.screens}

        def simple_path(path, clicks):
            if len(path) == 11:
                return clicks
            for eid, nxt in adj[path[-1]]:
                if nxt not in path:
                    found = simple_path(path + [nxt], clicks + [eid])
                    if found:
                        return found
            return None

        traj = _walk(spec, [_click(e) for e in simple_path([0], [])])
        mem = build_memory([traj], providers)
        assert len(mem.nodes) == 11
        assert {n.node_id: n.neighbors for n in mem.nodes} == \
            {i: {j for j in (i - 1, i + 1) if 0 <= j < 11} for i in range(11)}

    def test_campaign_stages_match_oracles(self, campaign3, memories3):
        for app, mem in memories3.items():
            trajs = [t for t in campaign3 if t.app_name == app]
            order = oracles.campaign_keys(trajs)
            reps, labels = oracles.greedy_clusters([oracles.dhash(o.render) for o in order], 0.95)
            assert len(mem.nodes) == len(reps)
            mapping = {o.key: l for o, l in zip(order, labels)}
            got = {frozenset((a.node_id, b)) for a in mem.nodes for b in a.neighbors}
            assert got == oracles.edge_recount(mapping, trajs)
            funcs = sorted(mem.functionalities, key=lambda f: (f.screen_id, f.id))
            assert [f.id for f in mem.functionalities] == list(range(len(funcs)))
            X = np.array([f.embedding for f in funcs])
            assert np.allclose(np.linalg.norm(X, axis=1), 1, atol=1e-6)
            expected = oracles.diversity_admit(oracles.full_cosines(X), range(len(funcs)), 0.8)
            assert mem.index.ids.tolist() == [funcs[i].id for i in expected]

    def test_related_excludes_neighbourhood(self, memories3, providers):
        mem = next(iter(memories3.values()))
        for node in mem.nodes:
            related = mem.related(node.node_id, providers.embedder)
            banned = {node.node_id} | node.neighbors
            assert len(related) <= 30
            assert not {f.screen_id for f in related} & banned

    def test_query_vector_fallback(self, memories3, providers):
        mem = next(iter(memories3.values()))
        node = mem.nodes[0]
        saved = node.functionalities
        node.functionalities = []
        try:
            q = mem.query_vector(0, providers.embedder)
            assert np.allclose(q, providers.embedder.embed_texts([mem.app_name])[0])
        finally:
            node.functionalities = saved

    def test_parallel_annotation_same_result(self, campaign3, providers):
        trajs = [t for t in campaign3 if t.app_name == campaign3[0].app_name]
        a = build_memory(trajs, providers)
        b = build_memory(trajs, providers, jobs=3)
        assert [f.to_json() for f in a.functionalities] == [f.to_json() for f in b.functionalities]

    def test_rebuild_is_byte_identical(self, campaign3, tmp_path):
        for sub in ("a", "b"):
            for mem in build_memories(campaign3, ProviderBundle.mock(0)).values():
                save_memory(mem, tmp_path / sub)
        cmp = filecmp.dircmp(tmp_path / "a" / "memory", tmp_path / "b" / "memory")
        assert cmp.subdirs
        for name, sub in cmp.subdirs.items():
            assert not sub.diff_files and not sub.left_only and not sub.right_only
            _, mismatch, errors = filecmp.cmpfiles(sub.left, sub.right, sub.common_files, shallow=False)
            assert not mismatch and not errors

    def test_round_trip_retrieval(self, memories3, providers, tmp_path):
        for mem in memories3.values():
            save_memory(mem, tmp_path)
        assert list_memories(tmp_path) == sorted(memories3)
        for app, mem in memories3.items():
            back = load_memory(tmp_path, app)
            assert len(back.nodes) == len(mem.nodes)
            assert back.edges == mem.edges
            for node in mem.nodes:
                assert [f.id for f in back.related(node.node_id, providers.embedder)] == \
                    [f.id for f in mem.related(node.node_id, providers.embedder)]

    def test_estimator(self, campaign3, providers, memories3):
        with pytest.raises(ValidationError):
            MemoryBuilder().fit(campaign3)
        builder = MemoryBuilder(providers).fit(campaign3)
        assert sorted(builder.memories_) == sorted(memories3)
        assert builder.transform(campaign3[:1])[0].app_name == campaign3[0].app_name

    def test_random_walk_node_count_bounded(self, small_app, providers):
        traj = random_walk(SimEnvironment(small_app), 10, seed=random.Random(0).randrange(100))
        mem = build_memory([traj], providers)
        assert 1 <= len(mem.nodes) <= 11
