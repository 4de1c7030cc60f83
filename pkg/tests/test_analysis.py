import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from agent_forge.analysis import (
    AtomicFunctionality,
    CoverageAnalyzer,
    OverlapAnalyzer,
    SimilarityReport,
    coverage,
    coverage_curve,
    decompose_task,
    fraction_above,
    histogram,
    load_corpus,
    overlap_report,
    removal_count,
    removal_subsets,
    write_coverage,
    write_overlap,
)
from agent_forge.exceptions import ValidationError
from agent_forge.providers import HashingEmbedder, MockBackend, ScriptedBackend


class OneHotEmbedder:
    """Each distinct text gets its own axis, so distinct texts are orthogonal."""

    def __init__(self, dim=64):
        self.dim = dim
        self.axes = {}

    def embed_texts(self, texts):
        out = np.zeros((len(texts), self.dim))
        for i, t in enumerate(texts):
            out[i, self.axes.setdefault(t, len(self.axes))] = 1.0
        return out


WORDS = ("open", "close", "set", "alarm", "timer", "note", "share", "photo", "album", "rename",
         "delete", "archive", "mute", "volume", "brightness", "contact", "message", "reply", "star", "sort")


def _sentences(n, seed, length=5):
    rng = np.random.default_rng(seed)
    return [" ".join(rng.choice(WORDS, size=length)) + f" q{seed}x{i}" for i in range(n)]


def _func(text, emb=HashingEmbedder()):
    return AtomicFunctionality(text, emb.embed_texts([text])[0])


class TestFractionAbove:
    def test_identical_sets(self):
        texts = ["open the alarm tab", "rename the album", "mute notifications"]
        rep = overlap_report(texts, texts, HashingEmbedder())
        assert rep.fraction_above[0.7] == 1.0

    def test_constructed_scores(self):
        assert fraction_above([0.9, 0.5, 0.6, 0.71], 0.7) == 0.5

    def test_strict_threshold(self):
        assert fraction_above([0.7, 0.7], 0.7) == 0.0

    @given(st.lists(st.floats(-1, 1), min_size=1, max_size=40), st.floats(0, 1), st.floats(0, 1))
    def test_non_increasing_in_threshold(self, scores, a, b):
        lo, hi = sorted((a, b))
        assert fraction_above(scores, hi) <= fraction_above(scores, lo)


class TestOverlapReport:
    def test_matrix_matches_pairwise_oracle(self):
        syn, test = _sentences(40, 1), _sentences(15, 2)
        rep = overlap_report(syn, test, HashingEmbedder(), thresholds=(0.3, 0.5, 0.7))
        S = np.array([oracles.hashing_embed(t) for t in syn])
        T = np.array([oracles.hashing_embed(t) for t in test])
        expected = oracles.full_cosines(S, T)
        assert rep.matrix.shape == (40, 15)
        assert np.allclose(rep.matrix, expected, atol=1e-9)
        best = expected.max(axis=1)
        assert np.allclose(rep.max_scores, best, atol=1e-9)
        for t in (0.3, 0.5, 0.7):
            assert rep.fraction_above[t] == pytest.approx(float(np.mean(best > t)))
        assert sum(rep.histogram) == 40 and len(rep.histogram) == 20
        assert len(rep.top_pairs) == 20
        assert [p[2] for p in rep.top_pairs] == sorted((p[2] for p in rep.top_pairs), reverse=True)

    def test_orthogonal_disjoint_corpora(self):
        rep = overlap_report(["a", "b", "c"], ["d", "e"], OneHotEmbedder(), thresholds=(0.01, 0.5, 0.99))
        assert all(v == 0.0 for v in rep.fraction_above.values())

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValidationError):
            overlap_report([], ["x"], HashingEmbedder())

    def test_embedding_failure_aborts(self):
        class Broken:
            def embed_texts(self, texts):
                raise RuntimeError("embedding service down")

        with pytest.raises(RuntimeError):
            overlap_report(["a"], ["b"], Broken())

    def test_histogram_bins(self):
        assert histogram(np.array([0.0, 0.05, 0.99, 1.0, -0.3])) == [2, 1] + [0] * 17 + [2]

    def test_estimator_and_files(self, tmp_path):
        syn, test = _sentences(12, 3), _sentences(5, 4)
        est = OverlapAnalyzer(HashingEmbedder()).fit(syn, test)
        assert np.allclose(est.transform(), overlap_report(syn, test, HashingEmbedder()).max_scores)
        write_overlap(est.report_, tmp_path, removal_subsets(syn, est.report_, (0.25,)))
        data = json.loads((tmp_path / "overlap.json").read_text())
        assert len(data["removal_subsets"]["0.25"]["random_removed"]) == 9
        assert (tmp_path / "overlap_pairs.csv").read_text().count("\n") == 13
        assert (tmp_path / "overlap_histogram.csv").read_text().count("\n") == 21

    def test_load_corpus(self, tmp_path):
        (tmp_path / "a.txt").write_text("first\n\nsecond\n")
        (tmp_path / "b.jsonl").write_text('{"id": "x", "text": "one"}\n')
        assert load_corpus(tmp_path / "a.txt") == ["first", "second"]
        assert load_corpus(tmp_path / "b.jsonl") == [{"id": "x", "text": "one"}]


class TestRemoval:
    def test_zero_removal_keeps_everything(self):
        rep = SimilarityReport([], ["t"], np.zeros((0, 1)), [], [0] * 20, {}, [])
        assert removal_count(0.3, 0) == 0
        assert removal_subsets([], rep, (0.3,)) == {0.3: {"most_similar_removed": [], "random_removed": []}}

    def test_counts_r01_n100(self):
        syn, test = _sentences(100, 7), _sentences(10, 8)
        rep = overlap_report(syn, test, HashingEmbedder())
        subsets = removal_subsets(syn, rep, seed=3)
        assert len(subsets[0.1]["most_similar_removed"]) == 90
        assert len(subsets[0.1]["random_removed"]) == 90
        for r, parts in subsets.items():
            assert len(parts["most_similar_removed"]) == len(parts["random_removed"]) == 100 - math.ceil(r * 100)

    def test_planted_duplicates_removed_first(self):
        test = _sentences(10, 9)
        syn = _sentences(90, 10) + test
        ids = [{"id": f"s{i:03d}", "text": t} for i, t in enumerate(syn)]
        rep = overlap_report(ids, test, HashingEmbedder())
        kept = removal_subsets(ids, rep, (0.1,), seed=0)[0.1]["most_similar_removed"]
        assert {d["text"] for d in ids} - {d["text"] for d in kept} == set(test)

    def test_random_control_is_seeded(self):
        syn = _sentences(30, 11)
        rep = overlap_report(syn, _sentences(4, 12), HashingEmbedder())
        a = removal_subsets(syn, rep, (0.2,), seed=1)[0.2]["random_removed"]
        b = removal_subsets(syn, rep, (0.2,), seed=1)[0.2]["random_removed"]
        assert a == b
        assert [t for t in syn if t in set(a)] == a

    @pytest.mark.parametrize("ratio", [0.0, 1.0, -0.1])
    def test_bad_ratio(self, ratio):
        syn = _sentences(4, 13)
        rep = overlap_report(syn, ["x"], HashingEmbedder())
        with pytest.raises(ValidationError):
            removal_subsets(syn, rep, (ratio,))

    def test_mismatched_report(self):
        rep = overlap_report(["a b"], ["c"], HashingEmbedder())
        with pytest.raises(ValidationError):
            removal_subsets(["x", "y"], rep)

    @settings(max_examples=50)
    @given(st.integers(0, 300), st.sampled_from([0.1, 0.2, 0.3, 0.4, 0.7]))
    def test_count_matches_exact_ceiling(self, n, r):
        from fractions import Fraction

        assert removal_count(r, n) == math.ceil(Fraction(str(r)) * n)


class TestDecompose:
    def test_worked_calendar_example(self):
        phrases = ["create calendar event", "set date", "set title", "set start time"]
        out = decompose_task("Create a calendar event titled Meeting with Team for tomorrow at 10am",
                             ScriptedBackend([json.dumps(phrases)]), HashingEmbedder())
        assert [f.text for f in out] == phrases
        assert all(f.embedding is not None and np.isclose(np.linalg.norm(f.embedding), 1) for f in out)

    def test_mock_clause_split(self):
        text = "In Clock, open the alarm tab and set the label to Gym, then turn on Vibrate"
        a = decompose_task(text, MockBackend(0))
        b = decompose_task(text, MockBackend(5))
        assert [f.text for f in a] == ["open the alarm tab", "set the label to gym", "turn on vibrate"]
        assert [f.text for f in a] == [f.text for f in b]

    @pytest.mark.parametrize("reply", ["[]", "not json"])
    def test_empty_output_flagged(self, reply, caplog):
        assert decompose_task("do something", ScriptedBackend([reply])) == []
        assert caplog.records

    def test_empty_text_rejected(self):
        with pytest.raises(ValidationError):
            decompose_task("  ", MockBackend())


class TestCoverage:
    def test_superset_pool(self):
        req = [[_func("set date"), _func("set title")], [_func("open settings")]]
        pool = [_func(t) for t in ("open settings", "set title", "set date", "share photo")]
        res = coverage(req, pool)
        assert res.per_task == [1.0, 1.0] and res.aggregate == 1.0

    def test_empty_pool(self):
        res = coverage([[_func("set date")]], [])
        assert res.aggregate == 0.0 and res.per_task == [0.0]

    def test_empty_task_skipped_and_flagged(self):
        res = coverage([[], [_func("set date")]], [_func("set date")])
        assert res.per_task == [None, 1.0] and res.flagged == [0] and res.aggregate == 1.0

    def test_threshold_validated(self):
        with pytest.raises(ValidationError):
            coverage([[_func("a")]], [], match_threshold=1.5)

    def test_thirty_tasks_match_oracle(self, memories3, providers):
        from agent_forge.synthesis import synthesize_candidates

        texts = [c.text for mem in memories3.values() for c in synthesize_candidates(mem, providers, seed=0)][:30]
        assert len(texts) == 30
        mock = providers.generator
        required = [decompose_task(t, mock, providers.embedder) for t in texts]
        pool_texts = [f.text for r in required[::2] for f in r] + ["toggle wifi", "archive note"]
        pool = [_func(t) for t in pool_texts]
        res = coverage(required, pool, 0.8)
        P = np.array([oracles.hashing_embed(t) for t in pool_texts])
        expected = []
        for req in required:
            R = np.array([oracles.hashing_embed(f.text) for f in req])
            expected.append(float(np.mean((oracles.full_cosines(R, P) >= 0.8).any(axis=1))))
        assert res.per_task == pytest.approx(expected)
        assert res.aggregate == pytest.approx(np.mean(expected))
        assert sum(map(sum, res.grid)) == 30
        for k, row in enumerate(res.grid, start=1):
            assert sum(row) == sum(1 for r in required if len(r) == k)

    def test_estimator(self, providers):
        tests = ["open the alarm tab and set the label to gym", "rename the album, then share it"]
        syn = ["open the alarm tab", "rename the album"]
        est = CoverageAnalyzer(providers.generator, providers.embedder).fit(tests)
        assert est.score(syn) == pytest.approx(0.5)

    def test_write(self, tmp_path):
        res = coverage([[_func("set date"), _func("x")]], [_func("set date")])
        write_coverage(res, tmp_path, [(1, 0.5)])
        data = json.loads((tmp_path / "coverage.json").read_text())
        assert data["aggregate"] == 0.5 and data["curve"] == [[1, 0.5]]
        assert (tmp_path / "coverage_grid.csv").read_text().splitlines()[2] == "2,0,0,1,0,0"


class TestCurve:
    def _setup(self, providers):
        tests = _sentences(8, 20, length=3)
        required = [decompose_task(t, providers.generator, providers.embedder) for t in tests]
        words = [" ".join(t.split()[:3]) for t in tests]
        instructions = [f"{w}, then {v}" for w, v in zip(_sentences(40, 21, length=3), words * 5)]
        return instructions, required

    def test_single_full_size(self, providers):
        instructions, required = self._setup(providers)
        curve = coverage_curve(instructions, [40], required, providers.generator, providers.embedder)
        pool = [f for t in instructions for f in decompose_task(t, providers.generator, providers.embedder)]
        assert curve == [(40, coverage(required, pool).aggregate)]

    def test_prefixes_monotone_and_recomputed(self, providers):
        instructions, required = self._setup(providers)
        curve = coverage_curve(instructions, [0, 1, 3, 10, 20, 40], required,
                               providers.generator, providers.embedder)
        values = [v for _, v in curve]
        assert values == sorted(values)
        assert values[-1] > 0
        for k, v in curve:
            pool = [f for t in instructions[:k] for f in decompose_task(t, providers.generator, providers.embedder)]
            assert v == coverage(required, pool).aggregate

    def test_sizes_must_increase(self, providers):
        with pytest.raises(ValidationError):
            coverage_curve(["a"], [2, 1], [], providers.generator, providers.embedder)
