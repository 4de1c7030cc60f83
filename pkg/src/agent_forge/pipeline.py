"""Pipeline stages over an output root, with manifests and digest-based resume.

Layout under the output root::

    environment/{app}.json          app specs used by every later stage
    exploration/{app}/session_*.jsonl
    renders/, observations/         content-addressed observation store
    memory/{app}/                   environment memory
    instructions/{app}.jsonl        filtered instructions
    trajectories/{strategy}/{task_id}.json
    training/{strategy}.jsonl       fine-tuning export
    analysis/{overlap,coverage}/    reports (JSON + CSV)
    manifests/{stage}.json          config digest, seeds, artifact counts
    logs/{stage}.json               wall-clock timings (not reproducible)
"""

import logging
import random
import shutil
import time
from pathlib import Path

from .analysis import (
    coverage,
    coverage_curve,
    decompose_task,
    load_corpus,
    overlap_report,
    removal_subsets,
    write_coverage,
    write_overlap,
)
from .exceptions import PrerequisiteError, ValidationError
from .explorer import load_trajectories as load_exploration
from .explorer import run_campaign, save_trajectories
from .memory import build_memory, list_memories, load_memory, save_memory
from .providers.bundle import ProviderBundle
from .rollout import (
    build_tasks,
    chat_policies,
    count_interventions,
    extract_training_samples,
    load_trajectories,
    rewrite_thoughts,
    run_strategy,
    save_trajectory,
    sim_policies,
    write_training_jsonl,
)
from .sim.goals import set_clause, toggle_clause
from .sim.spec import LEXICON, generate_suite, load_spec, save_spec
from .store import read_json, write_json
from .synthesis import filter_instructions, load_instructions, save_instructions, synthesize_candidates

logger = logging.getLogger(__name__)

# stage -> (config sections its output depends on, upstream stage)
STAGES = {
    "explore": (("environment", "explore"), None),
    "build-memory": (("environment", "explore", "memory", "providers"), "explore"),
    "synthesize": (("environment", "explore", "memory", "providers", "synthesize"), "build-memory"),
    "rollout": (("environment", "explore", "memory", "providers", "synthesize", "rollout"), "synthesize"),
    "export-training": (("environment", "explore", "memory", "providers", "synthesize", "rollout"),
                        "rollout"),
    "analyze-overlap": (("environment", "explore", "memory", "providers", "synthesize", "analyze"),
                        "synthesize"),
    "analyze-coverage": (("environment", "explore", "memory", "providers", "synthesize", "analyze"),
                         "synthesize"),
}

COMMAND_OF = {"explore": "explore", "build-memory": "build-memory", "synthesize": "synthesize",
              "rollout": "rollout", "export-training": "export-training",
              "analyze-overlap": "analyze overlap", "analyze-coverage": "analyze coverage"}


class Pipeline:
    """Runs stages of one config against its output root."""

    def __init__(self, config, jobs=1, force=False):
        self.config = config
        self.root = Path(config.output)
        self.jobs = max(1, int(jobs))
        self.force = force
        self._providers = None

    # --- bookkeeping ------------------------------------------------------
    @property
    def providers(self):
        if self._providers is None:
            p = self.config.providers
            settings = {"backend": p.backend, "seed": p.seed, "dim": p.dim, "models": p.models,
                        "base_url": p.base_url or None, "temperature": p.temperature}
            self._providers = ProviderBundle.from_settings(settings)
        return self._providers

    def manifest_name(self, stage, strategy=None):
        return f"{stage}-{strategy}" if strategy else stage

    def manifest_path(self, name):
        return self.root / "manifests" / f"{name}.json"

    def read_manifest(self, name):
        path = self.manifest_path(name)
        return read_json(path) if path.exists() else None

    def digest(self, stage):
        return self.config.section_digest(*STAGES[stage][0])

    def require(self, stage, strategy=None):
        name = self.manifest_name(stage, strategy)
        if self.read_manifest(name) is None:
            cmd = COMMAND_OF[stage] + (f" --strategy {strategy}" if strategy else "")
            raise PrerequisiteError(
                f"no completed '{name}' stage under {self.root}; run `agent-forge {cmd}` first")

    def run_stage(self, stage, body, outputs, strategy=None):
        """Run ``body`` unless an up-to-date manifest exists.

        Returns ``(manifest, ran)``. A manifest with a different config
        digest blocks the run unless ``force`` is set; forced runs delete
        the stage's previous ``outputs`` first.
        """
        upstream = STAGES[stage][1]
        if upstream is not None:
            self.require(upstream, strategy if upstream == "rollout" else None)
        name = self.manifest_name(stage, strategy)
        digest = self.digest(stage)
        existing = self.read_manifest(name)
        if existing is not None and not self.force:
            if existing.get("config_digest") == digest:
                logger.info("%s is up to date", name)
                return existing, False
            raise ValidationError(
                f"outputs of '{name}' were produced with a different config; pass --force to overwrite")
        for out in outputs:
            target = self.root / out
            if target.is_dir():
                shutil.rmtree(target)
            elif target.exists():
                target.unlink()
        start = time.perf_counter()
        counts = body()
        elapsed = time.perf_counter() - start
        manifest = {"stage": name, "config_digest": digest, "seeds": self.seeds(stage),
                    "counts": counts}
        write_json(self.root / "logs" / f"{name}.json", {"stage": name, "seconds": round(elapsed, 3)})
        write_json(self.manifest_path(name), manifest)
        return manifest, True

    def seeds(self, stage):
        cfg = self.config
        out = {"global": cfg.seed, "providers": cfg.providers.seed}
        if stage.startswith("rollout") or stage == "export-training":
            out["learner"] = cfg.seed
        return out

    # --- shared loaders ---------------------------------------------------
    def specs(self):
        base = self.root / "environment"
        return [load_spec(p) for p in sorted(base.glob("*.json"))]

    def _make_specs(self):
        env = self.config.environment
        if env.spec_dir:
            specs = [load_spec(p) for p in sorted(Path(env.spec_dir).glob("*.json"))]
            if not specs:
                raise ValidationError("no app specs found", field="environment.spec_dir")
            return specs
        return generate_suite(env.apps, env.screens, env.elements_per_screen, env.fields, self.config.seed)

    # --- stages -----------------------------------------------------------
    def explore(self):
        def body():
            specs = self._make_specs()
            for spec in specs:
                save_spec(spec, self.root / "environment")
            ex = self.config.explore
            trajs = run_campaign(specs, ex.sessions, self.config.seed, ex.steps, self.jobs)
            save_trajectories(trajs, self.root)
            return {"apps": len(specs), "trajectories": len(trajs),
                    "transitions": sum(len(t.transitions) for t in trajs)}

        return self.run_stage("explore", body, ["environment", "exploration"])

    def build_memory(self):
        def body():
            groups = {}
            for t in load_exploration(self.root):
                groups.setdefault(t.app_name, []).append(t)
            m = self.config.memory
            counts = {"apps": 0, "screens": 0, "functionalities": 0, "indexed": 0, "flagged": 0}
            for app in sorted(groups):
                mem = build_memory(groups[app], self.providers, m.tau, m.diversity_threshold, self.jobs)
                save_memory(mem, self.root)
                counts["apps"] += 1
                counts["screens"] += len(mem.nodes)
                counts["functionalities"] += len(mem.functionalities)
                counts["indexed"] += len(mem.index)
                counts["flagged"] += sum(n.flagged for n in mem.nodes)
            return counts

        return self.run_stage("build-memory", body, ["memory"])

    def synthesize(self):
        def body():
            s = self.config.synthesize
            candidates = []
            for app in list_memories(self.root):
                mem = load_memory(self.root, app)
                candidates.extend(synthesize_candidates(mem, self.providers, self.config.seed,
                                                        s.contexts_per_node, s.k, self.jobs))
            if not candidates:
                raise ValidationError("the generator produced no candidate instructions")
            kept = filter_instructions(candidates, self.providers.embedder, self.providers.generator,
                                       s.clarity_min, s.reason_min, s.dedup_threshold, s.per_app_cap,
                                       self.jobs)
            save_instructions(kept, self.root)
            per_app = {}
            for ins in kept:
                per_app[ins.app] = per_app.get(ins.app, 0) + 1
            return {"candidates": len(candidates), "instructions": len(kept), "per_app": per_app}

        return self.run_stage("synthesize", body, ["instructions"])

    def _policies(self, specs):
        if self.providers.kind == "mock":
            return sim_policies(specs, self.config.rollout.epsilon, self.config.seed)
        return chat_policies(self.providers)

    def rollout(self, strategy=None):
        r = self.config.rollout
        strategy = strategy or r.strategy

        def body():
            specs = self.specs()
            tasks = build_tasks(load_instructions(self.root), specs)
            trajs = run_strategy(strategy, tasks, specs, self._policies(specs), self.config.seed, r.p,
                                 r.max_interventions, r.min_expert_steps, r.max_steps, r.rounds, self.jobs)
            for t in trajs:
                save_trajectory(t, self.root)
            retained = [t for t in trajs if t.retained]
            mean_iv = sum(count_interventions(t) for t in trajs) / len(trajs) if trajs else 0.0
            return {"tasks": len(tasks), "trajectories": len(trajs), "retained": len(retained),
                    "mean_interventions": round(mean_iv, 6)}

        return self.run_stage("rollout", body, [f"trajectories/{strategy}"], strategy)

    def export_training(self, strategy=None):
        strategy = strategy or self.config.rollout.strategy

        def body():
            samples = []
            kept = 0
            for traj in load_trajectories(self.root, strategy):
                if not traj.retained:
                    continue
                kept += 1
                samples.extend(extract_training_samples(rewrite_thoughts(traj, self.providers.generator)))
            write_training_jsonl(samples, self.root / "training" / f"{strategy}.jsonl")
            return {"trajectories": kept, "samples": len(samples)}

        return self.run_stage("export-training", body, [f"training/{strategy}.jsonl"], strategy)

    def test_corpus(self):
        """The analysis test set: a corpus file, or held-out tasks composed from the app specs."""
        a = self.config.analyze
        if a.test_corpus:
            return load_corpus(a.test_corpus)
        return heldout_tasks(self.specs(), a.heldout_tasks, self.config.seed)

    def analyze_overlap(self):
        def body():
            a = self.config.analyze
            synthetic = load_instructions(self.root)
            report = overlap_report(synthetic, self.test_corpus(), self.providers.embedder, a.thresholds)
            subsets = removal_subsets(synthetic, report, a.ratios, self.config.seed)
            write_overlap(report, self.root / "analysis" / "overlap", subsets)
            return {"synthetic": len(synthetic), "test": len(report.test_ids),
                    "fraction_above": {f"{t:g}": v for t, v in report.fraction_above.items()}}

        return self.run_stage("analyze-overlap", body, ["analysis/overlap"])

    def analyze_coverage(self):
        def body():
            a = self.config.analyze
            p = self.providers
            synthetic = load_instructions(self.root)
            test = [t if isinstance(t, str) else t["text"] for t in self.test_corpus()]
            required = [decompose_task(t, p.generator, p.embedder) for t in test]
            pool = [f for ins in synthetic for f in decompose_task(ins.text, p.generator, p.embedder)]
            result = coverage(required, pool, a.match_threshold)
            curve = None
            if a.curve_sizes:
                curve = coverage_curve(synthetic, a.curve_sizes, required, p.generator, p.embedder,
                                       a.match_threshold)
            write_coverage(result, self.root / "analysis" / "coverage", curve)
            return {"tasks": len(test), "flagged": len(result.flagged),
                    "aggregate": round(result.aggregate, 6)}

        return self.run_stage("analyze-coverage", body, ["analysis/coverage"])


def heldout_tasks(specs, n, seed=0):
    """``n`` instructions composed directly from the specs' data fields.

    They follow the same clause grammar as synthesized tasks but are drawn
    independently of exploration, standing in for an external test set.
    """
    rng = random.Random(f"heldout:{seed}")
    out = []
    usable = [s for s in specs if s.field_elements]
    if not usable:
        raise ValidationError("apps have no data fields to build held-out tasks from",
                              field="analyze.test_corpus")
    for i in range(n):
        spec = usable[i % len(usable)]
        names = rng.sample(sorted(spec.field_elements), min(len(spec.field_elements), rng.randint(1, 3)))
        clauses = []
        for name in names:
            _, el = spec.field_elements[name]
            if el.kind == "toggle":
                clauses.append(toggle_clause(el.label, rng.random() < 0.5))
            else:
                clauses.append(set_clause(el.label, rng.choice(LEXICON)))
        body = clauses[0] if len(clauses) == 1 else ", ".join(clauses[:-1]) + " and " + clauses[-1]
        out.append({"id": f"test-{i:04d}", "text": f"In {spec.app_name}, {body}."})
    return out
