"""Pipeline configuration: one versioned TOML file with a section per stage.

Every tunable constant of the pipeline has its default here. Unknown keys
and out-of-range values are rejected with the dotted path of the offending
entry (``memory.tau``, ``rollout.p`` ...).
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Dict, List

import tomli

from ._validation import check_int, check_probability, check_threshold
from .exceptions import ValidationError
from .rollout.types import STRATEGIES

CONFIG_VERSION = 1


@dataclass(frozen=True)
class ProviderSettings:
    backend: str = "mock"
    seed: int = 0
    dim: int = 256
    base_url: str = ""
    temperature: float = 0.0
    models: Dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class EnvironmentSettings:
    apps: int = 3
    screens: int = 30
    elements_per_screen: int = 8
    fields: int = 16
    spec_dir: str = ""


@dataclass(frozen=True)
class ExploreSettings:
    sessions: int = 50
    steps: int = 10


@dataclass(frozen=True)
class MemorySettings:
    tau: float = 0.95
    diversity_threshold: float = 0.8


@dataclass(frozen=True)
class SynthesizeSettings:
    contexts_per_node: int = 1
    k: int = 30
    clarity_min: int = 4
    reason_min: int = 4
    dedup_threshold: float = 0.8
    per_app_cap: int = 140


@dataclass(frozen=True)
class RolloutSettings:
    strategy: str = "error-intervention"
    epsilon: float = 0.3
    p: float = 0.5
    max_interventions: int = 2
    min_expert_steps: int = 3
    max_steps: int = 30
    rounds: int = 3


@dataclass(frozen=True)
class AnalyzeSettings:
    test_corpus: str = ""
    heldout_tasks: int = 30
    thresholds: List[float] = field(default_factory=lambda: [0.7])
    ratios: List[float] = field(default_factory=lambda: [0.1, 0.2, 0.4])
    match_threshold: float = 0.8
    curve_sizes: List[int] = field(default_factory=list)


@dataclass(frozen=True)
class PipelineConfig:
    version: int = CONFIG_VERSION
    seed: int = 0
    output: str = "agent_forge_run"
    providers: ProviderSettings = field(default_factory=ProviderSettings)
    environment: EnvironmentSettings = field(default_factory=EnvironmentSettings)
    explore: ExploreSettings = field(default_factory=ExploreSettings)
    memory: MemorySettings = field(default_factory=MemorySettings)
    synthesize: SynthesizeSettings = field(default_factory=SynthesizeSettings)
    rollout: RolloutSettings = field(default_factory=RolloutSettings)
    analyze: AnalyzeSettings = field(default_factory=AnalyzeSettings)

    def to_dict(self):
        return asdict(self)

    def section_digest(self, *sections):
        """Hash of the named sections plus the global seed and version."""
        data = self.to_dict()
        payload = {"version": self.version, "seed": self.seed, **{s: data[s] for s in sections}}
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _build(cls, raw, path):
    if not isinstance(raw, dict):
        raise ValidationError("expected a table", field=path or None)
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        where = f"{path}.{unknown[0]}" if path else unknown[0]
        raise ValidationError("unknown key", field=where)
    kwargs = {}
    defaults = cls()
    for name, value in raw.items():
        default = getattr(defaults, name)
        where = f"{path}.{name}" if path else name
        if is_dataclass(default):
            kwargs[name] = _build(type(default), value, where)
        else:
            kwargs[name] = _coerce(default, value, where)
    return cls(**kwargs)


def _coerce(default, value, where):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ValidationError(f"expected true/false, got {value!r}", field=where)
        return value
    if isinstance(default, int):
        return check_int(value, where)
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"expected a number, got {value!r}", field=where)
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ValidationError(f"expected a string, got {value!r}", field=where)
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ValidationError(f"expected a list, got {value!r}", field=where)
        return list(value)
    if isinstance(default, dict):
        if not isinstance(value, dict) or not all(isinstance(v, str) for v in value.values()):
            raise ValidationError("expected a table of strings", field=where)
        return dict(value)
    return value  # pragma: no cover


def validate_config(cfg):
    """Range checks for every section; returns ``cfg`` unchanged."""
    if cfg.version != CONFIG_VERSION:
        raise ValidationError(f"unsupported config version {cfg.version}", field="version")
    check_int(cfg.seed, "seed", 0)
    if cfg.providers.backend not in ("mock", "remote"):
        raise ValidationError("must be 'mock' or 'remote'", field="providers.backend")
    check_int(cfg.providers.dim, "providers.dim", 1)
    if cfg.providers.temperature < 0:
        raise ValidationError("must be non-negative", field="providers.temperature")
    env = cfg.environment
    if env.spec_dir:
        if not Path(env.spec_dir).is_dir():
            raise ValidationError(f"directory {env.spec_dir!r} does not exist", field="environment.spec_dir")
    else:
        check_int(env.apps, "environment.apps", 1)
        check_int(env.screens, "environment.screens", 2)
        check_int(env.elements_per_screen, "environment.elements_per_screen", 2)
        check_int(env.fields, "environment.fields", 0)
    check_int(cfg.explore.sessions, "explore.sessions", 1)
    check_int(cfg.explore.steps, "explore.steps", 1)
    check_threshold(cfg.memory.tau, "memory.tau")
    check_threshold(cfg.memory.diversity_threshold, "memory.diversity_threshold")
    syn = cfg.synthesize
    check_int(syn.contexts_per_node, "synthesize.contexts_per_node", 1)
    check_int(syn.k, "synthesize.k", 0)
    for name in ("clarity_min", "reason_min"):
        v = check_int(getattr(syn, name), f"synthesize.{name}", 1)
        if v > 5:
            raise ValidationError("scores are at most 5", field=f"synthesize.{name}")
    check_threshold(syn.dedup_threshold, "synthesize.dedup_threshold")
    check_int(syn.per_app_cap, "synthesize.per_app_cap", 1)
    ro = cfg.rollout
    if ro.strategy not in STRATEGIES:
        raise ValidationError(f"must be one of {', '.join(STRATEGIES)}", field="rollout.strategy")
    check_probability(ro.epsilon, "rollout.epsilon")
    check_probability(ro.p, "rollout.p")
    check_int(ro.max_interventions, "rollout.max_interventions", 1)
    check_int(ro.min_expert_steps, "rollout.min_expert_steps", 1)
    check_int(ro.max_steps, "rollout.max_steps", 1)
    check_int(ro.rounds, "rollout.rounds", 0)
    an = cfg.analyze
    if an.test_corpus and not Path(an.test_corpus).is_file():
        raise ValidationError(f"file {an.test_corpus!r} does not exist", field="analyze.test_corpus")
    check_int(an.heldout_tasks, "analyze.heldout_tasks", 1)
    for i, t in enumerate(an.thresholds):
        check_threshold(t, f"analyze.thresholds[{i}]")
    for i, r in enumerate(an.ratios):
        if isinstance(r, bool) or not isinstance(r, (int, float)) or not 0 < r < 1:
            raise ValidationError(f"must lie in (0, 1), got {r!r}", field=f"analyze.ratios[{i}]")
    check_threshold(an.match_threshold, "analyze.match_threshold")
    for i, k in enumerate(an.curve_sizes):
        check_int(k, f"analyze.curve_sizes[{i}]", 1)
    if any(b <= a for a, b in zip(an.curve_sizes, an.curve_sizes[1:])):
        raise ValidationError("must be strictly increasing", field="analyze.curve_sizes")
    return cfg


def config_from_dict(raw):
    return validate_config(_build(PipelineConfig, raw, ""))


def load_config(path=None, seed=None):
    """Read and validate a TOML config (defaults when ``path`` is None).

    ``seed`` overrides the file's global seed. Relative paths inside the
    file resolve against the file's directory.
    """
    raw = {}
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        try:
            with open(path, "rb") as fh:
                raw = tomli.load(fh)
        except FileNotFoundError:
            raise ValidationError(f"config file {str(path)!r} not found", field="--config") from None
        except tomli.TOMLDecodeError as exc:
            raise ValidationError(f"invalid TOML: {exc}", field="--config") from None
        base = path.resolve().parent
    if seed is not None:
        raw = {**raw, "seed": seed}
    cfg = _build(PipelineConfig, raw, "")
    cfg = _resolve_paths(cfg, base)
    return validate_config(cfg)


def _resolve_paths(cfg, base):
    def fix(p):
        return str((base / p).resolve()) if p and not Path(p).is_absolute() else p

    return replace(
        cfg,
        output=fix(cfg.output),
        environment=replace(cfg.environment, spec_dir=fix(cfg.environment.spec_dir)),
        analyze=replace(cfg.analyze, test_corpus=fix(cfg.analyze.test_corpus)),
    )
