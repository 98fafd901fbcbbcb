"""TOML run configuration: search, backend, dedup, and bench sections.

The config file mirrors the config dataclass field names, e.g.::

    [search]
    algorithm = "mcts"
    step_budget = 30
    rng_seed = 7

    [backend]
    kind = "scripted"

    [backend.scripted]
    world_seed = 0
    branching = 3
    depth = 4
    noise_sigma = 0.0

    [dedup]
    ngram_n = 4
    overlap_threshold = 0.7

    [bench]
    workers = 1
    samples = 10

Command-line flags override file values.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..backends.base import PolicyBackend, RewardBackend
from ..backends.http import HttpBackendConfig, HttpPolicyBackend, HttpRewardBackend
from ..backends.scripted import ScriptedWorld
from ..core.types import SearchConfig
from ..datapipe.datasets import DedupConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScriptedSpec:
    world_seed: int = 0
    branching: int = 3
    depth: int = 4
    distractor_answers: int | None = None
    step_error_rate: float = 0.0
    noise_sigma: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "world_seed": self.world_seed,
            "branching": self.branching,
            "depth": self.depth,
            "distractor_answers": self.distractor_answers,
            "step_error_rate": self.step_error_rate,
            "noise_sigma": self.noise_sigma,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ScriptedSpec":
        defaults = cls()
        return cls(
            world_seed=d.get("world_seed", defaults.world_seed),
            branching=d.get("branching", defaults.branching),
            depth=d.get("depth", defaults.depth),
            distractor_answers=d.get("distractor_answers"),
            step_error_rate=d.get("step_error_rate", defaults.step_error_rate),
            noise_sigma=d.get("noise_sigma", defaults.noise_sigma),
        )

    def world(self) -> ScriptedWorld:
        return ScriptedWorld(
            seed=self.world_seed,
            branching=self.branching,
            depth=self.depth,
            distractor_answers=self.distractor_answers,
            step_error_rate=self.step_error_rate,
        )


@dataclass(frozen=True)
class BackendSpec:
    kind: str = "scripted"
    scripted: ScriptedSpec = field(default_factory=ScriptedSpec)
    http: HttpBackendConfig | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "scripted": self.scripted.to_dict()}
        if self.http is not None:
            out["http"] = self.http.to_dict()
        return out

    def make_backends(self, run_seed: int) -> tuple[PolicyBackend, RewardBackend]:
        """Fresh policy/reward instances for one run."""
        if self.kind == "scripted":
            world = self.scripted.world()
            policy = world.policy(run_seed)
            if self.scripted.noise_sigma > 0:
                reward: RewardBackend = world.noisy_reward(run_seed, self.scripted.noise_sigma)
            else:
                reward = world.oracle_reward()
            return policy, reward
        if self.kind == "http":
            if self.http is None:
                raise ConfigError("backend.kind is 'http' but [backend.http] is missing")
            return HttpPolicyBackend(self.http), HttpRewardBackend(self.http)
        raise ConfigError(f"unknown backend kind {self.kind!r}")


@dataclass(frozen=True)
class BenchConfig:
    workers: int = 1
    samples: int = 10

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ConfigError("bench workers must be >= 1")
        if self.samples < 1:
            raise ConfigError("bench samples must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {"workers": self.workers, "samples": self.samples}


@dataclass(frozen=True)
class AppConfig:
    search: SearchConfig = field(default_factory=SearchConfig)
    backend: BackendSpec = field(default_factory=BackendSpec)
    dedup: DedupConfig = field(default_factory=DedupConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)

    def to_dict(self) -> dict[str, Any]:
        return {
            "search": self.search.to_dict(),
            "backend": self.backend.to_dict(),
            "dedup": self.dedup.to_dict(),
            "bench": self.bench.to_dict(),
        }


def load_config(path: Path | str | None, overrides: dict[str, Any] | None = None) -> AppConfig:
    """Load an AppConfig from TOML, then apply flat section overrides.

    ``overrides`` maps section names to partial dicts, e.g.
    ``{"search": {"rng_seed": 7}}``; override values win over file values.
    """
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "rb") as f:
                raw = tomllib.load(f)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file is not valid TOML: {exc}") from exc
    for section, values in (overrides or {}).items():
        merged = dict(raw.get(section, {}))
        merged.update({k: v for k, v in values.items() if v is not None})
        raw[section] = merged

    try:
        search = SearchConfig.from_dict(raw.get("search", {}))
        backend_raw = dict(raw.get("backend", {}))
        http_cfg = None
        if "http" in backend_raw:
            http_cfg = HttpBackendConfig.from_dict(backend_raw["http"])
        backend = BackendSpec(
            kind=backend_raw.get("kind", "scripted"),
            scripted=ScriptedSpec.from_dict(backend_raw.get("scripted", {})),
            http=http_cfg,
        )
        dedup = DedupConfig.from_dict(raw.get("dedup", {}))
        bench_raw = raw.get("bench", {})
        bench = BenchConfig(
            workers=bench_raw.get("workers", 1),
            samples=bench_raw.get("samples", 10),
        )
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return AppConfig(search=search, backend=backend, dedup=dedup, bench=bench)
