"""Experiment configuration and result records for the CLI harness.

Configs are single JSON files (human-editable, lossless round-trip through
the stdlib parser); CLI flags override config fields.  Every stochastic
result record carries its seed and standard errors.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .chain import ModelParams

KINDS = ("simulate", "energy-corr", "volume-corr", "phase-diagram",
         "verify-lemmas", "kernel", "theorem-suite")
STOCHASTIC_KINDS = ("simulate", "energy-corr", "volume-corr")


class ConfigError(ValueError):
    """Invalid configuration; the message carries the field path."""


@dataclass
class ExperimentConfig:
    kind: str
    lam: float = 1.0
    c: float = 1.0
    b: float = 0.5
    beta: float = 1.0
    a: float = 1.75
    n_values: list = field(default_factory=lambda: [64])
    t_values: list = field(default_factory=lambda: [1.0])
    L: int | None = None
    replicas: int = 100
    seed: int | None = None
    out: str = "out"
    grid_points: int = 256
    which: str = "Tvol"          # theorem-suite selector: T1 | T2 | Tvol
    budget: float = 1e13         # op budget for theorem-suite ladders
    threads: int = 1

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"kind: unknown experiment kind {self.kind!r}")
        if self.kind in STOCHASTIC_KINDS and self.seed is None:
            raise ConfigError(f"seed: required for stochastic kind {self.kind!r}")
        for name in ("lam", "c", "beta"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name}: must be >= 0")
        if self.beta <= 0:
            raise ConfigError("beta: must be > 0")
        if not self.n_values or any(int(n) < 1 for n in self.n_values):
            raise ConfigError("n_values: need integers >= 1")
        if any(t < 0 for t in self.t_values):
            raise ConfigError("t_values: must be >= 0")
        if self.replicas < 2 and self.kind in ("energy-corr", "volume-corr"):
            raise ConfigError("replicas: need >= 2 for correlation estimates")
        if self.which not in ("T1", "T2", "Tvol"):
            raise ConfigError(f"which: unknown theorem suite {self.which!r}")
        if self.threads < 1:
            raise ConfigError("threads: must be >= 1")
        return self

    def params(self, n: int, a: float | None = None, b: float | None = None) -> ModelParams:
        return ModelParams(lam=self.lam, c=self.c,
                           b=self.b if b is None else b, n=int(n),
                           beta=self.beta, a=self.a if a is None else a)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if "kind" not in data:
            raise ConfigError("kind: missing")
        known = {f for f in cls.__dataclass_fields__}  # noqa: C416
        alias = {"lambda": "lam", "n": "n_values", "t": "t_values"}
        clean = {}
        for key, val in data.items():
            key = alias.get(key, key)
            if key not in known:
                raise ConfigError(f"{key}: unknown field")
            clean[key] = val
        cfg = cls(**clean)
        return cfg.validate()

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"<file>: not valid JSON ({exc})") from exc
        return cls.from_dict(data)


@dataclass
class ResultRecord:
    experiment: str
    inputs: dict
    outputs: dict
    seed: int | None
    wall_time: float
    version: str = __version__

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=float)


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *_):
        self.elapsed = time.perf_counter() - self.t0
