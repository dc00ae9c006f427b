"""Run configuration shared by the command-line subcommands."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

from .invariant import ActionDescriptor, UnsupportedActionError, generator_system
from .spectrum import DEGREE_CAP, SpectrumModel
from .transform import QuadratureConfig

MAX_GRID = 4097
MAX_NODES = 4096
MAX_ORDER = 4
QUOTIENTS = ("sym",)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything a subcommand needs; serializes to JSON and back bit-exactly.

    Floats are written with ``repr`` (shortest round-trip form), so
    ``RunConfig.from_json(c.to_json()) == c`` holds for every valid ``c``.
    """

    group: str = "un:1"
    quotient: str | None = None
    function: str = "gaussian(1,1)"
    nt: int = 160
    nr: int = 160
    n_lambda: int = 64
    t_max: float | None = None
    r_max: float | None = None
    lambda_min: float = -4.0
    lambda_max: float = 4.0
    lambda_samples: int = 9
    orbit_samples: int = 5
    alpha_cut: int = 32
    xi_cut: float | None = None
    degree_max: int = 12
    order: int = 2
    tail_tol: float = 1e-6
    grid: int = 33
    label: tuple[int, ...] | None = None
    lam: float = 1.0
    orbit: tuple[float, ...] | None = None
    out: str | None = None
    report: str | None = None
    seed: int = 0
    suites: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        try:
            ActionDescriptor.parse(self.group)
        except UnsupportedActionError as exc:
            raise ConfigError(str(exc)) from exc
        if self.quotient is not None:
            if self.quotient not in QUOTIENTS:
                raise ConfigError(f"unknown quotient {self.quotient!r}; choose from {QUOTIENTS}")
            if not self.group.startswith("t"):
                raise ConfigError("the symmetric quotient needs a torus group (tn:n)")
        for name, cap in (("nt", MAX_NODES), ("nr", MAX_NODES), ("n_lambda", MAX_NODES), ("grid", MAX_GRID),
                          ("lambda_samples", MAX_NODES)):
            v = getattr(self, name)
            if not 2 <= v <= cap:
                raise ConfigError(f"{name}={v} outside [2, {cap}]")
        if not 0 <= self.orbit_samples <= 257:
            raise ConfigError("orbit_samples outside [0, 257]")
        if not 0 <= self.alpha_cut <= DEGREE_CAP:
            raise ConfigError(f"alpha_cut outside [0, {DEGREE_CAP}]")
        if not 1 <= self.degree_max <= 24:
            raise ConfigError("degree_max outside [1, 24]")
        if not 0 <= self.order <= MAX_ORDER:
            raise ConfigError(f"order outside [0, {MAX_ORDER}]")
        if not (self.lambda_min < self.lambda_max and math.isfinite(self.lambda_min)
                and math.isfinite(self.lambda_max)):
            raise ConfigError("lambda range must be finite with lambda_min < lambda_max")
        for name in ("t_max", "r_max", "xi_cut"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive")
        if not (0 < self.tail_tol < 1):
            raise ConfigError("tail_tol must lie in (0, 1)")
        if not math.isfinite(self.lam):
            raise ConfigError("lam must be finite")
        if self.label is not None and any(int(a) < 0 for a in self.label):
            raise ConfigError("labels are nonnegative")
        if self.seed < 0:
            raise ConfigError("seed must be >= 0")

    # -- derived objects ----------------------------------------------------

    @property
    def action(self) -> ActionDescriptor:
        return ActionDescriptor.parse(self.group)

    def gensys(self):
        return generator_system(self.action, min(self.degree_max, 12))

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(self.nt, self.nr, self.n_lambda, self.t_max, self.r_max, self.tail_tol)

    def model(self) -> SpectrumModel:
        return SpectrumModel(self.gensys(), self.alpha_cut, (self.lambda_min, self.lambda_max),
                             self.xi_cut, lambda_samples=self.lambda_samples)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        out = dataclasses.asdict(self)
        for k in ("label", "orbit", "suites"):
            if out[k] is not None:
                out[k] = list(out[k])
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        data = dict(data)
        if data.get("label") is not None:
            data["label"] = tuple(int(x) for x in data["label"])
        if data.get("orbit") is not None:
            data["orbit"] = tuple(float(x) for x in data["orbit"])
        if "suites" in data:
            data["suites"] = tuple(data["suites"] or ())
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)
