"""Scenario and run configuration, validated with pydantic."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..world_model import SOO_LABELS

CANONICAL = ("trajectory_handover", "resource_allocation", "joint_effect", "occlusion_sharing")


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class AgentConfig(_Strict):
    x: float
    y: float
    v_max: float = Field(gt=0)
    fov_half: tuple[float, float]
    alpha: float = Field(default=1.0, gt=0)

    @field_validator("fov_half")
    @classmethod
    def _positive(cls, v):
        if v[0] <= 0 or v[1] <= 0:
            raise ValueError("FoV half-extents must be positive")
        return v


class TargetConfig(_Strict):
    name: str
    label: str = "human"
    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    # rows of (step, vx, vy): truth velocity is reset at that step
    schedule: list[tuple[int, float, float]] = Field(default_factory=list)

    @field_validator("label")
    @classmethod
    def _ooi_label(cls, v):
        if v in SOO_LABELS:
            raise ValueError(f"{v!r} is an occluder label; list it under occlusions")
        return v


class OcclusionConfig(_Strict):
    x: float
    y: float
    radius: float = Field(gt=0)
    label: str = "tree"


class IntervalConfig(_Strict):
    target: int = Field(ge=0)
    start: int = Field(ge=0)
    end: int = Field(ge=0)
    margin: int = Field(default=6, ge=0)
    name: str = ""

    @model_validator(mode="after")
    def _ordered(self):
        if self.end < self.start:
            raise ValueError("interval end before start")
        return self


class ScenarioConfig(_Strict):
    name: str
    description: str = ""
    duration: int = Field(gt=0)
    dt: float = Field(default=0.2, gt=0)
    plan_dt: float = Field(default=1.0, gt=0)
    agents: list[AgentConfig] = Field(min_length=1)
    targets: list[TargetConfig] = Field(min_length=1)
    occlusions: list[OcclusionConfig] = Field(default_factory=list)
    truth_q: float = Field(default=0.01, ge=0)
    filter_q: float = Field(default=0.05, ge=0)
    P0: list[float] = Field(default_factory=lambda: [1.0, 1.0, 0.5, 0.5])
    sensor_noise_scale: float = Field(default=1.0, ge=0)
    soo_init_var: float = Field(default=1.0, gt=0)
    soo_radius: Optional[float] = Field(default=None, gt=0)
    ownership_m: int = Field(default=5, ge=1)
    M0: Optional[list[list[int]]] = None
    goal: Optional[list[list[int]]] = None
    intervals: list[IntervalConfig] = Field(default_factory=list)

    @model_validator(mode="after")
    def _references(self):
        n_t, n_a = len(self.targets), len(self.agents)
        if len(self.P0) != 4 or any(v <= 0 for v in self.P0):
            raise ValueError("P0 must list 4 positive variances")
        for field_name in ("M0", "goal"):
            sets = getattr(self, field_name)
            if sets is None:
                continue
            if len(sets) != n_a:
                raise ValueError(f"{field_name} needs one target list per agent")
            for ids in sets:
                if any(not 0 <= t < n_t for t in ids):
                    raise ValueError(f"{field_name} references an unknown target")
        for iv in self.intervals:
            if iv.target >= n_t or iv.end > self.duration:
                raise ValueError(f"interval {iv.name or iv.target} does not resolve")
        return self

    @property
    def planner_soo_radius(self) -> float:
        if self.soo_radius is not None:
            return self.soo_radius
        if self.occlusions:
            return sum(o.radius for o in self.occlusions) / len(self.occlusions)
        return 1.0


class PsoConfig(_Strict):
    swarm_size: int = Field(default=40, ge=2)
    iterations: int = Field(default=60, ge=1)
    w: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445


class RunConfig(_Strict):
    alg: Literal["sma_nbo", "dec_pomdp"] = "sma_nbo"
    H: int = Field(default=5, ge=1)
    occlusion_mode: Literal["apriori", "dynamic", "none"] = "apriori"
    trials: int = Field(default=40, ge=1)
    base_seed: int = 0
    gamma: float = Field(default=1.0, gt=0, le=1)
    plan_dt: Optional[float] = Field(default=None, gt=0)
    pso: PsoConfig = Field(default_factory=PsoConfig)
    ci_rounds: int = Field(default=1, ge=1)
    sma_order: Optional[list[int]] = None
    p_d: float = Field(default=1.0, gt=0, le=1)
    clutter_density: float = Field(default=0.0, ge=0)
    gate_chi2: float = Field(default=9.21, gt=0)


def _format_error(err: ValidationError, source: str) -> str:
    lines = [f"invalid scenario {source}:"]
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"  {path}: {e['msg']}")
    return "\n".join(lines)


def parse_scenario(data: dict, source: str = "<dict>") -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_format_error(err, source)) from err


def load_scenario(path) -> ScenarioConfig:
    """Load a scenario from a JSON path or one of the bundled scenario names."""
    p = Path(path)
    if not p.exists() and str(path) in CANONICAL:
        text = resources.files("occtrack.scenarios").joinpath(f"{path}.json").read_text()
        source = f"{path} (bundled)"
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
        source = str(p)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid scenario {source}: JSON parse error at line {exc.lineno}: {exc.msg}") from exc
    return parse_scenario(data, source)


def load_run(path) -> RunConfig:
    try:
        return RunConfig.model_validate_json(Path(path).read_text())
    except ValidationError as err:
        raise ConfigError(_format_error(err, str(path))) from err
