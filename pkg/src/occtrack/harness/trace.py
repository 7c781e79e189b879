"""Per-trial record and its JSON form."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class StepRecord:
    k: int
    agents: list[list[float]]  # px, py, psi, vx, vy
    targets: list[list[float]]  # px, py, vx, vy
    visibility: list[list[int]]  # agents x targets
    fov_contains: list[list[int]]  # agents x targets, ignoring occlusion
    occluded: list[int]  # per target, ground truth
    fov: list[list[float]]  # min_x, min_y, max_x, max_y per agent
    track_means: list[list[list[float]]]  # agent -> track -> mean
    track_traces: list[list[float]]  # agent -> track -> tr(P)
    occlusion_map: list[list[list[float]]]  # agent -> entry -> (x, y, tr P)
    soo_in_fov: list[list[int]]  # agents x occluders
    plans: list[list[list[float]]] = field(default_factory=list)  # agent -> H x 2
    plan_costs: list[list[float]] = field(default_factory=list)  # agent -> (before, after)


@dataclass
class TrialTrace:
    scenario: dict
    run: dict
    seed: int
    target_names: list[str]
    occlusions: list[list[float]]
    steps: list[StepRecord] = field(default_factory=list)
    failed: bool = False
    error: str | None = None

    # array views used by the analysis code
    def array(self, key: str) -> np.ndarray:
        return np.array([getattr(s, key) for s in self.steps])

    @property
    def visibility(self) -> np.ndarray:
        return self.array("visibility").astype(bool)

    @property
    def fov_contains(self) -> np.ndarray:
        return self.array("fov_contains").astype(bool)

    @property
    def occluded(self) -> np.ndarray:
        return self.array("occluded").astype(bool)

    @property
    def soo_in_fov(self) -> np.ndarray:
        return np.array([s.soo_in_fov for s in self.steps], dtype=bool).reshape(len(self.steps), -1, len(self.occlusions))

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TrialTrace":
        d = dict(d)
        d["steps"] = [StepRecord(**s) for s in d.get("steps", [])]
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "TrialTrace":
        return cls.from_dict(json.loads(text))

    def save(self, directory: Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"trial_{self.seed:06d}.json"
        path.write_text(self.to_json())
        return path


def load_traces(directory) -> list[TrialTrace]:
    paths = sorted(Path(directory).glob("trial_*.json"))
    if not paths:
        raise FileNotFoundError(f"no trial_*.json traces in {directory}")
    return [TrialTrace.from_json(p.read_text()) for p in paths]
