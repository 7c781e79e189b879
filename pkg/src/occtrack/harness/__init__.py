from .analysis import (
    BatchResult,
    checkpoints,
    coverage_matrix,
    drop_step,
    export_coverage,
    export_events,
    export_sankey,
    interval_mean,
    occlusion_share,
    run_batch,
)
from .config import CANONICAL, ConfigError, RunConfig, ScenarioConfig, load_run, load_scenario, parse_scenario
from .trace import StepRecord, TrialTrace, load_traces
from .trial import make_rng, run_trial

__all__ = [
    "CANONICAL",
    "BatchResult",
    "ConfigError",
    "RunConfig",
    "ScenarioConfig",
    "StepRecord",
    "TrialTrace",
    "checkpoints",
    "coverage_matrix",
    "drop_step",
    "export_coverage",
    "export_events",
    "export_sankey",
    "interval_mean",
    "load_run",
    "load_scenario",
    "load_traces",
    "make_rng",
    "occlusion_share",
    "parse_scenario",
    "run_batch",
    "run_trial",
]
