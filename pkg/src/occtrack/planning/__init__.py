from .objective import OCCLUSION_MODES, NominalObjective, ObjectiveParams, evaluate_objective, nominal_prediction
from .planners import (
    Intention,
    Plan,
    PlanOutcome,
    plan_dec_pomdp,
    plan_sma_nbo,
    plan_team_sma,
    shift_intention,
    zero_intention,
)
from .pso import PsoParams, pso_minimize

__all__ = [
    "OCCLUSION_MODES",
    "Intention",
    "NominalObjective",
    "ObjectiveParams",
    "Plan",
    "PlanOutcome",
    "PsoParams",
    "evaluate_objective",
    "nominal_prediction",
    "plan_dec_pomdp",
    "plan_sma_nbo",
    "plan_team_sma",
    "pso_minimize",
    "shift_intention",
    "zero_intention",
]
