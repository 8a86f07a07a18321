"""Dynamic-path mediation analysis for survival data with time-varying
mediators under the additive hazards model."""

from .aalen import CumulativeCoefficients, FitError, fit_additive, nelson_aalen
from .bootstrap import BootstrapBands, bootstrap_bands
from .data import (
    DataError,
    Dataset,
    Schedule,
    StepFunction,
    SubjectRecord,
    eval_step,
    mediator_index,
    risk_set,
)
from .effects import (
    Contrast,
    EffectCurves,
    SurvivalCurves,
    correct_measurement_error,
    cumulative_effects,
    local_slopes,
    survival_effects,
)
from .io import load_dataset, read_cohort, write_cohort
from .mediator import (
    MediatorCoefficients,
    StructuralCoefficients,
    fit_marginal,
    fit_sequential,
    gamma_from_structural,
)
from .simulate import (
    OBSERVATIONAL,
    Regime,
    SimulationParams,
    add_noise,
    closed_form_effects,
    intervened,
    mc_survival,
    simulate_cohort,
)

__all__ = [
    "BootstrapBands",
    "Contrast",
    "CumulativeCoefficients",
    "DataError",
    "Dataset",
    "EffectCurves",
    "FitError",
    "MediatorCoefficients",
    "OBSERVATIONAL",
    "Regime",
    "Schedule",
    "SimulationParams",
    "StepFunction",
    "StructuralCoefficients",
    "SubjectRecord",
    "SurvivalCurves",
    "add_noise",
    "bootstrap_bands",
    "closed_form_effects",
    "correct_measurement_error",
    "cumulative_effects",
    "eval_step",
    "fit_additive",
    "fit_marginal",
    "fit_sequential",
    "gamma_from_structural",
    "intervened",
    "load_dataset",
    "local_slopes",
    "mc_survival",
    "mediator_index",
    "nelson_aalen",
    "read_cohort",
    "risk_set",
    "simulate_cohort",
    "survival_effects",
    "write_cohort",
]

__version__ = "0.1.0"
