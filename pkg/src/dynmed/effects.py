"""Direct, indirect and total effect curves on the cumulative-hazard and
relative-survival scales, plus the reliability-based measurement-error
correction of the indirect effect.
"""

from dataclasses import dataclass

import numpy as np

from .data import DataError, StepFunction, mediator_index


@dataclass(frozen=True)
class Contrast:
    """Treatment contrast: active arm ``a`` vs reference arm ``a_star``."""

    a: float
    a_star: float

    def __post_init__(self):
        if self.a == self.a_star:
            raise DataError("contrast arms must differ")

    @property
    def diff(self):
        return self.a - self.a_star


@dataclass(frozen=True)
class EffectCurves:
    """Cumulative hazard-scale effect curves; chte = chde + chie by construction."""

    chde: StepFunction
    chie: StepFunction
    chte: StepFunction
    contrast: Contrast
    scale: str = "hazard"


@dataclass(frozen=True)
class SurvivalCurves:
    """Relative-survival-scale effects on the jump grid; ste = sde * sie."""

    times: np.ndarray
    sde: np.ndarray
    sie: np.ndarray
    ste: np.ndarray


def cumulative_effects(cumcoef, medcoef, schedule, contrast):
    """Compose fitted curves into cumulative direct/indirect/total effects.

    The direct effect is (a - a*) times the cumulative treatment curve; the
    indirect effect scales each mediator-curve increment at jump time s by the
    treatment-on-mediator coefficient in force at s.
    """
    if cumcoef.treatment is None or cumcoef.mediator is None:
        raise DataError("fit must include treatment and mediator columns")
    jumps = cumcoef.mediator.jumps
    idx = mediator_index(schedule, jumps)
    gammas = np.array([medcoef.gamma(int(k)) for k in np.atleast_1d(idx)])
    d = contrast.diff
    chde_inc = d * cumcoef.treatment.increments
    chie_inc = d * gammas * cumcoef.mediator.increments
    return EffectCurves(
        chde=StepFunction(jumps, chde_inc),
        chie=StepFunction(jumps, chie_inc),
        chte=StepFunction(jumps, chde_inc + chie_inc),
        contrast=contrast,
    )


def survival_effects(effects):
    """Exponentiate the negated cumulative curves onto the survival scale."""
    t = effects.chde.jumps
    chde = effects.chde(t)
    chie = effects.chie(t)
    return SurvivalCurves(
        times=t,
        sde=np.exp(-np.atleast_1d(chde)),
        sie=np.exp(-np.atleast_1d(chie)),
        ste=np.exp(-np.atleast_1d(chde) - np.atleast_1d(chie)),
    )


def correct_measurement_error(effects, kappa):
    """Correct the indirect effect for mediator reliability ``kappa``.

    The indirect curve is divided by kappa increment-wise; the total effect is
    unchanged and the direct effect absorbs the difference.  The underlying
    linear measurement-error argument is tentative: it assumes classical
    normal errors independent of the true mediator.
    """
    if not 0 < kappa <= 1:
        raise DataError("kappa must lie in (0, 1]")
    if kappa == 1:
        return effects
    jumps = effects.chie.jumps
    chie_inc = effects.chie.increments / kappa
    chte_inc = effects.chte.increments
    return EffectCurves(
        chde=StepFunction(jumps, chte_inc - chie_inc),
        chie=StepFunction(jumps, chie_inc),
        chte=StepFunction(jumps, chte_inc.copy()),
        contrast=effects.contrast,
    )


def local_slopes(effects, t_lo, t_hi):
    """Hazard-scale direct/indirect effects over a window, as slopes of the
    cumulative curves between t_lo and t_hi."""
    if not t_hi > t_lo >= 0:
        raise DataError("window must satisfy 0 <= t_lo < t_hi")
    dt = t_hi - t_lo
    return {
        "hde": (effects.chde(t_hi) - effects.chde(t_lo)) / dt,
        "hie": (effects.chie(t_hi) - effects.chie(t_lo)) / dt,
    }
