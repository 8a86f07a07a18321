import numpy as np
import pytest

from dynmed import Contrast, Dataset, Schedule
from dynmed.simulate import SimulationParams


def make_dataset(schedule, treatment, followup, event, mediators=None, baseline=None, names=()):
    """Small-cohort builder; mediators default to zeros where defined."""
    schedule = Schedule(schedule)
    treatment = np.asarray(treatment, dtype=float)
    followup = np.asarray(followup, dtype=float)
    n = len(treatment)
    if mediators is None:
        mediators = np.where(schedule.times[None, :] <= followup[:, None], 0.0, np.nan)
    if baseline is None:
        baseline = np.zeros((n, len(names)))
    return Dataset(
        schedule=schedule,
        ids=tuple(f"s{j}" for j in range(n)),
        treatment=treatment,
        baseline=np.asarray(baseline, dtype=float).reshape(n, -1) if len(names) else np.zeros((n, 0)),
        mediators=np.asarray(mediators, dtype=float),
        followup=followup,
        event=np.asarray(event, dtype=bool),
        covariate_names=tuple(names),
    )


def constant_params(mu=0.05, alpha=0.10, beta=0.02, lam=1.5, sigma=1.0, t_max=2.0, censor_rate=None):
    """Single-visit generative setup with constant hazard coefficients."""
    return SimulationParams(
        schedule=Schedule([0.0]),
        mu=[mu],
        alpha=[alpha],
        beta=[beta],
        rho=np.zeros((1, 0)),
        lambdas=[lam],
        deltas=np.zeros((1, 0)),
        b=np.zeros((1, 1)),
        sigma=[sigma],
        baseline=(),
        treatment_prob=0.5,
        t_max=t_max,
        censor_rate=censor_rate,
        contrast=Contrast(1.0, 0.0),
    )


def three_visit_params():
    """Three-visit setup with mediator feedback and one baseline covariate."""
    return SimulationParams(
        schedule=Schedule([0.0, 0.5, 1.0]),
        mu=[0.05, 0.05, 0.05],
        alpha=[0.08, 0.10, 0.12],
        beta=[0.02, 0.03, 0.02],
        rho=[[0.05], [0.05], [0.05]],
        lambdas=[1.0, 0.8, 0.5],
        deltas=[[0.3], [0.3], [0.3]],
        b=[[0.0, 0.0, 0.0], [0.3, 0.0, 0.0], [0.2, 0.4, 0.0]],
        sigma=[0.5, 0.5, 0.5],
        baseline=({"dist": "uniform", "low": 0.0, "high": 1.0},),
        treatment_prob=0.5,
        t_max=2.0,
        contrast=Contrast(1.0, 0.0),
    )


@pytest.fixture
def small_cohort():
    import dynmed

    return dynmed.simulate_cohort(constant_params(), 500, seed=11)
