"""Cohort simulator and Monte-Carlo oracle.

Subjects follow the exact generative model the estimators assume: mediators
from the sequential linear model at scheduled visits, and a hazard that is
piecewise constant between visits, so residual event times are exponential
(inverse-transform sampling).  Treatment can be split into a mediator-arm
value and a direct-arm value to simulate intervention regimes, which makes
the simulator a numerical oracle for the g-formula survival curves.

Randomness is a fixed-layout per-subject stream derived from
(seed, subject index): generation order and parallel chunking cannot change
the output, and regimes sharing a seed share every draw.
"""

from dataclasses import dataclass, field

import numpy as np

from .data import DataError, Dataset, Schedule
from .effects import Contrast
from .mediator import gamma_from_structural

# params whose clamp rate exceeds this are rejected for oracle use
MAX_CLAMP_RATE = 1e-3


class SimulationError(ValueError):
    """Raised for invalid generative parameters."""


@dataclass(frozen=True)
class Regime:
    """Treatment regime: observational (one drawn A used everywhere) or an
    intervention fixing the direct-arm and mediator-arm values separately."""

    kind: str = "observational"
    a_direct: float = None
    a_mediator: float = None

    def __post_init__(self):
        if self.kind not in ("observational", "intervened"):
            raise SimulationError("regime kind must be observational or intervened")
        if self.kind == "intervened" and (self.a_direct is None or self.a_mediator is None):
            raise SimulationError("intervened regime needs a_direct and a_mediator")


OBSERVATIONAL = Regime()


def intervened(a_direct, a_mediator):
    return Regime(kind="intervened", a_direct=a_direct, a_mediator=a_mediator)


@dataclass(frozen=True)
class SimulationParams:
    """Full generative specification.

    Hazard coefficients are piecewise constant on schedule intervals (one
    value per schedule index, the last extending beyond the final visit).
    ``baseline`` is a list of independent component specs, each a dict like
    {"dist": "normal", "mean": 0, "sd": 1}, {"dist": "uniform", "low": 0,
    "high": 1} or {"dist": "bernoulli", "p": 0.5}.
    """

    schedule: Schedule
    mu: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    rho: np.ndarray
    lambdas: np.ndarray
    deltas: np.ndarray
    b: np.ndarray
    sigma: np.ndarray
    baseline: tuple = ()
    treatment_prob: float = 0.5
    t_max: float = 1.0
    censor_rate: float = None
    contrast: Contrast = field(default_factory=lambda: Contrast(1.0, 0.0))

    def __post_init__(self):
        K = len(self.schedule)
        p = len(self.baseline)
        for name in ("mu", "alpha", "beta", "lambdas", "sigma"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (K,):
                raise SimulationError(f"{name} must have one value per schedule index")
            object.__setattr__(self, name, arr)
        for name, shape in (("rho", (K, p)), ("deltas", (K, p)), ("b", (K, K))):
            arr = np.asarray(getattr(self, name), dtype=float).reshape(shape)
            object.__setattr__(self, name, arr)
        if np.any(np.triu(self.b) != 0):
            raise SimulationError("b must be strictly lower triangular")
        if np.any(self.sigma < 0):
            raise SimulationError("noise scales must be nonnegative")
        if self.t_max <= 0:
            raise SimulationError("t_max must be positive")
        if not 0 <= self.treatment_prob <= 1:
            raise SimulationError("treatment_prob must be a probability")
        for spec in self.baseline:
            if spec.get("dist") not in ("normal", "uniform", "bernoulli"):
                raise SimulationError(f"unknown baseline distribution: {spec}")

    @property
    def n_covariates(self):
        return len(self.baseline)


def _draw_baseline(rng, specs):
    c = np.empty(len(specs))
    for j, spec in enumerate(specs):
        if spec["dist"] == "normal":
            c[j] = spec.get("mean", 0.0) + spec.get("sd", 1.0) * rng.standard_normal()
        elif spec["dist"] == "uniform":
            lo, hi = spec.get("low", 0.0), spec.get("high", 1.0)
            c[j] = lo + (hi - lo) * rng.random()
        else:
            c[j] = float(rng.random() < spec["p"])
    return c


def _simulate_subject(params, seed, j, regime, horizon, with_censoring):
    """One subject from its own (seed, j) stream.

    The draw layout is fixed: baseline, treatment, censoring (if enabled),
    then all K mediator noises and all K event uniforms, whether used or not,
    so regimes and censoring states sharing a seed share every draw.
    """
    rng = np.random.default_rng((seed, j))
    c = _draw_baseline(rng, params.baseline)
    a_drawn = float(rng.random() < params.treatment_prob)
    if with_censoring and params.censor_rate is not None:
        censor = -np.log1p(-rng.random()) / params.censor_rate
    else:
        censor = np.inf
    eps = rng.standard_normal(len(params.sigma))
    u_ev = rng.random(len(params.sigma))

    if regime.kind == "observational":
        a_d = a_m = a_drawn
    else:
        a_d, a_m = regime.a_direct, regime.a_mediator

    times = params.schedule.times
    K = len(times)
    m = np.full(K, np.nan)
    death = np.inf
    clamps = 0
    for i in range(K):
        if times[i] > horizon or times[i] >= death:
            break
        m[i] = (
            params.lambdas[i] * a_m
            + params.deltas[i] @ c
            + params.b[i, :i] @ np.nan_to_num(m[:i])
            + params.sigma[i] * eps[i]
        )
        end = times[i + 1] if i + 1 < K else horizon
        h = params.mu[i] + params.alpha[i] * a_d + params.beta[i] * m[i] + params.rho[i] @ c
        if h < 0:
            clamps += 1
            h = 0.0
        resid = np.inf if h == 0 else -np.log1p(-u_ev[i]) / h
        if times[i] + resid < end:
            death = times[i] + resid
            break
    return c, a_drawn, a_d, m, death, censor, clamps


def simulate_cohort(params, n, seed, regime=OBSERVATIONAL, return_clamp_count=False):
    """Simulate a cohort Dataset of n subjects.

    Follow-up is the minimum of the event time, administrative censoring at
    ``t_max`` and (when configured) an independent exponential censoring time.
    In the intervened regime the recorded treatment is the direct-arm value.
    """
    if n < 1:
        raise SimulationError("n must be at least 1")
    K = len(params.schedule)
    ids = tuple(f"s{j}" for j in range(n))
    treatment = np.empty(n)
    baseline = np.empty((n, params.n_covariates))
    mediators = np.full((n, K), np.nan)
    followup = np.empty(n)
    event = np.empty(n, dtype=bool)
    clamp_total = 0
    for j in range(n):
        c, a_drawn, a_d, m, death, censor, clamps = _simulate_subject(
            params, seed, j, regime, params.t_max, with_censoring=True
        )
        clamp_total += clamps
        fu = min(death, censor, params.t_max)
        treatment[j] = a_drawn if regime.kind == "observational" else a_d
        baseline[j] = c
        mediators[j] = np.where(params.schedule.times <= fu, m, np.nan)
        followup[j] = fu
        event[j] = death <= min(censor, params.t_max)
    names = tuple(f"c{j}" for j in range(params.n_covariates))
    ds = Dataset(
        schedule=params.schedule,
        ids=ids,
        treatment=treatment,
        baseline=baseline,
        mediators=mediators,
        followup=followup,
        event=event,
        covariate_names=names,
    )
    return (ds, clamp_total) if return_clamp_count else ds


@dataclass(frozen=True)
class MCSurvival:
    grid: np.ndarray
    survival: np.ndarray
    std_error: np.ndarray


def mc_survival(params, regime, n_mc, seed, grid):
    """Monte-Carlo survival curve under a regime, censoring disabled.

    Realizes the g-computation formula (observational regime) or the
    split-treatment g-formula (intervened regime) by forward simulation;
    standard errors are binomial.  Parameter sets whose hazard-clamp rate
    exceeds 0.1% of interval evaluations are rejected as oracle-unfit.
    """
    if n_mc < 100:
        raise SimulationError("n_mc must be at least 100")
    grid = np.asarray(grid, dtype=float)
    horizon = max(float(grid.max()), float(params.schedule.times[-1])) + 1e-9
    deaths = np.empty(n_mc)
    clamp_total = 0
    evals = 0
    for j in range(n_mc):
        _, _, _, m, death, _, clamps = _simulate_subject(params, seed, j, regime, horizon, with_censoring=False)
        deaths[j] = death
        clamp_total += clamps
        evals += np.count_nonzero(~np.isnan(m))
    if evals and clamp_total / evals > MAX_CLAMP_RATE:
        raise SimulationError(
            f"hazard clamped in {clamp_total}/{evals} intervals; params unfit for oracle use"
        )
    surv = np.array([np.mean(deaths > g) for g in grid])
    se = np.sqrt(surv * (1 - surv) / n_mc)
    return MCSurvival(grid=grid, survival=surv, std_error=se)


@dataclass(frozen=True)
class ClosedFormEffects:
    grid: np.ndarray
    chde: np.ndarray
    chie: np.ndarray
    chte: np.ndarray
    sde: np.ndarray
    sie: np.ndarray


def _piecewise_integral(schedule, coef, t):
    """Integral of a piecewise-constant path from 0 to each t; the last
    coefficient extends beyond the final schedule time."""
    times = schedule.times
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(len(t))
    for i in range(len(times)):
        start = times[i]
        end = times[i + 1] if i + 1 < len(times) else np.inf
        out += coef[i] * np.clip(np.minimum(t, end) - start, 0.0, None)
    return out


def closed_form_effects(params, grid):
    """Exact effect curves implied by the generative parameters.

    The marginal treatment-on-mediator coefficients come from the structural
    coefficients via forward substitution; hazard-scale effects are exact
    sums over schedule intervals of the piecewise-constant integrands.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    gamma = gamma_from_structural(params.lambdas, params.b)
    d = params.contrast.diff
    chde = d * _piecewise_integral(params.schedule, params.alpha, grid)
    chie = d * _piecewise_integral(params.schedule, params.beta * gamma, grid)
    return ClosedFormEffects(
        grid=grid,
        chde=chde,
        chie=chie,
        chte=chde + chie,
        sde=np.exp(-chde),
        sie=np.exp(-chie),
    )


def add_noise(dataset, kappa, seed):
    """Classical measurement error: per visit, add centered normal noise with
    variance Var(M) (1 - kappa) / kappa so the realized reliability is kappa
    in expectation.  Deterministic given the seed."""
    if not 0 < kappa < 1:
        raise DataError("kappa must lie strictly in (0, 1)")
    rng = np.random.default_rng(seed)
    noisy = dataset.mediators.copy()
    for i in range(len(dataset.schedule)):
        defined = ~np.isnan(dataset.mediators[:, i])
        var = np.var(dataset.mediators[defined, i], ddof=1)
        if not var > 0:
            raise DataError(f"zero mediator variance at index {i}")
        scale = np.sqrt(var * (1 - kappa) / kappa)
        draws = rng.standard_normal(dataset.n)  # full column keeps the stream fixed
        noisy[defined, i] += scale * draws[defined]
    return Dataset(
        schedule=dataset.schedule,
        ids=dataset.ids,
        treatment=dataset.treatment,
        baseline=dataset.baseline,
        mediators=noisy,
        followup=dataset.followup,
        event=dataset.event,
        covariate_names=dataset.covariate_names,
        locf_fills=dataset.locf_fills,
    )
