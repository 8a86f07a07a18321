"""Nonparametric subject-resampling confidence bands for the effect curves.

Each replicate draws its indices from a generator keyed by (seed, replicate),
so replicates can run in any order or in parallel and still reproduce the
same bands.  Bands are pointwise empirical percentiles across the replicates
whose fits succeed.
"""

from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .aalen import FitError, fit_additive
from .data import DataError
from .effects import cumulative_effects
from .mediator import IndexUnavailableError, fit_marginal

CURVES = ("chde", "chie", "chte", "sde", "sie", "ste")


class BootstrapError(ValueError):
    pass


@dataclass(frozen=True)
class BootstrapBands:
    """Pointwise percentile bands on a common evaluation grid.

    ``point``, ``lower`` and ``upper`` map curve name -> array over ``grid``.
    Percentile bands may exclude the point estimate in small samples, so no
    ordering against ``point`` is asserted.
    """

    grid: np.ndarray
    point: dict
    lower: dict
    upper: dict
    replicates: int
    level: float
    failed_replicates: int


def _evaluate(dataset, contrast, grid):
    cumcoef = fit_additive(dataset)
    medcoef = fit_marginal(dataset)
    eff = cumulative_effects(cumcoef, medcoef, dataset.schedule, contrast)
    chde = np.atleast_1d(eff.chde(grid))
    chie = np.atleast_1d(eff.chie(grid))
    chte = chde + chie
    return {
        "chde": chde,
        "chie": chie,
        "chte": chte,
        "sde": np.exp(-chde),
        "sie": np.exp(-chie),
        "ste": np.exp(-chte),
    }


def _replicate(dataset, contrast, grid, seed, b):
    rng = np.random.default_rng((seed, b))
    idx = rng.integers(0, dataset.n, size=dataset.n)
    try:
        return b, _evaluate(dataset.resample(idx), contrast, grid)
    except (FitError, IndexUnavailableError, DataError):
        return b, None


def bootstrap_bands(dataset, contrast, B, seed, grid=None, level=0.95, n_jobs=1):
    """Percentile confidence bands from B subject-level bootstrap replicates.

    ``grid`` defaults to the distinct event times of the original dataset.
    Output is a pure function of (dataset, contrast, B, seed, grid, level),
    regardless of ``n_jobs``.
    """
    if B < 1:
        raise BootstrapError("B must be at least 1")
    if not 0 < level < 1:
        raise BootstrapError("level must lie in (0, 1)")
    if grid is None:
        grid = np.unique(dataset.followup[dataset.event])
    grid = np.asarray(grid, dtype=float)
    if np.any(grid > dataset.followup.max()):
        raise BootstrapError("grid extends past the observed follow-up")

    point = _evaluate(dataset, contrast, grid)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_replicate)(dataset, contrast, grid, seed, b) for b in range(1, B + 1)
    )
    results.sort(key=lambda r: r[0])
    curves = [r[1] for r in results if r[1] is not None]
    failed = B - len(curves)
    if not curves:
        raise BootstrapError("all bootstrap replicates failed")

    lo_q, hi_q = (1 - level) / 2, (1 + level) / 2
    lower, upper = {}, {}
    for name in CURVES:
        stack = np.vstack([c[name] for c in curves])
        lower[name] = np.quantile(stack, lo_q, axis=0)
        upper[name] = np.quantile(stack, hi_q, axis=0)
    return BootstrapBands(
        grid=grid,
        point=point,
        lower=lower,
        upper=upper,
        replicates=B,
        level=level,
        failed_replicates=failed,
    )
