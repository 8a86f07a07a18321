"""Per-visit linear models for the mediator process.

Two views of the same process: a marginal regression of M_i on treatment and
baseline covariates among survivors at t_i (what the effect curves consume),
and a sequential structural regression that adds all earlier mediator values.
``gamma_from_structural`` maps the structural coefficients to the marginal
treatment coefficients they imply.
"""

from dataclasses import dataclass

import numpy as np

from .aalen import RANK_RCOND
from .data import DataError


class IndexUnavailableError(DataError):
    """A required per-visit regression could not be fitted."""


@dataclass(frozen=True)
class VisitFit:
    intercept: float
    treatment: float
    covariates: np.ndarray
    n: int
    residual_variance: float


@dataclass(frozen=True)
class MediatorCoefficients:
    """Marginal per-visit fits; ``fits[i]`` is None where unavailable."""

    fits: tuple

    def gamma(self, i):
        if i >= len(self.fits) or self.fits[i] is None:
            raise IndexUnavailableError(f"mediator regression unavailable at index {i}")
        return self.fits[i].treatment

    @property
    def survivor_counts(self):
        return tuple(f.n if f is not None else 0 for f in self.fits)


@dataclass(frozen=True)
class StructuralCoefficients:
    """Sequential per-visit fits.

    ``lambdas[i]`` is the treatment coefficient, ``deltas[i]`` the covariate
    vector, ``b[i, k]`` (strictly lower triangular) the coefficient of M_k in
    the regression for M_i, ``sigma2[i]`` the residual variance.  Unavailable
    indices hold NaN and are flagged in ``available``.
    """

    lambdas: np.ndarray
    deltas: np.ndarray
    b: np.ndarray
    sigma2: np.ndarray
    survivor_counts: tuple
    available: tuple


def _visit_ols(y, X):
    """OLS with rank guard; returns (coef, residual variance) or None."""
    n, q = X.shape
    if n <= q:
        return None
    sol, _, rank, _ = np.linalg.lstsq(X, y, rcond=RANK_RCOND)
    if rank < q:
        return None
    resid = y - X @ sol
    return sol, float(resid @ resid / (n - q))


def fit_marginal(dataset):
    """Regress M_i on (1, A, C) among survivors at each schedule time."""
    fits = []
    for i, t in enumerate(dataset.schedule.times):
        alive = dataset.followup >= t
        y = dataset.mediators[alive, i]
        X = np.column_stack([np.ones(alive.sum()), dataset.treatment[alive], dataset.baseline[alive]])
        res = _visit_ols(y, X)
        if res is None:
            fits.append(None)
            continue
        sol, s2 = res
        fits.append(VisitFit(float(sol[0]), float(sol[1]), sol[2:].copy(), int(alive.sum()), s2))
    return MediatorCoefficients(fits=tuple(fits))


def fit_sequential(dataset):
    """Regress M_i on (1, A, C, M_0..M_{i-1}) among survivors at each t_i."""
    K = len(dataset.schedule)
    p = dataset.n_covariates
    lambdas = np.full(K, np.nan)
    deltas = np.full((K, p), np.nan)
    b = np.zeros((K, K))
    sigma2 = np.full(K, np.nan)
    counts = []
    avail = []
    for i, t in enumerate(dataset.schedule.times):
        alive = dataset.followup >= t
        counts.append(int(alive.sum()))
        y = dataset.mediators[alive, i]
        X = np.column_stack(
            [np.ones(alive.sum()), dataset.treatment[alive], dataset.baseline[alive], dataset.mediators[alive, :i]]
        )
        res = _visit_ols(y, X)
        if res is None:
            avail.append(False)
            continue
        sol, s2 = res
        lambdas[i] = sol[1]
        deltas[i] = sol[2 : 2 + p]
        b[i, :i] = sol[2 + p :]
        sigma2[i] = s2
        avail.append(True)
    return StructuralCoefficients(
        lambdas=lambdas, deltas=deltas, b=b, sigma2=sigma2, survivor_counts=tuple(counts), available=tuple(avail)
    )


def gamma_from_structural(lambdas, b_matrix):
    """Marginal treatment-on-mediator coefficients gamma = (I - B)^{-1} Lambda.

    B must be strictly lower triangular; solved by forward substitution.
    """
    lam = np.asarray(lambdas, dtype=float)
    B = np.asarray(b_matrix, dtype=float)
    K = len(lam)
    if B.shape != (K, K):
        raise DataError("b_matrix shape must match lambdas length")
    if np.any(np.triu(B) != 0):
        raise DataError("b_matrix must be strictly lower triangular")
    gamma = np.empty(K)
    for i in range(K):
        gamma[i] = lam[i] + B[i, :i] @ gamma[:i]
    return gamma
