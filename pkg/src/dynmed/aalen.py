"""Least-squares additive-hazards fitting.

At each distinct event time t the increment of the cumulative coefficient
curves is the OLS solution of dN(t) on (1, a, M_{r(t)}, c') over the risk
set.  Tied events at one time are handled as a single solve.
"""

from dataclasses import dataclass

import numpy as np

from .data import DataError, StepFunction, mediator_index

# singular values below RANK_RCOND * s_max are treated as zero
RANK_RCOND = 1e-10


class FitError(ValueError):
    """Raised when an additive-hazards fit is impossible."""


@dataclass(frozen=True)
class CumulativeCoefficients:
    """Cumulative regression coefficient curves from an additive-hazards fit.

    ``treatment`` and ``mediator`` are None when the corresponding column was
    excluded from the design.  All curves share one jump-time set: the event
    times retained by the fit.
    """

    baseline: StepFunction
    treatment: StepFunction
    mediator: StepFunction
    covariates: dict
    skipped_events: int


def _deficient_solve(X, y, b0, Z):
    """Resolve a rank-deficient event-time solve.

    Among the least-squares solutions over the at-risk design X, pick the one
    minimizing the predicted-increment norm over Z, the design of every
    subject whose current mediator value exists.  With an intercept and a
    binary treatment this continues the group-wise Nelson-Aalen estimator
    through times where one arm has left the risk set (the absent pattern
    gets a zero predicted increment).  Returns None when the direction is
    unidentifiable even over Z.
    """
    m, q = X.shape
    _, s, Vt = np.linalg.svd(X, full_matrices=m < q)
    r = int(np.sum(s > RANK_RCOND * s[0]))
    null = Vt[r:].T
    G = Z @ null
    if G.size == 0:
        return None
    # rank of G judged against the scale of Z, not of G itself: a direction
    # invisible to Z produces a numerically-zero column that must not count
    sG = np.linalg.svd(G, compute_uv=False)
    if np.sum(sG > RANK_RCOND * np.linalg.norm(Z)) < q - r:
        return None
    w, _, _, _ = np.linalg.lstsq(G, Z @ b0, rcond=RANK_RCOND)
    return b0 - null @ w


def fit_additive(dataset, use_treatment=True, use_mediator=True, use_covariates=True):
    """Fit the additive hazards model over the cohort's event times.

    Returns CumulativeCoefficients.  At event times whose at-risk design is
    rank deficient (singular-value ratio below 1e-10) the increment is
    resolved by ``_deficient_solve``; times where even that fails contribute
    no increment and are counted in ``skipped_events``, leaving the curves
    flat there.
    """
    if dataset.n == 0:
        raise FitError("empty dataset")
    event_times = np.unique(dataset.followup[dataset.event])
    if len(event_times) == 0:
        raise FitError("no observed events")

    p = dataset.n_covariates if use_covariates else 0
    q = 1 + int(use_treatment) + int(use_mediator) + p

    # sort once by decreasing follow-up: the risk set at any t is a prefix
    order = np.argsort(-dataset.followup, kind="stable")
    fu_sorted = dataset.followup[order]
    ev_sorted = dataset.event[order]
    base_cols = [np.ones(dataset.n)]
    if use_treatment:
        base_cols.append(dataset.treatment[order])
    med_sorted = dataset.mediators[order] if use_mediator else None
    if use_covariates and p:
        base_cols.append(dataset.baseline[order])
    base_design = np.column_stack(base_cols)
    med_col = 1 + int(use_treatment)

    retained = []
    increments = np.empty((len(event_times), q))
    skipped = 0
    med_idx = mediator_index(dataset.schedule, event_times) if use_mediator else np.zeros(len(event_times), int)
    n_kept = 0
    design = base_design
    mz = dataset.n  # rows of the fallback design: current mediator defined
    current_idx = -1
    schedule_times = dataset.schedule.times
    for t, k in zip(event_times, med_idx):
        if use_mediator and k != current_idx:
            design = np.insert(base_design, med_col, med_sorted[:, k], axis=1)
            mz = int(np.searchsorted(-fu_sorted, -schedule_times[k], side="right"))
            current_idx = k
        m = int(np.searchsorted(-fu_sorted, -t, side="right"))  # followup >= t
        X = design[:m]
        y = np.zeros(m)
        y[(fu_sorted[:m] == t) & ev_sorted[:m]] = 1.0
        sol, _, rank, _ = np.linalg.lstsq(X, y, rcond=RANK_RCOND)
        if rank < q:
            sol = _deficient_solve(X, y, sol, design[:mz])
            if sol is None:
                skipped += 1
                continue
        increments[n_kept] = sol
        retained.append(t)
        n_kept += 1

    if n_kept == 0:
        raise FitError("design rank deficient or too few at-risk subjects at every event time")

    jumps = np.asarray(retained)
    inc = increments[:n_kept]
    col = 0

    def take():
        nonlocal col
        f = StepFunction(jumps, inc[:, col].copy())
        col += 1
        return f

    baseline = take()
    treatment = take() if use_treatment else None
    mediator = take() if use_mediator else None
    covariates = {name: take() for name in (dataset.covariate_names if use_covariates else ())}
    return CumulativeCoefficients(
        baseline=baseline,
        treatment=treatment,
        mediator=mediator,
        covariates=covariates,
        skipped_events=skipped,
    )


def nelson_aalen(dataset, subset=None):
    """Nelson-Aalen cumulative hazard over an optional subject subset.

    ``subset`` is an index array or boolean mask; default is the full cohort.
    """
    if subset is None:
        fu, ev = dataset.followup, dataset.event
    else:
        fu, ev = dataset.followup[subset], dataset.event[subset]
    if len(fu) == 0:
        raise DataError("empty subset")
    times = np.unique(fu[ev])
    inc = np.empty(len(times))
    for i, t in enumerate(times):
        inc[i] = np.sum((fu == t) & ev) / np.sum(fu >= t)
    return StepFunction(times, inc)
