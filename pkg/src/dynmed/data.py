"""Core data model: measurement schedule, cohort container, risk sets and
step functions.

All containers are immutable after construction and safe to share across
threads; every function in this module is pure.
"""

from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Raised for malformed or inconsistent cohort data."""


@dataclass(frozen=True)
class Schedule:
    """Common mediator measurement times t_0 = 0 < t_1 < ... < t_{K-1}."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or len(t) < 1:
            raise DataError("schedule must be a non-empty 1-d sequence")
        if t[0] != 0.0:
            raise DataError("first schedule time must be exactly 0")
        if not np.all(np.isfinite(t)):
            raise DataError("schedule times must be finite")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise DataError("schedule times must be strictly increasing")
        object.__setattr__(self, "times", t)
        self.times.setflags(write=False)

    def __len__(self):
        return len(self.times)


def mediator_index(schedule, t):
    """Index k of the measurement in force at time t: t_k <= t < t_{k+1}.

    Times at or past the last measurement map to the last index. Accepts a
    scalar or an array of times.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DataError("time must be nonnegative")
    idx = np.searchsorted(schedule.times, t, side="right") - 1
    return idx if idx.ndim else int(idx)


@dataclass(frozen=True)
class SubjectRecord:
    """One subject: treatment, baseline covariates, mediator path, follow-up."""

    id: str
    treatment: float
    baseline: np.ndarray
    mediators: np.ndarray  # values M_0..M_{r(followup)}, aligned to the schedule
    followup: float
    event: bool


@dataclass(frozen=True)
class Dataset:
    """Immutable cohort sharing one schedule and one baseline dimension.

    Column-major arrays are the working representation; ``subjects`` offers a
    per-record view.  ``mediators`` is (n, K) with NaN where a value is
    undefined (schedule time past the subject's follow-up).
    """

    schedule: Schedule
    ids: tuple
    treatment: np.ndarray
    baseline: np.ndarray
    mediators: np.ndarray
    followup: np.ndarray
    event: np.ndarray
    covariate_names: tuple = ()
    locf_fills: int = 0

    def __post_init__(self):
        n = len(self.ids)
        if len(set(self.ids)) != n:
            raise DataError("subject ids must be unique")
        for name in ("treatment", "baseline", "mediators", "followup", "event"):
            arr = np.asarray(getattr(self, name))
            object.__setattr__(self, name, arr)
        if self.baseline.ndim != 2 or self.baseline.shape[0] != n:
            raise DataError("baseline must be (n, p)")
        if self.baseline.shape[1] != len(self.covariate_names):
            raise DataError("covariate_names must match baseline width")
        if self.mediators.shape != (n, len(self.schedule)):
            raise DataError("mediators must be (n, K)")
        if np.any(self.followup <= 0):
            raise DataError("followup must be positive")
        if not (np.all(np.isfinite(self.treatment)) and np.all(np.isfinite(self.baseline))):
            raise DataError("treatment and baseline must be finite")
        # strict alignment: M_i defined exactly when t_i <= followup
        defined = self.schedule.times[None, :] <= self.followup[:, None]
        bad = defined != ~np.isnan(self.mediators)
        if np.any(bad):
            raise DataError("mediator values must exist exactly for schedule times <= followup")
        for name in ("treatment", "baseline", "mediators", "followup", "event"):
            getattr(self, name).setflags(write=False)

    @property
    def n(self):
        return len(self.ids)

    @property
    def n_covariates(self):
        return self.baseline.shape[1]

    @property
    def subjects(self):
        return [
            SubjectRecord(
                id=self.ids[j],
                treatment=float(self.treatment[j]),
                baseline=self.baseline[j],
                mediators=self.mediators[j, ~np.isnan(self.mediators[j])],
                followup=float(self.followup[j]),
                event=bool(self.event[j]),
            )
            for j in range(self.n)
        ]

    def resample(self, indices, id_suffix="b"):
        """New Dataset from rows ``indices`` (with repetition allowed)."""
        indices = np.asarray(indices, dtype=int)
        ids = tuple(f"{id_suffix}{k}" for k in range(len(indices)))
        return Dataset(
            schedule=self.schedule,
            ids=ids,
            treatment=self.treatment[indices],
            baseline=self.baseline[indices],
            mediators=self.mediators[indices],
            followup=self.followup[indices],
            event=self.event[indices],
            covariate_names=self.covariate_names,
        )


def risk_set(dataset, t):
    """Indices of subjects still at risk at time t (followup >= t)."""
    if t < 0:
        raise DataError("time must be nonnegative")
    return np.flatnonzero(dataset.followup >= t)


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous piecewise-constant cumulative: value at t is the sum
    of increments at jump times <= t, 0 before the first jump."""

    jumps: np.ndarray
    increments: np.ndarray
    _cum: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        j = np.asarray(self.jumps, dtype=float)
        inc = np.asarray(self.increments, dtype=float)
        if j.shape != inc.shape or j.ndim != 1:
            raise DataError("jumps and increments must be 1-d and equal length")
        if len(j) > 1 and not np.all(np.diff(j) > 0):
            raise DataError("jump times must be strictly increasing")
        object.__setattr__(self, "jumps", j)
        object.__setattr__(self, "increments", inc)
        object.__setattr__(self, "_cum", np.cumsum(inc))
        for arr in (self.jumps, self.increments, self._cum):
            arr.setflags(write=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        pos = np.searchsorted(self.jumps, t, side="right")
        padded = np.concatenate(([0.0], self._cum))
        out = padded[pos]
        return out if out.ndim else float(out)


def eval_step(f, t):
    """Evaluate a StepFunction at time(s) t."""
    return f(t)
