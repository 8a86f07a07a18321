"""Delimited-text ingestion and structured serialization.

Cohorts live as three files: a subjects table (id, treatment, followup,
event, one column per baseline covariate), a mediators table (id, time,
value) and a JSON ingestion config naming the schedule, the covariate
columns and the strict / carry-forward mode.  Fit results and generative
parameters are JSON documents.  All writers format floats with shortest
round-trip repr, so identical inputs serialize byte-for-byte identically.
"""

import csv
import io as _io
import json
import logging
from pathlib import Path

import numpy as np

from .aalen import CumulativeCoefficients
from .data import DataError, Dataset, Schedule, StepFunction
from .effects import Contrast
from .mediator import MediatorCoefficients, VisitFit
from .simulate import SimulationParams

log = logging.getLogger(__name__)


def _parse_float(text, context):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"malformed row: non-numeric value {text!r} in {context}")
    if not np.isfinite(value):
        raise DataError(f"malformed row: non-finite value {text!r} in {context}")
    return value


def load_dataset(subjects_text, mediators_text, config):
    """Build a Dataset from delimited tables and an ingestion config.

    ``config`` is a dict with keys "schedule" (times), "covariates" (column
    names, may be empty) and optional "mode" ("strict", the default, or
    "carry_forward").  In strict mode a subject alive at a schedule time with
    no measurement is an error; carry-forward fills such gaps by last
    observation carried forward and counts the fills.
    """
    schedule = Schedule(np.asarray(config["schedule"], dtype=float))
    covariate_names = tuple(config.get("covariates", ()))
    mode = config.get("mode", "strict")
    if mode not in ("strict", "carry_forward"):
        raise DataError(f"unknown ingestion mode {mode!r}")

    reader = csv.DictReader(_io.StringIO(subjects_text))
    required = ["id", "treatment", "followup", "event", *covariate_names]
    if reader.fieldnames is None or any(c not in reader.fieldnames for c in required):
        raise DataError(f"subjects table must have columns {required}")
    ids, treatment, followup, event, baseline = [], [], [], [], []
    for row in reader:
        if any(row[c] in (None, "") for c in required):
            raise DataError(f"malformed row in subjects table: {row}")
        sid = row["id"]
        ids.append(sid)
        treatment.append(_parse_float(row["treatment"], f"subject {sid}"))
        followup.append(_parse_float(row["followup"], f"subject {sid}"))
        if row["event"] not in ("0", "1"):
            raise DataError(f"malformed row: event must be 0 or 1 for subject {sid}")
        event.append(row["event"] == "1")
        baseline.append([_parse_float(row[c], f"subject {sid}") for c in covariate_names])
    if len(set(ids)) != len(ids):
        raise DataError("duplicate subject id in subjects table")
    index = {sid: j for j, sid in enumerate(ids)}
    n, K = len(ids), len(schedule)

    mediators = np.full((n, K), np.nan)
    seen = set()
    reader = csv.DictReader(_io.StringIO(mediators_text))
    if reader.fieldnames is None or any(c not in reader.fieldnames for c in ("id", "time", "value")):
        raise DataError("mediators table must have columns id, time, value")
    for row in reader:
        sid = row["id"]
        if sid not in index:
            raise DataError(f"unknown subject id {sid!r} in mediators table")
        t = _parse_float(row["time"], f"mediator row for {sid}")
        hits = np.flatnonzero(schedule.times == t)
        if len(hits) == 0:
            raise DataError(f"mediator time {t!r} for subject {sid!r} is not a schedule time")
        i = int(hits[0])
        j = index[sid]
        if t > followup[j]:
            raise DataError(f"mediator at time {t!r} after followup for subject {sid!r}")
        if (sid, i) in seen:
            raise DataError(f"duplicate mediator measurement ({sid!r}, {t!r})")
        seen.add((sid, i))
        mediators[j, i] = _parse_float(row["value"], f"mediator row for {sid}")

    fills = 0
    for j in range(n):
        for i in range(K):
            if schedule.times[i] > followup[j]:
                continue
            if np.isnan(mediators[j, i]):
                if mode == "strict" or i == 0:
                    raise DataError(
                        f"missing mediator for subject {ids[j]!r} at schedule time {schedule.times[i]!r}"
                    )
                mediators[j, i] = mediators[j, i - 1]
                fills += 1
    if fills:
        log.warning("carry-forward filled %d missing mediator values", fills)

    return Dataset(
        schedule=schedule,
        ids=tuple(ids),
        treatment=np.asarray(treatment),
        baseline=np.asarray(baseline, dtype=float).reshape(n, len(covariate_names)),
        mediators=mediators,
        followup=np.asarray(followup),
        event=np.asarray(event, dtype=bool),
        covariate_names=covariate_names,
        locf_fills=fills,
    )


def _fmt(x):
    return repr(float(x))


def dump_cohort(dataset):
    """Render a Dataset to (subjects_text, mediators_text, config) in the
    exact ingestion format; load_dataset round-trips byte-for-byte."""
    sub = _io.StringIO()
    header = ["id", "treatment", "followup", "event", *dataset.covariate_names]
    sub.write(",".join(header) + "\n")
    for j, sid in enumerate(dataset.ids):
        cells = [
            sid,
            _fmt(dataset.treatment[j]),
            _fmt(dataset.followup[j]),
            "1" if dataset.event[j] else "0",
            *(_fmt(v) for v in dataset.baseline[j]),
        ]
        sub.write(",".join(cells) + "\n")
    med = _io.StringIO()
    med.write("id,time,value\n")
    for j, sid in enumerate(dataset.ids):
        for i, t in enumerate(dataset.schedule.times):
            if not np.isnan(dataset.mediators[j, i]):
                med.write(f"{sid},{_fmt(t)},{_fmt(dataset.mediators[j, i])}\n")
    config = {
        "schedule": [float(t) for t in dataset.schedule.times],
        "covariates": list(dataset.covariate_names),
        "mode": "strict",
    }
    return sub.getvalue(), med.getvalue(), config


def write_cohort(dataset, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    subjects, mediators, config = dump_cohort(dataset)
    (directory / "subjects.csv").write_text(subjects)
    (directory / "mediators.csv").write_text(mediators)
    (directory / "config.json").write_text(json.dumps(config, indent=2) + "\n")


def read_cohort(directory):
    directory = Path(directory)
    for name in ("subjects.csv", "mediators.csv", "config.json"):
        if not (directory / name).exists():
            raise DataError(f"missing cohort file: {directory / name}")
    return load_dataset(
        (directory / "subjects.csv").read_text(),
        (directory / "mediators.csv").read_text(),
        json.loads((directory / "config.json").read_text()),
    )


def load_params(path):
    """Read SimulationParams from a JSON file."""
    doc = json.loads(Path(path).read_text())
    hazard = doc["hazard"]
    med = doc["mediator"]
    cens = doc.get("censoring", {})
    contrast = doc.get("contrast", {"a": 1.0, "a_star": 0.0})
    baseline = tuple(doc.get("baseline", ()))
    K = len(doc["schedule"])
    p = len(baseline)
    return SimulationParams(
        schedule=Schedule(np.asarray(doc["schedule"], dtype=float)),
        mu=hazard["mu"],
        alpha=hazard["alpha"],
        beta=hazard["beta"],
        rho=np.asarray(hazard.get("rho", np.zeros((K, p))), dtype=float),
        lambdas=med["lambda"],
        deltas=np.asarray(med.get("delta", np.zeros((K, p))), dtype=float),
        b=np.asarray(med.get("b", np.zeros((K, K))), dtype=float),
        sigma=med["sigma"],
        baseline=baseline,
        treatment_prob=doc.get("treatment_prob", 0.5),
        t_max=cens.get("t_max", 1.0),
        censor_rate=cens.get("rate"),
        contrast=Contrast(contrast["a"], contrast["a_star"]),
    )


def _step_doc(f):
    return None if f is None else [float(v) for v in f.increments]


def save_fit(path, cumcoef, medcoef, schedule):
    """Serialize an additive-hazards fit plus mediator regressions to JSON."""
    doc = {
        "schedule": [float(t) for t in schedule.times],
        "event_times": [float(t) for t in cumcoef.baseline.jumps],
        "skipped_events": cumcoef.skipped_events,
        "increments": {
            "baseline": _step_doc(cumcoef.baseline),
            "treatment": _step_doc(cumcoef.treatment),
            "mediator": _step_doc(cumcoef.mediator),
            "covariates": {name: _step_doc(f) for name, f in cumcoef.covariates.items()},
        },
        "mediator_model": [
            None
            if f is None
            else {
                "intercept": f.intercept,
                "treatment": f.treatment,
                "covariates": [float(v) for v in f.covariates],
                "n": f.n,
                "residual_variance": f.residual_variance,
            }
            for f in medcoef.fits
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_fit(path):
    doc = json.loads(Path(path).read_text())
    schedule = Schedule(np.asarray(doc["schedule"], dtype=float))
    jumps = np.asarray(doc["event_times"], dtype=float)

    def step(values):
        return None if values is None else StepFunction(jumps, np.asarray(values, dtype=float))

    inc = doc["increments"]
    cumcoef = CumulativeCoefficients(
        baseline=step(inc["baseline"]),
        treatment=step(inc["treatment"]),
        mediator=step(inc["mediator"]),
        covariates={name: step(v) for name, v in inc["covariates"].items()},
        skipped_events=doc["skipped_events"],
    )
    fits = tuple(
        None
        if f is None
        else VisitFit(f["intercept"], f["treatment"], np.asarray(f["covariates"], dtype=float), f["n"], f["residual_variance"])
        for f in doc["mediator_model"]
    )
    return cumcoef, MediatorCoefficients(fits=fits), schedule


def write_table(path, columns):
    """Write an ordered mapping of column name -> values as a plot-ready CSV."""
    names = list(columns)
    rows = zip(*(columns[c] for c in names))
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
