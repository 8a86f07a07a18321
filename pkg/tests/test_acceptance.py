"""Acceptance gate: each test exercises one headline guarantee end to end
and prints a single pass/fail line at the stated tolerance."""

import dataclasses
import json

import numpy as np
import pytest

import dynmed as dm
from dynmed import io
from dynmed.cli import main
from dynmed.simulate import SimulationParams, intervened

from conftest import constant_params, make_dataset, three_visit_params

CONTRAST = dm.Contrast(1.0, 0.0)


def report(label, ok, detail=""):
    verdict = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"{label}: {verdict}{suffix}")
    assert ok, f"{label}{suffix}"


def fitted_effects(dataset, contrast=CONTRAST):
    fit = dm.fit_additive(dataset)
    med = dm.fit_marginal(dataset)
    return dm.cumulative_effects(fit, med, dataset.schedule, contrast)


def test_criterion_1_exact_identities():
    ds = dm.simulate_cohort(three_visit_params(), 400, seed=5)
    eff = fitted_effects(ds)
    t = eff.chte.jumps
    ok = np.max(np.abs(np.asarray(eff.chte(t)) - np.asarray(eff.chde(t)) - np.asarray(eff.chie(t)))) < 1e-12

    surv = dm.survival_effects(eff)
    ok &= np.max(np.abs(surv.ste - surv.sde * surv.sie)) < 1e-12

    for kappa in (0.1, 0.5, 0.72, 1.0):
        corr = dm.correct_measurement_error(eff, kappa)
        ok &= np.max(np.abs(np.asarray(corr.chte(t)) - np.asarray(eff.chte(t)))) < 1e-12

    rev = fitted_effects(ds, dm.Contrast(0.0, 1.0))
    for name in ("chde", "chie", "chte"):
        ok &= np.max(np.abs(getattr(eff, name).increments + getattr(rev, name).increments)) < 1e-12

    for k in (0.1, 10.0):
        scaled = dataclasses.replace(ds, mediators=ds.mediators * k)
        ok &= np.max(np.abs(fitted_effects(scaled).chie.increments - eff.chie.increments)) < 1e-12

    report("criterion 1 (exact identity suite, 1e-12)", ok)


def test_criterion_2_nelson_aalen_equivalence():
    ds = dm.simulate_cohort(constant_params(), 1000, seed=8)
    fit = dm.fit_additive(ds, use_treatment=False, use_mediator=False, use_covariates=False)
    na = dm.nelson_aalen(ds)
    ok = np.array_equal(fit.baseline.jumps, na.jumps)
    ok &= np.max(np.abs(np.asarray(fit.baseline(na.jumps)) - np.asarray(na(na.jumps)))) < 1e-12

    four = make_dataset(
        [0.0],
        treatment=[1.0, 1.0, 0.0, 0.0],
        followup=[1.0, 2.0, 1.5, 3.0],
        event=[True, False, True, True],
    )
    two = dm.fit_additive(four, use_mediator=False, use_covariates=False)
    ok &= abs(two.treatment(3.0) - (-1.0)) < 1e-12
    ok &= abs(two.baseline(3.0) - 1.5) < 1e-12

    report("criterion 2 (Nelson-Aalen equivalence, 1e-12)", ok)


def test_criterion_3_parameter_recovery():
    ds = dm.simulate_cohort(constant_params(), 5000, seed=3)
    eff = fitted_effects(ds)
    chde_slope = eff.chde(2.0) / 2.0
    chie_slope = eff.chie(2.0) / 2.0
    ok = abs(chde_slope - 0.10) < 0.03 and abs(chie_slope - 0.03) < 0.012
    report(
        "criterion 3 (parameter recovery at n=5000)",
        ok,
        f"CHDE(2)/2={chde_slope:.4f} target 0.10+-0.03, CHIE(2)/2={chie_slope:.4f} target 0.03+-0.012",
    )


def test_criterion_4_g_formula_oracle():
    params = three_visit_params()
    grid = [0.5, 1.0, 2.0]
    exact = dm.closed_form_effects(params, grid)
    seeds = np.random.SeedSequence(2024).generate_state(3)
    q_aa = dm.mc_survival(params, intervened(1.0, 1.0), 100_000, int(seeds[0]), grid)
    q_aas = dm.mc_survival(params, intervened(1.0, 0.0), 100_000, int(seeds[1]), grid)
    q_asas = dm.mc_survival(params, intervened(0.0, 0.0), 100_000, int(seeds[2]), grid)

    ok = True
    detail = []
    for j, t in enumerate(grid):
        sie_mc = q_aa.survival[j] / q_aas.survival[j]
        sie_se = sie_mc * np.hypot(q_aa.std_error[j] / q_aa.survival[j], q_aas.std_error[j] / q_aas.survival[j])
        sde_mc = q_aas.survival[j] / q_asas.survival[j]
        sde_se = sde_mc * np.hypot(q_aas.std_error[j] / q_aas.survival[j], q_asas.std_error[j] / q_asas.survival[j])
        ok &= abs(exact.sie[j] - sie_mc) < 3 * sie_se
        ok &= abs(exact.sde[j] - sde_mc) < 3 * sde_se
        detail.append(f"t={t}: |dSIE|={abs(exact.sie[j] - sie_mc):.2e}<{3 * sie_se:.2e}")
    report("criterion 4 (g-formula oracle, 3 combined MC SEs)", ok, "; ".join(detail))


def test_criterion_5_measurement_error_round_trip():
    # the /kappa correction targets the marginal mediator reliability, so the
    # round trip is clean when the mediator's residual variance dominates the
    # treatment signal; mu keeps the hazard positive despite the wide mediator
    ds = dm.simulate_cohort(constant_params(mu=0.4, sigma=5.0), 20_000, seed=12)
    clean = fitted_effects(ds).chie(2.0)
    noisy_ds = dm.add_noise(ds, kappa=0.72, seed=1)
    noisy_eff = fitted_effects(noisy_ds)
    noisy = noisy_eff.chie(2.0)
    corrected = dm.correct_measurement_error(noisy_eff, 0.72).chie(2.0)
    ok = abs(corrected - clean) < 0.10 * abs(clean) and noisy < clean
    report(
        "criterion 5 (kappa=0.72 round trip)",
        ok,
        f"clean CHIE(2)={clean:.4f}, noisy={noisy:.4f}, corrected={corrected:.4f}",
    )


def test_criterion_6_bootstrap_coverage():
    params = constant_params()
    truth = dm.closed_form_effects(params, [1.0]).chte[0]
    covered = 0
    for rep in range(100):
        cohort = dm.simulate_cohort(params, 1000, seed=1000 + rep)
        bands = dm.bootstrap_bands(cohort, CONTRAST, B=200, seed=rep, grid=[1.0])
        if bands.lower["chte"][0] <= truth <= bands.upper["chte"][0]:
            covered += 1
    ok = 88 <= covered <= 100
    report("criterion 6 (95% band coverage of CHTE(1))", ok, f"covered {covered}/100, target [88, 100]")


def test_criterion_7_survivor_independence():
    params = SimulationParams(
        schedule=dm.Schedule([0.0]),
        mu=[0.2],
        alpha=[0.0],
        beta=[0.0],
        rho=[[1.2, 1.2]],
        lambdas=[0.0],
        deltas=[[0.0, 0.0]],
        b=np.zeros((1, 1)),
        sigma=[1.0],
        baseline=(
            {"dist": "uniform", "low": 0.0, "high": 1.0},
            {"dist": "uniform", "low": 0.0, "high": 1.0},
        ),
        t_max=1.0,
    )
    hits = 0
    death_rates = []
    for rep in range(100):
        ds = dm.simulate_cohort(params, 1000, seed=500 + rep)
        survivors = ds.followup >= 1.0
        death_rates.append(1.0 - survivors.mean())
        c = ds.baseline[survivors]
        rho_hat = np.corrcoef(c[:, 0], c[:, 1])[0, 1]
        if abs(rho_hat) < 3 / np.sqrt(survivors.sum()):
            hits += 1
    ok = hits >= 95 and min(death_rates) >= 0.5
    report(
        "criterion 7 (survivor covariate independence)",
        ok,
        f"{hits}/100 within 3/sqrt(n_surv), min death rate {min(death_rates):.2f}",
    )


def test_criterion_8_determinism(tmp_path):
    params = three_visit_params()
    ok = io.dump_cohort(dm.simulate_cohort(params, 300, seed=7)) == io.dump_cohort(
        dm.simulate_cohort(params, 300, seed=7)
    )

    cohort = dm.simulate_cohort(constant_params(), 300, seed=7)
    runs = [dm.bootstrap_bands(cohort, CONTRAST, B=24, seed=4, grid=[1.0], n_jobs=j) for j in (1, 2, 2)]
    for other in runs[1:]:
        for name in ("chde", "chie", "chte", "sde", "sie", "ste"):
            ok &= np.array_equal(runs[0].lower[name], other.lower[name])
            ok &= np.array_equal(runs[0].upper[name], other.upper[name])

    params_path = tmp_path / "params.json"
    params_path.write_text(
        json.dumps(
            {
                "schedule": [0.0],
                "hazard": {"mu": [0.05], "alpha": [0.10], "beta": [0.02]},
                "mediator": {"lambda": [1.5], "sigma": [1.0]},
                "censoring": {"t_max": 2.0},
            }
        )
    )
    outputs = []
    for tag in ("a", "b"):
        cohort_dir = tmp_path / f"cohort{tag}"
        fit = tmp_path / f"fit{tag}.json"
        bands = tmp_path / f"bands{tag}.csv"
        assert main(["simulate", "--params", str(params_path), "--n", "200", "--seed", "9", "--out", str(cohort_dir)]) == 0
        assert main(["fit", "--data", str(cohort_dir), "--out", str(fit)]) == 0
        assert (
            main(["bootstrap", "--data", str(cohort_dir), "--contrast", "1,0", "--B", "20",
                  "--seed", "2", "--grid", "1.0", "--jobs", "2", "--out", str(bands)])
            == 0
        )
        outputs.append(
            ((cohort_dir / "subjects.csv").read_text(), (cohort_dir / "mediators.csv").read_text(),
             fit.read_text(), bands.read_text())
        )
    ok &= outputs[0] == outputs[1]

    report("criterion 8 (byte-identical determinism incl. parallelism)", ok)
