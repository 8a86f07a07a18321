"""Command-line front end: simulate -> fit -> effects -> bootstrap pipelines
emitting plot-ready delimited tables."""

import argparse
import sys

import numpy as np

from . import io
from .aalen import fit_additive
from .bootstrap import CURVES, bootstrap_bands
from .effects import Contrast, correct_measurement_error, cumulative_effects, survival_effects
from .mediator import fit_marginal
from .simulate import OBSERVATIONAL, closed_form_effects, intervened, mc_survival, simulate_cohort


def _parse_contrast(text):
    a, a_star = (float(v) for v in text.split(","))
    return Contrast(a, a_star)


def _parse_grid(text):
    return np.asarray([float(v) for v in text.split(",")])


def _parse_regime(text):
    if text == "observational":
        return OBSERVATIONAL
    a_d, a_m = (float(v) for v in text.split(","))
    return intervened(a_d, a_m)


def _cmd_simulate(args):
    params = io.load_params(args.params)
    cohort = simulate_cohort(params, args.n, args.seed, _parse_regime(args.regime))
    io.write_cohort(cohort, args.out)


def _cmd_fit(args):
    dataset = io.read_cohort(args.data)
    cumcoef = fit_additive(dataset)
    medcoef = fit_marginal(dataset)
    io.save_fit(args.out, cumcoef, medcoef, dataset.schedule)
    if cumcoef.skipped_events:
        print(f"skipped {cumcoef.skipped_events} rank-deficient event times", file=sys.stderr)


def _effects_columns(eff, prefix=""):
    surv = survival_effects(eff)
    t = eff.chde.jumps
    return {
        f"{prefix}chde": np.atleast_1d(eff.chde(t)),
        f"{prefix}chie": np.atleast_1d(eff.chie(t)),
        f"{prefix}chte": np.atleast_1d(eff.chte(t)),
        f"{prefix}sde": surv.sde,
        f"{prefix}sie": surv.sie,
        f"{prefix}ste": surv.ste,
    }


def _cmd_effects(args):
    cumcoef, medcoef, schedule = io.load_fit(args.fit)
    eff = cumulative_effects(cumcoef, medcoef, schedule, _parse_contrast(args.contrast))
    columns = {"time": eff.chde.jumps}
    columns.update(_effects_columns(eff))
    if args.kappa is not None:
        columns.update(_effects_columns(correct_measurement_error(eff, args.kappa), prefix="corr_"))
    io.write_table(args.out, columns)


def _cmd_bootstrap(args):
    dataset = io.read_cohort(args.data)
    grid = _parse_grid(args.grid) if args.grid else None
    bands = bootstrap_bands(
        dataset,
        _parse_contrast(args.contrast),
        B=args.B,
        seed=args.seed,
        grid=grid,
        level=args.level,
        n_jobs=args.jobs,
    )
    columns = {"time": bands.grid}
    for name in CURVES:
        columns[name] = bands.point[name]
        columns[f"{name}_lower"] = bands.lower[name]
        columns[f"{name}_upper"] = bands.upper[name]
    io.write_table(args.out, columns)
    if bands.failed_replicates:
        print(f"{bands.failed_replicates} of {bands.replicates} replicates failed", file=sys.stderr)


def _cmd_oracle(args):
    params = io.load_params(args.params)
    grid = _parse_grid(args.grid)
    exact = closed_form_effects(params, grid)
    a, a_star = params.contrast.a, params.contrast.a_star
    seeds = np.random.SeedSequence(args.seed).generate_state(3)
    q_aa = mc_survival(params, intervened(a, a), args.n_mc, int(seeds[0]), grid)
    q_aas = mc_survival(params, intervened(a, a_star), args.n_mc, int(seeds[1]), grid)
    q_asas = mc_survival(params, intervened(a_star, a_star), args.n_mc, int(seeds[2]), grid)
    io.write_table(
        args.out,
        {
            "time": grid,
            "chde": exact.chde,
            "chie": exact.chie,
            "chte": exact.chte,
            "sde": exact.sde,
            "sie": exact.sie,
            "mc_sie": q_aa.survival / q_aas.survival,
            "mc_sde": q_aas.survival / q_asas.survival,
            "mc_q_aa": q_aa.survival,
            "mc_q_aastar": q_aas.survival,
            "mc_q_astarastar": q_asas.survival,
            "mc_se_aa": q_aa.std_error,
            "mc_se_aastar": q_aas.std_error,
            "mc_se_astarastar": q_asas.std_error,
        },
    )


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dynmed",
        description="Dynamic-path mediation analysis for survival data under the additive hazards model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a cohort from a params file")
    p.add_argument("--params", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output cohort directory")
    p.add_argument("--regime", default="observational", help='"observational" or "a_direct,a_mediator"')
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="fit additive hazards and mediator models to a cohort")
    p.add_argument("--data", required=True, help="cohort directory")
    p.add_argument("--out", required=True, help="output fit JSON")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser(
        "effects",
        help="effect table from a fit; columns: time, chde, chie, chte, sde, sie, ste"
        " (plus corr_* columns when --kappa is given; corr_chte equals chte)",
    )
    p.add_argument("--fit", required=True)
    p.add_argument("--contrast", required=True, help='"a,a_star"')
    p.add_argument("--kappa", type=float, default=None, help="mediator reliability in (0, 1]")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_effects)

    p = sub.add_parser(
        "bootstrap",
        help="banded effect table; columns: time, then <curve>, <curve>_lower, <curve>_upper"
        " for chde, chie, chte, sde, sie, ste",
    )
    p.add_argument("--data", required=True, help="cohort directory")
    p.add_argument("--contrast", required=True)
    p.add_argument("--B", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--grid", default=None, help="comma-separated times; default: event times")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bootstrap)

    p = sub.add_parser("oracle", help="closed-form and Monte-Carlo curves side by side")
    p.add_argument("--params", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--n-mc", type=int, default=100_000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - single diagnostic exit point
        print(f"dynmed: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
