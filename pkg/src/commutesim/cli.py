"""Command-line entry point: ``commutesim <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from .types import ConfigError, DataError

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4

log = logging.getLogger("commutesim")


def _load(args):
    from .config import load_scenario
    cfg = load_scenario(args.scenario)
    sim = cfg.simulation
    if getattr(args, "seed", None) is not None:
        sim.master_seed = args.seed
    if getattr(args, "years", None) is not None:
        sim.years = args.years
    if getattr(args, "agents", None) is not None:
        cfg.population.n_agents = args.agents
    return cfg.validate()


def _write_toml(path, data: dict) -> None:
    import tomli_w
    Path(path).write_text(tomli_w.dumps(data))


# ---------------------------------------------------------------------------
# subcommands

def cmd_run(args) -> int:
    from .harness import export_results, run_batch
    cfg = _load(args)
    result = run_batch(cfg, args.reps, args.jobs)
    paths = export_results(result, args.out)
    print(f"{result.scenario}: {result.reps} replications, {cfg.simulation.years} years")
    for ind in ("share_car", "share_moto", "share_pub"):
        first = result.values(ind, 0).mean()
        m, lo, hi = result.terminal(ind)
        print(f"  {ind:<11} {first:.3f} -> {m:.3f}  (95% CI {lo:.3f}-{hi:.3f})")
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    from .harness import export_results, paired_gain, run_sweep
    from .policy import parse_set_spec
    cfg = _load(args)
    subsets = parse_set_spec(args.policies)
    results = run_sweep(cfg, subsets, reps=args.reps, jobs=args.jobs)
    paths = export_results(results, args.out)
    base = results.get("base")
    print(f"{'scenario':<26} {'share_pub':>10} {'95% CI':>17} {'gain':>8} {'p (paired, >0)':>15}")
    for name, res in results.items():
        m, lo, hi = res.terminal("share_pub")
        line = f"{name:<26} {m:10.3f} {lo:8.3f}-{hi:8.3f}"
        if base is not None and name != "base":
            g = paired_gain(res, base)
            line += f" {g['gain']:+8.3f} {g['p']:15.4g}"
        print(line)
    print(f"wrote {', '.join(str(p) for p in paths.values())}")
    return EXIT_OK


def cmd_cv_check(args) -> int:
    import warnings
    from .harness import cv_stabilization
    cfg = _load(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = cv_stabilization(cfg, args.indicator, args.max_reps, args.tol, jobs=args.jobs)
    print(f"{'reps':>5} {'CV':>10}")
    for r, cv in res.trace:
        print(f"{r:5d} {cv:10.5f}")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"recommended replications: {res.recommended}" + ("" if res.stabilized else " (not stabilised)"))
    return EXIT_OK


def cmd_fit_bass(args) -> int:
    from .calibration.bass import bass_fit, read_registry
    years, counts = read_registry(args.registry, not args.lenient)
    fit = bass_fit(years, counts, strict=not args.lenient)
    p = fit.params
    pred = fit.predict(years)
    print(f"Bass fit on {len(years)} points ({int(years[0])}-{int(years[-1])}), t0 = {fit.t0:g}")
    print(f"  p = {p.p:.6g}  q = {p.q:.6g}  m = {p.m:.6g}  SSR = {p.residual:.6g}")
    print(f"  peak adoption at t = {p.peak_time:.3f} (year {fit.t0 + p.peak_time:.1f})")
    for y, c, f in zip(years, counts, pred):
        print(f"  {int(y)} {c:12.1f} {f:12.1f}")
    if args.out:
        _write_toml(args.out, {"bass": {"p": p.p, "q": p.q, "m": p.m, "t0": fit.t0, "ssr": p.residual}})
        print(f"wrote {args.out}")
    return EXIT_OK


def _design(df: pd.DataFrame, cols: list[str], intercept: bool) -> tuple[np.ndarray, list[str]]:
    parts, names = [], []
    if intercept:
        parts.append(np.ones((len(df), 1)))
        names.append("const")
    for c in cols:
        if c not in df.columns:
            raise DataError(f"column {c!r} not in survey")
        num = pd.to_numeric(df[c], errors="coerce")
        if num.notna().all():
            parts.append(num.to_numpy(float)[:, None])
            names.append(c)
        else:
            levels = sorted(df[c].astype(str).unique())
            for lv in levels[1:]:
                parts.append((df[c].astype(str) == lv).to_numpy(float)[:, None])
                names.append(f"{c}={lv}")
    return np.hstack(parts), names


def cmd_fit_mnl(args) -> int:
    from .calibration.mnl import mnl_fit
    try:
        df = pd.read_csv(args.survey)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {args.survey}: {exc}") from None
    if args.choice not in df.columns:
        raise DataError(f"choice column {args.choice!r} not in survey")
    cols = [c.strip() for c in args.vars.split(",") if c.strip()]
    X, names = _design(df, cols, not args.no_intercept)
    y = df[args.choice].astype(str).to_numpy()
    alts = sorted(set(y.tolist()))
    if args.ref not in alts:
        raise DataError(f"reference {args.ref!r} is not a chosen alternative ({', '.join(alts)})")
    model = mnl_fit(X, y, alternatives=alts, covariates=names, reference=args.ref)
    print(model.summary(), end="")
    if args.out:
        coef = {a: dict(zip(names, map(float, model.coef[j]))) for j, a in enumerate(alts) if a != args.ref}
        _write_toml(args.out, {"mnl": {"reference": args.ref, "loglik": model.loglik, "coef": coef}})
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_stats(args) -> int:
    from .calibration.survey import normalize_weights, read_survey, stats_report
    df = read_survey(args.survey)
    print(stats_report(df), end="")
    if args.out:
        w = normalize_weights(df)
        _write_toml(args.out, {"population": {"weight_means": w["means"]}})
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_shares
    out = plot_shares(args.aggregate, args.output, scenario=args.scenario)
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .calibration.bass import bass_fit, compare_trajectories, read_registry
    from .harness import run_batch
    cfg = _load(args)
    result = run_batch(cfg, args.reps, args.jobs)
    years = np.arange(cfg.simulation.years + 1) + cfg.simulation.start_year
    moto = result.values("share_moto", None).mean(axis=0) * cfg.population.n_agents
    print(f"{result.scenario}: {result.reps} replications, mean motorcycle users per year")
    if args.registry:
        reg_years, reg_counts = read_registry(args.registry)
        fit = bass_fit(reg_years, reg_counts)
        reference = fit.predict(years)
        # compare growth trajectories as indices relative to the first simulated year
        abm_idx, ref_idx = moto / moto[0], reference / reference[0]
        print(f"Bass fit on registry: p={fit.params.p:.4g} q={fit.params.q:.4g} m={fit.params.m:.4g}")
        label = "index vs registry Bass forecast"
    else:
        fit = bass_fit(years, moto)
        abm_idx, ref_idx = moto, fit.predict(years)
        print(f"Bass fit on simulated series: p={fit.params.p:.4g} q={fit.params.q:.4g} m={fit.params.m:.4g}")
        label = "simulated vs fitted Bass curve"
    rmse, mape = compare_trajectories(abm_idx, ref_idx)
    for y, a, r in zip(years, abm_idx, ref_idx):
        print(f"  {int(y)} {a:12.4f} {r:12.4f}")
    print(f"{label}: RMSE={rmse:.4g} MAPE={mape:.3f}%")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commutesim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp, reps_default=None):
        sp.add_argument("scenario", help="scenario TOML file or bundled name (cali-default)")
        sp.add_argument("--reps", type=int, default=reps_default)
        sp.add_argument("--seed", type=int, help="master seed override")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--years", type=int, help="horizon override")
        sp.add_argument("--agents", type=int, help="population size override")

    sp = sub.add_parser("run", help="replicate one scenario and export results")
    scenario_args(sp)
    sp.add_argument("--out", default="results")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run policy combinations on common seeds")
    scenario_args(sp)
    sp.add_argument("--policies", default="all",
                    help='"all", "singles", "pairs", "triple" or e.g. "base,fare,fare+security"')
    sp.add_argument("--out", default="results")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("cv-check", help="replications needed for a stable coefficient of variation")
    sp.add_argument("scenario")
    sp.add_argument("--indicator", default="share_pub")
    sp.add_argument("--max-reps", type=int, default=100)
    sp.add_argument("--tol", type=float, default=0.005)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--years", type=int)
    sp.add_argument("--agents", type=int)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_cv_check)

    sp = sub.add_parser("fit-bass", help="fit a Bass curve to registry.csv (year,cumulative_count)")
    sp.add_argument("registry")
    sp.add_argument("--out", help="write fitted parameters as TOML")
    sp.add_argument("--lenient", action="store_true",
                    help="accept cumulative counts that dip (noisy or corrected registries)")
    sp.set_defaults(func=cmd_fit_bass)

    sp = sub.add_parser("fit-mnl", help="multinomial logit with Wald tests")
    sp.add_argument("survey")
    sp.add_argument("--choice", required=True)
    sp.add_argument("--ref", required=True, help="reference alternative")
    sp.add_argument("--vars", required=True, help="comma-separated covariate columns")
    sp.add_argument("--no-intercept", action="store_true")
    sp.add_argument("--out", help="write coefficients as TOML")
    sp.set_defaults(func=cmd_fit_mnl)

    sp = sub.add_parser("stats", help="group comparisons and normalised weights from survey.csv")
    sp.add_argument("survey")
    sp.add_argument("--out", help="write weight means as a TOML scenario fragment")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("plot", help="SVG chart of mode shares from aggregate.csv")
    sp.add_argument("aggregate")
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--scenario")
    sp.set_defaults(func=cmd_plot)

    sp = sub.add_parser("validate", help="compare simulated motorcycle uptake with a Bass trajectory")
    scenario_args(sp, reps_default=100)
    sp.add_argument("--registry", help="registry.csv to fit the reference curve")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime failure
        print(f"runtime failure: {exc}", file=sys.stderr)
        if args.verbose:
            raise
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
