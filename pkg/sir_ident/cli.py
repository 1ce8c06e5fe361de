"""Command-line interface.

Every command reads its parameters from the defaults, an optional YAML
experiment file (``--config``), the environment, an optional JSON
parameter file (``--params``) and ``KEY VALUE`` overrides, in that order.
"""
from __future__ import annotations

import functools
import json
import logging
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import click
import numpy as np
import pandas as pd

from sir_ident.config import initial_conditions_from_cfg, load_config, params_from_cfg
from sir_ident.errors import SirIdentError
from sir_ident.experiments.harness import IMMUNITY_SURVEY_STREAM, REPORTING_SURVEY_STREAM, ExperimentConfig, run_experiment
from sir_ident.experiments.replicates import Branch
from sir_ident.experiments.report import write_report
from sir_ident.inference.estimation import (
    KnownParameter,
    SummaryStats,
    SurveyKind,
    estimate_remaining,
    fit_growth_rate,
    predicted_reported_final_size,
)
from sir_ident.inference.identifiability import (
    Pin,
    PinKind,
    certify_identity,
    default_pi_grid,
    equivalent_params,
    identity_table,
    invariants_of,
    manifold_scan,
    scan_frame,
)
from sir_ident.inference.likelihood import (
    finite_difference_gradient,
    finite_difference_hessian,
    gradient,
    hessian,
    likelihood_input_from_log,
    log_likelihood,
    max_relative_error,
)
from sir_ident.inference.surveys import survey_immunity, survey_reporting_at_peak
from sir_ident.model.gillespie import EventKind, compartment_table, final_reported_fraction, simulate
from sir_ident.model.ode import (
    TimeGrid,
    has_converged,
    integrate_full,
    integrate_reduced,
    reconstruct_compartments,
    reported_final_fraction,
)
from sir_ident.model.parameters import derived_rates
from sir_ident.util.csv_io import FLOAT_FORMAT, event_log_frame, read_event_log_csv, write_frame
from sir_ident.util.results_database_helper import ResultsDatabaseHelper
from sir_ident.util.seeding import SeededRng

logger = logging.getLogger(__name__)

LOG_FORMAT = "[%(levelname)s] %(name)s: %(message)s"


def setup_logging(verbosity: int = 0):
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def domain_errors(command):
    """Report package errors as a click error (exit status 1) instead of a traceback."""
    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (SirIdentError, ValueError) as e:
            raise click.ClickException(f"{type(e).__name__}: {e}") from e
    return wrapper


def common_options(command):
    command = click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json",
                           show_default=True, help="Output format.")(command)
    command = click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None,
                           help="Output file; standard output when omitted.")(command)
    command = click.option("--params", "params_file", type=click.Path(exists=True, dir_okay=False), default=None,
                           help="JSON parameter file.")(command)
    command = click.option("--seed", type=int, default=None, help="Seed; defaults to EXPERIMENT.MASTER_SEED.")(command)
    return command


def _load(ctx: click.Context, params_file):
    return load_config(ctx.obj.get("config_file"), ctx.obj.get("opts"), params_file)


def _seed(cfg, seed):
    return int(cfg.EXPERIMENT.MASTER_SEED) if seed is None else seed


def _emit_json(data: dict, out: Path | None):
    text = json.dumps(data, indent=2)
    if out is None:
        click.echo(text)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text + "\n")
    logger.info("wrote %s", out)


def _emit_frame(frame: pd.DataFrame, out: Path | None):
    if out is None:
        click.echo(frame.to_csv(index=False, float_format=FLOAT_FORMAT), nl=False)
    else:
        write_frame(frame, out)


@click.group()
@click.option("-v", "--verbose", count=True, help="-v for INFO, -vv for DEBUG.")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="YAML experiment file merged over the defaults.")
@click.option("--opt", "opts", nargs=2, multiple=True, metavar="KEY VALUE",
              help="Config override, e.g. --opt INIT.N 2000.")
@click.pass_context
def cli(ctx, verbose, config_file, opts):
    """SIR model with under-reporting and prior immunity."""
    setup_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj["config_file"] = config_file
    ctx.obj["opts"] = [item for pair in opts for item in pair]


@cli.command("simulate")
@common_options
@click.option("--end-time", type=float, default=None, help="Horizon; runs to extinction when omitted.")
@click.option("--table", is_flag=True, help="Write aggregated S, I, R and N1..N4 instead of the event log.")
@click.pass_context
@domain_errors
def simulate_command(ctx, seed, params_file, out, fmt, end_time, table):
    """Simulate one stochastic epidemic."""
    cfg = _load(ctx, params_file)
    params, init = params_from_cfg(cfg), initial_conditions_from_cfg(cfg)
    if end_time is None:
        end_time = float(cfg.SIMULATION.END_TIME) or math.inf
    rng = SeededRng(_seed(cfg, seed))
    log = simulate(params, init, end_time=end_time, rng=rng)

    if fmt == "csv":
        _emit_frame(compartment_table(log) if table else event_log_frame(log), out)
        return
    final = log.final_state
    _emit_json({
        "seed": rng.seed,
        "events": len(log),
        "end_time": float(log.all_times[-1]),
        "extinct": log.is_extinct,
        "final_state": {"S": int(final.s), "Ir": int(final.i_r), "Iu": int(final.i_u),
                        "Rr": int(final.r_r), "Ru": int(final.r_u)},
        "final_reported_fraction": final_reported_fraction(log) if log.is_extinct else None,
    }, out)


@cli.command("integrate")
@common_options
@click.option("--t-end", type=float, default=None, help="Defaults to ODE.T_END.")
@click.option("--dt", type=float, default=None, help="Defaults to ODE.DT.")
@click.option("--stride", type=int, default=None, help="Keep every stride-th grid point; defaults to ODE.STRIDE.")
@click.option("--reduced", is_flag=True, help="Solve the single I_r equation and reconstruct the rest.")
@click.pass_context
@domain_errors
def integrate_command(ctx, seed, params_file, out, fmt, t_end, dt, stride, reduced):
    """Integrate the deterministic model with fixed-step RK4."""
    cfg = _load(ctx, params_file)
    params, init = params_from_cfg(cfg), initial_conditions_from_cfg(cfg)
    grid = TimeGrid(0.0, t_end if t_end is not None else float(cfg.ODE.T_END), dt if dt is not None else float(cfg.ODE.DT))
    if reduced:
        path = reconstruct_compartments(integrate_reduced(params, init, grid), params, init)
    else:
        path = integrate_full(params, init, grid)

    if fmt == "csv":
        _emit_frame(path.to_frame(stride if stride is not None else int(cfg.ODE.STRIDE)), out)
        return
    _emit_json({
        "t_end": grid.t_end,
        "dt": grid.dt,
        "reduced": reduced,
        "reported_final_fraction": reported_final_fraction(path),
        "predicted_reported_final_size": predicted_reported_final_size(params),
        "converged": has_converged(path, params),
    }, out)


@cli.command("equivalent")
@common_options
@click.option("--pin", "pin_kind", type=click.Choice([kind.value for kind in PinKind]), required=True,
              help="Parameter of the equivalent set to fix.")
@click.option("--value", "pin_value", type=float, required=True, help="Value of the pinned parameter.")
@click.option("--t-end", type=float, default=None, help="Defaults to IDENTIFIABILITY.T_END.")
@click.option("--dt", type=float, default=None, help="Defaults to IDENTIFIABILITY.DT.")
@click.pass_context
@domain_errors
def equivalent_command(ctx, seed, params_file, out, fmt, pin_kind, pin_value, t_end, dt):
    """Find the parameter set with the same reported trajectory and certify it."""
    cfg = _load(ctx, params_file)
    base, init = params_from_cfg(cfg), initial_conditions_from_cfg(cfg)
    other = equivalent_params(base, Pin(PinKind(pin_kind), pin_value))
    grid = TimeGrid(0.0, t_end if t_end is not None else float(cfg.IDENTIFIABILITY.T_END),
                    dt if dt is not None else float(cfg.IDENTIFIABILITY.DT))

    if fmt == "csv" or (out is not None and out.suffix == ".csv"):
        _emit_frame(identity_table(base, other, init, grid), out)
        return
    report = certify_identity(base, other, init, grid, tol=float(cfg.IDENTIFIABILITY.TOL) * init.n)
    _emit_json({
        "base": {**base.to_dict(), "beta_star": base.beta_star},
        "equivalent": {**other.to_dict(), "beta_star": other.beta_star},
        "invariants": {"base": asdict(invariants_of(base)), "equivalent": asdict(invariants_of(other))},
        "identity": asdict(report),
    }, out)


@cli.command("scan")
@common_options
@click.option("--rho", type=float, default=None, help="Observed growth rate; defaults to the model's rho.")
@click.option("--zr", type=float, default=None, help="Observed final reported fraction; defaults to the model's z_r.")
@click.option("--points", type=int, default=None, help="Number of pi values; defaults to IDENTIFIABILITY.SCAN_POINTS.")
@click.pass_context
@domain_errors
def scan_command(ctx, seed, params_file, out, fmt, rho, zr, points):
    """Trace the parameter sets consistent with a growth rate and a final reported fraction."""
    cfg = _load(ctx, params_file)
    params = params_from_cfg(cfg)
    rho = derived_rates(params).rho if rho is None else rho
    zr = predicted_reported_final_size(params) if zr is None else zr
    points = int(cfg.IDENTIFIABILITY.SCAN_POINTS) if points is None else points
    grid = default_pi_grid(rho, params.gamma, points)
    frame = scan_frame(manifold_scan(rho, zr, params.gamma, pi_grid=grid))

    if fmt == "csv":
        _emit_frame(frame, out)
        return
    _emit_json({"rho": rho, "z_r": zr, "gamma": params.gamma, "points": frame.to_dict(orient="records")}, out)


@cli.command("estimate")
@common_options
@click.option("--log", "log_file", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Event-log CSV; a fresh epidemic is simulated when omitted.")
@click.option("--known", type=click.Choice([kind.value for kind in SurveyKind]), default=SurveyKind.IMMUNITY_AT_T0.value,
              show_default=True, help="Which parameter is supplied.")
@click.option("--value", "known_value", type=float, default=None,
              help="Supplied value; drawn from a survey of ESTIMATION.SURVEY_SIZE when omitted.")
@click.option("--fit-table", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="Also write (t, log N1, fitted) of the growth fit to this CSV.")
@click.pass_context
@domain_errors
def estimate_command(ctx, seed, params_file, out, fmt, log_file, known, known_value, fit_table):
    """Estimate beta*, p and pi from one epidemic and one supplied value."""
    cfg = _load(ctx, params_file)
    params, init = params_from_cfg(cfg), initial_conditions_from_cfg(cfg)
    rng = SeededRng(_seed(cfg, seed))
    log = read_event_log_csv(log_file) if log_file else simulate(params, init, rng=rng)

    fit = fit_growth_rate(log, float(cfg.ESTIMATION.GROWTH_THRESHOLD),
                          include_initial=bool(cfg.ESTIMATION.INCLUDE_INITIAL))
    stats = SummaryStats(rho_hat=fit.rho_hat, z_r_hat=final_reported_fraction(log), gamma=params.gamma)
    kind = SurveyKind(known)
    if known_value is not None:
        supplied = KnownParameter(kind, known_value)
    elif kind is SurveyKind.IMMUNITY_AT_T0:
        supplied = survey_immunity(log.initial_state, int(cfg.ESTIMATION.SURVEY_SIZE), rng.spawn(IMMUNITY_SURVEY_STREAM))
    else:
        supplied = survey_reporting_at_peak(log, int(cfg.ESTIMATION.SURVEY_SIZE), rng.spawn(REPORTING_SURVEY_STREAM))
    result = estimate_remaining(stats, supplied)

    if fit_table is not None:
        reported = log.times[log.kinds == EventKind.REPORTED_INFECTION][:fit.n_points]
        write_frame(pd.DataFrame({
            "t": reported,
            "log_N1": np.log(np.arange(1, len(reported) + 1)),
            "fitted": fit.fitted_curve(reported),
        }), fit_table)

    data = {
        "rho_hat": stats.rho_hat,
        "z_r_hat": stats.z_r_hat,
        "z_hat": result.z_hat,
        "supplied": {"kind": kind.value, "value": supplied.value},
        "p_hat": result.p_hat,
        "pi_hat": result.pi_hat,
        "beta_star_hat": result.beta_star_hat,
    }
    if fmt == "csv":
        _emit_frame(pd.DataFrame([{**{k: v for k, v in data.items() if k != "supplied"},
                                   "supplied_kind": kind.value, "supplied_value": supplied.value}]), out)
        return
    _emit_json(data, out)


@cli.command("experiment")
@common_options
@click.option("--target", type=int, default=None, help="Major outbreaks to collect; defaults to EXPERIMENT.TARGET_OUTBREAKS.")
@click.option("--branch", type=click.Choice([branch.value for branch in Branch]), default=None,
              help="Defaults to EXPERIMENT.BRANCH.")
@click.option("--workers", type=int, default=None, help="Worker processes; defaults to EXPERIMENT.NUM_WORKERS.")
@click.option("--db", type=click.Path(dir_okay=False), default=None, help="Store the run in this SQLite file.")
@click.option("--no-progress", is_flag=True, help="Hide the progress bar.")
@click.pass_context
@domain_errors
def experiment_command(ctx, seed, params_file, out, fmt, target, branch, workers, db, no_progress):
    """Run the Monte Carlo estimation experiment."""
    cfg = _load(ctx, params_file)
    config = ExperimentConfig.from_cfg(cfg)
    overrides = {"master_seed": seed, "target_outbreaks": target, "num_workers": workers,
                 "branch": Branch(branch) if branch else None}
    config = replace(config, **{k: v for k, v in overrides.items() if v is not None})

    report = run_experiment(config, progress=not no_progress)
    out = out if out is not None else Path(cfg.OUTPUT_DIR) / "report"
    for path in write_report(report, out, fmt):
        click.echo(str(path))

    db = db or cfg.RESULTS_DB
    if db:
        run_id = ResultsDatabaseHelper(db).save_report(report)
        click.echo(f"stored as run {run_id} in {db}")


@cli.command("lik-check")
@common_options
@click.option("--log", "log_file", type=click.Path(exists=True, dir_okay=False), required=True,
              help="Event-log CSV.")
@click.option("--beta-star", type=float, default=None, help="Defaults to the model's beta*.")
@click.option("--p", "p_value", type=float, default=None, help="Defaults to MODEL.P.")
@click.option("--pi", "pi_value", type=float, default=None, help="Defaults to MODEL.PI.")
@click.option("--horizon", type=float, default=None, help="End of the window; defaults to the last event.")
@click.pass_context
@domain_errors
def lik_check_command(ctx, seed, params_file, out, fmt, log_file, beta_star, p_value, pi_value, horizon):
    """Evaluate the approximate likelihood and check its derivatives by finite differences."""
    cfg = _load(ctx, params_file)
    params = params_from_cfg(cfg)
    beta_star = params.beta_star if beta_star is None else beta_star
    p_value = params.p if p_value is None else p_value
    pi_value = params.pi if pi_value is None else pi_value
    data = likelihood_input_from_log(read_event_log_csv(log_file), params.gamma, horizon)
    step = float(cfg.LIKELIHOOD.FD_STEP)

    point = (beta_star, pi_value, p_value)
    grad = gradient(data, beta_star, p_value, pi_value)
    grad_fd = finite_difference_gradient(data, point, step)
    hess = hessian(data, beta_star, p_value, pi_value)
    hess_fd = finite_difference_hessian(data, point, step)
    result = {
        "point": {"beta_star": beta_star, "p": p_value, "pi": pi_value},
        "loglik": log_likelihood(data, beta_star, p_value, pi_value),
        "grad": grad.tolist(),
        "grad_fd": grad_fd.tolist(),
        "hessian": hess.tolist(),
        "hessian_fd": hess_fd.tolist(),
        "max_rel_err_grad": max_relative_error(grad, grad_fd),
        "max_rel_err_hess": max_relative_error(hess, hess_fd),
    }
    if fmt == "csv":
        _emit_frame(pd.DataFrame([{"beta_star": beta_star, "p": p_value, "pi": pi_value,
                                   "loglik": result["loglik"],
                                   "max_rel_err_grad": result["max_rel_err_grad"],
                                   "max_rel_err_hess": result["max_rel_err_hess"]}]), out)
        return
    _emit_json(result, out)


@cli.command("runs")
@click.option("--db", type=click.Path(dir_okay=False), default=None, help="SQLite file; defaults to RESULTS_DB.")
@click.option("--show", "show_id", type=int, default=None, help="Print the replicate rows of this run.")
@click.option("--delete", "delete_id", type=int, default=None, help="Delete this run.")
@click.pass_context
@domain_errors
def runs_command(ctx, db, show_id, delete_id):
    """List, show or delete stored experiment runs."""
    cfg = _load(ctx, None)
    db = db or cfg.RESULTS_DB
    if not db:
        raise click.UsageError("no database: pass --db or set RESULTS_DB / SIR_IDENT_RESULTS_DB")
    helper = ResultsDatabaseHelper(db)
    if delete_id is not None:
        if not helper.delete_run(delete_id):
            raise click.ClickException(f"no stored run with id {delete_id}")
        click.echo(f"deleted run {delete_id}")
        return
    if show_id is not None:
        try:
            frame = helper.load_replicates(show_id)
        except KeyError as e:
            raise click.ClickException(str(e.args[0])) from e
        click.echo(frame.to_csv(index=False, float_format=FLOAT_FORMAT), nl=False)
        return
    click.echo(helper.get_runs().to_string(index=False))