"""Command line entry point: ``hybridsizing {size,dispatch,sweep,profile,retire,report}``."""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import economics as eco
from .config import ConfigError, TargetSpec, config_document, load_config
from .dispatch import availability, greedy_dispatch, max_availability_milp, write_schedule
from .model import (EXACT, HEURISTIC, PlantDesign, ScenarioConfig, build_mix_constrained_lp,
                    extract_solution, solve_scenario)
from .reporting import economic_report
from .solver import Status, solve_lp
from .synthetic import resource_fixture
from .timeseries import (HourlySeries, ResourceSet, load_series, synth_flexible_profile,
                         baseload_profile, write_target)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 10
EXIT_LIMIT = 11
EXIT_UNBOUNDED = 12
STATUS_EXIT = {Status.OPTIMAL: EXIT_OK, Status.INFEASIBLE: EXIT_INFEASIBLE,
               Status.ITERATION_LIMIT: EXIT_LIMIT, Status.UNBOUNDED: EXIT_UNBOUNDED}

COST_AXES = {"solar": "solar_usd_per_kw", "wind": "wind_usd_per_kw",
             "battery": "battery_energy_usd_per_kwh", "battery_power": "battery_power_usd_per_kw"}


class CommandError(click.ClickException):
    exit_code = EXIT_ERROR


def _clean(obj):
    """Make a document JSON-safe: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [_clean(v) for v in items]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, Status):
        return obj.value
    return obj


def _emit(doc_or_rows, out, fmt, columns=None):
    if fmt == "json":
        text = json.dumps(_clean(doc_or_rows), indent=2, sort_keys=True) + "\n"
    else:
        rows = doc_or_rows if isinstance(doc_or_rows, list) else [_flatten(doc_or_rows)]
        cols = columns or list(dict.fromkeys(k for r in rows for k in r))
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: _csv_cell(r.get(k, "")) for k in cols})
        text = buf.getvalue()
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=False)


def _csv_cell(v):
    v = _clean(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return v


def _flatten(doc, prefix=""):
    out = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif not isinstance(v, list):
            out[key] = v
    return out


def _origin(exc) -> str:
    """Name of the package module where ``exc`` was raised, for error messages."""
    tb, mod = exc.__traceback__, None
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("hybridsizing.") and name != __name__:
            mod = name
        tb = tb.tb_next
    return (mod or type(exc).__module__).split(".")[-1]


def _fail(exc):
    raise CommandError(f"[{_origin(exc)}] {exc}")


# --- shared inputs ---------------------------------------------------------

def _inputs(config_path, solar, wind, target_path, synthetic_years, seed, hours):
    try:
        if config_path:
            cfg, tspec = load_config(config_path)
        else:
            cfg, tspec = ScenarioConfig(), TargetSpec()
        if solar:
            s = load_series(solar, "solar_cf")
            w = load_series(wind or solar, "wind_cf")
            res = ResourceSet(s, w, Path(solar).stem)
        elif synthetic_years:
            res = resource_fixture(synthetic_years, seed=seed)
        else:
            raise CommandError("give --solar/--wind resource files or --synthetic-years")
        if hours:
            res = res.window(0, hours)
        if target_path:
            tspec = TargetSpec("file", tspec.peak_mw, path=target_path)
        target = tspec.build(res)
        if hours and len(target) > hours:
            target = target.window(0, hours)
        return cfg, tspec, res, target
    except CommandError:
        raise
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        _fail(exc)


def _common(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="scenario JSON file"),
        click.option("--solar", type=click.Path(dir_okay=False),
                     help="resource CSV providing solar_cf"),
        click.option("--wind", type=click.Path(dir_okay=False),
                     help="resource CSV providing wind_cf (defaults to --solar)"),
        click.option("--target", "target_path", type=click.Path(dir_okay=False),
                     help="target CSV (hour,target_mw); overrides the config target"),
        click.option("--synthetic-years", type=int, default=0,
                     help="use a synthetic fixture of this many years"),
        click.option("--seed", type=int, default=0, help="seed for the synthetic fixture"),
        click.option("--hours", type=int, default=0, help="use only the first N hours"),
        click.option("--out", type=click.Path(dir_okay=False), help="output file (default stdout)"),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json"),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


@click.group()
def main():
    """Size solar + wind + battery plants against hourly target profiles."""


# --- size --------------------------------------------------------------------

def _size_document(result, sol, cfg, tspec, mode):
    if result is None:
        doc = {"status": sol.status.value, "reason": sol.message,
               "scenario": config_document(cfg, tspec)}
        if sol.farkas is not None:
            doc["certificate_nonzeros"] = int(np.count_nonzero(sol.farkas))
        if sol.bound is not None and math.isfinite(sol.bound):
            doc["bound"] = sol.bound
        return doc
    econ = economic_report(result.design, cfg, result.annual_target_mwh,
                           result.curtailed_energy_mwh_per_year)
    sched = result.dispatch
    doc = {
        "status": sol.status.value,
        "design": result.design.as_dict(),
        "objective_usd_per_mwh": result.objective_usd_per_mwh,
        "annual_target_mwh": result.annual_target_mwh,
        "curtailed_energy_mwh_per_year": result.curtailed_energy_mwh_per_year,
        "wind_share": _wind_share(result.design),
        "exempt_hours": sorted(sched.exempt_hours),
        "economics": econ,
        "scenario": config_document(cfg, tspec),
        "solver": {"iterations": sol.iterations, "nodes": sol.nodes, "mode": mode,
                   "kkt": sol.residuals.as_dict() if sol.residuals else None},
    }
    if sol.status != Status.OPTIMAL:
        doc["bound"] = sol.bound
        doc["reason"] = sol.message
    return doc


def _wind_share(design):
    tot = design.solar_mw + design.wind_mw
    return design.wind_mw / tot if tot > 0 else 0.0


@main.command()
@_common
@click.option("--mode", type=click.Choice([EXACT, HEURISTIC]), default=None,
              help="availability relaxation (default: exact up to the MILP horizon cap)")
@click.option("--schedule", type=click.Path(dir_okay=False), help="also write the hourly schedule")
@click.option("--time-limit", type=float, default=None, help="seconds; exit 11 when reached")
@click.option("--availability", type=float, default=None, help="override the config value")
def size(config_path, solar, wind, target_path, synthetic_years, seed, hours, out, fmt, mode,
         schedule, time_limit, availability):
    """Solve the sizing LP and write the design with its economics."""
    cfg, tspec, res, target = _inputs(config_path, solar, wind, target_path, synthetic_years,
                                      seed, hours)
    if availability is not None:
        try:
            cfg = cfg.with_(availability=availability)
        except ValueError as exc:
            _fail(exc)
    try:
        result, sol = solve_scenario(res, target, cfg, mode=mode, time_limit=time_limit)
    except ValueError as exc:
        _fail(exc)
    if cfg.availability >= 1.0:
        mode = "lp"
    elif mode is None:
        mode = EXACT if len(target) <= cfg.milp_horizon_cap else HEURISTIC
    doc = _size_document(result, sol, cfg, tspec, mode)
    _emit(doc, out, fmt)
    if schedule and result is not None:
        write_schedule(schedule, result.dispatch)
    sys.exit(STATUS_EXIT[sol.status])


# --- dispatch -------------------------------------------------------------------

@main.command()
@_common
@click.option("--solar-mw", type=float, required=True)
@click.option("--wind-mw", type=float, required=True)
@click.option("--battery-mwh", type=float, required=True)
@click.option("--method", type=click.Choice(["greedy", "milp"]), default="greedy")
@click.option("--tolerance-mw", type=float, default=1e-6)
def dispatch(config_path, solar, wind, target_path, synthetic_years, seed, hours, out, fmt,
             solar_mw, wind_mw, battery_mwh, method, tolerance_mw):
    """Simulate a fixed design; CSV output is the hourly schedule."""
    cfg, tspec, res, target = _inputs(config_path, solar, wind, target_path, synthetic_years,
                                      seed, hours)
    design = PlantDesign(solar_mw, wind_mw, battery_mwh, cfg.storage.duration_hours)
    if method == "greedy":
        sched = greedy_dispatch(design, res, target, cfg)
    else:
        try:
            sched = max_availability_milp(design, res, target, cfg)
        except ValueError as exc:
            _fail(exc)
    if fmt == "csv":
        if out:
            write_schedule(out, sched)
        else:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["hour", "charge_mw", "discharge_mw", "soc_mwh", "curtailment_mw",
                        "shortfall_mw"])
            for t in range(len(sched)):
                w.writerow([t] + [repr(float(a[t])) for a in (
                    sched.charge_mw, sched.discharge_mw, sched.soc_mwh,
                    sched.curtailment_mw, sched.shortfall_mw)])
            click.echo(buf.getvalue(), nl=False)
        return
    doc = {"design": design.as_dict(), "method": method,
           "availability": availability(sched, target, tolerance_mw),
           "shortfall_hours": int(np.count_nonzero(sched.shortfall_mw > tolerance_mw)),
           "shortfall_mwh": float(np.sum(sched.shortfall_mw)),
           "curtailment_mwh": float(np.sum(sched.curtailment_mw)),
           "end_soc_mwh": sched.soc_end_mwh,
           "end_soc_below_start": bool(sched.soc_end_mwh < sched.soc_mwh[0] - 1e-9)}
    _emit(doc, out, fmt)


# --- sweep --------------------------------------------------------------------------

def _parse_grid(kind, grid):
    axes = {}
    for g in grid:
        if "=" in g:
            name, vals = g.split("=", 1)
        else:
            name, vals = {"availability": "availability", "mix": "solar_share",
                          "wacc": "wacc", "costs": "solar"}[kind], g
        try:
            axes[name.strip()] = [float(v) for v in vals.split(",") if v.strip()]
        except ValueError:
            raise CommandError(f"bad grid values {vals!r}") from None
    if not axes:
        raise CommandError("give at least one --grid")
    if kind == "costs":
        bad = set(axes) - set(COST_AXES)
        if bad:
            raise CommandError(f"unknown cost axes {sorted(bad)}; use {sorted(COST_AXES)}")
    elif len(axes) != 1:
        raise CommandError(f"{kind} sweeps take a single axis")
    return axes


def _row(design, lcoe, fx, curtailed, annual, status="optimal", error=""):
    row = {"solar_mw": design.solar_mw if design else "",
           "wind_mw": design.wind_mw if design else "",
           "battery_mwh": design.battery_mwh if design else "",
           "lcoe_usd_per_mwh": lcoe if lcoe is not None else "",
           "lcoe_rs_per_kwh": eco.to_rs_per_kwh(lcoe, fx) if lcoe is not None else "",
           "curtailment_share": curtailed / annual if design and annual else "",
           "wind_share": _wind_share(design) if design else "",
           "status": status, "error": error}
    return row


def _run_line(task):
    """Evaluate one innermost-axis line of a sweep, warm-starting along it."""
    kind, points, res, target, cfg, mode, tl = task
    rows = []
    basis = None
    for params in points:
        try:
            if kind == "costs":
                costs = eco.CostParams(**{**cfg.costs.__dict__,
                                          **{COST_AXES[k]: v for k, v in params.items()}})
                c = cfg.with_(costs=costs)
                result, sol = solve_scenario(res, target, c, warm_start=basis, time_limit=tl)
            elif kind == "availability":
                c = cfg.with_(availability=params["availability"])
                result, sol = solve_scenario(res, target, c, mode=mode, time_limit=tl)
            elif kind == "mix":
                c = cfg
                P = build_mix_constrained_lp(res, target, c, params["solar_share"])
                sol = solve_lp(P, warm_start=basis, time_limit=tl)
                result = (extract_solution(P, sol, res, target, c)
                          if sol.status == Status.OPTIMAL else None)
            else:
                raise ValueError(f"unknown sweep kind {kind}")
            if kind != "availability":
                basis = sol.basis
            if result is None:
                rows.append({**params, **_row(None, None, 0, 0, 0, sol.status.value,
                                              sol.message)})
                continue
            lc = result.objective_usd_per_mwh
            rows.append({**params, **_row(result.design, lc, c.costs.fx_rs_per_usd,
                                          result.curtailed_energy_mwh_per_year,
                                          result.annual_target_mwh)})
        except Exception as exc:  # a failed cell is reported, the sweep goes on
            rows.append({**params, **_row(None, None, 0, 0, 0, "error",
                                          f"{type(exc).__name__}: {exc}")})
    return rows


@main.command()
@_common
@click.option("--kind", type=click.Choice(["costs", "availability", "mix", "wacc"]), required=True)
@click.option("--grid", multiple=True, required=True,
              help="axis values, e.g. 'solar=250,500,700' or '0.25,0.5' for 1-D sweeps")
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--mode", type=click.Choice([EXACT, HEURISTIC]), default=None)
@click.option("--time-limit", type=float, default=None, help="seconds per grid point")
def sweep(config_path, solar, wind, target_path, synthetic_years, seed, hours, out, fmt, kind,
          grid, workers, mode, time_limit):
    """Evaluate a grid of scenarios; one row per grid point in grid order."""
    cfg, tspec, res, target = _inputs(config_path, solar, wind, target_path, synthetic_years,
                                      seed, hours)
    axes = _parse_grid(kind, grid)
    names = list(axes)
    if kind == "wacc":
        rows = _wacc_rows(axes["wacc"], res, target, cfg)
    else:
        outer = list(itertools.product(*[axes[n] for n in names[:-1]]))
        inner = axes[names[-1]]
        tasks = []
        for o in outer:
            pts = [dict(zip(names, (*o, v))) for v in inner]
            tasks.append((kind, pts, res, target, cfg, mode, time_limit))
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                lines = list(ex.map(_run_line, tasks))
        else:
            lines = [_run_line(t) for t in tasks]
        rows = [r for line in lines for r in line]
    cols = names + ["solar_mw", "wind_mw", "battery_mwh", "lcoe_usd_per_mwh", "lcoe_rs_per_kwh",
                    "curtailment_share", "wind_share", "status", "error"]
    _emit(rows, out, fmt if fmt == "json" else "csv", columns=cols)


def _wacc_rows(waccs, res, target, cfg):
    # the optimal design does not depend on the discount rate: solve once, re-price
    result, sol = solve_scenario(res, target, cfg)
    rows = []
    for w in waccs:
        if result is None:
            rows.append({"wacc": w, **_row(None, None, 0, 0, 0, sol.status.value, sol.message)})
            continue
        try:
            econ = eco.EconomicParams(w, cfg.econ.lifetime_years)
            lc = eco.lcoe(result.design, cfg.costs, econ, result.annual_target_mwh)
            rows.append({"wacc": w, **_row(result.design, lc, cfg.costs.fx_rs_per_usd,
                                           result.curtailed_energy_mwh_per_year,
                                           result.annual_target_mwh)})
        except ValueError as exc:
            rows.append({"wacc": w, **_row(None, None, 0, 0, 0, "error", str(exc))})
    return rows


# --- profile --------------------------------------------------------------------------

@main.command()
@click.option("--kind", type=click.Choice(["baseload", "flexible"]), required=True)
@click.option("--peak-mw", type=float, default=100.0, show_default=True)
@click.option("--hours", type=int, default=8760, show_default=True)
@click.option("--solar", type=click.Path(dir_okay=False), help="grid resource CSV (flexible)")
@click.option("--wind", type=click.Path(dir_okay=False))
@click.option("--solar-share", type=float, default=0.5, show_default=True)
@click.option("--wind-share", type=float, default=0.5, show_default=True)
@click.option("--synthetic-years", type=int, default=0)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(dir_okay=False))
def profile(kind, peak_mw, hours, solar, wind, solar_share, wind_share, synthetic_years, seed,
            out):
    """Write a target profile CSV (hour,target_mw)."""
    try:
        if kind == "baseload":
            tgt = baseload_profile(peak_mw, hours)
        else:
            if solar:
                s = load_series(solar, "solar_cf")
                w = load_series(wind or solar, "wind_cf")
            elif synthetic_years:
                r = resource_fixture(synthetic_years, seed=seed)
                s, w = r.solar, r.wind
            else:
                raise CommandError("flexible profiles need --solar/--wind or --synthetic-years")
            tgt = synth_flexible_profile(s, w, solar_share, wind_share, peak_mw)
    except CommandError:
        raise
    except ValueError as exc:
        _fail(exc)
    if out:
        write_target(out, tgt)
    else:
        buf = io.StringIO()
        buf.write("hour,target_mw\n")
        for h, v in enumerate(tgt.values):
            buf.write(f"{h},{float(v)!r}\n")
        click.echo(buf.getvalue(), nl=False)


# --- retire ------------------------------------------------------------------------------

@main.command()
@click.option("--fleet", type=click.Path(dir_okay=False), required=True)
@click.option("--lifetime", type=int, default=40, show_default=True)
@click.option("--phaseout", default="2030,2035,2040,2045,2050", show_default=True,
              help="comma-separated phase-out years")
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="csv")
def retire(fleet, lifetime, phaseout, out, fmt):
    """Stranded coal capacity for each phase-out year."""
    try:
        plants = eco.load_fleet(fleet)
        years = [int(y) for y in phaseout.split(",") if y.strip()]
    except (ValueError, FileNotFoundError) as exc:
        _fail(exc)
    tables = [eco.retirement_timeline(plants, lifetime, y) for y in years]
    strand = [{"phaseout_year": t.phaseout_year, "stranded_fraction": t.stranded_fraction,
               "stranded_mw": t.stranded_mw, "total_mw": t.total_mw} for t in tables]
    retiring = [{"year": y, **by} for y, by in tables[0].retiring_by_year.items()] if tables else []
    if fmt == "json":
        _emit({"lifetime_years": lifetime, "stranding": strand, "retiring_by_year": retiring},
              out, "json")
        return
    _emit(strand, out, "csv")
    if out:
        side = Path(out).with_name(Path(out).stem + "_retiring.csv")
        _emit(retiring, str(side), "csv", columns=["year", *eco.OWNERSHIP])


# --- report ------------------------------------------------------------------------------

@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--result", type=click.Path(dir_okay=False), help="JSON written by 'size'")
@click.option("--solar-mw", type=float)
@click.option("--wind-mw", type=float)
@click.option("--battery-mwh", type=float)
@click.option("--annual-mwh", type=float, default=876000.0, show_default=True)
@click.option("--curtailment-share", type=float, default=0.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json")
def report(config_path, result, solar_mw, wind_mw, battery_mwh, annual_mwh, curtailment_share,
           out, fmt):
    """Economic report for a design given directly or taken from a size result."""
    try:
        cfg, tspec = load_config(config_path) if config_path else (ScenarioConfig(), None)
        if result:
            doc = json.loads(Path(result).read_text())
            d = doc["design"]
            solar_mw, wind_mw, battery_mwh = d["solar_mw"], d["wind_mw"], d["battery_mwh"]
            annual_mwh = doc["annual_target_mwh"]
            curtailment_share = doc["curtailed_energy_mwh_per_year"] / annual_mwh
        if None in (solar_mw, wind_mw, battery_mwh):
            raise CommandError("give --result or all of --solar-mw/--wind-mw/--battery-mwh")
        design = PlantDesign(solar_mw, wind_mw, battery_mwh, cfg.storage.duration_hours)
        rep = economic_report(design, cfg, annual_mwh, curtailment_share * annual_mwh)
    except CommandError:
        raise
    except (ValueError, KeyError, FileNotFoundError) as exc:
        _fail(exc)
    rep["scenario"] = config_document(cfg, tspec)
    _emit(rep, out, fmt)


if __name__ == "__main__":
    main()
