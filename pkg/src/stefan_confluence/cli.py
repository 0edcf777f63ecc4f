"""Scenario configuration, pipeline orchestration and report emission.

Stages run in dependency order

    tables -> interaction -> stefan -> ansatz -> pde -> residuals -> report

and each writes its artifacts plus a ``<stage>.json`` summary into the
output directory.  Every stage other than ``tables`` reads ``tables.csv``
from a previous run; the front trajectory is rebuilt from the
configuration (it is cheap and deterministic).  Timings go to
``timing.json`` so ``report.json`` is reproducible byte for byte.
"""

import argparse
import configparser
import csv
import io
import json
import os
import platform
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import scipy

from . import ansatz, convolutions, interaction, numerics, phasefield, residuals, stefan
from .profiles import ProfileParams

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_PARTIAL = 0, 2, 3, 4
KINDS = ("manufactured-symmetric", "manufactured-asymmetric", "solved")
STAGES = ("tables", "interaction", "stefan", "ansatz", "pde", "residuals", "report")
NUMERICAL_ERRORS = (numerics.QuadratureError, numerics.BracketError,
                    interaction.InteractionError, stefan.StefanError, ansatz.AnsatzError,
                    phasefield.PhaseFieldError, residuals.ResidualError, FloatingPointError)


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    pass


# ------------------------------------------------------------------ config

def _float_list(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


# section -> key -> (parser, type name, default)
SCHEMA = {
    "scenario": {
        "kind": (str, "str", "manufactured-symmetric"),
        "R1": (float, "float", 1.0),
        "R2": (float, "float", 3.0),
        "t1": (float, "float", 1.0),
        "eps": (_float_list, "float list", (0.1, 0.07, 0.05, 0.035)),
        "seed": (int, "int", 0),
    },
    "grid": {
        "cells_per_eps": (int, "int", 8),
        "dt_factor": (float, "float", 1.0),
        "table_points": (int, "int", 600),
        "eta_min": (float, "float", -12.0),
        "eta_max": (float, "float", 40.0),
        "tau_max": (float, "float", 200.0),
        "tau_nodes": (int, "int", 40000),
        "sharp_cells": (int, "int", 64),
        "sharp_dt": (float, "float", 2e-3),
    },
    "tolerances": {
        "probe_tol": (float, "float", 1e-6),
        "drift_tol": (float, "float", 1e-8),
        "plateau_tol": (float, "float", 1e-5),
    },
    "output": {
        "dir": (str, "str", "out"),
    },
}


@dataclass(frozen=True)
class Scenario:
    kind: str = "manufactured-symmetric"
    R1: float = 1.0
    R2: float = 3.0
    t1: float = 1.0
    eps: tuple = (0.1, 0.07, 0.05, 0.035)
    seed: int = 0
    grid: dict = field(default_factory=lambda: {k: v[2] for k, v in SCHEMA["grid"].items()})
    tolerances: dict = field(default_factory=lambda: {k: v[2] for k, v in
                                                      SCHEMA["tolerances"].items()})
    out_dir: str = "out"

    @property
    def domain(self):
        return (self.R1, self.R2)

    def to_ini(self):
        """Config text that ``load_scenario`` reads back to an equal Scenario."""
        cp = configparser.ConfigParser()
        cp.optionxform = str
        fmt = lambda v: " ".join(repr(float(x)) for x in v) if isinstance(v, tuple) else repr(v) \
            if isinstance(v, float) else str(v)
        cp["scenario"] = {"kind": self.kind, "R1": fmt(self.R1), "R2": fmt(self.R2),
                          "t1": fmt(self.t1), "eps": fmt(tuple(self.eps)),
                          "seed": str(self.seed)}
        cp["grid"] = {k: fmt(v) for k, v in self.grid.items()}
        cp["tolerances"] = {k: fmt(v) for k, v in self.tolerances.items()}
        cp["output"] = {"dir": self.out_dir}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def as_dict(self):
        d = asdict(self)
        d["eps"] = list(self.eps)
        return d


def validate(sc):
    if sc.kind not in KINDS:
        raise ConfigError(f"kind must be one of {', '.join(KINDS)}, got {sc.kind!r}")
    if not sc.R1 >= 1.0:
        raise ConfigError("R1 >= 1 violated")
    if not sc.R1 < sc.R2:
        raise ConfigError("R1 < R2 violated")
    if not sc.t1 > 0:
        raise ConfigError("t1 > 0 violated")
    if not sc.eps:
        raise ConfigError("eps list is empty")
    for e in sc.eps:
        if not e > 0:
            raise ConfigError(f"eps > 0 violated for eps={e}")
        if e > (sc.R2 - sc.R1) / 20.0 * (1 + 1e-12):
            raise ConfigError(f"eps <= (R2-R1)/20 violated for eps={e}")
    if sc.grid["cells_per_eps"] < 8:
        raise ConfigError("cells_per_eps >= 8 violated")
    for key in ("dt_factor", "tau_max", "sharp_dt"):
        if not sc.grid[key] > 0:
            raise ConfigError(f"{key} > 0 violated")
    return sc


def parse_scenario(text):
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"malformed config: {err}") from None
    values = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section: {section}")
        for key, raw in cp[section].items():
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key: {key}")
            parser, tname, _ = SCHEMA[section][key]
            try:
                values[(section, key)] = parser(raw.strip())
            except ValueError:
                raise ConfigError(f"key {key}: expected {tname}, got {raw!r}") from None
    get = lambda s, k: values.get((s, k), SCHEMA[s][k][2])
    sc = Scenario(kind=get("scenario", "kind"), R1=get("scenario", "R1"),
                  R2=get("scenario", "R2"), t1=get("scenario", "t1"),
                  eps=tuple(get("scenario", "eps")), seed=get("scenario", "seed"),
                  grid={k: get("grid", k) for k in SCHEMA["grid"]},
                  tolerances={k: get("tolerances", k) for k in SCHEMA["tolerances"]},
                  out_dir=get("output", "dir"))
    return validate(sc)


def load_scenario(path):
    """Read and validate a scenario file (defaults filled, unknown keys rejected)."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# --------------------------------------------------------------- scenarios

def profile_params(sc):
    L = sc.R2 - sc.R1
    return ProfileParams(cutoff_inner=(sc.R1 + 0.2 * L, sc.R2 - 0.2 * L),
                         cutoff_outer=(sc.R1 + 0.05 * L, sc.R2 - 0.05 * L), domain=sc.domain)


def build_trajectory(sc):
    """Front trajectory for the scenario (manufactured or solved)."""
    L, t_star = sc.R2 - sc.R1, 0.5 * sc.t1
    r_star = 0.5 * (sc.R1 + sc.R2)
    scale = min(1.0, 0.25 * L / t_star)
    params = profile_params(sc)
    if sc.kind == "manufactured-symmetric":
        return stefan.manufactured_scenario("symmetric-linear", speed=scale, r_star=r_star,
                                            t_star=t_star, t1=sc.t1, domain=sc.domain,
                                            params=params)
    if sc.kind == "manufactured-asymmetric":
        return stefan.manufactured_scenario("asymmetric-smooth", r_star=r_star, t_star=t_star,
                                            t1=sc.t1, speeds=(0.6 * scale, -1.0 * scale),
                                            domain=sc.domain, params=params)
    return stefan.solved_scenario(r=(sc.R1 + 0.25 * L, sc.R1 + 0.75 * L), v=(0.5, -1.5),
                                  n=sc.grid["sharp_cells"], dt=sc.grid["sharp_dt"], t1=sc.t1,
                                  domain=sc.domain)


# ---------------------------------------------------------------- helpers

def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    return obj


def write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_clean(obj), fh, sort_keys=True, indent=1, ensure_ascii=False)
        fh.write("\n")


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _eps_tag(eps):
    return f"eps_{eps:.6g}"


class Run:
    """Per-run bookkeeping: declared inputs, produced files and timings."""

    def __init__(self, sc, out_dir, jobs=1):
        self.sc, self.out, self.jobs = sc, out_dir, max(1, int(jobs))
        self.stages, self.timing = {}, {}
        self._cache = {}

    def path(self, name):
        return os.path.join(self.out, name)

    def need(self, stage, name):
        """Declare ``name`` as an input of ``stage`` and return its path."""
        p = self.path(name)
        self.stages.setdefault(stage, {"inputs": [], "outputs": [], "status": "running"})
        if name not in self.stages[stage]["inputs"]:
            self.stages[stage]["inputs"].append(name)
        if not os.path.isfile(p):
            raise StageError(f"stage {stage} needs {name}; run the stage that produces it")
        return p

    def produced(self, stage, name):
        self.stages.setdefault(stage, {"inputs": [], "outputs": [], "status": "running"})
        if name not in self.stages[stage]["outputs"]:
            self.stages[stage]["outputs"].append(name)
        return self.path(name)

    def table(self, stage):
        if "table" not in self._cache:
            self._cache["table"] = convolutions.InteractionTable.from_csv(
                self.need(stage, "tables.csv"))
        else:
            self.need(stage, "tables.csv")
        return self._cache["table"]

    def solution(self, stage):
        table = self.table(stage)
        if "sol" not in self._cache:
            g = self.sc.grid
            self._cache["sol"] = interaction.solve_interaction(
                table, -g["tau_max"], g["tau_max"], g["tau_nodes"],
                drift_tol=self.sc.tolerances["drift_tol"])
        return self._cache["sol"]

    def fronts(self):
        if "fronts" not in self._cache:
            self._cache["fronts"] = build_trajectory(self.sc)
        return self._cache["fronts"]

    def manifest(self, complete):
        files = sorted({f for s in self.stages.values() for f in s["outputs"]
                        if os.path.isfile(self.path(f))})
        write_json(self.path("MANIFEST"), {"status": "complete" if complete else "incomplete",
                                            "stages": self.stages, "files": files})


# ------------------------------------------------------------------ stages

def stage_tables(run):
    g, tol = run.sc.grid, run.sc.tolerances
    ex = ProcessPoolExecutor(run.jobs) if run.jobs > 1 else None
    try:
        table = convolutions.build_table(g["eta_min"], g["eta_max"], g["table_points"],
                                         probe_tol=tol["probe_tol"], executor=ex)
    finally:
        if ex is not None:
            ex.shutdown()
    table.to_csv(run.produced("tables", "tables.csv"))
    run._cache["table"] = table
    eta0 = convolutions.interaction_integrals(0.0)
    summary = {"discrepancy": convolutions.discrepancy_block(table),
               "eta_zero": eta0, "C_plus": convolutions.c_plus(),
               "B_tilde_zero": convolutions.btilde(0.0),
               "eta_range": [table.eta_min, table.eta_max], "n_points": table.eta_grid.size}
    write_json(run.produced("tables", "tables.json"), summary)
    return summary


def stage_interaction(run):
    sol = run.solution("interaction")
    interaction.export_csv(sol, run.produced("interaction", "interaction.csv"), stride=20)
    resid = interaction.eta_residual(sol.state["eta"], sol.tau_grid, sol.table)
    tau90 = 0.9 * sol.tau_max
    summary = interaction.summary(sol)
    summary.update({"eta_residual_max": float(np.max(np.abs(resid))),
                    "eta_at_minus_8": float(np.ravel(interaction.solve_eta(-8.0, sol.table))[0]),
                    "eta_monotone": bool(np.all(np.diff(sol.state["eta"]) > 0)),
                    "tau_d_at_0.9_tau_max": float(np.ravel(sol.tau_d(tau90))[0]),
                    "d_at_minus_100": float(np.ravel(sol.d(-100.0))[0])})
    write_json(run.produced("interaction", "interaction.json"), summary)
    return summary


def stage_stefan(run):
    fronts = run.fronts()
    fronts.to_csv(run.produced("stefan", "trajectory.csv"))
    summary = {"kind": fronts.kind, "t_star": fronts.t_star, "r_star": fronts.r_star,
               "v_minus": list(fronts.v_minus), "notes": list(fronts.notes),
               "domain": list(fronts.domain)}
    write_json(run.produced("stefan", "stefan.json"), summary)
    return summary


def _snapshot_levels(field, fronts):
    ts = [fronts.t_star - 0.25 * fronts.t_star, fronts.t_star,
          fronts.t_star + 0.25 * (fronts.t1 - fronts.t_star)]
    return [int(np.argmin(np.abs(field.t - t))) for t in ts]


def eps_cell(sc, sol, eps, out_dir, stage):
    """Work for one eps: correction solve plus the stage-specific outputs.

    Runs in worker processes, so it rebuilds the trajectory from ``sc``.
    Returns ``(summary, files)``.
    """
    fronts = build_trajectory(sc)
    params = profile_params(sc)
    g = sc.grid
    h = eps / g["cells_per_eps"]
    field = ansatz.solve_correction(fronts, sol, eps, h=h, dt=g["dt_factor"] * h)
    tag = _eps_tag(eps)
    os.makedirs(os.path.join(out_dir, tag), exist_ok=True)
    files, out = [], {"status": "ok", "eps": eps}
    if stage == "ansatz":
        for k, n in enumerate(_snapshot_levels(field, fronts)):
            name = f"{tag}/ansatz_{k}.csv"
            ansatz.snapshot_csv(os.path.join(out_dir, name), field, n, fronts, sol, params)
            files.append(name)
        sharp = ansatz.solve_correction(fronts, sol, eps, h=h, dt=g["dt_factor"] * h,
                                        sharp=True)
        pre = field.t < fronts.t_star - 0.05 * fronts.t1
        diff = np.max(np.abs(field.sigma[pre] - sharp.sigma[pre]))
        out.update({"sigma_vs_sharp_precontact": float(diff),
                    "sigma_max": float(np.max(np.abs(field.sigma)))})
    elif stage == "pde":
        out.update(_pde_cell(fronts, sol, field, out_dir, tag, files))
    elif stage == "residuals":
        tests = residuals.test_function_set(fronts.domain, seed=sc.seed)
        out.update(residuals.residual_cell(fronts, sol, eps, tests, field=field))
    return out, files


def _pde_cell(fronts, sol, field, out_dir, tag, files):
    eps, r = field.eps, field.r
    u0 = ansatz.order_function(r, 0.0, eps, fronts, sol, derivatives=False)
    st = phasefield.PDEState(r, u0, field.sigma[0].copy(), 0.0, eps, fronts.boundary)
    dt_field = field.t[1] - field.t[0]
    k = int(np.ceil(dt_field / phasefield.stability_bound(st)))
    hist = phasefield.run_phasefield(st, field.t[-1], dt_field / k, record_every=k)
    if len(hist) != field.t.size:
        raise phasefield.PhaseFieldError("PDE record does not match the ansatz time grid")
    pde = [(s.t, r, s.u, s.sigma) for s in hist]
    ans = [(field.t[n], r,
            ansatz.order_function(r, field.t[n], eps, fronts, sol, derivatives=False),
            field.sigma[n]) for n in range(field.t.size)]
    rate = abs(fronts.v_minus[1] - fronts.v_minus[0])
    t_pre = max(0.0, fronts.t_star - 5.0 * eps / rate)
    pre = phasefield.compare_fields(pde, ans, (0.0, t_pre))
    full = phasefield.compare_fields(pde, ans)
    for j, n in enumerate(_snapshot_levels(field, fronts)):
        name = f"{tag}/pde_{j}.csv"
        phasefield.snapshot_csv(os.path.join(out_dir, name), hist[n])
        files.append(name)
    n_mid = int(np.argmin(np.abs(field.t - 0.5 * t_pre)))
    return {"precontact": pre.as_dict(), "through_contact": full.as_dict(),
            "kink_width_pde": phasefield.kink_width(r, hist[n_mid].u),
            "kink_width_ansatz": phasefield.kink_width(r, ans[n_mid][2]),
            "pde_steps": hist[-1].steps}


def _run_cells(run, stage):
    sc, sol = run.sc, run.solution(stage)
    per, failed = {}, []
    args = [(sc, sol, e, run.out, stage) for e in sc.eps]
    if run.jobs > 1:
        with ProcessPoolExecutor(run.jobs) as ex:
            futures = [ex.submit(eps_cell, *a) for a in args]
            results = []
            for f in futures:
                try:
                    results.append(f.result())
                except NUMERICAL_ERRORS as err:
                    results.append(err)
    else:
        results = []
        for a in args:
            try:
                results.append(eps_cell(*a))
            except NUMERICAL_ERRORS as err:
                results.append(err)
    for e, res in zip(sc.eps, results):
        if isinstance(res, Exception):
            per[e] = {"status": "failed", "error": f"{type(res).__name__}: {res}"}
            failed.append(e)
        else:
            per[e] = res[0]
            for name in res[1]:
                run.produced(stage, name)
    return per, failed


def stage_ansatz(run):
    sol, fronts = run.solution("ansatz"), run.fronts()
    per, failed = _run_cells(run, "ansatz")
    eps0 = min(run.sc.eps)
    vsum, t_used, eta_used = interaction.velocity_sum_at_contact(fronts, sol, eps0)
    scale = max(abs(v) for v in fronts.v_minus)
    jump = ansatz.temperature_jump(fronts, sol, params=profile_params(run.sc),
                                   plateau_tol=run.sc.tolerances["plateau_tol"])
    jump["relative_error"] = abs(jump["measured_value"] - jump["formula_value"]) / \
        abs(jump["formula_value"])
    summary = {"per_eps": {f"{e:.6g}": v for e, v in per.items()}, "failed": failed,
               "velocity_sum": {"value": vsum, "t": t_used, "eta": eta_used, "eps": eps0,
                                "relative_to_speed": abs(vsum) / scale},
               "temperature_jump": jump}
    write_json(run.produced("ansatz", "ansatz.json"), summary)
    return summary


def stage_pde(run):
    per, failed = _run_cells(run, "pde")
    summary = {"per_eps": {f"{e:.6g}": v for e, v in per.items()}, "failed": failed}
    ok = [e for e in run.sc.eps if e not in failed]
    for key in ("precontact", "through_contact"):
        pts = [(e, per[e][key]["u_sup_l2"]) for e in ok if per[e][key]["u_sup_l2"] > 0]
        summary[f"{key}_u_slope"] = numerics.fit_loglog_slope(pts)[0] if len(pts) >= 3 \
            else None
    write_json(run.produced("pde", "pde.json"), summary)
    return summary


def stage_residuals(run):
    per, failed = _run_cells(run, "residuals")
    rep = residuals.fit_report(list(run.sc.eps), per) if len(run.sc.eps) >= 3 else \
        {"per_eps": per, "failed": failed}
    rep["per_eps"] = {f"{e:.6g}": v for e, v in rep["per_eps"].items()}
    rep["planted_slope"] = residuals.planted_slope(list(run.sc.eps) if len(run.sc.eps) >= 3
                                                   else [0.1, 0.05, 0.025])
    rep["examples"] = residuals.example_suite()
    sol, fronts = run.solution("residuals"), run.fronts()
    tau = 0.5 * (sol.tau_min + 0.0)
    try:
        rep["delta_coefficients"] = residuals.delta_coefficient_check(fronts, sol, tau)
    except NUMERICAL_ERRORS as err:
        rep["delta_coefficients"] = {"status": "failed", "error": str(err)}
    with open(run.produced("residuals", "residuals.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("eps", "status", "heat_max", "heat_dominant", "ac_max", "ac_dominant",
                    "ac_derived_max"))
        for e in run.sc.eps:
            c = per[e]
            if c["status"] == "ok":
                w.writerow([f"{e:.6g}", "ok", f"{c['heat_max']:.16e}", c["heat_dominant"],
                            f"{c['ac_max']:.16e}", c["ac_dominant"],
                            f"{c['ac_derived_max']:.16e}"])
            else:
                w.writerow([f"{e:.6g}", "failed", "", "", "", "", ""])
    write_json(run.produced("residuals", "residuals.json"), rep)
    return rep


def versions():
    from . import __version__
    return {"python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "stefan_confluence": __version__}


def emit_report(run, results):
    """Master report from the stage summaries on disk (or ``results``)."""
    if not os.access(run.out, os.W_OK):
        raise StageError(f"output directory not writable: {run.out}")
    report = {"versions": versions(), "config": run.sc.as_dict(),
              "config_text": run.sc.to_ini(), "stages": {}}
    for name in STAGES[:-1]:
        if name in results:
            report["stages"][name] = results[name]
        elif os.path.isfile(run.path(f"{name}.json")):
            report["stages"][name] = read_json(run.need("report", f"{name}.json"))
    if not report["stages"]:
        raise StageError("no completed stage to report")
    if "tables" in report["stages"]:
        report["discrepancy"] = report["stages"]["tables"]["discrepancy"]
    report["status"] = {n: run.stages.get(n, {}).get("status", "from-disk")
                        for n in report["stages"]}
    write_json(run.produced("report", "report.json"), report)
    return report


STAGE_FUNCS = {"tables": stage_tables, "interaction": stage_interaction,
               "stefan": stage_stefan, "ansatz": stage_ansatz, "pde": stage_pde,
               "residuals": stage_residuals}


def run_pipeline(sc, out_dir=None, stages=None, jobs=1):
    """Run ``stages`` (default: all) in order; returns the exit code."""
    out_dir = out_dir or sc.out_dir
    os.makedirs(out_dir, exist_ok=True)
    run = Run(sc, out_dir, jobs)
    stages = list(STAGES) if stages is None else list(stages)
    order = [s for s in STAGES if s in stages]
    with open(run.produced("config", "config.ini"), "w", encoding="utf-8") as fh:
        fh.write(sc.to_ini())
    run.stages["config"]["status"] = "complete"
    results, code = {}, EXIT_OK
    try:
        for name in order:
            t0 = time.perf_counter()
            run.stages.setdefault(name, {"inputs": [], "outputs": [], "status": "running"})
            try:
                if name == "report":
                    emit_report(run, results)
                else:
                    results[name] = STAGE_FUNCS[name](run)
            except StageError as err:
                run.stages[name].update(status="failed", error=str(err))
                code = EXIT_CONFIG
                break
            except NUMERICAL_ERRORS as err:
                run.stages[name].update(status="failed", error=f"{type(err).__name__}: {err}")
                write_json(run.produced(name, f"{name}.json"),
                           {"status": "failed", "error": f"{type(err).__name__}: {err}"})
                code = EXIT_NUMERICAL
                break
            finally:
                run.timing[name] = time.perf_counter() - t0
            partial = bool(results.get(name, {}).get("failed")) if name in results else False
            run.stages[name]["status"] = "partial" if partial else "complete"
            if partial:
                code = EXIT_PARTIAL
        if code not in (EXIT_OK, EXIT_PARTIAL) and results:
            emit_report(run, results)  # keep what finished, with the failure recorded
    except KeyboardInterrupt:
        run.manifest(complete=False)
        write_json(run.path("timing.json"), run.timing)
        return EXIT_PARTIAL
    write_json(run.path("timing.json"), run.timing)
    run.manifest(complete=code == EXIT_OK and order == list(STAGES))
    return code


# -------------------------------------------------------------------- main

def build_parser():
    p = argparse.ArgumentParser(prog="stefan-confluence",
                                description="Confluence of two free boundaries: numerical "
                                            "verification pipeline.")
    p.add_argument("command", nargs="?", default="all", choices=STAGES + ("all",))
    p.add_argument("--config", metavar="PATH", help="scenario file (key = value with sections)")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes")
    p.add_argument("--out", metavar="DIR", help="output directory (overrides [output] dir)")
    p.add_argument("--stage", choices=STAGES, help="run a single stage (same as the command)")
    p.add_argument("--seed", type=int, metavar="N", help="seed for test-function jitter")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.config) if args.config else validate(Scenario())
        if args.seed is not None:
            sc = replace(sc, seed=args.seed)
        if args.jobs < 1:
            raise ConfigError("--jobs >= 1 violated")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    command = args.stage or args.command
    stages = None if command == "all" else [command]
    try:
        code = run_pipeline(sc, args.out, stages, args.jobs)
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or sc.out_dir
    if code != EXIT_OK:
        print(f"finished with exit code {code}; see {os.path.join(out, 'MANIFEST')}",
              file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
