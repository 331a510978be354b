"""Command-line front end: ``g2lab <command> [--config PATH] [--seed N]
[--output DIR] [--format csv|json]``.

Configuration files are plain ``key = value`` lines with dotted keys; values
are JSON (bare words are read as strings).  Exit codes: 0 all checks pass,
1 a tolerance check failed, 2 malformed configuration (parse error, unknown
key, missing or mistyped field), 3 mathematically invalid input, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import flow, reduction, sphere7
from .exterior import ContractViolation, det3, wedge_square

SCHEMA_VERSION = 1
COMMANDS = ("sphere7-analyze", "flow-run", "flow-verify", "eta-init")

EXIT_OK, EXIT_TOLERANCE, EXIT_SCHEMA, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3, 4

DEFAULT_TOLERANCES = {
    "extremum": 1e-8,
    "critical_grad": 1e-10,
    "closed_form": 1e-8,
    "symmetry": 1e-10,
    "h_check": 1e-8,
    "nearly_parallel": 1e-6,
    "degree_split": 1e-8,
    "evolution": 1e-7,
    "commutation": 1e-7,
    "s_max_relative": 1e-6,
    "round_trip": 1e-12,
}

# key -> (default, kind); kind drives validation
_SPEC = {
    "command": (None, "command"),
    "bianchi": (None, "vec3"),
    "s0": (None, "float"),
    "H0": ([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], "mat3"),
    "U0": ([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], "mat3"),
    "seed": (0, "int"),
    "output_path": (".", "str"),
    "format": ("json", "format"),
    "initial": (None, "str"),
    "trajectory": (None, "str"),
    "interval": (None, "pair"),
    "eta": (None, "mat3"),
    "eta_swap": (False, "bool"),
    "cross_check": (True, "bool"),
    "integrator.step": (1e-4, "pos"),
    "integrator.direction": (1, "direction"),
    "integrator.rho_min": (1e-6, "pos"),
    "integrator.u_min": (1e-8, "pos"),
    "integrator.s_min": (1e-8, "pos"),
    "integrator.max_steps": (1_000_000, "posint"),
    "integrator.s_end": (None, "float"),
    "integrator.state_max": (1e6, "pos"),
    "sphere7.samples": (1_000_000, "posint"),
    "sphere7.classify_samples": (1000, "posint"),
    "sphere7.zero_samples": (100, "posint"),
    "verify.samples": (25, "posint"),
    "verify.window": ([0.1, 0.9], "pair"),
}
for _k, _v in DEFAULT_TOLERANCES.items():
    _SPEC[f"tolerances.{_k}"] = (_v, "pos")

_REQUIRED = {
    "sphere7-analyze": (),
    "flow-run": ("bianchi", "s0"),
    "flow-verify": ("bianchi", "s0"),
    "eta-init": ("bianchi", "s0", "eta"),
}


class CliError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind
        self.message = message

    def as_dict(self) -> dict:
        return {"schema": SCHEMA_VERSION, "error": {"type": self.kind, "message": self.message, "exit_code": self.code}}


def _schema_error(kind: str, message: str) -> CliError:
    return CliError(EXIT_SCHEMA, kind, message)


def _invalid(message: str) -> CliError:
    return CliError(EXIT_INVALID, "invalid_input", message)


# -- configuration ------------------------------------------------------------------


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    @property
    def command(self) -> str:
        return self.values["command"]

    @property
    def tolerances(self) -> dict:
        return {k: self.values[f"tolerances.{k}"] for k in DEFAULT_TOLERANCES}

    def integrator(self, **override) -> flow.IntegratorConfig:
        kw = {f.name: self.values[f"integrator.{f.name}"] for f in fields(flow.IntegratorConfig)
              if f"integrator.{f.name}" in self.values}
        kw.update(override)
        return flow.IntegratorConfig(**kw)


def _parse_value(raw: str):
    raw = raw.strip()
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _coerce(key: str, value, kind: str):
    def bad(expected):
        return _schema_error("type_error", f"{key}: expected {expected}, got {value!r}")

    if value is None:
        return None
    if kind == "command":
        if value not in COMMANDS:
            raise bad("one of " + ", ".join(COMMANDS))
        return value
    if kind in ("float", "pos"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad("a number")
        value = float(value)
        if not math.isfinite(value):
            raise bad("a finite number")
        if kind == "pos" and value <= 0:
            raise _invalid(f"{key} must be positive")
        return value
    if kind in ("int", "posint"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad("an integer")
        if kind == "posint" and value <= 0:
            raise _invalid(f"{key} must be positive")
        return value
    if kind == "direction":
        if value not in (1, -1) or isinstance(value, bool):
            raise bad("+1 or -1")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise bad("true or false")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise bad("a string")
        return value
    if kind == "format":
        if value not in ("csv", "json"):
            raise bad("csv or json")
        return value
    if kind in ("vec3", "pair", "mat3"):
        try:
            arr = np.array(value, dtype=np.float64)
        except (TypeError, ValueError):
            raise bad("numbers") from None
        shape = {"vec3": (3,), "pair": (2,), "mat3": (3, 3)}[kind]
        if arr.shape != shape or not np.all(np.isfinite(arr)):
            raise bad(f"an array of shape {shape}")
        return arr.tolist()
    raise AssertionError(kind)


def parse_config(text: str, overrides: dict | None = None) -> RunConfig:
    """Parse ``key = value`` lines, validate and fill documented defaults."""
    raw: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise _schema_error("parse_error", f"line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise _schema_error("parse_error", f"line {lineno}: empty key")
        if key not in _SPEC:
            raise _schema_error("unknown_key", f"unknown key: {key}")
        if key in raw:
            raise _schema_error("parse_error", f"line {lineno}: duplicate key {key}")
        raw[key] = _parse_value(value)
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    values = {}
    for key, (default, kind) in _SPEC.items():
        values[key] = _coerce(key, raw[key], kind) if key in raw else default
    command = values["command"]
    if command is None:
        raise _schema_error("missing_field", "missing required field: command")
    if values["initial"] is not None:
        _merge_initial(values, raw)
    for key in _REQUIRED[command]:
        if values[key] is None:
            raise _schema_error("missing_field", f"missing required field: {key}")
    _validate_math(values)
    return RunConfig(values)


def _merge_initial(values: dict, raw: dict) -> None:
    try:
        data = json.loads(Path(values["initial"]).read_text())
    except OSError as exc:
        raise CliError(EXIT_IO, "io_error", f"cannot read initial data: {exc}") from None
    except json.JSONDecodeError as exc:
        raise _schema_error("parse_error", f"initial data is not JSON: {exc}") from None
    if not isinstance(data, dict) or data.get("kind") != "initial_data":
        raise _schema_error("parse_error", "initial data file has the wrong kind")
    for key in ("bianchi", "s0", "H0", "U0"):
        if key not in raw:
            if key not in data:
                raise _schema_error("missing_field", f"initial data lacks {key}")
            values[key] = _coerce(key, data[key], _SPEC[key][1])


def _validate_math(values: dict) -> None:
    H = np.array(values["H0"])
    U = np.array(values["U0"])
    if np.max(np.abs(H - H.T)) > 1e-12:
        raise _invalid("H0 must be symmetric")
    if np.linalg.eigvalsh(H)[0] <= 0:
        raise _invalid("H0 must be positive-definite")
    if abs(det3(U)) < 1e-14:
        raise _invalid("U0 must be invertible")
    s0 = values["s0"]
    if s0 is not None:
        if s0 == 0:
            raise _invalid("s0 must be non-zero")
        if values["command"] != "eta-init" and det3(H) - s0**2 <= 0:
            raise _invalid("outside regular regime: det H0 <= s0^2")
        if values["command"] == "eta-init" and not 0 < s0**2 < 1:
            raise _invalid("eta-init needs 0 < s0^2 < 1")
    interval = values["interval"]
    if interval is not None and not interval[0] < interval[1]:
        raise _invalid("interval must be increasing")


# keys that say where results go rather than what is computed
_UNHASHED = ("output_path",)


def serialize_config(config: RunConfig) -> str:
    """Canonical text: every key in sorted order with its JSON value."""
    lines = []
    for key in sorted(config.values):
        value = config.values[key]
        if value is None or key in _UNHASHED:
            continue
        lines.append(f"{key} = {_json(value)}")
    return "\n".join(lines) + "\n"


def config_hash(config: RunConfig) -> str:
    return hashlib.sha256(serialize_config(config).encode()).hexdigest()


# -- serialisation ----------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")  # + 0.0 folds -0.0 into 0.0


def _json(obj, indent: int | None = None, _level: int = 0) -> str:
    """JSON with floats at 17 significant digits; non-finite floats become null."""
    pad = "" if indent is None else "\n" + " " * (indent * (_level + 1))
    end = "" if indent is None else "\n" + " " * (indent * _level)
    sep = ", " if indent is None else ","
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{" + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_json(v) for v in seq) + "]"
        return "[" + sep.join(f"{pad}{_json(v, indent, _level + 1)}" for v in seq) + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(obj) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def trajectory_columns() -> list[str]:
    cols = ["s"]
    cols += [f"U{i + 1}{j + 1}" for i in range(3) for j in range(3)]
    cols += [f"H{i + 1}{j + 1}" for i in range(3) for j in range(i, 3)]
    cols += ["h", "rho"]
    cols += list(flow.RESIDUAL_NAMES)
    cols += ["termination"]
    return cols


def trajectory_rows(solution: flow.FlowSolution | None) -> list[list]:
    if solution is None:
        return []
    rows = []
    n = len(solution)
    for k in range(n):
        H = solution.H[k]
        row = [solution.s[k]]
        row += list(solution.U[k].ravel())
        row += [H[i, j] for i in range(3) for j in range(i, 3)]
        row += [det3(H), det3(H) - solution.s[k] ** 2]
        row += [solution.residuals[name][k] for name in flow.RESIDUAL_NAMES]
        row += [solution.termination if k == n - 1 else ""]
        rows.append(row)
    return rows


def trajectory_csv(solution: flow.FlowSolution | None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(trajectory_columns())
    for row in trajectory_rows(solution):
        writer.writerow([v if isinstance(v, str) else _fmt(v) for v in row])
    return buf.getvalue()


def trajectory_json(solution: flow.FlowSolution | None) -> str:
    rows = [[v for v in row[:-1]] for row in trajectory_rows(solution)]
    doc = {
        "schema": SCHEMA_VERSION,
        "kind": "trajectory",
        "columns": trajectory_columns()[:-1],
        "rows": rows,
        "termination": None if solution is None else solution.termination,
    }
    return _json(doc, indent=1) + "\n"


def load_trajectory(path: str, base: reduction.BaseGeometry) -> flow.FlowSolution:
    """Read a trajectory written by ``flow-run`` (CSV or JSON)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(EXIT_IO, "io_error", f"cannot read trajectory: {exc}") from None
    cols = trajectory_columns()
    if path.endswith(".json"):
        try:
            doc = json.loads(text)
            rows = np.array(doc["rows"], dtype=np.float64)
            termination = doc.get("termination") or ""
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise _schema_error("parse_error", f"bad trajectory file: {exc}") from None
    else:
        reader = list(csv.reader(io.StringIO(text)))
        if not reader or reader[0] != cols:
            raise _schema_error("parse_error", "trajectory CSV header mismatch")
        try:
            rows = np.array([[float(v) for v in r[:-1]] for r in reader[1:]], dtype=np.float64)
        except ValueError as exc:
            raise _schema_error("parse_error", f"bad trajectory file: {exc}") from None
        termination = reader[-1][-1] if len(reader) > 1 else ""
    if rows.ndim != 2 or rows.shape[0] < 5 or rows.shape[1] != len(cols) - 1:
        raise _schema_error("parse_error", "trajectory has too few rows or wrong width")
    s = rows[:, 0]
    U = rows[:, 1:10].reshape(-1, 3, 3)
    H = np.zeros((len(s), 3, 3))
    k = 10
    for i in range(3):
        for j in range(i, 3):
            H[:, i, j] = H[:, j, i] = rows[:, k]
            k += 1
    order = np.argsort(s)
    res = {name: rows[order, 18 + n] for n, name in enumerate(flow.RESIDUAL_NAMES)}
    return flow.FlowSolution(base, s[order], U[order], H[order], np.linalg.det(H[order]), res, termination)


def _atomic_write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise CliError(EXIT_IO, "io_error", f"cannot write {path}: {exc}") from None


def emit(report: dict, trajectory: flow.FlowSolution | None, fmt: str, output_dir) -> list[Path]:
    """Write ``report.json`` and, when a trajectory is given, ``trajectory.<fmt>``."""
    out = Path(output_dir)
    written = []
    if trajectory is not None or report.get("command") == "flow-run":
        name = out / f"trajectory.{fmt}"
        _atomic_write(name, trajectory_csv(trajectory) if fmt == "csv" else trajectory_json(trajectory))
        written.append(name)
    name = out / "report.json"
    _atomic_write(name, _json(report, indent=1) + "\n")
    written.append(name)
    return written


# -- commands -------------------------------------------------------------------------


def _check(name: str, value, tolerance, passed: bool | None = None) -> dict:
    value = float(value)
    ok = (value < tolerance) if passed is None else passed
    return {"name": name, "value": value, "tolerance": float(tolerance), "passed": bool(ok and math.isfinite(value))}


def _base(config: RunConfig) -> reduction.BaseGeometry:
    return reduction.BaseGeometry(tuple(config["bianchi"]))


def _initial(config: RunConfig) -> flow.FlowState:
    return flow.FlowState(config["s0"], np.array(config["U0"]), np.array(config["H0"]))


def _run_sphere7(config: RunConfig) -> tuple[dict, list, None]:
    tol = config.tolerances
    seed = config["seed"]
    ext = sphere7.find_extrema(config["sphere7.samples"], seed)
    rng = np.random.default_rng(seed + 1)
    counts = {"regular": 0, "critical_nonzero_associative": 0, "critical_zero_degenerate": 0}
    for x in sphere7.random_points(config["sphere7.classify_samples"], rng):
        counts[sphere7.critical_classify(x).classification] += 1
    hess_reports = {}
    for eps in (1, -1):
        rep = sphere7.critical_classify(sphere7.preferred_point(eps))
        counts[rep.classification] += 1
        hess_reports[eps] = rep
    zero_grad, zero_nu = 0.0, 0.0
    pairs = [(i, j) for i in range(4) for j in range(i + 1, 4)]
    for i, j in pairs:
        for x in sphere7.zero_level_sphere_points(i, j, config["sphere7.zero_samples"], rng):
            rep = sphere7.critical_classify(x)
            counts[rep.classification] += 1
            zero_grad = max(zero_grad, rep.grad_norm)
            zero_nu = max(zero_nu, abs(rep.nu))
    top = hess_reports[1]
    results = {
        "max": ext["max"],
        "min": ext["min"],
        "argmax": ext["argmax"],
        "argmin": ext["argmin"],
        "sample_max_abs": ext["sample_max_abs"],
        "samples": ext["samples"],
        "classification_counts": counts,
        "hessian_point": top.point,
        "hessian": top.hessian,
        "hessian_rank": top.hessian_rank,
        "hessian_rank_negative": hess_reports[-1].hessian_rank,
        "hessian_deviation_from_block_form": float(np.max(np.abs(top.hessian - sphere7.printed_hessian(1)))),
        "zero_level_max_grad": zero_grad,
        "zero_level_max_abs_nu": zero_nu,
    }
    checks = [
        _check("max_nu", abs(ext["max"] - 0.25), tol["extremum"]),
        _check("min_nu", abs(ext["min"] + 0.25), tol["extremum"]),
        _check("hessian_rank", top.hessian_rank, 4, passed=top.hessian_rank == 4 and hess_reports[-1].hessian_rank == 4),
        _check("zero_level_critical", zero_grad, tol["critical_grad"]),
        _check("zero_level_nu", zero_nu, tol["critical_grad"]),
    ]
    return results, checks, None


def _solve(config: RunConfig) -> flow.FlowSolution:
    base = _base(config)
    initial = _initial(config)
    interval = config["interval"]
    cfg = config.integrator()
    if interval is not None:
        kw = {f: getattr(cfg, f) for f in ("rho_min", "u_min", "s_min", "max_steps", "state_max", "min_step")}
        return flow.integrate_interval(initial, base, interval[0], interval[1], step=cfg.step, **kw)
    return flow.integrate(initial, base, cfg)


def _solve_safely(config: RunConfig) -> flow.FlowSolution:
    try:
        return _solve(config)
    except (ContractViolation, reduction.OutsideRegularRegime, flow.SingularRegime) as exc:
        raise _invalid(str(exc)) from None


def _flow_results(config: RunConfig, sol: flow.FlowSolution) -> tuple[dict, list]:
    tol = config.tolerances
    results = {
        "termination": sol.termination,
        "samples": len(sol),
        "s_first": float(sol.s[0]),
        "s_final": sol.s_final,
        "rho_final": float(sol.rho()[-1]),
        "u_final": float(sol.u_measure()[-1]),
        "max_symmetry_drift": float(sol.residuals["symmetry"].max()),
        "max_h_check": float(sol.residuals["h_check"].max()),
    }
    checks = [
        _check("symmetry_drift", results["max_symmetry_drift"], tol["symmetry"]),
        _check("h_consistency", results["max_h_check"], tol["h_check"]),
        _check("run_completed", 0.0, 1.0, passed=sol.passed),
    ]
    base = _base(config)
    H0 = np.array(config["H0"])
    U0 = np.array(config["U0"])
    if not any(base.lam) and np.allclose(H0, np.eye(3)) and np.allclose(U0, np.eye(3)):
        s0 = config["s0"]
        cf = flow.r3_closed_form(sol.s, s0)
        err = max(
            float(np.max(np.abs(sol.H[:, 0, 0] / cf["r"] - 1.0))),
            float(np.max(np.abs(sol.U[:, 0, 0] / cf["u"] - 1.0))),
        )
        results["closed_form_max_relative_error"] = err
        checks.append(_check("closed_form", err, tol["closed_form"]))
    walls = ("rho_floor", "u_floor", "s_floor", "state_ceiling")
    if config["cross_check"] and config["interval"] is None and sol.termination in walls:
        half = flow.integrate(_initial(config), base, config.integrator(step=config["integrator.step"] / 2))
        rel = abs(half.s_final / sol.s_final - 1.0)
        results["s_final_half_step"] = half.s_final
        results["s_final_relative_difference"] = rel
        checks.append(_check("s_final_step_halving", rel, tol["s_max_relative"]))
    return results, checks


def _run_flow(config: RunConfig) -> tuple[dict, list, flow.FlowSolution]:
    sol = _solve_safely(config)
    results, checks = _flow_results(config, sol)
    return results, checks, sol


def _run_verify(config: RunConfig) -> tuple[dict, list, None]:
    tol = config.tolerances
    base = _base(config)
    if config["trajectory"] is not None:
        sol = load_trajectory(config["trajectory"], base)
    else:
        sol = _solve_safely(config)
    try:
        rep = flow.verify_solution(sol, base, tuple(config["verify.window"]), config["verify.samples"])
    except ContractViolation as exc:
        raise _invalid(str(exc)) from None
    comm = flow.commutation_residuals(sol, tuple(config["verify.window"]))
    results = {k: v for k, v in rep.items() if k != "detail"}
    results["commutation"] = float(comm.max()) if len(comm) else float("nan")
    results["termination"] = sol.termination
    results["s_final"] = sol.s_final
    checks = [
        _check("nearly_parallel", rep["nearly_parallel"], tol["nearly_parallel"]),
        _check("deg0", rep["deg0"], tol["degree_split"]),
        _check("d_sigma", rep["d_sigma"], tol["degree_split"]),
        _check("tau_prime", rep["tau_prime"], tol["evolution"]),
        _check("commutation", results["commutation"], tol["commutation"]),
    ]
    return results, checks, None


def _run_eta(config: RunConfig) -> tuple[dict, list, None]:
    tol = config.tolerances
    base = _base(config)
    e = base.e
    eta = np.array(config["eta"]) @ wedge_square(e)
    try:
        dec = reduction.eta_to_coframe(eta, config["s0"], swap=config["eta_swap"])
    except ContractViolation as exc:
        raise _invalid(str(exc)) from None
    data = reduction.InvariantData(config["s0"], dec.alpha_matrix, np.eye(3), base)
    closed = reduction.check_closed(data)
    rt = (wedge_square(dec.alpha) - dec.eta.scale(dec.c_hat * dec.epsilon)).max_abs()
    initial = {
        "schema": SCHEMA_VERSION,
        "kind": "initial_data",
        "bianchi": list(base.lam),
        "s0": config["s0"],
        "U0": dec.alpha_matrix,
        "H0": np.eye(3),
        "epsilon": dec.epsilon,
        "c_hat": dec.c_hat,
        "f": dec.f,
    }
    results = {
        "epsilon": dec.epsilon,
        "c_hat": dec.c_hat,
        "f": dec.f,
        "U0": dec.alpha_matrix,
        "round_trip": rt,
        "sigma_residual": closed["sigma_residual"],
        "tau_residual": closed["tau_residual"],
        "initial_data": initial,
    }
    checks = [
        _check("round_trip", rt, tol["round_trip"]),
        _check("sigma_closed", closed["sigma_residual"], tol["round_trip"]),
        _check("tau_closed", closed["tau_residual"], tol["round_trip"]),
    ]
    return results, checks, None


_RUNNERS = {
    "sphere7-analyze": _run_sphere7,
    "flow-run": _run_flow,
    "flow-verify": _run_verify,
    "eta-init": _run_eta,
}


def run(config: RunConfig) -> tuple[dict, flow.FlowSolution | None]:
    results, checks, trajectory = _RUNNERS[config.command](config)
    report = {
        "schema": SCHEMA_VERSION,
        "command": config.command,
        "config_hash": config_hash(config),
        "seed": config["seed"],
        "results": results,
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    return report, trajectory


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="g2lab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="key = value configuration file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--output", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"))
    args = parser.parse_args(argv)
    try:
        text = ""
        if args.config:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise CliError(EXIT_IO, "io_error", f"cannot read config: {exc}") from None
        config = parse_config(
            text,
            {"command": args.command, "seed": args.seed, "output_path": args.output, "format": args.format},
        )
        report, trajectory = run(config)
        if config.command == "eta-init":
            _atomic_write(Path(config["output_path"]) / "initial.json",
                          _json(report["results"]["initial_data"], indent=1) + "\n")
        emit(report, trajectory, config["format"], config["output_path"])
    except CliError as exc:
        sys.stderr.write(_json(exc.as_dict()) + "\n")
        return exc.code
    sys.stdout.write(_json({"command": report["command"], "passed": report["passed"],
                            "checks": {c["name"]: c["passed"] for c in report["checks"]}}) + "\n")
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
