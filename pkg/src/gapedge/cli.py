"""Configuration-driven command-line front end.

One run per invocation: a JSON config (or per-command shorthand flags) is
validated into a RunConfig, dispatched, and written as a JSON report or a CSV
curve.  Outputs are byte-identical for identical configs and build; wall time
goes to stderr so it cannot break that.  Exit codes: 2 malformed JSON,
3 unknown command, 4 invariant violation, 5 module/runtime error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, charges, dipole, dirac2d, linalg, mathieu, radial
from . import channel as channel_mod
from ._backend import BACKEND
from .errors import GapedgeError

EXIT_OK = 0
EXIT_BAD_JSON = 2
EXIT_UNKNOWN_COMMAND = 3
EXIT_INVALID = 4
EXIT_RUNTIME = 5

COMMANDS = (
    "mathieu-rate",
    "dipole-count",
    "verify-rate",
    "dirac-channel",
    "dirac2d",
    "charge-report",
)

#: Commands whose natural output is a two-column curve.
CSV_COMMANDS = ("dipole-count", "dirac2d")


class CliError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    parameters: dict
    output_path: str
    format: str


# ---------------------------------------------------------------------------
# config parsing / validation
# ---------------------------------------------------------------------------


def _need_number(params, key, where, required=True, default=None):
    if key not in params:
        if required:
            raise CliError(EXIT_INVALID, f"{where}.{key}: missing required parameter")
        return default
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise CliError(EXIT_INVALID, f"{where}.{key}: expected a finite number")
    return float(v)


def _need_int(params, key, where, required=True, default=None, minimum=None):
    if key not in params:
        if required:
            raise CliError(EXIT_INVALID, f"{where}.{key}: missing required parameter")
        return default
    v = params[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise CliError(EXIT_INVALID, f"{where}.{key}: expected an integer")
    if minimum is not None and v < minimum:
        raise CliError(EXIT_INVALID, f"{where}.{key}: must be >= {minimum}")
    return v


def _need_number_list(params, key, where, required=True):
    if key not in params:
        if required:
            raise CliError(EXIT_INVALID, f"{where}.{key}: missing required parameter")
        return None
    v = params[key]
    if not isinstance(v, list) or any(
        isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x) for x in v
    ):
        raise CliError(EXIT_INVALID, f"{where}.{key}: expected a list of finite numbers")
    return [float(x) for x in v]


def _reject_unknown(params, allowed, where):
    for key in params:
        if key not in allowed:
            raise CliError(EXIT_INVALID, f"{where}.{key}: unknown key")


def _half_integer(value, where):
    if 2.0 * value != round(2.0 * value) or int(round(2.0 * value)) % 2 == 0:
        raise CliError(EXIT_INVALID, f"{where}: must be a half-integer")
    return value


def _norm_mathieu_rate(params):
    _reject_unknown(params, {"p", "n_modes"}, "parameters")
    out = {"p": _need_number(params, "p", "parameters")}
    n_modes = _need_int(params, "n_modes", "parameters", required=False, minimum=1)
    if n_modes is not None:
        out["n_modes"] = n_modes
    return out


def _norm_dipole_count(params):
    allowed = {"m", "dipole", "gamma", "eps_grid", "log_eps_window", "n_eps"}
    _reject_unknown(params, allowed, "parameters")
    m = _need_number(params, "m", "parameters")
    d = _need_number(params, "dipole", "parameters")
    gamma = _need_number(params, "gamma", "parameters")
    if m <= 0 or d < 0 or gamma <= 0:
        raise CliError(EXIT_INVALID, "parameters: need m > 0, dipole >= 0, gamma > 0")
    eps_grid = _need_number_list(params, "eps_grid", "parameters", required=False)
    if eps_grid is None:
        window = _need_number_list(params, "log_eps_window", "parameters", required=False)
        if window is None:
            window = list(dipole.DEFAULT_WINDOW)
        if len(window) != 2 or not (0 < window[0] < window[1]):
            raise CliError(EXIT_INVALID, "parameters.log_eps_window: expected [lo, hi], 0 < lo < hi")
        n_eps = _need_int(params, "n_eps", "parameters", required=False, default=dipole.DEFAULT_POINTS, minimum=2)
        eps_grid = [float(v) for v in np.exp(-np.linspace(window[0], window[1], n_eps))]
    if not eps_grid:
        raise CliError(EXIT_INVALID, "parameters.eps_grid: must be nonempty")
    if any(e <= 0 for e in eps_grid) or any(
        eps_grid[i] <= eps_grid[i + 1] for i in range(len(eps_grid) - 1)
    ):
        raise CliError(EXIT_INVALID, "parameters.eps_grid: must be positive and strictly descending")
    return {"m": m, "dipole": d, "gamma": gamma, "eps_grid": eps_grid}


def _norm_verify_rate(params):
    _reject_unknown(params, {"m", "dipole", "gamma"}, "parameters")
    m = _need_number(params, "m", "parameters")
    d = _need_number(params, "dipole", "parameters")
    gamma = _need_number(params, "gamma", "parameters")
    if m <= 0 or d < 0 or gamma <= 0:
        raise CliError(EXIT_INVALID, "parameters: need m > 0, dipole >= 0, gamma > 0")
    return {"m": m, "dipole": d, "gamma": gamma}


def _norm_dirac_channel(params):
    allowed = {"kappa", "nu", "theta", "window", "max_count"}
    _reject_unknown(params, allowed, "parameters")
    kappa = _half_integer(_need_number(params, "kappa", "parameters"), "parameters.kappa")
    nu = _need_number(params, "nu", "parameters")
    theta = _need_number(params, "theta", "parameters")
    if abs(nu) >= 0.5:
        raise CliError(EXIT_INVALID, "parameters.nu: need |nu| < 1/2")
    if theta <= 0:
        raise CliError(EXIT_INVALID, "parameters.theta: must be positive")
    window = _need_number_list(params, "window", "parameters", required=False)
    if window is None:
        window = [-30.0, 30.0]
    if len(window) != 2 or window[0] >= window[1]:
        raise CliError(EXIT_INVALID, "parameters.window: expected [lo, hi] with lo < hi")
    max_count = _need_int(params, "max_count", "parameters", required=False, default=64, minimum=1)
    return {"kappa": kappa, "nu": nu, "theta": theta, "window": window, "max_count": max_count}


def _norm_dirac2d(params):
    allowed = {"m", "dipole", "n_r", "k_max", "r_min", "r_max", "E_grid", "edge_distances"}
    _reject_unknown(params, allowed, "parameters")
    m = _need_number(params, "m", "parameters")
    d = _need_number(params, "dipole", "parameters")
    if m <= 0 or d < 0:
        raise CliError(EXIT_INVALID, "parameters: need m > 0, dipole >= 0")
    n_r = _need_int(params, "n_r", "parameters", required=False, default=4000, minimum=200)
    k_max = _need_number(params, "k_max", "parameters", required=False, default=7.5)
    _half_integer(k_max, "parameters.k_max")
    e_grid = _need_number_list(params, "E_grid", "parameters", required=False)
    if e_grid is None:
        deltas = _need_number_list(params, "edge_distances", "parameters", required=False)
        if deltas is None:
            deltas = [float(v) for v in np.logspace(-1, -4, 13)]
        if any(not 0 < x < m for x in deltas):
            raise CliError(EXIT_INVALID, "parameters.edge_distances: must lie in (0, m)")
        e_grid = sorted(m - x for x in deltas)
    if any(not 0 < e < m for e in e_grid) or any(
        e_grid[i] >= e_grid[i + 1] for i in range(len(e_grid) - 1)
    ):
        raise CliError(EXIT_INVALID, "parameters.E_grid: must be ascending inside (0, m)")
    out = {"m": m, "dipole": d, "n_r": n_r, "k_max": k_max, "E_grid": e_grid}
    try:
        cfg = dirac2d.Dirac2DConfig(
            m=m,
            d_abs=d,
            E_grid=tuple(e_grid),
            n_r=n_r,
            k_max=k_max,
            r_min=_need_number(params, "r_min", "parameters", required=False),
            r_max=_need_number(params, "r_max", "parameters", required=False),
        )
    except GapedgeError as exc:
        raise CliError(EXIT_INVALID, f"parameters: {exc}") from exc
    out["r_min"] = cfg.r_min
    out["r_max"] = cfg.r_max
    return out


def _norm_charge_report(params):
    _reject_unknown(params, {"points", "regulars"}, "parameters")
    points = params.get("points", [])
    regulars = params.get("regulars", [])
    if not isinstance(points, list) or not isinstance(regulars, list):
        raise CliError(EXIT_INVALID, "parameters.points/regulars: expected lists")
    norm_points = []
    for i, entry in enumerate(points):
        where = f"parameters.points[{i}]"
        if not isinstance(entry, dict):
            raise CliError(EXIT_INVALID, f"{where}: expected an object")
        _reject_unknown(entry, {"position", "coupling"}, where)
        pos = _need_number_list(entry, "position", where)
        if len(pos) != 2:
            raise CliError(EXIT_INVALID, f"{where}.position: expected [x, y]")
        norm_points.append({"position": pos, "coupling": _need_number(entry, "coupling", where)})
    norm_regs = []
    for i, entry in enumerate(regulars):
        where = f"parameters.regulars[{i}]"
        if not isinstance(entry, dict):
            raise CliError(EXIT_INVALID, f"{where}: expected an object")
        _reject_unknown(entry, {"center", "total_charge", "width"}, where)
        center = _need_number_list(entry, "center", where)
        if len(center) != 3:
            raise CliError(EXIT_INVALID, f"{where}.center: expected [x, y, z]")
        width = _need_number(entry, "width", where)
        if width <= 0:
            raise CliError(EXIT_INVALID, f"{where}.width: must be positive")
        norm_regs.append(
            {"center": center, "total_charge": _need_number(entry, "total_charge", where), "width": width}
        )
    if not norm_points and not norm_regs:
        raise CliError(EXIT_INVALID, "parameters: at least one charge required")
    return {"points": norm_points, "regulars": norm_regs}


_NORMALIZERS = {
    "mathieu-rate": _norm_mathieu_rate,
    "dipole-count": _norm_dipole_count,
    "verify-rate": _norm_verify_rate,
    "dirac-channel": _norm_dirac_channel,
    "dirac2d": _norm_dirac2d,
    "charge-report": _norm_charge_report,
}


def parse_config(text: str) -> RunConfig:
    """Validate a JSON config document into a RunConfig with defaults filled."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_BAD_JSON, f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise CliError(EXIT_BAD_JSON, "config must be a JSON object")
    for key in doc:
        if key not in {"command", "parameters", "output_path", "format"}:
            raise CliError(EXIT_INVALID, f"{key}: unknown key")
    command = doc.get("command")
    if not isinstance(command, str) or command not in COMMANDS:
        raise CliError(EXIT_UNKNOWN_COMMAND, f"unknown command: {command!r}")
    fmt = doc.get("format", "json")
    if fmt not in ("json", "csv"):
        raise CliError(EXIT_INVALID, f"format: expected 'json' or 'csv', got {fmt!r}")
    if fmt == "csv" and command not in CSV_COMMANDS:
        raise CliError(EXIT_INVALID, f"format: csv output is only defined for {CSV_COMMANDS}")
    params = doc.get("parameters", {})
    if not isinstance(params, dict):
        raise CliError(EXIT_INVALID, "parameters: expected an object")
    normalized = _NORMALIZERS[command](params)
    output_path = doc.get("output_path", f"{command.replace('-', '_')}.{fmt}")
    if not isinstance(output_path, str) or not output_path:
        raise CliError(EXIT_INVALID, "output_path: expected a nonempty string")
    return RunConfig(command=command, parameters=normalized, output_path=output_path, format=fmt)


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _module_constants():
    return {
        "linalg": linalg.constants(),
        "mathieu": mathieu.constants(),
        "charges": charges.constants(),
        "radial": radial.constants(),
        "dipole": dipole.constants(),
        "channel": channel_mod.constants(),
        "dirac2d": dirac2d.constants(),
    }


def _run_mathieu_rate(params):
    problem = (
        mathieu.MathieuProblem(p=params["p"], n_modes=params["n_modes"])
        if "n_modes" in params
        else mathieu.MathieuProblem.for_coupling(params["p"])
    )
    if abs(params["p"]) == 0.0:
        return {"rate": 0.0, "eigenvalues": [], "negative_count": 0, "converged_n_modes": 0}
    spec = mathieu.spectrum(problem)
    return {
        "rate": spec.rate,
        "eigenvalues": [float(v) for v in spec.eigenvalues],
        "negative_count": int(np.sum(spec.eigenvalues < 0)),
        "converged_n_modes": spec.problem.n_modes,
    }


def _run_dipole_count(params):
    prob = dipole.DipoleProblem(m=params["m"], d_abs=params["dipole"], gamma=params["gamma"])
    curve = dipole.counting_curve(prob, params["eps_grid"])
    return {
        "curve": [[e, n] for e, n in curve.samples],
        "metadata": {k: v for k, v in curve.metadata.items()},
    }


def _run_verify_rate(params):
    prob = dipole.DipoleProblem(m=params["m"], d_abs=params["dipole"], gamma=params["gamma"])
    res = dipole.verify_rate(prob)
    return {
        "fitted_slope": res.fit.slope,
        "intercept": res.fit.intercept,
        "stderr": res.fit.slope_stderr,
        "predicted_rate": res.predicted_rate,
        "rel_err": res.rel_err,
        "window": list(res.window),
        "curve": [[e, n] for e, n in res.curve.samples],
    }


def _run_dirac_channel(params):
    spec = channel_mod.DiracChannelSpec(kappa=params["kappa"], nu=params["nu"], theta=params["theta"])
    evs = channel_mod.eigenvalues(spec, tuple(params["window"]), params["max_count"])
    out = {
        "classification": channel_mod.classify(spec.kappa, spec.nu).value,
        "frobenius_exponent": spec.s,
        "eigenvalues": [float(v) for v in evs],
        "window": list(params["window"]),
    }
    if evs.size:
        out["min_modulus_in_window"] = float(np.min(np.abs(evs)))
    return out


def _run_dirac2d(params):
    cfg = dirac2d.Dirac2DConfig(
        m=params["m"],
        d_abs=params["dipole"],
        E_grid=tuple(params["E_grid"]),
        n_r=params["n_r"],
        k_max=params["k_max"],
        r_min=params["r_min"],
        r_max=params["r_max"],
    )
    curve = dirac2d.gap_slope(cfg)
    return {
        "curve": [[e, n] for e, n in curve.samples],
        "fitted_slope": curve.fit.slope,
        "stderr": curve.fit.slope_stderr,
        "half_grid_slope": curve.half_fit.slope,
        "predicted_rate": curve.predicted_rate,
        "grid_converged": curve.grid_converged,
        "cutoff_converged": curve.cutoff_converged,
        "metadata": curve.metadata,
    }


def _run_charge_report(params):
    dist = charges.ChargeDistribution(
        points=tuple(
            charges.PointCharge(position=tuple(p["position"]), coupling=p["coupling"])
            for p in params["points"]
        ),
        regulars=tuple(
            charges.RegularCharge(center=tuple(r["center"]), total_charge=r["total_charge"], width=r["width"])
            for r in params["regulars"]
        ),
    )
    report = charges.validate(dist)
    mom = charges.moments(dist)
    out = {
        "validation": {"ok": report.ok, "violations": list(report.violations)},
        "moments": {
            "total_charge": mom.total_charge,
            "dipole": list(mom.dipole),
            "gamma": mom.gamma,
        },
    }
    if report.ok:
        out["diagnostics"] = charges.hypothesis_diagnostics(dist).as_dict()
    return out


_RUNNERS = {
    "mathieu-rate": _run_mathieu_rate,
    "dipole-count": _run_dipole_count,
    "verify-rate": _run_verify_rate,
    "dirac-channel": _run_dirac_channel,
    "dirac2d": _run_dirac2d,
    "charge-report": _run_charge_report,
}


def _config_dict(config: RunConfig) -> dict:
    return asdict(config)


def _render_json(config, results):
    report = {
        "input": _config_dict(config),
        "results": results,
        "constants": _module_constants(),
        "build": {"backend": BACKEND, "version": __version__},
    }
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _render_csv(config, results):
    header = "epsilon,count" if config.command == "dipole-count" else "E,count"
    lines = ["# " + json.dumps(_config_dict(config), sort_keys=True, separators=(",", ":"))]
    lines.append(header)
    for x, n in results["curve"]:
        lines.append("%.16e,%d" % (x, n))  # 17 significant digits
    return "\n".join(lines) + "\n"


def _write_atomic(path: str, payload: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".gapedge-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(config: RunConfig) -> int:
    """Execute a validated RunConfig, writing its report atomically."""
    start = time.perf_counter()
    try:
        results = _RUNNERS[config.command](config.parameters)
    except GapedgeError as exc:
        raise CliError(EXIT_RUNTIME, f"{config.command}: {exc}") from exc
    payload = (
        _render_csv(config, results) if config.format == "csv" else _render_json(config, results)
    )
    _write_atomic(config.output_path, payload)
    elapsed = time.perf_counter() - start
    print(f"gapedge {config.command}: wrote {config.output_path} ({elapsed:.3f}s)", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _shorthand_parser():
    parser = argparse.ArgumentParser(
        prog="gapedge",
        description="Spectral counting laboratory for gap-edge bound-state accumulation.",
    )
    parser.add_argument("--config", help="path to a JSON run configuration")
    sub = parser.add_subparsers(dest="command")
    specs = {
        "mathieu-rate": ("--p",),
        "dipole-count": ("--m", "--dipole", "--gamma"),
        "verify-rate": ("--m", "--dipole", "--gamma"),
        "dirac-channel": ("--kappa", "--nu", "--theta"),
        "dirac2d": ("--m", "--dipole"),
        "charge-report": (),
    }
    for command, flags in specs.items():
        p = sub.add_parser(command)
        for flag in flags:
            p.add_argument(flag, type=float, required=True)
        p.add_argument("--out", default=None)
        p.add_argument("--format", default="json", choices=("json", "csv"))
    return parser


def _config_from_args(args) -> str:
    params = {}
    for key in ("p", "m", "dipole", "gamma", "kappa", "nu", "theta"):
        if hasattr(args, key) and getattr(args, key) is not None:
            params[key] = getattr(args, key)
    doc = {"command": args.command, "parameters": params, "format": args.format}
    if args.out:
        doc["output_path"] = args.out
    return json.dumps(doc)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _shorthand_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            try:
                with open(args.config) as handle:
                    text = handle.read()
            except OSError as exc:
                raise CliError(EXIT_BAD_JSON, f"cannot read config: {exc}") from exc
            config = parse_config(text)
        elif args.command:
            config = parse_config(_config_from_args(args))
        else:
            parser.print_usage(sys.stderr)
            return EXIT_INVALID
        return run(config)
    except CliError as exc:
        print(f"gapedge: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
