"""Command-line front end: ``wgqed <subcommand> [options]``.

Every subcommand writes a table as CSV (default) or JSON.  Options may also be
given in a ``key=value`` file via ``--config``; explicit flags take
precedence over the file, which takes precedence over built-in defaults.

Exit status: 0 success, 1 invalid input or failed selftest, 2 numerical
stability violation.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__
from . import correlators as co
from . import entropy as en
from . import fcs
from . import spectrum as sp
from .errors import ConsistencyError, InvalidParameterError, StabilityError
from .params import SystemParams

SUBCOMMANDS = ("fcs", "pn", "qfactor", "correlators", "mollow", "entropy", "sweep", "selftest")

# option name -> (type, default, help)
COMMON = {
    "delta": (float, 0.0, "detuning delta"),
    "gamma": (float, 1.0, "relaxation rate gamma (sets the unit of all rates)"),
    "rabi": (float, None, "Rabi frequency"),
    "pulse_density": (float, None, "photon density |alpha|^2/L (alternative to --rabi)"),
    "k0": (float, 0.0, "carrier frequency"),
    "format": (str, "csv", "output format: csv or json"),
    "output": (str, "-", "output path, '-' for stdout"),
    "precision": (int, 12, "significant digits in CSV output"),
}

SPECIFIC = {
    "fcs": {
        "kappa": (str, "transmitted", "channel: reflected|chiral|transmitted or 0|1|2"),
        "tau": (float, 10.0, "counting time"),
        "T": (str, "inf", "waiting time (number or inf)"),
        "chi_points": (int, 64, "number of chi samples on [0, 2 pi)"),
    },
    "pn": {
        "kappa": (str, "transmitted", "channel: reflected|chiral|transmitted or 0|1|2"),
        "tau": (float, 10.0, "counting time"),
        "T": (str, "inf", "waiting time (number or inf)"),
        "n_max": (int, None, "largest photon number reported"),
        "n_samples": (int, None, "FFT size (power of two)"),
    },
    "qfactor": {
        "tau": (float, 200.0, "counting time for the numerical Q"),
        "T": (str, "inf", "waiting time (number or inf)"),
    },
    "correlators": {
        "tau_max": (float, 20.0, "largest tau"),
        "tau_points": (int, 201, "number of tau samples"),
        "route": (str, "residue", "residue|ode|analytic"),
    },
    "mollow": {
        "T": (str, "inf", "waiting time (number or inf)"),
        "T0": (float, None, "average over waiting times up to T0 instead"),
        "omega_min": (float, None, "smallest omega - k0"),
        "omega_max": (float, None, "largest omega - k0"),
        "omega_points": (int, 2001, "number of frequency samples"),
    },
    "entropy": {
        "T": (str, "inf", "waiting time (number or inf)"),
        "tau_max": (float, 20.0, "largest tau"),
        "tau_points": (int, 201, "number of tau samples"),
    },
    "sweep": {
        "param": (str, "delta", "swept parameter: delta|rabi"),
        "values": (str, "0:5:11", "start:stop:count or comma list"),
        "tau": (float, None, "if set, also compute numerical Q at this counting time"),
        "jobs": (int, 1, "worker processes"),
    },
    "selftest": {},
}

UNITS = "all rates in units of the given gamma, times in 1/gamma"


class ConfigError(InvalidParameterError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wgqed", description="Exact photon statistics of a driven emitter in a waveguide.")
    parser.add_argument("--version", action="version", version=f"wgqed {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value file with option defaults")
        for key, (typ, default, help_) in {**COMMON, **SPECIFIC[name]}.items():
            flag = "--" + key.replace("_", "-")
            extra = [f"--{key}"] if "_" in key else []
            p.add_argument(flag, *extra, dest=key, type=typ, default=None,
                           help=f"{help_} (default: {default})")
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def parse_time(text, name: str) -> float:
    try:
        val = float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number or 'inf', got {text!r}") from None
    if math.isnan(val) or val < 0:
        raise ConfigError(f"{name} must be non-negative")
    return val


@dataclass
class RunConfig:
    command: str
    options: dict[str, Any] = field(default_factory=dict)

    def __getattr__(self, item):
        try:
            return self.options[item]
        except KeyError:
            raise AttributeError(item) from None

    def params(self) -> SystemParams:
        o = self.options
        for key in ("delta", "gamma", "k0"):
            if not math.isfinite(o[key]):
                raise ConfigError(f"{key} must be finite")
        if o["rabi"] is not None and o["pulse_density"] is not None:
            raise ConfigError("give either --rabi or --pulse-density, not both")
        if o["pulse_density"] is not None:
            return SystemParams.from_pulse(o["delta"], o["gamma"], o["pulse_density"], o["k0"])
        rabi = o["rabi"] if o["rabi"] is not None else 1.0
        return SystemParams(delta=o["delta"], gamma=o["gamma"], rabi=rabi, k0=o["k0"])


def resolve(args: argparse.Namespace) -> RunConfig:
    spec = {**COMMON, **SPECIFIC[args.command]}
    file_opts = read_config(args.config) if args.config else {}
    unknown = set(file_opts) - set(spec)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    opts = {}
    for key, (typ, default, _) in spec.items():
        val = getattr(args, key)
        if val is None and key in file_opts:
            try:
                val = typ(file_opts[key])
            except ValueError:
                raise ConfigError(f"config value for {key} is not a valid {typ.__name__}") from None
        opts[key] = default if val is None else val
    if opts["format"] not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if opts["precision"] < 1 or opts["precision"] > 17:
        raise ConfigError("precision must be between 1 and 17")
    for key, val in opts.items():
        if isinstance(val, float) and key not in ("T0",) and math.isnan(val):
            raise ConfigError(f"{key} must not be NaN")
        if key.endswith("points") and val < 1:
            raise ConfigError(f"{key} must be at least 1")
    return RunConfig(args.command, opts)


# ---------------------------------------------------------------------------
# table producers


@dataclass
class Table:
    columns: list[str]
    rows: list[list[float]]
    extra: dict[str, Any] = field(default_factory=dict)


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ConfigError("grid bounds must be finite with max >= min")
    return np.linspace(lo, hi, n)


def cmd_fcs(cfg: RunConfig, params: SystemParams) -> Table:
    kappa = fcs.check_kappa(_kappa(cfg.kappa))
    T = parse_time(cfg.T, "T")
    chi = 2 * np.pi * np.arange(cfg.chi_points) / cfg.chi_points
    F = np.atleast_1d(fcs.fcs_generating(params, kappa, chi, parse_time(cfg.tau, "tau"), T))
    return Table(["chi", "ReF", "ImF"], [[c, f.real, f.imag] for c, f in zip(chi, F)], {"kappa": kappa})


def _kappa(text):
    return int(text) if str(text).isdigit() else text


def cmd_pn(cfg: RunConfig, params: SystemParams) -> Table:
    kappa = fcs.check_kappa(_kappa(cfg.kappa))
    res = fcs.pmf(params, kappa, parse_time(cfg.tau, "tau"), parse_time(cfg.T, "T"), cfg.n_max, cfg.n_samples)
    extra = {"kappa": kappa, "mean": res.mean, "variance": res.variance, "Q": res.q,
             "asymptotic_mean": res.asymptotic_mean, "asymptotic_Q": res.asymptotic_q, **res.quality}
    return Table(["n", "p"], [[int(n), p] for n, p in zip(res.n, res.p)], extra)


def cmd_qfactor(cfg: RunConfig, params: SystemParams) -> Table:
    tau = parse_time(cfg.tau, "tau")
    T = parse_time(cfg.T, "T")
    rows = []
    for kappa in (0, 1, 2):
        mean, var, q = fcs.q_numeric(params, kappa, tau, T)
        rows.append([kappa, fcs.mean_counts(params, kappa, tau), fcs.mandel_q(params, kappa), mean, var, q])
    return Table(["kappa", "mean_closed", "Q_closed", "mean_numeric", "var_numeric", "Q_numeric"], rows)


def cmd_correlators(cfg: RunConfig, params: SystemParams) -> Table:
    t = _grid(0.0, parse_time(cfg.tau_max, "tau_max"), cfg.tau_points)
    if cfg.route == "residue":
        vals = [co.corr_time(params, k, t) for k in co.KINDS]
    elif cfg.route == "ode":
        d = co.corr_time_ode_all(params, t)
        vals = [d[k] for k in co.KINDS]
    elif cfg.route == "analytic":
        vals = [co.corr_time_analytic(params, k, t) for k in co.KINDS]
    else:
        raise ConfigError("route must be residue, ode or analytic")
    rows = []
    for i, tau in enumerate(t):
        row = [tau]
        for v in vals:
            row += [v[i].real, v[i].imag]
        rows.append(row)
    return Table(["tau", "ReR", "ImR", "ReC", "ImC", "ReM", "ImM", "ReN", "ImN"], rows, {"route": cfg.route})


def cmd_mollow(cfg: RunConfig, params: SystemParams) -> Table:
    half = 2 * params.rabi + 6 * params.gamma
    lo = cfg.omega_min if cfg.omega_min is not None else -half
    hi = cfg.omega_max if cfg.omega_max is not None else half
    x = _grid(lo, hi, cfg.omega_points)
    omega = params.k0 + x
    if cfg.T0 is not None:
        vals = sp.mollow_averaged(params, omega, cfg.T0)
        extra = {"T0": cfg.T0}
    else:
        T = parse_time(cfg.T, "T")
        vals = sp.mollow_stationary(params, omega) if math.isinf(T) else sp.mollow_transient(params, omega, T)
        extra = {"T": T}
    amps = sp.amplitudes(params)
    extra.update({"r_amp": [amps.r_amp.real, amps.r_amp.imag], "t_amp": [amps.t_amp.real, amps.t_amp.imag],
                  "k0_prefactor": params.k0})
    return Table(["omega_minus_k0", "p_inel"], [[a, b] for a, b in zip(x, np.atleast_1d(vals))], extra)


def cmd_entropy(cfg: RunConfig, params: SystemParams) -> Table:
    T = parse_time(cfg.T, "T")
    t = _grid(0.0, parse_time(cfg.tau_max, "tau_max"), cfg.tau_points)
    S, lam = en.entropy_curve(params, t, T)
    rows = [[tau, s, *l] for tau, s, l in zip(t, S, lam)]
    extra = {"T": T, "bulk_plateau": en.bulk_plateau(params), "boundary_plateau": en.boundary_plateau(params)}
    return Table(["tau", "S", "lam1", "lam2", "lam3", "lam4"], rows, extra)


def parse_values(text: str) -> list[float]:
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return list(np.linspace(float(a), float(b), int(n)))
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse sweep values {text!r}") from None


def _sweep_cell(args):
    base, key, value, tau = args
    opts = dict(base)
    opts[key] = value
    p = SystemParams(**opts)
    out = [value, fcs.mean_counts(p, 0, 1.0), fcs.mean_counts(p, 2, 1.0), fcs.mandel_q(p, 0), fcs.mandel_q(p, 2)]
    if tau is not None:
        out += [fcs.q_numeric(p, 0, tau)[2], fcs.q_numeric(p, 2, tau)[2]]
    out += [en.bulk_plateau(p), en.boundary_plateau(p)]
    return out


def cmd_sweep(cfg: RunConfig, params: SystemParams) -> Table:
    if cfg.param not in ("delta", "rabi"):
        raise ConfigError("param must be delta or rabi")
    values = parse_values(cfg.values)
    if not values:
        raise ConfigError("sweep needs at least one value")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be at least 1")
    tau = parse_time(cfg.tau, "tau") if cfg.tau is not None else None
    base = {"delta": params.delta, "gamma": params.gamma, "rabi": params.rabi, "k0": params.k0}
    for v in values:
        SystemParams(**{**base, cfg.param: v})  # validate before spawning workers
    cells = [(base, cfg.param, v, tau) for v in values]
    if cfg.jobs == 1:
        rows = [_sweep_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(_sweep_cell, cells))  # map keeps input order
    cols = [cfg.param, "rate_l", "rate_r", "Q_l", "Q_r"]
    if tau is not None:
        cols += ["Q_l_numeric", "Q_r_numeric"]
    cols += ["S_bulk_plateau", "S_boundary_plateau"]
    return Table(cols, rows)


HANDLERS = {
    "fcs": cmd_fcs,
    "pn": cmd_pn,
    "qfactor": cmd_qfactor,
    "correlators": cmd_correlators,
    "mollow": cmd_mollow,
    "entropy": cmd_entropy,
    "sweep": cmd_sweep,
}


# ---------------------------------------------------------------------------
# output


def _num(x, digits: int) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), f".{digits}g")


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, (np.floating,)):
        return _json_value(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def render(table: Table, cfg: RunConfig, params: SystemParams) -> str:
    if cfg.format == "csv":
        buf = io.StringIO()
        buf.write(",".join(table.columns) + "\n")
        for row in table.rows:
            buf.write(",".join(_num(v, cfg.precision) for v in row) + "\n")
        return buf.getvalue()
    meta = {
        "tool": "wgqed",
        "version": __version__,
        "command": cfg.command,
        "units": UNITS,
        "params": {"delta": params.delta, "gamma": params.gamma, "rabi": params.rabi, "k0": params.k0,
                   "pulse_density": params.pulse_density},
        "options": {k: v for k, v in sorted(cfg.options.items()) if k not in ("output", "format")},
        **table.extra,
    }
    head = json.dumps(_json_value(meta), sort_keys=True)
    rows = ",\n    ".join("[" + ", ".join(_num(v, 17) if math.isfinite(float(v)) else "null" for v in row) + "]"
                          for row in table.rows)
    cols = json.dumps(table.columns)
    return f'{{\n  "metadata": {head},\n  "columns": {cols},\n  "rows": [\n    {rows}\n  ]\n}}\n'


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def run(cfg: RunConfig) -> int:
    if cfg.command == "selftest":
        from .selftest import run_selftest

        rows = run_selftest()
        width = max(len(r[0]) for r in rows)
        lines = [f"{'check':<{width}}  result  value      tol"]
        for name, ok, val, tol in rows:
            lines.append(f"{name:<{width}}  {'PASS' if ok else 'FAIL':<6}  {val:<9.2e}  {tol:.0e}")
        _write("\n".join(lines) + "\n", cfg.output)
        return 0 if all(r[1] for r in rows) else 1
    params = cfg.params()
    table = HANDLERS[cfg.command](cfg, params)
    _write(render(table, cfg, params), cfg.output)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help(sys.stderr)
            return 1
        cfg = resolve(args)
        return run(cfg)
    except StabilityError as exc:
        print(f"wgqed: stability error: {exc} (pole {exc.pole!r})", file=sys.stderr)
        return 2
    except (InvalidParameterError, ConsistencyError, OSError) as exc:
        print(f"wgqed: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
