"""Command-line front end: price, yield, curve, implied-lambda, oracle, dump-config.

Configuration is a flat INI-style file with sections (model, state,
request, quadrature, oracle, output); every flag overrides the matching
key.  Numeric output is printed with 12 significant digits, as CSV by
default or as line-delimited JSON records.  Exit codes: 0 success,
2 configuration parse error, 3 validation error, 4 numeric error,
1 unexpected failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import sys
from typing import Optional

import numpy as np

from . import __version__
from .affine import AffineModel, PiecewiseConstant, VasicekParams, vasicek_affine
from .curves import (CurveSpec, CurveTable, build_indifference_curves, build_lambda_curves,
                     default_maturity_grid)
from .errors import BondIndiffError, ConfigError, NumericError, ValidationError
from .market import implied_price_of_risk, lambda_from_price
from .mc import SimConfig, mc_indifference_price, mc_laplace, simulate
from .pricer import PricingRequest, indifference_price
from .transform import MarketState, QuadratureConfig, laplace_mm

_DEFAULT_DELTA = math.sqrt(2.0 * 0.05**2 * 0.03)

# Effective configuration is kept as strings so dump-config round-trips
# byte for byte.  Defaults reproduce the worked example: kappa = 0.05,
# theta = 0.03, delta = sqrt(2 kappa^2 theta), t = 0, x = 5, r = 0.01.
DEFAULT_CONFIG: dict[str, dict[str, str]] = {
    "model": {
        "kind": "vasicek",
        "kappa": "0.05",
        "theta": "0.03",
        "delta": repr(_DEFAULT_DELTA),
        "mu0": "",
        "mu1": "",
        "sig0": "",
        "sig1": "",
    },
    "state": {"t": "0.0", "x": "5.0", "r": "0.01", "m": ""},
    "request": {
        "utility": "exponential",
        "gamma": "0.15",
        "nu": "1.0",
        "numeraire": "bond",
        "maturity": "5.0",
    },
    "quadrature": {
        "omega_i": "0.5",
        "omega_max": "60.0",
        "n_omega": "4001",
        "z_log_min": "-30.0",
        "z_log_max": "",
        "n_z": "801",
        "tol": "1e-8",
    },
    "oracle": {
        "n_paths": "1000000",
        "n_steps": "500",
        "seed": "20260810",
        "scheme": "exact-vasicek",
    },
    "output": {"format": "csv", "path": "-"},
}

_UTILITY_ALIASES = {"exp": "exponential", "exponential": "exponential",
                    "pow": "power", "power": "power"}
_NUMERAIRE_ALIASES = {"bond": "bond", "mm": "money-market", "money-market": "money-market"}

FIGURES = {
    "fig1-left": dict(builder="indifference", sweep="gamma",
                      values=(0.1, 0.125, 0.15, 0.175, 0.2), nu=1.0),
    "fig1-right": dict(builder="indifference", sweep="nu",
                       values=(-4.5, -2.0, 1.0, 2.0, 4.5), gamma=0.15),
    "fig2-left": dict(builder="lambda", sweep="lambda",
                      values=(-0.05, -0.025, 0.0, 0.025, 0.05)),
    "fig2-right": dict(builder="lambda", sweep="gamma",
                       values=(0.1, 0.15, 0.2), nu=1.0),
}


def fmt(value) -> str:
    """12-significant-digit rendering of numbers; empty string for None."""
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


# ---------------------------------------------------------------------------
# configuration handling
# ---------------------------------------------------------------------------


def load_config(path: Optional[str]) -> dict[str, dict[str, str]]:
    cfg = {section: dict(keys) for section, keys in DEFAULT_CONFIG.items()}
    if path is None:
        return cfg
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path!r}: {exc}") from exc
    for section in parser.sections():
        if section not in cfg:
            raise ConfigError(f"unknown config section [{section}]")
        for key, value in parser.items(section):
            if key not in cfg[section]:
                raise ConfigError(f"unknown config key {key!r} in section [{section}]")
            cfg[section][key] = value
    return cfg


def dump_config(cfg: dict[str, dict[str, str]]) -> str:
    lines = []
    for section, keys in cfg.items():
        lines.append(f"[{section}]")
        for key, value in keys.items():
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)


def _cfg_float(cfg, section, key) -> float:
    raw = cfg[section][key]
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as a number") from exc


def _cfg_int(cfg, section, key) -> int:
    raw = cfg[section][key]
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as an integer") from exc


def _cfg_opt_float(cfg, section, key) -> Optional[float]:
    raw = cfg[section][key].strip()
    return None if raw == "" else _cfg_float(cfg, section, key)


def _coefficient(raw: str, name: str):
    """Parse an affine coefficient: a constant or a 't:value,t:value' table."""
    raw = raw.strip()
    if raw == "":
        raise ConfigError(f"model.{name} is required for kind = affine")
    if ":" not in raw:
        try:
            const = float(raw)
        except ValueError as exc:
            raise ConfigError(f"model.{name}: cannot parse {raw!r}") from exc
        return lambda t, c=const: c
    try:
        knots = [(float(a), float(b))
                 for a, b in (pair.split(":") for pair in raw.split(","))]
    except ValueError as exc:
        raise ConfigError(f"model.{name}: cannot parse table {raw!r}") from exc
    return PiecewiseConstant(knots)


def build_model(cfg) -> AffineModel:
    kind = cfg["model"]["kind"].strip().lower()
    if kind == "vasicek":
        return vasicek_affine(VasicekParams(
            kappa=_cfg_float(cfg, "model", "kappa"),
            theta=_cfg_float(cfg, "model", "theta"),
            delta=_cfg_float(cfg, "model", "delta"),
        ))
    if kind == "affine":
        return AffineModel(
            mu0=_coefficient(cfg["model"]["mu0"], "mu0"),
            mu1=_coefficient(cfg["model"]["mu1"], "mu1"),
            sig0=_coefficient(cfg["model"]["sig0"], "sig0"),
            sig1=_coefficient(cfg["model"]["sig1"], "sig1"),
        )
    raise ConfigError(f"model.kind must be 'vasicek' or 'affine', got {kind!r}")


def build_state(cfg) -> MarketState:
    return MarketState(t=_cfg_float(cfg, "state", "t"),
                       x=_cfg_float(cfg, "state", "x"),
                       r=_cfg_float(cfg, "state", "r"))


def build_request(cfg) -> PricingRequest:
    utility = cfg["request"]["utility"].strip().lower()
    numeraire = cfg["request"]["numeraire"].strip().lower()
    if utility not in _UTILITY_ALIASES:
        raise ConfigError(f"request.utility: unknown value {utility!r}")
    if numeraire not in _NUMERAIRE_ALIASES:
        raise ConfigError(f"request.numeraire: unknown value {numeraire!r}")
    return PricingRequest(
        T=_cfg_float(cfg, "request", "maturity"),
        nu=_cfg_float(cfg, "request", "nu"),
        gamma=_cfg_float(cfg, "request", "gamma"),
        utility=_UTILITY_ALIASES[utility],
        numeraire=_NUMERAIRE_ALIASES[numeraire],
    )


def build_quadrature(cfg) -> QuadratureConfig:
    return QuadratureConfig(
        omega_i=_cfg_float(cfg, "quadrature", "omega_i"),
        omega_max=_cfg_float(cfg, "quadrature", "omega_max"),
        n_omega=_cfg_int(cfg, "quadrature", "n_omega"),
        z_log_min=_cfg_float(cfg, "quadrature", "z_log_min"),
        z_log_max=_cfg_opt_float(cfg, "quadrature", "z_log_max"),
        n_z=_cfg_int(cfg, "quadrature", "n_z"),
        tol=_cfg_float(cfg, "quadrature", "tol"),
    )


def build_sim(cfg) -> SimConfig:
    return SimConfig(
        n_paths=_cfg_int(cfg, "oracle", "n_paths"),
        n_steps=_cfg_int(cfg, "oracle", "n_steps"),
        seed=_cfg_int(cfg, "oracle", "seed"),
        scheme=cfg["oracle"]["scheme"].strip(),
    )


# flag name -> (section, key)
_OVERRIDES = {
    "kind": ("model", "kind"),
    "kappa": ("model", "kappa"),
    "theta": ("model", "theta"),
    "delta": ("model", "delta"),
    "t": ("state", "t"),
    "x": ("state", "x"),
    "r": ("state", "r"),
    "m": ("state", "m"),
    "utility": ("request", "utility"),
    "gamma": ("request", "gamma"),
    "nu": ("request", "nu"),
    "numeraire": ("request", "numeraire"),
    "maturity": ("request", "maturity"),
    "omega_i": ("quadrature", "omega_i"),
    "omega_max": ("quadrature", "omega_max"),
    "n_omega": ("quadrature", "n_omega"),
    "z_log_min": ("quadrature", "z_log_min"),
    "z_log_max": ("quadrature", "z_log_max"),
    "n_z": ("quadrature", "n_z"),
    "tol": ("quadrature", "tol"),
    "paths": ("oracle", "n_paths"),
    "steps": ("oracle", "n_steps"),
    "seed": ("oracle", "seed"),
    "scheme": ("oracle", "scheme"),
    "format": ("output", "format"),
    "out": ("output", "path"),
}


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="FILE", help="configuration file (INI sections)")
    for flag in _OVERRIDES:
        p.add_argument(f"--{flag.replace('_', '-')}", dest=flag, default=None)
    return p


def apply_overrides(cfg, args) -> None:
    for flag, (section, key) in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            cfg[section][key] = value


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _emit(cfg, header: list[str], rows: list[list]) -> str:
    style = cfg["output"]["format"].strip().lower()
    if style == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
        return buf.getvalue()
    if style == "records":
        lines = []
        for row in rows:
            rec = {}
            for key, value in zip(header, row):
                if isinstance(value, float):
                    value = float(f"{value:.12g}")
                rec[key] = value
            lines.append(json.dumps(rec))
        return "\n".join(lines) + "\n"
    raise ConfigError(f"output.format must be 'csv' or 'records', got {style!r}")


def _write(cfg, text: str) -> None:
    path = cfg["output"]["path"].strip()
    if path in ("", "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _table_output(table: CurveTable):
    sweep_col = table.sweep
    if table.kind == "lambda":
        header = ["series", "T", sweep_col, "lambda", "price", "yield", "residual", "error"]
        rows = [[r.series, r.T, r.sweep_value, r.lam, r.price, r.yield_, r.residual, r.error]
                for r in table.rows]
    else:
        header = ["series", "T", sweep_col, "price", "yield", "residual", "error"]
        rows = [[r.series, r.T, r.sweep_value, r.price, r.yield_, r.residual, r.error]
                for r in table.rows]
    return header, rows


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_price(cfg, args, yield_first: bool = False) -> int:
    model = build_model(cfg)
    state = build_state(cfg)
    req = build_request(cfg)
    quad = build_quadrature(cfg)
    m = _cfg_opt_float(cfg, "state", "m")
    res = indifference_price(model, state, req, quad, m)
    header = ["maturity", "utility", "numeraire", "gamma", "nu",
              "price", "yield", "residual", "iterations"]
    row = [req.T, req.utility, req.numeraire, req.gamma, req.nu,
           res.price, res.yield_, res.residual, res.iterations]
    if yield_first:
        order = [6, 5, 0, 1, 2, 3, 4, 7, 8]
        header = [header[i] for i in order]
        row = [row[i] for i in order]
    _write(cfg, _emit(cfg, header, [row]))
    return 0


def _cmd_implied_lambda(cfg, args) -> int:
    model = build_model(cfg)
    if model.vasicek is None:
        raise ValidationError("implied-lambda requires a Vasicek model")
    state = build_state(cfg)
    req = build_request(cfg)
    quad = build_quadrature(cfg)
    m = _cfg_opt_float(cfg, "state", "m")
    res = indifference_price(model, state, req, quad, m)
    lam = lambda_from_price(model.vasicek, state.t, state.r, req.T, res.price)
    header = ["maturity", "utility", "gamma", "nu", "lambda", "price", "yield"]
    _write(cfg, _emit(cfg, header,
                      [[req.T, req.utility, req.gamma, req.nu, lam, res.price, res.yield_]]))
    return 0


def _parse_values(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in raw.split(","))
    except ValueError as exc:
        raise ConfigError(f"cannot parse sweep values {raw!r}") from exc


def _cmd_curve(cfg, args) -> int:
    model = build_model(cfg)
    if model.vasicek is None:
        raise ValidationError("curve sweeps require a Vasicek model")
    state = build_state(cfg)
    quad = build_quadrature(cfg)
    maturities = default_maturity_grid(args.t_min, args.t_max, args.t_points)

    if args.figure is not None:
        preset = FIGURES[args.figure]
        builder = preset["builder"]
        sweep = preset["sweep"]
        values = preset["values"]
        gamma = preset.get("gamma", _cfg_float(cfg, "request", "gamma"))
        nu = preset.get("nu", _cfg_float(cfg, "request", "nu"))
        utility = "exponential"
    else:
        if args.sweep is None or args.values is None:
            raise ConfigError("curve needs either --figure or both --sweep and --values")
        sweep = args.sweep
        values = _parse_values(args.values)
        builder = "lambda" if sweep == "lambda" or args.implied_lambda else "indifference"
        gamma = _cfg_float(cfg, "request", "gamma")
        nu = _cfg_float(cfg, "request", "nu")
        utility = _UTILITY_ALIASES.get(cfg["request"]["utility"].strip().lower(), "exponential")

    spec = CurveSpec(
        maturities=maturities, sweep=sweep, values=values, state=state,
        params=model.vasicek, utility=utility, gamma=gamma, nu=nu,
        numeraire=_NUMERAIRE_ALIASES.get(cfg["request"]["numeraire"].strip().lower(), "bond"),
        m=_cfg_opt_float(cfg, "state", "m"), quad=quad,
    )
    table = build_lambda_curves(spec) if builder == "lambda" else build_indifference_curves(spec)
    header, rows = _table_output(table)
    _write(cfg, _emit(cfg, header, rows))
    return 0


def _cmd_oracle(cfg, args) -> int:
    model = build_model(cfg)
    state = build_state(cfg)
    quad = build_quadrature(cfg)
    sim = build_sim(cfg)
    batch = None

    if args.verify == "laplace":
        z = float(args.z)
        analytic = laplace_mm(model, state, _cfg_float(cfg, "request", "maturity"), z, quad)
        batch = simulate(model, state, _cfg_float(cfg, "request", "maturity"), sim)
        mc_val, se = mc_laplace(batch, z)
        half = 3.0 * se
        quantity = f"laplace(z={fmt(z)})"
    else:
        req = build_request(cfg)
        m = _cfg_opt_float(cfg, "state", "m")
        analytic = indifference_price(model, state, req, quad, m).price
        batch = simulate(model, state, req.T, sim)
        mc_val, half = mc_indifference_price(batch, state.x, req.nu, req.gamma,
                                             req.utility, req.numeraire, m)
        se = half / 3.0
        quantity = f"price({req.utility},{req.numeraire})"
    gap = abs(analytic - mc_val)
    verdict = "PASS" if gap <= half else "FAIL"
    header = ["quantity", "analytic", "mc", "se", "zscore", "verdict"]
    zscore = gap / se if se > 0 else 0.0
    _write(cfg, _emit(cfg, header, [[quantity, analytic, mc_val, se, zscore, verdict]]))
    return 0


def _cmd_dump_config(cfg, args) -> int:
    _write(cfg, dump_config(cfg))
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="bondindiff",
        description="Utility-indifference bond prices and yields under affine short-rate models",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("price", parents=[common], help="indifference price for one request")
    sub.add_parser("yield", parents=[common], help="indifference yield for one request")
    curve = sub.add_parser("curve", parents=[common], help="maturity sweeps (figure data)")
    curve.add_argument("--figure", choices=sorted(FIGURES), default=None)
    curve.add_argument("--sweep", choices=("gamma", "nu", "lambda"), default=None)
    curve.add_argument("--values", default=None, help="comma-separated sweep values")
    curve.add_argument("--implied-lambda", action="store_true",
                       help="with --sweep gamma: emit implied lambda instead of yields")
    curve.add_argument("--t-min", type=float, default=0.25)
    curve.add_argument("--t-max", type=float, default=30.0)
    curve.add_argument("--t-points", type=int, default=60)
    sub.add_parser("implied-lambda", parents=[common],
                   help="indifference price of interest-rate risk for one request")
    oracle = sub.add_parser("oracle", parents=[common], help="Monte Carlo verification")
    oracle.add_argument("--verify", choices=("price", "laplace"), default="price")
    oracle.add_argument("--z", type=float, default=1.0, help="z for --verify laplace")
    sub.add_parser("dump-config", parents=[common], help="print the effective configuration")
    return parser


def _error_module(exc: BaseException) -> str:
    tb = exc.__traceback__
    module = "bondindiff"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("bondindiff"):
            module = name
        tb = tb.tb_next
    return module.rsplit(".", maxsplit=1)[-1]


def _report_error(code: str, exc: BaseException) -> None:
    record = {"error": {"code": code, "kind": type(exc).__name__,
                        "module": _error_module(exc), "message": str(exc)}}
    print(json.dumps(record), file=sys.stderr)


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        apply_overrides(cfg, args)
        if args.command == "price":
            return _cmd_price(cfg, args)
        if args.command == "yield":
            return _cmd_price(cfg, args, yield_first=True)
        if args.command == "curve":
            return _cmd_curve(cfg, args)
        if args.command == "implied-lambda":
            return _cmd_implied_lambda(cfg, args)
        if args.command == "oracle":
            return _cmd_oracle(cfg, args)
        if args.command == "dump-config":
            return _cmd_dump_config(cfg, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        _report_error("config", exc)
        return 2
    except ValidationError as exc:
        _report_error("validation", exc)
        return 3
    except NumericError as exc:
        _report_error("numeric", exc)
        return 4
    except BondIndiffError as exc:
        _report_error("numeric", exc)
        return 4
    except Exception as exc:  # noqa: BLE001 - last-resort error record
        _report_error("internal", exc)
        return 1


def main() -> None:
    sys.exit(run())
