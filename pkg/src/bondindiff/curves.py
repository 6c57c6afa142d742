"""Maturity sweeps: indifference yield curves, market curves, implied lambda curves."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .affine import VasicekParams, vasicek_affine
from .errors import BondIndiffError, ValidationError
from .market import lambda_from_price, market_bond_price, market_yield
from .pricer import PricingRequest, indifference_price
from .transform import MarketState, QuadratureConfig

__all__ = [
    "CurveSpec",
    "CurveRow",
    "CurveTable",
    "default_maturity_grid",
    "build_indifference_curves",
    "build_lambda_curves",
]

SWEEPS = ("gamma", "nu", "lambda")


def default_maturity_grid(t_min: float = 0.25, t_max: float = 30.0, n: int = 60) -> np.ndarray:
    """Geometric maturity grid; resolves the short end and long-end flattening."""
    return np.geomspace(t_min, t_max, n)


@dataclass(frozen=True)
class CurveSpec:
    maturities: Sequence[float]
    sweep: str
    values: Sequence[float]
    state: MarketState
    params: VasicekParams
    utility: str = "exponential"
    gamma: float = 0.15
    nu: float = 1.0
    numeraire: str = "bond"
    m: Optional[float] = None
    quad: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ValidationError(f"sweep must be one of {SWEEPS}")
        ts = np.asarray(self.maturities, dtype=float)
        if ts.size == 0 or np.any(np.diff(ts) <= 0.0):
            raise ValidationError("maturities must be non-empty and strictly increasing")
        if np.any(ts <= self.state.t):
            raise ValidationError("every maturity must exceed state.t")
        if len(self.values) == 0:
            raise ValidationError("sweep values must be non-empty")


@dataclass(frozen=True)
class CurveRow:
    series: str
    T: float
    sweep_value: Optional[float]
    price: Optional[float] = None
    yield_: Optional[float] = None
    residual: Optional[float] = None
    lam: Optional[float] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class CurveTable:
    kind: str  # "yield" or "lambda"
    sweep: str
    rows: list[CurveRow]


def _sorted(rows: list[CurveRow]) -> list[CurveRow]:
    return sorted(rows, key=lambda r: (r.T, r.series != "market",
                                       r.sweep_value if r.sweep_value is not None else -math.inf))


def _request(spec: CurveSpec, T: float, value: float) -> PricingRequest:
    gamma = value if spec.sweep == "gamma" else spec.gamma
    nu = value if spec.sweep == "nu" else spec.nu
    return PricingRequest(T=float(T), nu=nu, gamma=gamma,
                          utility=spec.utility, numeraire=spec.numeraire)


def _market_rows(spec: CurveSpec, lam: float, series: str = "market") -> list[CurveRow]:
    rows = []
    t, r = spec.state.t, spec.state.r
    for T in spec.maturities:
        price = market_bond_price(spec.params, t, r, float(T), lam)
        rows.append(CurveRow(series=series, T=float(T), sweep_value=lam,
                             price=price, yield_=market_yield(spec.params, t, r, float(T), lam)))
    return rows


def build_indifference_curves(spec: CurveSpec) -> CurveTable:
    """One row per (T, sweep value), plus the lambda = 0 market reference rows.

    Rows that fail to price carry the error message instead of aborting
    the sweep.
    """
    if spec.sweep not in ("gamma", "nu"):
        raise ValidationError("indifference curves sweep gamma or nu")
    model = vasicek_affine(spec.params)
    rows = _market_rows(spec, lam=0.0)
    for value in spec.values:
        for T in spec.maturities:
            try:
                req = _request(spec, T, float(value))
                res = indifference_price(model, spec.state, req, spec.quad, spec.m)
                rows.append(CurveRow(series="indifference", T=float(T), sweep_value=float(value),
                                     price=res.price, yield_=res.yield_, residual=res.residual))
            except BondIndiffError as exc:
                rows.append(CurveRow(series="indifference", T=float(T), sweep_value=float(value),
                                     error=str(exc)))
    return CurveTable(kind="yield", sweep=spec.sweep, rows=_sorted(rows))


def build_lambda_curves(spec: CurveSpec) -> CurveTable:
    """Market yields over a lambda range, or implied lambda over a gamma range."""
    if spec.params.delta <= 0.0:
        raise ValidationError("lambda curves need delta > 0")
    if spec.sweep == "lambda":
        rows = _market_rows(spec, lam=0.0)
        for lam in spec.values:
            rows.extend(_market_rows(spec, lam=float(lam), series="market-sweep"))
        return CurveTable(kind="yield", sweep="lambda", rows=_sorted(rows))
    if spec.sweep != "gamma":
        raise ValidationError("lambda curves sweep lambda or gamma")

    model = vasicek_affine(spec.params)
    rows: list[CurveRow] = []
    t, r = spec.state.t, spec.state.r
    for value in spec.values:
        for T in spec.maturities:
            try:
                req = _request(spec, T, float(value))
                res = indifference_price(model, spec.state, req, spec.quad, spec.m)
                lam = lambda_from_price(spec.params, t, r, float(T), res.price)
                rows.append(CurveRow(series="implied-lambda", T=float(T),
                                     sweep_value=float(value), price=res.price,
                                     yield_=res.yield_, residual=res.residual, lam=lam))
            except BondIndiffError as exc:
                rows.append(CurveRow(series="implied-lambda", T=float(T),
                                     sweep_value=float(value), error=str(exc)))
    return CurveTable(kind="lambda", sweep="gamma", rows=_sorted(rows))
