"""Risk-neutral Vasicek bond prices and the implied price of interest-rate risk.

A constant market price of risk lambda tilts the Vasicek long-run mean
to theta_tilde = theta - delta lambda / kappa; the risk-neutral bond
price is then exp(A~ + r B~) with the affine exponents evaluated at
w = i under the tilted mean.  Because log p~ is affine in lambda, the
lambda implied by any observed or indifference price inverts in closed
form; a root-finder cross-check lives in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .affine import VasicekParams, vasicek_affine, _bracket3, _expm1_c1
from .errors import UnidentifiableError, ValidationError
from .pricer import PricingRequest, indifference_price
from .transform import MarketState, QuadratureConfig

__all__ = [
    "MarketPriceOfRisk",
    "RiskNeutralCurvePoint",
    "market_bond_price",
    "market_yield",
    "bond_drift_vol",
    "lambda_from_price",
    "implied_price_of_risk",
]


@dataclass(frozen=True)
class MarketPriceOfRisk:
    lam: float

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ValidationError("lambda must be finite")


@dataclass(frozen=True)
class RiskNeutralCurvePoint:
    T: float
    price: float
    yield_: float


def _tilde_exponents(params: VasicekParams, t: float, T: float, lam: float):
    """A~, B~: affine exponents of the risk-neutral discount bond."""
    if T < t:
        raise ValidationError("need t <= T")
    k, d = params.kappa, params.delta
    theta_t = params.theta - d * lam / k
    x = k * (T - t)
    B = -(-math.expm1(-x)) / k  # -(1 - e^{-x})/k
    A = -(theta_t / k) * _expm1_c1(x) - (d * d / (4.0 * k**3)) * _bracket3(x)
    return A, B


def market_bond_price(params: VasicekParams, t: float, r: float, T: float, lam: float) -> float:
    """Risk-neutral zero-coupon bond price exp(A~ + r B~)."""
    A, B = _tilde_exponents(params, t, T, lam)
    return math.exp(A + r * B)


def market_yield(params: VasicekParams, t: float, r: float, T: float, lam: float) -> float:
    """Continuously compounded market yield -log p~ / (T - t)."""
    if not (T > t):
        raise ValidationError("degenerate maturity: need T > t")
    A, B = _tilde_exponents(params, t, T, lam)
    return -(A + r * B) / (T - t)


def bond_drift_vol(params: VasicekParams, t: float, r: float, T: float, lam: float):
    """Drift Q and volatility S of the discounted bond price under the physical measure.

    S = delta * B~ (negative for T > t); the generator identity gives
    Q = lambda * S, so Q/S = lambda wherever S != 0.
    """
    _, B = _tilde_exponents(params, t, T, lam)
    S = params.delta * B
    return lam * S, S


def lambda_from_price(params: VasicekParams, t: float, r: float, T: float, price: float) -> float:
    """Invert p~(lambda) = price in closed form (log p~ is affine in lambda)."""
    if params.delta <= 0.0:
        raise UnidentifiableError("lambda is unidentifiable when delta = 0")
    if not (T > t):
        raise ValidationError("degenerate maturity: need T > t")
    if not (price > 0.0):
        raise ValidationError("price must be positive")
    k, d = params.kappa, params.delta
    x = k * (T - t)
    c1 = _expm1_c1(x)  # e^{-x} - 1 + x > 0 for x > 0
    c2 = (d * d / (4.0 * k**3)) * _bracket3(x)
    B = -(-math.expm1(-x)) / k
    return k * k * (math.log(price) + params.theta * c1 / k + c2 - r * B) / (d * c1)


def implied_price_of_risk(params: VasicekParams, state: MarketState, req: PricingRequest,
                          quad: Optional[QuadratureConfig] = None,
                          m: Optional[float] = None) -> float:
    """The lambda whose risk-neutral bond price matches the indifference price."""
    model = vasicek_affine(params)
    result = indifference_price(model, state, req, quad, m)
    return lambda_from_price(params, state.t, state.r, req.T, result.price)
