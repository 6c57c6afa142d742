"""One-factor affine short-rate models and their Riccati exponents.

A model is affine when the drift and squared volatility of the short
rate are both affine in the rate:

    dR = (mu0(t) + mu1(t) R) dt + sqrt(sig0(t) + sig1(t) R) dW.

For such models the Fourier multiplier of the integrated rate is
exponential-affine: E[exp(i w int_t^T R ds)] = exp(A(t,w;T) + r B(t,w;T))
with (A, B) solving the terminal-value system

    dA/dt + mu0 B + sig0 B^2 / 2 = 0,            A(T,w;T) = 0,
    dB/dt + mu1 B + sig1 B^2 / 2 + i w = 0,      B(T,w;T) = 0.

Generic coefficients are handled by a fixed-step classical Runge-Kutta
integration backward from T; the Vasicek model additionally has the
closed forms implemented in :func:`vasicek_riccati_closed_form`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, ValidationError

__all__ = [
    "AffineModel",
    "VasicekParams",
    "RiccatiSolution",
    "PiecewiseConstant",
    "solve_riccati_numeric",
    "vasicek_riccati_closed_form",
    "vasicek_affine",
    "riccati_pair",
    "default_steps",
    "is_deterministic",
]

MIN_KAPPA = 1e-8
_B_OVERFLOW_GUARD = 1e100


class PiecewiseConstant:
    """Right-continuous piecewise-constant function of time.

    ``PiecewiseConstant([(0.0, a), (2.0, b)])`` is ``a`` on [0, 2) and
    ``b`` from 2 onward; the first breakpoint also covers earlier times.
    """

    def __init__(self, knots):
        knots = sorted((float(t), float(v)) for t, v in knots)
        if not knots:
            raise ValidationError("piecewise table needs at least one entry")
        self._times = np.array([t for t, _ in knots])
        self._values = np.array([v for _, v in knots])

    def __call__(self, t: float) -> float:
        idx = int(np.searchsorted(self._times, t, side="right")) - 1
        return float(self._values[max(idx, 0)])


@dataclass(frozen=True)
class VasicekParams:
    """Mean-reverting Gaussian short rate dR = kappa (theta - R) dt + delta dW."""

    kappa: float
    theta: float
    delta: float

    def __post_init__(self):
        if not (self.kappa >= MIN_KAPPA):
            raise ValidationError(
                f"kappa must be >= {MIN_KAPPA} (got {self.kappa}); "
                "use the numeric Riccati solver for slower mean reversion"
            )
        if self.delta < 0.0:
            raise ValidationError("delta must be non-negative")
        for name in ("kappa", "theta", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")


@dataclass(frozen=True)
class AffineModel:
    """Affine coefficient functions; ``vasicek`` is set when closed forms apply."""

    mu0: Callable[[float], float]
    mu1: Callable[[float], float]
    sig0: Callable[[float], float]
    sig1: Callable[[float], float]
    vasicek: Optional[VasicekParams] = field(default=None)


@dataclass(frozen=True)
class RiccatiSolution:
    """Evaluable exponent pair; A(T,w;T) = B(T,w;T) = 0 by construction."""

    A: Callable
    B: Callable


def vasicek_affine(params: VasicekParams) -> AffineModel:
    """Embed Vasicek parameters as an affine model (mu0 = kappa theta, mu1 = -kappa, sig0 = delta^2)."""
    k, th, d = params.kappa, params.theta, params.delta
    return AffineModel(
        mu0=lambda t: k * th,
        mu1=lambda t: -k,
        sig0=lambda t: d * d,
        sig1=lambda t: 0.0,
        vasicek=params,
    )


def default_steps(tau: float) -> int:
    """Default step count: 1000 per year of horizon, at least 100."""
    return max(100, int(math.ceil(1000.0 * tau)))


def _expm1_c1(x: float) -> float:
    # e^{-x} - 1 + x, stable for small x
    return math.expm1(-x) + x


def _bracket3(x: float) -> float:
    # e^{-2x} - 4 e^{-x} + 3 - 2x; cancels to -(2/3) x^3 as x -> 0
    if x < 0.02:
        return x**3 * (-2.0 / 3.0 + x * (0.5 + x * (-7.0 / 30.0 + x / 12.0)))
    return math.expm1(-2.0 * x) - 4.0 * math.expm1(-x) - 2.0 * x


def vasicek_riccati_closed_form(params: VasicekParams, t: float, omega, T: float):
    """Closed-form (A, B) for the Vasicek model.

    B(t,w;T) = (i w / kappa) (1 - e^{-kappa tau}),
    A(t,w;T) = (i w theta / kappa) (e^{-kappa tau} - 1 + kappa tau)
             + (w^2 delta^2 / 4 kappa^3) (e^{-2 kappa tau} - 4 e^{-kappa tau} + 3 - 2 kappa tau)

    with tau = T - t.  Vectorised over ``omega``.
    """
    if T < t:
        raise ValidationError("need t <= T")
    k, th, d = params.kappa, params.theta, params.delta
    tau = T - t
    om = np.asarray(omega, dtype=complex)
    x = k * tau
    e1 = math.exp(-x)
    B = (1j * om / k) * (1.0 - e1)
    A = (1j * om * th / k) * _expm1_c1(x) + (om * om * d * d / (4.0 * k**3)) * _bracket3(x)
    if np.ndim(omega) == 0:
        return complex(A), complex(B)
    return A, B


def solve_riccati_numeric(
    model: AffineModel,
    t: float,
    omega,
    T: float,
    steps: Optional[int] = None,
):
    """Integrate the Riccati system backward from T to t with classical RK4.

    Fixed step size (T - t) / steps; global error O(h^4).  Raises
    :class:`BlowUpError` if |B| exceeds the overflow guard, which can
    happen for sig1 != 0 and large |omega|.
    """
    if T < t:
        raise ValidationError("need t <= T")
    om = np.asarray(omega, dtype=complex)
    scalar = om.ndim == 0
    om = np.atleast_1d(om)
    tau = T - t
    if tau == 0.0:
        A = np.zeros_like(om)
        B = np.zeros_like(om)
        return (complex(A[0]), complex(B[0])) if scalar else (A, B)
    if steps is None:
        steps = default_steps(tau)
    if steps < 1:
        raise ValidationError("steps must be >= 1")

    h = tau / steps
    iw = 1j * om
    A = np.zeros_like(om)
    B = np.zeros_like(om)

    def rhs(s: float, b: np.ndarray):
        # derivatives with respect to tau' = T - time, so signs flip
        db = model.mu1(s) * b + 0.5 * model.sig1(s) * b * b + iw
        da = model.mu0(s) * b + 0.5 * model.sig0(s) * b * b
        return da, db

    for n in range(steps):
        s0 = T - n * h
        da1, db1 = rhs(s0, B)
        da2, db2 = rhs(s0 - 0.5 * h, B + 0.5 * h * db1)
        da3, db3 = rhs(s0 - 0.5 * h, B + 0.5 * h * db2)
        da4, db4 = rhs(s0 - h, B + h * db3)
        A = A + (h / 6.0) * (da1 + 2.0 * da2 + 2.0 * da3 + da4)
        B = B + (h / 6.0) * (db1 + 2.0 * db2 + 2.0 * db3 + db4)
        if np.any(np.abs(B) > _B_OVERFLOW_GUARD):
            raise BlowUpError(f"|B| exceeded {_B_OVERFLOW_GUARD:g} during Riccati integration")

    return (complex(A[0]), complex(B[0])) if scalar else (A, B)


def riccati_pair(model: AffineModel, t: float, omega, T: float, steps: Optional[int] = None):
    """(A, B) at ``omega`` (scalar or array), closed form when available."""
    if model.vasicek is not None:
        return vasicek_riccati_closed_form(model.vasicek, t, omega, T)
    return solve_riccati_numeric(model, t, omega, T, steps)


def riccati_solution(model: AffineModel, steps: Optional[int] = None) -> RiccatiSolution:
    """Wrap a model as evaluable A(t, omega, T), B(t, omega, T) functions."""
    return RiccatiSolution(
        A=lambda t, omega, T: riccati_pair(model, t, omega, T, steps)[0],
        B=lambda t, omega, T: riccati_pair(model, t, omega, T, steps)[1],
    )


def is_deterministic(model: AffineModel, t: float, T: float, samples: int = 65) -> bool:
    """True when the volatility coefficients vanish identically on [t, T]."""
    if model.vasicek is not None:
        return model.vasicek.delta == 0.0
    for s in np.linspace(t, T, samples):
        if model.sig0(float(s)) != 0.0 or model.sig1(float(s)) != 0.0:
            return False
    return True
