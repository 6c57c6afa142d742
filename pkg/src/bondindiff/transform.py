"""Laplace transform of the money-market account by contour integration.

With X_T = x exp(int_t^T R ds) and (A, B) the affine exponents of the
integrated short rate, the transform L(t,x,r;T,z) = E[exp(-z X_T)]
admits the inverse-Mellin representation

    L = (1/2pi) int_R dwr  z^{i w} Gamma(-i w) exp(A + r B + i w log x),

taken along the horizontal contour w = wr + i wi with wi > 0.  At t = T
this is the classical Cahen-Mellin integral for exp(-z x).  The same
kernel, mirrored to Gamma(+i w) on a contour wi < 0, evaluates
E[exp(-c exp(-int R ds))], which prices bonds under the money-market
numeraire.

The integrand decays like exp(-pi |wr| / 2) through the Gamma factor
(faster once the A term contributes its Gaussian envelope), so a
truncated composite Simpson rule on a uniform grid is spectrally
accurate: the error is governed by aliasing against the Gamma pole at
w = 0 and scales like exp(-|wi| pi (n_omega - 1) / omega_max).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .affine import AffineModel, riccati_pair
from .errors import ContourError, NumericError, TruncationError, ValidationError
from .special_functions import gamma_complex, log_gamma_complex

__all__ = [
    "MarketState",
    "QuadratureConfig",
    "omega_grid",
    "laplace_kernel",
    "laplace_mm",
]

_LOG_SPACE_THRESHOLD = 500.0
_MAX_EXPONENT = 700.0


@dataclass(frozen=True)
class MarketState:
    """Evaluation time, money-market wealth and current short rate."""

    t: float
    x: float
    r: float

    def __post_init__(self):
        if not (self.x > 0.0):
            raise ValidationError("wealth x must be positive")
        for name in ("t", "x", "r"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")


@dataclass(frozen=True)
class QuadratureConfig:
    """Contour and truncation parameters for the inner (omega) and outer (z) integrals.

    ``omega_i`` is the contour height magnitude; operations that need a
    negative contour place it at -omega_i.  ``z_log_max = None`` lets the
    power-utility pricers cap the outer integral from the wealth scale.
    """

    omega_i: float = 0.5
    omega_max: float = 60.0
    n_omega: int = 4001
    z_log_min: float = -30.0
    z_log_max: Optional[float] = None
    n_z: int = 801
    tol: float = 1e-8

    def __post_init__(self):
        if not (self.omega_i > 0.0):
            raise ContourError("omega_i must be positive")
        if not (self.omega_max > 0.0):
            raise ValidationError("omega_max must be positive")
        for name in ("n_omega", "n_z"):
            n = getattr(self, name)
            if n < 16:
                raise ValidationError(f"{name} must be at least 16")
            if n % 2 == 0:
                raise ValidationError(f"{name} must be odd (composite Simpson)")
        if self.z_log_max is not None and self.z_log_max <= self.z_log_min:
            raise ValidationError("z_log_max must exceed z_log_min")
        if not (self.tol > 0.0):
            raise ValidationError("tol must be positive")


def omega_grid(quad: QuadratureConfig, height: float):
    """Contour nodes w = wr + i*height and composite Simpson weights."""
    if height == 0.0:
        raise ContourError("contour height must be non-zero")
    wr = np.linspace(-quad.omega_max, quad.omega_max, quad.n_omega)
    h = wr[1] - wr[0]
    w = np.ones(quad.n_omega)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    w *= h / 3.0
    return wr + 1j * height, w


def kernel_base(model: AffineModel, t: float, r: float, T: float, omega: np.ndarray,
                mirror: bool = False) -> np.ndarray:
    """Gamma(-i w) exp(A + r B) on the grid (Gamma(+i w) when mirrored).

    Nodes whose exponent exceeds the log-space threshold are assembled
    via log Gamma so that huge A + rB cannot overflow before the Gamma
    decay is applied.
    """
    A, B = riccati_pair(model, t, omega, T)
    expo = A + r * B
    garg = 1j * omega if mirror else -1j * omega
    out = np.empty_like(expo)
    big = np.abs(expo.real) > _LOG_SPACE_THRESHOLD
    if np.any(~big):
        out[~big] = gamma_complex(garg[~big]) * np.exp(expo[~big])
    if np.any(big):
        total = log_gamma_complex(garg[big]) + expo[big]
        if np.any(total.real > _MAX_EXPONENT):
            raise NumericError("contour integrand overflows double precision")
        out[big] = np.exp(total)
    return out


def laplace_kernel(model: AffineModel, t: float, r: float, T: float, z: float,
                   omega: np.ndarray) -> np.ndarray:
    """Per-node factors z^{i w} Gamma(-i w) exp(A + r B) of the transform integrand.

    Root-finding loops reuse this array and only re-evaluate the cheap
    exp(i w log wealth) factor.  ``z`` must be positive; z^{i w} is taken
    with the principal real logarithm.
    """
    if np.any(np.asarray(omega).imag <= 0.0):
        raise ContourError("laplace_kernel requires Im(omega) > 0 on every node")
    if not (z > 0.0):
        raise ValidationError("z must be positive")
    return kernel_base(model, t, r, T, omega) * np.exp(1j * omega * math.log(z))


def _integrate(kernel: np.ndarray, weights: np.ndarray, phase: np.ndarray,
               tol: float) -> float:
    vals = kernel * phase
    total = np.sum(weights * vals) / (2.0 * np.pi)
    tail = max(abs(vals[0]), abs(vals[-1])) / (2.0 * np.pi)
    if tail > tol:
        raise TruncationError(
            f"integrand tail {tail:.3e} at the omega truncation bound exceeds tol={tol:.1e}; "
            "increase omega_max"
        )
    if abs(total.imag) > tol * max(1.0, abs(total.real)):
        raise NumericError(
            f"imaginary residual {total.imag:.3e} after symmetrisation exceeds tolerance"
        )
    return float(total.real)


def laplace_mm(model: AffineModel, state: MarketState, T: float, z: float,
               quad: QuadratureConfig | None = None) -> float:
    """E[exp(-z X_T)] for the money-market account X started at state.x.

    Composite Simpson quadrature of the contour representation along
    Im(w) = quad.omega_i, truncated at |wr| <= quad.omega_max.  The
    imaginary residual (zero up to roundoff by conjugate symmetry of the
    integrand) is checked against quad.tol and discarded.
    """
    if quad is None:
        quad = QuadratureConfig()
    if not (z > 0.0):
        raise ValidationError("z must be positive")
    if T < state.t:
        raise ValidationError("need T >= t")
    omega, weights = omega_grid(quad, quad.omega_i)
    kern = laplace_kernel(model, state.t, state.r, T, z, omega)
    value = _integrate(kern, weights, np.exp(1j * omega * math.log(state.x)), quad.tol)
    if value < -quad.tol or value > 1.0 + quad.tol:
        raise NumericError(
            f"transform value {value!r} outside (0, 1]; quadrature configuration is inadequate"
        )
    return value
