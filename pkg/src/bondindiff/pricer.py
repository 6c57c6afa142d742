"""Utility-indifference prices and yields of zero-coupon bonds.

An investor holding x in the money market at time t can either stay put
or buy nu bonds at price p each and keep the rest in the account.  The
indifference price makes the expected terminal utility of the two plans
equal; the indifference yield is -log(p)/(T-t).

With the bond as numeraire, exponential utility reduces the condition to
a single contour integral in omega (the transform kernel evaluated at
z = gamma), and power utility to a double integral: an outer integral in
z with weight z^{gamma-2} (the Schurger representation of w^{1-gamma},
which covers both branches gamma in (0,1) and (1,inf)) around the same
inner contour kernel.  With the money market as numeraire the mirrored
kernel Gamma(+i w) on a contour Im w < 0 applies; exponential utility is
then explicit and power utility is again a root of a double integral.

Numerically the inner contour integral loses all significant digits once
z * wealth is far below one: the bracket of transform differences shrinks
like z while the quadrature noise does not.  Rows of the outer grid below
``Z_SERIES_THRESHOLD`` are therefore evaluated through the moment series
in the exponents E[exp(+-k int R ds)], which cancels the constant term
symbolically and keeps the deep-left tail accurate relative to its own
magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.special import comb

from .affine import AffineModel, is_deterministic, riccati_pair
from .errors import BracketError, NumericError, TailError, ValidationError
from .transform import MarketState, QuadratureConfig, kernel_base, laplace_kernel, omega_grid

__all__ = [
    "PricingRequest",
    "IndifferenceResult",
    "indifference_yield",
    "indifference_price_exp",
    "indifference_price_pow",
    "indifference_price_exp_mm",
    "indifference_price_pow_mm",
    "indifference_price",
    "exp_root_equation",
    "pow_root_equation",
    "pow_mm_root_equation",
]

UTILITIES = ("exponential", "power")
NUMERAIRES = ("bond", "money-market")

# Inner evaluation switches from contour quadrature to the moment series
# below this value of z * wealth-scale.
Z_SERIES_THRESHOLD = 1e-3
SERIES_ORDER = 10

_ROOT_XTOL = 1e-12
_SCAN_POINTS = 7

_BINOM = np.array(
    [[comb(n, j, exact=True) for j in range(SERIES_ORDER + 1)] for n in range(SERIES_ORDER + 1)],
    dtype=float,
)
_INV_FACT = np.array([1.0 / math.factorial(n) for n in range(SERIES_ORDER + 1)])


@dataclass(frozen=True)
class PricingRequest:
    """What to price: maturity, signed bond position, risk aversion, utility kind."""

    T: float
    nu: float
    gamma: float
    utility: str = "exponential"
    numeraire: str = "bond"

    def __post_init__(self):
        if self.utility not in UTILITIES:
            raise ValidationError(f"utility must be one of {UTILITIES}")
        if self.numeraire not in NUMERAIRES:
            raise ValidationError(f"numeraire must be one of {NUMERAIRES}")
        if not (self.gamma > 0.0) or not math.isfinite(self.gamma):
            raise ValidationError("gamma must be positive and finite")
        if self.utility == "power" and abs(self.gamma - 1.0) < 1e-9:
            raise ValidationError("power utility requires gamma != 1")
        if self.nu == 0.0 or not math.isfinite(self.nu):
            raise ValidationError("nu must be non-zero (price is undefined at nu = 0)")
        if not math.isfinite(self.T):
            raise ValidationError("maturity must be finite")


@dataclass(frozen=True)
class IndifferenceResult:
    price: float
    yield_: float
    residual: float
    iterations: int


def indifference_yield(price: float, t: float, T: float) -> float:
    """Continuously compounded yield -log(price) / (T - t)."""
    if not (price > 0.0):
        raise ValidationError("price must be positive")
    if not (T > t):
        raise ValidationError("degenerate maturity: need T > t")
    return -math.log(price) / (T - t)


def _safe_yield(price: float, t: float, T: float) -> float:
    return indifference_yield(price, t, T) if T > t else float("nan")


def _check_request(state: MarketState, req: PricingRequest, utility: str, numeraire: str) -> None:
    if req.utility != utility or req.numeraire != numeraire:
        raise ValidationError(
            f"request is for {req.utility}/{req.numeraire}, "
            f"this pricer handles {utility}/{numeraire}"
        )
    if req.T < state.t:
        raise ValidationError("need T >= t")


def _r_floor(model: AffineModel, r: float) -> float:
    """Pessimistic lower bound on average short rates; only used to cap root brackets."""
    p = model.vasicek
    if p is not None:
        sd = p.delta / math.sqrt(2.0 * p.kappa)
        return min(r, p.theta) - 3.0 * sd
    return min(r, 0.0) - 0.5


def _deterministic_log_discount(model: AffineModel, t: float, r: float, T: float) -> float:
    """int_t^T r_s ds for a noise-free model, read off the affine exponents at w = 1."""
    A, B = riccati_pair(model, t, 1.0 + 0.0j, T)
    return float((A + r * B).imag)


def _moment_exponents(model: AffineModel, t: float, r: float, T: float, sign: int) -> np.ndarray:
    """E[exp(sign * k * int_t^T R ds)] for k = 0..SERIES_ORDER."""
    ks = np.arange(SERIES_ORDER + 1, dtype=float)
    A, B = riccati_pair(model, t, -1j * sign * ks, T)
    vals = np.exp((A + r * B).real)
    vals[0] = 1.0
    return vals


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _count_sign_changes(values) -> int:
    signs = [v for v in values if v != 0.0]
    return sum(1 for a, b in zip(signs, signs[1:]) if (a > 0) != (b > 0))


def _solve_bracketed(f, nu: float, x: float, tau: float, r_floor: float, r_now: float):
    """Bracket the unique root of f and polish it with Brent's method.

    For nu > 0 admissibility forces p < x/nu; the upper end is further
    capped at twice a pessimistic discount factor.  For nu < 0 the upper
    bound expands geometrically from exp(-r tau) until the sign flips.
    A coarse scan guards against multiple sign changes in the bracket.
    """
    if nu > 0.0:
        lo = 1e-10
        hi = min(x / nu - 1e-10, 2.0 * math.exp(-r_floor * tau))
        if hi <= lo:
            raise BracketError("position nu too large: x - nu*p <= 0 for every candidate price")
        flo, fhi = f(lo), f(hi)
        if (flo > 0) == (fhi > 0) and flo != 0.0 and fhi != 0.0:
            raise BracketError(
                f"no sign change on [{lo:g}, {hi:g}] (f = {flo:.3e} .. {fhi:.3e}); "
                "the request may be unaffordable"
            )
    else:
        lo = 1e-10
        flo = f(lo)
        hi = math.exp(-r_now * tau)
        fhi = f(hi)
        doublings = 0
        while (fhi > 0) == (flo > 0) and fhi != 0.0:
            doublings += 1
            if doublings > 60:
                raise BracketError("no sign change found while expanding the upper bound")
            hi *= 2.0
            fhi = f(hi)

    scan = [flo] + [f(p) for p in np.linspace(lo, hi, _SCAN_POINTS)[1:-1]] + [fhi]
    if _count_sign_changes(scan) > 1:
        raise BracketError("root equation shows multiple sign changes in the bracket")

    root, info = brentq(f, lo, hi, xtol=_ROOT_XTOL, full_output=True)
    return float(root), int(info.iterations)


# ---------------------------------------------------------------------------
# exponential utility, bond numeraire
# ---------------------------------------------------------------------------


def exp_root_equation(model: AffineModel, state: MarketState, req: PricingRequest,
                      quad: Optional[QuadratureConfig] = None):
    """Root function f(p) and the magnitude of its nu = 0 term.

    f(p) is the weighted contour sum of the kernel at z = gamma times
    (exp(i w log x) - exp(i w log(x - nu p) - gamma nu)); the scale is
    the nu = 0 term, i.e. the transform E[exp(-gamma X_T)] itself.
    """
    if quad is None:
        quad = QuadratureConfig()
    omega, wts = omega_grid(quad, quad.omega_i)
    kern = laplace_kernel(model, state.t, state.r, req.T, req.gamma, omega) * wts / (2.0 * np.pi)
    e0 = np.exp(1j * omega * math.log(state.x))
    scale = float(np.sum(kern * e0).real)
    damp = math.exp(-req.gamma * req.nu)
    x, nu = state.x, req.nu

    def f(p: float) -> float:
        phase1 = np.exp(1j * omega * math.log(x - nu * p))
        return float(np.sum(kern * (e0 - damp * phase1)).real)

    return f, scale


def indifference_price_exp(model: AffineModel, state: MarketState, req: PricingRequest,
                           quad: Optional[QuadratureConfig] = None) -> IndifferenceResult:
    """Indifference price under exponential utility with the bond as numeraire."""
    _check_request(state, req, "exponential", "bond")
    if quad is None:
        quad = QuadratureConfig()
    f, _ = exp_root_equation(model, state, req, quad)
    price, iters = _solve_bracketed(
        f, req.nu, state.x, req.T - state.t, _r_floor(model, state.r), state.r)
    return IndifferenceResult(price, _safe_yield(price, state.t, req.T), f(price), iters)


# ---------------------------------------------------------------------------
# power utility engines
# ---------------------------------------------------------------------------


class _PowerEngineBase:
    """Outer z = exp(u) grid shared by both power-utility root equations.

    The grid is fixed once per request; every f(p) evaluation fills one
    row value per node (moment series below the z*wealth threshold,
    contour rows above) and contracts them with the Simpson-plus-weight
    vector.  Tail estimates reuse the first/last row densities.
    """

    def __init__(self, quad: QuadratureConfig, gamma: float, wealth_rate: float,
                 z_cap_extra: Optional[float], w_ref: float):
        self.gamma = gamma
        self.quad = quad
        u_min = quad.z_log_min
        u_max = quad.z_log_max
        if u_max is None:
            if wealth_rate <= 0.0:
                raise TailError(
                    "outer integral does not decay: short position exhausts the wealth scale")
            u_max = math.log(45.0 / (0.5 * wealth_rate))
            if z_cap_extra is not None:
                u_max = min(u_max, z_cap_extra)
            u_max = max(u_max, u_min + 1.0)
        self.u = np.linspace(u_min, u_max, quad.n_z)
        self.z = np.exp(self.u)
        self.w_exp = np.exp(self.u * (gamma - 1.0))
        self.w_out = _simpson_weights(quad.n_z, self.u[1] - self.u[0]) * self.w_exp
        # small-z rows are the contiguous prefix of the grid
        self.n_small = int(np.searchsorted(self.z * w_ref, Z_SERIES_THRESHOLD, side="right"))
        zs = self.z[: self.n_small]
        # powers[i, n] = (-z_i)^n / n!
        ns = np.arange(SERIES_ORDER + 1, dtype=float)
        self.powers = (-zs[:, None]) ** ns[None, :] * _INV_FACT[None, :]

    def rows(self, p: float) -> np.ndarray:
        return np.concatenate([self.powers @ self.series_coeffs(p), self.contour_rows(p)])

    def residual(self, p: float) -> float:
        return float(np.dot(self.w_out, self.rows(p)))

    def tail_check(self, p: float, scale: float) -> None:
        budget = self.quad.tol * max(1.0, scale)
        r = self.rows(p)
        # density ~ const * exp(gamma u) as u -> -inf, so the remainder
        # below u_min is density/gamma; beyond u_max decay is
        # superexponential and the endpoint density bounds the remainder.
        lo = abs(self.w_exp[0] * r[0]) / self.gamma
        if lo > budget:
            raise TailError(
                f"z->0 tail estimate {lo:.3e} exceeds budget {budget:.1e}; lower z_log_min")
        hi = abs(self.w_exp[-1] * r[-1])
        if hi > budget:
            raise TailError(
                f"z->inf tail estimate {hi:.3e} exceeds budget {budget:.1e}; raise z_log_max")

    def series_coeffs(self, p: float) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def contour_rows(self, p: float) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError


class _PowerBondEngine(_PowerEngineBase):
    """Rows of the bond-numeraire double integral.

    Contour rows carry the bracket
    exp(i w log x) - exp(i w log(x - nu p)) exp(-z nu) assembled before
    the kernel multiply; series rows use the coefficients
    c_n = x^n E_n - sum_j C(n,j) nu^j (x - nu p)^{n-j} E_{n-j} with
    E_k = E[exp(k int R)], whose n = 0 term vanishes identically.
    """

    def __init__(self, model: AffineModel, state: MarketState, req: PricingRequest,
                 quad: QuadratureConfig):
        x, nu = state.x, req.nu
        tau = req.T - state.t
        p_probe = math.exp(-state.r * tau)
        if nu > 0:
            p_probe = min(p_probe, x / nu)
        rate = x + nu * (1.0 - p_probe)
        # exp(-z nu) amplifies quadrature noise by exp(z |nu|) for short
        # positions; keep z |nu| <= 14 and let the tail check prove the
        # cut is beyond the mass of the integrand.
        cap = math.log(14.0 / abs(nu)) if nu < 0 else None

        p_ref = min(2.0 * math.exp(-_r_floor(model, state.r) * tau), 1e3)
        if nu > 0:
            p_ref = min(p_ref, x / nu)
        super().__init__(quad, req.gamma, rate, cap, x + abs(nu) * (1.0 + p_ref))

        self.x, self.nu = x, nu
        self.moments = _moment_exponents(model, state.t, state.r, req.T, sign=+1)
        self.xpow = x ** np.arange(SERIES_ORDER + 1)
        self.nupow = nu ** np.arange(SERIES_ORDER + 1)

        omega, wts = omega_grid(quad, quad.omega_i)
        self.omega = omega
        base = kernel_base(model, state.t, state.r, req.T, omega) * wts / (2.0 * np.pi)
        u_big = self.u[self.n_small:]
        self.kern = base[None, :] * np.exp(1j * omega[None, :] * u_big[:, None])
        self.e0 = np.exp(1j * omega * math.log(x))
        self.exp_znu = np.exp(-self.z[self.n_small:] * nu)
        self.L_big = (self.kern @ self.e0).real

    def series_coeffs(self, p: float) -> np.ndarray:
        xp = self.x - self.nu * p
        xppow = xp ** np.arange(SERIES_ORDER + 1)
        E = self.moments
        c = np.empty(SERIES_ORDER + 1)
        c[0] = 0.0
        for n in range(1, SERIES_ORDER + 1):
            j = np.arange(n + 1)
            c[n] = self.xpow[n] * E[n] - np.dot(
                _BINOM[n, : n + 1], self.nupow[: n + 1] * xppow[n - j] * E[n - j])
        return c

    def contour_rows(self, p: float) -> np.ndarray:
        phase1 = np.exp(1j * self.omega * math.log(self.x - self.nu * p))
        brackets = self.e0[None, :] - self.exp_znu[:, None] * phase1[None, :]
        return (self.kern * brackets).sum(axis=1).real

    def scale(self) -> float:
        L_small = self.powers @ (self.xpow * self.moments)
        if self.gamma < 1.0:
            total = (np.dot(self.w_out[: self.n_small], 1.0 - L_small)
                     + np.dot(self.w_out[self.n_small:], 1.0 - self.L_big))
        else:
            total = (np.dot(self.w_out[: self.n_small], L_small)
                     + np.dot(self.w_out[self.n_small:], self.L_big))
        return abs(float(total))


class _PowerMoneyMarketEngine(_PowerEngineBase):
    """Rows of the money-market-numeraire double integral.

    The contour rows need J(z) = E[exp(-(z nu / m) exp(-int R))], the
    mirrored-kernel integral with phase exp(i w log(m / z nu)); J is
    independent of p and is precomputed.  For short positions this
    phase is undefined, and the underlying expectation is infinite for
    any model with Gaussian rate noise, so nu < 0 is only admitted for
    deterministic models, where the exponent folds exactly.
    """

    def __init__(self, model: AffineModel, state: MarketState, req: PricingRequest,
                 quad: QuadratureConfig, m: float):
        x, nu = state.x, req.nu
        tau = req.T - state.t
        self.deterministic = is_deterministic(model, state.t, req.T)
        if nu < 0 and not self.deterministic:
            raise ValidationError(
                "money-market numeraire with nu < 0: the defining expectation "
                "E[exp(c exp(-int R ds))] with c > 0 is infinite for stochastic rates")

        p_probe = math.exp(-state.r * tau)
        if nu > 0:
            p_probe = min(p_probe, x / nu)
        rate = (x + nu * (1.0 - p_probe)) / m
        p_ref = min(2.0 * math.exp(-_r_floor(model, state.r) * tau), 1e3)
        if nu > 0:
            p_ref = min(p_ref, x / nu)
        super().__init__(quad, req.gamma, rate, None, (x + abs(nu) * (1.0 + p_ref)) / m)

        self.x, self.nu, self.m = x, nu, m
        self.moments = _moment_exponents(model, state.t, state.r, req.T, sign=-1)
        self.xpow = x ** np.arange(SERIES_ORDER + 1)
        self.nupow = nu ** np.arange(SERIES_ORDER + 1)
        self.mpow = m ** np.arange(SERIES_ORDER + 1)

        z_big = self.z[self.n_small:]
        self.z_big = z_big
        if self.deterministic:
            self.F0 = self.moments[1]  # exp(-int r ds)
        else:
            omega, wts = omega_grid(quad, -quad.omega_i)
            base = kernel_base(model, state.t, state.r, req.T, omega, mirror=True)
            base = base * wts / (2.0 * np.pi)
            phases = np.exp(1j * omega[None, :] * (math.log(m / nu) - self.u[self.n_small:, None]))
            self.J_big = (phases * base[None, :]).sum(axis=1).real

    def series_coeffs(self, p: float) -> np.ndarray:
        # c_n = (x/m)^n - sum_j C(n,j) (nu/m)^j ((x - nu p)/m)^{n-j} Etilde_j
        xp = self.x - self.nu * p
        xppow = xp ** np.arange(SERIES_ORDER + 1)
        E = self.moments
        c = np.empty(SERIES_ORDER + 1)
        c[0] = 0.0
        for n in range(1, SERIES_ORDER + 1):
            j = np.arange(n + 1)
            c[n] = (self.xpow[n] - np.dot(
                _BINOM[n, : n + 1], self.nupow[: n + 1] * xppow[n - j] * E[j])) / self.mpow[n]
        return c

    def contour_rows(self, p: float) -> np.ndarray:
        z = self.z_big
        first = np.exp(-z * self.x / self.m)
        if self.deterministic:
            shifted = (self.x - self.nu * p) + self.nu * self.F0
            return first - np.exp(-z * shifted / self.m)
        return first - np.exp(-z * (self.x - self.nu * p) / self.m) * self.J_big

    def scale(self) -> float:
        w0 = self.x / self.m
        v0 = abs(w0 ** (1.0 - self.gamma) / (1.0 - self.gamma))
        return math.gamma(self.gamma) * v0


def pow_root_equation(model: AffineModel, state: MarketState, req: PricingRequest,
                      quad: Optional[QuadratureConfig] = None):
    """Root function and nu = 0 scale of the bond-numeraire power equation."""
    if quad is None:
        quad = QuadratureConfig()
    engine = _PowerBondEngine(model, state, req, quad)
    return engine.residual, engine.scale()


def pow_mm_root_equation(model: AffineModel, state: MarketState, req: PricingRequest,
                         quad: Optional[QuadratureConfig] = None, m: Optional[float] = None):
    """Root function and nu = 0 scale of the money-market-numeraire power equation."""
    if quad is None:
        quad = QuadratureConfig()
    engine = _PowerMoneyMarketEngine(model, state, req, quad, _effective_m(state, m))
    return engine.residual, engine.scale()


def indifference_price_pow(model: AffineModel, state: MarketState, req: PricingRequest,
                           quad: Optional[QuadratureConfig] = None) -> IndifferenceResult:
    """Indifference price under power utility with the bond as numeraire."""
    _check_request(state, req, "power", "bond")
    if quad is None:
        quad = QuadratureConfig()
    engine = _PowerBondEngine(model, state, req, quad)
    price, iters = _solve_bracketed(
        engine.residual, req.nu, state.x, req.T - state.t, _r_floor(model, state.r), state.r)
    engine.tail_check(price, engine.scale())
    return IndifferenceResult(
        price, _safe_yield(price, state.t, req.T), engine.residual(price), iters)


# ---------------------------------------------------------------------------
# money-market numeraire
# ---------------------------------------------------------------------------


def _effective_m(state: MarketState, m: Optional[float]) -> float:
    m_eff = state.x if m is None else m
    if not (m_eff > 0.0):
        raise ValidationError("numeraire level m must be positive")
    return m_eff


def indifference_price_exp_mm(model: AffineModel, state: MarketState, req: PricingRequest,
                              quad: Optional[QuadratureConfig] = None,
                              m: Optional[float] = None) -> float:
    """Explicit indifference price under exponential utility, money-market numeraire.

    p = -(m / gamma nu) log (1/2pi) int dwr Gamma(i w) exp(A + r B + i w log(m / gamma nu))
    on a contour Im w < 0.  For nu < 0 the underlying expectation is
    infinite unless the model is deterministic (handled exactly).
    """
    _check_request(state, req, "exponential", "money-market")
    if quad is None:
        quad = QuadratureConfig()
    m_eff = _effective_m(state, m)
    if req.nu < 0:
        if not is_deterministic(model, state.t, req.T):
            raise ValidationError(
                "money-market numeraire with nu < 0: E[exp(c exp(-int R ds))] with "
                "c > 0 is infinite for stochastic rates")
        return math.exp(-_deterministic_log_discount(model, state.t, state.r, req.T))
    omega, wts = omega_grid(quad, -quad.omega_i)
    base = kernel_base(model, state.t, state.r, req.T, omega, mirror=True)
    phase = np.exp(1j * omega * math.log(m_eff / (req.gamma * req.nu)))
    integral = float(np.sum(wts * base * phase).real / (2.0 * np.pi))
    if integral <= 0.0:
        raise NumericError(
            f"money-market transform integral is {integral!r} <= 0; "
            "quadrature configuration is inadequate")
    return -(m_eff / (req.gamma * req.nu)) * math.log(integral)


def indifference_price_pow_mm(model: AffineModel, state: MarketState, req: PricingRequest,
                              quad: Optional[QuadratureConfig] = None,
                              m: Optional[float] = None) -> IndifferenceResult:
    """Indifference price under power utility with the money market as numeraire."""
    _check_request(state, req, "power", "money-market")
    if quad is None:
        quad = QuadratureConfig()
    engine = _PowerMoneyMarketEngine(model, state, req, quad, _effective_m(state, m))
    price, iters = _solve_bracketed(
        engine.residual, req.nu, state.x, req.T - state.t, _r_floor(model, state.r), state.r)
    engine.tail_check(price, engine.scale())
    return IndifferenceResult(
        price, _safe_yield(price, state.t, req.T), engine.residual(price), iters)


def indifference_price(model: AffineModel, state: MarketState, req: PricingRequest,
                       quad: Optional[QuadratureConfig] = None,
                       m: Optional[float] = None) -> IndifferenceResult:
    """Dispatch on (utility, numeraire); always returns an IndifferenceResult."""
    if req.numeraire == "bond":
        if req.utility == "exponential":
            return indifference_price_exp(model, state, req, quad)
        return indifference_price_pow(model, state, req, quad)
    if req.utility == "exponential":
        price = indifference_price_exp_mm(model, state, req, quad, m)
        return IndifferenceResult(price, _safe_yield(price, state.t, req.T), 0.0, 0)
    return indifference_price_pow_mm(model, state, req, quad, m)
