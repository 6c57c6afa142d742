"""Monte Carlo ground truth for the analytic transform and pricers.

Simulates the short rate R and the money-market account X = x exp(int R),
estimates Laplace transforms and expected utilities on the sample, and
solves the indifference condition by bisection using common random
numbers on both sides, so the estimator targets the utility *difference*
rather than the levels.

The Philox counter-based generator keeps runs bit-reproducible for a
given seed.  The exact-vasicek scheme draws (R_T, int R ds) in one shot
from their joint Gaussian law; the Euler scheme walks the rate path and
accumulates the integral by the trapezoid rule, which solves dX = R X dt
exactly along the sampled path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .affine import AffineModel
from .errors import BracketError, ValidationError
from .transform import MarketState

__all__ = ["SimConfig", "PathBatch", "simulate", "mc_laplace", "mc_indifference_price"]

SCHEMES = ("euler", "exact-vasicek")


@dataclass(frozen=True)
class SimConfig:
    n_paths: int = 1_000_000
    n_steps: int = 500
    seed: int = 20260810
    scheme: str = "exact-vasicek"

    def __post_init__(self):
        if self.n_paths < 1:
            raise ValidationError("n_paths must be >= 1")
        if self.n_steps < 1:
            raise ValidationError("n_steps must be >= 1")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"scheme must be one of {SCHEMES}")


@dataclass(frozen=True)
class PathBatch:
    """Terminal draws per path; terminal_X = x exp(integrated_R) > 0 elementwise."""

    terminal_R: np.ndarray
    terminal_X: np.ndarray
    integrated_R: np.ndarray


def _vasicek_joint_moments(params, r: float, tau: float):
    """Mean vector and covariance of (int_t^T R ds, R_T) for the OU rate."""
    k, th, d = params.kappa, params.theta, params.delta
    e1 = math.exp(-k * tau)
    e2 = math.exp(-2.0 * k * tau)
    m_R = th + (r - th) * e1
    m_I = th * tau + (r - th) * (1.0 - e1) / k
    var_R = d * d * (1.0 - e2) / (2.0 * k)
    var_I = (d * d / (k * k)) * (tau - 2.0 * (1.0 - e1) / k + (1.0 - e2) / (2.0 * k))
    cov = (d * d / (2.0 * k * k)) * (1.0 - e1) ** 2
    return m_I, m_R, var_I, var_R, cov


def simulate(model: AffineModel, state: MarketState, T: float, cfg: SimConfig) -> PathBatch:
    """Draw a batch of (R_T, int R ds, X_T) samples under the physical measure."""
    if T < state.t:
        raise ValidationError("need T >= t")
    tau = T - state.t
    rng = np.random.Generator(np.random.Philox(key=cfg.seed))

    if cfg.scheme == "exact-vasicek":
        params = model.vasicek
        if params is None:
            raise ValidationError("exact-vasicek scheme requires a Vasicek model")
        if tau == 0.0:
            I = np.zeros(cfg.n_paths)
            R = np.full(cfg.n_paths, state.r)
        else:
            m_I, m_R, var_I, var_R, cov = _vasicek_joint_moments(params, state.r, tau)
            a = math.sqrt(max(var_I, 0.0))
            if a > 0.0:
                b = cov / a
                c = math.sqrt(max(var_R - b * b, 0.0))
            else:
                b = c = 0.0
            z = rng.standard_normal((2, cfg.n_paths))
            I = m_I + a * z[0]
            R = m_R + b * z[0] + c * z[1]
    else:
        dt = tau / cfg.n_steps
        R = np.full(cfg.n_paths, state.r)
        I = np.zeros(cfg.n_paths)
        sqdt = math.sqrt(dt)
        for k in range(cfg.n_steps):
            tk = state.t + k * dt
            drift = model.mu0(tk) + model.mu1(tk) * R
            var = np.maximum(model.sig0(tk) + model.sig1(tk) * R, 0.0)
            R_next = R + drift * dt + np.sqrt(var) * sqdt * rng.standard_normal(cfg.n_paths)
            I += 0.5 * (R + R_next) * dt
            R = R_next

    return PathBatch(terminal_R=R, terminal_X=state.x * np.exp(I), integrated_R=I)


def mc_laplace(batch: PathBatch, z: float):
    """Sample mean and standard error of exp(-z X_T)."""
    if z < 0.0:
        raise ValidationError("z must be non-negative")
    n = batch.terminal_X.size
    if n < 2:
        raise ValidationError("standard error undefined for a single path")
    vals = np.exp(-z * batch.terminal_X)
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n))


def _utility(kind: str, gamma: float):
    if kind == "exponential":
        return (lambda w: -np.exp(-gamma * w) / gamma), (lambda w: np.exp(-gamma * w))
    if kind == "power":
        def u(w):
            if np.any(w <= 0.0):
                raise ValidationError(
                    f"power utility undefined: {int(np.sum(w <= 0.0))} paths with "
                    "non-positive wealth")
            return w ** (1.0 - gamma) / (1.0 - gamma)

        return u, (lambda w: w ** (-gamma))
    raise ValidationError(f"unknown utility {kind!r}")


def mc_indifference_price(batch: PathBatch, x: float, nu: float, gamma: float, utility: str,
                          numeraire: str = "bond", m: float | None = None):
    """Solve the indifference condition on the simulated sample by bisection.

    Common random numbers: both sides of the utility comparison reuse the
    same growth factors exp(int R).  Returns (price, ci_halfwidth) where
    the half-width is 3 delta-method standard errors of the root.
    """
    if nu == 0.0:
        raise ValidationError("nu must be non-zero")
    if not (x > 0.0):
        raise ValidationError("x must be positive")
    growth = np.exp(batch.integrated_R)
    n = growth.size
    if n < 2:
        raise ValidationError("need at least two paths")
    u_fn, uprime_fn = _utility(utility, gamma)

    if numeraire == "bond":
        base = float(np.mean(u_fn(x * growth)))

        def wealth(p):
            return (x - nu * p) * growth + nu

        dwealth_dp = -nu * growth
    elif numeraire == "money-market":
        m_eff = x if m is None else m
        if not (m_eff > 0.0):
            raise ValidationError("m must be positive")
        base = float(u_fn(np.array([x / m_eff]))[0])

        def wealth(p):
            return ((x - nu * p) + nu / growth) / m_eff

        dwealth_dp = np.full(n, -nu / m_eff)
    else:
        raise ValidationError(f"unknown numeraire {numeraire!r}")

    def gap(p):
        return float(np.mean(u_fn(wealth(p)))) - base

    # bracket as in the analytic pricers, then bisect
    if nu > 0:
        lo, hi = 1e-10, x / nu - 1e-10
        if gap(lo) * gap(hi) > 0:
            raise BracketError("no sign change on the admissible interval")
    else:
        lo, hi = 1e-10, 2.0
        k = 0
        while gap(hi) * gap(lo) > 0:
            k += 1
            if k > 60:
                raise BracketError("no sign change while expanding the upper bound")
            hi *= 2.0
    glo = gap(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = gap(mid)
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
        if hi - lo <= 1e-12 * max(1.0, hi):
            break
    price = 0.5 * (lo + hi)

    gaps = u_fn(wealth(price)) - u_fn(x * growth) if numeraire == "bond" \
        else u_fn(wealth(price)) - base
    se_gap = float(np.std(gaps, ddof=1) / math.sqrt(n))
    slope = abs(float(np.mean(uprime_fn(wealth(price)) * dwealth_dp)))
    if slope == 0.0:
        raise ValidationError("utility gap has zero slope; cannot form a confidence interval")
    return price, 3.0 * se_gap / slope
