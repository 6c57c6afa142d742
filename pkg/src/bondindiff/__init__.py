"""Utility-indifference pricing of zero-coupon bonds under affine short-rate models."""

__version__ = "0.1.0"

from .affine import (AffineModel, PiecewiseConstant, RiccatiSolution, VasicekParams,
                     riccati_pair, solve_riccati_numeric, vasicek_affine,
                     vasicek_riccati_closed_form)
from .curves import (CurveRow, CurveSpec, CurveTable, build_indifference_curves,
                     build_lambda_curves, default_maturity_grid)
from .errors import (BlowUpError, BondIndiffError, BracketError, ConfigError, ContourError,
                     NumericError, PoleError, TailError, TruncationError, UnidentifiableError,
                     ValidationError)
from .market import (MarketPriceOfRisk, RiskNeutralCurvePoint, bond_drift_vol,
                     implied_price_of_risk, lambda_from_price, market_bond_price, market_yield)
from .mc import PathBatch, SimConfig, mc_indifference_price, mc_laplace, simulate
from .pricer import (IndifferenceResult, PricingRequest, exp_root_equation,
                     indifference_price, indifference_price_exp, indifference_price_exp_mm,
                     indifference_price_pow, indifference_price_pow_mm, indifference_yield,
                     pow_mm_root_equation, pow_root_equation)
from .special_functions import gamma_complex, log_gamma_complex
from .transform import MarketState, QuadratureConfig, laplace_kernel, laplace_mm

__all__ = [
    "AffineModel", "PiecewiseConstant", "RiccatiSolution", "VasicekParams",
    "riccati_pair", "solve_riccati_numeric", "vasicek_affine", "vasicek_riccati_closed_form",
    "CurveRow", "CurveSpec", "CurveTable", "build_indifference_curves",
    "build_lambda_curves", "default_maturity_grid",
    "BlowUpError", "BondIndiffError", "BracketError", "ConfigError", "ContourError",
    "NumericError", "PoleError", "TailError", "TruncationError", "UnidentifiableError",
    "ValidationError",
    "MarketPriceOfRisk", "RiskNeutralCurvePoint", "bond_drift_vol", "implied_price_of_risk",
    "lambda_from_price", "market_bond_price", "market_yield",
    "PathBatch", "SimConfig", "mc_indifference_price", "mc_laplace", "simulate",
    "IndifferenceResult", "PricingRequest", "exp_root_equation", "indifference_price",
    "indifference_price_exp", "indifference_price_exp_mm", "indifference_price_pow",
    "indifference_price_pow_mm", "indifference_yield", "pow_mm_root_equation",
    "pow_root_equation",
    "gamma_complex", "log_gamma_complex",
    "MarketState", "QuadratureConfig", "laplace_kernel", "laplace_mm",
]
