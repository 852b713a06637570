"""Heston stochastic-volatility model for FX options.

Semi-closed-form pricing and Greeks, Carr-Madan FFT ladders, Monte Carlo
simulation, CIR variance diagnostics and delta-quoted smile calibration.
"""

from .analytic import (
    CfFormulation,
    Greeks,
    characteristic_fn,
    greeks,
    marginal_density,
    vanilla_price,
    vanilla_prices,
)
from .calibration import (
    CalibrationResult,
    SmileQuote,
    SmileSlice,
    calibrate_slice,
    calibrate_surface,
    implied_vol,
    model_smile,
    strike_from_delta,
    synthetic_slice,
)
from .errors import *  # noqa: F401,F403
from .fft import FftGrid, fft_price_at, fft_price_ladder
from .model import CALL, PUT, HestonParams, MarketEnv, VanillaOption
from .montecarlo import PathSet, Scheme, SimConfig, boundary_stats, mc_price, mc_prices, simulate
from .quadrature import QuadratureConfig
from .variance import (
    TermParams,
    cir_mean,
    cir_moments,
    cir_variance,
    feller_check,
    forward_correlation,
    forward_vol_of_vol,
)

__version__ = "0.1.0"
