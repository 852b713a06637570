"""Garman-Kohlhagen (Black-Scholes for FX) closed forms.

Vectorised over strikes/vols; ``phi`` is +1 for calls and -1 for puts.
Deltas are plain spot deltas without premium adjustment.
"""

import numpy as np
from scipy.special import ndtr


def _d1_d2(spot, strike, tau, rd, rf, vol):
    sd = vol * np.sqrt(tau)
    d1 = (np.log(spot / strike) + (rd - rf + 0.5 * vol * vol) * tau) / sd
    return d1, d1 - sd


def price(spot, strike, tau, rd, rf, vol, phi=1):
    d1, d2 = _d1_d2(spot, strike, tau, rd, rf, vol)
    return phi * (spot * np.exp(-rf * tau) * ndtr(phi * d1) - strike * np.exp(-rd * tau) * ndtr(phi * d2))


def spot_delta(spot, strike, tau, rd, rf, vol, phi=1):
    d1, _ = _d1_d2(spot, strike, tau, rd, rf, vol)
    return phi * np.exp(-rf * tau) * ndtr(phi * d1)


def vega(spot, strike, tau, rd, rf, vol):
    """d(price)/d(vol), identical for calls and puts."""
    d1, _ = _d1_d2(spot, strike, tau, rd, rf, vol)
    return spot * np.exp(-rf * tau) * np.sqrt(tau) * np.exp(-0.5 * d1 * d1) / np.sqrt(2.0 * np.pi)


def price_bounds(spot, strike, tau, rd, rf, phi=1):
    """(lower, upper) no-arbitrage band: discounted intrinsic and the forward bound."""
    fwd_leg = spot * np.exp(-rf * tau)
    k_leg = strike * np.exp(-rd * tau)
    lower = np.maximum(phi * (fwd_leg - k_leg), 0.0)
    upper = fwd_leg if phi == 1 else k_leg
    return lower, upper
