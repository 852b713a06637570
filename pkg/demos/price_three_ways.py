"""Price one FX call ladder three ways and compare.

Semi-analytical integration is the reference. The FFT ladder is read at its
own grid nodes and the Monte Carlo estimate carries a standard error.

    python3 demos/price_three_ways.py
"""

import numpy as np

from hestonfx import HestonParams, MarketEnv
from hestonfx.analytic import vanilla_prices
from hestonfx.fft import fft_price_ladder
from hestonfx.montecarlo import SimConfig, mc_prices, simulate

params = HestonParams(kappa=2.0, theta=0.04, sigma=0.3, rho=-0.05, v0=0.04)
env = MarketEnv(spot=4.0, rd=0.05, rf=0.03)
tau = 0.5

ladder = fft_price_ladder(params, env, tau)
wanted = np.array([3.4, 3.7, 4.0, 4.3, 4.6])
nodes = ladder.strikes[[np.argmin(np.abs(ladder.strikes - k)) for k in wanted]]
exact = vanilla_prices(params, env, nodes, tau)
fft = np.interp(nodes, ladder.strikes, ladder.call_prices)

paths = simulate(params, env, SimConfig(n_paths=200_000, horizon=tau, seed=42))
mc, se = mc_prices(paths, nodes, tau, env)

print(f"{'strike':>8} {'analytic':>12} {'fft':>12} {'mc':>12} {'mc se':>9} {'z':>6}")
for k, a, f, m, s in zip(nodes, exact, fft, mc, se):
    print(f"{k:8.4f} {a:12.8f} {f:12.8f} {m:12.8f} {s:9.2e} {(m - a) / s:6.2f}")
