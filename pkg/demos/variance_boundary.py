"""Feller condition, zero-boundary behaviour and forward vol-of-vol.

    python3 demos/variance_boundary.py
"""

from hestonfx import HestonParams, MarketEnv
from hestonfx.montecarlo import Scheme, SimConfig, boundary_stats, simulate
from hestonfx.variance import feller_check, forward_correlation, forward_vol_of_vol

env = MarketEnv(spot=1.0, rd=0.0, rf=0.0)
sets = {
    "alpha 3.56": HestonParams(2.0, 0.04, 0.3, 0.0, 0.04),
    "alpha 2.25": HestonParams(1.5, 0.015, 0.2, 0.0, 0.01),
    "alpha 0.22": HestonParams(0.5, 0.01, 0.3, 0.0, 0.01),
}
for name, p in sets.items():
    rep = feller_check(p)
    print(f"{name}: satisfied={rep.satisfied} regime={rep.regime.value}")
    for scheme in Scheme:
        for steps in (100, 400):
            cfg = SimConfig(scheme=scheme, n_paths=20_000, n_steps=steps, seed=1)
            st = boundary_stats(simulate(p, env, cfg))
            print(f"    {scheme.value:17s} {steps:4d} steps/yr  zero fraction={st.zero_fraction:.2e}"
                  f"  paths touching zero={st.hit_path_fraction:.2%}")

print("\nforward vol-of-vol between a 6M fit (sigma 0.3, rho -0.1) and a 1Y fit (sigma 0.5, rho -0.3):")
print(f"  sigma(6M,1Y) = {forward_vol_of_vol(0.3, 0.5, 0.5, 1.0, 2.0, 0.04, 0.04):.4f}")
print(f"  rho(6M,1Y)   = {forward_correlation(-0.1, -0.3, 0.5, 1.0):.4f}")
