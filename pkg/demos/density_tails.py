"""Marginal density of centred log-returns: heavier than Gaussian, exponential tails.

Prints the density next to a normal with the same variance and the local
slope of log-density, which settles to a constant in each tail.

    python3 demos/density_tails.py
"""

import numpy as np

from hestonfx import HestonParams
from hestonfx.analytic import marginal_density

p = HestonParams(kappa=2.0, theta=0.04, sigma=0.3, rho=-0.05, v0=0.04)
t = 1.0
s = np.sqrt(p.theta * t)
x = np.linspace(-10 * s, 10 * s, 21)
dens = marginal_density(p, t, x)
normal = np.exp(-0.5 * (x / s) ** 2) / (s * np.sqrt(2 * np.pi))
slope = np.gradient(np.log(dens), x)
print(f"{'x':>7} {'density':>12} {'normal':>12} {'d log p/dx':>11}")
for row in zip(x, dens, normal, slope):
    print("{:7.3f} {:12.4e} {:12.4e} {:11.3f}".format(*row))
