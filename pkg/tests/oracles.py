"""Reference implementations that share no code with the package.

Used only to produce expected values for the tests.
"""

import numpy as np
from scipy.integrate import quad


def heston_CD(phi, j, tau, rd, rf, kappa, theta, sigma, rho):
    """(C_j, D_j) in the little-trap form, textbook notation."""
    u = 0.5 if j == 1 else -0.5
    b = kappa - rho * sigma if j == 1 else kappa
    a = kappa * theta
    d = np.sqrt((rho * sigma * phi * 1j - b) ** 2 - sigma**2 * (2 * u * phi * 1j - phi**2))
    g = (b - rho * sigma * phi * 1j - d) / (b - rho * sigma * phi * 1j + d)
    e = np.exp(-d * tau)
    C = (rd - rf) * phi * 1j * tau + a / sigma**2 * (
        (b - rho * sigma * phi * 1j - d) * tau - 2.0 * np.log((1 - g * e) / (1 - g))
    )
    D = (b - rho * sigma * phi * 1j - d) / sigma**2 * (1 - e) / (1 - g * e)
    return C, D


def heston_cf(phi, j, S, v0, tau, rd, rf, kappa, theta, sigma, rho):
    C, D = heston_CD(phi, j, tau, rd, rf, kappa, theta, sigma, rho)
    return np.exp(C + D * v0 + 1j * phi * np.log(S))


def heston_call(K, S, v0, tau, rd, rf, kappa, theta, sigma, rho):
    args = (S, v0, tau, rd, rf, kappa, theta, sigma, rho)
    P = []
    for j in (1, 2):
        f = lambda ph: np.real(np.exp(-1j * ph * np.log(K)) * heston_cf(ph, j, *args) / (1j * ph))
        val, _ = quad(f, 1e-12, np.inf, limit=2000, epsabs=1e-13, epsrel=1e-13)
        P.append(0.5 + val / np.pi)
    return S * np.exp(-rf * tau) * P[0] - K * np.exp(-rd * tau) * P[1]


def stationary_mixture_density(x, t, kappa, theta, sigma, rho):
    """Density of log(S_t/S_0) - mu t with v0 drawn from the stationary gamma law.

    The gamma expectation of exp(D v0) is (1 - D scale)^(-shape), so the
    characteristic function is exp(C) (1 - D scale)^(-shape); it is inverted
    with scipy's quad.
    """
    shape = 2.0 * kappa * theta / sigma**2
    scale = sigma**2 / (2.0 * kappa)

    def f(xi):
        C, D = heston_CD(xi, 2, t, 0.0, 0.0, kappa, theta, sigma, rho)
        log_cf = C - shape * np.log(1.0 - D * scale)
        return np.real(np.exp(-1j * xi * x + log_cf))

    val, _ = quad(f, 1e-14, np.inf, limit=2000, epsabs=1e-13, epsrel=1e-12)
    return val / np.pi


def cir_moments_by_quadrature(tenors, kappas, thetas, sigmas, v0, t):
    """E v_t and Var v_t of a CIR process with piecewise-constant inputs.

    Segment i applies on (tenors[i-1], tenors[i]], the last one extends flat.
    Straight nested quadrature of K(s) = int kappa, the mean ODE solution g(s)
    and Var v_t = int sigma(s)^2 g(s) exp(-2 (K(t) - K(s))) ds.
    """
    tenors = list(tenors)

    def at(s):
        i = min(np.searchsorted(tenors, s, side="left"), len(tenors) - 1)
        return kappas[i], thetas[i], sigmas[i]

    def integrate(f, lo, hi, rel=1e-13):
        if hi <= lo:
            return 0.0
        pts = [x for x in tenors if lo < x < hi] or None
        return quad(f, lo, hi, points=pts, epsabs=0, epsrel=rel, limit=200)[0]

    K = lambda s: integrate(lambda u: at(u)[0], 0.0, s)

    def g(s):
        Ks = K(s)
        inner = integrate(lambda u: at(u)[0] * at(u)[1] * np.exp(K(u) - Ks), 0.0, s)
        return v0 * np.exp(-Ks) + inner

    Kt = K(t)
    var = integrate(lambda s: at(s)[2] ** 2 * g(s) * np.exp(2 * K(s) - 2 * Kt), 0.0, t, rel=1e-12)
    return g(t), var
