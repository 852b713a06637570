"""Semi-analytical Heston valuation for FX vanillas.

Characteristic functions f_j (j = 1, 2) in two algebraically equivalent
forms, the probabilities P_j, vanilla prices, closed-form Greeks and the
marginal density of centred log-returns.

Conventions
-----------
* ``x = log(S)`` carries no drift; the ``(rd - rf) i phi tau`` term lives in C_j.
* ``P_j(y)`` is the probability (under measure j) that ``log S_T > y``, so it
  is non-increasing in the log-strike ``y``.
* Frequencies may be complex (the FFT pricer evaluates f_2 off the real axis).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .model import (
    HestonParams,
    MarketEnv,
    VanillaOption,
    check_tau,
    validate_all,
    validate_params,
)
from .quadrature import DEFAULT_QUAD, QuadratureConfig, integrate_half_line


class CfFormulation(str, enum.Enum):
    TRANSFORMED = "transformed"
    ORIGINAL = "original"


@dataclass(frozen=True)
class CfTerms:
    """d_j, g_j (g-tilde for the transformed form), C_j and D_j at given frequencies."""

    d: np.ndarray
    g: np.ndarray
    C: np.ndarray
    D: np.ndarray
    j: int
    form: CfFormulation


def _clog1p(z):
    """log(1 + z) for complex z, accurate when |z| is tiny (np.log1p is not)."""
    x, y = z.real, z.imag
    return 0.5 * np.log1p(x * (2.0 + x) + y * y) + 1j * np.arctan2(y, 1.0 + x)


def _u_b(p: HestonParams, j: int):
    if j == 1:
        return 0.5, p.kappa + p.lam - p.sigma * p.rho
    if j == 2:
        return -0.5, p.kappa + p.lam
    raise ValueError(f"j must be 1 or 2, got {j}")


def cf_terms(p, env, tau, phi, j, form=CfFormulation.TRANSFORMED) -> CfTerms:
    """Complex building blocks of f_j; principal branches for sqrt and log.

    The transformed form is evaluated through cancellation-free rewrites
    (``beta - d = -sigma^2 w / (beta + d)`` and ``log1p``) so that it stays
    accurate as sigma -> 0.
    """
    form = CfFormulation(form)
    u, b = _u_b(p, j)
    phi = np.asarray(phi, dtype=complex)
    s2 = p.sigma**2
    beta = b - p.rho * p.sigma * phi * 1j
    w = phi * phi - 2.0 * u * phi * 1j
    d = np.sqrt(beta * beta + s2 * w)
    drift = (env.rd - env.rf) * phi * 1j * tau
    zero = phi == 0

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if form is CfFormulation.TRANSFORMED:
            # beta + d cancels when Re(beta) < 0 and phi is small; use
            # beta + d = sigma^2 w / (d - beta) there instead
            neg = beta.real < 0
            dmb = d - beta
            bpd = np.where(neg, s2 * w / dmb, beta + d)
            q = np.where(neg, dmb / s2, w / bpd)
            g = np.where(neg, -dmb * dmb / (s2 * w), -s2 * w / (bpd * bpd))
            e = np.exp(-d * tau)
            D = -q * (1.0 - e) / (1.0 - g * e)
            logterm = _clog1p(-g * e) - _clog1p(-g)
            # |g| -> inf as phi -> 0 in that regime; rewrite through h = 1/g
            h = -s2 * w / (dmb * dmb)
            huge = neg & (np.abs(h) < 1e-8)
            if np.any(huge):
                D = np.where(huge, -q * h * (1.0 - e) / (h - e), D)
                logterm = np.where(huge, np.log(e - h) - _clog1p(-h), logterm)
            C = drift + p.kappa * p.theta * (-q * tau - 2.0 * logterm / s2)
        else:
            bmd = beta - d
            g = (beta + d) / bmd
            # e^{d tau} overflows long before the integrand matters, so work with
            # e^{-d tau}; the principal log of the same ratio is rebuilt from
            # its modulus and argument, which keeps the branch behaviour intact
            em = np.exp(-d * tau)
            D = (beta + d) / s2 * (em - 1.0) / (em - g)
            num, den = em - g, 1.0 - g
            log_ratio = (d.real * tau + np.log(np.abs(num)) - np.log(np.abs(den))
                         + 1j * np.angle(np.exp(1j * d.imag * tau) * num / den))
            C = drift + p.kappa * p.theta / s2 * ((beta + d) * tau - 2.0 * log_ratio)
    if np.any(zero):
        C = np.where(zero, 0.0, C)
        D = np.where(zero, 0.0, D)
        g = np.where(zero, 0.0 if form is CfFormulation.TRANSFORMED else np.inf, g)
    return CfTerms(d=d, g=g, C=C, D=D, j=j, form=form)


def characteristic_fn(p, env, x, v, tau, phi, j=2, form=CfFormulation.TRANSFORMED):
    """f_j(x, v, tau, phi) = exp(C_j + D_j v + i phi x).

    For j = 2 and ``x = log(spot)`` this is E[exp(i phi log S_T)] under the
    risk-neutral measure (lambda = 0).
    """
    t = cf_terms(p, env, tau, phi, j, form)
    phi = np.asarray(phi, dtype=complex)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.exp(t.C + t.D * v + 1j * phi * x)


@dataclass(frozen=True)
class ContinuityScan:
    phi: np.ndarray
    imag_C: np.ndarray
    threshold: float
    jumps: np.ndarray  # grid indices i with a jump between phi[i] and phi[i+1]

    @property
    def continuous(self) -> bool:
        return self.jumps.size == 0


def continuity_scan(p, env, tau, j=2, form=CfFormulation.ORIGINAL, phi_max=100.0, step=0.01) -> ContinuityScan:
    """Scan Im C_j on (0, phi_max] for branch-cut jumps.

    Crossing the principal-log cut shifts Im C_j by 4 pi kappa theta / sigma^2,
    whereas the smooth change between neighbouring grid points is tiny, so any
    step larger than pi kappa theta / sigma^2 is flagged.
    """
    validate_params(p)
    tau = check_tau(tau)
    n = int(round(phi_max / step))
    phi = step * np.arange(1, n + 1)
    C = cf_terms(p, env, tau, phi, j, form).C
    im = np.imag(C)
    thr = np.pi * p.kappa * p.theta / p.sigma**2
    bad = ~np.isfinite(im[:-1]) | ~np.isfinite(im[1:])
    jumps = np.flatnonzero(bad | (np.abs(np.diff(im)) > thr))
    return ContinuityScan(phi=phi, imag_C=im, threshold=float(thr), jumps=jumps)


def _phi1(z):
    """(1 - e^{-z}) / z with its limit 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 - z / 2.0 + z * z / 6.0, -np.expm1(-zs) / zs)


def _psi(z):
    """(z - 1 + e^{-z}) / z^2 with its limit 1/2 at z = 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-3
    zs = np.where(small, 1.0, z)
    series = 0.5 - z / 6.0 + z * z / 24.0 - z**3 / 120.0
    return np.where(small, series, (zs + np.expm1(-zs)) / zs**2)


def log_spot_mean(p, env, x, v, tau, j=2):
    """E_j[log S_tau]; the slope of arg f_j at phi = 0.

    Under measure j, log S drifts at ``mu + u_j v`` and the variance at
    ``kappa theta - b_j v``.
    """
    u, b = _u_b(p, j)
    z = b * tau
    integrated = v * tau * _phi1(z) + p.kappa * p.theta * tau * tau * _psi(z)
    return float(x + env.mu * tau + u * integrated)


def _d_log_spot_mean_dv(p, tau, j):
    u, b = _u_b(p, j)
    return float(u * tau * _phi1(b * tau))


def expected_integrated_variance(p, v, tau):
    return float(v * tau * _phi1(p.kappa * tau) + p.kappa * p.theta * tau * tau * _psi(p.kappa * tau))


def _phi_scale(p, v, tau):
    total = max(expected_integrated_variance(p, v, tau), p.theta * tau, 1e-10)
    return float(np.clip(1.0 / np.sqrt(total), 0.1, 1e4))


# kinds of phi-integrals: P (probability), V1/V2 (first/second v-derivative of P), p (density)
_KINDS = ("P", "V1", "V2", "p")


def _integrals(p, env, x, v, tau, ys, specs, quad, form):
    """Evaluate the requested phi-integrals for every log-strike in ``ys``.

    ``specs`` is a sequence of (j, kind). Returns an array (len(specs), len(ys))
    holding (1/pi) * integral, i.e. without the 1/2 offset of P_j.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    js = sorted({j for j, _ in specs})
    limits = {}
    for j in js:
        m = log_spot_mean(p, env, x, v, tau, j)
        dm = _d_log_spot_mean_dv(p, tau, j)
        limits[(j, "P")] = m - ys
        limits[(j, "V1")] = np.full_like(ys, dm)
        limits[(j, "V2")] = np.zeros_like(ys)
        limits[(j, "p")] = np.ones_like(ys)

    def integrand(phi):
        phi = np.asarray(phi, dtype=float)
        zero = phi == 0
        ph = np.where(zero, 1.0, phi)
        osc = np.exp(1j * np.outer(x - ys, ph))  # (m, n)
        rows = []
        terms = {j: cf_terms(p, env, tau, ph, j, form) for j in js}
        for j, kind in specs:
            t = terms[j]
            with np.errstate(over="ignore", invalid="ignore"):
                fj = np.exp(t.C + t.D * v)
                if kind == "P":
                    core = fj / (1j * ph)
                elif kind == "V1":
                    core = t.D * fj / (1j * ph)
                elif kind == "V2":
                    core = t.D * t.D * fj / (1j * ph)
                else:
                    core = fj
                val = np.real(osc * core)
            val = np.where(zero, limits[(j, kind)][:, None], val)
            rows.append(val)
        return np.concatenate(rows, axis=0)

    scale = _phi_scale(p, v, tau)
    out = integrate_half_line(integrand, quad, scale=scale)
    return out.reshape(len(specs), ys.size) / np.pi


def prob_P(p, env, x, v, tau, y, j, quad: QuadratureConfig = DEFAULT_QUAD, form=CfFormulation.TRANSFORMED):
    """P_j(x, v, tau, y); scalar in, scalar out, array ``y`` in, array out."""
    validate_params(p)
    tau = check_tau(tau)
    val = 0.5 + _integrals(p, env, x, v, tau, y, [(j, "P")], quad, CfFormulation(form))[0]
    return val if np.ndim(y) else float(val[0])


def density_p(p, env, x, v, tau, y, j, quad: QuadratureConfig = DEFAULT_QUAD, form=CfFormulation.TRANSFORMED):
    """p_j = -dP_j/dy, the density of log S_tau under measure j."""
    validate_params(p)
    tau = check_tau(tau)
    val = _integrals(p, env, x, v, tau, y, [(j, "p")], quad, CfFormulation(form))[0]
    return val if np.ndim(y) else float(val[0])


def _as_options(strikes, tau, phi):
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    phi = np.broadcast_to(np.asarray(phi, dtype=float), strikes.shape)
    return strikes, float(tau), phi


def _check_ladder(p, env, strikes, tau, phi):
    for k, f in zip(strikes, phi):
        validate_all(p, env, VanillaOption(float(k), tau, int(f)))


def vanilla_prices(p, env, strikes, tau, phi=1, quad: QuadratureConfig = DEFAULT_QUAD,
                   form=CfFormulation.TRANSFORMED, v=None):
    """Prices for a strike ladder at one maturity; one quadrature pass."""
    strikes, tau, phi = _as_options(strikes, tau, phi)
    _check_ladder(p, env, strikes, tau, phi)
    v = p.v0 if v is None else v
    x = np.log(env.spot)
    raw = _integrals(p, env, x, v, tau, np.log(strikes), [(1, "P"), (2, "P")], quad, CfFormulation(form))
    P1, P2 = 0.5 + raw
    Pp = (1 - phi) / 2 + phi * P1
    Pm = (1 - phi) / 2 + phi * P2
    price = phi * (np.exp(-env.rf * tau) * env.spot * Pp - strikes * np.exp(-env.rd * tau) * Pm)
    # far-wing prices are a difference of O(1) terms and can round below zero
    return np.maximum(price, 0.0)


def vanilla_price(p, env, opt: VanillaOption, quad: QuadratureConfig = DEFAULT_QUAD,
                  form=CfFormulation.TRANSFORMED) -> float:
    """HestonVanilla price in domestic currency."""
    validate_all(p, env, opt)
    return float(vanilla_prices(p, env, [opt.strike], opt.tau, opt.phi, quad, form)[0])


@dataclass(frozen=True)
class Greeks:
    price: float
    delta: float
    dual_delta: float
    gamma: float
    rho_d: float
    rho_f: float
    vega: float
    volga: float
    vanna: float
    theta: float

    def as_dict(self):
        return dict(self.__dict__)


def _greek_ladder(p, env, strikes, tau, phi, quad, form):
    strikes, tau, phi = _as_options(strikes, tau, phi)
    _check_ladder(p, env, strikes, tau, phi)
    S, v = env.spot, p.v0
    specs = [(1, "P"), (2, "P"), (1, "p"), (1, "V1"), (2, "V1"), (1, "V2"), (2, "V2")]
    I = _integrals(p, env, np.log(S), v, tau, np.log(strikes), specs, quad, CfFormulation(form))
    P1, P2 = 0.5 + I[0], 0.5 + I[1]
    p1, dP1, dP2, d2P1, d2P2 = I[2:]
    dfr, dfd = np.exp(-env.rf * tau), np.exp(-env.rd * tau)
    Pp = (1 - phi) / 2 + phi * P1
    Pm = (1 - phi) / 2 + phi * P2
    out = {
        "price": np.maximum(phi * (dfr * S * Pp - strikes * dfd * Pm), 0.0),
        "delta": phi * dfr * Pp,
        "dual_delta": -phi * dfd * Pm,
        "gamma": dfr / S * p1,
        "rho_d": phi * strikes * dfd * tau * Pm,
        "rho_f": -phi * S * dfr * tau * Pp,
        "vega": dfr * S * dP1 - strikes * dfd * dP2,
        "volga": dfr * S * d2P1 - strikes * dfd * d2P2,
        "vanna": dfr * dP1,
    }
    # calendar-time theta from the pricing PDE with lambda(t, v, S) = lam * v
    out["theta"] = -(
        0.5 * v * S * S * out["gamma"]
        + p.rho * p.sigma * v * S * out["vanna"]
        + 0.5 * p.sigma**2 * v * out["volga"]
        + env.mu * S * out["delta"]
        + (p.kappa * (p.theta - v) - p.lam * v) * out["vega"]
        - env.rd * out["price"]
    )
    return out


def greeks(p, env, opt: VanillaOption, quad: QuadratureConfig = DEFAULT_QUAD,
           form=CfFormulation.TRANSFORMED) -> Greeks:
    """All closed-form sensitivities from a single quadrature pass.

    vega/volga are taken with respect to the initial variance v0; vanna is
    d(delta)/d(v0); theta is dh/dt (calendar time, so usually negative).
    """
    validate_all(p, env, opt)
    g = _greek_ladder(p, env, [opt.strike], opt.tau, opt.phi, quad, form)
    return Greeks(**{k: float(val[0]) for k, val in g.items()})


def delta(p, env, opt, quad=DEFAULT_QUAD, form=CfFormulation.TRANSFORMED) -> float:
    validate_all(p, env, opt)
    P1 = prob_P(p, env, np.log(env.spot), p.v0, opt.tau, np.log(opt.strike), 1, quad, form)
    return opt.phi * np.exp(-env.rf * opt.tau) * ((1 - opt.phi) / 2 + opt.phi * P1)


def dual_delta(p, env, opt, quad=DEFAULT_QUAD, form=CfFormulation.TRANSFORMED) -> float:
    validate_all(p, env, opt)
    P2 = prob_P(p, env, np.log(env.spot), p.v0, opt.tau, np.log(opt.strike), 2, quad, form)
    return -opt.phi * np.exp(-env.rd * opt.tau) * ((1 - opt.phi) / 2 + opt.phi * P2)


def gamma(p, env, opt, quad=DEFAULT_QUAD, form=CfFormulation.TRANSFORMED) -> float:
    validate_all(p, env, opt)
    p1 = density_p(p, env, np.log(env.spot), p.v0, opt.tau, np.log(opt.strike), 1, quad, form)
    return np.exp(-env.rf * opt.tau) / env.spot * p1


def rhos(p, env, opt, quad=DEFAULT_QUAD, form=CfFormulation.TRANSFORMED):
    """(dh/drd, dh/drf)."""
    g = greeks(p, env, opt, quad, form)
    return g.rho_d, g.rho_f


def vega_volga(p, env, opt, quad=DEFAULT_QUAD, form=CfFormulation.TRANSFORMED):
    """(dh/dv0, d2h/dv0^2)."""
    g = greeks(p, env, opt, quad, form)
    return g.vega, g.volga


def theta(p, env, opt, quad=DEFAULT_QUAD, form=CfFormulation.TRANSFORMED) -> float:
    return greeks(p, env, opt, quad, form).theta


# marginal density of centred log-returns, initial variance drawn from the
# stationary law of the variance process


def density_exponent(p: HestonParams, t, xi):
    """F_t(xi) so that the density is (1/2pi) int exp(i xi x + F_t(xi)) dxi."""
    xi = np.asarray(xi, dtype=complex)
    k, th, s = p.kappa, p.theta, p.sigma
    gam = k + 1j * p.rho * s * xi
    om = np.sqrt(gam * gam + s * s * (xi * xi - 1j * xi))
    c = (om * om - gam * gam + 2.0 * k * gam) / (2.0 * k * om)
    # cosh(z) + c sinh(z) = e^z/2 ((1 + c) + (1 - c) e^{-2z}), z = om t / 2
    log_mix = 0.5 * om * t - np.log(2.0) + np.log((1.0 + c) + (1.0 - c) * np.exp(-om * t))
    return k * th / s**2 * gam * t - 2.0 * k * th / s**2 * log_mix


def marginal_density(p: HestonParams, time_lag, x_grid, quad: QuadratureConfig = DEFAULT_QUAD):
    """Density of ``x_t = log(S_t/S_0) - mu t`` over ``x_grid``.

    The initial variance is integrated out against its stationary (gamma)
    law, so ``p.v0`` is not used.
    """
    validate_params(p)
    t = check_tau(time_lag)
    xs = np.atleast_1d(np.asarray(x_grid, dtype=float))

    def integrand(xi):
        xi = np.asarray(xi, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            val = np.real(np.exp(1j * np.outer(xs, xi) + density_exponent(p, t, xi)[None, :]))
        return val

    scale = _phi_scale(p, p.theta, t)
    out = integrate_half_line(integrand, quad, scale=scale) / np.pi
    return out if np.ndim(x_grid) else float(out[0])
