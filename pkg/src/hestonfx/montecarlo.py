"""Monte Carlo simulation of the Heston FX dynamics.

Three variance discretisations are available: Euler with absorption at zero,
Euler with reflection, and the quadratic-exponential (QE) scheme with
the martingale-corrected log-spot step.

Paths are produced in fixed-size blocks, each with its own Philox stream
spawned from the user seed, so the output is bit-identical for a given seed
regardless of how many worker threads run the blocks. Normals come from the
inverse normal CDF of the uniforms; antithetic partners use ``1 - U``.
"""

from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import HorizonMismatch, InvalidParameters
from .model import HestonParams, MarketEnv, VanillaOption, validate_market, validate_option, validate_params

QE_SWITCH = 1.5
BLOCK = 8192


class Scheme(str, enum.Enum):
    EULER_ABSORBING = "euler_absorbing"
    EULER_REFLECTING = "euler_reflecting"
    QE = "qe"


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    ``n_steps`` is a count per year when ``steps_per_year`` is true, otherwise
    the total number of steps. With ``keep_paths`` false only the initial and
    terminal columns are stored (zero-hit counts and per-path minima are
    still tracked at every step). ``stationary_v0`` draws each path's initial
    variance from the stationary gamma law instead of using ``v0``.
    """

    scheme: Scheme = Scheme.QE
    n_paths: int = 100_000
    n_steps: int = 100
    steps_per_year: bool = True
    horizon: float = 1.0
    seed: int = 0
    antithetic: bool = True
    keep_paths: bool = False
    stationary_v0: bool = False
    martingale_correction: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        bad = []
        if self.n_paths < 2:
            bad.append(("TooFewPaths", f"n_paths={self.n_paths} must be >= 2"))
        if self.antithetic and self.n_paths % 2:
            bad.append(("OddAntitheticPaths", f"n_paths={self.n_paths} must be even with antithetics"))
        if self.n_steps < 1:
            bad.append(("TooFewSteps", f"n_steps={self.n_steps} must be >= 1"))
        if not self.horizon > 0:
            bad.append(("NonPositiveHorizon", f"horizon={self.horizon} must be > 0"))
        if bad:
            raise InvalidParameters(bad)

    @property
    def total_steps(self) -> int:
        if self.steps_per_year:
            return max(1, int(np.ceil(self.n_steps * self.horizon - 1e-9)))
        return int(self.n_steps)


@dataclass
class PathSet:
    spot_paths: np.ndarray
    var_paths: np.ndarray
    time_grid: np.ndarray
    zero_hits: np.ndarray
    min_var: np.ndarray
    n_steps: int
    antithetic: bool
    scheme: Scheme

    @property
    def horizon(self) -> float:
        return float(self.time_grid[-1])

    @property
    def terminal_spot(self) -> np.ndarray:
        return self.spot_paths[:, -1]

    @property
    def terminal_var(self) -> np.ndarray:
        return self.var_paths[:, -1]

    @property
    def n_paths(self) -> int:
        return self.spot_paths.shape[0]


def worker_count() -> int:
    env = os.environ.get("HESTON_FX_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _uniforms(rng, shape):
    u = rng.random(shape)
    u[u == 0.0] = 2.0**-54
    return u


def _qe_constants(p, dt):
    k, th, s, r = p.kappa, p.theta, p.sigma, p.rho
    ek = np.exp(-k * dt)
    c1 = s * s * ek * (-np.expm1(-k * dt)) / k
    c2 = th * s * s * np.expm1(-k * dt) ** 2 / (2.0 * k)
    half = 0.5 * dt
    K0 = -r * k * th * dt / s
    K1 = half * (k * r / s - 0.5) - r / s
    K2 = half * (k * r / s - 0.5) + r / s
    K3 = half * (1.0 - r * r)
    return ek, c1, c2, K0, K1, K2, K3, K3


def _simulate_block(p, env, cfg, n_base, seed_seq, dt, steps):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    mirror = cfg.antithetic
    n = 2 * n_base if mirror else n_base

    if cfg.stationary_v0:
        v0 = rng.gamma(2.0 * p.kappa * p.theta / p.sigma**2, p.sigma**2 / (2.0 * p.kappa), n_base)
        v = np.concatenate([v0, v0]) if mirror else v0
    else:
        v = np.full(n, float(p.v0))
    x = np.full(n, np.log(env.spot))

    cols = steps + 1 if cfg.keep_paths else 2
    spot_out = np.empty((n, cols))
    var_out = np.empty((n, cols))
    spot_out[:, 0] = env.spot
    var_out[:, 0] = v
    zero_hits = np.zeros(n, dtype=np.int64)
    min_var = v.copy()

    mu = env.mu
    sq = np.sqrt(1.0 - p.rho**2)
    sdt = np.sqrt(dt)
    if cfg.scheme is Scheme.QE:
        ek, c1, c2, K0, K1, K2, K3, K4 = _qe_constants(p, dt)
        A = K2 + 0.5 * K4

    for i in range(steps):
        u = _uniforms(rng, (2, n_base))
        if mirror:
            u = np.concatenate([u, 1.0 - u], axis=1)
        u1, u2 = u
        z2 = ndtri(u2)

        if cfg.scheme is Scheme.QE:
            m = p.theta + (v - p.theta) * ek
            s2 = v * c1 + c2
            psi = s2 / (m * m)
            quad = psi <= QE_SWITCH
            v_new = np.empty_like(v)
            lnM = np.zeros_like(v)
            ok = np.ones_like(v, dtype=bool)

            if quad.any():
                pq = psi[quad]
                ti = 2.0 / pq
                b2 = ti - 1.0 + np.sqrt(ti) * np.sqrt(ti - 1.0)
                a = m[quad] / (1.0 + b2)
                zv = ndtri(u1[quad])
                v_new[quad] = a * (np.sqrt(b2) + zv) ** 2
                if cfg.martingale_correction:
                    good = A * a < 0.5
                    den = np.where(good, 1.0 - 2.0 * A * a, 1.0)
                    lnM[quad] = np.where(good, A * b2 * a / den - 0.5 * np.log(den), 0.0)
                    ok[quad] = good
            ex = ~quad
            if ex.any():
                pe = psi[ex]
                pp = (pe - 1.0) / (pe + 1.0)
                beta = (1.0 - pp) / m[ex]
                ue = u1[ex]
                v_new[ex] = np.where(ue <= pp, 0.0, np.log((1.0 - pp) / np.maximum(1.0 - ue, 1e-300)) / beta)
                if cfg.martingale_correction:
                    good = A < beta
                    den = np.where(good, beta - A, 1.0)
                    lnM[ex] = np.where(good, np.log(pp + beta * (1.0 - pp) / den), 0.0)
                    ok[ex] = good

            if cfg.martingale_correction:
                k0 = np.where(ok, -lnM - (K1 + 0.5 * K3) * v, K0)
            else:
                k0 = K0
            x = x + mu * dt + k0 + K1 * v + K2 * v_new + np.sqrt(K3 * v + K4 * v_new) * z2
        else:
            zv = ndtri(u1)
            zs = p.rho * zv + sq * z2
            vp = np.maximum(v, 0.0)
            rv = np.sqrt(vp)
            x = x + (mu - 0.5 * vp) * dt + rv * sdt * zs
            v_new = v + p.kappa * (p.theta - vp) * dt + p.sigma * rv * sdt * zv
            if cfg.scheme is Scheme.EULER_ABSORBING:
                v_new = np.maximum(v_new, 0.0)
            else:
                v_new = np.abs(v_new)

        v = v_new
        zero_hits += v == 0.0
        np.minimum(min_var, v, out=min_var)
        if cfg.keep_paths:
            spot_out[:, i + 1] = np.exp(x)
            var_out[:, i + 1] = v

    if not cfg.keep_paths:
        spot_out[:, 1] = np.exp(x)
        var_out[:, 1] = v
    return spot_out, var_out, zero_hits, min_var


def simulate(p: HestonParams, env: MarketEnv, cfg: SimConfig = SimConfig(), workers: int | None = None) -> PathSet:
    """Simulate spot and variance paths.

    With antithetics the first half of the rows are the base paths and row
    ``i + n/2`` is the antithetic partner of row ``i``.
    """
    validate_params(p)
    validate_market(env)
    steps = cfg.total_steps
    dt = cfg.horizon / steps
    n_base_total = cfg.n_paths // 2 if cfg.antithetic else cfg.n_paths
    sizes = [BLOCK] * (n_base_total // BLOCK)
    if n_base_total % BLOCK:
        sizes.append(n_base_total % BLOCK)
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))

    def run(i):
        return _simulate_block(p, env, cfg, sizes[i], seeds[i], dt, steps)

    workers = worker_count() if workers is None else max(1, int(workers))
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(run, range(len(sizes))))
    else:
        blocks = [run(i) for i in range(len(sizes))]

    def gather(k):
        if not cfg.antithetic:
            return np.concatenate([b[k] for b in blocks], axis=0)
        firsts = [b[k][: s] for b, s in zip(blocks, sizes)]
        seconds = [b[k][s:] for b, s in zip(blocks, sizes)]
        return np.concatenate(firsts + seconds, axis=0)

    grid = np.linspace(0.0, cfg.horizon, steps + 1) if cfg.keep_paths else np.array([0.0, cfg.horizon])
    return PathSet(
        spot_paths=gather(0),
        var_paths=gather(1),
        time_grid=grid,
        zero_hits=gather(2),
        min_var=gather(3),
        n_steps=steps,
        antithetic=cfg.antithetic,
        scheme=cfg.scheme,
    )


def sample_mean(paths: PathSet, values):
    """Mean and standard error of per-path ``values`` (pairs averaged when antithetic)."""
    values = np.asarray(values)
    if paths.antithetic:
        half = values.shape[0] // 2
        values = 0.5 * (values[:half] + values[half:])
    n = values.shape[0]
    mean = values.mean(axis=0)
    se = values.std(axis=0, ddof=1) / np.sqrt(n)
    return mean, se


def _check_horizon(paths, tau):
    if abs(tau - paths.horizon) > 1e-12 * max(1.0, tau):
        raise HorizonMismatch(f"option tau={tau} but paths end at {paths.horizon}")


def mc_prices(paths: PathSet, strikes, tau, env: MarketEnv, phi=1):
    """Discounted-payoff estimates for a strike ladder; returns (prices, standard errors)."""
    validate_market(env)
    _check_horizon(paths, tau)
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    st = paths.terminal_spot[:, None]
    payoff = np.maximum(phi * (st - strikes[None, :]), 0.0) * np.exp(-env.rd * tau)
    return sample_mean(paths, payoff)


def mc_price(paths: PathSet, opt: VanillaOption, env: MarketEnv):
    """(price, standard_error) of a European vanilla from simulated terminal spots."""
    validate_option(opt)
    price, se = mc_prices(paths, [opt.strike], opt.tau, env, opt.phi)
    return float(price[0]), float(se[0])


@dataclass(frozen=True)
class BoundaryStats:
    zero_fraction: float
    hit_path_fraction: float
    min_var: np.ndarray
    min_var_quantiles: dict

    def as_dict(self):
        return {
            "zero_fraction": self.zero_fraction,
            "hit_path_fraction": self.hit_path_fraction,
            "min_var_quantiles": self.min_var_quantiles,
        }


def boundary_stats(paths: PathSet) -> BoundaryStats:
    """Share of variance observations (after t = 0) sitting exactly at zero."""
    obs = paths.n_paths * paths.n_steps
    qs = (0.0, 0.01, 0.05, 0.25, 0.5)
    return BoundaryStats(
        zero_fraction=float(paths.zero_hits.sum() / obs),
        hit_path_fraction=float(np.mean(paths.zero_hits > 0)),
        min_var=paths.min_var,
        min_var_quantiles={str(q): float(np.quantile(paths.min_var, q)) for q in qs},
    )
