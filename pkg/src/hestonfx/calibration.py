"""Smile calibration of one expiry slice with v0 and kappa held fixed.

Market quotes come as (signed spot delta, implied vol) pairs. Strikes are
retrieved once from the quotes, then (sigma, theta, rho) are fitted by a
Nelder-Mead search on the sum of squared implied-vol errors. The search runs
in unconstrained coordinates sigma = exp(s), theta = exp(q), rho = tanh(r).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize
from scipy.special import ndtri

from . import garman_kohlhagen as gk
from .analytic import vanilla_prices
from .errors import (
    BracketExhausted,
    DegenerateSlice,
    DeltaOutOfRange,
    HestonError,
    InvalidParameters,
    NoConvergence,
    PriceOutOfBand,
)
from .model import HestonParams, MarketEnv, VanillaOption, check_tau, validate_market, validate_option
from .quadrature import DEFAULT_QUAD, QuadratureConfig
from .variance import FellerReport, feller_check, forward_correlation, forward_vol_of_vol

DEFAULT_PILLARS = (-0.10, -0.25, 0.50, 0.25, 0.10)
VOL_BRACKET = (1e-4, 5.0)
RERUN_KAPPA = 3.0
_FAIL_SSE = 1e3


@dataclass(frozen=True)
class SmileQuote:
    delta_pillar: float
    implied_vol: float

    def __post_init__(self):
        bad = []
        if not 0.0 < abs(self.delta_pillar) < 1.0:
            bad.append(("DeltaPillarOutOfRange", f"delta={self.delta_pillar} needs 0 < |delta| < 1"))
        if not self.implied_vol > 0:
            bad.append(("NonPositiveVol", f"implied_vol={self.implied_vol} must be > 0"))
        if bad:
            raise InvalidParameters(bad)


@dataclass(frozen=True)
class SmileSlice:
    tau: float
    quotes: tuple

    def __post_init__(self):
        object.__setattr__(self, "quotes", tuple(self.quotes))
        bad = []
        if not (math.isfinite(self.tau) and self.tau > 0):
            bad.append(("NonPositiveTau", f"tau={self.tau} must be > 0"))
        if not self.quotes:
            bad.append(("EmptySlice", "a slice needs at least one quote"))
        deltas = [q.delta_pillar for q in self.quotes]
        if len(set(deltas)) != len(deltas):
            bad.append(("DuplicatePillar", "delta pillars must be distinct"))
        if bad:
            raise InvalidParameters(bad)

    @classmethod
    def from_pairs(cls, tau, deltas, vols):
        return cls(float(tau), tuple(SmileQuote(float(d), float(v)) for d, v in zip(deltas, vols)))

    @property
    def deltas(self) -> np.ndarray:
        return np.array([q.delta_pillar for q in self.quotes])

    @property
    def vols(self) -> np.ndarray:
        return np.array([q.implied_vol for q in self.quotes])

    @property
    def atm_vol(self) -> float:
        """Vol of the +0.5 delta pillar, else of the pillar whose |delta| is nearest 0.5."""
        d = self.deltas
        i = int(np.argmin(np.abs(np.abs(d) - 0.5) + 1e-9 * (d < 0)))
        return float(self.vols[i])


@dataclass
class CalibrationResult:
    sigma: float
    theta: float
    rho: float
    v0: float
    kappa: float
    tau: float
    sse: float
    per_pillar_errors: np.ndarray
    strikes: np.ndarray
    market_vols: np.ndarray
    model_vols: np.ndarray
    deltas: np.ndarray
    feller: FellerReport
    iterations: int
    n_evals: int
    converged: bool
    message: str = ""
    recommended_kappa: float | None = None
    trace: list = field(default_factory=list, repr=False)

    @property
    def params(self) -> HestonParams:
        return HestonParams(self.kappa, self.theta, self.sigma, self.rho, self.v0)

    def as_dict(self):
        return {
            "tau": self.tau,
            "sigma": self.sigma,
            "theta": self.theta,
            "rho": self.rho,
            "v0": self.v0,
            "kappa": self.kappa,
            "sse": self.sse,
            "per_pillar_errors": self.per_pillar_errors.tolist(),
            "deltas": self.deltas.tolist(),
            "strikes": self.strikes.tolist(),
            "market_vols": self.market_vols.tolist(),
            "model_vols": self.model_vols.tolist(),
            "feller": self.feller.as_dict(),
            "iterations": self.iterations,
            "n_evals": self.n_evals,
            "converged": self.converged,
            "message": self.message,
            "recommended_kappa": self.recommended_kappa,
            "delta_convention": "spot, premium excluded",
        }


def strike_from_delta(env: MarketEnv, tau, delta, vol):
    """Strike whose Garman-Kohlhagen spot delta at ``vol`` equals ``delta``.

    The sign of ``delta`` selects call (+) or put (-). Works elementwise on arrays.
    """
    validate_market(env)
    tau = check_tau(tau)
    delta = np.asarray(delta, dtype=float)
    vol = np.asarray(vol, dtype=float)
    if np.any(~(vol > 0)):
        raise InvalidParameters([("NonPositiveVol", "vol must be > 0")])
    scaled = np.abs(delta) * np.exp(env.rf * tau)
    if np.any(delta == 0) or np.any(scaled >= 1.0):
        raise DeltaOutOfRange(
            f"|delta| must lie in (0, e^(-rf tau)) = (0, {np.exp(-env.rf * tau):.12g}); got {delta}"
        )
    phi = np.sign(delta)
    k = env.spot * np.exp(-phi * ndtri(scaled) * vol * np.sqrt(tau) + (env.rd - env.rf + 0.5 * vol * vol) * tau)
    return k if k.ndim else float(k)


def implied_vol(env: MarketEnv, opt: VanillaOption, price) -> float:
    """Garman-Kohlhagen vol reproducing ``price``; Brent root search on [1e-4, 5]."""
    validate_market(env)
    validate_option(opt)
    S, K, t, phi = env.spot, opt.strike, opt.tau, opt.phi
    lower, upper = gk.price_bounds(S, K, t, env.rd, env.rf, phi)
    if not (lower < price < upper):
        raise PriceOutOfBand(f"price {price!r} outside the open no-arbitrage band ({lower:.12g}, {upper:.12g})")

    def f(s):
        return gk.price(S, K, t, env.rd, env.rf, s, phi) - price

    lo, hi = VOL_BRACKET
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if flo > 0 or fhi < 0:
        raise BracketExhausted(f"price {price!r} implies a vol outside [{lo}, {hi}]")
    try:
        return float(brentq(f, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200))
    except RuntimeError as exc:
        raise BracketExhausted(str(exc)) from exc


def model_smile(p: HestonParams, env: MarketEnv, tau, deltas, strike_vols,
                quad: QuadratureConfig = DEFAULT_QUAD, strikes=None):
    """(strikes, model implied vols) at the pillars.

    Strikes come from the quoted vols unless given; each pillar is priced with
    its own option type (puts for negative deltas), which keeps the wings
    away from parity cancellation.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    if strikes is None:
        strikes = strike_from_delta(env, tau, deltas, np.atleast_1d(np.asarray(strike_vols, dtype=float)))
    strikes = np.atleast_1d(np.asarray(strikes, dtype=float))
    phis = np.where(deltas < 0, -1, 1)
    prices = vanilla_prices(p, env, strikes, tau, phis, quad)
    vols = np.array([
        implied_vol(env, VanillaOption(float(k), float(tau), int(f)), float(pr))
        for k, f, pr in zip(strikes, phis, prices)
    ])
    return strikes, vols


def _to_x(sigma, theta, rho):
    return np.array([np.log(sigma), np.log(theta), np.arctanh(np.clip(rho, -0.999999, 0.999999))])


def _from_x(x):
    return float(np.exp(x[0])), float(np.exp(x[1])), float(np.tanh(x[2]))


def calibrate_slice(smile: SmileSlice, env: MarketEnv, fixed_v0=None, fixed_kappa=1.5,
                    initial_guess=None, weights=None, max_evals=2000, xatol=1e-8, fatol=1e-12,
                    quad: QuadratureConfig = DEFAULT_QUAD, raise_on_failure=False) -> CalibrationResult:
    """Fit (sigma, theta, rho) to one slice.

    ``initial_guess`` is a (sigma, theta, rho) triple, by default
    (0.3, ATM vol^2, 0). ``fixed_v0`` defaults to the squared ATM vol.
    Optional ``weights`` scale the squared pillar errors. When the search
    stops on its evaluation budget the result comes back with
    ``converged=False`` unless ``raise_on_failure`` asks for NoConvergence.
    """
    validate_market(env)
    if len(smile.quotes) < 3:
        raise DegenerateSlice(f"{len(smile.quotes)} pillars cannot identify sigma, theta and rho")
    atm = smile.atm_vol
    v0 = atm * atm if fixed_v0 is None else float(fixed_v0)
    kappa = float(fixed_kappa)
    if not (v0 >= 0 and kappa > 0):
        raise InvalidParameters([("BadFixedParameter", f"v0={v0}, kappa={kappa}")])
    guess = (0.3, atm * atm, 0.0) if initial_guess is None else tuple(map(float, initial_guess))
    w = np.ones(len(smile.quotes)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (len(smile.quotes),) or np.any(w < 0):
        raise InvalidParameters([("BadWeights", "one non-negative weight per pillar is required")])

    tau, deltas, market = smile.tau, smile.deltas, smile.vols
    strikes = strike_from_delta(env, tau, deltas, market)
    cache = {}

    def errors_at(x):
        s, q, r = _from_x(x)
        p = HestonParams(kappa, q, s, r, v0)
        _, model = model_smile(p, env, tau, deltas, None, quad, strikes=strikes)
        return market - model, model

    def objective(x):
        key = tuple(x)
        if key not in cache:
            try:
                err, _ = errors_at(x)
                val = float(np.sum(w * err * err))
            except (HestonError, FloatingPointError, ValueError):
                val = _FAIL_SSE
            cache[key] = val if math.isfinite(val) else _FAIL_SSE
        return cache[key]

    trace = []

    def record(xk):
        trace.append(objective(xk))

    x0 = _to_x(*guess)
    trace.append(objective(x0))
    res = minimize(objective, x0, method="Nelder-Mead", callback=record,
                   options={"xatol": xatol, "fatol": fatol, "maxfev": max_evals, "maxiter": 10 * max_evals})

    best = res.x if res.fun <= trace[0] else x0
    sigma, theta, rho = _from_x(best)
    err, model = errors_at(best)
    sse = float(np.sum(w * err * err))
    p = HestonParams(kappa, theta, sigma, rho, v0)
    fr = feller_check(p)
    result = CalibrationResult(
        sigma=sigma, theta=theta, rho=rho, v0=v0, kappa=kappa, tau=tau,
        sse=sse, per_pillar_errors=err, strikes=np.asarray(strikes), market_vols=market,
        model_vols=model, deltas=deltas, feller=fr, iterations=int(res.nit),
        n_evals=int(res.nfev), converged=bool(res.success), message=str(res.message),
        recommended_kappa=None if fr.satisfied else RERUN_KAPPA, trace=trace,
    )
    if raise_on_failure and not result.converged:
        raise NoConvergence(result.message)
    return result


@dataclass
class SurfaceResult:
    results: list
    errors: dict
    term_structure: list
    forwards: list

    def as_dict(self):
        return {
            "slices": [r.as_dict() for r in self.results],
            "errors": self.errors,
            "term_structure": self.term_structure,
            "forwards": self.forwards,
        }


def calibrate_surface(slices, env: MarketEnv, fixed_v0=None, fixed_kappa=1.5, **options) -> SurfaceResult:
    """Independent per-slice fits plus forward vol-of-vol and correlation between tenors.

    A failing slice is reported in ``errors`` (keyed by tenor) and skipped.
    Forwards between consecutive fitted tenors use the later slice's kappa,
    theta and v0 in the H-weighting.
    """
    slices = list(slices)
    taus = [s.tau for s in slices]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise InvalidParameters([("NonIncreasingTenors", "slices must have distinct increasing tenors")])
    results, errors = [], {}
    for s in slices:
        try:
            results.append(calibrate_slice(s, env, fixed_v0, fixed_kappa, **options))
        except HestonError as exc:
            errors[str(s.tau)] = exc.to_dict()
    term = [{"tau": r.tau, "sigma": r.sigma, "theta": r.theta, "rho": r.rho} for r in results]
    forwards = []
    for a, b in zip(results, results[1:]):
        entry = {"t1": a.tau, "t2": b.tau}
        try:
            entry["forward_sigma"] = forward_vol_of_vol(a.sigma, b.sigma, a.tau, b.tau, b.kappa, b.theta, b.v0)
        except HestonError as exc:
            entry["forward_sigma"] = None
            entry["error"] = exc.to_dict()
        entry["forward_rho"] = forward_correlation(a.rho, b.rho, a.tau, b.tau)
        forwards.append(entry)
    return SurfaceResult(results, errors, term, forwards)


def synthetic_slice(p: HestonParams, env: MarketEnv, tau, deltas=DEFAULT_PILLARS,
                    quad: QuadratureConfig = DEFAULT_QUAD) -> SmileSlice:
    """Smile generated by the model itself, self-consistent in strike and vol.

    Each pillar strike solves K = strike_from_delta(delta, model_vol(K)) by a
    fixed-point iteration, so calibrating back sees exactly zero error at the
    true parameters.
    """
    deltas = np.atleast_1d(np.asarray(deltas, dtype=float))
    vols = np.full(deltas.shape, math.sqrt(p.v0) if p.v0 > 0 else math.sqrt(p.theta))
    for _ in range(200):
        _, new = model_smile(p, env, tau, deltas, vols, quad)
        if np.max(np.abs(new - vols)) < 1e-14:
            vols = new
            break
        vols = new
    return SmileSlice.from_pairs(tau, deltas, vols)


SMILE_HEADER = ("tenor_years", "delta", "quote_vol")


def read_smile_csv(path) -> list:
    """Slices from a ``tenor_years,delta,quote_vol`` file, sorted by tenor."""
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != SMILE_HEADER:
            raise InvalidParameters([("BadSmileHeader", f"expected header {','.join(SMILE_HEADER)}")])
        for row in reader:
            rows.setdefault(float(row["tenor_years"]), []).append(
                SmileQuote(float(row["delta"]), float(row["quote_vol"]))
            )
    return [SmileSlice(t, tuple(q)) for t, q in sorted(rows.items())]


def write_smile_csv(path, slices) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(SMILE_HEADER)
        for s in slices:
            for q in s.quotes:
                out.writerow([repr(s.tau), repr(q.delta_pillar), repr(q.implied_vol)])
