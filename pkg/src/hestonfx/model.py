"""Domain types for the Heston FX setting and their validation.

All types are frozen dataclasses. Construction does not validate, so that a
caller can build a candidate set and get the complete list of problems from
:func:`validate_params` (or :func:`validate_market` / :func:`validate_option`)
in one go. Every pricer validates its inputs on entry.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .errors import InvalidParameters

CALL = 1
PUT = -1


@dataclass(frozen=True)
class HestonParams:
    """Heston variance-process parameters.

    kappa : mean-reversion rate (1/years)
    theta : long-run variance (annualised vol squared)
    sigma : volatility of variance
    rho   : spot/variance correlation, open interval (-1, 1)
    v0    : initial variance
    lam   : market price of volatility risk (``lambda`` in documents)
    """

    kappa: float
    theta: float
    sigma: float
    rho: float
    v0: float
    lam: float = 0.0

    @property
    def feller_dim(self) -> float:
        return 4.0 * self.kappa * self.theta / self.sigma**2

    def with_(self, **changes) -> "HestonParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class MarketEnv:
    """Spot (domestic per foreign unit) and continuously compounded rates."""

    spot: float
    rd: float
    rf: float

    @property
    def mu(self) -> float:
        return self.rd - self.rf

    def with_(self, **changes) -> "MarketEnv":
        return replace(self, **changes)


@dataclass(frozen=True)
class VanillaOption:
    strike: float
    tau: float
    phi: int = CALL

    @property
    def is_call(self) -> bool:
        return self.phi == CALL


def _finite(x) -> bool:
    try:
        return math.isfinite(float(x))
    except (TypeError, ValueError):
        return False


def _param_violations(p: HestonParams):
    out = []
    for field in ("kappa", "theta", "sigma", "rho", "v0", "lam"):
        if not _finite(getattr(p, field)):
            out.append(("NonFinite" + field.capitalize(), f"{field} must be finite"))
    if out:
        return out
    if p.kappa <= 0:
        out.append(("NonPositiveKappa", f"kappa={p.kappa} must be > 0"))
    if p.theta <= 0:
        out.append(("NonPositiveTheta", f"theta={p.theta} must be > 0"))
    if p.sigma <= 0:
        out.append(("NonPositiveSigma", f"sigma={p.sigma} must be > 0"))
    if p.v0 < 0:
        out.append(("NegativeV0", f"v0={p.v0} must be >= 0"))
    if not -1.0 < p.rho < 1.0:
        out.append(("CorrelationOutOfRange", f"rho={p.rho} must lie in (-1, 1)"))
    return out


def _market_violations(env: MarketEnv):
    out = []
    if not _finite(env.spot) or env.spot <= 0:
        out.append(("NonPositiveSpot", f"spot={env.spot} must be finite and > 0"))
    if not _finite(env.rd):
        out.append(("NonFiniteRd", "rd must be finite"))
    if not _finite(env.rf):
        out.append(("NonFiniteRf", "rf must be finite"))
    return out


def _option_violations(opt: VanillaOption):
    out = []
    if not _finite(opt.strike) or opt.strike <= 0:
        out.append(("NonPositiveStrike", f"strike={opt.strike} must be > 0"))
    if not _finite(opt.tau) or opt.tau <= 0:
        out.append(("NonPositiveTau", f"tau={opt.tau} must be > 0"))
    if opt.phi not in (CALL, PUT):
        out.append(("InvalidOptionSign", f"phi={opt.phi} must be +1 or -1"))
    return out


def validate_params(p: HestonParams) -> HestonParams:
    """Return ``p`` unchanged or raise :class:`InvalidParameters` listing every violation."""
    violations = _param_violations(p)
    if violations:
        raise InvalidParameters(violations)
    return p


def validate_market(env: MarketEnv) -> MarketEnv:
    violations = _market_violations(env)
    if violations:
        raise InvalidParameters(violations)
    return env


def validate_option(opt: VanillaOption) -> VanillaOption:
    violations = _option_violations(opt)
    if violations:
        raise InvalidParameters(violations)
    return opt


def validate_all(p: HestonParams, env: MarketEnv, opt: VanillaOption | None = None):
    violations = _param_violations(p) + _market_violations(env)
    if opt is not None:
        violations += _option_violations(opt)
    if violations:
        raise InvalidParameters(violations)


def check_tau(tau) -> float:
    if not _finite(tau) or tau <= 0:
        raise InvalidParameters([("NonPositiveTau", f"tau={tau} must be > 0")])
    return float(tau)


# Flat key-value document: kappa, theta, sigma, rho, v0, lambda, spot, rd, rf.

PARAM_KEYS = ("kappa", "theta", "sigma", "rho", "v0", "lambda")
MARKET_KEYS = ("spot", "rd", "rf")


def to_document(p: HestonParams | None = None, env: MarketEnv | None = None) -> dict:
    doc = {}
    if p is not None:
        d = asdict(p)
        d["lambda"] = d.pop("lam")
        doc.update({k: float(d[k]) for k in PARAM_KEYS})
    if env is not None:
        doc.update({k: float(getattr(env, k)) for k in MARKET_KEYS})
    return doc


def from_document(doc: dict) -> tuple[HestonParams | None, MarketEnv | None]:
    """Split a flat document into (params, market); either is None if its keys are absent."""
    unknown = set(doc) - set(PARAM_KEYS) - set(MARKET_KEYS)
    if unknown:
        raise InvalidParameters([("UnknownKey", f"unrecognised keys {sorted(unknown)}")])
    params = env = None
    if any(k in doc for k in PARAM_KEYS):
        missing = [k for k in PARAM_KEYS[:5] if k not in doc]
        if missing:
            raise InvalidParameters([("MissingKey", f"missing {missing}")])
        params = HestonParams(
            kappa=float(doc["kappa"]),
            theta=float(doc["theta"]),
            sigma=float(doc["sigma"]),
            rho=float(doc["rho"]),
            v0=float(doc["v0"]),
            lam=float(doc.get("lambda", 0.0)),
        )
    if any(k in doc for k in MARKET_KEYS):
        missing = [k for k in MARKET_KEYS if k not in doc]
        if missing:
            raise InvalidParameters([("MissingKey", f"missing {missing}")])
        env = MarketEnv(spot=float(doc["spot"]), rd=float(doc["rd"]), rf=float(doc["rf"]))
    return params, env


def load_document(path) -> dict:
    with open(Path(path)) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise InvalidParameters([("MalformedDocument", "parameter file must hold a JSON object")])
    return doc


def dump_document(path, p: HestonParams | None = None, env: MarketEnv | None = None) -> None:
    with open(Path(path), "w") as fh:
        json.dump(to_document(p, env), fh, indent=2, sort_keys=True)
        fh.write("\n")
