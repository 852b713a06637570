"""Diagnostics of the CIR variance process.

Feller/boundary classification, moments under piecewise-constant
(time-dependent) parameters, forward vol-of-vol and forward correlation, and
the CIR <-> squared-Bessel parameter map.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameters, NegativeForwardVariance
from .model import HestonParams, validate_params


class BoundaryRegime(str, enum.Enum):
    HITS_ZERO_RECURRENT = "HitsZeroRecurrent"  # 0 < alpha < 2
    STRICTLY_POSITIVE_BOUNDARY = "StrictlyPositiveBoundary"  # alpha == 2
    STRICTLY_POSITIVE = "StrictlyPositive"  # alpha > 2


@dataclass(frozen=True)
class FellerReport:
    alpha_dim: float
    satisfied: bool
    outflowing: bool
    regime: BoundaryRegime

    def as_dict(self):
        return {
            "alpha_dim": self.alpha_dim,
            "satisfied": self.satisfied,
            "outflowing": self.outflowing,
            "regime": self.regime.value,
        }


def feller_check(p: HestonParams) -> FellerReport:
    """Dimensionality 4 kappa theta / sigma^2 and the boundary behaviour at v = 0.

    ``satisfied`` uses the non-strict Feller inequality (alpha >= 2) while
    ``outflowing`` uses the strict convection criterion sigma^2/2 - kappa theta < 0,
    so at alpha == 2 exactly the two flags disagree.
    """
    validate_params(p)
    alpha = 4.0 * p.kappa * p.theta / p.sigma**2
    if alpha < 2.0:
        regime = BoundaryRegime.HITS_ZERO_RECURRENT
    elif alpha == 2.0:
        regime = BoundaryRegime.STRICTLY_POSITIVE_BOUNDARY
    else:
        regime = BoundaryRegime.STRICTLY_POSITIVE
    return FellerReport(
        alpha_dim=alpha,
        satisfied=alpha >= 2.0,
        outflowing=0.5 * p.sigma**2 - p.kappa * p.theta < 0.0,
        regime=regime,
    )


def bessel_transform_check(kappa, sigma, theta):
    """(beta, alpha) with beta = sigma^2 / (4 kappa), alpha = theta / beta.

    Under Y_t = e^{-kappa t} X_{beta (e^{kappa t} - 1)} a squared Bessel
    process X of dimension alpha becomes the CIR process with these
    kappa, theta, sigma.
    """
    if not (kappa > 0 and sigma > 0 and theta > 0):
        raise InvalidParameters([("NonPositiveInput", "kappa, sigma and theta must be > 0")])
    beta = sigma**2 / (4.0 * kappa)
    alpha = 4.0 * kappa * theta / sigma**2
    return beta, alpha


@dataclass(frozen=True)
class TermParams:
    """Piecewise-constant kappa(t), theta(t), sigma(t) on a shared tenor grid.

    Value i applies on (tenors[i-1], tenors[i]] with tenors[-1] := 0; the last
    value is extended flat beyond the final tenor.
    """

    tenors: tuple
    kappa: tuple
    theta: tuple
    sigma: tuple

    def __post_init__(self):
        t = np.asarray(self.tenors, dtype=float)
        bad = []
        if t.ndim != 1 or t.size == 0:
            bad.append(("EmptyTenorGrid", "at least one tenor is required"))
        elif np.any(t <= 0) or np.any(np.diff(t) <= 0):
            bad.append(("NonIncreasingTenors", "tenor ends must be positive and strictly increasing"))
        for name in ("kappa", "theta", "sigma"):
            vals = np.asarray(getattr(self, name), dtype=float)
            if vals.shape != t.shape:
                bad.append(("ShapeMismatch", f"{name} needs one value per tenor"))
            elif np.any(~(vals > 0)):
                bad.append(("NonPositiveValue", f"{name} values must be > 0"))
        if bad:
            raise InvalidParameters(bad)

    @classmethod
    def constant(cls, kappa, theta, sigma, horizon=1.0):
        return cls((float(horizon),), (float(kappa),), (float(theta),), (float(sigma),))

    @classmethod
    def from_lists(cls, tenors, kappa, theta, sigma):
        return cls(tuple(map(float, tenors)), tuple(map(float, kappa)),
                   tuple(map(float, theta)), tuple(map(float, sigma)))

    def segments(self, t):
        """Yield (start, end, kappa, theta, sigma) covering [0, t]."""
        start = 0.0
        n = len(self.tenors)
        for i in range(n):
            end = self.tenors[i] if i < n - 1 else max(self.tenors[i], t)
            stop = min(end, t)
            if stop > start:
                yield start, stop, self.kappa[i], self.theta[i], self.sigma[i]
            start = end
            if start >= t:
                break

    def value_at(self, s):
        """(kappa, theta, sigma) in force at time s."""
        i = int(np.searchsorted(self.tenors, s, side="left"))
        i = min(i, len(self.tenors) - 1)
        return self.kappa[i], self.theta[i], self.sigma[i]


def _check_time(t):
    if not t >= 0:
        raise InvalidParameters([("NegativeTime", f"t={t} must be >= 0")])


def cir_moments(tp: TermParams, v0, t):
    """(E v_t, E v_t^2, Var v_t), exact segment by segment."""
    _check_time(t)
    mean = float(v0)
    var = 0.0
    for a, b, k, th, s in tp.segments(t):
        dt = b - a
        e1 = np.exp(-k * dt)
        e2 = e1 * e1
        # integral over the segment of sigma^2 g(s) e^{-2k (b - s)}
        seg = s * s * (th * (-np.expm1(-2.0 * k * dt)) / (2.0 * k) + (mean - th) * (e1 - e2) / k)
        var = var * e2 + seg
        mean = th + (mean - th) * e1
    return float(mean), float(var + mean * mean), float(var)


def cir_mean(tp: TermParams, v0, t) -> float:
    return cir_moments(tp, v0, t)[0]


def cir_variance(tp: TermParams, v0, t) -> float:
    return cir_moments(tp, v0, t)[2]


def h_function(t, kappa, theta, v0):
    """H(t) = int_0^t g(s) e^{2 kappa s} ds for constant parameters."""
    return (
        theta / (2.0 * kappa) * np.exp(2.0 * kappa * t)
        + (v0 - theta) / kappa * np.exp(kappa * t)
        + (theta / 2.0 - v0) / kappa
    )


def forward_vol_of_vol(sigma_t1, sigma_t2, t1, t2, kappa, theta, v0) -> float:
    """Vol of variance on (T1, T2] consistent with term vols sigma_T1, sigma_T2."""
    if not 0 < t1 < t2:
        raise InvalidParameters([("BadTenorOrder", f"need 0 < T1 < T2, got {t1}, {t2}")])
    if sigma_t1 == sigma_t2:
        return float(sigma_t2)
    h1 = h_function(t1, kappa, theta, v0)
    h2 = h_function(t2, kappa, theta, v0)
    num = sigma_t2**2 * h2 - sigma_t1**2 * h1
    if num < 0:
        raise NegativeForwardVariance(
            f"sigma_T2^2 H(T2) = {sigma_t2**2 * h2:.6g} < sigma_T1^2 H(T1) = {sigma_t1**2 * h1:.6g}"
        )
    return float(np.sqrt(num / (h2 - h1)))


def forward_correlation(rho_t1, rho_t2, t1, t2) -> float:
    """Correlation on (T1, T2]; it is simply the later term value."""
    if not 0 < t1 < t2:
        raise InvalidParameters([("BadTenorOrder", f"need 0 < T1 < T2, got {t1}, {t2}")])
    for r in (rho_t1, rho_t2):
        if not -1.0 < r < 1.0:
            raise InvalidParameters([("CorrelationOutOfRange", f"rho={r} must lie in (-1, 1)")])
    return float(rho_t2)
