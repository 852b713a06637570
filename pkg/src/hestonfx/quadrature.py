"""Numerical integration of the Fourier-inversion integrals.

The default rule is an adaptive Gauss-Lobatto scheme (the Gander-Gautschi
4-point Lobatto / 7-point Kronrod pair) on a finite interval. Half-line
integrals are mapped onto [0, 1] with ``phi = c (1 - u) / u``.

The adaptive routine refines breadth-first: all intervals that are still
open at one level are evaluated with a single vectorised call, so the
integrand must accept a 1-d array of abscissae and return an array whose
last axis matches it. Leading axes are integrated componentwise, which lets
one pass produce P_1, P_2 and their derivatives for a whole strike ladder.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameters, QuadratureNotConverged

_ALPHA = np.sqrt(2.0 / 3.0)
_BETA = 1.0 / np.sqrt(5.0)
_X1, _X2, _X3 = 0.942882415695480, 0.641853342345781, 0.236383199662150

_X13 = np.array(
    [-1.0, -_X1, -_ALPHA, -_X2, -_BETA, -_X3, 0.0, _X3, _BETA, _X2, _ALPHA, _X1, 1.0]
)
_W13 = np.array(
    [
        0.0158271919734802, 0.0942738402188500, 0.155071987336585, 0.188821573960182,
        0.199773405226859, 0.224926465333340, 0.242611071901408, 0.224926465333340,
        0.199773405226859, 0.188821573960182, 0.155071987336585, 0.0942738402188500,
        0.0158271919734802,
    ]
)
# interior Lobatto/Kronrod nodes of one refinement step
_STEP = np.array([-_ALPHA, -_BETA, 0.0, _BETA, _ALPHA])

RULES = ("lobatto", "laguerre", "legendre")


@dataclass(frozen=True)
class QuadratureConfig:
    """Settings for the phi-integrals.

    ``truncation`` and ``n_nodes`` only matter for the fixed rules
    ("legendre" integrates on [0, truncation]; "laguerre" ignores it).
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_evals: int = 200_000
    truncation: float = 100.0
    rule: str = "lobatto"
    n_nodes: int = 100

    def __post_init__(self):
        bad = []
        if not self.rel_tol > 0:
            bad.append(("NonPositiveTolerance", f"rel_tol={self.rel_tol}"))
        if not self.abs_tol > 0:
            bad.append(("NonPositiveTolerance", f"abs_tol={self.abs_tol}"))
        if self.max_evals < 100:
            bad.append(("TooFewEvaluations", f"max_evals={self.max_evals} < 100"))
        if self.rule not in RULES:
            bad.append(("UnknownRule", f"rule={self.rule!r} not in {RULES}"))
        if not self.truncation > 0:
            bad.append(("NonPositiveTruncation", f"truncation={self.truncation}"))
        if bad:
            raise InvalidParameters(bad)


DEFAULT_QUAD = QuadratureConfig()


def adaptive_lobatto(f, a, b, rel_tol=1e-10, abs_tol=1e-12, max_evals=200_000):
    """Integrate ``f`` over [a, b]; returns ``(value, n_evals)``.

    ``value`` has the shape of ``f``'s output without its last axis.
    Raises QuadratureNotConverged once ``max_evals`` abscissae would be exceeded.
    """
    a = float(a)
    b = float(b)
    h = 0.5 * (b - a)
    m = 0.5 * (a + b)
    y = np.asarray(f(m + h * _X13), dtype=float)
    lead = y.shape[:-1]
    y = y.reshape(-1, 13)
    n_evals = 13

    whole = h * (y @ _W13)
    tol = np.maximum(rel_tol * np.abs(whole), abs_tol)[:, None]

    cuts = m + h * np.array([-1.0, -_ALPHA, -_BETA, 0.0, _BETA, _ALPHA, 1.0])
    lo, hi = cuts[:-1], cuts[1:]
    idx = np.array([0, 2, 4, 6, 8, 10, 12])
    fa, fb = y[:, idx[:-1]], y[:, idx[1:]]
    total = np.zeros(y.shape[0])

    while lo.size:
        hh = 0.5 * (hi - lo)
        mm = 0.5 * (hi + lo)
        pts = mm[:, None] + hh[:, None] * _STEP
        if n_evals + pts.size > max_evals:
            raise QuadratureNotConverged(
                f"adaptive Gauss-Lobatto exhausted {max_evals} evaluations "
                f"with {lo.size} intervals unresolved"
            )
        yv = np.asarray(f(pts.ravel()), dtype=float).reshape(-1, lo.size, 5)
        n_evals += pts.size
        fll, fl, fm, fr, frr = (yv[..., k] for k in range(5))

        i2 = (hh / 6.0) * (fa + fb + 5.0 * (fl + fr))
        i1 = (hh / 1470.0) * (77.0 * (fa + fb) + 432.0 * (fll + frr) + 625.0 * (fl + fr) + 672.0 * fm)
        done = np.all(np.abs(i1 - i2) <= tol, axis=0)
        # interval too small to split in floating point
        done |= (pts[:, 0] <= lo) | (hi <= pts[:, 4])
        if not np.all(np.isfinite(i1[:, done])):
            raise QuadratureNotConverged("integrand produced non-finite values")
        total += i1[:, done].sum(axis=1)

        keep = ~done
        if not keep.any():
            break
        p = pts[keep]
        edges = np.column_stack([lo[keep], p, hi[keep]])  # (n, 7)
        vals = np.concatenate(
            [fa[:, keep, None], yv[:, keep, :], fb[:, keep, None]], axis=2
        )  # (K, n, 7)
        lo = edges[:, :-1].ravel()
        hi = edges[:, 1:].ravel()
        fa = vals[:, :, :-1].reshape(vals.shape[0], -1)
        fb = vals[:, :, 1:].reshape(vals.shape[0], -1)

    return total.reshape(lead), n_evals


@lru_cache(maxsize=8)
def _laguerre(n):
    x, w = np.polynomial.laguerre.laggauss(n)
    return x, w * np.exp(x)


@lru_cache(maxsize=8)
def _legendre(n):
    return np.polynomial.legendre.leggauss(n)


def integrate_half_line(g, quad: QuadratureConfig = DEFAULT_QUAD, scale=1.0):
    """Integrate ``g`` over [0, inf).

    For the adaptive rule the map ``phi = scale (1 - u) / u`` is used; ``g``
    must return a finite value at ``phi = 0`` (removable singularities are the
    integrand's responsibility) and decay fast enough that its contribution
    at ``u = 0`` vanishes.
    """
    if quad.rule == "lobatto":

        def on_unit(u):
            u = np.asarray(u, dtype=float)
            inner = u > 0
            us = np.where(inner, u, 1.0)
            phi = scale * (1.0 - us) / us
            with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
                val = np.asarray(g(phi)) * (scale / us**2)
            val = np.where(inner, val, 0.0)
            # far tail: integrand underflows, terms like inf/inf become nan
            return np.where(np.isfinite(val) | (phi < 1e3 * scale), val, 0.0)

        value, _ = adaptive_lobatto(on_unit, 0.0, 1.0, quad.rel_tol, quad.abs_tol, quad.max_evals)
        return value
    if quad.rule == "laguerre":
        x, w = _laguerre(quad.n_nodes)
    else:
        t, w = _legendre(quad.n_nodes)
        x = 0.5 * quad.truncation * (t + 1.0)
        w = 0.5 * quad.truncation * w
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.asarray(g(x))
    vals = np.where(np.isfinite(vals), vals, 0.0)
    return vals @ w
