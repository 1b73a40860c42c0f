"""Jacobi theta functions ϑ₁, ϑ₂ at purely imaginary modulus τ = iκ.

Evaluation uses the sine series

    ϑ₁(v; iκ) = 2 Σ_{n≥1} (−1)^{n−1} e^{−πκ(n−1/2)²} sin((2n−1)πv)

with the common factor 2e^{−πκ/4} pulled out, so the remaining sum starts at
sin(πv) and its terms decay like e^{−πκ n(n−1)}.  All functions accept
scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, ParameterError
from .signedlog import SignedLogValue

KAPPA_MIN = 1e-2
MAX_TERMS = 64
DEFAULT_TOL = 1e-16
# log-domain zero detection: distance of v from the nearest integer
ZERO_ATOL = 1e-12

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class ThetaModulus:
    """Modulus τ = iκ; the nome is p = e^{−2πκ}."""

    kappa: float

    def __post_init__(self):
        _check_kappa(self.kappa)

    @property
    def nome(self) -> float:
        return math.exp(-2.0 * math.pi * self.kappa)


def _check_kappa(kappa) -> None:
    if not (isinstance(kappa, (int, float, np.floating, np.integer)) and math.isfinite(kappa)):
        raise ParameterError(f"kappa must be a finite real, got {kappa!r}")
    if kappa <= 0:
        raise ParameterError(f"kappa must be positive, got {kappa}")
    if kappa < KAPPA_MIN:
        raise ParameterError(
            f"kappa={kappa} is below the supported minimum {KAPPA_MIN}; "
            "the series would need a modular transformation"
        )


def _check_tol(tol) -> None:
    if not (tol > 0 and math.isfinite(tol)):
        raise ParameterError(f"tol must be a positive finite real, got {tol!r}")


def n_terms(kappa: float, tol: float = DEFAULT_TOL) -> int:
    """Number of series terms so the scaled tail is below ``tol`` relative to sin(πv).

    Uses |sin((2n−1)θ)| ≤ (2n−1)|sin θ|, so the neglected terms are bounded
    relative to the first one by Σ_{n>N} (2n−1) e^{−πκ n(n−1)}; the sum is
    dominated by its first term and we require twice that term ≤ tol.
    """
    _check_kappa(kappa)
    _check_tol(tol)
    for n in range(1, MAX_TERMS + 1):
        m = n + 1
        log_next = math.log(2 * m - 1) - math.pi * kappa * m * (m - 1)
        if log_next + _LOG2 <= math.log(tol):
            return n
    raise AccuracyError(f"theta series did not reach tol={tol} within {MAX_TERMS} terms (kappa={kappa})")


def _reduce(v):
    """Map v to (sign, w) with ϑ₁(v) = sign·ϑ₁(w) and w ∈ [0, 1/2].

    Oddness is applied through |v|; then the period-2 reduction, the
    reflection w ↦ 2−w (odd about 1) and w ↦ 1−w (even about 1/2).
    """
    v = np.asarray(v, dtype=float)
    sign = np.where(v < 0, -1.0, 1.0)
    w = np.fmod(np.abs(v), 2.0)
    upper = w > 1.0
    w = np.where(upper, 2.0 - w, w)
    sign = np.where(upper, -sign, sign)
    w = np.where(w > 0.5, 1.0 - w, w)
    return sign, w


def _scaled_sum(w, kappa: float, tol: float):
    """Σ (−1)^{n−1} e^{−πκ n(n−1)} sin((2n−1)πw) for w ∈ [0, 1/2]."""
    nt = n_terms(kappa, tol)
    n = np.arange(1, nt + 1, dtype=float)
    coef = np.where(n % 2 == 1, 1.0, -1.0) * np.exp(-math.pi * kappa * n * (n - 1))
    w = np.asarray(w, dtype=float)
    phase = np.multiply.outer(w, (2 * n - 1) * math.pi)
    return np.sin(phase) @ coef


def theta1(v, kappa: float, tol: float = DEFAULT_TOL):
    """ϑ₁(v; iκ) for real v (scalar or array)."""
    _check_kappa(kappa)
    _check_tol(tol)
    sign, w = _reduce(v)
    out = sign * 2.0 * math.exp(-math.pi * kappa / 4.0) * _scaled_sum(w, kappa, tol)
    return float(out) if np.ndim(out) == 0 else out


def theta2(v, kappa: float, tol: float = DEFAULT_TOL):
    """ϑ₂(v; iκ) = ϑ₁(v + 1/2; iκ)."""
    return theta1(np.asarray(v, dtype=float) + 0.5, kappa, tol)


def log_theta1_parts(v, kappa: float, tol: float = DEFAULT_TOL):
    """Arrays (sign, log|ϑ₁(v; iκ)|); v within 1e-12 of an integer gives (0, −inf)."""
    _check_kappa(kappa)
    _check_tol(tol)
    v = np.asarray(v, dtype=float)
    sign, w = _reduce(v)
    s = _scaled_sum(w, kappa, tol)
    is_zero = np.abs(v - np.round(v)) <= ZERO_ATOL
    with np.errstate(divide="ignore"):
        logmag = _LOG2 - math.pi * kappa / 4.0 + np.log(np.abs(s))
    sign = np.where(is_zero, 0.0, sign * np.sign(s))
    logmag = np.where(is_zero | (sign == 0), -np.inf, logmag)
    return sign.astype(np.int8), logmag


def log_sin_parts(z):
    """Arrays (sign, log|sin z|) with the same integer-multiple-of-π zero rule."""
    z = np.asarray(z, dtype=float)
    u = z / math.pi
    is_zero = np.abs(u - np.round(u)) <= ZERO_ATOL
    s = np.sin(z)
    with np.errstate(divide="ignore"):
        logmag = np.log(np.abs(s))
    sign = np.where(is_zero, 0.0, np.sign(s))
    logmag = np.where(is_zero | (sign == 0), -np.inf, logmag)
    return sign.astype(np.int8), logmag


def log_theta1(v: float, kappa: float, tol: float = DEFAULT_TOL) -> SignedLogValue:
    """ϑ₁(v; iκ) as a SignedLogValue."""
    sign, logmag = log_theta1_parts(v, kappa, tol)
    return SignedLogValue.from_parts(sign, logmag)


def addition_formula_residual(x, y, u, v, kappa: float, tol: float = DEFAULT_TOL):
    """Relative residual of the four-term theta addition formula

        ϑ(x+y)ϑ(x−y)ϑ(u+v)ϑ(u−v) − ϑ(x+v)ϑ(x−v)ϑ(y+u)ϑ(u−y)
            = ϑ(y+v)ϑ(y−v)ϑ(x+u)ϑ(x−u),

    scaled by the largest of the three products (0 when all vanish).
    """
    th = lambda z: np.asarray(theta1(z, kappa, tol))
    x, y, u, v = (np.asarray(a, dtype=float) for a in (x, y, u, v))
    a = th(x + y) * th(x - y) * th(u + v) * th(u - v)
    b = th(x + v) * th(x - v) * th(y + u) * th(-y + u)
    c = th(y + v) * th(y - v) * th(x + u) * th(x - u)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), np.abs(c))
    with np.errstate(invalid="ignore", divide="ignore"):
        res = np.where(scale > 0, np.abs(a - b - c) / scale, 0.0)
    return float(res) if res.ndim == 0 else res


def theta1_product(v, kappa: float, n_factors: int = 40):
    """Triple-product form 2p^{1/8} sin(πv) Π(1−pⁿ)(1−2pⁿcos 2πv+p²ⁿ), p=e^{−2πκ}.

    Kept as an independent reference for the series evaluator.
    """
    _check_kappa(kappa)
    v = np.asarray(v, dtype=float)
    p = math.exp(-2 * math.pi * kappa)
    n = np.arange(1, n_factors + 1, dtype=float)
    pn = p**n
    c = np.cos(2 * math.pi * v)[..., None]
    prod = np.prod((1 - pn) * (1 - 2 * pn * c + pn**2), axis=-1)
    out = 2 * math.exp(-math.pi * kappa / 4) * np.sin(math.pi * v) * prod
    return float(out) if out.ndim == 0 else out
