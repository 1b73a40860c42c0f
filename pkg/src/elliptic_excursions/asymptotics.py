"""Large-T laws of the simplified trigonometric process at σ = 3.

Rate function I(s, v) in three representations (quadrature, Fourier series,
Clausen closed form), its zero curve, the cubic approximation of that curve,
the central-limit density and the Brownian-bridge reference.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy.special import zeta

from .errors import DomainError, ParameterError
from .weights import ModelParams

PI = math.pi
SQRT3 = math.sqrt(3.0)
DOMAIN_SLACK = 1e-12
CLT_VARIANCE = 2.0 / (SQRT3 * PI)
V0 = 1.0 / 3.0 - 16.0 * PI**2 / 729.0


class RateMethod(str, enum.Enum):
    INTEGRAL = "integral"
    FOURIER = "fourier"
    CLAUSEN = "clausen"


@dataclass(frozen=True)
class RateValue:
    value: float
    method: RateMethod
    est_error: float


@dataclass(frozen=True)
class ScaledPoint:
    s: float
    v: float

    def __post_init__(self):
        check_scaled_domain(self.s, self.v)


def in_scaled_domain(s: float, v: float, slack: float = DOMAIN_SLACK) -> bool:
    if not (-slack <= s <= 2 + slack):
        return False
    return abs(v) <= min(s, 2 - s) + slack


def check_scaled_domain(s: float, v: float) -> None:
    if not (math.isfinite(s) and math.isfinite(v)) or not in_scaled_domain(s, v):
        raise DomainError(f"(s, v) = ({s}, {v}) is outside the scaled excursion domain")


# rate function: quadrature -------------------------------------------------------


def _g(phi):
    return math.log(math.sin(PI * (phi + 1 / 6)) / math.sin(PI * (1 / 6 - phi)))


def _h(phi):
    return math.log(math.cos(PI * (phi + 1 / 6)) / math.cos(PI * (1 / 6 - phi)))


def _quad(f, upper, tol):
    if upper == 0.0:
        return 0.0, 0.0
    val, err = integrate.quad(f, 0.0, upper, epsabs=tol, epsrel=0.0, limit=200)
    return val, err


def rate_integral(s: float, v: float, tol: float = 1e-12) -> RateValue:
    """I(s,v) = 3∫₀^{(1−s−v)/6} g + 6∫₀^{(1−s+v)/6} g + 6∫₀^{(1−s)/3} h,

    g(φ) = log[sin π(φ+1/6) / sin π(1/6−φ)],  h(φ) = log[cos π(φ+1/6) / cos π(1/6−φ)],
    by adaptive quadrature.  Upper limits that reach ±1/6 (g) or 1/3 (h)
    sit on integrable log singularities.
    """
    check_scaled_domain(s, v)
    parts = [
        (3.0, _g, (1 - s - v) / 6),
        (6.0, _g, (1 - s + v) / 6),
        (6.0, _h, (1 - s) / 3),
    ]
    total, err = 0.0, 0.0
    for coef, f, upper in parts:
        val, e = _quad(f, upper, tol / 15)
        total += coef * val
        err += coef * e
    return RateValue(total, RateMethod.INTEGRAL, err)


# rate function: Fourier series -------------------------------------------------------


def fourier_tail_bound(n_terms: int) -> float:
    """Bound on the dropped part of the four series: (20/π)(√3/2)/N."""
    return 20.0 / PI * (SQRT3 / 2) / n_terms


def rate_fourier(s: float, v: float, n_terms: int = 100_000) -> RateValue:
    """Partial sums of the Fourier form of I.

    I = (6/π) Σ (−1)^{n−1} sin(nπ/3) cos(2(1−s)nπ/3)/n² + (5/π) Σ sin(nπ/3)/n²
        − (6/π) Σ sin(nπ/3) cos((1−s+v)nπ/3)/n² − (3/π) Σ sin(nπ/3) cos((1−s−v)nπ/3)/n².
    """
    check_scaled_domain(s, v)
    if n_terms < 1:
        raise ParameterError("n_terms must be positive")
    n = np.arange(1, n_terms + 1, dtype=float)
    base = np.sin(n * PI / 3) / n**2
    alt = np.where(n % 2 == 1, 1.0, -1.0)
    terms = base * (
        (6 / PI) * alt * np.cos(2 * (1 - s) * n * PI / 3)
        + 5 / PI
        - (6 / PI) * np.cos((1 - s + v) * n * PI / 3)
        - (3 / PI) * np.cos((1 - s - v) * n * PI / 3)
    )
    return RateValue(float(math.fsum(terms)), RateMethod.FOURIER, fourier_tail_bound(n_terms))


def sin_series_identity_residual(n_terms: int = 1_000_000) -> float:
    """|Σ(−1)^{n−1} sin(nπ/3)/n² − (2/3) Σ sin(nπ/3)/n²| at a finite cutoff."""
    n = np.arange(1, n_terms + 1, dtype=float)
    base = np.sin(n * PI / 3) / n**2
    alt = np.where(n % 2 == 1, 1.0, -1.0)
    return abs(math.fsum(alt * base) - (2 / 3) * math.fsum(base))


# Clausen function and closed forms ------------------------------------------------------

_CL_K = np.arange(1, 41, dtype=float)
_CL_COEF = zeta(2 * _CL_K) / (_CL_K * (2 * _CL_K + 1)) / (2 * PI) ** (2 * _CL_K)


def clausen2(theta):
    """Cl₂(θ) = Σ sin(nθ)/n².

    After reduction to (−π, π]:  Cl₂(θ) = θ − θ log|θ| + Σ_k ζ(2k)/(k(2k+1)) θ^{2k+1}/(2π)^{2k},
    whose terms shrink at least like 4^{−k}.
    """
    th = np.asarray(theta, dtype=float)
    red = th - 2 * PI * np.round(th / (2 * PI))
    a = np.abs(red)
    with np.errstate(divide="ignore", invalid="ignore"):
        lead = np.where(a > 0, red - red * np.log(a), 0.0)
    powers = red[..., None] ** (2 * _CL_K + 1)
    out = lead + powers @ _CL_COEF
    return float(out) if out.ndim == 0 else out


def log_trig_antiderivatives(x: float):
    """(∫₀ˣ log sin, ∫₀ˣ log cos) via their Fourier forms.

    ∫₀ˣ log sin = −x log 2 − ½ Σ sin(2nx)/n² = −x log 2 − ½ Cl₂(2x) for 0 ≤ x < π;
    ∫₀ˣ log cos = −x log 2 + ½ Σ (−1)^{n−1} sin(2nx)/n² = −x log 2 − ½ Cl₂(2x + π) for |x| < π/2.
    """
    if not 0 <= x < PI:
        raise DomainError(f"sine form needs 0 <= x < pi, got {x}")
    if not abs(x) < PI / 2:
        raise DomainError(f"cosine form needs |x| < pi/2, got {x}")
    return -x * math.log(2) - 0.5 * clausen2(2 * x), -x * math.log(2) - 0.5 * clausen2(2 * x + PI)


def _J(phi):
    # Σ sin(nπ/3) cos(nφ)/n²
    return 0.5 * (clausen2(PI / 3 + phi) + clausen2(PI / 3 - phi))


def _K(phi):
    # Σ (−1)^{n−1} sin(nπ/3) cos(nφ)/n²
    return -0.5 * (clausen2(4 * PI / 3 + phi) + clausen2(4 * PI / 3 - phi))


def rate_clausen(s, v):
    """I(s, v) through J and K written with Clausen functions (vectorized, no domain check)."""
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    a = (1 - s - v) * PI / 3
    b = (1 - s + v) * PI / 3
    c = 2 * (1 - s) * PI / 3
    j0, k0 = _J(0.0), _K(0.0)
    out = -(3 / PI) * (_J(a) - j0) - (6 / PI) * (_J(b) - j0) + (6 / PI) * (_K(c) - k0)
    return float(out) if np.ndim(out) == 0 else out


def rate_clausen_value(s: float, v: float) -> RateValue:
    check_scaled_domain(s, v)
    return RateValue(rate_clausen(s, v), RateMethod.CLAUSEN, 1e-14)


# derivatives, zero curve, trajectory ------------------------------------------------------


def _logsin(z):
    return np.log(np.sin(z))


def rate_grad(s: float, v: float):
    """(∂_s I, ∂_v I) in closed form."""
    a = PI / 6
    dv = 0.5 * (
        _logsin(a * (s + v)) + 2 * _logsin(a * (2 - s + v)) - _logsin(a * (2 - s - v)) - 2 * _logsin(a * (s - v))
    )
    ds = 0.5 * (
        _logsin(a * (s + v))
        + 2 * _logsin(a * (s - v))
        + 4 * np.log(np.cos(a * (2 * s - 1)))
        - _logsin(a * (2 - s - v))
        - 2 * _logsin(a * (2 - s + v))
        - 4 * np.log(np.cos(a * (3 - 2 * s)))
    )
    return float(ds), float(dv)


def _check_open_domain(s, v):
    if not (0 < s < 2 and abs(v) < min(s, 2 - s)):
        raise DomainError(f"(s, v) = ({s}, {v}) is not an interior point")


_CRITICAL_ATOL = 1e-12
_LIMIT_STEP = 1e-5


def trajectory_ode_slope(s: float, v: float) -> float:
    """dv/ds = −∂_s I / ∂_v I.

    On the zero curve both derivatives vanish; there the limit is taken as the
    mean of the slopes at v ± 1e-5 (the one-sided values differ at first order
    only).  A vanishing ∂_v I with nonzero ∂_s I raises.
    """
    _check_open_domain(s, v)
    ds, dv = rate_grad(s, v)
    if abs(dv) > _CRITICAL_ATOL:
        return -ds / dv
    if abs(ds) > _CRITICAL_ATOL:
        raise DomainError(f"d I/dv vanishes at ({s}, {v}) while dI/ds does not")
    slopes = []
    for h in (-_LIMIT_STEP, _LIMIT_STEP):
        ds_h, dv_h = rate_grad(s, v + h)
        slopes.append(-ds_h / dv_h)
    return 0.5 * (slopes[0] + slopes[1])


def zero_curve(s: float, xtol: float = 1e-14) -> float:
    """v*(s) = argmin_v I(s, v), as the root of ∂_v I (which runs from −∞ to +∞ across the slice)."""
    if not 0 <= s <= 2:
        raise DomainError(f"s must lie in [0, 2], got {s}")
    w = min(s, 2 - s)
    if w <= 0:
        return 0.0
    eps = w * 1e-12
    f = lambda v: rate_grad(s, v)[1]
    return optimize.brentq(f, -w + eps, w - eps, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)


def cubic_trajectory(s: float) -> float:
    """(s−1)/3 − (2⁴π²/3⁶)(s−1)³."""
    if not 0 <= s <= 2:
        raise DomainError(f"s must lie in [0, 2], got {s}")
    d = s - 1
    return d / 3 - 16 * PI**2 / 729 * d**3


def rate_taylor(s: float, v: float) -> float:
    """Expansion of I around (1, 0) through sixth order, valid for |s−1| ≤ 0.3, |v| ≤ 0.15."""
    if not (abs(s - 1) <= 0.3 and abs(v) <= 0.15):
        raise DomainError(f"({s}, {v}) is outside the expansion's trust region")
    d = s - 1
    quad = SQRT3 * PI / 36 * (d - 3 * v) ** 2
    quart = SQRT3 * PI**3 / (8 * 729) * (5 * d**4 + 36 * v * d**3 - 162 * v**2 * d**2 + 36 * v**3 * d - 27 * v**4)
    sext = (
        SQRT3
        * PI**5
        / (16 * 6561 * 5)
        * (
            29 * d**6 + 198 * v * d**5 - 1485 * v**2 * d**4 + 660 * v**3 * d**3
            - 1485 * v**4 * d**2 + 198 * v**5 * d - 99 * v**6
        )
    )
    return quad - quart - sext


# central limit ---------------------------------------------------------------------


def clt_density(xi):
    """f(ξ) = (3^{1/4}/2) exp(−(√3π/4) ξ²), a centred normal with variance 2/(√3π)."""
    xi = np.asarray(xi, dtype=float)
    out = 3**0.25 / 2 * np.exp(-SQRT3 * PI / 4 * xi**2)
    return float(out) if out.ndim == 0 else out


def brownian_bridge_density(s: float, xi):
    """(πs(2−s))^{−1/2} exp(−ξ²/(s(2−s))) for 0 < s < 2."""
    if not 0 < s < 2:
        raise DomainError(f"s must lie in (0, 2), got {s}")
    xi = np.asarray(xi, dtype=float)
    var2 = s * (2 - s)
    out = np.exp(-(xi**2) / var2) / math.sqrt(PI * var2)
    return float(out) if out.ndim == 0 else out


def clt_scaled_law(T: int):
    """Lattice points ξ = x/√T at t=T and the scaled probabilities (√T/2) P(X(T)=x)."""
    from .measures import single_time_distribution

    dist = single_time_distribution(T, ModelParams.simplified_sigma3(T))
    return dist.x / math.sqrt(T), math.sqrt(T) / 2 * dist.prob


def clt_empirical_residual(T: int, xi_grid=None, density=clt_density) -> float:
    """max |(√T/2) P(X(T)=x) − density(x/√T)| over lattice x.

    With ``xi_grid`` given, only the lattice points nearest to √T·ξ are used.
    """
    xi, scaled = clt_scaled_law(T)
    if xi_grid is not None:
        idx = np.unique(np.abs(xi[:, None] - np.asarray(xi_grid, dtype=float)[None, :]).argmin(axis=0))
        xi, scaled = xi[idx], scaled[idx]
    return float(np.abs(scaled - density(xi)).max())


def clt_second_moment(T: int) -> float:
    """Σ (x²/T) P(X(T)=x) for the exact finite-T law."""
    xi, scaled = clt_scaled_law(T)
    prob = scaled * 2 / math.sqrt(T)
    return float(np.sum(xi**2 * prob))
