"""Weight families at the elementary-step and transition level.

Four families share one interface:

* elliptic      factors ϑ₁(z/π; iκ)
* trig          factors sin z (the κ→∞ limit)
* simplified    sin ζ₁ / sin η₁ only (β₀→∞ on top of the trig limit)
* classical     every weight 1, transitions are binomial coefficients

A "factor" below always means F(z) with F = ϑ₁(·/π; iκ) or sin, evaluated in
the log domain with sign tracking.  Parameters are stored in absolute units
(α₀, β₀, r); the shifted α = α₀ − (3T+1)/2 and β = β₀ − (3T+1)/2 enter all
closed forms.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import DomainError, ParameterError, PoleError
from .signedlog import SignedLogValue
from .theta import DEFAULT_TOL, _check_kappa, log_sin_parts, log_theta1_parts


class Family(str, enum.Enum):
    ELLIPTIC = "elliptic"
    TRIG = "trig"
    SIMPLIFIED = "simplified"
    CLASSICAL = "classical"

    @classmethod
    def parse(cls, name) -> "Family":
        if isinstance(name, Family):
            return name
        aliases = {"trigonometric": "trig", "simplified-trig": "simplified", "binomial": "classical"}
        key = aliases.get(str(name).lower(), str(name).lower())
        try:
            return cls(key)
        except ValueError:
            raise ParameterError(f"unknown family {name!r}") from None


@dataclass(frozen=True)
class ModelParams:
    """Family tag plus (T, r, α₀, β₀, κ).

    β₀ is ignored by the simplified family; α₀, β₀, κ and r are ignored by
    the classical one.
    """

    family: Family
    T: int
    r: float = math.inf
    alpha0: float = 0.0
    beta0: float = 0.0
    kappa: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if isinstance(self.T, bool) or int(self.T) != self.T or self.T < 1:
            raise ParameterError(f"T must be a positive integer, got {self.T!r}")
        object.__setattr__(self, "T", int(self.T))
        if self.family is Family.CLASSICAL:
            return
        if not (self.r > 0) or math.isnan(self.r):
            raise ParameterError(f"r must be positive, got {self.r!r}")
        if not math.isfinite(self.r):
            raise ParameterError(f"r must be finite for the {self.family.value} family")
        for name in ("alpha0", "beta0"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.family is Family.ELLIPTIC:
            if self.kappa is None:
                raise ParameterError("the elliptic family needs kappa")
            _check_kappa(self.kappa)

    # constructors -----------------------------------------------------

    @classmethod
    def from_ratios(
        cls,
        family,
        T: int,
        *,
        sigma: Optional[float] = None,
        r: Optional[float] = None,
        alpha0_over_r: float = 0.0,
        beta0_over_r: float = 0.0,
        kappa: Optional[float] = None,
    ) -> "ModelParams":
        """Build from πr = σT (or raw r) and the ratios α₀/r, β₀/r."""
        family = Family.parse(family)
        if family is Family.CLASSICAL:
            return cls(family, T)
        if (sigma is None) == (r is None):
            raise ParameterError("give exactly one of sigma or r")
        if sigma is not None:
            if not sigma > 0:
                raise ParameterError(f"sigma must be positive, got {sigma!r}")
            r = sigma * T / math.pi
        return cls(family, T, r, alpha0_over_r * r, beta0_over_r * r, kappa)

    @classmethod
    def simplified_sigma3(cls, T: int) -> "ModelParams":
        """πr = 3T, α₀/r = π/2: the unique certified simplified point at σ=3."""
        return cls.from_ratios(Family.SIMPLIFIED, T, sigma=3.0, alpha0_over_r=math.pi / 2)

    @classmethod
    def trig_sigma6(cls, T: int) -> "ModelParams":
        """πr = 6T, α₀/r = −β₀/r = π/4."""
        return cls.from_ratios(Family.TRIG, T, sigma=6.0, alpha0_over_r=math.pi / 4, beta0_over_r=-math.pi / 4)

    @classmethod
    def elliptic_sigma6(cls, T: int, kappa: float) -> "ModelParams":
        return cls.from_ratios(
            Family.ELLIPTIC, T, sigma=6.0, alpha0_over_r=math.pi / 4, beta0_over_r=-math.pi / 4, kappa=kappa
        )

    @classmethod
    def classical(cls, T: int) -> "ModelParams":
        return cls(Family.CLASSICAL, T)

    # derived ------------------------------------------------------------

    @property
    def alpha(self) -> float:
        return self.alpha0 - (3 * self.T + 1) / 2

    @property
    def beta(self) -> float:
        return self.beta0 - (3 * self.T + 1) / 2

    @property
    def lam(self) -> float:
        if not math.isfinite(self.r):
            return 0.0
        return (3 * self.T - 1) / (2 * math.pi * self.r)

    @property
    def sigma(self) -> float:
        return math.pi * self.r / self.T

    def with_(self, **changes) -> "ModelParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class ArgumentVector:
    zeta: tuple
    eta: tuple


@dataclass(frozen=True)
class LegacyParams:
    """Exponents of (a, b, q, p) = (e^{2iα/r}, e^{2iβ/r}, e^{2i/r}, e^{−2πκ})."""

    a: float
    b: float
    q: float
    p: float

    @classmethod
    def from_params(cls, params: ModelParams) -> "LegacyParams":
        kappa = params.kappa if params.kappa is not None else math.inf
        return cls(2 * params.alpha / params.r, 2 * params.beta / params.r, 2 / params.r, -2 * math.pi * kappa)

    @property
    def nome_modulus(self) -> float:
        return math.exp(self.p)


# factor evaluation ----------------------------------------------------------


def log_factor_parts(z, params: ModelParams, tol: float = DEFAULT_TOL):
    """(sign, log|F(z)|) with F = ϑ₁(z/π; iκ) for elliptic, sin otherwise."""
    z = np.asarray(z, dtype=float)
    if params.family is Family.ELLIPTIC:
        return log_theta1_parts(z / math.pi, params.kappa, tol)
    return log_sin_parts(z)


def _ratio(num, den, params, tol, label):
    """Σ log F(num) − Σ log F(den) with sign; exact zero numerator gives 0."""
    ns, nl = log_factor_parts(np.concatenate(num) if num else np.zeros(0), params, tol)
    ds, dl = log_factor_parts(np.concatenate(den) if den else np.zeros(0), params, tol)
    if np.any(ds == 0):
        raise PoleError(f"vanishing denominator factor in {label}", index=label)
    if np.any(ns == 0):
        return SignedLogValue.zero()
    sign = int(np.prod(ns, dtype=np.int64) * np.prod(ds, dtype=np.int64))
    return SignedLogValue(sign, float(nl.sum() - dl.sum()))


# elementary weights -----------------------------------------------------------


def _arguments(t, x, params: ModelParams):
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    a, b, r = params.alpha, params.beta, params.r
    z1 = (a + (3 * t - x) / 2) / r
    z2 = (b + t + x) / r
    z4 = (a - b - (t + x) / 2) / r
    e1 = (a + (t + x) / 2) / r
    e2 = (b + (3 * t + x) / 2) / r
    e4 = (a - b - x) / r
    zeta = np.stack([z1, z2, z2 - 1 / r, z4, z4 + 1 / r])
    eta = np.stack([e1, e2, e2 - 1 / r, e4, e4 + 1 / r])
    return zeta, eta


def argument_vector(t: int, x: int, params: ModelParams) -> ArgumentVector:
    """The ten arguments ζ₁..ζ₅, η₁..η₅ of the elementary weight at (t, x)."""
    if (t + x) % 2:
        raise ParameterError(f"({t}, {x}) is off the parity lattice")
    if params.family is Family.CLASSICAL:
        raise ParameterError("the classical family has no argument vector")
    zeta, eta = _arguments(t, x, params)
    return ArgumentVector(tuple(map(float, zeta)), tuple(map(float, eta)))


def elementary_weight_parts(t, x, params: ModelParams, tol: float = DEFAULT_TOL):
    """Vectorized elementary weights: arrays (sign, log|q(t, x)|)."""
    t = np.asarray(t)
    x = np.asarray(x)
    shape = np.broadcast(t, x).shape
    if params.family is Family.CLASSICAL:
        return np.ones(shape, dtype=np.int8), np.zeros(shape)
    zeta, eta = _arguments(t, x, params)
    if params.family is Family.SIMPLIFIED:
        zeta, eta = zeta[:1], eta[:1]
    zs, zl = log_factor_parts(zeta, params, tol)
    es, el = log_factor_parts(eta, params, tol)
    bad = es == 0
    if bad.any():
        j = int(np.argwhere(bad)[0][0]) + 1
        raise PoleError(f"eta_{j} makes the denominator of q vanish", index=j)
    sign = np.prod(zs.astype(np.int64) * es, axis=0)
    logmag = np.where(sign == 0, -np.inf, (zl - el).sum(axis=0))
    return sign.astype(np.int8), logmag


def elementary_weight(t: int, x: int, params: ModelParams, tol: float = DEFAULT_TOL) -> SignedLogValue:
    """Weight q(t, x) of the rightward step (t−1, x−1) → (t, x)."""
    if (t + x) % 2:
        raise ParameterError(f"({t}, {x}) is off the parity lattice")
    sign, logmag = elementary_weight_parts(t, x, params, tol)
    return SignedLogValue.from_parts(sign, logmag)


# transition weights -------------------------------------------------------------


def _check_endpoints(s, x, t, y):
    if s > t:
        raise ParameterError(f"start time {s} exceeds end time {t}")
    return abs(y - x) <= t - s and (t - s + y - x) % 2 == 0


def _rng(lo, hi):
    """Integers lo..hi inclusive as floats (empty when hi < lo)."""
    return np.arange(lo, hi + 1, dtype=float)


def log_binomial(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def transition_weight_factorized(
    s: int, x: int, t: int, y: int, params: ModelParams, tol: float = DEFAULT_TOL
) -> SignedLogValue:
    """Q(s,x;t,y) from the closed product form.

    Blocks (F as in the module docstring, all arguments divided by r):
    binomial Φ(t−s)/(Φ(k)Φ(l)) with Φ(n)=Π_{u≤n}F(u); an α block; a β block;
    and an (α−β) block.  The simplified family keeps only the first two.
    """
    if not _check_endpoints(s, x, t, y):
        return SignedLogValue.zero()
    n = t - s
    k = (n + y - x) // 2
    l = (n - y + x) // 2
    if params.family is Family.CLASSICAL:
        return SignedLogValue(1, log_binomial(n, k))

    a, b, r = params.alpha, params.beta, params.r
    num = [_rng(1, n) / r]
    den = [_rng(1, k) / r, _rng(1, l) / r]

    u = _rng((s + x) // 2 + 1, (t + y) // 2)
    num.append((a + ((t - y) + (s - x)) / 2 + u) / r)
    den.append((a + u) / r)

    if params.family is not Family.SIMPLIFIED:
        u = _rng((s - x) // 2 + 1, (t - y) // 2)
        num.append((b + ((t + y) + (s + x)) / 2 + u) / r)
        num.append((b + _rng(s + x + 1, t + y)) / r)
        den.append((b + _rng((3 * s + x) // 2 + 1, (3 * t + y) // 2)) / r)

        u = _rng(-(t + y) // 2 + 1, -(s + x) // 2)
        num.append((a - b + u) / r)
        num.append((a - b - 1 + u) / r)
        den.append((a - b + (t - y) / 2 + u) / r)
        den.append((a - b + (s - x - 2) / 2 + u) / r)

    return _ratio(num, den, params, tol, "Q")


def _signed_add(s1, l1, s2, l2):
    """Elementwise signed log-domain addition of two arrays."""
    m = np.maximum(l1, l2)
    finite = np.isfinite(m)
    safe = np.where(finite, m, 0.0)
    with np.errstate(invalid="ignore"):
        val = s1 * np.exp(np.where(s1 != 0, l1 - safe, -np.inf)) + s2 * np.exp(
            np.where(s2 != 0, l2 - safe, -np.inf)
        )
    sign = np.sign(val)
    with np.errstate(divide="ignore"):
        logmag = np.where(sign != 0, safe + np.log(np.abs(val)), -np.inf)
    return sign.astype(np.int8), logmag


def transition_weight_recursive(
    s: int, x: int, t: int, y: int, params: ModelParams, tol: float = DEFAULT_TOL
) -> SignedLogValue:
    """Q(s,x;t,y) by dynamic programming on Q(·;u,z) = Q(·;u−1,z−1)q(u,z) + Q(·;u−1,z+1).

    Only points lying on some path between the endpoints are visited, so
    weights outside the relevant rhombus are never evaluated.
    """
    if not _check_endpoints(s, x, t, y):
        return SignedLogValue.zero()
    pos = np.array([x])
    sign = np.ones(1, dtype=np.int8)
    logm = np.zeros(1)
    for u in range(s + 1, t + 1):
        lo = max(x - (u - s), y - (t - u))
        hi = min(x + (u - s), y + (t - u))
        new = np.arange(lo, hi + 1, 2)
        # predecessor index for z−1 (rightward step) and z+1 (leftward step)
        base = pos[0]
        ir = (new - 1 - base) // 2
        il = (new + 1 - base) // 2
        okr = (ir >= 0) & (ir < len(pos))
        okl = (il >= 0) & (il < len(pos))
        sr = np.where(okr, sign[np.clip(ir, 0, len(pos) - 1)], 0)
        lr = np.where(okr, logm[np.clip(ir, 0, len(pos) - 1)], -np.inf)
        sl = np.where(okl, sign[np.clip(il, 0, len(pos) - 1)], 0)
        ll = np.where(okl, logm[np.clip(il, 0, len(pos) - 1)], -np.inf)
        if okr.any():
            qs, ql = elementary_weight_parts(np.full(okr.sum(), u), new[okr], params, tol)
            sr = sr.copy()
            lr = lr.copy()
            sr[okr] = sr[okr] * qs
            lr[okr] = np.where(sr[okr] != 0, lr[okr] + ql, -np.inf)
        sign, logm = _signed_add(sr, lr, sl, ll)
        pos = new
    return SignedLogValue.from_parts(sign[0], logm[0])


@lru_cache(maxsize=32)
def _backward_table(params: ModelParams, tol: float):
    signs, logs = [None] * (2 * params.T + 1), [None] * (2 * params.T + 1)
    T2 = 2 * params.T
    signs[T2] = np.ones(1, dtype=np.int8)
    logs[T2] = np.zeros(1)
    for t in range(T2 - 1, -1, -1):
        h = min(t, T2 - t)
        xs = np.arange(-h, h + 1, 2)
        h1 = min(t + 1, T2 - t - 1)
        nxt = np.arange(-h1, h1 + 1, 2)
        ir = (xs + 1 + h1) // 2
        il = (xs - 1 + h1) // 2
        okr = (xs + 1 >= -h1) & (xs + 1 <= h1)
        okl = (xs - 1 >= -h1) & (xs - 1 <= h1)
        cr = np.clip(ir, 0, len(nxt) - 1)
        cl = np.clip(il, 0, len(nxt) - 1)
        sr = np.where(okr, signs[t + 1][cr], 0).astype(np.int8)
        lr = np.where(okr, logs[t + 1][cr], -np.inf)
        sl = np.where(okl, signs[t + 1][cl], 0).astype(np.int8)
        ll = np.where(okl, logs[t + 1][cl], -np.inf)
        if okr.any():
            qs, ql = elementary_weight_parts(np.full(okr.sum(), t + 1), xs[okr] + 1, params, tol)
            sr[okr] = sr[okr] * qs
            lr[okr] = np.where(sr[okr] != 0, lr[okr] + ql, -np.inf)
        signs[t], logs[t] = _signed_add(sr, lr, sl, ll)
    return tuple(signs), tuple(logs)


def transition_table_to_end(params: ModelParams, tol: float = DEFAULT_TOL):
    """Q(t, x; 2T, 0) for every (t, x) in the excursion domain, by backward recursion.

    Returns ``(signs, logs)``: tuples indexed by t of arrays over the slice
    positions −h, −h+2, …, h with h = min(t, 2T−t).
    """
    return _backward_table(params, tol)


# Schlosser's two-index form ---------------------------------------------------


def _theta_ratio(num, den, r, kappa, tol, label):
    scale = math.pi * r
    ns, nl = log_theta1_parts(np.concatenate(num) / scale, kappa, tol)
    ds, dl = log_theta1_parts(np.concatenate(den) / scale, kappa, tol)
    if np.any(ds == 0):
        raise PoleError(f"vanishing denominator factor in {label}", index=label)
    if np.any(ns == 0):
        return SignedLogValue.zero()
    sign = int(np.prod(ns, dtype=np.int64) * np.prod(ds, dtype=np.int64))
    return SignedLogValue(sign, float(nl.sum() - dl.sum()))


def schlosser_w(n: int, m: int, alpha: float, beta: float, r: float, kappa: float, tol: float = DEFAULT_TOL):
    """Step weight w(n, m) in the (rightward count, leftward count) coordinates."""
    _check_kappa(kappa)
    d = alpha - beta
    num = [np.array([alpha + n + 2 * m, beta + 2 * n, beta + 2 * n - 1, d + 1 - n, d - n], dtype=float)]
    den = [np.array([alpha + n, beta + 2 * n + m, beta + 2 * n + m - 1, d + 1 + m - n, d + m - n], dtype=float)]
    return _theta_ratio(num, den, r, kappa, tol, "w")


def schlosser_wP(
    l: int, k: int, n: int, m: int, alpha: float, beta: float, r: float, kappa: float, tol: float = DEFAULT_TOL
):
    """Total weight of paths from (ℓ, k) to (n, m) in the two-index form."""
    _check_kappa(kappa)
    if l > n or k > m:
        raise ParameterError("need l <= n and k <= m")
    d = alpha - beta
    num = [_rng(1, n - l + m - k)]
    den = [_rng(1, n - l), _rng(1, m - k)]
    u = _rng(l + 1, n)
    num.append(alpha + m + k + u)
    den.append(alpha + u)
    num.append(beta + n + l + _rng(k + 1, m))
    num.append(beta + _rng(2 * l + 1, 2 * n))
    den.append(beta + _rng(2 * l + k + 1, 2 * n + m))
    u = _rng(-n + 1, -l)
    num += [d + u, d - 1 + u]
    den += [d + m + u, d + k - 1 + u]
    return _theta_ratio(num, den, r, kappa, tol, "wP")


def q_binomial(n: int, k: int, q: float) -> float:
    """Gaussian binomial (q;q)_n / ((q;q)_k (q;q)_{n−k}) for q ∈ (0, 1]."""
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"q_binomial needs 0 <= k <= n, got n={n}, k={k}")
    if not 0 < q <= 1:
        raise ParameterError(f"q must lie in (0, 1], got {q!r}")
    if q == 1:
        return float(math.comb(n, k))
    j_num = np.arange(n - k + 1, n + 1)
    j_den = np.arange(1, k + 1)
    lq = math.log(q)
    return float(np.exp(np.log1p(-np.exp(j_num * lq)).sum() - np.log1p(-np.exp(j_den * lq)).sum()))
