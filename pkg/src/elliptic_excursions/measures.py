"""Excursion measures: positivity, single/multi-time laws, trajectories, sampling."""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError, PoleError, PositivityError
from .lattice import LatticePath, SpacetimePoint, slice_positions
from .signedlog import SignedLogValue, signed_logsumexp
from .theta import DEFAULT_TOL
from .weights import (
    Family,
    ModelParams,
    _signed_add,
    elementary_weight_parts,
    log_binomial,
    log_factor_parts,
    transition_table_to_end,
    transition_weight_factorized,
)

TIE_RTOL = 1e-12


# positivity -------------------------------------------------------------------


@dataclass(frozen=True)
class PositivityReport:
    lam: float
    cond_B1: Optional[bool]
    cond_B2: Optional[bool]
    cond_B3: Optional[bool]
    cond_B4: Optional[bool]
    certified: bool
    witness: Optional[SpacetimePoint] = None

    def failed_conditions(self) -> list[str]:
        names = ("B1", "B2", "B3", "B4")
        vals = (self.cond_B1, self.cond_B2, self.cond_B3, self.cond_B4)
        return [n for n, v in zip(names, vals) if v is False]


def find_negative_weight(params: ModelParams, tol: float = DEFAULT_TOL) -> Optional[SpacetimePoint]:
    """First rightward-step point (by t, then x) whose elementary weight is negative."""
    T = params.T
    for t in range(1, 2 * T + 1):
        lo = -t + 2 if t <= T else t - 2 * T
        hi = t if t <= T else 2 * T - t
        xs = np.arange(lo, hi + 1, 2)
        try:
            signs, _ = elementary_weight_parts(np.full(len(xs), t), xs, params, tol)
        except PoleError:
            signs = np.array([_sign_or_zero(t, int(x), params, tol) for x in xs])
        neg = np.flatnonzero(signs < 0)
        if neg.size:
            return SpacetimePoint(t, int(xs[neg[0]]))
    return None


def _sign_or_zero(t, x, params, tol):
    try:
        return int(elementary_weight_parts(t, x, params, tol)[0])
    except PoleError:
        return 0


def positivity_check(params: ModelParams, tol: float = DEFAULT_TOL) -> PositivityReport:
    """Evaluate the sufficient positivity conditions B1–B4.

    B1: 0 ≤ λ < 1/2;  B2: πλ < α₀/r < π(1−λ);  B3: πλ < −β₀/r < π(1−λ);
    B4: (α₀−β₀)/r < π(1 − 2(T+1)λ/(3T−1)).  The simplified family uses B1
    and B2 only.  When a condition fails the rightward-step domain is
    scanned for a negative weight.
    """
    if params.family is Family.CLASSICAL:
        return PositivityReport(0.0, True, None, None, None, True)
    lam, T, pi = params.lam, params.T, math.pi
    a = params.alpha0 / params.r
    b = params.beta0 / params.r
    b1 = 0 <= lam < 0.5
    b2 = pi * lam < a < pi * (1 - lam)
    if params.family is Family.SIMPLIFIED:
        b3 = b4 = None
    else:
        b3 = pi * lam < -b < pi * (1 - lam)
        b4 = a - b < pi * (1 - 2 * (T + 1) * lam / (3 * T - 1))
    certified = all(c is not False for c in (b1, b2, b3, b4))
    witness = None if certified else find_negative_weight(params, tol)
    return PositivityReport(lam, b1, b2, b3, b4, certified, witness)


def require_certified(params: ModelParams, tol: float = DEFAULT_TOL) -> PositivityReport:
    report = positivity_check(params, tol)
    if not report.certified:
        msg = f"parameters not certified (failed: {', '.join(report.failed_conditions())})"
        if report.witness is not None:
            msg += f"; negative weight at t={report.witness.t}, x={report.witness.x}"
        raise PositivityError(msg)
    return report


# single-time distributions -------------------------------------------------------


@dataclass(frozen=True)
class SingleTimeDistribution:
    t: int
    x: np.ndarray
    prob: np.ndarray
    norm_residual: float

    @property
    def support(self) -> list[tuple[int, float]]:
        return [(int(a), float(p)) for a, p in zip(self.x, self.prob)]

    def prob_at(self, x: int) -> float:
        i = np.searchsorted(self.x, x)
        if i < len(self.x) and self.x[i] == x:
            return float(self.prob[i])
        return 0.0


class _Prefix:
    """Range products of F over a contiguous integer index block, via prefix sums."""

    def __init__(self, m0: int, signs, logs):
        self.m0 = m0
        signs = np.asarray(signs)
        zero = signs == 0
        self.cum_log = np.concatenate(([0.0], np.cumsum(np.where(zero, 0.0, logs))))
        self.cum_neg = np.concatenate(([0], np.cumsum(signs < 0)))
        self.cum_zero = np.concatenate(([0], np.cumsum(zero)))

    def range(self, lo, hi):
        """(parity of negatives, log-sum, zero count) over indices lo..hi inclusive."""
        lo = np.asarray(lo) - self.m0
        hi = np.asarray(hi) - self.m0 + 1
        hi = np.maximum(hi, lo)
        return (
            self.cum_neg[hi] - self.cum_neg[lo],
            self.cum_log[hi] - self.cum_log[lo],
            self.cum_zero[hi] - self.cum_zero[lo],
        )


class _Accumulator:
    """Running signed log product of a numerator and a denominator."""

    def __init__(self, shape):
        self.neg = np.zeros(shape, dtype=np.int64)
        self.log = np.zeros(shape)
        self.num_zero = np.zeros(shape, dtype=np.int64)
        self.den_zero = np.zeros(shape, dtype=np.int64)

    def mul(self, part):
        neg, log, zero = part
        self.neg += neg
        self.log += log
        self.num_zero += zero

    def div(self, part):
        neg, log, zero = part
        self.neg += neg
        self.log -= log
        self.den_zero += zero

    def result(self, where: str):
        if np.any(self.den_zero):
            raise PoleError(f"vanishing denominator factor in {where}", index=where)
        sign = np.where(self.num_zero > 0, 0, np.where(self.neg % 2, -1, 1))
        log = np.where(sign == 0, -np.inf, self.log)
        return sign.astype(np.int8), log


def _table(m0, m1, zfun, params, tol):
    m = np.arange(m0, m1 + 1)
    s, l = log_factor_parts(zfun(m.astype(float)), params, tol)
    return _Prefix(m0, s, l)


@lru_cache(maxsize=64)
def _closed_form_tables(params: ModelParams, tol: float):
    T, r = params.T, params.r
    a0, b0 = params.alpha0, params.beta0
    d = (a0 - b0) / r
    tabs = {
        "phi": _table(1, 2 * T, lambda n: n / r, params, tol),
        "g_a": _table(1 - 2 * T, 2 * T, lambda m: (2 * a0 - 3 * T + 1 - 2 * m) / (2 * r), params, tol),
        "h_a": _table(1, 2 * T, lambda m: (2 * a0 + 2 * m - T - 1) / (2 * r), params, tol),
    }
    if params.family is not Family.SIMPLIFIED:
        tabs["g_b"] = _table(1 - 2 * T, 2 * T, lambda m: (2 * b0 - 3 * T + 1 - 2 * m) / (2 * r), params, tol)
        tabs["h_b"] = _table(1, 2 * T, lambda m: (2 * b0 + 2 * m - T - 1) / (2 * r), params, tol)
        tabs["d_minus"] = _table(1, 2 * T, lambda n: d - n / r, params, tol)
        tabs["d_plus"] = _table(1, 2 * T, lambda n: d + n / r, params, tol)
        tabs["d_at"] = lambda x: log_factor_parts(d - np.asarray(x, dtype=float) / r, params, tol)
    return tabs


def _prefix(tab: _Prefix, k):
    k = np.asarray(k)
    return tab.range(np.ones_like(k), k)


def _closed_form_logprob(t: int, x: np.ndarray, params: ModelParams, tol: float):
    T = params.T
    if params.family is Family.CLASSICAL:
        n_up = (t + x) // 2
        n_up2 = (2 * T - t + x) // 2
        from scipy.special import gammaln

        lp = (
            gammaln(t + 1) - gammaln(n_up + 1) - gammaln(t - n_up + 1)
            + gammaln(2 * T - t + 1) - gammaln(n_up2 + 1) - gammaln(2 * T - t - n_up2 + 1)
            - log_binomial(2 * T, T)
        )
        return np.ones(len(x), dtype=np.int8), lp

    tb = _closed_form_tables(params, tol)
    phi = tb["phi"]
    k1 = (t + x) // 2
    k2 = (t - x) // 2
    k3 = (2 * T - t - x) // 2
    k4 = (2 * T - t + x) // 2
    acc = _Accumulator(len(x))
    one = np.ones_like(x)

    # normalising constant
    acc.mul(_prefix(phi, t * one))
    acc.mul(_prefix(phi, (2 * T - t) * one))
    acc.div(_prefix(phi, 2 * T * one))
    acc.mul(_prefix(phi, T * one))
    acc.mul(_prefix(phi, T * one))
    acc.div(_prefix(tb["h_a"], T * one))

    acc.mul(tb["g_a"].range(1 - t + 0 * x, k1 - t))
    acc.div(_prefix(phi, k1))
    acc.div(_prefix(phi, k2))
    acc.mul(tb["h_a"].range(t + 1 + 0 * x, t + k3))
    acc.div(_prefix(phi, k3))
    acc.div(_prefix(phi, k4))

    if params.family is not Family.SIMPLIFIED:
        s_d, l_d = tb["d_at"](0.0)
        acc.div((np.full(len(x), int(s_d) < 0), np.full(len(x), float(l_d)), np.full(len(x), int(s_d) == 0)))
        acc.mul(_prefix(tb["d_minus"], T * one))
        acc.mul(_prefix(tb["d_plus"], T * one))
        acc.div(_prefix(tb["h_b"], T * one))

        s_x, l_x = tb["d_at"](x)
        acc.mul(((s_x < 0).astype(np.int64), np.where(s_x == 0, 0.0, l_x), (s_x == 0).astype(np.int64)))
        acc.div(_prefix(tb["d_minus"], k1))
        acc.mul(tb["g_b"].range(1 - t + 0 * x, k2 - t))
        acc.div(_prefix(tb["d_plus"], k2))
        acc.div(_prefix(tb["d_plus"], k3))
        acc.mul(tb["h_b"].range(t + 1 + 0 * x, t + k4))
        acc.div(_prefix(tb["d_minus"], k4))

    return acc.result("single-time distribution")


def _validate_time(t: int, params: ModelParams) -> int:
    if isinstance(t, bool) or int(t) != t or not 0 <= t <= 2 * params.T:
        raise ParameterError(f"t must be an integer in [0, {2 * params.T}], got {t!r}")
    return int(t)


def _make_distribution(t, xs, sign, logp) -> SingleTimeDistribution:
    prob = sign * np.exp(logp)
    prob = np.where(sign == 0, 0.0, prob)
    return SingleTimeDistribution(t, xs, prob, float(math.fsum(prob) - 1.0))


def single_time_distribution(t: int, params: ModelParams, tol: float = DEFAULT_TOL) -> SingleTimeDistribution:
    """P(X(t) = x) on the excursion-domain slice at time t, from the closed product form.

    The normalisation residual is reported, never absorbed.
    """
    t = _validate_time(t, params)
    xs = slice_positions(t, params.T)
    if params.family is Family.CLASSICAL:
        # exact integer binomials, rounded once
        T = params.T
        den = math.comb(2 * T, T)
        prob = np.array(
            [float(Fraction(math.comb(t, (t + x) // 2) * math.comb(2 * T - t, (2 * T - t + x) // 2), den)) for x in xs]
        )
        return SingleTimeDistribution(t, xs, prob, float(math.fsum(prob) - 1.0))
    sign, logp = _closed_form_logprob(t, xs, params, tol)
    return _make_distribution(t, xs, sign, logp)


def distribution_table(params: ModelParams, tol: float = DEFAULT_TOL) -> list[SingleTimeDistribution]:
    return [single_time_distribution(t, params, tol) for t in range(2 * params.T + 1)]


@lru_cache(maxsize=32)
def _forward_table(params: ModelParams, tol: float):
    """Q(0, 0; t, x) over the excursion domain by forward recursion."""
    T2 = 2 * params.T
    signs = [np.ones(1, dtype=np.int8)]
    logs = [np.zeros(1)]
    for t in range(1, T2 + 1):
        xs = slice_positions(t, params.T)
        h0 = min(t - 1, T2 - t + 1)
        ir = (xs - 1 + h0) // 2
        il = (xs + 1 + h0) // 2
        okr = (xs - 1 >= -h0) & (xs - 1 <= h0)
        okl = (xs + 1 >= -h0) & (xs + 1 <= h0)
        n0 = len(signs[-1])
        sr = np.where(okr, signs[-1][np.clip(ir, 0, n0 - 1)], 0).astype(np.int8)
        lr = np.where(okr, logs[-1][np.clip(ir, 0, n0 - 1)], -np.inf)
        sl = np.where(okl, signs[-1][np.clip(il, 0, n0 - 1)], 0).astype(np.int8)
        ll = np.where(okl, logs[-1][np.clip(il, 0, n0 - 1)], -np.inf)
        if okr.any():
            qs, ql = elementary_weight_parts(np.full(okr.sum(), t), xs[okr], params, tol)
            sr[okr] = sr[okr] * qs
            lr[okr] = np.where(sr[okr] != 0, lr[okr] + ql, -np.inf)
        s, l = _signed_add(sr, lr, sl, ll)
        signs.append(s)
        logs.append(l)
    return tuple(signs), tuple(logs)


def single_time_distribution_recursive(
    t: int, params: ModelParams, tol: float = DEFAULT_TOL
) -> SingleTimeDistribution:
    """Same law computed as Q(0,0;t,x)·Q(t,x;2T,0)/Q(0,0;2T,0) from the recursions."""
    t = _validate_time(t, params)
    fs, fl = _forward_table(params, tol)
    bs, bl = transition_table_to_end(params, tol)
    sign = fs[t] * bs[t] * bs[0][0]
    logp = np.where(sign == 0, -np.inf, fl[t] + bl[t] - bl[0][0])
    return _make_distribution(t, slice_positions(t, params.T), sign.astype(np.int8), logp)


# multi-time measure ---------------------------------------------------------------


def joint_measure(
    times: Sequence[int], positions: Sequence[int], params: ModelParams, tol: float = DEFAULT_TOL
) -> SignedLogValue:
    """P(X(t₁)=x₁, …, X(t_M)=x_M) as a product of transition weights over Q(0,0;2T,0)."""
    if len(times) != len(positions) or not times:
        raise ParameterError("times and positions must be nonempty and of equal length")
    ts = [0] + [int(t) for t in times]
    xs = [0] + [int(x) for x in positions]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ParameterError("times must be strictly increasing and positive")
    if ts[-1] > 2 * params.T:
        raise ParameterError(f"times must not exceed 2T={2 * params.T}")
    if any((t + x) % 2 for t, x in zip(ts, xs)):
        return SignedLogValue.zero()
    w = SignedLogValue.one()
    for (s, x), (t, y) in zip(zip(ts, xs), zip(ts[1:], xs[1:])):
        w = w * transition_weight_factorized(s, x, t, y, params, tol)
        if w.is_zero:
            return w
    w = w * transition_weight_factorized(ts[-1], xs[-1], 2 * params.T, 0, params, tol)
    return w / transition_weight_factorized(0, 0, 2 * params.T, 0, params, tol)


def ck_residual(s: int, x: int, u: int, t: int, y: int, params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    """Relative defect of Q(s,x;t,y) = Σ_z Q(s,x;u,z) Q(u,z;t,y)."""
    if not s < u < t:
        raise ParameterError("need s < u < t")
    lhs = transition_weight_factorized(s, x, t, y, params, tol)
    terms = []
    for z in range(x - (u - s), x + (u - s) + 1, 2):
        terms.append(
            transition_weight_factorized(s, x, u, z, params, tol) * transition_weight_factorized(u, z, t, y, params, tol)
        )
    sgn = [w.sign for w in terms] + [-lhs.sign]
    lg = [w.log_mag for w in terms] + [lhs.log_mag]
    _, log_diff = signed_logsumexp(sgn, lg)
    if log_diff == -math.inf:
        return 0.0
    scale = max([lhs.log_mag] + [w.log_mag for w in terms])
    return math.exp(log_diff - scale)


# trajectories -------------------------------------------------------------------


@dataclass(frozen=True)
class TrajectoryRecord:
    t: np.ndarray
    x_max: np.ndarray
    p_max: np.ndarray
    tie_flag: np.ndarray

    @property
    def T(self) -> int:
        return (len(self.t) - 1) // 2


def argmax_trajectory(params: ModelParams, tol: float = DEFAULT_TOL, allow_signed: bool = False) -> TrajectoryRecord:
    """Per-t most likely position; ties (relative gap ≤ 1e-12) go to the smallest x."""
    if not allow_signed:
        require_certified(params, tol)
    n = 2 * params.T + 1
    xm = np.zeros(n, dtype=np.int64)
    pm = np.zeros(n)
    tie = np.zeros(n, dtype=bool)
    for t in range(n):
        dist = single_time_distribution(t, params, tol)
        p = dist.prob
        best = p.max()
        close = np.flatnonzero(p >= best - TIE_RTOL * abs(best))
        xm[t] = dist.x[close[0]]
        pm[t] = p[close[0]]
        tie[t] = len(close) > 1
    return TrajectoryRecord(np.arange(n), xm, pm, tie)


def scaled_trajectory(params: ModelParams, tol: float = DEFAULT_TOL, allow_signed: bool = False):
    """Arrays (s, v) = (t/T, x_max/T)."""
    rec = argmax_trajectory(params, tol, allow_signed)
    return rec.t / params.T, rec.x_max / params.T


def interpolated_gap(s1, v1, s2, v2) -> float:
    """max |v1 − v2| with each curve linearly interpolated onto the other's grid."""
    g1 = np.abs(np.asarray(v1) - np.interp(s1, s2, v2)).max()
    g2 = np.abs(np.asarray(v2) - np.interp(s2, s1, v1)).max()
    return float(max(g1, g2))


def collapse_gap(params_a: ModelParams, params_b: ModelParams, tol: float = DEFAULT_TOL) -> float:
    return interpolated_gap(*scaled_trajectory(params_a, tol), *scaled_trajectory(params_b, tol))


def symmetry_residual(params: ModelParams, tol: float = DEFAULT_TOL) -> float:
    """Largest symmetry defect of the single-time laws.

    simplified (and classical): P(X(t)=x) vs P(X(2T−t)=−x);
    trig and elliptic: P(X(t)=x) vs P(X(2T−t)=x).
    """
    T = params.T
    reflect = params.family in (Family.SIMPLIFIED, Family.CLASSICAL)
    worst = 0.0
    for t in range(T + 1):
        p = single_time_distribution(t, params, tol).prob
        q = single_time_distribution(2 * T - t, params, tol).prob
        q = q[::-1] if reflect else q
        worst = max(worst, float(np.abs(p - q).max()))
    return worst


# sampler ---------------------------------------------------------------------------


def bridge_step_probabilities(params: ModelParams, tol: float = DEFAULT_TOL, method: str = "recursive"):
    """Per t, arrays (p_right, p_left) over the slice at t for the bridge's one-step law.

    p_right = q(t+1,x+1)·R(t+1,x+1)/R(t,x), p_left = R(t+1,x−1)/R(t,x) with
    R(t,x) = Q(t,x;2T,0), taken from the backward recursion or, with
    ``method="factorized"``, from the closed product form.
    """
    T2 = 2 * params.T
    if method == "recursive":
        rs, rl = transition_table_to_end(params, tol)
    elif method == "factorized":
        rs, rl = [], []
        for t in range(T2 + 1):
            vals = [transition_weight_factorized(t, int(x), T2, 0, params, tol) for x in slice_positions(t, params.T)]
            rs.append(np.array([v.sign for v in vals], dtype=np.int8))
            rl.append(np.array([v.log_mag for v in vals]))
    else:
        raise ParameterError(f"unknown method {method!r}")
    out = []
    for t in range(T2):
        xs = slice_positions(t, params.T)
        h1 = min(t + 1, T2 - t - 1)
        okr = xs + 1 <= h1
        okl = xs - 1 >= -h1
        pr = np.zeros(len(xs))
        pl = np.zeros(len(xs))
        if okr.any():
            qs, ql = elementary_weight_parts(np.full(okr.sum(), t + 1), xs[okr] + 1, params, tol)
            j = (xs[okr] + 1 + h1) // 2
            pr[okr] = qs * rs[t + 1][j] * rs[t][okr] * np.exp(ql + rl[t + 1][j] - rl[t][okr])
        if okl.any():
            j = (xs[okl] - 1 + h1) // 2
            pl[okl] = rs[t + 1][j] * rs[t][okl] * np.exp(rl[t + 1][j] - rl[t][okl])
        out.append((pr, pl))
    return out


def sample_positions(params: ModelParams, n_samples: int, seed=None, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Positions of ``n_samples`` bridge paths, shape (n_samples, 2T+1)."""
    require_certified(params, tol)
    if n_samples < 1:
        raise ParameterError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    steps = bridge_step_probabilities(params, tol)
    T2 = 2 * params.T
    pos = np.zeros((n_samples, T2 + 1), dtype=np.int64)
    for t in range(T2):
        h = min(t, T2 - t)
        pr = steps[t][0][(pos[:, t] + h) // 2]
        pos[:, t + 1] = pos[:, t] + np.where(rng.random(n_samples) < pr, 1, -1)
    return pos


def sample_paths(params: ModelParams, n_samples: int, seed=None, tol: float = DEFAULT_TOL) -> list[LatticePath]:
    pos = sample_positions(params, n_samples, seed, tol)
    start = SpacetimePoint(0, 0)
    return [LatticePath(start, tuple(int(d) for d in np.diff(row))) for row in pos]
