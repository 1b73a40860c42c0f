"""The invariant suite run by ``verify``: each check returns a residual and a pass flag."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from . import asymptotics as asy
from .errors import ExcursionError
from .lattice import path_sum, slice_positions
from .measures import (
    bridge_step_probabilities,
    ck_residual,
    positivity_check,
    single_time_distribution,
    single_time_distribution_recursive,
    symmetry_residual,
)
from .signedlog import relative_difference
from .theta import addition_formula_residual, theta1, theta1_product
from .weights import (
    ModelParams,
    elementary_weight,
    transition_weight_factorized,
    transition_weight_recursive,
)


@dataclass
class CheckResult:
    check_name: str
    status: str
    worst_residual: float
    threshold: float
    detail: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "status": self.status,
            "worst_residual": self.worst_residual,
            "threshold": self.threshold,
            **({"detail": self.detail} if self.detail else {}),
        }


def specializations(T: int, kappas=(0.5, 10.0)) -> list[ModelParams]:
    out = [ModelParams.simplified_sigma3(T), ModelParams.trig_sigma6(T)]
    out += [ModelParams.elliptic_sigma6(T, k) for k in kappas]
    return out


def all_families(T: int) -> list[ModelParams]:
    return specializations(T, kappas=(1.0,)) + [ModelParams.classical(T)]


def _pairs(T):
    pts = [(t, int(x)) for t in range(2 * T + 1) for x in slice_positions(t, T)]
    return [(a, b) for a in pts for b in pts if b[0] >= a[0]]


def _check_oddness(rng):
    v = rng.uniform(-3, 3, 500)
    worst = 0.0
    for k in (0.5, 1.0, 10.0):
        worst = max(worst, float(np.abs(theta1(-v, k) + theta1(v, k)).max()))
    return worst


def _check_integer_zeros(_):
    m = np.arange(-10, 11, dtype=float)
    return max(float(np.abs(theta1(m, k)).max()) for k in (0.5, 1.0, 10.0))


def _check_series_vs_product(rng):
    v = rng.uniform(-2, 2, 500)
    a, b = theta1(v, 1.0), theta1_product(v, 1.0)
    return float((np.abs(a - b) / np.maximum(np.abs(b), 1e-300)).max())


def _check_addition(rng):
    worst = 0.0
    for k in (0.5, 1.0, 10.0):
        x, y, u, v = rng.uniform(-1, 1, (4, 1000))
        worst = max(worst, float(np.max(addition_formula_residual(x, y, u, v, k))))
    return worst


def _check_enumeration(_):
    worst = 0.0
    for params in all_families(3):
        q = lru_cache(maxsize=None)(lambda t, x, p=params: elementary_weight(t, x, p))
        for (s, x), (t, y) in _pairs(3):
            a = transition_weight_factorized(s, x, t, y, params)
            worst = max(worst, relative_difference(a, path_sum((s, x), (t, y), q)))
    return worst


def _check_recursion(_):
    worst = 0.0
    for params in all_families(5):
        for (s, x), (t, y) in _pairs(5):
            a = transition_weight_factorized(s, x, t, y, params)
            worst = max(worst, relative_difference(a, transition_weight_recursive(s, x, t, y, params)))
    return worst


def _check_closed_form(_):
    worst = 0.0
    for params in all_families(20):
        for t in range(41):
            a = single_time_distribution(t, params).prob
            b = single_time_distribution_recursive(t, params).prob
            worst = max(worst, float((np.abs(a - b) / np.abs(b)).max()))
    return worst


def _check_ck(rng):
    params = ModelParams.elliptic_sigma6(5, 1.0)
    worst = 0.0
    for _ in range(20):
        s, u, t = sorted(rng.choice(11, 3, replace=False))
        x = int(rng.choice(slice_positions(s, 5)))
        y = int(rng.choice(slice_positions(t, 5)))
        worst = max(worst, ck_residual(int(s), x, int(u), int(t), y, params))
    return worst


def _check_normalization(_):
    worst = 0.0
    for params in specializations(50) + [ModelParams.classical(50)]:
        for t in range(101):
            worst = max(worst, abs(single_time_distribution(t, params).norm_residual))
    return worst


def _check_positivity(_):
    bad = [p.family.value for p in specializations(10) if not positivity_check(p).certified]
    return float(len(bad))


def _check_witness(_):
    params = ModelParams.from_ratios("simplified", 10, sigma=3.0, alpha0_over_r=0.01 * math.pi)
    rep = positivity_check(params)
    ok = (not rep.certified) and rep.witness is not None
    if ok:
        ok = elementary_weight(rep.witness.t, rep.witness.x, params).sign < 0
    return 0.0 if ok else 1.0


def _check_kappa_limit(_):
    worst = 0.0
    for T in (5, 20, 50):
        e, tr = ModelParams.elliptic_sigma6(T, 5.0), ModelParams.trig_sigma6(T)
        for t in range(2 * T + 1):
            a = single_time_distribution(t, e).prob
            b = single_time_distribution(t, tr).prob
            worst = max(worst, float((np.abs(a - b) / b).max()))
    return worst


def _check_r_limit(_):
    worst = 0.0
    # the gap grows like 2T²/r, so r = 1e8 meets 1e-6 only up to T ≈ 7
    for T in (3, 5):
        tr = ModelParams(family="trig", T=T, r=1e8, alpha0=1e8 * math.pi / 4, beta0=-1e8 * math.pi / 4)
        cl = ModelParams.classical(T)
        for t in range(2 * T + 1):
            a = single_time_distribution(t, tr).prob
            b = single_time_distribution(t, cl).prob
            worst = max(worst, float((np.abs(a - b) / b).max()))
    return worst


def _check_rate(rng):
    worst = 0.0
    for _ in range(10):
        s = rng.uniform(0.05, 1.95)
        w = min(s, 2 - s)
        v = rng.uniform(-0.95 * w, 0.95 * w)
        worst = max(worst, abs(asy.rate_integral(s, v).value - asy.rate_fourier(s, v).value))
    return worst


def _check_clt_density(_):
    from scipy import integrate

    mass = integrate.quad(asy.clt_density, -np.inf, np.inf)[0]
    var = integrate.quad(lambda x: x * x * asy.clt_density(x), -np.inf, np.inf)[0]
    return max(abs(mass - 1), abs(var - asy.CLT_VARIANCE))


def _check_sampler_steps(_):
    worst = 0.0
    for params in specializations(12):
        for pr, pl in bridge_step_probabilities(params, method="factorized"):
            worst = max(worst, float(np.abs(pr + pl - 1).max()))
    return worst


SUITE: list[tuple[str, Callable, float]] = [
    ("theta_oddness", _check_oddness, 0.0),
    ("theta_integer_zeros", _check_integer_zeros, 0.0),
    ("theta_series_vs_product", _check_series_vs_product, 1e-13),
    ("theta_addition_formula", _check_addition, 1e-12),
    ("transition_vs_enumeration", _check_enumeration, 1e-10),
    ("transition_factorized_vs_recursive", _check_recursion, 1e-10),
    ("distribution_closed_form_vs_recursion", _check_closed_form, 1e-10),
    ("chapman_kolmogorov", _check_ck, 1e-10),
    ("normalization", _check_normalization, 1e-9),
    ("symmetry_simplified", lambda _: symmetry_residual(ModelParams.simplified_sigma3(20)), 1e-12),
    ("symmetry_trig", lambda _: symmetry_residual(ModelParams.trig_sigma6(20)), 1e-12),
    ("positivity_specializations", _check_positivity, 0.0),
    ("positivity_witness", _check_witness, 0.0),
    ("degeneration_elliptic_to_trig", _check_kappa_limit, 1e-9),
    ("degeneration_trig_to_classical", _check_r_limit, 1e-6),
    ("rate_integral_vs_fourier", _check_rate, 1e-4),
    ("clt_density_moments", _check_clt_density, 1e-10),
    ("bridge_step_probabilities", _check_sampler_steps, 1e-12),
]


def configured_positivity(params: ModelParams) -> CheckResult:
    rep = positivity_check(params)
    detail = {"lambda": rep.lam, "failed_conditions": rep.failed_conditions()}
    if rep.witness is not None:
        detail["witness"] = {"t": rep.witness.t, "x": rep.witness.x}
    return CheckResult("positivity_configured", "pass" if rep.certified else "fail", 0.0 if rep.certified else 1.0, 0.0, detail)


def run_suite(seed: int = 0, params: Optional[ModelParams] = None) -> list[CheckResult]:
    results = []
    for name, fn, thr in SUITE:
        rng = np.random.default_rng(seed)
        try:
            res = float(fn(rng))
            status = "pass" if res <= thr else "fail"
            results.append(CheckResult(name, status, res, thr))
        except ExcursionError as exc:
            results.append(CheckResult(name, "error", math.inf, thr, {"error": str(exc)}))
    if params is not None:
        results.append(configured_positivity(params))
    return results
