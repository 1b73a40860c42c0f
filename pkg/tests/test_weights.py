import math
from functools import lru_cache

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from elliptic_excursions.errors import DomainError, ParameterError, PoleError
from elliptic_excursions.lattice import path_sum, rightward_step_points, slice_positions
from elliptic_excursions.signedlog import relative_difference
from elliptic_excursions.weights import (
    Family,
    LegacyParams,
    ModelParams,
    argument_vector,
    elementary_weight,
    q_binomial,
    schlosser_w,
    schlosser_wP,
    transition_weight_factorized,
    transition_weight_recursive,
)


def _pairs(T):
    pts = [(t, int(x)) for t in range(2 * T + 1) for x in slice_positions(t, T)]
    return [(a, b) for a in pts for b in pts if b[0] >= a[0]]


def random_params(seed, T):
    """Non-specialised parameters (signed measures are fine for identities)."""
    rng = np.random.default_rng(seed)
    r = rng.uniform(2, 8) * T
    a0, b0 = rng.uniform(-1, 1, 2) * r
    fam = ["elliptic", "trig", "simplified"][seed % 3]
    kappa = rng.uniform(0.3, 3) if fam == "elliptic" else None
    return ModelParams(fam, T, r, a0, b0, kappa)


FAMILIES = [
    ModelParams.simplified_sigma3(4),
    ModelParams.trig_sigma6(4),
    ModelParams.elliptic_sigma6(4, 1.0),
    ModelParams.classical(4),
]


def test_params_validation():
    with pytest.raises(ParameterError):
        ModelParams("elliptic", 3, 2.0)
    with pytest.raises(ParameterError):
        ModelParams("trig", 0, 2.0)
    with pytest.raises(ParameterError):
        ModelParams("trig", 3, -1.0)
    with pytest.raises(ParameterError):
        ModelParams("nonsense", 3, 1.0)
    with pytest.raises(ParameterError):
        ModelParams.from_ratios("trig", 3, sigma=3.0, r=2.0)
    p = ModelParams.from_ratios("trigonometric", 10, sigma=6.0, alpha0_over_r=0.1)
    assert p.family is Family.TRIG and p.r == pytest.approx(60 / math.pi)
    assert p.alpha == pytest.approx(p.alpha0 - 15.5) and p.beta == pytest.approx(p.beta0 - 15.5)
    assert p.lam == pytest.approx(29 / (2 * math.pi * p.r))
    assert ModelParams.classical(5).lam == 0.0


def test_legacy_params():
    p = ModelParams.elliptic_sigma6(5, 2.0)
    lp = LegacyParams.from_params(p)
    assert lp.q == pytest.approx(2 / p.r)
    assert lp.a == pytest.approx(2 * p.alpha / p.r)
    assert 0 < lp.nome_modulus < 1


def test_argument_vector_examples():
    T = 7
    p = ModelParams("trig", T, 5.0, 0.0, 0.0)
    av = argument_vector(0, 0, p)
    assert av.zeta[0] == pytest.approx(-(3 * T + 1) / (2 * 5.0))
    assert av.eta[3] == 0.0
    s3 = ModelParams.simplified_sigma3(10)
    for t, x in [(10, 0), (4, -2), (13, 5)]:
        av = argument_vector(t, x, s3)
        assert av.zeta[0] - av.eta[0] == pytest.approx((t - x) / s3.r, abs=1e-14)


@given(st.integers(0, 40), st.integers(-40, 40), st.integers(0, 20))
def test_argument_vector_offsets(t, x, seed):
    if (t + x) % 2:
        x += 1
    p = random_params(seed, 20)
    av = argument_vector(t, x, p)
    assert av.zeta[2] == pytest.approx(av.zeta[1] - 1 / p.r, abs=1e-13)
    assert av.zeta[4] == pytest.approx(av.zeta[3] + 1 / p.r, abs=1e-13)
    assert av.eta[2] == pytest.approx(av.eta[1] - 1 / p.r, abs=1e-13)
    assert av.eta[4] == pytest.approx(av.eta[3] + 1 / p.r, abs=1e-13)


def test_elementary_weight_examples():
    assert elementary_weight(3, 1, ModelParams.classical(4)).log_mag == 0.0
    p = ModelParams.simplified_sigma3(10)
    w = elementary_weight(10, 10, p)
    assert w.sign == 1 and w.log_mag == 0.0
    e, tr = ModelParams.elliptic_sigma6(20, 10.0), ModelParams.trig_sigma6(20)
    for pt in list(rightward_step_points(20))[::17]:
        a, b = elementary_weight(pt.t, pt.x, e), elementary_weight(pt.t, pt.x, tr)
        assert relative_difference(a, b) <= 1e-10


def test_simplified_weight_is_single_sine_ratio():
    p = ModelParams.simplified_sigma3(6)
    av = argument_vector(5, 1, p)
    assert elementary_weight(5, 1, p).to_float() == pytest.approx(math.sin(av.zeta[0]) / math.sin(av.eta[0]), rel=1e-14)


def test_pole_error_reports_index():
    # η₁ = (α + (t+x)/2)/r vanishes when α₀ = (3T+1)/2 − (t+x)/2
    T, t, x = 3, 2, 0
    p = ModelParams("trig", T, 4.0, (3 * T + 1) / 2 - 1, -1.0)
    with pytest.raises(PoleError) as err:
        elementary_weight(t, x, p)
    assert err.value.index == 1


def test_pole_freedom_under_certification():
    for p in (ModelParams.simplified_sigma3(30), ModelParams.trig_sigma6(30), ModelParams.elliptic_sigma6(30, 0.5)):
        for pt in rightward_step_points(30):
            assert elementary_weight(pt.t, pt.x, p).sign == 1


def test_transition_examples():
    for p in FAMILIES:
        one = transition_weight_factorized(2, 0, 2, 0, p)
        assert one.sign == 1 and one.log_mag == 0.0
        assert transition_weight_factorized(0, 0, 2, 4, p).is_zero
        assert transition_weight_factorized(0, 0, 3, 0, p).is_zero
    assert transition_weight_factorized(0, 0, 6, 0, ModelParams.classical(3)).to_float() == pytest.approx(20.0)
    p = ModelParams.elliptic_sigma6(4, 1.0)
    q = lru_cache(maxsize=None)(lambda t, x: elementary_weight(t, x, p))
    assert relative_difference(transition_weight_factorized(0, 0, 8, 0, p), path_sum((0, 0), (8, 0), q)) <= 1e-10


def test_single_step_recursion_base():
    p = ModelParams.trig_sigma6(5)
    for t, y in [(3, 1), (6, 2), (1, 1)]:
        up = transition_weight_recursive(t - 1, y - 1, t, y, p)
        assert relative_difference(up, elementary_weight(t, y, p)) <= 1e-15
        assert transition_weight_recursive(t - 1, y + 1, t, y, p).to_float() == 1.0
        assert relative_difference(transition_weight_factorized(t - 1, y - 1, t, y, p), up) <= 1e-13


@pytest.mark.parametrize("params", FAMILIES, ids=lambda p: p.family.value)
def test_factorized_equals_enumeration(params):
    q = lru_cache(maxsize=None)(lambda t, x: elementary_weight(t, x, params))
    worst = 0.0
    for (s, x), (t, y) in _pairs(params.T):
        worst = max(worst, relative_difference(transition_weight_factorized(s, x, t, y, params), path_sum((s, x), (t, y), q)))
    assert worst <= 1e-10


@pytest.mark.parametrize("seed", range(6))
def test_factorized_equals_enumeration_generic_parameters(seed):
    params = random_params(seed, 3)
    q = lru_cache(maxsize=None)(lambda t, x: elementary_weight(t, x, params))
    for (s, x), (t, y) in _pairs(3):
        a = transition_weight_factorized(s, x, t, y, params)
        assert relative_difference(a, path_sum((s, x), (t, y), q)) <= 1e-10
        assert relative_difference(a, transition_weight_recursive(s, x, t, y, params)) <= 1e-10


def test_schlosser_coordinate_map():
    p = ModelParams.elliptic_sigma6(6, 0.8)
    for pt in list(rightward_step_points(6))[::3]:
        n, m = (pt.t + pt.x) // 2, (pt.t - pt.x) // 2
        w = schlosser_w(n, m, p.alpha, p.beta, p.r, p.kappa)
        assert relative_difference(w, elementary_weight(pt.t, pt.x, p)) <= 1e-12


def test_schlosser_wP_matches_transition():
    p = ModelParams.elliptic_sigma6(4, 1.3)
    for (s, x), (t, y) in _pairs(4)[::7]:
        l, k, n, m = (s + x) // 2, (s - x) // 2, (t + y) // 2, (t - y) // 2
        if l > n or k > m:
            continue
        wp = schlosser_wP(l, k, n, m, p.alpha, p.beta, p.r, p.kappa)
        assert relative_difference(wp, transition_weight_factorized(s, x, t, y, p)) <= 1e-12


@given(
    st.integers(0, 3), st.integers(0, 3), st.integers(1, 4), st.integers(1, 4),
    st.floats(-3, 3), st.floats(-3, 3), st.floats(3, 12), st.floats(0.3, 3),
)
def test_schlosser_recursion(l, k, dn, dm, alpha, beta, r, kappa):
    n, m = l + dn, k + dm
    args = (alpha, beta, r, kappa)
    try:
        lhs = schlosser_wP(l, k, n, m, *args)
        a = schlosser_wP(l, k, n, m - 1, *args)
        b = schlosser_wP(l, k, n - 1, m, *args) * schlosser_w(n, m, *args)
    except PoleError:
        assume(False)
    rhs = a + b
    # the three terms may cancel, so compare against the largest term
    logs = [t.log_mag for t in (lhs, a, b) if not t.is_zero]
    assume(logs and max(logs) < 50)
    scale = math.exp(max(logs))
    assert abs(lhs.to_float() - rhs.to_float()) <= 1e-10 * scale


def test_schlosser_empty_products():
    w = schlosser_wP(2, 3, 2, 3, 0.4, -1.2, 5.0, 1.0)
    assert w.sign == 1 and w.log_mag == 0.0
    with pytest.raises(ParameterError):
        schlosser_wP(3, 0, 2, 1, 0.4, -1.2, 5.0, 1.0)


def test_q_binomial():
    assert q_binomial(4, 2, 1.0) == 6.0
    assert q_binomial(7, 0, 0.3) == 1.0
    q = 0.5
    assert q_binomial(4, 2, q) == pytest.approx((1 - q**3) * (1 - q**4) / ((1 - q) * (1 - q**2)), rel=1e-15)
    assert q_binomial(4, 2, 0.5) == pytest.approx((0.875 * 0.9375) / (0.5 * 0.75), rel=1e-15)
    with pytest.raises(DomainError):
        q_binomial(2, 3, 0.5)
    with pytest.raises(ParameterError):
        q_binomial(4, 2, 1.5)


@given(st.integers(0, 30), st.integers(0, 30), st.floats(0.01, 0.999))
def test_q_binomial_properties(n, k, q):
    if k > n:
        n, k = k, n
    assert q_binomial(n, k, q) == pytest.approx(q_binomial(n, n - k, q), rel=1e-12)
    if 0 < k < n:
        # q-Pascal rule
        rhs = q_binomial(n - 1, k - 1, q) + q**k * q_binomial(n - 1, k, q)
        assert q_binomial(n, k, q) == pytest.approx(rhs, rel=1e-10)


def test_q_binomial_continuous_at_one():
    assert q_binomial(10, 4, 1 - 1e-9) == pytest.approx(math.comb(10, 4), rel=1e-6)
