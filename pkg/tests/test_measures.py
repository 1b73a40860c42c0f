import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from elliptic_excursions.errors import ParameterError, PositivityError
from elliptic_excursions.lattice import in_rightward_step_domain, slice_positions
from elliptic_excursions.measures import (
    argmax_trajectory,
    bridge_step_probabilities,
    ck_residual,
    collapse_gap,
    find_negative_weight,
    interpolated_gap,
    joint_measure,
    positivity_check,
    require_certified,
    sample_paths,
    sample_positions,
    single_time_distribution,
    single_time_distribution_recursive,
    symmetry_residual,
)
from elliptic_excursions.weights import ModelParams, elementary_weight

from oracles import (
    elliptic_sigma6_law,
    enumerated_law,
    simplified_sigma3_law,
    slice_sum,
    trig_sigma6_law,
)

SPECIAL = {
    "simplified": (ModelParams.simplified_sigma3, simplified_sigma3_law, ()),
    "trig": (ModelParams.trig_sigma6, trig_sigma6_law, ()),
    "elliptic": (lambda T: ModelParams.elliptic_sigma6(T, 0.5), elliptic_sigma6_law, (0.5,)),
}


def test_classical_small_cases_exact():
    p = ModelParams.classical(1)
    assert single_time_distribution(1, p).support == [(-1, 0.5), (1, 0.5)]
    assert single_time_distribution(2, p).support == [(0, 1.0)]
    d = single_time_distribution(2, ModelParams.classical(2))
    assert d.support == [(-2, 1 / 6), (0, 2 / 3), (2, 1 / 6)]


@pytest.mark.parametrize("name", list(SPECIAL))
def test_specialized_closed_forms(name):
    make, law, extra = SPECIAL[name]
    for T in (3, 6, 11):
        p = make(T)
        for t in range(2 * T + 1):
            d = single_time_distribution(t, p)
            want = np.array([float(law(t, int(x), T, *extra)) for x in d.x])
            np.testing.assert_allclose(d.prob, want, rtol=1e-11, atol=1e-300)


def test_printed_elliptic_form_does_not_normalize():
    sums = [float(slice_sum(lambda t, x, T: elliptic_sigma6_law(t, x, T, 0.5, literal=True), t, 5)) for t in (2, 5, 7)]
    assert all(abs(s - 1) > 0.1 for s in sums)
    assert float(slice_sum(elliptic_sigma6_law, 5, 5, 0.5)) == pytest.approx(1.0, abs=1e-20)


@pytest.mark.parametrize("seed", range(4))
def test_closed_form_matches_enumeration_for_generic_signed_measures(seed):
    rng = np.random.default_rng(100 + seed)
    T = 4
    fam = ["trig", "elliptic", "simplified", "trig"][seed]
    r = rng.uniform(3, 6) * T
    p = ModelParams(fam, T, r, rng.uniform(-1, 1) * r, rng.uniform(-1, 1) * r, 0.7 if fam == "elliptic" else None)
    for t in range(1, 2 * T):
        d = single_time_distribution(t, p)
        want = np.array([enumerated_law(t, int(x), p) for x in d.x])
        np.testing.assert_allclose(d.prob, want, rtol=1e-9, atol=1e-12 * np.abs(want).max())


@pytest.mark.parametrize("name", list(SPECIAL))
def test_closed_form_matches_recursive_route(name):
    p = SPECIAL[name][0](40)
    for t in (1, 17, 40, 63, 79):
        a = single_time_distribution(t, p).prob
        b = single_time_distribution_recursive(t, p).prob
        np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-300)


def test_distribution_rejects_bad_time():
    p = ModelParams.trig_sigma6(5)
    for t in (-1, 11):
        with pytest.raises(ParameterError):
            single_time_distribution(t, p)


def test_normalization_large_T():
    for p in (ModelParams.simplified_sigma3(200), ModelParams.elliptic_sigma6(200, 0.5)):
        for t in (1, 57, 200, 333, 399):
            d = single_time_distribution(t, p)
            assert abs(d.prob.sum() - 1) <= 1e-10
            assert d.norm_residual <= 1e-10
            assert (d.prob >= 0).all()


def test_positivity_reports():
    for make, *_ in SPECIAL.values():
        rep = positivity_check(make(10))
        assert rep.certified and rep.witness is None and rep.failed_conditions() == []
    assert positivity_check(ModelParams.simplified_sigma3(10)).cond_B3 is None
    assert positivity_check(ModelParams.classical(10)).certified


def test_witness_for_broken_B2():
    base = ModelParams.trig_sigma6(10)
    bad = base.with_(alpha0=-0.2 * base.r)
    rep = positivity_check(bad)
    assert not rep.certified and "B2" in rep.failed_conditions()
    w = rep.witness
    assert w is not None and in_rightward_step_domain(w, 10)
    assert elementary_weight(w.t, w.x, bad).sign < 0
    with pytest.raises(PositivityError, match=f"t={w.t}, x={w.x}"):
        require_certified(bad)
    # the witness is the first negative weight in (t, x) order
    for t in range(1, w.t + 1):
        for x in slice_positions(t, 10):
            if (t, x) < (w.t, w.x) and in_rightward_step_domain((t, int(x)), 10):
                assert elementary_weight(t, int(x), bad).sign >= 0


@settings(max_examples=40)
@given(
    st.sampled_from(["trig", "elliptic", "simplified"]),
    st.integers(2, 12),
    st.floats(4.0, 12.0),
    st.floats(0.05, 3.1),
    st.floats(-3.1, -0.05),
)
def test_certified_parameters_have_no_negative_weight(fam, T, sigma, a, b):
    p = ModelParams.from_ratios(fam, T, sigma=sigma, alpha0_over_r=a, beta0_over_r=b, kappa=0.8 if fam == "elliptic" else None)
    rep = positivity_check(p)
    assume(rep.certified)
    assert find_negative_weight(p) is None


def test_joint_measure_and_ck():
    p = ModelParams.elliptic_sigma6(6, 1.0)
    # one-time marginal of the joint measure is the single-time law
    d = single_time_distribution(5, p)
    for x, prob in d.support:
        assert joint_measure([5], [x], p).to_float() == pytest.approx(prob, rel=1e-12)
    # summing a two-time measure over the later position returns the marginal
    total = sum(joint_measure([5, 8], [1, int(y)], p).to_float() for y in slice_positions(8, 6))
    assert total == pytest.approx(d.prob_at(1), rel=1e-12)
    assert joint_measure([3], [0], p).is_zero
    with pytest.raises(ParameterError):
        joint_measure([4, 4], [0, 0], p)
    for args in [(0, 0, 3, 7, 1), (2, 0, 6, 12, 0), (1, 1, 5, 9, -1)]:
        assert ck_residual(*args, p) <= 1e-12


def test_argmax_trajectory_basics():
    rec = argmax_trajectory(ModelParams.classical(6))
    assert rec.T == 6
    # even times peak at 0; odd times tie at ±1 and the smaller x wins
    assert (rec.x_max[::2] == 0).all() and not rec.tie_flag[::2].any()
    assert (rec.x_max[1::2] == -1).all() and rec.tie_flag[1::2].all()
    with pytest.raises(PositivityError):
        argmax_trajectory(ModelParams.trig_sigma6(8).with_(alpha0=-2.0))


def test_symmetries():
    for make, *_ in SPECIAL.values():
        assert symmetry_residual(make(30)) <= 1e-12
    assert symmetry_residual(ModelParams.classical(12)) <= 1e-15


def test_alpha_beta_swap_reflects_trig_law():
    p = ModelParams.trig_sigma6(20)
    q = p.with_(alpha0=p.beta0, beta0=p.alpha0)
    assert find_negative_weight(q) is None
    for t in range(41):
        a = single_time_distribution(t, p).prob
        b = single_time_distribution(t, q).prob[::-1]
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-300)
    ra, rb = argmax_trajectory(p), argmax_trajectory(q, allow_signed=True)
    assert (ra.x_max == -rb.x_max).all() or (ra.tie_flag | rb.tie_flag).any()


def test_unimodal_laws():
    p = ModelParams.trig_sigma6(30)
    for t in (10, 30, 45):
        prob = single_time_distribution(t, p).prob
        k = int(prob.argmax())
        assert (np.diff(prob[: k + 1]) >= 0).all() and (np.diff(prob[k:]) <= 0).all()


def test_small_kappa_moves_trajectory_further():
    trig = ModelParams.trig_sigma6(40)
    g_small = collapse_gap(ModelParams.elliptic_sigma6(40, 0.5), trig)
    g_large = collapse_gap(ModelParams.elliptic_sigma6(40, 10.0), trig)
    assert g_small >= g_large


def test_interpolated_gap():
    s = np.linspace(0, 2, 5)
    assert interpolated_gap(s, s * 0, s, s * 0 + 0.25) == pytest.approx(0.25)
    assert interpolated_gap(s, s, np.linspace(0, 2, 9), np.linspace(0, 2, 9)) == 0.0


def test_step_probabilities_sum_to_one():
    p = ModelParams.elliptic_sigma6(15, 2.0)
    for pr, pl in bridge_step_probabilities(p, method="factorized"):
        np.testing.assert_allclose(pr + pl, 1.0, atol=1e-12)
        assert (pr >= 0).all() and (pl >= 0).all()
    with pytest.raises(ParameterError):
        bridge_step_probabilities(p, method="nope")


def test_sampler_paths_and_reproducibility():
    p = ModelParams.trig_sigma6(8)
    a = sample_positions(p, 500, seed=3)
    b = sample_positions(p, 500, seed=3)
    assert (a == b).all()
    assert a.shape == (500, 17) and (a[:, 0] == 0).all() and (a[:, -1] == 0).all()
    assert (np.abs(np.diff(a, axis=1)) == 1).all()
    for t in range(17):
        assert (np.abs(a[:, t]) <= min(t, 16 - t)).all()
    paths = sample_paths(p, 3, seed=1)
    assert all(path.end.x == 0 and path.end.t == 16 for path in paths)
    with pytest.raises(ParameterError):
        sample_positions(p, 0)


def test_sampler_two_time_marginal():
    p = ModelParams.elliptic_sigma6(6, 0.7)
    pos = sample_positions(p, 40000, seed=11)
    n = len(pos)
    for x, y in [(1, 0), (-1, -2), (3, 2)]:
        exact = joint_measure([5, 8], [x, y], p).to_float()
        emp = np.mean((pos[:, 5] == x) & (pos[:, 8] == y))
        se = math.sqrt(max(exact * (1 - exact), 1e-12) / n)
        assert abs(emp - exact) <= 5 * se
