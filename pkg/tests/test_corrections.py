import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from sparsegof.core_stats import kullback_g, pearson_q
from sparsegof.corrections import (
    CorrectionParams,
    CountVector,
    EpsPolicy,
    a_bounds,
    b_bounds,
    choose_ab,
    cond2_check,
    corrected_estimator,
    corrected_g,
    corrected_g_direct,
    corrected_q,
    corrected_q_direct,
    fallback_params,
    likelihood_inequality_oracle,
    sparsity_stats,
)

from conftest import RIVERS_COUNTS

SMALL = CountVector(np.array([0, 0, 3, 1]))


@st.composite
def sparse_counts(draw, max_R=30, max_n=400):
    R = draw(st.integers(3, max_R))
    n = draw(st.integers(2, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.full(R, draw(st.floats(0.1, 2.0))))
    return CountVector(rng.multinomial(n, p))


@st.composite
def admissible(draw):
    """Counts with zeros plus a random (a, b) strictly inside the admissible region."""
    cv = draw(sparse_counts())
    assume(cv.c > 0)
    stats = sparsity_stats(cv)
    assume(not stats.uniform)
    b_min, _ = b_bounds(cv, stats)
    b = b_min + (1 - b_min) * draw(st.floats(0.01, 0.99))
    a_min, a_max = a_bounds(b, cv, stats)
    assume(a_min < a_max)
    a = a_min + (a_max - a_min) * draw(st.floats(0.01, 0.99))
    seed = draw(st.integers(0, 2**32 - 1))
    null = np.random.default_rng(seed).dirichlet(np.ones(cv.R))
    assume(null.min() > 1e-12)
    return cv, CorrectionParams(a=a, b=b), null


# -- counts & sparsity ----------------------------------------------------

def test_count_vector_bookkeeping():
    assert SMALL.n == 4 and SMALL.R == 4 and SMALL.c == 2
    assert SMALL.zero_index.tolist() == [0, 1]
    assert SMALL.nonzero_index.tolist() == [2, 3]


@pytest.mark.parametrize("bad", [[0, 0], [1, -1, 2], [1.5, 2], [[1, 2], [3, 4]], [3]])
def test_count_vector_rejects(bad):
    with pytest.raises(ValueError):
        CountVector(np.array(bad))


def test_sparsity_small():
    s = sparsity_stats(SMALL)
    assert (s.n_lo, s.n_hi, s.n_lolo, s.n_hihi, s.uniform) == (1, 3, 2, 2, False)


def test_sparsity_uniform():
    assert sparsity_stats([2, 2, 2]).uniform


def test_sparsity_rivers():
    s = sparsity_stats(RIVERS_COUNTS)
    assert (s.n_lo, s.n_hi, s.n_lolo, s.n_hihi) == (1, 3, 10, 12)


# -- bounds ---------------------------------------------------------------

def test_b_min_small():
    b_min, b_max = b_bounds(SMALL)
    assert b_min == pytest.approx(0.5, abs=1e-15)
    assert b_max == 1.0


def test_b_min_rivers():
    b_min, _ = b_bounds(RIVERS_COUNTS)
    assert b_min == pytest.approx(math.log(10) / math.log(21), rel=1e-14)
    assert b_min == pytest.approx(0.756304, abs=1e-6)


def test_b_bounds_errors():
    with pytest.raises(ValueError):
        b_bounds([2, 2, 0])
    with pytest.raises(ValueError):
        b_bounds([3, 1, 2])


@settings(max_examples=300)
@given(sparse_counts())
def test_b_min_below_one(cv):
    assume(cv.c > 0 and not sparsity_stats(cv).uniform)
    assert b_bounds(cv)[0] < 1


def test_a_bounds_small_at_095():
    nb = 4 ** 0.95
    a_min, a_max = a_bounds(0.95, SMALL)
    # ((3 - nb) * 2 + nb) / (2 * nb) is positive for nb ~ 3.7321
    assert a_min == pytest.approx(((3 - nb) * 2 + nb) / (2 * nb), rel=1e-12)
    assert a_min == pytest.approx(0.30383, abs=1e-5)
    assert a_max == pytest.approx((nb - 2) / (nb * 10), rel=1e-12)
    assert a_max == pytest.approx(0.04641, abs=1e-5)


def test_a_bounds_at_b_one():
    s = sparsity_stats(SMALL)
    a_min, _ = a_bounds(1.0, SMALL)
    assert a_min == max(0.0, ((s.n_hi - 4) * 2 + 4) / (2 * 4))


@given(sparse_counts(), st.floats(0.0, 1.0))
def test_a_max_at_most_one(cv, t):
    assume(cv.c > 0 and not sparsity_stats(cv).uniform)
    b_min, _ = b_bounds(cv)
    assert a_bounds(b_min + t * (1 - b_min), cv)[1] <= 1


# -- choosing (a, b) ------------------------------------------------------

def test_choose_no_zeros_falls_back():
    params = choose_ab([3, 1, 2])
    assert params.fallback and params.a == 0 and params.b == 1


def test_choose_uniform_falls_back():
    params = choose_ab([0, 2, 2, 2])
    assert params.fallback and "equal" in params.reason


def test_choose_small_example_has_empty_a_interval():
    # b = 0.1 + 0.9 * 0.5; the displayed a_min exceeds a_max here
    params = choose_ab(SMALL)
    assert params.fallback
    assert params.b_min == pytest.approx(0.5)
    assert params.a_min > params.a_max
    assert "empty" in params.reason
    a_min, a_max = a_bounds(0.55, SMALL)
    assert params.a_min == a_min and params.a_max == a_max


def test_choose_rivers():
    params = choose_ab(RIVERS_COUNTS)
    assert not params.fallback
    assert params.b == pytest.approx(0.1 + 0.9 * math.log(10) / math.log(21))
    a_min, a_max = a_bounds(params.b, RIVERS_COUNTS)
    assert params.eps == pytest.approx(1e-3 * (a_max - a_min))
    assert params.a == pytest.approx(a_max - params.eps)


def test_eps_policy_and_h_are_configurable():
    p1 = choose_ab(RIVERS_COUNTS, h=0.3, eps_policy=EpsPolicy(0.5))
    assert p1.h == 0.3
    assert p1.b == pytest.approx(0.3 + 0.7 * p1.b_min)
    assert p1.a == pytest.approx(0.5 * (p1.a_min + p1.a_max))
    with pytest.raises(ValueError):
        EpsPolicy(0.0)
    with pytest.raises(ValueError):
        choose_ab(RIVERS_COUNTS, h=1.0)


@settings(max_examples=300)
@given(sparse_counts(), st.floats(0.01, 0.99))
def test_constructed_params_are_admissible(cv, h):
    params = choose_ab(cv, h=h)
    if params.fallback:
        assert params.a == 0 and params.b == 1
        return
    assert params.b_min < params.b < 1
    assert params.a_min < params.a < params.a_max
    p_hat = corrected_estimator(cv, params)
    assert np.all((p_hat > 0) & (p_hat < 1))
    assert math.fsum(p_hat) == pytest.approx(1.0, abs=1e-10)
    assert cond2_check(p_hat, cv)


# -- estimator ------------------------------------------------------------

def test_estimator_fallback_is_mle():
    cv = CountVector(np.array([0, 2, 5, 1]))
    assert np.array_equal(corrected_estimator(cv, fallback_params()), cv.counts / cv.n)


def test_estimator_formula_by_hand():
    params = CorrectionParams(a=0.04, b=0.55)
    delta = (0.08 + 4 ** 0.45 - 1) / 2
    expected = [0.04, 0.04, 3 / 4 ** 0.55 - delta, 1 / 4 ** 0.55 - delta]
    p_hat = corrected_estimator(SMALL, params)
    np.testing.assert_allclose(p_hat, expected, rtol=1e-13)
    assert math.fsum(p_hat) == pytest.approx(1.0, abs=1e-12)


def test_estimator_rejects_inconsistent_pairing():
    with pytest.raises(ValueError):
        corrected_estimator([1, 2, 3], CorrectionParams(a=0.01, b=0.5))


@given(admissible())
def test_estimator_sums_to_one(case):
    cv, params, _ = case
    assert math.fsum(corrected_estimator(cv, params)) == pytest.approx(1.0, abs=1e-10)


@given(admissible())
def test_admissible_region_gives_valid_estimator(case):
    cv, params, _ = case
    p_hat = corrected_estimator(cv, params)
    assert np.all((p_hat > 0) & (p_hat < 1))
    assert cond2_check(p_hat, cv)


def test_estimator_tends_to_mle_near_corner():
    cv = CountVector(np.array(RIVERS_COUNTS))
    mle = cv.mle()
    b_min, _ = b_bounds(cv)
    gaps = []
    for t in (0.5, 0.1, 1e-2, 1e-3, 1e-4, 1e-6):
        b = 1 - t * (1 - b_min)
        a_min, a_max = a_bounds(b, cv)
        params = CorrectionParams(a=a_min + t * (a_max - a_min), b=b)
        p_hat = corrected_estimator(cv, params)
        assert np.all(p_hat > 0)
        gaps.append(np.abs(p_hat - mle).max())
    assert all(g2 < g1 for g1, g2 in zip(gaps, gaps[1:]))
    assert gaps[-1] < 1e-5


# -- cond2 and the likelihood oracle ---------------------------------------

def test_cond2_examples():
    assert cond2_check([0.2, 0.3, 0.5], [1, 2, 3])
    # 0.001 <= 0.499 / 400 = 0.0012475
    assert cond2_check([0.001, 0.499, 0.5], [0, 200, 200])
    assert not cond2_check([0.002, 0.498, 0.5], [0, 200, 200])
    assert not cond2_check([0.01, 0.49, 0.5], [0, 0, 400])


def test_oracle_no_zeros():
    assert likelihood_inequality_oracle([0.2, 0.3, 0.5], [1, 2, 3])


def test_oracle_enumerated_example():
    # brute force with scipy.stats.multinomial finds (3, 2, 1) etc. more likely
    assert not likelihood_inequality_oracle([0.4, 0.3, 0.3], [0, 5, 1])


def test_oracle_rejects_large_instance():
    with pytest.raises(ValueError, match="too large"):
        likelihood_inequality_oracle(np.full(6, 1 / 6), [0, 1, 1, 1, 1, 1])
    with pytest.raises(ValueError, match="too large"):
        likelihood_inequality_oracle([0.5, 0.5], [0, 13])


def test_oracle_matches_scipy_enumeration():
    import itertools

    from scipy.stats import multinomial

    rng = np.random.default_rng(3)
    for _ in range(40):
        R = int(rng.integers(2, 5))
        n = int(rng.integers(1, 8))
        counts = rng.multinomial(n, rng.dirichlet(np.ones(R)))
        if counts.sum() == 0 or (counts == 0).sum() == 0:
            continue
        p = rng.dirichlet(np.ones(R))
        base = multinomial.pmf(counts, n, p)
        expected = True
        for y in itertools.product(*[range(k + 1) if k else range(n + 1) for k in counts]):
            if sum(y) == n and multinomial.pmf(y, n, p) > base * (1 + 1e-9):
                expected = False
                break
        assert likelihood_inequality_oracle(p, counts) is expected


@settings(max_examples=150, deadline=None)
@given(
    R=st.integers(2, 4),
    n=st.integers(1, 10),
    seed=st.integers(0, 2**32 - 1),
    shrink=st.floats(0.0, 1.0),
)
def test_cond2_implies_likelihood_inequality(R, n, seed, shrink):
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n, rng.dirichlet(np.ones(R)))
    assume(0 < (counts == 0).sum() < R)
    zero = counts == 0
    w = rng.dirichlet(np.ones(int((~zero).sum())))
    t = shrink * rng.uniform(size=int(zero.sum()))
    lam = 1.0 / (1.0 + t.sum() * w.min() / n)
    p = np.empty(R)
    p[~zero] = lam * w
    p[zero] = t * lam * w.min() / n
    assert cond2_check(p, counts)
    assert likelihood_inequality_oracle(p, counts)


# -- corrected statistics -------------------------------------------------

def test_fallback_statistics_equal_uncorrected():
    null = np.array([0.1, 0.2, 0.3, 0.4])
    counts = CountVector(np.array([3, 1, 4, 2]))
    params = choose_ab(counts)
    assert params.fallback
    assert corrected_q(null, counts, params) == pearson_q(null, counts.mle(), counts.n)
    assert corrected_g(null, counts, params) == kullback_g(null, counts.mle(), counts.n)
    assert corrected_q_direct(null, counts, params) == pearson_q(null, counts.mle(), counts.n)
    assert corrected_g_direct(null, counts, params) == kullback_g(null, counts.mle(), counts.n)


@settings(max_examples=500)
@given(admissible())
def test_closed_form_matches_direct(case):
    cv, params, null = case
    assert corrected_q(null, cv, params) == pytest.approx(corrected_q_direct(null, cv, params), rel=1e-8)
    assert corrected_g(null, cv, params) == pytest.approx(corrected_g_direct(null, cv, params), rel=1e-8)


def test_corrected_statistics_reject_structural_zero():
    with pytest.raises(ValueError):
        corrected_q([0.0, 0.5, 0.5], [0, 1, 2], fallback_params())


def test_corrected_g_rejects_invalid_params():
    with pytest.raises(ValueError, match="nonpositive"):
        corrected_g(np.full(4, 0.25), SMALL, CorrectionParams(a=0.04, b=0.55))


@given(admissible(), st.randoms(use_true_random=False))
def test_permutation_invariance(case, random):
    cv, _, null = case
    params = choose_ab(cv)
    perm = list(range(cv.R))
    random.shuffle(perm)
    cv2 = CountVector(cv.counts[perm])
    params2 = choose_ab(cv2)
    assert params2.a == params.a and params2.b == params.b
    for fn in (corrected_q, corrected_g):
        assert fn(null[perm], cv2, params2) == pytest.approx(fn(null, cv, params), rel=1e-12)
