import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from entmono.multilinear import ghz_state, random_state, unit_tensor, w_state
from entmono.semiring import (
    BudgetExceeded,
    Functional,
    abstract_rank,
    abstract_subrank,
    asymptotic_rank_estimate,
    check_functional,
    check_normalization_equivalences,
    check_semiring,
    gmean_functionals,
    naturals,
    pair_max,
    pair_min,
    pair_projection,
    pair_sqrt_product,
    positive_pair_samples,
    positive_pairs,
    rank_functional,
    regularize,
    regularize_sup,
    subrank_functional,
    sup_polynomial_value,
    tensor_surrogate,
)

PP = positive_pairs()
SAMPLES = positive_pair_samples(seed=0)


# --- semirings ---------------------------------------------------------------


def test_semiring_axioms_hold_on_samples():
    assert check_semiring(naturals(), list(range(6))) == []
    assert check_semiring(PP, SAMPLES) == []


def test_positive_pairs_rejects_mixed_zero():
    with pytest.raises(ValueError):
        PP.add((0.0, 0.0), (0.0, 1.0))
    assert PP.nat(3) == (3.0, 3.0)
    assert PP.power((2.0, 3.0), 3) == (8.0, 27.0)


def test_tensor_surrogate_semiring():
    S = tensor_surrogate(3)
    samples = [unit_tensor(1, 3), unit_tensor(2, 3), w_state(3), ghz_state(2, 3)]
    assert check_semiring(S, samples, nat_range=range(4)) == []
    assert abstract_rank(S, w_state(3), 16) == 2
    assert abstract_subrank(S, w_state(3), 16) == 2
    assert abstract_rank(S, random_state((2, 2, 3), seed=0), 16) == 3


# --- rank and subrank --------------------------------------------------------


@pytest.mark.parametrize(
    "x,rank,subrank",
    [((1.0, 4.0), 4, 1), ((2.0, 5.0), 5, 2), ((1.0, 1.0), 1, 1), ((0.0, 0.0), 0, 0), ((2.5, 2.5), 3, 2)],
)
def test_pair_ranks(x, rank, subrank):
    assert abstract_rank(PP, x, 1 << 10) == rank
    assert abstract_subrank(PP, x, 1 << 10) == subrank


@given(st.integers(0, 10_000))
def test_naturals_rank_is_identity(n):
    assert abstract_rank(naturals(), n, 1 << 16) == n
    assert abstract_subrank(naturals(), n, 1 << 16) == n


def test_rank_bound_exhausted():
    assert abstract_rank(PP, (100.0, 1.0), 10) is None
    with pytest.raises(BudgetExceeded):
        rank_functional(PP, 10)((100.0, 1.0))


def test_asymptotic_rank_sequence():
    seq = asymptotic_rank_estimate(PP, (2.0, 3.0), 6)
    assert seq.ranks == [3, 9, 27, 81, 243, 729]
    assert all(r == pytest.approx(3.0) for r in seq.roots)
    assert seq.submultiplicative and seq.nonincreasing_doubling
    seq = asymptotic_rank_estimate(PP, (1.5, 1.2), 8)
    assert seq.roots[-1] <= seq.roots[0]
    assert seq.roots[-1] >= 1.5 - 1e-12
    assert seq.submultiplicative


# --- functionals -------------------------------------------------------------


@pytest.mark.parametrize(
    "f",
    [pair_projection(0), pair_projection(1), pair_sqrt_product(), pair_max(), pair_min()],
    ids=lambda f: f.name,
)
def test_pair_functionals_satisfy_their_kind(f):
    assert check_functional(PP, f, SAMPLES) == []


@pytest.mark.parametrize("f", [pair_sqrt_product(), pair_max(), pair_min()], ids=lambda f: f.name)
def test_means_and_extremes_are_not_spectral(f):
    spectral = Functional(f.name, f.eval, "spectral-candidate")
    assert check_functional(PP, spectral, SAMPLES)


def test_sqrt_product_values():
    g = pair_sqrt_product()
    assert [g((1.0, 1.0)), g((1.0, 4.0)), g((2.0, 5.0))] == [1.0, 2.0, math.sqrt(10)]
    assert g((0.0, 0.0)) == 0.0


def test_gmean_functionals_validation():
    lower = Functional("a", lambda x: x[0], "lower")
    with pytest.raises(ValueError):
        gmean_functionals([pair_max()], [1])
    with pytest.raises(ValueError):
        gmean_functionals([lower, lower], [Fraction(1, 2), Fraction(1, 3)])
    with pytest.raises(ValueError):
        gmean_functionals([lower], [Fraction(1, 2), Fraction(1, 2)])
    with pytest.raises(ValueError):
        Functional("bad", lambda x: 0.0, "sideways")


def test_rank_and_subrank_functionals():
    assert check_functional(PP, rank_functional(PP, 1 << 10), [(0.0, 0.0), (1.0, 1.0), (1.0, 4.0), (2.0, 2.0)]) == []
    assert check_functional(PP, subrank_functional(PP, 1 << 10), [(0.0, 0.0), (1.0, 1.0), (2.0, 5.0), (3.0, 3.0)]) == []


# --- regularization ----------------------------------------------------------


def test_regularize_spectral_point_is_fixed():
    assert regularize(PP, pair_projection(0), (2.0, 5.0), SAMPLES, 5) == [2.0] * 5


def test_regularize_upper_functional_stays_between_components():
    values = regularize(PP, pair_max(), (2.0, 5.0), SAMPLES, 5)
    assert all(2.0 - 1e-12 <= v <= 5.0 + 1e-12 for v in values)


def test_regularize_rejects_lower_functionals():
    with pytest.raises(ValueError):
        regularize(PP, pair_sqrt_product(), (2.0, 5.0), SAMPLES, 3)


def test_monomial_sup_of_lower_functional_is_stuck():
    values = regularize_sup(PP, pair_sqrt_product(), (2.0, 0.5), SAMPLES, 6)
    assert all(v == pytest.approx(1.0) for v in values)


def test_polynomial_sup_of_lower_functional_approaches_max():
    g = pair_sqrt_product()
    values = [
        sup_polynomial_value(g, (2.0, 0.5), range(1, d + 1), [2**j for j in range(m)])[0]
        for d, m in [(4, 6), (8, 12), (16, 24)]
    ]
    assert values[0] < values[1] < values[2] <= 2.0 + 1e-9
    assert values[2] > 1.9


# --- normalization -----------------------------------------------------------


def test_normalization_conditions_agree_for_rank():
    rep = check_normalization_equivalences(PP, rank_functional(PP, 1 << 12), pair_min(), SAMPLES)
    assert rep.consistent and rep.eq_n and rep.ge_subrank and rep.dominates_lower
    assert rep.violations == []


def test_normalization_detects_scaled_rank():
    rank = rank_functional(PP, 1 << 12)
    doubled = Functional("2rank", lambda x: 2 * rank(x), "upper")
    rep = check_normalization_equivalences(PP, doubled, pair_min(), SAMPLES)
    assert not rep.consistent
    assert rep.ge_n and not rep.eq_n
    assert rep.violations
