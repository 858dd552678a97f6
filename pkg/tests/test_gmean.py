import math
from fractions import Fraction

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from entmono.gmean import (
    Leaf,
    Node,
    SupportError,
    effective_weights,
    gmean_pair,
    gmean_pair_dual,
    gmean_scalars,
    gmean_tree,
    max_divergence_rank1,
    mean_property_margins,
    psd_leq,
    psd_power,
    random_psd,
    tree_from_weights,
    validate_tree,
)
from entmono.multilinear import sandwiched_divergence_rank1

seeds = st.integers(0, 10_000)


def oracle_mean(a, b, t):
    """Independent route through scipy's fractional matrix power."""
    bh = scipy.linalg.sqrtm(b)
    bi = np.linalg.inv(bh)
    return bh @ scipy.linalg.fractional_matrix_power(bi @ a @ bi, t) @ bh


# --- matrix powers -----------------------------------------------------------


def test_psd_power_examples():
    assert np.allclose(psd_power(np.diag([4.0, 9.0]), 0.5), np.diag([2.0, 3.0]))
    assert np.allclose(psd_power(np.diag([4.0, 0.0]), 0.5), np.diag([2.0, 0.0]))
    with pytest.raises(ValueError):
        psd_power(np.diag([1.0, -1.0]), 0.5)


@given(seeds, st.integers(1, 5))
def test_psd_power_round_trip(seed, d):
    a = random_psd(np.random.default_rng(seed), d, shift=0.1)
    assert np.allclose(psd_power(psd_power(a, 0.3), 1 / 0.3), a, atol=1e-9)
    assert np.allclose(psd_power(a, 0.5) @ psd_power(a, 0.5), a, atol=1e-10)


# --- two-variable mean -------------------------------------------------------


@given(seeds, st.integers(1, 5), st.sampled_from([0.1, 0.25, 0.5, 2 / 3, 0.9]))
def test_gmean_pair_matches_oracle(seed, d, t):
    rng = np.random.default_rng(seed)
    a, b = random_psd(rng, d, 0.05), random_psd(rng, d, 0.05)
    g = gmean_pair(a, b, t)
    assert np.allclose(g, oracle_mean(a, b, t), atol=1e-8)
    assert np.allclose(g, gmean_pair_dual(a, b, t), atol=1e-8)
    # symmetry: A #_t B = B #_{1-t} A
    assert np.allclose(g, gmean_pair(b, a, 1 - t), atol=1e-8)


@given(seeds, st.integers(1, 4))
def test_midpoint_mean_solves_riccati(seed, d):
    rng = np.random.default_rng(seed)
    a, b = random_psd(rng, d, 0.1), random_psd(rng, d, 0.1)
    g = gmean_pair(a, b, 0.5)
    assert np.allclose(g @ np.linalg.inv(b) @ g, a, atol=1e-8)


def test_commuting_operands_give_scalar_means():
    a, b = np.diag([1.0, 4.0, 9.0]), np.diag([16.0, 1.0, 0.25])
    for t in (0.2, 0.5, 0.8):
        expected = np.diag(np.diag(a) ** t * np.diag(b) ** (1 - t))
        assert np.allclose(gmean_pair(a, b, t), expected)
    assert np.allclose(gmean_pair(a, b, 0), b)
    assert np.allclose(gmean_pair(a, b, 1), a)
    with pytest.raises(ValueError):
        gmean_pair(a, b, 1.5)


def test_singular_operands():
    a = np.diag([1.0, 0.0])
    b = np.diag([4.0, 0.0])
    assert np.allclose(gmean_pair(a, b, 0.5), np.diag([2.0, 0.0]))
    assert np.allclose(gmean_pair(np.eye(2), np.zeros((2, 2)), 0.5), 0)
    # support of A not inside that of B
    with pytest.raises(SupportError):
        gmean_pair(np.eye(2), b, 0.5, strict=True)
    g = gmean_pair(np.eye(2), b, 0.5)
    assert np.allclose(g, np.diag([2.0, 0.0]), atol=1e-5)


# --- trees -------------------------------------------------------------------


def test_effective_weights_example():
    tree = Node(Node(Leaf(0), Leaf(1), Fraction(1, 2)), Leaf(2), Fraction(1, 2))
    assert effective_weights(tree) == [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]
    with pytest.raises(ValueError):
        validate_tree(Node(Leaf(0), Leaf(2), 0.5))
    with pytest.raises(ValueError):
        Node(Leaf(0), Leaf(1), 1.5)


@pytest.mark.parametrize("policy", ["balanced", "left-comb"])
@pytest.mark.parametrize(
    "theta",
    [
        [Fraction(1, 3)] * 3,
        [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)],
        [Fraction(1, 7), Fraction(2, 7), Fraction(0), Fraction(4, 7)],
        [Fraction(1)],
    ],
)
def test_tree_from_weights_reproduces_weights(policy, theta):
    assert effective_weights(tree_from_weights(theta, policy)) == theta


def test_tree_from_weights_errors():
    with pytest.raises(ValueError):
        tree_from_weights([0.5, 0.6])
    with pytest.raises(ValueError):
        tree_from_weights([Fraction(1, 2)] * 2, policy="zigzag")
    with pytest.raises(ValueError):
        tree_from_weights([])


def test_gmean_scalars():
    tree = tree_from_weights([Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)])
    assert gmean_scalars(tree, [4.0, 16.0, 1.0]) == pytest.approx(4.0)
    assert gmean_scalars(tree, [0.0, 16.0, 1.0]) == 0.0


@given(seeds)
def test_tree_mean_of_commuting_operands(seed):
    rng = np.random.default_rng(seed)
    diags = [rng.uniform(0.1, 3.0, 4) for _ in range(3)]
    tree = tree_from_weights([Fraction(1, 3)] * 3)
    expected = np.prod([d ** (1 / 3) for d in diags], axis=0)
    assert np.allclose(gmean_tree(tree, [np.diag(d) for d in diags]), np.diag(expected))


def test_gmean_tree_operand_count():
    with pytest.raises(ValueError):
        gmean_tree(tree_from_weights([Fraction(1, 2)] * 2), [np.eye(2)])


# --- order and divergences ---------------------------------------------------


def test_psd_leq_witness():
    res = psd_leq(np.diag([2.0, 0.0]), np.diag([1.0, 1.0]))
    assert not res
    assert res.margin == pytest.approx(-1.0)
    assert abs(abs(res.witness[0]) - 1.0) < 1e-12
    assert psd_leq(np.eye(2), 2 * np.eye(2))
    with pytest.raises(ValueError):
        psd_leq(np.eye(2), np.eye(3))


@given(seeds, st.integers(2, 5))
def test_max_divergence_dominates_sandwiched(seed, d):
    rng = np.random.default_rng(seed)
    a = random_psd(rng, d, 0.05)
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    dmax = max_divergence_rank1(psi, a)
    assert dmax == pytest.approx(math.log2(np.real(psi.conj() @ np.linalg.inv(a) @ psi)))
    for alpha in (0.3, 0.5, 0.8):
        assert sandwiched_divergence_rank1(psi, a, alpha) <= dmax + 1e-9


def test_max_divergence_support():
    assert max_divergence_rank1(np.array([1.0, 0.0]), np.diag([0.5, 0.0])) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        max_divergence_rank1(np.array([0.0, 1.0]), np.diag([0.5, 0.0]))
    with pytest.raises(ValueError):
        max_divergence_rank1(np.array([2.0, 0.0]), np.eye(2))


# --- sampled axioms ----------------------------------------------------------


@pytest.mark.parametrize("seed", range(8))
def test_mean_property_margins(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 6))
    tree = tree_from_weights([Fraction(1, 3)] * 3)
    ops = [random_psd(rng, d) for _ in range(3)]
    margins = mean_property_margins(tree, ops, rng)
    assert set(margins) == {"G1", "G2", "G3", "G4", "G5", "G6", "vector_lower", "expectation_upper"}
    for key, value in margins.items():
        assert value >= -1e-9, key
