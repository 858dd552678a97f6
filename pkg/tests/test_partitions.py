import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entmono.partitions import (
    as_partition,
    binary_entropy,
    centralizer_order,
    character_table,
    class_size,
    conjugate,
    enumerate_partitions,
    hook_length_dim,
    irrep_dim,
    kronecker,
    kronecker_vanishing_violations,
    littlewood_richardson,
    lr_vanishing_violations,
    mn_character,
    partition_count,
    partition_entropy,
    relative_entropy,
    renyi_entropy,
    shannon_entropy,
    weyl_dim,
)


def brute_partitions(n):
    """All nonincreasing tuples summing to n, by filtering compositions."""
    out = set()
    for k in range(1, n + 1):
        for combo in itertools.product(range(1, n + 1), repeat=k):
            if sum(combo) == n and list(combo) == sorted(combo, reverse=True):
                out.add(combo)
    return out


# --- enumeration -------------------------------------------------------------


def test_enumerate_four():
    assert len(enumerate_partitions(4)) == 5
    assert set(enumerate_partitions(4, max_len=2)) == {(4,), (3, 1), (2, 2)}


def test_enumerate_zero():
    assert enumerate_partitions(0) == [()]


@pytest.mark.parametrize("n", range(1, 8))
def test_enumerate_matches_bruteforce_and_count(n):
    parts = enumerate_partitions(n)
    assert set(parts) == brute_partitions(n)
    assert len(parts) == len(set(parts)) == partition_count(n)
    assert parts == sorted(parts, reverse=True)


def test_as_partition_rejects_bad_input():
    assert as_partition([3, 1, 0]) == (3, 1)
    with pytest.raises(ValueError):
        as_partition([1, 3])
    with pytest.raises(ValueError):
        as_partition([2, -1])


def test_conjugate_and_class_sizes():
    assert conjugate((3, 1)) == (2, 1, 1)
    assert centralizer_order((2, 1)) == 2
    for n in range(1, 7):
        assert sum(class_size(c) for c in enumerate_partitions(n)) == math.factorial(n)


# --- entropies ---------------------------------------------------------------


def test_shannon_examples():
    assert shannon_entropy([0.25] * 4) == pytest.approx(2.0, abs=1e-15)
    assert shannon_entropy([1.0, 0.0]) == 0.0
    assert shannon_entropy([0.3, 0.7]) == pytest.approx(0.8812908992306927, abs=1e-12)


def test_shannon_rejects_unnormalized():
    with pytest.raises(ValueError):
        shannon_entropy([0.5, 0.6])


def test_renyi_examples():
    assert renyi_entropy([1.0, 0.0, 0.0], 0.5) == 0.0
    assert renyi_entropy([0.3, 0.7], 0.5) == pytest.approx(2 * math.log2(math.sqrt(0.3) + math.sqrt(0.7)), abs=1e-14)
    assert renyi_entropy([0.3, 0.7], 0.5) == pytest.approx(0.9384853943, abs=1e-9)
    for r in (2, 3, 7):
        for a in (0.25, 0.5, 2.0, math.inf):
            assert renyi_entropy([1 / r] * r, a) == pytest.approx(math.log2(r), abs=1e-12)


def test_renyi_limits():
    p = [0.2, 0.5, 0.3]
    assert renyi_entropy(p, 1.0) == shannon_entropy(p)
    assert renyi_entropy(p, math.inf) == pytest.approx(-math.log2(0.5))
    assert renyi_entropy(p, 1 - 1e-7) == pytest.approx(shannon_entropy(p), abs=1e-6)
    with pytest.raises(ValueError):
        renyi_entropy([-0.1, 1.1], 0.5)


def test_renyi_nonincreasing_in_alpha_on_random_vectors():
    rng = np.random.default_rng(7)
    orders = [0.25, 0.5, 0.75, 2.0]
    for _ in range(100):
        p = rng.dirichlet(np.ones(int(rng.integers(2, 6))))
        values = [renyi_entropy(p, a) for a in orders]
        assert all(x >= y - 1e-12 for x, y in zip(values, values[1:]))


def test_binary_entropy():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0 == binary_entropy(1.0)
    assert binary_entropy(0.11) == pytest.approx(0.4999157, abs=1e-6)
    with pytest.raises(ValueError):
        binary_entropy(1.5)


def test_relative_entropy_and_partition_entropy():
    assert relative_entropy([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert relative_entropy([1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)
    assert partition_entropy((2, 2)) == pytest.approx(1.0)
    assert partition_entropy((3,)) == 0.0


# --- characters --------------------------------------------------------------


def test_character_examples():
    for cls in enumerate_partitions(5):
        assert mn_character((5,), cls) == 1
    assert mn_character((1, 1, 1), (2, 1)) == -1
    assert mn_character((2, 1), (1, 1, 1)) == 2
    with pytest.raises(ValueError):
        mn_character((2, 1), (2,))


def test_s3_table_against_known_values():
    lams, table = character_table(3)
    known = {(3,): [1, 1, 1], (2, 1): [2, 0, -1], (1, 1, 1): [1, -1, 1]}
    classes = enumerate_partitions(3)  # (3,), (2,1), (1,1,1)
    for lam, row in zip(lams, table):
        by_class = dict(zip(classes, row))
        assert [by_class[(1, 1, 1)], by_class[(2, 1)], by_class[(3,)]] == known[lam]


@pytest.mark.parametrize("n", range(1, 7))
def test_column_orthogonality(n):
    lams, table = character_table(n)
    classes = enumerate_partitions(n)
    sizes = np.array([class_size(c) for c in classes], dtype=object)
    for i, lam in enumerate(lams):
        for j, mu in enumerate(lams):
            total = sum(sizes[c] * int(table[i][c]) * int(table[j][c]) for c in range(len(classes)))
            assert total == (math.factorial(n) if i == j else 0)


@given(st.integers(1, 8).flatmap(lambda n: st.sampled_from(enumerate_partitions(n))))
def test_irrep_dim_matches_hook_length(lam):
    assert irrep_dim(lam) == hook_length_dim(lam)


@pytest.mark.parametrize("d", [1, 2, 3, 4])
@pytest.mark.parametrize("n", range(1, 7))
def test_schur_weyl_dimension_count(d, n):
    assert sum(weyl_dim(lam, d) * irrep_dim(lam) for lam in enumerate_partitions(n)) == d**n


# --- coefficients ------------------------------------------------------------


def test_kronecker_examples():
    for n in range(1, 6):
        parts = enumerate_partitions(n)
        for mu in parts:
            for nu in parts:
                assert kronecker((n,), mu, nu) == (1 if mu == nu else 0)
    assert kronecker((2, 1), (2, 1), (2, 1)) == 1
    with pytest.raises(ValueError):
        kronecker((2, 1), (2,), (2, 1))


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(*[st.sampled_from(enumerate_partitions(n))] * 3)))
def test_kronecker_symmetric(triple):
    values = {kronecker(*p) for p in itertools.permutations(triple)}
    assert len(values) == 1
    assert values.pop() >= 0


def test_lr_examples():
    assert littlewood_richardson((2, 1), (2,), (1,)) == 1
    for m in range(1, 4):
        for n in range(1, 4):
            assert littlewood_richardson((m + n,), (m,), (n,)) == 1
    with pytest.raises(ValueError):
        littlewood_richardson((2, 1), (2,), (2,))


def test_lr_branching_rule():
    # restriction S_{n} -> S_{n-1} x S_1: c^lam_{mu,(1)} = 1 iff mu is lam minus a corner
    for lam in enumerate_partitions(5):
        for mu in enumerate_partitions(4):
            padded = list(mu) + [0] * (len(lam) - len(mu))
            diff = [a - b for a, b in zip(lam, padded)]
            corner = len(mu) <= len(lam) and sorted(diff) == [0] * (len(diff) - 1) + [1]
            assert littlewood_richardson(lam, mu, (1,)) == int(corner)


def test_weyl_dim_examples():
    for d in range(1, 5):
        for n in range(0, 5):
            assert weyl_dim((n,) if n else (), d) == math.comb(d + n - 1, n)
    assert weyl_dim((2, 1), 2) == 2
    assert weyl_dim((1, 1, 1), 2) == 0


def test_vanishing_conditions_small():
    for n in range(1, 5):
        assert kronecker_vanishing_violations(n) == []
    assert lr_vanishing_violations(5) == []
