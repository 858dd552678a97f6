"""Acceptance criteria, one test per criterion, at the stated tolerances.

Each test carries an ``acceptance`` marker; the conftest prints one PASS/FAIL
line per criterion in the terminal summary.
"""

import itertools
import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from entmono.cli import main
from entmono.functionals import (
    bipartite_closed_form,
    closed_lower_bound,
    closed_upper_bound,
    finite_n_log_value,
    spec_theta,
)
from entmono.gmean import mean_property_margins, random_psd, tree_from_weights
from entmono.multilinear import ghz_state, random_state, unit_tensor
from entmono.observables import Bipartite, elementary_gmean, verify_axioms
from entmono.partitions import (
    enumerate_partitions,
    irrep_dim,
    kronecker,
    kronecker_vanishing_violations,
    lr_vanishing_violations,
    renyi_entropy,
    weyl_dim,
)
from entmono.semiring import Functional, pair_projection, pair_sqrt_product, positive_pair_samples, positive_pairs, regularize
from entmono.multilinear import schmidt_spectrum
from entmono.schurweyl import isotypic_decompose

ALPHAS = (0.5, 0.75)


@pytest.mark.acceptance(1, "Schur-Weyl projector completeness, orthogonality and ranks (d<=3, n<=5)")
def test_criterion_1_schur_weyl_projectors():
    start = time.perf_counter()
    worst = 0.0
    for d in (1, 2, 3):
        for n in range(1, 6):
            total = d**n
            eye = np.eye(total)
            parts = isotypic_decompose(eye, (d,), n)
            worst = max(worst, np.abs(sum(parts.values()) - eye).max())
            for lam, p in parts.items():
                worst = max(worst, np.abs(p @ p - p).max())
                assert np.linalg.matrix_rank(p, tol=1e-6) == weyl_dim(lam, d) * irrep_dim(lam), (d, n, lam)
            for a, b in itertools.combinations(parts.values(), 2):
                worst = max(worst, np.abs(a @ b).max())
    elapsed = time.perf_counter() - start
    assert worst <= 1e-9, f"max deviation {worst:.3e}"
    assert elapsed <= 60.0, f"runtime {elapsed:.1f}s"


@pytest.mark.acceptance(2, "axioms O1-O5: bipartite (2,2),(2,3) and elementary mean (2,2,2); m,n in {1,2}")
def test_criterion_2_observable_axioms():
    start = time.perf_counter()
    configs = [(Bipartite(frozenset({0})), (2, 2)), (Bipartite(frozenset({0})), (2, 3)),
               (elementary_gmean(3, policy="balanced"), (2, 2, 2))]
    failures = []
    count = 0
    for spec, dims in configs:
        for alpha in ALPHAS:
            for sizes in itertools.product((1, 2), repeat=2):
                for r in verify_axioms(spec, dims, sizes, alpha, tol=1e-9, seed=0):
                    count += 1
                    if not r.passed or r.margin < -1e-9:
                        failures.append((alpha, sizes, r))
    elapsed = time.perf_counter() - start
    assert count > 0
    assert not failures, failures[:5]
    assert elapsed <= 300.0, f"runtime {elapsed:.1f}s"


@pytest.mark.acceptance(3, "bipartite closed form: 20 two-qubit states, alpha in {0.5, 0.75}; unit tensors F = r")
def test_criterion_3_bipartite_closed_form():
    d = 2
    spec = Bipartite(frozenset({0}))
    for seed in range(20):
        psi = random_state((2, 2), seed=seed).normalized()
        r = schmidt_spectrum(psi, {0})
        for alpha in ALPHAS:
            h = renyi_entropy(r, alpha)
            e = {n: finite_n_log_value(psi, spec, alpha, n) for n in range(1, 7)}
            for n, value in e.items():
                assert value <= h + 1e-9, (seed, alpha, n, value, h)
            for m in (1, 2, 3):
                assert e[2 * m] >= e[m] - 1e-12, (seed, alpha, m)
            slack = (d * (d + 1) / 2) * math.log2(6 + d) / 6 * max(1.0, alpha / (1 - alpha))
            assert abs(e[6] - h) <= slack, (seed, alpha, e[6], h)
    for r in (2, 3):
        for alpha in ALPHAS:
            assert abs(bipartite_closed_form(unit_tensor(r, 2), {0}, alpha) - r) <= 1e-9
            assert abs(bipartite_closed_form(unit_tensor(r, 3), {0}, alpha) - r) <= 1e-9


@pytest.mark.acceptance(4, "sandwich at desk scale: closed_lower <= max_{n<=4} e_n <= closed_upper; GHZ width <= 0.25")
def test_criterion_4_sandwich():
    """Assert exactly the stated inequalities; shortfalls are reported, not hidden.

    ``closed_lower`` bounds the limit ``E = sup_n e_n``, which ``e_n`` only
    reaches with an ``O(log n / n)`` deficit, so ``n <= 4`` can fall short.
    """
    spec = elementary_gmean(3)
    theta = spec_theta(spec, 3)
    problems = []
    for seed in range(20):
        psi = random_state((2, 2, 2), seed=seed).normalized()
        for alpha in ALPHAS:
            best = max(finite_n_log_value(psi, spec, alpha, n) for n in range(1, 5))
            lower = closed_lower_bound(psi, theta, alpha)
            upper = closed_upper_bound(psi, theta, alpha)
            if best > upper + 1e-9:
                problems.append(f"seed {seed} alpha {alpha}: max e_n {best:.4f} > upper {upper:.4f}")
            if lower > best:
                problems.append(f"seed {seed} alpha {alpha}: lower {lower:.4f} > max e_n {best:.4f}")
    ghz = ghz_state(2, 3)
    lower = closed_lower_bound(ghz, theta, 0.5)
    upper = closed_upper_bound(ghz, theta, 0.5)
    if abs(lower - 1.0) > 1e-9 or abs(upper - 1.0) > 1e-9:
        problems.append(f"GHZ closed bounds {lower}, {upper} != 1")
    e4 = max(finite_n_log_value(ghz, spec, 0.5, n) for n in range(1, 5))
    width = upper - e4
    if width > 0.25:
        problems.append(f"GHZ E-interval width at n=4 is {width:.4f} > 0.25 (max e_n {e4:.4f})")
    assert not problems, f"{len(problems)} violations; " + "; ".join(problems[:3])


@pytest.mark.acceptance(5, "geometric-mean axioms G1-G6, vector lower bound and expectation bound on 50 triples")
def test_criterion_5_gmean_properties():
    rng = np.random.default_rng(5)
    tree = tree_from_weights([Fraction(1, 3)] * 3, "balanced")
    worst = {}
    for _ in range(50):
        d = int(rng.integers(2, 9))
        ops = [random_psd(rng, d) for _ in range(3)]
        for key, value in mean_property_margins(tree, ops, rng, tol=1e-8).items():
            worst[key] = min(worst.get(key, math.inf), value)
    assert set(worst) >= {"G1", "G2", "G3", "G4", "G5", "G6", "vector_lower", "expectation_upper"}
    bad = {k: v for k, v in worst.items() if v < -1e-8}
    assert not bad, bad


@pytest.mark.acceptance(6, "Kronecker (n<=5) and LR (m+n<=6) entropic vanishing; Kronecker symmetry")
def test_criterion_6_vanishing():
    for n in range(1, 6):
        assert kronecker_vanishing_violations(n, tol=1e-12) == [], n
    assert lr_vanishing_violations(6, tol=1e-12) == []
    for n in range(1, 6):
        parts = enumerate_partitions(n)
        for triple in itertools.combinations_with_replacement(parts, 3):
            values = {kronecker(*p) for p in itertools.permutations(triple)}
            assert len(values) == 1, triple


@pytest.mark.acceptance(7, "semiring counterexamples: sqrt(ab) values; regularizing a multiplicative upper functional")
def test_criterion_7_semiring():
    g = pair_sqrt_product()
    assert [g((1.0, 1.0)), g((1.0, 4.0)), g((2.0, 5.0))] == [1.0, 2.0, math.sqrt(10)]
    S = positive_pairs()
    samples = positive_pair_samples(seed=0)
    for i in (0, 1):
        h = pair_projection(i)
        upper = Functional(f"h{i + 1}-upper", h.eval, "upper")
        for x in [(2.0, 5.0), (1.0, 4.0), (3.5, 0.25), (1.0, 1.0)]:
            seq = regularize(S, upper, x, samples, 6)
            assert all(abs(v - upper(x)) <= 1e-12 * upper(x) for v in seq), (i, x, seq)


@pytest.mark.acceptance(8, "determinism: two verify runs with identical config are byte-identical")
def test_criterion_8_determinism(tmp_path):
    outputs = []
    for i in range(2):
        target = tmp_path / f"run{i}.json"
        assert main(["verify", "--samples", "3", "--out", str(target)]) == 0
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1]
    assert json.loads(outputs[0])["passed"]
