"""Preordered semirings, abstract upper/lower functionals, rank, subrank and regularization.

Universal statements are only *sampled*: the helpers here evaluate axioms and
functional inequalities on finite sets of elements and report violations.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .multilinear import MultipartiteState, direct_sum, flattening_ranks, tensor_product, unit_tensor

REAL_TOL = 1e-9

Element = Any


class BudgetExceeded(RuntimeError):
    """A search or power computation ran past its budget."""


@dataclass(frozen=True)
class SemiringOracle:
    """A commutative preordered semiring given by its operations.

    ``leq(x, y)`` decides ``x <= y`` in the preorder and ``nat(n)`` embeds the
    natural number ``n``. ``eq`` defaults to mutual ``leq``.
    """

    name: str
    add: Callable[[Element, Element], Element]
    mul: Callable[[Element, Element], Element]
    zero: Element
    one: Element
    leq: Callable[[Element, Element], bool]
    nat: Callable[[int], Element]
    eq: Callable[[Element, Element], bool] | None = None

    def equal(self, x: Element, y: Element) -> bool:
        if self.eq is not None:
            return self.eq(x, y)
        return self.leq(x, y) and self.leq(y, x)

    def power(self, x: Element, n: int) -> Element:
        out = self.one
        for _ in range(n):
            out = self.mul(out, x)
        return out


# --------------------------------------------------------------------------
# instances


def naturals() -> SemiringOracle:
    return SemiringOracle(
        name="naturals",
        add=lambda x, y: x + y,
        mul=lambda x, y: x * y,
        zero=0,
        one=1,
        leq=lambda x, y: x <= y,
        nat=lambda n: n,
    )


def _pp_check(x: tuple[float, float]) -> tuple[float, float]:
    a, b = x
    if (a == 0) != (b == 0) or a < 0 or b < 0:
        raise ValueError(f"{x} is not in R_{{>0}}^2 + {{(0, 0)}}")
    return x


def positive_pairs() -> SemiringOracle:
    """``R_{>0}^2 + {(0, 0)}`` with componentwise operations and order."""

    def add(x, y):
        return _pp_check((x[0] + y[0], x[1] + y[1]))

    def mul(x, y):
        return _pp_check((x[0] * y[0], x[1] * y[1]))

    def leq(x, y):
        return x[0] <= y[0] * (1 + 1e-15) and x[1] <= y[1] * (1 + 1e-15)

    def eq(x, y):
        return all(math.isclose(u, v, rel_tol=REAL_TOL, abs_tol=REAL_TOL) for u, v in zip(x, y))

    return SemiringOracle(
        name="positive-pairs",
        add=add,
        mul=mul,
        zero=(0.0, 0.0),
        one=(1.0, 1.0),
        leq=leq,
        nat=lambda n: (float(n), float(n)),
        eq=eq,
    )


def _zero_tensor(k: int) -> MultipartiteState:
    return MultipartiteState((1,) * k, np.zeros(1))


def tensor_surrogate(k: int) -> SemiringOracle:
    """Tensors on ``k`` parties with direct sum, tensor product and flattening-rank dominance.

    ``x <= y`` iff every flattening rank of ``x`` is at most that of ``y``.
    This is only a *necessary* condition for restriction; it stands in for the
    restriction preorder, which is not decidable in practice.
    """

    def leq(x: MultipartiteState, y: MultipartiteState) -> bool:
        return all(a <= b for a, b in zip(flattening_ranks(x), flattening_ranks(y)))

    def nat(n: int) -> MultipartiteState:
        return _zero_tensor(k) if n == 0 else unit_tensor(n, k)

    return SemiringOracle(
        name=f"tensor-surrogate[k={k}]",
        add=direct_sum,
        mul=tensor_product,
        zero=_zero_tensor(k),
        one=unit_tensor(1, k),
        leq=leq,
        nat=nat,
    )


# --------------------------------------------------------------------------
# sampled axiom checks


def check_semiring(S: SemiringOracle, samples: Sequence[Element], nat_range: Iterable[int] = range(6)) -> list[str]:
    """Spot-check semiring and preorder axioms on all pairs/triples of ``samples``."""
    issues = []
    for x in samples:
        if not S.equal(S.add(x, S.zero), x):
            issues.append(f"x + 0 != x for {x!r}")
        if not S.equal(S.mul(x, S.one), x):
            issues.append(f"x * 1 != x for {x!r}")
        if not S.equal(S.mul(x, S.zero), S.zero):
            issues.append(f"x * 0 != 0 for {x!r}")
        if not S.leq(x, x):
            issues.append(f"leq not reflexive at {x!r}")
    for x, y in itertools.product(samples, repeat=2):
        if not S.equal(S.add(x, y), S.add(y, x)):
            issues.append(f"addition not commutative at {x!r}, {y!r}")
        if not S.equal(S.mul(x, y), S.mul(y, x)):
            issues.append(f"multiplication not commutative at {x!r}, {y!r}")
    for x, y, z in itertools.product(samples, repeat=3):
        if not S.equal(S.mul(x, S.add(y, z)), S.add(S.mul(x, y), S.mul(x, z))):
            issues.append(f"distributivity fails at {x!r}, {y!r}, {z!r}")
        if not S.equal(S.add(S.add(x, y), z), S.add(x, S.add(y, z))):
            issues.append(f"addition not associative at {x!r}, {y!r}, {z!r}")
        if S.leq(x, y) and S.leq(y, z) and not S.leq(x, z):
            issues.append(f"leq not transitive at {x!r}, {y!r}, {z!r}")
    nats = list(nat_range)
    for m, n in itertools.product(nats, repeat=2):
        if S.leq(S.nat(m), S.nat(n)) != (m <= n):
            issues.append(f"natural embedding not an order embedding at {m}, {n}")
    return issues


# --------------------------------------------------------------------------
# rank and subrank


def abstract_rank(S: SemiringOracle, x: Element, search_bound: int) -> int | None:
    """Least ``n <= search_bound`` with ``x <= n``; ``None`` if the bound is exhausted.

    ``x <= n`` is monotone in ``n``, so the search is exponential then binary.
    """
    if search_bound < 1:
        raise ValueError("search_bound must be at least 1")
    if S.leq(x, S.nat(0)):
        return 0
    hi = 1
    while not S.leq(x, S.nat(hi)):
        if hi >= search_bound:
            return None
        hi = min(2 * hi, search_bound)
    lo = hi // 2  # x <= lo fails (or lo == 0)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if S.leq(x, S.nat(mid)):
            hi = mid
        else:
            lo = mid
    return hi


def abstract_subrank(S: SemiringOracle, x: Element, search_bound: int) -> int:
    """Greatest ``n <= search_bound`` with ``n <= x``."""
    if search_bound < 1:
        raise ValueError("search_bound must be at least 1")
    if not S.leq(S.nat(1), x):
        return 0
    lo = 1
    while lo < search_bound and S.leq(S.nat(min(2 * lo, search_bound)), x):
        lo = min(2 * lo, search_bound)
    hi = min(2 * lo, search_bound + 1)  # n = hi fails or exceeds the bound
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if S.leq(S.nat(mid), x):
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class RankSequence:
    """``rank(x^n)^{1/n}`` for ``n = 1..n_max``.

    ``submultiplicative`` records whether ``rank(x^{m+n}) <= rank(x^m) rank(x^n)``
    held on every computed pair, and ``nonincreasing_doubling`` whether the
    roots do not increase along ``n -> 2n``.
    """

    ranks: list[int]
    roots: list[float]
    submultiplicative: bool
    nonincreasing_doubling: bool


def asymptotic_rank_estimate(S: SemiringOracle, x: Element, n_max: int, search_bound: int = 1 << 20) -> RankSequence:
    ranks = []
    power = S.one
    for n in range(1, n_max + 1):
        power = S.mul(power, x)
        r = abstract_rank(S, power, search_bound)
        if r is None:
            raise BudgetExceeded(f"rank of x^{n} exceeds {search_bound}")
        ranks.append(r)
    roots = [r ** (1.0 / n) for n, r in enumerate(ranks, start=1)]
    sub = all(
        ranks[m + n - 1] <= ranks[m - 1] * ranks[n - 1]
        for m in range(1, n_max + 1)
        for n in range(1, n_max + 1 - m)
    )
    doubling = all(roots[2 * n - 1] <= roots[n - 1] * (1 + 1e-12) for n in range(1, n_max // 2 + 1))
    return RankSequence(ranks, roots, sub, doubling)


# --------------------------------------------------------------------------
# functionals

KINDS = ("upper", "lower", "spectral-candidate")


@dataclass(frozen=True)
class Functional:
    """A map from semiring elements to nonnegative reals with a declared kind."""

    name: str
    eval: Callable[[Element], float]
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")

    def __call__(self, x: Element) -> float:
        return float(self.eval(x))


def _le(a: float, b: float, tol: float) -> bool:
    return a <= b + tol * max(1.0, abs(b))


def check_functional(
    S: SemiringOracle, f: Functional, samples: Sequence[Element], tol: float = REAL_TOL
) -> list[str]:
    """Sampled check of normalization, monotonicity and the kind's inequalities.

    upper: subadditive and submultiplicative; lower: superadditive and
    supermultiplicative; spectral-candidate: additive, multiplicative and
    ``f(1) = 1``.
    """
    issues = []
    if abs(f(S.zero)) > tol:
        issues.append(f"{f.name}(0) = {f(S.zero)}")
    if abs(f(S.one) - 1.0) > tol:
        issues.append(f"{f.name}(1) = {f(S.one)}")
    for x, y in itertools.product(samples, repeat=2):
        fx, fy = f(x), f(y)
        if S.leq(x, y) and not _le(fx, fy, tol):
            issues.append(f"{f.name} not monotone at {x!r} <= {y!r}")
        fs, fp = f(S.add(x, y)), f(S.mul(x, y))
        if f.kind in ("upper", "spectral-candidate"):
            if not _le(fs, fx + fy, tol):
                issues.append(f"{f.name} not subadditive at {x!r}, {y!r}")
            if not _le(fp, fx * fy, tol):
                issues.append(f"{f.name} not submultiplicative at {x!r}, {y!r}")
        if f.kind in ("lower", "spectral-candidate"):
            if not _le(fx + fy, fs, tol):
                issues.append(f"{f.name} not superadditive at {x!r}, {y!r}")
            if not _le(fx * fy, fp, tol):
                issues.append(f"{f.name} not supermultiplicative at {x!r}, {y!r}")
    return issues


def rank_functional(S: SemiringOracle, search_bound: int) -> Functional:
    def ev(x):
        r = abstract_rank(S, x, search_bound)
        if r is None:
            raise BudgetExceeded(f"rank exceeds {search_bound}")
        return r

    return Functional("rank", ev, "upper")


def subrank_functional(S: SemiringOracle, search_bound: int) -> Functional:
    return Functional("subrank", lambda x: abstract_subrank(S, x, search_bound), "lower")


def gmean_functionals(fs: Sequence[Functional], theta: Sequence[float | Fraction]) -> Functional:
    """Weighted geometric mean ``prod_i f_i(x)^{theta_i}`` of lower functionals.

    Functionals sharing a weight are multiplied before the power is taken, so
    ``theta = (1/2, 1/2)`` evaluates as ``sqrt(f_1 f_2)`` with one rounding.
    """
    if len(fs) != len(theta) or not fs:
        raise ValueError("need one weight per functional")
    if any(f.kind != "lower" for f in fs):
        raise ValueError("the geometric-mean construction needs lower functionals")
    theta = [Fraction(t).limit_denominator(10**12) if not isinstance(t, Fraction) else t for t in theta]
    if any(t < 0 for t in theta) or sum(theta) != 1:
        raise ValueError("weights must form a probability vector")
    groups: dict[Fraction, list[Functional]] = {}
    for f, t in zip(fs, theta):
        if t > 0:
            groups.setdefault(t, []).append(f)

    def ev(x):
        out = 1.0
        for t, members in groups.items():
            prod = math.prod(f(x) for f in members)
            out *= prod if t == 1 else (math.sqrt(prod) if t == Fraction(1, 2) else prod ** float(t))
        return out

    name = "G(" + ", ".join(f.name for f in fs) + ")"
    return Functional(name, ev, "lower")


# --------------------------------------------------------------------------
# regularization


def regularize(
    S: SemiringOracle,
    g: Functional,
    x: Element,
    t_samples: Sequence[Element],
    n_max: int,
) -> list[float]:
    """``min_t (g(t x^n) / g(t))^{1/n}`` for ``n = 1..n_max``, minimum over ``{1} + t_samples``.

    Each entry is an upper bound on the regularization of ``g`` at ``x``
    (monomial probes ``t T^n`` only). Samples with ``g(t) = 0`` are skipped.
    """
    if g.kind == "lower":
        raise ValueError("regularization is defined for upper functionals")
    probes = [S.one] + list(t_samples)
    out = []
    power = S.one
    for n in range(1, n_max + 1):
        power = S.mul(power, x)
        best = math.inf
        for t in probes:
            gt = g(t)
            if gt <= 0:
                continue
            best = min(best, (g(S.mul(t, power)) / gt) ** (1.0 / n))
        out.append(best)
    return out


def regularize_sup(
    S: SemiringOracle, f: Functional, x: Element, t_samples: Sequence[Element], n_max: int
) -> list[float]:
    """The sup-variant ``max_t (f(t x^n) / f(t))^{1/n}`` used to contrast lower functionals."""
    probes = [S.one] + list(t_samples)
    out = []
    power = S.one
    for n in range(1, n_max + 1):
        power = S.mul(power, x)
        vals = [(f(S.mul(t, power)) / f(t)) ** (1.0 / n) for t in probes if f(t) > 0]
        out.append(max(vals))
    return out


def _invert_increasing(p: Callable[[float], float], y: float, hi: float) -> float:
    lo = 0.0
    while p(hi) < y:
        hi *= 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if p(mid) < y:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def sup_polynomial_value(
    f: Functional, x: tuple[float, float], degrees: Iterable[int], constants: Iterable[int]
) -> tuple[float, tuple[int, int]]:
    """``max p^{-1}(f(p(x)))`` over ``p(T) = T^d + M`` on positive pairs.

    For the lower functional ``sqrt(ab)`` this approaches ``max(a, b)``,
    whereas the monomial sup-formula stays at ``sqrt(ab)``: the polynomial and
    monomial forms of regularization disagree for lower functionals.
    Returns the best value and its ``(d, M)``.
    """
    best, arg = -math.inf, (0, 0)
    a, b = x
    for d in degrees:
        for m in constants:
            value = f((a**d + m, b**d + m))
            u = _invert_increasing(lambda s: s**d + m, value, max(a, b, 1.0))
            if u > best:
                best, arg = u, (d, m)
    return best, arg


# --------------------------------------------------------------------------
# normalization


@dataclass
class NormalizationReport:
    """Sampled status of the equivalent conditions for an upper functional ``g``.

    (i) ``g >= subrank``; (ii) some lower ``f <= g``; (iii) ``g(n) >= n``;
    (iv) ``g(n) = n``. The conditions are equivalent, so ``consistent`` is
    ``False`` exactly when the sampled truth values disagree.
    """

    ge_subrank: bool
    dominates_lower: bool
    ge_n: bool
    eq_n: bool
    lower_normalized: bool
    consistent: bool
    violations: list[str] = field(default_factory=list)


def check_normalization_equivalences(
    S: SemiringOracle,
    g: Functional,
    f: Functional,
    samples: Sequence[Element],
    nat_range: Iterable[int] = range(1, 8),
    search_bound: int = 1 << 12,
    tol: float = REAL_TOL,
) -> NormalizationReport:
    nats = list(nat_range)
    violations = []
    ge_sub = all(_le(abstract_subrank(S, x, search_bound), g(x), tol) for x in samples)
    dominates = all(_le(f(x), g(x), tol) for x in list(samples) + [S.nat(n) for n in nats])
    ge_n = all(_le(n, g(S.nat(n)), tol) for n in nats)
    eq_n = all(abs(g(S.nat(n)) - n) <= tol * n for n in nats)
    f_norm = all(abs(f(S.nat(n)) - n) <= tol * n for n in nats)
    for n in nats:
        if not _le(g(S.nat(n)), n, tol):
            violations.append(f"{g.name}({n}) = {g(S.nat(n))} > {n}")
        if not _le(n, f(S.nat(n)), tol):
            violations.append(f"{f.name}({n}) = {f(S.nat(n))} < {n}")
    flags = {ge_sub, dominates, ge_n, eq_n}
    consistent = len(flags) == 1 and (not dominates or f_norm)
    return NormalizationReport(ge_sub, dominates, ge_n, eq_n, f_norm, consistent, violations)


# --------------------------------------------------------------------------
# positive pairs: named functionals


def pair_projection(i: int) -> Functional:
    return Functional(f"h{i + 1}", lambda x: x[i], "spectral-candidate")


def pair_sqrt_product() -> Functional:
    """``(a, b) -> sqrt(ab)``: a normalized multiplicative lower functional."""
    return gmean_functionals(
        [Functional("a", lambda x: x[0], "lower"), Functional("b", lambda x: x[1], "lower")],
        [Fraction(1, 2), Fraction(1, 2)],
    )


def pair_max() -> Functional:
    return Functional("max", lambda x: max(x), "upper")


def pair_min() -> Functional:
    return Functional("min", lambda x: min(x), "lower")


def positive_pair_samples(seed: int = 0, count: int = 6) -> list[tuple[float, float]]:
    rng = np.random.default_rng(seed)
    pts = [(0.0, 0.0), (1.0, 1.0), (1.0, 4.0), (2.0, 5.0), (4.0, 1.0)]
    pts += [tuple(float(v) for v in rng.uniform(0.1, 5.0, 2)) for _ in range(count)]
    return pts
