"""Observable families on symmetric powers and finite-instance checks of their axioms.

A family assigns to every multipartite space ``H`` and copy number ``n`` an
operator ``A_{H,n}`` on ``Sym^n(H)``. Three constructions are provided:

``Bipartite(side)``
    ``sum_lam 2^{n H(lam/n)} (P_lam^{H_S} (x) I)`` restricted to ``Sym^n(H)``.
``Grouped(base, groups)``
    ``base`` evaluated after merging parties ``i`` with equal ``groups[i]``.
``GMean(children, tree)``
    ``G(A_1^t, ..., A_r^t)^{1/t}`` with ``t = (1 - alpha)/alpha``.

Pipelines consume the powered operator ``A^t`` directly. When all the
underlying bipartitions are pairwise noncrossing the children commute and a
mean is the product of powers, which is kept in factored sparse form.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np
from scipy import sparse

from .gmean import GMeanTree, Leaf, effective_weights, gmean_tree, psd_leq, psd_power, validate_tree
from .multilinear import canonical_side, complement, format_bipartition
from .partitions import binary_entropy, enumerate_partitions, partition_entropy
from .schurweyl import (
    SymBasis,
    block_count_subbasis,
    check_cap,
    class_function,
    class_operator_sparse,
    embed_direct_sum,
    inclusion_split,
    inclusion_tensor,
    sym_basis,
    sym_power_operator,
    sym_subbasis,
)


# --------------------------------------------------------------------------
# family specifications


@dataclass(frozen=True)
class Bipartite:
    """Bipartite family for the flattening ``{side, rest}`` (zero-based parties).

    ``weight_sign = -1`` flips the entropy exponent; it exists only to
    inject faults into the axiom checks.
    """

    side: frozenset[int]
    weight_sign: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "side", frozenset(int(i) for i in self.side))
        if self.weight_sign not in (1, -1):
            raise ValueError("weight_sign must be +1 or -1")


@dataclass(frozen=True)
class Grouped:
    """``base`` applied after grouping: new party ``i`` joins base party ``groups[i]``."""

    base: "FamilySpec"
    groups: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "groups", tuple(int(g) for g in self.groups))


@dataclass(frozen=True)
class GMean:
    """Weighted geometric mean of child families; ``alpha``, if set, pins the order."""

    children: tuple["FamilySpec", ...]
    tree: GMeanTree
    alpha: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "children", tuple(self.children))
        if validate_tree(self.tree) != len(self.children):
            raise ValueError("tree leaves and children differ in number")


FamilySpec = Union[Bipartite, Grouped, GMean]


def describe(spec: FamilySpec, k: int) -> str:
    """Short human-readable label, e.g. ``gmean[1|23@1/3, 13|2@1/3, 12|3@1/3]``."""
    if isinstance(spec, Bipartite):
        flip = "-" if spec.weight_sign < 0 else ""
        return flip + format_bipartition(spec.side, k)
    if isinstance(spec, Grouped):
        return f"grouped{list(g + 1 for g in spec.groups)}({describe(spec.base, max(spec.groups) + 1)})"
    theta = effective_weights(spec.tree)
    inner = ", ".join(f"{describe(c, k)}@{w}" for c, w in zip(spec.children, theta))
    return f"gmean[{inner}]"


def elementary_gmean(k: int, tree: GMeanTree | None = None, policy: str = "balanced") -> GMean:
    """Mean of the ``k`` elementary bipartitions ``{j} | rest``, uniform weights by default."""
    from .gmean import tree_from_weights

    if k < 3:
        raise ValueError("elementary means need k >= 3 (k = 2 has a single bipartition)")
    children = tuple(Bipartite(frozenset({j})) for j in range(k))
    if tree is None:
        tree = tree_from_weights([Fraction(1, k)] * k, policy)
    return GMean(children, tree)


def _grouped_dims(dims: Sequence[int], groups: Sequence[int]) -> tuple[int, ...]:
    if len(groups) != len(dims):
        raise ValueError(f"grouping map has {len(groups)} entries for {len(dims)} parties")
    k = max(groups) + 1
    if sorted(set(groups)) != list(range(k)):
        raise ValueError("grouping map must be onto 0..k-1")
    return tuple(math.prod(d for d, g in zip(dims, groups) if g == j) for j in range(k))


def _group_symbol_map(dims: Sequence[int], groups: Sequence[int]) -> np.ndarray:
    """Flat symbol of each basis state of ``H`` in the grouped space."""
    dims = tuple(dims)
    gdims = _grouped_dims(dims, groups)
    digits = np.stack(np.unravel_index(np.arange(math.prod(dims)), dims), axis=-1)
    grouped_digits = []
    for j in range(len(gdims)):
        members = [i for i, g in enumerate(groups) if g == j]
        sub = tuple(dims[i] for i in members)
        grouped_digits.append(np.ravel_multi_index(tuple(digits[:, members].T), sub))
    return np.ravel_multi_index(tuple(grouped_digits), gdims)


def leaf_sides(spec: FamilySpec, k: int) -> list[frozenset[int]]:
    """The canonical bipartition sides (in the parties of the evaluated space) a spec is built from."""
    if isinstance(spec, Bipartite):
        return [canonical_side(spec.side, k)]
    if isinstance(spec, Grouped):
        base_k = max(spec.groups) + 1
        out = []
        for side in leaf_sides(spec.base, base_k):
            members = frozenset(i for i, g in enumerate(spec.groups) if g in side)
            out.append(canonical_side(members, k))
        return out
    return [s for child in spec.children for s in leaf_sides(child, k)]


def noncrossing(s: Iterable[int], t: Iterable[int], k: int) -> bool:
    """True when one of ``S&T, S&T^c, S^c&T, S^c&T^c`` is empty."""
    s, t = frozenset(s), frozenset(t)
    sc, tc = complement(s, k), complement(t, k)
    return not (s & t) or not (s & tc) or not (sc & t) or not (sc & tc)


def is_commuting(spec: FamilySpec, k: int) -> bool:
    """Whether every mean in ``spec`` has pairwise noncrossing ingredients (so it factorizes)."""
    if isinstance(spec, Bipartite):
        return True
    if isinstance(spec, Grouped):
        return is_commuting(spec.base, max(spec.groups) + 1)
    sides = leaf_sides(spec, k)
    pairwise = all(noncrossing(a, b, k) for i, a in enumerate(sides) for b in sides[i + 1 :])
    return pairwise and all(is_commuting(c, k) for c in spec.children)


def bound_constant(spec: FamilySpec, dims: Sequence[int]) -> float:
    """``c_H`` with ``I <= A_{H,n} <= c_H^n I``."""
    dims = tuple(dims)
    if isinstance(spec, Bipartite):
        side = canonical_side(spec.side, len(dims))
        d_s = math.prod(dims[i] for i in side)
        return float(min(d_s, math.prod(dims) // d_s))
    if isinstance(spec, Grouped):
        return bound_constant(spec.base, _grouped_dims(dims, spec.groups))
    theta = effective_weights(spec.tree)
    return float(math.prod(bound_constant(c, dims) ** float(w) for c, w in zip(spec.children, theta)))


# --------------------------------------------------------------------------
# operators


@dataclass
class PoweredOperator:
    """Operator on the span of ``basis``: a dense matrix or a product of commuting sparse factors."""

    basis: SymBasis
    dense: np.ndarray | None = None
    factors: list[sparse.csr_matrix] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.basis.dim

    def matmat(self, x):
        if self.dense is not None:
            return self.dense @ x
        out = x
        for f in reversed(self.factors):
            out = f @ out
        return out

    def to_dense(self) -> np.ndarray:
        if self.dense is not None:
            return self.dense
        if not self.factors:
            return np.eye(self.dim)
        out = self.factors[-1].toarray()
        for f in reversed(self.factors[:-1]):
            out = np.asarray(f @ out)
        return (out + out.conj().T) / 2

    def sandwich(self, w) -> np.ndarray:
        """``W* X W`` for a (sparse or dense) matrix ``W`` with rows in ``basis``."""
        image = self.matmat(w)
        wt = w.conj().T
        out = wt @ image
        out = out.toarray() if sparse.issparse(out) else np.asarray(out)
        return (out + out.conj().T) / 2

    def expectation(self, c: np.ndarray) -> float:
        c = np.asarray(c).ravel()
        return float(np.vdot(c, self.matmat(c)).real)


def _bipartite_factor(
    spec: Bipartite, dims: Sequence[int], n: int, exponent: float, basis: SymBasis, cap: int | None
) -> sparse.csr_matrix:
    k = len(dims)
    side = canonical_side(spec.side, k)
    d_s = math.prod(dims[i] for i in side)
    max_len = min(d_s, math.prod(dims) // d_s)
    weights = {
        lam: 2.0 ** (spec.weight_sign * exponent * n * partition_entropy(lam))
        for lam in enumerate_partitions(n, max_len)
    }
    if n == 0:
        return sparse.identity(basis.dim, format="csr")
    return class_operator_sparse(dims, n, sorted(side), class_function(n, weights), basis, cap)


def _relabel_basis(basis: SymBasis, symbol_map: np.ndarray, D_new: int) -> tuple[SymBasis, np.ndarray]:
    """Image of ``basis`` under a symbol bijection, plus positions of each old element in it."""
    mapped = np.sort(symbol_map[basis.seqs], axis=1)
    new = sym_subbasis(D_new, basis.n, mapped)
    return new, new.index(mapped)


def _build(
    spec: FamilySpec,
    dims: tuple[int, ...],
    n: int,
    alpha: float,
    exponent: float,
    basis: SymBasis,
    method: str,
    cap: int | None,
) -> PoweredOperator:
    """``A_{H,n}^{exponent}`` for the family of order ``alpha`` on the span of ``basis``."""
    t = (1.0 - alpha) / alpha
    if isinstance(spec, Bipartite):
        return PoweredOperator(basis, factors=[_bipartite_factor(spec, dims, n, exponent, basis, cap)])
    if isinstance(spec, Grouped):
        gdims = _grouped_dims(dims, spec.groups)
        symbol_map = _group_symbol_map(dims, spec.groups)
        gbasis, pos = _relabel_basis(basis, symbol_map, math.prod(gdims))
        inner = _build(spec.base, gdims, n, alpha, exponent, gbasis, method, cap)
        perm = sparse.csr_matrix((np.ones(basis.dim), (np.arange(basis.dim), pos)), shape=(basis.dim, gbasis.dim))
        if inner.dense is not None:
            return PoweredOperator(basis, dense=inner.dense[np.ix_(pos, pos)])
        return PoweredOperator(basis, factors=[(perm @ f @ perm.T).tocsr() for f in inner.factors])
    if spec.alpha is not None and abs(spec.alpha - alpha) > 1e-15:
        raise ValueError(f"family is pinned to alpha={spec.alpha}, requested {alpha}")
    theta = [float(w) for w in effective_weights(spec.tree)]
    if method not in ("auto", "tree", "product"):
        raise ValueError(f"unknown method {method!r}")
    commuting = is_commuting(spec, len(dims))
    if method == "product" and not commuting:
        raise ValueError("product evaluation needs pairwise noncrossing children")
    if commuting and method != "tree":
        factors: list[sparse.csr_matrix] = []
        for child, w in zip(spec.children, theta):
            if w == 0:
                continue
            sub = _build(child, dims, n, alpha, exponent * w, basis, method, cap)
            if sub.dense is not None:
                factors.append(sparse.csr_matrix(sub.dense))
            else:
                factors.extend(sub.factors)
        return PoweredOperator(basis, factors=factors)
    children = [_build(c, dims, n, alpha, t, basis, method, cap).to_dense() for c in spec.children]
    mean = gmean_tree(spec.tree, children).real if all(np.isrealobj(c) for c in children) else gmean_tree(spec.tree, children)
    dense = mean if exponent == t else psd_power(mean, exponent / t)
    dense = dense.real if np.abs(np.imag(dense)).max(initial=0.0) < 1e-12 else dense
    return PoweredOperator(basis, dense=(dense + dense.conj().T) / 2)


@dataclass
class FamilyInstance:
    """``A_{H,n}^{exponent}`` in a compressed basis, with the bound constant of ``H``."""

    spec: FamilySpec
    dims: tuple[int, ...]
    n: int
    alpha: float | None
    exponent: float
    operator: PoweredOperator
    c: float

    @property
    def matrix(self) -> np.ndarray:
        return self.operator.to_dense()

    def observable(self) -> np.ndarray:
        """The unpowered ``A_{H,n}``."""
        if self.exponent == 1.0:
            return self.matrix
        return psd_power(self.matrix, 1.0 / self.exponent)


def build_bipartite(dims: Sequence[int], side: Iterable[int], n: int, cap: int | None = None) -> FamilyInstance:
    """``sum_lam 2^{n H(lam/n)} Q_lam`` on ``Sym^n(H)`` (unpowered)."""
    dims = tuple(int(d) for d in dims)
    check_cap(n, cap)
    spec = Bipartite(canonical_side(side, len(dims)))
    basis = sym_basis(math.prod(dims), n)
    op = PoweredOperator(basis, factors=[_bipartite_factor(spec, dims, n, 1.0, basis, cap)])
    return FamilyInstance(spec, dims, n, None, 1.0, op, bound_constant(spec, dims))


def build_family(
    spec: FamilySpec,
    dims: Sequence[int],
    n: int,
    alpha: float,
    basis: SymBasis | None = None,
    method: str = "auto",
    cap: int | None = None,
    exponent: float | None = None,
) -> FamilyInstance:
    """Powered observable ``A_{H,n}^{(1-alpha)/alpha}`` of a family.

    Parameters
    ----------
    spec : family specification.
    dims : local dimensions of ``H``.
    n : copy number.
    alpha : order in ``(0, 1)``.
    basis : optional invariant sub-basis of ``Sym^n(H)`` (default: full basis).
    method : ``"auto"`` factorizes commuting means, ``"tree"`` always evaluates
        nested Kubo-Ando means densely, ``"product"`` insists on factorization.
    exponent : power of ``A`` to build instead of ``(1-alpha)/alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    dims = tuple(int(d) for d in dims)
    check_cap(n, cap)
    basis = sym_basis(math.prod(dims), n) if basis is None else basis
    t = (1.0 - alpha) / alpha if exponent is None else exponent
    op = _build(spec, dims, n, alpha, t, basis, method, cap)
    return FamilyInstance(spec, dims, n, alpha, t, op, bound_constant(spec, dims))


# --------------------------------------------------------------------------
# axiom verification


@dataclass(frozen=True)
class AxiomResult:
    axiom: str
    instance: str
    margin: float
    passed: bool
    slack_factor: float | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        if out["slack_factor"] is None:
            del out["slack_factor"]
        return out


def _random_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    z = rng.standard_normal((rows, rows)) + 1j * rng.standard_normal((rows, rows))
    q, r = np.linalg.qr(z)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return q[:, :cols]


def _grow_dims(base: Sequence[int], fits) -> tuple[int, ...]:
    """Add one dimension to successive parties while ``fits(dims)`` stays true."""
    dims = list(base)
    for j in range(len(dims)):
        trial = dims.copy()
        trial[j] += 1
        if fits(tuple(trial)):
            dims = trial
    return tuple(dims)


def _shrink_dims(start: Sequence[int], fits) -> tuple[int, ...]:
    """Reduce trailing parties to dimension 1 until ``fits(dims)``."""
    dims = list(start)
    for j in range(len(dims) - 1, -1, -1):
        if fits(tuple(dims)):
            break
        dims[j] = 1
    return tuple(dims)


def _sym_dim(D: int, n: int) -> int:
    return math.comb(D + n - 1, n)


def verify_axioms(
    spec: FamilySpec,
    dims: Sequence[int],
    sizes: tuple[int, int],
    alpha: float,
    tol: float = 1e-9,
    seed: int = 0,
    n_isometries: int = 10,
    dims_k: Sequence[int] | None = None,
    dense_budget: int = 2500,
    sparse_budget: int = 200_000,
    axioms: Sequence[str] = ("O1", "O2", "O3", "O4", "O5"),
    cap: int | None = None,
) -> list[AxiomResult]:
    """Check axioms O1-O5 on finite instances.

    Parameters
    ----------
    spec, dims, alpha : the family, the space ``H`` and the order.
    sizes : ``(m, n)``; O1 and O2 are checked at ``m``, ``n`` and ``m + n``,
        O4 at ``m`` and ``n``, O3 and O5 at the pair.
    tol : margins (normalized as in :func:`psd_leq`) must be ``>= -tol``.
    n_isometries : random product isometries per copy number for O1. Target
        parties are enlarged by one dimension while the target symmetric power
        stays within ``dense_budget``.
    dims_k : second space for O4 and O5 (default two-dimensional parties,
        trailing parties reduced to 1 if needed to respect the budgets).

    Returns
    -------
    list of AxiomResult
        One entry per axiom and instance, in a deterministic order.
    """
    dims = tuple(int(d) for d in dims)
    k = len(dims)
    m, n = sizes
    check_cap(m + n, cap)
    rng = np.random.default_rng(seed)
    t = (1.0 - alpha) / alpha
    commuting = is_commuting(spec, k)
    budget = sparse_budget if commuting else dense_budget
    label = describe(spec, k)
    results: list[AxiomResult] = []
    cache: dict = {}

    def powered(space: tuple[int, ...], copies: int) -> FamilyInstance:
        key = (space, copies)
        if key not in cache:
            cache[key] = build_family(spec, space, copies, alpha, cap=cap)
        return cache[key]

    copies_all = sorted({m, n, m + n})

    if "O1" in axioms:
        for copies in copies_all:
            target = _grow_dims(dims, lambda d: _sym_dim(math.prod(d), copies) <= dense_budget)
            a_h = build_family(spec, dims, copies, alpha, exponent=1.0, cap=cap).matrix
            a_k = build_family(spec, target, copies, alpha, exponent=1.0, cap=cap).matrix
            worst = math.inf
            for _ in range(n_isometries):
                u = np.ones((1, 1), dtype=complex)
                for d_in, d_out in zip(dims, target):
                    u = np.kron(u, _random_isometry(rng, d_out, d_in))
                v = sym_power_operator(u, copies)
                diff = v.conj().T @ a_k @ v - a_h
                margin = -float(np.linalg.norm(diff, 2)) / max(1.0, float(np.linalg.norm(a_h, 2)))
                worst = min(worst, margin)
            results.append(
                AxiomResult("O1", f"{label} dims={dims}->{target} n={copies} x{n_isometries}", worst, worst >= -tol)
            )

    if "O2" in axioms:
        for copies in copies_all:
            inst = powered(dims, copies)
            mat = inst.matrix
            eye = np.eye(mat.shape[0])
            upper = inst.c ** (copies * t)
            lo = psd_leq(eye, mat, tol)
            hi = psd_leq(mat, upper * eye, tol)
            margin = min(lo.margin, hi.margin)
            results.append(
                AxiomResult("O2", f"{label} dims={dims} n={copies} c={inst.c:g}", margin, lo.holds and hi.holds)
            )

    D = math.prod(dims)
    if "O3" in axioms:
        w = inclusion_split(D, m, n)
        a_m, a_n = powered(dims, m).matrix, powered(dims, n).matrix
        lhs = w.T @ np.kron(a_m, a_n) @ w
        chk = psd_leq((lhs + lhs.conj().T) / 2, powered(dims, m + n).matrix, tol)
        results.append(AxiomResult("O3", f"{label} dims={dims} m={m} n={n}", chk.margin, chk.holds))

    if "O4" in axioms:
        for copies in sorted({m, n}):
            fits = lambda d: _sym_dim(D * math.prod(d), copies) <= budget  # noqa: E731
            second = tuple(dims_k) if dims_k is not None else _shrink_dims((2,) * k, fits)
            merged = tuple(a * b for a, b in zip(dims, second))
            w = inclusion_tensor(dims, second, copies)
            lhs = powered(merged, copies).operator.sandwich(sparse.csr_matrix(w))
            rhs = np.kron(powered(dims, copies).matrix, powered(second, copies).matrix)
            chk = psd_leq(lhs, rhs, tol)
            results.append(
                AxiomResult("O4", f"{label} H={dims} K={second} n={copies}", chk.margin, chk.holds)
            )

    if "O5" in axioms:
        def fits5(d):  # noqa: E306
            return block_count_subbasis(dims, d, m + n, n).dim <= budget

        second = tuple(dims_k) if dims_k is not None else _shrink_dims((2,) * k, fits5)
        total = tuple(a + b for a, b in zip(dims, second))
        sub = block_count_subbasis(dims, second, m + n, n)
        w = sparse.csr_matrix(embed_direct_sum(dims, second, m, n, cap=cap, basis=sub))
        big = build_family(spec, total, m + n, alpha, basis=sub, cap=cap)
        lhs = big.operator.sandwich(w)
        slack = 2.0 ** ((m + n) * t * binary_entropy(m / (m + n)))
        rhs = slack * np.kron(powered(dims, m).matrix, powered(second, n).matrix)
        chk = psd_leq(lhs, rhs, tol)
        results.append(
            AxiomResult("O5", f"{label} H={dims} K={second} m={m} n={n}", chk.margin, chk.holds, slack)
        )
    return results
