"""Finite-n values and closed-form bounds of the functionals induced by observable families.

For a family ``A`` and order ``alpha`` in (0, 1) the finite-n log-value is

    e_n(psi) = (1/n) * alpha/(1-alpha) * log2 <psi^{(x)n}| A_n^{(1-alpha)/alpha} |psi^{(x)n}>,

and ``n e_n`` is superadditive, so ``E = lim e_n = sup_n e_n``; the
exponentiated functional is ``F = 2^{(1-alpha) E}``. Everything is in bits.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .gmean import effective_weights
from .multilinear import (
    MultipartiteState,
    apply_local,
    canonical_side,
    direct_sum,
    format_bipartition,
    marginal,
    schmidt_spectrum,
    tensor_product,
)
from .observables import Bipartite, FamilySpec, GMean, Grouped, bound_constant, build_family, describe
from .partitions import enumerate_partitions, partition_entropy, renyi_entropy, shannon_entropy
from .schurweyl import power_vector, schur_weyl_measure

Theta = list[tuple[frozenset[int], float]]


def conjugate_order(alpha: float) -> float:
    """``alpha' = alpha / (2 alpha - 1)`` (``1/alpha + 1/alpha' = 2``); ``inf`` at ``alpha = 1/2``."""
    if not 0.5 <= alpha < 1.0:
        raise ValueError("the conjugate order needs alpha in [1/2, 1)")
    return math.inf if alpha == 0.5 else alpha / (2.0 * alpha - 1.0)


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")


def _nonzero(psi: MultipartiteState) -> None:
    if psi.is_zero():
        raise ValueError("the zero vector is not allowed here")


def spec_theta(spec: FamilySpec, k: int) -> Theta:
    """Bipartitions underlying ``spec`` with their effective weights (nested means multiply out)."""
    if isinstance(spec, Bipartite):
        return [(canonical_side(spec.side, k), 1.0)]
    if isinstance(spec, Grouped):
        base_k = max(spec.groups) + 1
        out = []
        for side, w in spec_theta(spec.base, base_k):
            members = frozenset(i for i, g in enumerate(spec.groups) if g in side)
            out.append((canonical_side(members, k), w))
        return out
    merged: dict[frozenset[int], float] = {}
    for child, w in zip(spec.children, effective_weights(spec.tree)):
        for side, v in spec_theta(child, k):
            merged[side] = merged.get(side, 0.0) + float(w) * v
    return [(s, w) for s, w in merged.items() if w > 0]


def theta_label(theta: Theta, k: int) -> dict[str, float]:
    return {format_bipartition(s, k): w for s, w in theta}


# --------------------------------------------------------------------------
# finite n


def finite_n_log_value(
    psi: MultipartiteState,
    spec: FamilySpec,
    alpha: float,
    n: int,
    cap: int | None = None,
    method: str = "auto",
) -> float:
    """``e_n`` through the compressed powered observable."""
    _check_alpha(alpha)
    _nonzero(psi)
    if n < 1:
        raise ValueError("n must be at least 1")
    inst = build_family(spec, psi.dims, n, alpha, method=method, cap=cap)
    value = inst.operator.expectation(power_vector(psi.amplitudes, n))
    return alpha / (1.0 - alpha) * math.log2(value) / n


def bipartite_finite_n(psi: MultipartiteState, side: Iterable[int], alpha: float, n: int) -> float:
    """``e_n`` of the bipartite family from the Schur-Weyl measure of the marginal spectrum.

    ``<psi^n| Q_lam |psi^n> = ||psi||^{2n} dim[lam] s_lam(r)``, so no operator is built.
    """
    _check_alpha(alpha)
    _nonzero(psi)
    t = (1.0 - alpha) / alpha
    r = schmidt_spectrum(psi, side)
    total = sum(
        2.0 ** (t * n * partition_entropy(lam)) * schur_weyl_measure(lam, r)
        for lam in enumerate_partitions(n, len(r))
    )
    return alpha / (1.0 - alpha) * (math.log2(total) / n + math.log2(psi.norm_sq()))


def type_distribution(psi: MultipartiteState, side: Iterable[int], n: int) -> dict[tuple[int, ...], float]:
    """``p(lam) = Tr P_lam rho^{(x)n}`` for the normalized marginal spectrum ``rho`` on ``side``."""
    r = schmidt_spectrum(psi, side)
    return {lam: schur_weyl_measure(lam, r) for lam in enumerate_partitions(n, len(r))}


def finite_n_limit1(psi: MultipartiteState, spec: FamilySpec, n: int) -> float:
    """The ``alpha -> 1`` limit of ``e_n`` on ``psi / ||psi||``.

    Equals ``sum_b theta(b) sum_lam H(lam/n) p_b(lam)``: the expected type
    entropy, which increases to ``sum_b theta(b) H(marginal_b)``.
    """
    _nonzero(psi)
    total = 0.0
    for side, w in spec_theta(spec, psi.k):
        dist = type_distribution(psi, side, n)
        total += w * sum(partition_entropy(lam) * p for lam, p in dist.items())
    return total


# --------------------------------------------------------------------------
# closed forms


def bipartite_closed_form(psi: MultipartiteState, side: Iterable[int], alpha: float) -> float:
    """``F = Tr (marginal)^alpha`` for ``alpha`` in (0, 1]; ``||psi||^2`` at ``alpha = 1``; 0 for zero ``psi``."""
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    if psi.is_zero():
        return 0.0
    w = np.clip(np.linalg.eigvalsh(marginal(psi, canonical_side(side, psi.k))), 0.0, None)
    if alpha == 1.0:
        return float(w.sum())
    w = w[w > 1e-15 * w.max()]
    return float(np.sum(w**alpha))


def _weighted_entropy(psi: MultipartiteState, theta: Theta, order: float) -> float:
    return sum(w * renyi_entropy(schmidt_spectrum(psi, side), order) for side, w in theta)


def closed_upper_bound(psi: MultipartiteState, theta: Theta, alpha: float) -> float:
    """``alpha/(1-alpha) log2 ||psi||^2 + sum_b theta(b) H_alpha(marginal_b)``."""
    _check_alpha(alpha)
    _nonzero(psi)
    return alpha / (1.0 - alpha) * math.log2(psi.norm_sq()) + _weighted_entropy(psi, theta, alpha)


def closed_lower_bound(psi: MultipartiteState, theta: Theta, alpha: float) -> float:
    """Same as :func:`closed_upper_bound` with ``H_{alpha'}``, ``alpha' = alpha/(2 alpha - 1)``."""
    order = conjugate_order(alpha)
    _nonzero(psi)
    return alpha / (1.0 - alpha) * math.log2(psi.norm_sq()) + _weighted_entropy(psi, theta, order)


def closed_limit1(psi: MultipartiteState, theta: Theta) -> float:
    """``sum_b theta(b) H(marginal_b)`` of the normalized state (both bounds at ``alpha = 1``)."""
    _nonzero(psi)
    return sum(w * shannon_entropy(schmidt_spectrum(psi, side)) for side, w in theta)


# --------------------------------------------------------------------------
# reports


def state_digest(psi: MultipartiteState) -> str:
    """Short SHA-256 digest of dims and amplitudes rounded to 12 significant digits."""
    h = hashlib.sha256()
    h.update(repr(psi.dims).encode())
    for z in psi.amplitudes:
        h.update(f"{z.real:.12e},{z.imag:.12e};".encode())
    return h.hexdigest()[:16]


@dataclass
class FunctionalReport:
    """Finite-n sequence and bounds for one state, family and order.

    ``E_interval`` is ``[max_n e_n, closed_upper]``: the left end is a valid
    lower bound by superadditivity and the right end a valid upper bound.
    ``closed_lower`` (orders in ``[1/2, 1)``) is reported separately.
    ``E_extrapolated`` is the last increment ``n e_n - (n-1) e_{n-1}``, a
    point estimate without a guarantee.
    """

    state_digest: str
    spec: str
    alpha: float | str
    theta: dict[str, float]
    sequence: list[tuple[int, float]]
    E_interval: tuple[float, float]
    F_interval: tuple[float, float]
    closed_upper: float
    closed_lower: float | None
    violations: list[str] = field(default_factory=list)
    E_extrapolated: float | None = None

    def to_dict(self) -> dict:
        return {
            "state_digest": self.state_digest,
            "spec": self.spec,
            "alpha": self.alpha,
            "theta": self.theta,
            "sequence": [[n, e] for n, e in self.sequence],
            "E_interval": list(self.E_interval),
            "F_interval": list(self.F_interval),
            "closed_upper": self.closed_upper,
            "closed_lower": self.closed_lower,
            "violations": list(self.violations),
            "E_extrapolated": self.E_extrapolated,
        }


def estimate_upper(
    psi: MultipartiteState,
    spec: FamilySpec,
    alpha: float,
    n_max: int,
    cap: int | None = None,
    tol: float = 1e-9,
    method: str = "auto",
) -> FunctionalReport:
    """Evaluate ``e_1 .. e_{n_max}`` and bracket ``E`` between ``max_n e_n`` and the closed upper bound.

    Violations of the a-priori bounds ``||psi||^{2 alpha} <= F_n <= ||psi||^{2 alpha} c^{1-alpha}``
    and ``e_n <= closed_upper`` are listed, not raised.
    """
    _check_alpha(alpha)
    _nonzero(psi)
    theta = spec_theta(spec, psi.k)
    seq = [(n, finite_n_log_value(psi, spec, alpha, n, cap, method)) for n in range(1, n_max + 1)]
    upper = closed_upper_bound(psi, theta, alpha)
    lower = closed_lower_bound(psi, theta, alpha) if alpha >= 0.5 else None
    c = bound_constant(spec, psi.dims)
    base = alpha / (1.0 - alpha) * math.log2(psi.norm_sq())
    violations = []
    for n, e in seq:
        if e < base - tol:
            violations.append(f"n={n}: F_n below ||psi||^(2 alpha)")
        if e > base + math.log2(c) + tol:
            violations.append(f"n={n}: F_n above ||psi||^(2 alpha) c^(1-alpha)")
        if e > upper + tol:
            violations.append(f"n={n}: e_n exceeds closed upper bound")
    lo = max(e for _, e in seq)
    interval = (lo, max(lo, upper))
    extrapolated = seq[-1][1] if n_max == 1 else n_max * seq[-1][1] - (n_max - 1) * seq[-2][1]
    return FunctionalReport(
        state_digest=state_digest(psi),
        spec=describe(spec, psi.k),
        alpha=alpha,
        theta=theta_label(theta, psi.k),
        sequence=seq,
        E_interval=interval,
        F_interval=tuple(2.0 ** ((1.0 - alpha) * e) for e in interval),
        closed_upper=upper,
        closed_lower=lower,
        violations=violations,
        E_extrapolated=extrapolated,
    )


def estimate_limit1(psi: MultipartiteState, spec: FamilySpec, n_max: int) -> FunctionalReport:
    """The ``alpha -> 1`` mode on the normalized state: expected type entropies vs Shannon closed form."""
    _nonzero(psi)
    theta = spec_theta(spec, psi.k)
    seq = [(n, finite_n_limit1(psi, spec, n)) for n in range(1, n_max + 1)]
    closed = closed_limit1(psi, theta)
    lo = max(e for _, e in seq)
    violations = [f"n={n}: value exceeds Shannon closed form" for n, e in seq if e > closed + 1e-9]
    return FunctionalReport(
        state_digest=state_digest(psi),
        spec=describe(spec, psi.k),
        alpha="limit1",
        theta=theta_label(theta, psi.k),
        sequence=seq,
        E_interval=(lo, max(lo, closed)),
        F_interval=(1.0, 1.0),
        closed_upper=closed,
        closed_lower=closed,
        violations=violations,
    )


# --------------------------------------------------------------------------
# lower functional


def lower_value(phi: MultipartiteState, theta: Theta, alpha: float, alpha_prime: float) -> float:
    """``H_{alpha', theta}(phi/||phi||) + alpha/(1-alpha) log2 ||phi||^2``; ``-inf`` for zero ``phi``."""
    if phi.is_zero():
        return -math.inf
    return _weighted_entropy(phi, theta, alpha_prime) + alpha / (1.0 - alpha) * math.log2(phi.norm_sq())


@dataclass
class LowerFunctionalResult:
    E: float
    F: float
    best: str
    candidates: dict[str, float]


def _schmidt_filters(psi: MultipartiteState) -> list[tuple[str, list[np.ndarray]]]:
    out = []
    for j, d in enumerate(psi.dims):
        if d < 2:
            continue
        rho = marginal(psi, {j}) if psi.k > 1 else np.outer(psi.amplitudes, psi.amplitudes.conj())
        _, vecs = np.linalg.eigh(rho)
        vecs = vecs[:, ::-1]
        for r in range(1, d):
            proj = vecs[:, :r] @ vecs[:, :r].conj().T
            maps = [np.eye(dd) for dd in psi.dims]
            maps[j] = proj
            out.append((f"schmidt[party={j + 1},rank={r}]", maps))
    return out


def _random_contractions(psi: MultipartiteState, count: int, seed: int) -> list[tuple[str, list[np.ndarray]]]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        maps = []
        for d in psi.dims:
            z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            maps.append(z / np.linalg.norm(z, 2))
        out.append((f"random[{i}]", maps))
    return out


def lower_functional(
    psi: MultipartiteState,
    theta: Theta,
    alpha: float,
    alpha_prime: float | None = None,
    budget: int = 0,
    seed: int = 0,
) -> LowerFunctionalResult:
    """Best value of ``H_{alpha', theta}(phi/||phi||) + alpha/(1-alpha) log2 ||phi||^2`` over filters ``phi <= psi``.

    Candidates are ``phi = (A_1 (x) ... (x) A_k) psi`` with contractions
    ``A_j``: the identity, single-party projectors onto leading marginal
    eigenvectors, and ``budget`` seeded random contractions. With
    ``budget = 0`` and no useful truncation the result is the ``phi = psi``
    value, i.e. :func:`closed_lower_bound`.
    """
    _check_alpha(alpha)
    order = conjugate_order(alpha) if alpha_prime is None else alpha_prime
    candidates = {"identity": lower_value(psi, theta, alpha, order)}
    for name, maps in _schmidt_filters(psi) + _random_contractions(psi, budget, seed):
        candidates[name] = lower_value(apply_local(maps, psi), theta, alpha, order)
    best = max(candidates, key=lambda key: candidates[key])
    e = candidates[best]
    f = 2.0 ** ((1.0 - alpha) * e) if e > -math.inf else 0.0
    return LowerFunctionalResult(e, f, best, candidates)


def tensor_power(psi: MultipartiteState, n: int) -> MultipartiteState:
    out = psi
    for _ in range(n - 1):
        out = tensor_product(out, psi)
    return out


def lower_functional_power(
    psi: MultipartiteState, theta: Theta, alpha: float, n: int, budget: int = 0, seed: int = 0
) -> float:
    """``(1/n)`` times the lower functional evaluated on ``psi^{(x)n}`` (a regularization step)."""
    return lower_functional(tensor_power(psi, n), theta, alpha, budget=budget, seed=seed).E / n


def type_class_filter_value(
    a: MultipartiteState, b: MultipartiteState, theta: Theta, alpha: float, n: int, m: int
) -> float:
    """Closed form of the lower value of the filtered power ``Pi_m (a + b)^{(x)n}``.

    ``Pi_m`` keeps, on every party, the copies with exactly ``m`` factors in the
    ``a`` block. The filtered vector is an orthogonal sum of ``C(n, m)``
    rearrangements of ``a^{(x)m} (x) b^{(x)(n-m)}``, so its value is
    ``log2 C(n, m) / (1 - alpha) + m E(a) + (n - m) E(b)`` with ``E`` the
    single-copy (identity-filter) value.
    """
    order = conjugate_order(alpha)
    ea = lower_value(a, theta, alpha, order) if m else 0.0
    eb = lower_value(b, theta, alpha, order) if n - m else 0.0
    return math.log2(math.comb(n, m)) / (1.0 - alpha) + m * ea + (n - m) * eb


def type_class_filtered_state(a: MultipartiteState, b: MultipartiteState, n: int, m: int) -> MultipartiteState:
    """Explicit ``Pi_m (a + b)^{(x)n}`` (small sizes only)."""
    s = direct_sum(a, b)
    power = tensor_power(s, n)
    maps = []
    for da, db in zip(a.dims, b.dims):
        block = np.array([1.0] * da + [0.0] * db)  # 1 marks the a block
        counts = block
        for _ in range(n - 1):
            counts = np.add.outer(counts, block).ravel()
        maps.append(np.diag((counts == m).astype(float)))
    return apply_local(maps, power)
