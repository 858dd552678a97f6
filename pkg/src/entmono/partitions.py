"""Integer partitions, classical entropies and symmetric-group characters.

Characters and the Kronecker / Littlewood-Richardson coefficients are computed
with exact integer arithmetic; entropies are double precision and measured in
bits.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

Partition = tuple[int, ...]

NORMALIZATION_TOL = 1e-12


def as_partition(parts: Iterable[int]) -> Partition:
    """Validate ``parts`` and return it as a canonical partition tuple.

    Trailing zeros are dropped. Raises ``ValueError`` if the parts are not a
    nonincreasing sequence of nonnegative integers.
    """
    out = tuple(int(p) for p in parts)
    if any(p < 0 for p in out):
        raise ValueError(f"partition parts must be nonnegative: {out}")
    if any(out[i] < out[i + 1] for i in range(len(out) - 1)):
        raise ValueError(f"partition parts must be nonincreasing: {out}")
    while out and out[-1] == 0:
        out = out[:-1]
    return out


def enumerate_partitions(n: int, max_len: int | None = None) -> list[Partition]:
    """All partitions of ``n`` with at most ``max_len`` parts.

    Partitions come out in decreasing lexicographic order, starting with
    ``(n,)``. ``n = 0`` yields the single empty partition.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if max_len is None:
        max_len = n
    out: list[Partition] = []

    def rec(remaining: int, largest: int, prefix: list[int]) -> None:
        if remaining == 0:
            out.append(tuple(prefix))
            return
        if len(prefix) == max_len:
            return
        for part in range(min(remaining, largest), 0, -1):
            prefix.append(part)
            rec(remaining - part, part, prefix)
            prefix.pop()

    rec(n, n, [])
    return out


def partition_count(n: int) -> int:
    """Number of partitions of ``n`` via Euler's pentagonal recurrence."""
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > m:
                break
            sign = 1 if k % 2 else -1
            total += sign * p[m - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= m:
                total += sign * p[m - g2]
            k += 1
        p[m] = total
    return p[n]


def conjugate(lam: Partition) -> Partition:
    if not lam:
        return ()
    return tuple(sum(1 for part in lam if part > i) for i in range(lam[0]))


def multiplicities(lam: Partition) -> dict[int, int]:
    counts: dict[int, int] = {}
    for part in lam:
        counts[part] = counts.get(part, 0) + 1
    return counts


def centralizer_order(cls: Partition) -> int:
    """``z_mu = prod_i i^{m_i} m_i!`` so that the class has ``n!/z_mu`` elements."""
    z = 1
    for part, mult in multiplicities(cls).items():
        z *= part**mult * math.factorial(mult)
    return z


def class_size(cls: Partition) -> int:
    return math.factorial(sum(cls)) // centralizer_order(cls)


# --------------------------------------------------------------------------
# entropies (bits)


def _as_weights(p: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.asarray(p, dtype=float).ravel()
    if np.any(arr < 0):
        raise ValueError("probability weights must be nonnegative")
    return arr


def _check_normalized(arr: np.ndarray) -> None:
    if abs(arr.sum() - 1.0) > NORMALIZATION_TOL:
        raise ValueError(f"weights sum to {arr.sum()!r}, expected 1")


def shannon_entropy(p) -> float:
    arr = _as_weights(p)
    _check_normalized(arr)
    nz = arr[arr > 0]
    return float(-np.sum(nz * np.log2(nz))) + 0.0


def renyi_entropy(p, alpha: float) -> float:
    """Renyi entropy of order ``alpha`` in bits.

    ``alpha = 1`` is the Shannon entropy and ``alpha = inf`` the
    min-entropy ``-log max p``. The weights need not be normalized for
    ``alpha`` other than 1.
    """
    arr = _as_weights(p)
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if alpha == 1:
        return shannon_entropy(arr)
    if math.isinf(alpha):
        return float(-np.log2(arr.max())) + 0.0
    nz = arr[arr > 0]
    return float(np.log2(np.sum(nz**alpha)) / (1.0 - alpha)) + 0.0


def binary_entropy(q: float) -> float:
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    return shannon_entropy([q, 1.0 - q]) if 0.0 < q < 1.0 else 0.0


def relative_entropy(p, q) -> float:
    """Kullback-Leibler divergence ``D(p||q)`` in bits (``inf`` off support)."""
    p_arr, q_arr = _as_weights(p), _as_weights(q)
    size = max(p_arr.size, q_arr.size)
    p_arr = np.pad(p_arr, (0, size - p_arr.size))
    q_arr = np.pad(q_arr, (0, size - q_arr.size))
    mask = p_arr > 0
    if np.any(q_arr[mask] == 0):
        return math.inf
    return float(np.sum(p_arr[mask] * np.log2(p_arr[mask] / q_arr[mask])))


def partition_entropy(lam: Partition) -> float:
    """``H(lam/n)`` for a nonempty partition."""
    n = sum(lam)
    return shannon_entropy([part / n for part in lam]) if n else 0.0


# --------------------------------------------------------------------------
# characters


def _beta_set(lam: Partition, length: int) -> tuple[int, ...]:
    padded = tuple(lam) + (0,) * (length - len(lam))
    return tuple(padded[i] + (length - 1 - i) for i in range(length))


def _from_beta_set(beta: Sequence[int]) -> Partition:
    length = len(beta)
    ordered = sorted(beta, reverse=True)
    return as_partition(ordered[i] - (length - 1 - i) for i in range(length))


@lru_cache(maxsize=None)
def _mn(lam: Partition, cls: Partition) -> int:
    if not cls:
        return 1
    r, rest = cls[0], cls[1:]
    beta = _beta_set(lam, len(lam))
    occupied = set(beta)
    total = 0
    for b in beta:
        target = b - r
        if target < 0 or target in occupied:
            continue
        # sign of the removed rim hook: beads jumped over
        height = sum(1 for c in beta if target < c < b)
        new_beta = [c for c in beta if c != b] + [target]
        total += (-1) ** height * _mn(_from_beta_set(new_beta), rest)
    return total


def mn_character(lam: Sequence[int], cls: Sequence[int]) -> int:
    """Irreducible character ``chi_lam`` of ``S_n`` on the class of cycle type ``cls``.

    Murnaghan-Nakayama rule on beta-sets (rim hooks become bead moves),
    memoized per ``(lam, cls)``.
    """
    lam_p = as_partition(lam)
    cls_p = as_partition(sorted(cls, reverse=True))
    if sum(lam_p) != sum(cls_p):
        raise ValueError(f"size mismatch: |{lam_p}| != |{cls_p}|")
    return _mn(lam_p, cls_p)


def irrep_dim(lam: Sequence[int]) -> int:
    """``dim [lam]``, the character at the identity."""
    lam_p = as_partition(lam)
    return _mn(lam_p, (1,) * sum(lam_p))


def hook_length_dim(lam: Sequence[int]) -> int:
    lam_p = as_partition(lam)
    conj = conjugate(lam_p)
    hooks = 1
    for i, row in enumerate(lam_p):
        for j in range(row):
            hooks *= row - j + conj[j] - i - 1
    return math.factorial(sum(lam_p)) // hooks


@lru_cache(maxsize=None)
def character_table(n: int) -> tuple[list[Partition], np.ndarray]:
    """Rows indexed by irreps, columns by classes, both in ``enumerate_partitions`` order."""
    parts = enumerate_partitions(n)
    table = np.array([[_mn(lam, mu) for mu in parts] for lam in parts], dtype=object)
    return parts, table


def kronecker(lam: Sequence[int], mu: Sequence[int], nu: Sequence[int]) -> int:
    """Kronecker coefficient ``g_{lam mu nu}`` via the class-weighted triple character sum."""
    lam_p, mu_p, nu_p = as_partition(lam), as_partition(mu), as_partition(nu)
    n = sum(lam_p)
    if sum(mu_p) != n or sum(nu_p) != n:
        raise ValueError("Kronecker coefficient needs three partitions of the same n")
    total = 0
    for cls in enumerate_partitions(n):
        total += class_size(cls) * _mn(lam_p, cls) * _mn(mu_p, cls) * _mn(nu_p, cls)
    value, rem = divmod(total, math.factorial(n))
    assert rem == 0
    return value


def littlewood_richardson(lam: Sequence[int], mu: Sequence[int], nu: Sequence[int]) -> int:
    """``c^lam_{mu nu}``: multiplicity of ``[mu] x [nu]`` in ``[lam]`` restricted to ``S_m x S_n``."""
    lam_p, mu_p, nu_p = as_partition(lam), as_partition(mu), as_partition(nu)
    m, n = sum(mu_p), sum(nu_p)
    if sum(lam_p) != m + n:
        raise ValueError(f"|lam| = {sum(lam_p)} but |mu| + |nu| = {m + n}")
    total = 0
    for a in enumerate_partitions(m):
        chi_mu = _mn(mu_p, a)
        if chi_mu == 0:
            continue
        for b in enumerate_partitions(n):
            merged = tuple(sorted(a + b, reverse=True))
            total += class_size(a) * class_size(b) * chi_mu * _mn(nu_p, b) * _mn(lam_p, merged)
    value, rem = divmod(total, math.factorial(m) * math.factorial(n))
    assert rem == 0
    return value


def weyl_dim(lam: Sequence[int], d: int) -> int:
    """Dimension of the Schur module ``S_lam(C^d)`` (hook-content formula)."""
    if d < 1:
        raise ValueError("d must be at least 1")
    lam_p = as_partition(lam)
    if len(lam_p) > d:
        return 0
    conj = conjugate(lam_p)
    num, den = 1, 1
    for i, row in enumerate(lam_p):
        for j in range(row):
            num *= d + j - i
            den *= row - j + conj[j] - i - 1
    return num // den


# --------------------------------------------------------------------------
# entropic vanishing conditions


def kronecker_vanishing_violations(n: int, tol: float = 1e-12) -> list[tuple[Partition, Partition, Partition, float]]:
    """Triples ``lam, mu, nu |- n`` with ``g != 0`` but ``H(lam/n) > H(mu/n) + H(nu/n) + tol``.

    Returns ``(lam, mu, nu, excess)`` for each violation; empty when the
    entropic vanishing condition holds for every triple.
    """
    parts = enumerate_partitions(n)
    ent = {lam: partition_entropy(lam) for lam in parts}
    out = []
    for lam in parts:
        for mu in parts:
            for nu in parts:
                excess = ent[lam] - ent[mu] - ent[nu]
                if excess > tol and kronecker(lam, mu, nu) != 0:
                    out.append((lam, mu, nu, excess))
    return out


def lr_vanishing_violations(total: int, tol: float = 1e-12) -> list[tuple[Partition, Partition, Partition, float]]:
    """Triples ``mu |- m``, ``nu |- n``, ``lam |- m + n`` (``m, n >= 1``, ``m + n <= total``)
    with ``c^lam_{mu nu} != 0`` violating either side of

        m H(mu/m) + n H(nu/n) <= (m+n) H(lam/(m+n)) <= m H(mu/m) + n H(nu/n) + (m+n) h(m/(m+n)).

    The reported value is the amount by which the violated side fails.
    """
    out = []
    for s in range(2, total + 1):
        for m in range(1, s):
            n = s - m
            slack = s * binary_entropy(m / s)
            for mu in enumerate_partitions(m):
                for nu in enumerate_partitions(n):
                    base = m * partition_entropy(mu) + n * partition_entropy(nu)
                    for lam in enumerate_partitions(s):
                        mid = s * partition_entropy(lam)
                        excess = max(base - mid, mid - base - slack)
                        if excess > tol and littlewood_richardson(lam, mu, nu) != 0:
                            out.append((lam, mu, nu, excess))
    return out
