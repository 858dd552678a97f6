"""Weighted operator geometric means, nested mean trees and PSD-order utilities.

The two-variable mean is the Kubo-Ando weighted geometric mean

    A #_t B = B^{1/2} (B^{-1/2} A B^{-1/2})^t B^{1/2},

with ``t`` the weight of the *left* operand, so commuting arguments give
``A^t B^{1-t}``. Nesting such means along a binary tree yields a multivariate
mean whose effective weights are products of branch weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

PSD_TOL = 1e-10
REGULARIZATION = 1e-12

Weight = Union[float, Fraction]


class SupportError(ValueError):
    """The support of ``A`` is not contained in the support of ``B`` (strict mode)."""


def hermitian(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return (a + a.conj().T) / 2


def op_norm(a: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(hermitian(a))).max(initial=0.0))


def psd_eigh(a: np.ndarray, tol: float = PSD_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a PSD matrix with tiny negative eigenvalues clipped."""
    w, v = np.linalg.eigh(hermitian(a))
    scale = max(np.abs(w).max(initial=0.0), 1.0)
    if w.size and w.min() < -tol * scale:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    return np.clip(w, 0.0, None), v


def psd_power(a: np.ndarray, t: float, tol: float = PSD_TOL) -> np.ndarray:
    """``A^t`` through the spectral decomposition.

    For ``t > 0`` the kernel of ``A`` stays the kernel; negative powers need
    ``A`` strictly positive (smallest eigenvalue above ``tol * ||A||``).
    """
    w, v = psd_eigh(a, tol)
    if t < 0 and (w.size == 0 or w.min() <= tol * max(w.max(), 1e-300)):
        raise ValueError("negative power of a singular matrix")
    wt = np.zeros_like(w)
    pos = w > 0
    wt[pos] = w[pos] ** t
    out = (v * wt) @ v.conj().T
    return hermitian(out)


def psd_function(a: np.ndarray, fn) -> np.ndarray:
    w, v = psd_eigh(a)
    return hermitian((v * fn(w)) @ v.conj().T)


# --------------------------------------------------------------------------
# PSD order


@dataclass(frozen=True)
class OrderCheck:
    """Outcome of a ``A <= B`` test.

    ``margin`` is the smallest eigenvalue of ``B - A`` divided by
    ``max(1, ||B||)``; ``witness`` is the corresponding eigenvector.
    """

    holds: bool
    margin: float
    witness: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.holds


def psd_leq(a: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> OrderCheck:
    """Check ``A <= B`` in the Loewner order with tolerance ``tol * max(1, ||B||)``."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    scale = max(1.0, op_norm(b))
    w, v = np.linalg.eigh(hermitian(b - a))
    margin = float(w[0]) / scale
    holds = margin >= -tol
    return OrderCheck(holds, margin, None if holds else v[:, 0])


# --------------------------------------------------------------------------
# two-variable mean


def _support_projector(w: np.ndarray, v: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    keep = w > tol * max(w.max(initial=0.0), 1e-300)
    return w[keep], v[:, keep]


def _kubo_ando(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """B-anchored formula for strictly positive ``B``."""
    w, v = psd_eigh(b)
    half = (v * np.sqrt(w)) @ v.conj().T
    inv_half = (v / np.sqrt(w)) @ v.conj().T
    inner = psd_power(inv_half @ a @ inv_half, t)
    return hermitian(half @ inner @ half)


def gmean_pair_dual(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    """A-anchored formula ``A^{1/2} (A^{-1/2} B A^{-1/2})^{1-t} A^{1/2}`` (strictly positive ``A``)."""
    return _kubo_ando(b, a, 1.0 - float(t))


def gmean_pair(a: np.ndarray, b: np.ndarray, t: Weight, strict: bool = False, tol: float = PSD_TOL) -> np.ndarray:
    """Weighted geometric mean ``A #_t B`` (weight ``t`` on ``A``).

    Parameters
    ----------
    a, b : PSD matrices of equal shape.
    t : weight in ``[0, 1]`` given to ``a``.
    strict : bool
        If ``B`` is singular and the support of ``A`` is not inside that of
        ``B``, raise :class:`SupportError` instead of regularizing.

    Notes
    -----
    Singular ``B`` with ``supp A <= supp B`` is handled exactly by restricting
    to the support of ``B``. Otherwise ``B`` is replaced by ``B + eps I``
    (``eps = 1e-12 ||B||``) and the result is extrapolated with one Richardson
    step ``2 G(eps) - G(2 eps)``.
    """
    a, b = hermitian(np.asarray(a, dtype=complex)), hermitian(np.asarray(b, dtype=complex))
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError("weight must lie in [0, 1]")
    if t == 0.0:
        return b
    if t == 1.0:
        return a
    wb, vb = psd_eigh(b, tol)
    psd_eigh(a, tol)
    scale = max(wb.max(initial=0.0), 1e-300)
    if wb.size and wb.min() > tol * scale:
        return _kubo_ando(a, b, t)
    ws, vs = _support_projector(wb, vb, tol)
    if ws.size == 0:
        # B = 0: the mean vanishes for t < 1
        return np.zeros_like(a)
    a_outside = a - vs @ (vs.conj().T @ a @ vs) @ vs.conj().T
    if op_norm(a_outside) <= tol * max(op_norm(a), 1.0):
        a_r = vs.conj().T @ a @ vs
        b_r = np.diag(ws).astype(complex)
        return hermitian(vs @ _kubo_ando(a_r, b_r, t) @ vs.conj().T)
    if strict:
        raise SupportError("support of A is not contained in the support of B")
    eps = REGULARIZATION * max(op_norm(b), 1.0)
    eye = np.eye(b.shape[0])
    g1 = _kubo_ando(a, b + eps * eye, t)
    g2 = _kubo_ando(a, b + 2 * eps * eye, t)
    return hermitian(2 * g1 - g2)


# --------------------------------------------------------------------------
# mean trees


@dataclass(frozen=True)
class Leaf:
    index: int


@dataclass(frozen=True)
class Node:
    """Weighted mean of two subtrees; ``t`` is the weight of ``left``."""

    left: "GMeanTree"
    right: "GMeanTree"
    t: Weight

    def __post_init__(self) -> None:
        if not 0 <= self.t <= 1:
            raise ValueError(f"branch weight {self.t} outside [0, 1]")


GMeanTree = Union[Leaf, Node]


def leaves(tree: GMeanTree) -> list[int]:
    if isinstance(tree, Leaf):
        return [tree.index]
    return leaves(tree.left) + leaves(tree.right)


def validate_tree(tree: GMeanTree) -> int:
    """Return the number of leaves; indices must be exactly ``0..r-1``."""
    idx = leaves(tree)
    if sorted(idx) != list(range(len(idx))):
        raise ValueError(f"leaf indices {idx} are not a permutation of 0..{len(idx) - 1}")
    return len(idx)


def effective_weights(tree: GMeanTree) -> list[Weight]:
    """Products of branch weights along each root-to-leaf path, indexed by leaf.

    Exact when the branch weights are ``Fraction``s.
    """
    r = validate_tree(tree)
    out: list[Weight] = [0] * r

    def walk(node: GMeanTree, acc: Weight) -> None:
        if isinstance(node, Leaf):
            out[node.index] = acc
            return
        walk(node.left, acc * node.t)
        walk(node.right, acc * (1 - node.t))

    walk(tree, Fraction(1))
    return out


def gmean_tree(tree: GMeanTree, ops: Sequence[np.ndarray], strict: bool = False) -> np.ndarray:
    """Evaluate the nested mean of ``ops`` described by ``tree``."""
    if validate_tree(tree) != len(ops):
        raise ValueError(f"tree has {len(leaves(tree))} leaves but {len(ops)} operands were given")

    def ev(node: GMeanTree) -> np.ndarray:
        if isinstance(node, Leaf):
            return hermitian(np.asarray(ops[node.index], dtype=complex))
        return gmean_pair(ev(node.left), ev(node.right), node.t, strict=strict)

    return ev(tree)


def gmean_scalars(tree: GMeanTree, values: Sequence[float]) -> float:
    """The mean evaluated on numbers: ``prod_i x_i^{theta_i}``."""
    theta = effective_weights(tree)
    if any(v == 0 and th > 0 for v, th in zip(values, theta)):
        return 0.0
    return float(math.prod(float(v) ** float(th) for v, th in zip(values, theta) if th > 0))


def tree_from_weights(theta: Sequence[Weight], policy: str = "balanced") -> GMeanTree:
    """Build a tree with effective weights ``theta``.

    ``policy`` is ``"left-comb"`` (``((0, 1), 2), ...``) or ``"balanced"``
    (recursive halving). Zero-weight leaves are kept with zero branch weight.
    """
    theta = [Fraction(x) if isinstance(x, (int, Fraction)) else x for x in theta]
    if not theta:
        raise ValueError("need at least one weight")
    if any(x < 0 for x in theta):
        raise ValueError("weights must be nonnegative")
    total = sum(theta)
    if abs(float(total) - 1.0) > 1e-12:
        raise ValueError(f"weights sum to {float(total)}, expected 1")

    def ratio(num: Weight, den: Weight) -> Weight:
        return num / den if den != 0 else Fraction(1, 2)

    def build(ids: list[int]) -> GMeanTree:
        if len(ids) == 1:
            return Leaf(ids[0])
        if policy == "left-comb":
            left_ids, right_ids = ids[:-1], ids[-1:]
        elif policy == "balanced":
            half = (len(ids) + 1) // 2
            left_ids, right_ids = ids[:half], ids[half:]
        else:
            raise ValueError(f"unknown tree policy {policy!r}")
        wl = sum(theta[i] for i in left_ids)
        wr = sum(theta[i] for i in right_ids)
        return Node(build(left_ids), build(right_ids), ratio(wl, wl + wr))

    return build(list(range(len(theta))))


# --------------------------------------------------------------------------
# max-divergence


def max_divergence_rank1(psi: np.ndarray, a: np.ndarray, tol: float = PSD_TOL) -> float:
    """``D_max(|psi><psi| || A) = log2 <psi| A^{-1} |psi>`` for a unit vector ``psi``.

    ``A`` may be singular as long as ``psi`` lies in its support; the inverse
    is then taken on the support.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ValueError("psi must be a unit vector")
    w, v = psd_eigh(a, tol)
    keep = w > tol * max(w.max(initial=0.0), 1e-300)
    coeff = v.conj().T @ psi
    if np.linalg.norm(coeff[~keep]) > 1e-9:
        raise ValueError("A is singular along psi")
    value = float(np.sum(np.abs(coeff[keep]) ** 2 / w[keep]))
    return math.log2(value)


# --------------------------------------------------------------------------
# sampled mean properties


def random_psd(rng: np.random.Generator, d: int, shift: float = 0.0) -> np.ndarray:
    """Complex Wishart matrix ``Z Z^* / d + shift I`` (positive definite almost surely)."""
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitian(z @ z.conj().T / d + shift * np.eye(d))


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _rel_gap(x: np.ndarray, y: np.ndarray) -> float:
    """``-||x - y|| / max(1, ||y||)``: a nonpositive equality margin."""
    return -float(np.linalg.norm(x - y, 2)) / max(1.0, float(np.linalg.norm(y, 2)))


def _block_diag(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros((a.shape[0] + b.shape[0],) * 2, dtype=complex)
    out[: a.shape[0], : a.shape[0]] = a
    out[a.shape[0] :, a.shape[0] :] = b
    return out


def mean_property_margins(
    tree: GMeanTree, ops: Sequence[np.ndarray], rng: np.random.Generator, tol: float = 1e-9
) -> dict[str, float]:
    """Margins of the mean axioms and two consequences on one random instance.

    Every margin is ``>= -tol`` when the property holds: equalities report
    minus the normalized deviation, order relations the normalized smallest
    eigenvalue of the difference (:func:`psd_leq`).

    Keys: ``G1`` unitary covariance, ``G2`` monotonicity, ``G3`` tensor
    factorization, ``G4`` direct-sum factorization, ``G5`` homogeneity,
    ``G6`` joint concavity (midpoint), ``vector_lower`` the lower bound by a
    rank-one projector scaled with max-divergences, ``expectation_upper``
    ``<psi|G|psi> <= prod_i <psi|A_i|psi>^theta_i``.
    """
    r = len(ops)
    d = ops[0].shape[0]
    theta = [float(w) for w in effective_weights(tree)]
    g = gmean_tree(tree, ops)
    out: dict[str, float] = {}

    u = random_unitary(rng, d)
    out["G1"] = _rel_gap(gmean_tree(tree, [u @ a @ u.conj().T for a in ops]), u @ g @ u.conj().T)

    bigger = [a + random_psd(rng, d) for a in ops]
    out["G2"] = psd_leq(g, gmean_tree(tree, bigger), tol).margin

    others = [random_psd(rng, 2, 0.1) for _ in range(r)]
    g_other = gmean_tree(tree, others)
    out["G3"] = _rel_gap(gmean_tree(tree, [np.kron(a, b) for a, b in zip(ops, others)]), np.kron(g, g_other))
    out["G4"] = _rel_gap(gmean_tree(tree, [_block_diag(a, b) for a, b in zip(ops, others)]), _block_diag(g, g_other))

    lam = 2.7
    out["G5"] = _rel_gap(gmean_tree(tree, [lam * a for a in ops]), lam * g)

    second = [random_psd(rng, d) for _ in range(r)]
    mid = gmean_tree(tree, [(a + b) / 2 for a, b in zip(ops, second)])
    out["G6"] = psd_leq((g + gmean_tree(tree, second)) / 2, mid, tol).margin

    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    expo = sum(th * max_divergence_rank1(psi, a) for th, a in zip(theta, ops))
    out["vector_lower"] = psd_leq(2.0**-expo * np.outer(psi, psi.conj()), g, tol).margin

    lhs = float(np.real(psi.conj() @ g @ psi))
    rhs = math.prod(float(np.real(psi.conj() @ a @ psi)) ** th for th, a in zip(theta, ops))
    out["expectation_upper"] = (rhs - lhs) / max(1.0, rhs)
    return out
