"""Symmetric subspaces, isotypic projectors and the equivariant isometries between them.

Vectors on ``H^{(x)n}`` with ``H = H_1 (x) ... (x) H_k`` are stored copy-major:
the full index is ``(s_1, ..., s_n)`` with each ``s_t`` a mixed-radix index
over the parties. A permutation acts by

    (rho(sigma) v)(s_1, ..., s_n) = v(s_{sigma(1)}, ..., s_{sigma(n)}),

optionally only on the digits of a subset ``S`` of parties (``rho_S``).

Operators that commute with the diagonal permutation action are kept in the
compressed basis of ``Sym^n(H)``: one normalized vector per multiset of ``n``
symbols from ``range(D)``, ``D = dim H``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, permutations
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .partitions import (
    Partition,
    as_partition,
    centralizer_order,
    enumerate_partitions,
    irrep_dim,
    mn_character,
)

DEFAULT_CAP = 7
SYMMETRY_TOL = 1e-9
_MAX_CODE = 2**62


class CapExceededError(ValueError):
    """Raised when a copy count exceeds the configured hard cap."""


def check_cap(n: int, cap: int | None) -> None:
    cap = DEFAULT_CAP if cap is None else cap
    if n > cap:
        raise CapExceededError(f"n = {n} exceeds the copy cap {cap}")


# --------------------------------------------------------------------------
# permutations


def cycle_type(perm: Sequence[int]) -> Partition:
    seen = [False] * len(perm)
    lengths = []
    for start in range(len(perm)):
        if seen[start]:
            continue
        length, j = 0, start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths, reverse=True))


@lru_cache(maxsize=None)
def permutation_table(n: int) -> tuple[np.ndarray, np.ndarray, list[Partition]]:
    """All permutations of ``range(n)`` with their class labels.

    Returns ``(perms, class_idx, classes)`` where ``perms`` has shape
    ``(n!, n)`` and ``classes[class_idx[i]]`` is the cycle type of ``perms[i]``.
    """
    classes = enumerate_partitions(n)
    lookup = {c: i for i, c in enumerate(classes)}
    perms = np.array(list(permutations(range(n))), dtype=np.int64).reshape(-1, n)
    class_idx = np.array([lookup[cycle_type(p)] for p in perms], dtype=np.int64)
    perms.setflags(write=False)
    class_idx.setflags(write=False)
    return perms, class_idx, classes


def class_function(n: int, weights: Mapping[Partition, float]) -> np.ndarray:
    """Class function ``f = sum_lam c_lam (dim lam / n!) chi_lam`` indexed like ``permutation_table(n)[2]``.

    ``sum_sigma f(sigma) rho(sigma)`` is then ``sum_lam c_lam P_lam``.
    """
    classes = enumerate_partitions(n)
    out = np.zeros(len(classes))
    fact = math.factorial(n)
    for lam, c in weights.items():
        if c == 0:
            continue
        lam = as_partition(lam)
        d = irrep_dim(lam)
        for i, cls in enumerate(classes):
            out[i] += c * d * mn_character(lam, cls) / fact
    return out


# --------------------------------------------------------------------------
# compressed symmetric basis


@dataclass(frozen=True)
class SymBasis:
    """Orthonormal vectors of ``Sym^n(C^D)`` labelled by sorted symbol sequences.

    ``seqs[x]`` is the nondecreasing representative of multiset ``x``;
    ``orbit[x]`` the number of strings it stands for; ``codes[x]`` its base-D
    integer code (strictly increasing in ``x``). The full basis comes from
    :func:`sym_basis`; :func:`sym_subbasis` gives the span of a subset.
    """

    D: int
    n: int
    seqs: np.ndarray = field(repr=False)
    orbit: np.ndarray = field(repr=False)
    codes: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return int(self.seqs.shape[0])

    @property
    def is_full(self) -> bool:
        return self.dim == math.comb(self.D + self.n - 1, self.n)

    def encode(self, sorted_seqs: np.ndarray) -> np.ndarray:
        """Base-D codes of nondecreasing sequences along the last axis."""
        powers = self.D ** np.arange(self.n - 1, -1, -1, dtype=np.int64)
        return np.asarray(sorted_seqs, dtype=np.int64) @ powers

    def index(self, seqs: np.ndarray, check: bool = True) -> np.ndarray:
        """Basis position of arbitrary symbol sequences (sorted internally).

        With ``check`` a ``KeyError`` is raised for multisets outside this basis.
        """
        codes = self.encode(np.sort(seqs, axis=-1))
        idx = np.searchsorted(self.codes, codes)
        if check:
            clipped = np.minimum(idx, self.dim - 1)
            if np.any(self.codes[clipped] != codes):
                raise KeyError("multiset outside the (sub)basis")
        return idx


def orbit_sizes(sorted_seqs: np.ndarray) -> np.ndarray:
    """``n! / prod(multiplicity!)`` for each nondecreasing row."""
    seqs = np.asarray(sorted_seqs)
    rows, n = seqs.shape
    denom = np.ones(rows, dtype=np.int64)
    run = np.ones(rows, dtype=np.int64)
    for t in range(1, n):
        same = seqs[:, t] == seqs[:, t - 1]
        run = np.where(same, run + 1, 1)
        denom *= run
    return math.factorial(n) // denom


def _make_basis(D: int, n: int, seqs: np.ndarray) -> SymBasis:
    if float(D) ** n >= _MAX_CODE:
        raise ValueError(f"D^n = {D}^{n} too large for integer codes")
    seqs = np.asarray(seqs, dtype=np.int64)
    if seqs.ndim != 2:
        seqs = seqs.reshape(-1, n)
    seqs = np.sort(seqs, axis=1)
    powers = D ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = seqs @ powers
    codes, first = np.unique(codes, return_index=True)
    seqs = seqs[first]
    orbit = orbit_sizes(seqs)
    for arr in (seqs, orbit, codes):
        arr.setflags(write=False)
    return SymBasis(D, n, seqs, orbit, codes)


@lru_cache(maxsize=None)
def sym_basis(D: int, n: int) -> SymBasis:
    """Deterministic multiset basis of ``Sym^n(C^D)``, of dimension ``C(D+n-1, n)``."""
    if D < 1 or n < 0:
        raise ValueError("need D >= 1 and n >= 0")
    if float(D) ** n >= _MAX_CODE:
        raise ValueError(f"D^n = {D}^{n} too large for integer codes")
    combos = list(combinations_with_replacement(range(D), n))
    seqs = np.array(combos, dtype=np.int64).reshape(len(combos), n)
    return _make_basis(D, n, seqs)


def sym_subbasis(D: int, n: int, seqs: np.ndarray) -> SymBasis:
    """Basis of the span of the given multisets (duplicates removed, sorted by code)."""
    return _make_basis(D, n, seqs)


def block_count_subbasis(dims_h: Sequence[int], dims_k: Sequence[int], n: int, n_k: int) -> SymBasis:
    """Multisets in ``Sym^n(H + K)`` (partywise direct sums) with exactly ``n_k`` K-block digits per party.

    Operators built from partial permutations of copies preserve these
    per-party counts, so the span is invariant for every observable here and
    contains the image of :func:`embed_direct_sum`.
    """
    dims_h, dims_k = tuple(dims_h), tuple(dims_k)
    k = len(dims_h)
    out_dims = tuple(a + b for a, b in zip(dims_h, dims_k))
    D = math.prod(out_dims)
    # group symbols by which parties carry a K-block digit
    digits = _digits(np.arange(D), out_dims)
    pattern = (digits >= np.asarray(dims_h)) @ (1 << np.arange(k))
    classes = {p: np.flatnonzero(pattern == p) for p in range(1 << k)}
    classes = {p: v for p, v in classes.items() if v.size}
    pats = sorted(classes)
    bits = np.array([[(p >> j) & 1 for j in range(k)] for p in pats])
    rows: list[np.ndarray] = []

    def choose(i: int, remaining: int, counts: list[int]) -> None:
        if i == len(pats):
            if remaining == 0 and np.all(np.asarray(counts) @ bits == n_k):
                parts = [
                    np.array(list(combinations_with_replacement(classes[p], c)), dtype=np.int64).reshape(-1, c)
                    if c
                    else np.zeros((1, 0), dtype=np.int64)
                    for p, c in zip(pats, counts)
                ]
                grid = parts[0]
                for part in parts[1:]:
                    grid = np.concatenate(
                        [np.repeat(grid, len(part), axis=0), np.tile(part, (len(grid), 1))], axis=1
                    )
                rows.append(grid)
            return
        for c in range(remaining + 1):
            partial = np.asarray(counts + [c]) @ bits[: i + 1]
            if np.any(partial > n_k):
                break
            choose(i + 1, remaining - c, counts + [c])

    choose(0, n, [])
    seqs = np.concatenate(rows, axis=0) if rows else np.zeros((0, n), dtype=np.int64)
    return sym_subbasis(D, n, seqs)


@lru_cache(maxsize=32)
def _full_to_basis(D: int, n: int) -> np.ndarray:
    basis = sym_basis(D, n)
    strings = np.indices((D,) * n).reshape(n, -1).T
    out = basis.index(strings)
    out.setflags(write=False)
    return out


def lift(c: np.ndarray, basis: SymBasis) -> np.ndarray:
    """Embed compressed coordinates into ``(C^D)^{(x)n}`` (first axis; batches allowed)."""
    c = np.asarray(c)
    if c.shape[0] != basis.dim:
        raise ValueError(f"expected {basis.dim} compressed coordinates, got {c.shape[0]}")
    idx = _full_to_basis(basis.D, basis.n)
    scale = 1.0 / np.sqrt(basis.orbit)
    scaled = c * scale.reshape((-1,) + (1,) * (c.ndim - 1))
    return scaled[idx]


def compress(v: np.ndarray, basis: SymBasis, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Compressed coordinates of a symmetric vector (first axis; batches allowed).

    Raises ``ValueError`` if ``v`` is farther than ``tol`` (relative) from its
    symmetrization.
    """
    v = np.asarray(v)
    if v.shape[0] != basis.D**basis.n:
        raise ValueError(f"vector length {v.shape[0]} is not {basis.D}^{basis.n}")
    idx = _full_to_basis(basis.D, basis.n)
    flat = v.reshape(v.shape[0], -1)
    sums = np.zeros((basis.dim, flat.shape[1]), dtype=np.result_type(flat, float))
    np.add.at(sums, idx, flat)
    c = sums / np.sqrt(basis.orbit)[:, None]
    residual = np.linalg.norm(flat - lift(c, basis))
    if residual > tol * max(1.0, float(np.linalg.norm(flat))):
        raise ValueError(f"vector is not symmetric (residual {residual:.3e})")
    return c.reshape((basis.dim,) + v.shape[1:])


def power_vector(psi: np.ndarray, n: int) -> np.ndarray:
    """Compressed coordinates of ``psi^{(x)n}``: ``sqrt(orbit_x) prod_t psi[x_t]``."""
    psi = np.asarray(psi).ravel()
    basis = sym_basis(psi.size, n)
    if n == 0:
        return np.ones(1, dtype=psi.dtype)
    return np.sqrt(basis.orbit) * np.prod(psi[basis.seqs], axis=1)


# --------------------------------------------------------------------------
# matrix-free projectors on the full tensor power


def _party_axes(dims: Sequence[int], n: int) -> tuple[int, ...]:
    return tuple(int(d) for d in dims) * n


def _check_full(v: np.ndarray, dims: Sequence[int], n: int) -> np.ndarray:
    total = math.prod(dims) ** n
    if v.shape[0] != total:
        raise ValueError(f"vector length {v.shape[0]} does not match dims {tuple(dims)} and n={n}")
    return v.reshape(total, -1)


def _transpose_axes(sigma: Sequence[int], k: int, side: Iterable[int]) -> list[int]:
    n = len(sigma)
    inv = np.argsort(sigma)
    side = set(side)
    axes = []
    for t in range(n):
        for j in range(k):
            src = inv[t] if j in side else t
            axes.append(int(src) * k + j)
    return axes


def permutation_apply(
    sigma: Sequence[int], v: np.ndarray, dims: Sequence[int], side: Iterable[int] | None = None
) -> np.ndarray:
    """``rho_S(sigma) v`` for ``v`` on ``(H_1 (x) ... (x) H_k)^{(x)n}`` (first axis; batches allowed)."""
    n, k = len(sigma), len(dims)
    side = range(k) if side is None else side
    flat = _check_full(np.asarray(v), dims, n)
    batch = flat.shape[1]
    t = flat.reshape(_party_axes(dims, n) + (batch,))
    axes = _transpose_axes(sigma, k, side) + [n * k]
    return np.transpose(t, axes).reshape(v.shape)


def class_operator_apply(
    f: np.ndarray,
    v: np.ndarray,
    dims: Sequence[int],
    n: int,
    side: Iterable[int] | None = None,
    cap: int | None = None,
) -> np.ndarray:
    """``sum_sigma f(sigma) rho_S(sigma) v`` for a class function ``f`` (see :func:`class_function`)."""
    check_cap(n, cap)
    perms, class_idx, _ = permutation_table(n)
    v = np.asarray(v)
    out = np.zeros(v.shape, dtype=np.result_type(v, float))
    # fixed summation order keeps results reproducible
    for sigma, ci in zip(perms, class_idx):
        if f[ci] != 0:
            out += f[ci] * permutation_apply(sigma, v, dims, side)
    return out


def isotypic_apply(
    lam: Sequence[int],
    v: np.ndarray,
    dims: Sequence[int],
    n: int | None = None,
    side: Iterable[int] | None = None,
    cap: int | None = None,
) -> np.ndarray:
    """Apply ``P_lam^{H_S} (x) I`` to ``v``.

    Parameters
    ----------
    lam : partition of ``n``
    v : ndarray
        Vector (or batch of column vectors) on ``(H_1 (x) ... (x) H_k)^{(x)n}``.
    dims : local dimensions ``(d_1, ..., d_k)``.
    side : parties forming ``H_S``; ``None`` means the whole space.
    cap : copy cap (default 7).
    """
    lam = as_partition(lam)
    n = sum(lam) if n is None else n
    if sum(lam) != n:
        raise ValueError(f"{lam} is not a partition of {n}")
    f = class_function(n, {lam: 1.0})
    return class_operator_apply(f, v, dims, n, side, cap)


def isotypic_decompose(
    v: np.ndarray,
    dims: Sequence[int],
    n: int,
    side: Iterable[int] | None = None,
    cap: int | None = None,
) -> dict[Partition, np.ndarray]:
    """``{lam: P_lam v}`` for every ``lam`` of ``n``, sharing one pass over ``S_n``."""
    check_cap(n, cap)
    perms, class_idx, classes = permutation_table(n)
    lams = enumerate_partitions(n)
    chars = np.array([[mn_character(lam, c) for c in classes] for lam in lams], dtype=float)
    coeff = chars * np.array([irrep_dim(lam) for lam in lams])[:, None] / math.factorial(n)
    v = np.asarray(v)
    out = np.zeros((len(lams),) + v.shape, dtype=np.result_type(v, float))
    for sigma, ci in zip(perms, class_idx):
        moved = permutation_apply(sigma, v, dims, side)
        out += coeff[:, ci].reshape((-1,) + (1,) * v.ndim) * moved[None]
    return {lam: out[i] for i, lam in enumerate(lams)}


def is_symmetric(v: np.ndarray, D: int, n: int, tol: float = SYMMETRY_TOL) -> bool:
    try:
        compress(v, sym_basis(D, n), tol)
    except ValueError:
        return False
    return True


def flattening_projector_apply(
    side: Iterable[int],
    lam: Sequence[int],
    v: np.ndarray,
    dims: Sequence[int],
    cap: int | None = None,
    tol: float = SYMMETRY_TOL,
) -> np.ndarray:
    """``(P_lam^{H_S} (x) I) v`` for ``v`` in ``Sym^n(H)``; input symmetry is checked."""
    lam = as_partition(lam)
    n = sum(lam)
    D = math.prod(dims)
    flat = np.asarray(v).reshape(D**n, -1)
    for col in flat.T:
        if not is_symmetric(col, D, n, tol):
            raise ValueError("flattening projectors are only defined on symmetric inputs")
    return isotypic_apply(lam, v, dims, n, side, cap)


# --------------------------------------------------------------------------
# Schur-Weyl measure


def power_sum(r: np.ndarray, mu: Partition) -> float:
    r = np.asarray(r, dtype=float)
    return float(np.prod([np.sum(r**part) for part in mu])) if mu else 1.0


def schur_polynomial(lam: Sequence[int], r: np.ndarray) -> float:
    """``s_lam(r) = sum_mu chi_lam(mu) p_mu(r) / z_mu``."""
    lam = as_partition(lam)
    n = sum(lam)
    return sum(
        mn_character(lam, mu) * power_sum(r, mu) / centralizer_order(mu)
        for mu in enumerate_partitions(n)
    )


def schur_weyl_measure(lam: Sequence[int], r: np.ndarray) -> float:
    """``Tr P_lam rho^{(x)n} = dim[lam] s_lam(r)`` for a state with spectrum ``r``."""
    lam = as_partition(lam)
    if len(lam) > np.count_nonzero(np.asarray(r)) and len(lam) > len(r):
        return 0.0
    return irrep_dim(lam) * schur_polynomial(lam, r)


# --------------------------------------------------------------------------
# compressed operators


def _digits(symbols: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Split flat symbols into per-party digits along a new last axis."""
    return np.stack(np.unravel_index(symbols, tuple(dims)), axis=-1)


def class_operator_sparse(
    dims: Sequence[int],
    n: int,
    side: Iterable[int],
    f: np.ndarray,
    basis: SymBasis | None = None,
    cap: int | None = None,
    chunk: int = 720,
) -> sparse.csr_matrix:
    """Sparse matrix of ``sum_sigma f(sigma) rho_S(sigma)`` in a compressed (sub)basis.

    ``f`` must be a class function (see :func:`class_function`), so the operator
    commutes with the diagonal action and preserves ``Sym^n(H)``. Each column
    is gathered from the images of one representative string:

        M[x, y] = sum_sigma f(sigma) sqrt(orbit_y / orbit_x) [sort(rho_S(sigma) rep_y) = x].

    ``basis`` may be any sub-basis whose span the operator preserves (for
    example :func:`block_count_subbasis`); images leaving it raise ``KeyError``.
    """
    check_cap(n, cap)
    dims = tuple(int(d) for d in dims)
    D = math.prod(dims)
    basis = sym_basis(D, n) if basis is None else basis
    if basis.D != D or basis.n != n:
        raise ValueError("basis does not match dims and n")
    side_mask = np.zeros(len(dims), dtype=bool)
    side_mask[list(side)] = True
    perms, class_idx, _ = permutation_table(n)
    keep = f[class_idx] != 0
    perms, weights = perms[keep], f[class_idx][keep]
    digits = _digits(basis.seqs, dims)  # (dim, n, k)
    strides = np.array([math.prod(dims[j + 1 :]) for j in range(len(dims))], dtype=np.int64)
    cols = np.arange(basis.dim)
    total = sparse.csr_matrix((basis.dim, basis.dim))
    step = max(1, min(chunk, 4_000_000 // max(1, basis.dim * n)))
    for start in range(0, len(perms), step):
        block, w = perms[start : start + step], weights[start : start + step]
        moved = digits[:, block, :]  # (dim, p, n, k): copy t takes copy sigma(t) on S
        mixed = np.where(side_mask, moved, digits[:, None, :, :])
        symbols = mixed @ strides  # (dim, p, n)
        rows = basis.index(symbols)  # (dim, p)
        val = w[None, :] * np.sqrt(basis.orbit[:, None] / basis.orbit[rows])
        part = sparse.coo_matrix(
            (val.ravel(), (rows.ravel(), np.broadcast_to(cols[:, None], rows.shape).ravel())),
            shape=(basis.dim, basis.dim),
        )
        total = total + part.tocsr()
    total.sum_duplicates()
    asym = abs(total - total.T).max() if total.nnz else 0.0
    scale = max(1.0, abs(total).max() if total.nnz else 0.0)
    if asym > 1e-8 * scale:
        raise RuntimeError(f"class operator is not symmetric (deviation {asym:.3e})")
    return ((total + total.T) / 2).tocsr()


def compressed_class_operator(
    dims: Sequence[int],
    n: int,
    side: Iterable[int],
    f: np.ndarray,
    basis: SymBasis | None = None,
    cap: int | None = None,
) -> np.ndarray:
    """Dense version of :func:`class_operator_sparse`."""
    return class_operator_sparse(dims, n, side, f, basis, cap).toarray()


def compressed_isotypic_operator(
    dims: Sequence[int],
    side: Iterable[int],
    weights: Mapping[Partition, float],
    n: int,
    basis: SymBasis | None = None,
    cap: int | None = None,
) -> np.ndarray:
    """``sum_lam c_lam (P_lam^{H_S} (x) I)`` restricted to ``Sym^n(H)`` (or an invariant sub-basis)."""
    return compressed_class_operator(dims, n, side, class_function(n, weights), basis, cap)


def dense_isotypic_operator(
    dims: Sequence[int],
    side: Iterable[int],
    weights: Mapping[Partition, float],
    n: int,
    cap: int | None = None,
) -> np.ndarray:
    """Same operator assembled column by column through lift, projector and compress.

    Slower than :func:`compressed_isotypic_operator`; kept as an independent route.
    """
    D = math.prod(dims)
    basis = sym_basis(D, n)
    cols = lift(np.eye(basis.dim), basis)
    f = class_function(n, weights)
    image = class_operator_apply(f, cols, dims, n, side, cap)
    m = compress(image, basis).real
    return (m + m.T) / 2


def sym_power_operator(u: np.ndarray, n: int, row_chunk: int = 256) -> np.ndarray:
    """``u^{(x)n}`` restricted to symmetric subspaces, in compressed bases.

    ``u`` maps ``C^{D_in}`` to ``C^{D_out}``; the result has shape
    ``(dim Sym^n(C^{D_out}), dim Sym^n(C^{D_in}))`` with entries

        perm(u[x, y]) / sqrt(prod mult_x! prod mult_y!),

    the permanent of the ``n x n`` submatrix picked by the two multisets.
    """
    u = np.asarray(u, dtype=complex)
    d_out, d_in = u.shape
    src, dst = sym_basis(d_in, n), sym_basis(d_out, n)
    if n == 0:
        return np.ones((1, 1), dtype=complex)
    perms, _, _ = permutation_table(n)
    fact = math.factorial(n)
    norm_src = np.sqrt(fact / src.orbit)  # sqrt(prod mult!)
    norm_dst = np.sqrt(fact / dst.orbit)
    out = np.zeros((dst.dim, src.dim), dtype=complex)
    for start in range(0, dst.dim, row_chunk):
        rows = dst.seqs[start : start + row_chunk]
        sub = u[rows[:, None, :, None], src.seqs[None, :, None, :]]  # (r, c, n, n)
        acc = np.zeros(sub.shape[:2], dtype=complex)
        for sigma in perms:
            acc += np.prod(sub[:, :, np.arange(n), sigma], axis=-1)
        out[start : start + row_chunk] = acc
    return out / norm_dst[:, None] / norm_src[None, :]


# --------------------------------------------------------------------------
# equivariant isometries


def inclusion_split(D: int, m: int, n: int) -> np.ndarray:
    """``Sym^{m+n}(C^D) -> Sym^m (x) Sym^n``, entry ``sqrt(orbit_y orbit_z / orbit_x)`` when ``y + z = x``.

    Rows are indexed by ``y * dim Sym^n + z``.
    """
    big, left, right = sym_basis(D, m + n), sym_basis(D, m), sym_basis(D, n)
    y = np.repeat(np.arange(left.dim), right.dim)
    z = np.tile(np.arange(right.dim), left.dim)
    joined = np.concatenate([left.seqs[y], right.seqs[z]], axis=1)
    x = big.index(joined)
    w = np.zeros((left.dim * right.dim, big.dim))
    w[np.arange(y.size), x] = np.sqrt(left.orbit[y] * right.orbit[z] / big.orbit[x])
    return w


def _merge_symbols(dims_h: Sequence[int], dims_k: Sequence[int]) -> np.ndarray:
    """Flat index in ``prod_j (d_j e_j)`` of the pair ``(i, kappa)`` of flat indices."""
    dh, dk = math.prod(dims_h), math.prod(dims_k)
    ih = _digits(np.arange(dh), dims_h)  # (dh, k)
    ik = _digits(np.arange(dk), dims_k)
    merged = ih[:, None, :] * np.asarray(dims_k) + ik[None, :, :]  # (dh, dk, k)
    out_dims = tuple(a * b for a, b in zip(dims_h, dims_k))
    return np.ravel_multi_index(tuple(np.moveaxis(merged, -1, 0)), out_dims)


def inclusion_tensor(dims_h: Sequence[int], dims_k: Sequence[int], n: int) -> np.ndarray:
    """``Sym^n(H) (x) Sym^n(K) -> Sym^n(H (x) K)`` with partywise merged local spaces.

    Entry ``sqrt(orbit_x / (orbit_y orbit_z))`` where ``x`` pairs the strings of ``y`` and ``z``.
    Columns are indexed by ``y * dim Sym^n(K) + z``.
    """
    if len(dims_h) != len(dims_k):
        raise ValueError("H and K need the same number of parties")
    dh, dk = math.prod(dims_h), math.prod(dims_k)
    bh, bk, bx = sym_basis(dh, n), sym_basis(dk, n), sym_basis(dh * dk, n)
    merge = _merge_symbols(dims_h, dims_k)
    # decompose each merged symbol back into its (H, K) pair
    inv_h = np.empty(dh * dk, dtype=np.int64)
    inv_k = np.empty(dh * dk, dtype=np.int64)
    inv_h[merge.ravel()] = np.repeat(np.arange(dh), dk)
    inv_k[merge.ravel()] = np.tile(np.arange(dk), dh)
    y = bh.index(inv_h[bx.seqs])
    z = bk.index(inv_k[bx.seqs])
    w = np.zeros((bx.dim, bh.dim * bk.dim))
    w[np.arange(bx.dim), y * bk.dim + z] = np.sqrt(bx.orbit / (bh.orbit[y] * bk.orbit[z]))
    return w


def _direct_sum_symbols(dims_h: Sequence[int], dims_k: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    out_dims = tuple(a + b for a, b in zip(dims_h, dims_k))
    ih = _digits(np.arange(math.prod(dims_h)), dims_h)
    ik = _digits(np.arange(math.prod(dims_k)), dims_k) + np.asarray(dims_h)
    to_flat = lambda d: np.ravel_multi_index(tuple(d.T), out_dims)  # noqa: E731
    return to_flat(ih), to_flat(ik)


def embed_direct_sum(
    dims_h: Sequence[int],
    dims_k: Sequence[int],
    m: int,
    n: int,
    cap: int | None = None,
    basis: SymBasis | None = None,
) -> np.ndarray:
    """``Sym^m(H) (x) Sym^n(K) -> Sym^{m+n}(H + K)`` with partywise direct sums of local spaces.

    Sends ``e_y (x) e_z`` to the basis vector of the merged multiset, so
    ``W* (psi + phi)^{(x)(m+n)} = sqrt(C(m+n, m)) psi^{(x)m} (x) phi^{(x)n}``.
    Rows refer to ``basis`` (default: the full basis of ``Sym^{m+n}(H + K)``).
    """
    if len(dims_h) != len(dims_k):
        raise ValueError("H and K need the same number of parties")
    check_cap(m + n, cap)
    map_h, map_k = _direct_sum_symbols(dims_h, dims_k)
    dh, dk = math.prod(dims_h), math.prod(dims_k)
    d_out = math.prod(a + b for a, b in zip(dims_h, dims_k))
    bh, bk = sym_basis(dh, m), sym_basis(dk, n)
    bx = sym_basis(d_out, m + n) if basis is None else basis
    y = np.repeat(np.arange(bh.dim), bk.dim)
    z = np.tile(np.arange(bk.dim), bh.dim)
    x = bx.index(np.concatenate([map_h[bh.seqs[y]], map_k[bk.seqs[z]]], axis=1))
    w = np.zeros((bx.dim, bh.dim * bk.dim))
    w[x, np.arange(y.size)] = 1.0
    return w


def direct_sum_vector(dims_h: Sequence[int], dims_k: Sequence[int], psi: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Flat amplitudes of ``psi + phi`` in the partywise direct-sum space."""
    map_h, map_k = _direct_sum_symbols(dims_h, dims_k)
    out = np.zeros(math.prod(a + b for a, b in zip(dims_h, dims_k)), dtype=complex)
    out[map_h] = np.asarray(psi).ravel()
    out[map_k] = np.asarray(phi).ravel()
    return out


def restrict(op: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``W* X W``, Hermitian-symmetrized."""
    r = w.conj().T @ op @ w
    return (r + r.conj().T) / 2
