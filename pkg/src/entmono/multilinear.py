"""Multipartite pure states: construction, tensor algebra, marginals and Schmidt data.

Amplitudes are stored densely in row-major mixed-radix order, so a state on
local dimensions ``(d_1, ..., d_k)`` reshapes to an array of that shape.
Party indices are zero-based in the library; the CLI translates to the
one-based ``"1|23"`` notation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SCHMIDT_RANK_TOL = 1e-10
PSD_TOL = 1e-10


@dataclass(frozen=True)
class MultipartiteState:
    """A vector in ``C^{d_1} (x) ... (x) C^{d_k}``.

    Parameters
    ----------
    dims : tuple of int
        Local dimensions; each must be at least 1.
    amplitudes : ndarray
        Complex vector of length ``prod(dims)``. The zero vector is allowed.
    """

    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("a state needs at least one party")
        if any(d < 1 for d in dims):
            raise ValueError(f"local dimensions must be >= 1, got {dims}")
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        if amps.size != math.prod(dims):
            raise ValueError(f"{amps.size} amplitudes do not match dims {dims}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def k(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_zero(self) -> bool:
        return not np.any(self.amplitudes)

    def normalized(self) -> "MultipartiteState":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return MultipartiteState(self.dims, self.amplitudes / nrm)

    def scaled(self, c: complex) -> "MultipartiteState":
        return MultipartiteState(self.dims, c * self.amplitudes)


# --------------------------------------------------------------------------
# bipartitions


def canonical_side(side: Iterable[int], k: int) -> frozenset[int]:
    """Canonical representative of the unordered bipartition ``{S, [k] \\ S}``.

    The representative is the side that contains party 0.
    """
    s = frozenset(int(i) for i in side)
    if any(i < 0 or i >= k for i in s):
        raise ValueError(f"party index out of range for k={k}: {sorted(s)}")
    if not s or len(s) == k:
        raise ValueError("a bipartition needs two nonempty sides")
    return s if 0 in s else frozenset(range(k)) - s


def complement(side: Iterable[int], k: int) -> frozenset[int]:
    return frozenset(range(k)) - frozenset(side)


def elementary_bipartitions(k: int) -> list[frozenset[int]]:
    """The ``k`` bipartitions ``{j} | rest`` (a single one when ``k = 2``)."""
    if k < 2:
        raise ValueError("need at least two parties")
    out: list[frozenset[int]] = []
    for j in range(k):
        b = canonical_side({j}, k)
        if b not in out:
            out.append(b)
    return out


def all_bipartitions(k: int) -> list[frozenset[int]]:
    """All ``2^{k-1} - 1`` unordered bipartitions, ordered by size then lexicographically."""
    from itertools import combinations

    out: list[frozenset[int]] = []
    rest = list(range(1, k))
    for size in range(0, k - 1):
        for combo in combinations(rest, size):
            out.append(frozenset((0,) + combo))
    return out


def format_bipartition(side: Iterable[int], k: int) -> str:
    """``{0} | {1,2}`` in one-based notation: ``"1|23"`` (commas if any party > 9)."""
    s = canonical_side(side, k)
    sep = "," if k > 9 else ""
    left = sep.join(str(i + 1) for i in sorted(s))
    right = sep.join(str(i + 1) for i in sorted(complement(s, k)))
    return f"{left}|{right}"


def parse_bipartition(text: str, k: int) -> frozenset[int]:
    """Inverse of :func:`format_bipartition`; either side may be omitted."""
    if "|" not in text:
        raise ValueError(f"bipartition {text!r} must contain '|'")
    left, right = text.split("|", 1)

    def parse_side(part: str) -> set[int]:
        part = part.strip()
        if not part:
            return set()
        tokens = part.split(",") if "," in part else list(part)
        try:
            return {int(tok) - 1 for tok in tokens}
        except ValueError as exc:
            raise ValueError(f"bad party label in {text!r}") from exc

    left_s, right_s = parse_side(left), parse_side(right)
    if left_s & right_s:
        raise ValueError(f"bipartition {text!r} has overlapping sides")
    if left_s and right_s and left_s | right_s != set(range(k)):
        raise ValueError(f"bipartition {text!r} does not cover parties 1..{k}")
    return canonical_side(left_s or complement(right_s, k), k)


# --------------------------------------------------------------------------
# constructors


def unit_tensor(r: int, k: int) -> MultipartiteState:
    """``<r> = sum_i e_i (x) ... (x) e_i`` on ``k`` parties of dimension ``r``."""
    if r < 1 or k < 1:
        raise ValueError("unit tensor needs r >= 1 and k >= 1")
    amps = np.zeros((r,) * k, dtype=complex)
    for i in range(r):
        amps[(i,) * k] = 1.0
    return MultipartiteState((r,) * k, amps.ravel())


def ghz_state(level: int, k: int) -> MultipartiteState:
    return unit_tensor(level, k).normalized()


def w_state(k: int) -> MultipartiteState:
    """Normalized W state on ``k`` qubits."""
    if k < 2:
        raise ValueError("W state needs k >= 2")
    amps = np.zeros((2,) * k, dtype=complex)
    for j in range(k):
        idx = [0] * k
        idx[j] = 1
        amps[tuple(idx)] = 1.0 / math.sqrt(k)
    return MultipartiteState((2,) * k, amps.ravel())


def random_state(dims: Sequence[int], seed: int | None = None) -> MultipartiteState:
    """Complex Gaussian amplitudes, left unnormalized."""
    rng = np.random.default_rng(seed)
    size = math.prod(int(d) for d in dims)
    amps = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return MultipartiteState(tuple(dims), amps)


def make_state(kind: str, **params) -> MultipartiteState:
    """Named constructor dispatch.

    ``kind`` is one of ``unit(r, k)``, ``ghz(level, k)``, ``w(k)``,
    ``random(dims, seed)``, ``product(vectors)`` or ``explicit(dims, amplitudes)``.
    """
    if kind == "unit":
        return unit_tensor(int(params["r"]), int(params["k"]))
    if kind == "ghz":
        return ghz_state(int(params.get("level", 2)), int(params["k"]))
    if kind == "w":
        return w_state(int(params["k"]))
    if kind == "random":
        return random_state(params["dims"], params.get("seed"))
    if kind == "product":
        vecs = [np.asarray(v, dtype=complex) for v in params["vectors"]]
        amps = vecs[0]
        for v in vecs[1:]:
            amps = np.kron(amps, v)
        return MultipartiteState(tuple(v.size for v in vecs), amps)
    if kind == "explicit":
        return MultipartiteState(tuple(params["dims"]), np.asarray(params["amplitudes"]))
    raise ValueError(f"unknown state kind {kind!r}")


# --------------------------------------------------------------------------
# algebra


def tensor_product(a: MultipartiteState, b: MultipartiteState) -> MultipartiteState:
    """Partywise tensor product: party ``j`` has dimension ``d_j * e_j``, index ``i_j * e_j + k_j``."""
    if a.k != b.k:
        raise ValueError(f"part counts differ: {a.k} vs {b.k}")
    k = a.k
    outer = np.multiply.outer(a.tensor, b.tensor)
    # axes (a_0..a_{k-1}, b_0..b_{k-1}) -> (a_0, b_0, a_1, b_1, ...)
    order = [ax for j in range(k) for ax in (j, k + j)]
    dims = tuple(da * db for da, db in zip(a.dims, b.dims))
    return MultipartiteState(dims, outer.transpose(order).reshape(dims).ravel())


def direct_sum(a: MultipartiteState, b: MultipartiteState) -> MultipartiteState:
    """Block embedding into ``(V_1 + W_1) (x) ... (x) (V_k + W_k)``."""
    if a.k != b.k:
        raise ValueError(f"part counts differ: {a.k} vs {b.k}")
    dims = tuple(da + db for da, db in zip(a.dims, b.dims))
    out = np.zeros(dims, dtype=complex)
    out[tuple(slice(0, d) for d in a.dims)] = a.tensor
    out[tuple(slice(da, None) for da in a.dims)] = b.tensor
    return MultipartiteState(dims, out.ravel())


def mode_product(tensor: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    """Contract ``matrix`` (out x in) into ``axis`` of ``tensor``."""
    moved = np.tensordot(matrix, tensor, axes=([1], [axis]))
    return np.moveaxis(moved, 0, axis)


def apply_local(maps: Sequence[np.ndarray], psi: MultipartiteState) -> MultipartiteState:
    """``(A_1 (x) ... (x) A_k) psi`` by successive mode contractions."""
    if len(maps) != psi.k:
        raise ValueError(f"expected {psi.k} local maps, got {len(maps)}")
    t = psi.tensor
    for j, a in enumerate(maps):
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[1] != psi.dims[j]:
            raise ValueError(f"map {j} has shape {a.shape}, needs (*, {psi.dims[j]})")
        t = mode_product(t, a, j)
    return MultipartiteState(t.shape, t.ravel())


def flattening(psi: MultipartiteState, side: Iterable[int]) -> np.ndarray:
    """The ``dim H_S x dim H_{S^c}`` matrix of ``psi``."""
    s = sorted(frozenset(side))
    rest = sorted(complement(s, psi.k))
    t = np.transpose(psi.tensor, s + rest)
    rows = math.prod(psi.dims[i] for i in s)
    return t.reshape(rows, -1)


def marginal(psi: MultipartiteState, side: Iterable[int]) -> np.ndarray:
    """Reduced operator of ``|psi><psi|`` on the parties in ``side`` (in increasing order)."""
    s = frozenset(side)
    if not s or len(s) >= psi.k or any(i < 0 or i >= psi.k for i in s):
        raise ValueError(f"marginal needs a proper nonempty subset of parties, got {sorted(s)}")
    m = flattening(psi, s)
    rho = m @ m.conj().T
    return (rho + rho.conj().T) / 2


def schmidt_spectrum(psi: MultipartiteState, side: Iterable[int]) -> np.ndarray:
    """Normalized Schmidt coefficients (squared) across ``{side, rest}``, decreasing.

    Values below ``1e-10`` times the largest are discarded.
    """
    if psi.is_zero():
        raise ValueError("Schmidt spectrum of the zero vector is undefined")
    sv = np.linalg.svd(flattening(psi, canonical_side(side, psi.k)), compute_uv=False)
    p = np.sort(sv**2)[::-1]
    p = p[p > SCHMIDT_RANK_TOL * p[0]]
    return p / p.sum()


def flattening_ranks(psi: MultipartiteState) -> tuple[int, ...]:
    """Numerical rank of every flattening, in :func:`all_bipartitions` order."""
    if psi.is_zero():
        return tuple(0 for _ in all_bipartitions(psi.k))
    return tuple(schmidt_spectrum(psi, b).size for b in all_bipartitions(psi.k))


# --------------------------------------------------------------------------
# divergences


def hermitian_power(sigma: np.ndarray, t: float, tol: float = PSD_TOL) -> np.ndarray:
    """``sigma^t`` for PSD ``sigma``; zero eigenvalues stay zero for ``t > 0``."""
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise ValueError("expected a square matrix")
    w, v = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    scale = max(abs(w).max(initial=0.0), 1.0)
    if w.size and w.min() < -tol * scale:
        raise ValueError(f"matrix is not PSD (min eigenvalue {w.min():.3e})")
    w = np.clip(w, 0.0, None)
    if t < 0 and w.min(initial=1.0) <= tol * scale:
        raise ValueError("negative power of a singular matrix")
    wt = np.zeros_like(w)
    pos = w > 0
    wt[pos] = w[pos] ** t
    return (v * wt) @ v.conj().T


def sandwiched_divergence_rank1(
    psi: MultipartiteState | np.ndarray, sigma: np.ndarray, alpha: float
) -> float:
    """``alpha/(alpha-1) log2 <psi| sigma^{(1-alpha)/alpha} |psi>`` for ``alpha`` in (0, 1)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    vec = psi.amplitudes if isinstance(psi, MultipartiteState) else np.asarray(psi, complex).ravel()
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (vec.size, vec.size):
        raise ValueError(f"sigma has shape {sigma.shape}, state has dimension {vec.size}")
    powered = hermitian_power(sigma, (1.0 - alpha) / alpha)
    value = float(np.vdot(vec, powered @ vec).real)
    return alpha / (alpha - 1.0) * math.log2(value)


def sandwiched_divergence(rho: np.ndarray, sigma: np.ndarray, alpha: float) -> float:
    """Generic sandwiched Renyi divergence, for ``Tr rho = 1``; used as a dense cross-check."""
    if alpha <= 0 or alpha == 1:
        raise ValueError("alpha must be positive and different from 1")
    s = hermitian_power(sigma, (1.0 - alpha) / (2.0 * alpha))
    inner = s @ np.asarray(rho, dtype=complex) @ s
    w = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    w = w[w > PSD_TOL * max(w.max(initial=0.0), 1.0)]  # round-off eigenvalues would dominate w**alpha
    val = float(np.sum(w**alpha))
    return math.log2(val) / (alpha - 1.0)
