"""Bipartite block matrices: partial transposes, realignment, Schmidt rank.

A :class:`BipartiteMatrix` with dims ``(m1, n1, m2, n2)`` is an
``(m1*m2) x (n1*n2)`` matrix read as an ``m1 x n1`` grid of ``m2 x n2``
blocks, i.e. an element of ``M_{m1,n1} (x) M_{m2,n2}``.  Row ``i*m2 + p``
and column ``j*n2 + q`` hold entry ``(p, q)`` of block ``(i, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matrix as mx
from .matrix import ContractError, DimensionError, Matrix
from .rng import make_rng

DEFAULT_ENTRY_BOUND = 3


class ZeroMatrixError(ContractError):
    """Schmidt rank is not defined for the zero matrix."""


class NotInvertibleError(ContractError):
    pass


@dataclass(frozen=True, eq=False)
class BipartiteMatrix:
    m1: int
    n1: int
    m2: int
    n2: int
    data: Matrix

    def __post_init__(self):
        for name in ("m1", "n1", "m2", "n2"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise DimensionError(f"{name} must be a positive integer")
        if self.data.shape != (self.m1 * self.m2, self.n1 * self.n2):
            raise DimensionError(f"data shape {self.data.shape} does not match dims {self.dims}")

    @property
    def dims(self):
        return (self.m1, self.n1, self.m2, self.n2)

    @property
    def is_exact(self):
        return self.data.is_exact

    def block(self, i, j) -> Matrix:
        if not (0 <= i < self.m1 and 0 <= j < self.n1):
            raise IndexError(f"block ({i}, {j}) outside a {self.m1}x{self.n1} grid")
        return self.data.submatrix(range(i * self.m2, (i + 1) * self.m2),
                                   range(j * self.n2, (j + 1) * self.n2))

    def blocks(self):
        return [[self.block(i, j) for j in range(self.n1)] for i in range(self.m1)]

    @classmethod
    def from_blocks(cls, grid) -> BipartiteMatrix:
        grid = [list(row) for row in grid]
        m2, n2 = grid[0][0].shape
        if any(b.shape != (m2, n2) for row in grid for b in row):
            raise DimensionError("all blocks must share one shape")
        return cls(len(grid), len(grid[0]), m2, n2, mx.block_matrix(grid))

    def _rearrange(self, perm, dims) -> BipartiteMatrix:
        m1, n1, m2, n2 = self.dims
        a1, b1, a2, b2 = dims

        def fn(a):
            return a.reshape(m1, m2, n1, n2).transpose(perm).reshape(a1 * a2, b1 * b2)

        return BipartiteMatrix(a1, b1, a2, b2, self.data.map_layout(fn))

    def __eq__(self, other):
        if not isinstance(other, BipartiteMatrix):
            return NotImplemented
        return self.dims == other.dims and self.data == other.data

    __hash__ = None

    def __add__(self, other):
        if self.dims != other.dims:
            raise DimensionError("dims differ")
        return BipartiteMatrix(*self.dims, self.data + other.data)

    def scaled(self, c) -> BipartiteMatrix:
        return BipartiteMatrix(*self.dims, mx.scale(self.data, c))

    def rank(self) -> int:
        return mx.rank(self.data).rank

    def __repr__(self):
        return f"BipartiteMatrix(dims={self.dims}, {self.data.scalar})"


def partial_transpose(m: BipartiteMatrix, side: str = "B") -> BipartiteMatrix:
    """Transpose one tensor factor.

    ``side="B"`` transposes every block (dims become ``(m1, n1, n2, m2)``);
    ``side="A"`` swaps blocks ``(i, j)`` and ``(j, i)`` and needs a square
    outer grid.
    """
    if side == "B":
        return m._rearrange((0, 3, 2, 1), (m.m1, m.n1, m.n2, m.m2))
    if side == "A":
        if m.m1 != m.n1:
            raise DimensionError("side-A partial transpose needs a square outer grid (m1 == n1)")
        return m._rearrange((2, 1, 0, 3), (m.n1, m.m1, m.m2, m.n2))
    raise ValueError(f"side must be 'A' or 'B', not {side!r}")


def full_transpose(m: BipartiteMatrix) -> BipartiteMatrix:
    return BipartiteMatrix(m.n1, m.m1, m.n2, m.m2, m.data.T)


def conjugate(m: BipartiteMatrix) -> BipartiteMatrix:
    return BipartiteMatrix(*m.dims, mx.conjugate(m.data))


def swap_factors(m: BipartiteMatrix) -> BipartiteMatrix:
    """Exchange the two tensor factors: ``sum R (x) S`` becomes ``sum S (x) R``."""
    m1, n1, m2, n2 = m.dims

    def fn(a):
        return a.reshape(m1, m2, n1, n2).transpose(1, 0, 3, 2).reshape(m1 * m2, n1 * n2)

    return BipartiteMatrix(m2, n2, m1, n1, m.data.map_layout(fn))


def realign(m: BipartiteMatrix) -> Matrix:
    """Row ``i*n1 + j`` is the row-major vectorisation of block ``(i, j)``."""
    m1, n1, m2, n2 = m.dims
    return m.data.map_layout(
        lambda a: a.reshape(m1, m2, n1, n2).transpose(0, 2, 1, 3).reshape(m1 * n1, m2 * n2))


def unrealign(r: Matrix, dims) -> BipartiteMatrix:
    """Inverse of :func:`realign`."""
    m1, n1, m2, n2 = dims
    if r.shape != (m1 * n1, m2 * n2):
        raise DimensionError("realigned shape does not match dims")
    data = r.map_layout(
        lambda a: a.reshape(m1, n1, m2, n2).transpose(0, 2, 1, 3).reshape(m1 * m2, n1 * n2))
    return BipartiteMatrix(m1, n1, m2, n2, data)


def vec(m: Matrix) -> Matrix:
    """Row-major vectorisation as a ``1 x (rows*cols)`` matrix."""
    return m.map_layout(lambda a: a.reshape(1, -1))


def stacked_rank(mats, tolerance=None) -> int:
    """Dimension of the span of ``mats`` (rank of their stacked vectorisations)."""
    mats = list(mats)
    if not mats:
        return 0
    return mx.rank(mx.vstack([vec(a) for a in mats]), tolerance).rank


def schmidt_rank(m: BipartiteMatrix, tolerance=None) -> int:
    """Operator Schmidt rank, computed as the rank of the realignment."""
    if m.data.is_zero():
        raise ZeroMatrixError("Schmidt rank of the zero matrix is undefined")
    return mx.rank(realign(m), tolerance).rank


@dataclass(frozen=True)
class SchmidtDecomposition:
    terms: tuple  # of (R, S) pairs

    @property
    def schmidt_rank(self) -> int:
        return len(self.terms)

    def reconstruct(self) -> BipartiteMatrix:
        r0, s0 = self.terms[0]
        total = mx.kron(r0, s0)
        for r, s in self.terms[1:]:
            total = total + mx.kron(r, s)
        return BipartiteMatrix(r0.rows, r0.cols, s0.rows, s0.cols, total)

    def factors_independent(self, tolerance=None) -> bool:
        k = len(self.terms)
        return (stacked_rank([r for r, _ in self.terms], tolerance) == k
                and stacked_rank([s for _, s in self.terms], tolerance) == k)


def schmidt_decompose(m: BipartiteMatrix, tolerance=None) -> SchmidtDecomposition:
    """Write ``m`` as ``sum_t R_t (x) S_t`` with ``schmidt_rank(m)`` terms.

    Exact input: the ``S_t`` are the first linearly independent blocks in
    row-major block order and ``R_t`` holds each block's coordinates in that
    basis.  Float input: the terms come from an SVD of the realignment.
    """
    if m.data.is_zero():
        raise ZeroMatrixError("cannot decompose the zero matrix")
    m1, n1, m2, n2 = m.dims
    real = realign(m)
    if not m.is_exact:
        k = mx.rank(real, tolerance).rank
        u, s, vh = np.linalg.svd(real.array())
        terms = []
        for t in range(k):
            w = np.sqrt(s[t])
            terms.append((Matrix.from_float((w * u[:, t]).reshape(m1, n1)),
                          Matrix.from_float((w * vh[t]).reshape(m2, n2))))
        return SchmidtDecomposition(tuple(terms))

    k = mx.rank(real).rank
    basis = []
    for t in range(real.rows):
        row = real.submatrix([t], range(real.cols))
        if mx.rank(mx.vstack(basis + [row])).rank > len(basis):
            basis.append(row)
            if len(basis) == k:
                break
    b = mx.vstack(basis)
    pc = list(mx.rank(b).pivot_cols)
    coeffs = real.submatrix(range(real.rows), pc) @ mx.inverse(b.submatrix(range(k), pc))
    terms = []
    for t in range(k):
        r = coeffs.submatrix(range(real.rows), [t]).map_layout(lambda a: a.reshape(m1, n1))
        s = basis[t].map_layout(lambda a: a.reshape(m2, n2))
        terms.append((r, s))
    return SchmidtDecomposition(tuple(terms))


@dataclass(frozen=True, eq=False)
class LocalEquivalence:
    """Invertible factors acting as ``(U (x) V) M (W (x) X)``."""

    U: Matrix
    V: Matrix
    W: Matrix
    X: Matrix

    def __post_init__(self):
        for name in ("U", "V", "W", "X"):
            f = getattr(self, name)
            if f.rows != f.cols:
                raise DimensionError(f"{name} must be square")
            if mx.rank(f).rank != f.rows:
                raise NotInvertibleError(f"factor {name} is not invertible")

    @classmethod
    def identity(cls, dims, scalar=mx.EXACT) -> LocalEquivalence:
        m1, n1, m2, n2 = dims
        ident = Matrix.identity
        return cls(ident(m1, scalar), ident(m2, scalar), ident(n1, scalar), ident(n2, scalar))

    def then(self, other: LocalEquivalence) -> LocalEquivalence:
        """The equivalence that applies ``self`` first and ``other`` second."""
        return LocalEquivalence(other.U @ self.U, other.V @ self.V, self.W @ other.W, self.X @ other.X)

    def __eq__(self, other):
        if not isinstance(other, LocalEquivalence):
            return NotImplemented
        return all(getattr(self, n) == getattr(other, n) for n in "UVWX")

    __hash__ = None


def apply_local(m: BipartiteMatrix, e: LocalEquivalence) -> BipartiteMatrix:
    m1, n1, m2, n2 = m.dims
    if e.U.rows != m1 or e.V.rows != m2 or e.W.rows != n1 or e.X.rows != n2:
        raise DimensionError("local equivalence factors do not conform to the block dims")
    data = mx.kron(e.U, e.V) @ m.data @ mx.kron(e.W, e.X)
    return BipartiteMatrix(m1, n1, m2, n2, data)


def random_local_equivalence(dims, seed, entry_bound: int = 2) -> LocalEquivalence:
    m1, n1, m2, n2 = dims
    rng = make_rng(seed)
    return LocalEquivalence(*(mx.random_invertible(n, rng, entry_bound) for n in (m1, m2, n1, n2)))


def random_schmidt_terms(k, m1, n1, m2, n2, seed, entry_bound=DEFAULT_ENTRY_BOUND) -> SchmidtDecomposition:
    """Random exact terms with both factor families linearly independent."""
    if not 1 <= k <= min(m1 * n1, m2 * n2):
        raise ContractError(f"k={k} outside [1, min(m1*n1, m2*n2)] = [1, {min(m1 * n1, m2 * n2)}]")
    rng = make_rng(seed)
    for _ in range(64):
        rs = [mx.random_matrix(m1, n1, rng, entry_bound) for _ in range(k)]
        ss = [mx.random_matrix(m2, n2, rng, entry_bound) for _ in range(k)]
        if stacked_rank(rs) == k and stacked_rank(ss) == k:
            return SchmidtDecomposition(tuple(zip(rs, ss)))
    raise RuntimeError("could not draw independent Schmidt factors")


def random_schmidt_rank_k(k, m1, n1, m2, n2, seed, entry_bound=DEFAULT_ENTRY_BOUND) -> BipartiteMatrix:
    """Random exact ``sum_{t<k} R_t (x) S_t``; its Schmidt rank is exactly ``k``."""
    return random_schmidt_terms(k, m1, n1, m2, n2, seed, entry_bound).reconstruct()


# --------------------------------------------------------------------------
# JSON


def to_json(m: BipartiteMatrix) -> dict:
    out = mx.to_json(m.data)
    out["dims"] = list(m.dims)
    return out


def from_json(obj) -> BipartiteMatrix:
    if not isinstance(obj, dict) or "dims" not in obj:
        raise mx.MatrixFormatError("dims", "missing")
    dims = obj["dims"]
    if (not isinstance(dims, list) or len(dims) != 4
            or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)):
        raise mx.MatrixFormatError("dims", "expected four positive integers [m1, n1, m2, n2]")
    data = mx.from_json(obj)
    try:
        return BipartiteMatrix(*dims, data)
    except DimensionError as exc:
        raise mx.MatrixFormatError("dims", str(exc)) from None


def decomposition_to_json(d: SchmidtDecomposition) -> list:
    return [[mx.to_json(r), mx.to_json(s)] for r, s in d.terms]


def decomposition_from_json(obj) -> SchmidtDecomposition:
    if not isinstance(obj, list) or not obj:
        raise mx.MatrixFormatError("terms", "expected a non-empty list of [R, S] pairs")
    terms = []
    for i, pair in enumerate(obj):
        if not isinstance(pair, list) or len(pair) != 2:
            raise mx.MatrixFormatError(f"terms[{i}]", "expected an [R, S] pair")
        terms.append((mx.from_json(pair[0]), mx.from_json(pair[1])))
    return SchmidtDecomposition(tuple(terms))


def equivalence_to_json(e: LocalEquivalence) -> dict:
    return {n: mx.to_json(getattr(e, n)) for n in "UVWX"}


def equivalence_from_json(obj) -> LocalEquivalence:
    if not isinstance(obj, dict):
        raise mx.MatrixFormatError("certificate", "expected an object with U, V, W, X")
    for n in "UVWX":
        if n not in obj:
            raise mx.MatrixFormatError(f"certificate.{n}", "missing")
    try:
        return LocalEquivalence(*(mx.from_json(obj[n]) for n in "UVWX"))
    except (DimensionError, NotInvertibleError) as exc:
        raise mx.MatrixFormatError("certificate", str(exc)) from None
