"""Dense matrices over exact Gaussian rationals or double-precision complex.

An exact matrix is stored as two object arrays of Python ints (real and
imaginary numerators) over one shared positive denominator, kept reduced so
that equal matrices have equal storage.  Individual entries come back as
:class:`~rankineq.scalar.GaussianRational` in lowest terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.linalg

from . import _kernels
from .rng import make_rng
from .scalar import GaussianRational, MixedScalarError, nearest_fraction

EXACT = "exact"
FLOAT = "float"


class ContractError(ValueError):
    """A call violated a documented precondition."""


class DimensionError(ValueError):
    pass


class SingularMatrixError(ContractError, ZeroDivisionError):
    pass


class MatrixFormatError(ValueError):
    """Malformed matrix JSON; ``field`` names the offending key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


def _obj(a):
    return np.asarray(a, dtype=object)


def _split_exact(x):
    """Split a scalar into ``(re_num, im_num, den)`` with one common denominator."""
    g = GaussianRational.coerce(x)
    den = g.re.denominator * g.im.denominator // math.gcd(g.re.denominator, g.im.denominator)
    return g.re.numerator * (den // g.re.denominator), g.im.numerator * (den // g.im.denominator), den


class Matrix:
    """Immutable dense matrix; ``scalar`` is ``"exact"`` or ``"float"``."""

    __slots__ = ("rows", "cols", "scalar", "_re", "_im", "_den", "_data")

    def __init__(self):
        raise TypeError("use Matrix.exact, Matrix.from_ints or Matrix.from_float")

    # construction -----------------------------------------------------------

    @classmethod
    def from_ints(cls, re, im=None, den=1) -> Matrix:
        """Exact matrix ``(re + i*im) / den`` from integer arrays."""
        re = _obj(re)
        if re.ndim != 2:
            raise DimensionError("matrix data must be two-dimensional")
        im = np.zeros(re.shape, dtype=object) + 0 if im is None else _obj(im)
        if im.shape != re.shape:
            raise DimensionError("real and imaginary parts differ in shape")
        if re.shape[0] < 1 or re.shape[1] < 1:
            raise DimensionError("zero-dimension matrices are not allowed")
        den = int(den)
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            re, im, den = -re, -im, -den
        self = object.__new__(cls)
        self.rows, self.cols = re.shape
        self.scalar = EXACT
        self._data = None
        if den != 1:
            g = math.gcd(den, *(int(v) for v in re.flat), *(int(v) for v in im.flat))
            if g > 1:
                re = _obj([v // g for v in re.flat]).reshape(re.shape)
                im = _obj([v // g for v in im.flat]).reshape(im.shape)
                den //= g
        self._re, self._im, self._den = re, im, den
        return self

    @classmethod
    def exact(cls, entries) -> Matrix:
        """Exact matrix from nested rows of ints, Fractions or GaussianRationals."""
        rows = [list(r) for r in entries]
        if not rows or not rows[0]:
            raise DimensionError("zero-dimension matrices are not allowed")
        ncols = len(rows[0])
        if any(len(r) != ncols for r in rows):
            raise DimensionError("ragged rows")
        parts = [[_split_exact(x) for x in r] for r in rows]
        den = math.lcm(*(p[2] for r in parts for p in r))
        re = _obj([[p[0] * (den // p[2]) for p in r] for r in parts])
        im = _obj([[p[1] * (den // p[2]) for p in r] for r in parts])
        return cls.from_ints(re, im, den)

    @classmethod
    def from_float(cls, data) -> Matrix:
        data = np.array(data, dtype=np.complex128)
        if data.ndim != 2:
            raise DimensionError("matrix data must be two-dimensional")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise DimensionError("zero-dimension matrices are not allowed")
        self = object.__new__(cls)
        self.rows, self.cols = data.shape
        self.scalar = FLOAT
        self._re = self._im = self._den = None
        data.setflags(write=False)
        self._data = data
        return self

    @classmethod
    def identity(cls, n, scalar=EXACT) -> Matrix:
        if scalar == FLOAT:
            return cls.from_float(np.eye(n))
        return cls.from_ints(_obj(np.eye(n, dtype=int).tolist()))

    @classmethod
    def zeros(cls, rows, cols, scalar=EXACT) -> Matrix:
        if scalar == FLOAT:
            return cls.from_float(np.zeros((rows, cols)))
        return cls.from_ints(np.zeros((rows, cols), dtype=object) + 0)

    # inspection -------------------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def is_exact(self):
        return self.scalar == EXACT

    @property
    def numerators(self):
        """``(re, im, den)`` of an exact matrix; arrays are object-dtype ints."""
        self._need_exact()
        return self._re, self._im, self._den

    def array(self) -> np.ndarray:
        """complex128 view of the values (lossy for exact matrices)."""
        if self.is_exact:
            return to_float(self)._data
        return self._data

    def _need_exact(self):
        if not self.is_exact:
            raise MixedScalarError("operation requires an exact matrix")

    def __getitem__(self, idx):
        i, j = idx
        if self.is_exact:
            return GaussianRational(Fraction(int(self._re[i, j]), self._den),
                                    Fraction(int(self._im[i, j]), self._den))
        return complex(self._data[i, j])

    def tolist(self):
        return [[self[i, j] for j in range(self.cols)] for i in range(self.rows)]

    def is_zero(self) -> bool:
        if self.is_exact:
            return not any(self._re.flat) and not any(self._im.flat)
        return not np.any(self._data)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.scalar != other.scalar or self.shape != other.shape:
            return False
        if self.is_exact:
            return (self._den == other._den and np.array_equal(self._re, other._re)
                    and np.array_equal(self._im, other._im))
        return bool(np.array_equal(self._data, other._data))

    __hash__ = None

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, {self.scalar})"

    # structural maps ----------------------------------------------------------

    def map_layout(self, fn) -> Matrix:
        """Apply ``fn`` to the storage: any index rearrangement or integer-linear map (e.g. a partial trace)."""
        if self.is_exact:
            return Matrix.from_ints(fn(self._re), fn(self._im), self._den)
        return Matrix.from_float(fn(self._data))

    @property
    def T(self) -> Matrix:
        return transpose(self)

    @property
    def H(self) -> Matrix:
        return hermitian_adjoint(self)

    def submatrix(self, rows, cols) -> Matrix:
        rows = list(rows)
        cols = list(cols)
        return self.map_layout(lambda a: a[np.ix_(rows, cols)])

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def __neg__(self):
        return scale(self, -1)

    def __matmul__(self, other):
        return mul(self, other)


# --------------------------------------------------------------------------
# certified rank


@dataclass(frozen=True)
class RankCertificate:
    rank: int
    pivot_rows: tuple
    pivot_cols: tuple
    method: str
    tolerance: float = 0.0

    def __post_init__(self):
        if len(self.pivot_rows) != self.rank or len(self.pivot_cols) != self.rank:
            raise ValueError("pivot witness length must equal the rank")


def default_tolerance(m: Matrix) -> float:
    """Relative threshold ``max(rows, cols) * eps``, scaled by the top singular value at use."""
    return max(m.rows, m.cols) * np.finfo(np.float64).eps


def rank(m: Matrix, tolerance: float | None = None) -> RankCertificate:
    """Rank of ``m`` with pivot witnesses.

    Exact matrices go through fraction-free elimination with full pivoting
    and must not be given a tolerance.  Float matrices count singular values
    above ``tolerance * sigma_max``.
    """
    if m.is_exact:
        if tolerance is not None:
            raise ContractError("tolerance is meaningless for an exact matrix")
        re, im, _ = m.numerators
        r, prow, pcol = _kernels.gauss_int_rank([int(v) for v in re.flat], [int(v) for v in im.flat],
                                                m.rows, m.cols)
        return RankCertificate(r, tuple(prow), tuple(pcol), "exact-elimination", 0.0)
    if tolerance is None:
        tolerance = default_tolerance(m)
    if tolerance < 0:
        raise ContractError("tolerance must be nonnegative")
    a = m._data
    s = np.linalg.svd(a, compute_uv=False)
    r = int(np.sum(s > tolerance * s[0])) if s.size and s[0] > 0 else 0
    _, _, pc = scipy.linalg.qr(a, pivoting=True, mode="economic")
    _, _, pr = scipy.linalg.qr(a.T, pivoting=True, mode="economic")
    return RankCertificate(r, tuple(int(i) for i in sorted(pr[:r])),
                           tuple(int(j) for j in sorted(pc[:r])), "svd-threshold", float(tolerance))


def _rational_rows(m: Matrix):
    return [[m[i, j] for j in range(m.cols)] for i in range(m.rows)]


def determinant(m: Matrix) -> GaussianRational:
    """Exact determinant by plain Gaussian elimination over Gaussian rationals.

    Deliberately a different route from the rank kernel so that rank
    certificates can be re-checked independently.
    """
    m._need_exact()
    if m.rows != m.cols:
        raise DimensionError("determinant of a non-square matrix")
    a = _rational_rows(m)
    n = m.rows
    det = GaussianRational(1)
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k]), None)
        if p is None:
            return GaussianRational(0)
        if p != k:
            a[k], a[p] = a[p], a[k]
            det = -det
        det = det * a[k][k]
        inv = a[k][k].inverse()
        for i in range(k + 1, n):
            if a[i][k]:
                f = a[i][k] * inv
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return det


def verify_certificate(m: Matrix, cert: RankCertificate) -> bool:
    """Re-check that the pivot submatrix is invertible."""
    if len(cert.pivot_rows) != cert.rank or len(cert.pivot_cols) != cert.rank:
        return False
    if cert.rank == 0:
        return m.is_zero() if m.is_exact else True
    sub = m.submatrix(cert.pivot_rows, cert.pivot_cols)
    if m.is_exact:
        return not determinant(sub).is_zero()
    s = np.linalg.svd(sub._data, compute_uv=False)
    return bool(s[-1] > 0)


def inverse(m: Matrix) -> Matrix:
    """Exact inverse by Gauss-Jordan elimination."""
    m._need_exact()
    if m.rows != m.cols:
        raise DimensionError("inverse of a non-square matrix")
    n = m.rows
    one, zero = GaussianRational(1), GaussianRational(0)
    a = [row + [one if i == j else zero for j in range(n)] for i, row in enumerate(_rational_rows(m))]
    for k in range(n):
        p = next((i for i in range(k, n) if a[i][k]), None)
        if p is None:
            raise SingularMatrixError("matrix is singular")
        a[k], a[p] = a[p], a[k]
        inv = a[k][k].inverse()
        a[k] = [x * inv for x in a[k]]
        for i in range(n):
            if i != k and a[i][k]:
                f = a[i][k]
                a[i] = [x - f * y for x, y in zip(a[i], a[k])]
    return Matrix.exact([row[n:] for row in a])


# --------------------------------------------------------------------------
# arithmetic


def _same_variant(a: Matrix, b: Matrix):
    if a.scalar != b.scalar:
        raise MixedScalarError("exact and float matrices cannot be combined; convert first")


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product; entry ``(i*b.rows+p, j*b.cols+q) = a[i,j]*b[p,q]``."""
    _same_variant(a, b)
    if a.is_exact:
        re = np.kron(a._re, b._re) - np.kron(a._im, b._im)
        im = np.kron(a._re, b._im) + np.kron(a._im, b._re)
        return Matrix.from_ints(re, im, a._den * b._den)
    return Matrix.from_float(np.kron(a._data, b._data))


def mul(a: Matrix, b: Matrix) -> Matrix:
    _same_variant(a, b)
    if a.cols != b.rows:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    if a.is_exact:
        re = a._re.dot(b._re) - a._im.dot(b._im)
        im = a._re.dot(b._im) + a._im.dot(b._re)
        return Matrix.from_ints(re, im, a._den * b._den)
    return Matrix.from_float(a._data @ b._data)


def add(a: Matrix, b: Matrix) -> Matrix:
    _same_variant(a, b)
    if a.shape != b.shape:
        raise DimensionError(f"cannot add {a.shape} and {b.shape}")
    if a.is_exact:
        g = math.gcd(a._den, b._den)
        fa, fb = b._den // g, a._den // g
        return Matrix.from_ints(a._re * fa + b._re * fb, a._im * fa + b._im * fb, a._den * fa)
    return Matrix.from_float(a._data + b._data)


def scale(m: Matrix, c) -> Matrix:
    if m.is_exact:
        cr, ci, cd = _split_exact(c)
        return Matrix.from_ints(m._re * cr - m._im * ci, m._re * ci + m._im * cr, m._den * cd)
    if isinstance(c, (GaussianRational, Fraction)):
        raise MixedScalarError("exact scalar applied to a float matrix")
    return Matrix.from_float(m._data * complex(c))


def transpose(m: Matrix) -> Matrix:
    return m.map_layout(lambda a: a.T.copy())


def conjugate(m: Matrix) -> Matrix:
    if m.is_exact:
        return Matrix.from_ints(m._re.copy(), -m._im, m._den)
    return Matrix.from_float(np.conj(m._data))


def hermitian_adjoint(m: Matrix) -> Matrix:
    return conjugate(transpose(m))


def trace(m: Matrix):
    if m.rows != m.cols:
        raise DimensionError("trace of a non-square matrix")
    if m.is_exact:
        return GaussianRational(Fraction(int(sum(m._re.diagonal())), m._den),
                                Fraction(int(sum(m._im.diagonal())), m._den))
    return complex(np.trace(m._data))


def hstack(blocks) -> Matrix:
    blocks = list(blocks)
    for b in blocks[1:]:
        _same_variant(blocks[0], b)
    if blocks[0].is_exact:
        den = math.lcm(*(b._den for b in blocks))
        re = np.hstack([b._re * (den // b._den) for b in blocks])
        im = np.hstack([b._im * (den // b._den) for b in blocks])
        return Matrix.from_ints(re, im, den)
    return Matrix.from_float(np.hstack([b._data for b in blocks]))


def vstack(blocks) -> Matrix:
    return transpose(hstack([transpose(b) for b in blocks]))


def block_matrix(grid) -> Matrix:
    """Assemble a matrix from a nested list of equally-sized rows of blocks."""
    return vstack([hstack(row) for row in grid])


def pad(m: Matrix, rows: int, cols: int) -> Matrix:
    """Zero-pad ``m`` at the bottom and right to ``rows x cols``."""
    if rows < m.rows or cols < m.cols:
        raise DimensionError("padding cannot shrink a matrix")

    def grow(a):
        out = np.zeros((rows, cols), dtype=a.dtype)
        if a.dtype == object:
            out = out + 0
        out[:a.shape[0], :a.shape[1]] = a
        return out

    return m.map_layout(grow)


# --------------------------------------------------------------------------
# conversion, generation, serialisation


def to_float(m: Matrix) -> Matrix:
    if not m.is_exact:
        return m
    d = m._den
    re = np.array([float(Fraction(int(v), d)) for v in m._re.flat]).reshape(m.shape)
    im = np.array([float(Fraction(int(v), d)) for v in m._im.flat]).reshape(m.shape)
    return Matrix.from_float(re + 1j * im)


def to_exact(m: Matrix, denominator_limit: int) -> Matrix:
    """Round each component to the nearest fraction with bounded denominator."""
    if m.is_exact:
        return m
    a = m._data
    return Matrix.exact([[GaussianRational(nearest_fraction(z.real, denominator_limit),
                                           nearest_fraction(z.imag, denominator_limit))
                          for z in row] for row in a])


def random_matrix(rows: int, cols: int, seed, entry_bound: int) -> Matrix:
    """Exact Gaussian-integer matrix with parts uniform on ``[-entry_bound, entry_bound]``.

    ``seed`` is an integer or a live ``numpy.random.Generator``.
    """
    if entry_bound < 1:
        raise ContractError("entry_bound must be >= 1")
    rng = make_rng(seed)
    re = rng.integers(-entry_bound, entry_bound + 1, size=(rows, cols))
    im = rng.integers(-entry_bound, entry_bound + 1, size=(rows, cols))
    return Matrix.from_ints(_obj(re.tolist()), _obj(im.tolist()))


def random_invertible(n: int, seed, entry_bound: int = 3) -> Matrix:
    """Random exact ``n x n`` matrix, redrawn until its certified rank is ``n``."""
    rng = make_rng(seed)
    for _ in range(64):
        m = random_matrix(n, n, rng, entry_bound)
        if rank(m).rank == n:
            return m
    raise RuntimeError("failed to draw an invertible matrix")


def to_json(m: Matrix) -> dict:
    if m.is_exact:
        entries = []
        for i in range(m.rows):
            for j in range(m.cols):
                entries.append([str(p) for p in m[i, j].parts()])
    else:
        entries = [[float(z.real), float(z.imag)] for z in m._data.flat]
    return {"rows": m.rows, "cols": m.cols, "scalar": m.scalar, "entries": entries}


def from_json(obj) -> Matrix:
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix", "expected an object")
    for key in ("rows", "cols", "scalar", "entries"):
        if key not in obj:
            raise MatrixFormatError(key, "missing")
    rows, cols = obj["rows"], obj["cols"]
    for key, v in (("rows", rows), ("cols", cols)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise MatrixFormatError(key, "must be a positive integer")
    entries = obj["entries"]
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise MatrixFormatError("entries", f"expected {rows * cols} entries")
    if obj["scalar"] == EXACT:
        vals = []
        for t, e in enumerate(entries):
            try:
                rn, rd, inum, idn = (int(str(x)) for x in e)
                if rd <= 0 or idn <= 0:
                    raise ValueError("denominators must be positive")
                vals.append(GaussianRational.from_parts(rn, rd, inum, idn))
            except (TypeError, ValueError) as exc:
                raise MatrixFormatError(f"entries[{t}]", str(exc)) from None
        return Matrix.exact([vals[i * cols:(i + 1) * cols] for i in range(rows)])
    if obj["scalar"] == FLOAT:
        try:
            data = np.array([complex(float(e[0]), float(e[1])) for e in entries])
        except (TypeError, ValueError, IndexError) as exc:
            raise MatrixFormatError("entries", str(exc)) from None
        return Matrix.from_float(data.reshape(rows, cols))
    raise MatrixFormatError("scalar", "must be 'exact' or 'float'")
