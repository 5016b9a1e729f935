"""The rank inequality ``r(M) <= K * r(M^Gamma)`` and the machinery around it.

* :func:`check_conjecture` evaluates the inequality exactly for one matrix.
* :func:`lemma_sr_max_shortcut` covers the maximal-Schmidt-rank case through
  the block-rank chain ``K r(M) >= m1 n1 max_ij r(M_ij) >= r(M^Gamma)``.
* :func:`reduce_to_canonical` brings a 2x2-block Schmidt-rank-3 matrix to the
  normal form ``[[N11, N12], [N21, w N11]]`` with ``N11 = diag(I_k, 0)`` and
  returns the local equivalence that does it.
* :func:`verify_appendix_bounds` evaluates the rank bounds built from the
  normal form's sub-blocks and checks that they sandwich the true ranks.
* :func:`detect_special_case` recognises the three block layouts for which the
  inequality holds at any Schmidt rank.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from . import bipartite as bp
from . import matrix as mx
from .bipartite import BipartiteMatrix, LocalEquivalence
from .matrix import ContractError, DimensionError, Matrix
from .rng import make_rng
from .scalar import GaussianRational

W_NONZERO = "w_nonzero"
W_ZERO = "w_zero"

FULL_ROW = "full_row"
SINGLE_PER_ROW = "single_independent_per_row"
ROW_S_MINUS_1 = "row_with_s_minus_1"
NO_CASE = "none"


class NotApplicable(Exception):
    """A shortcut's hypothesis does not hold for this input (not a failure)."""


class AppendixBoundViolation(AssertionError):
    """The normal-form rank bounds failed to bracket the true ranks."""

    def __init__(self, message, instance, bounds):
        super().__init__(message)
        self.instance = instance
        self.bounds = bounds


# --------------------------------------------------------------------------
# the inequality itself


@dataclass(frozen=True)
class ConjectureVerdict:
    schmidt_rank: int
    rank_M: int
    rank_M_gamma: int
    holds: bool
    ratio: Fraction | None
    assumption_band: bool

    def to_json(self) -> dict:
        return {
            "K": self.schmidt_rank,
            "rank_M": self.rank_M,
            "rank_M_gamma": self.rank_M_gamma,
            "holds": self.holds,
            "ratio": None if self.ratio is None else [str(self.ratio.numerator), str(self.ratio.denominator)],
            "assumption_band": self.assumption_band,
        }


def check_conjecture(m: BipartiteMatrix, tolerance=None) -> ConjectureVerdict:
    """Evaluate ``r(M) <= K r(M^{Gamma_B})``; exact input gives certified ranks."""
    k = bp.schmidt_rank(m, tolerance)
    r = mx.rank(m.data, tolerance).rank
    rg = mx.rank(bp.partial_transpose(m, "B").data, tolerance).rank
    ratio = Fraction(r, rg) if rg else None
    band = 2 < k < max(r, rg) and k <= min(m.m1 * m.n1, m.m2 * m.n2)
    return ConjectureVerdict(k, r, rg, r <= k * rg, ratio, band)


@dataclass(frozen=True)
class ShortcutChain:
    schmidt_rank: int
    rank_M: int
    max_block_rank: int
    chain_value: int
    rank_M_gamma: int
    orientation: str  # "blocks" (K = m1 n1) or "slices" (K = m2 n2)

    @property
    def holds(self):
        return (self.rank_M >= self.max_block_rank
                and self.chain_value >= self.rank_M_gamma
                and self.schmidt_rank * self.rank_M >= self.rank_M_gamma)


def lemma_sr_max_chain(m: BipartiteMatrix) -> ShortcutChain:
    """Chain values for the maximal-Schmidt-rank shortcut.

    With ``K = m1 n1`` every block has rank at most ``k = max r(M_ij)``, so
    ``r(M^Gamma) <= m1 n1 k`` while ``r(M) >= k``.  When instead
    ``K = m2 n2 < m1 n1`` the same argument runs on the ``m1 x n1`` slices
    obtained by swapping the tensor factors.
    """
    k = bp.schmidt_rank(m)
    if k != min(m.m1 * m.n1, m.m2 * m.n2):
        raise NotApplicable(f"K={k} is not min(m1*n1, m2*n2)={min(m.m1 * m.n1, m.m2 * m.n2)}")
    if k == m.m1 * m.n1:
        grid, orientation = m, "blocks"
    else:
        grid, orientation = bp.swap_factors(m), "slices"
    kmax = max(mx.rank(b).rank for row in grid.blocks() for b in row)
    r = mx.rank(m.data).rank
    rg = mx.rank(bp.partial_transpose(m, "B").data).rank
    return ShortcutChain(k, r, kmax, grid.m1 * grid.n1 * kmax, rg, orientation)


def lemma_sr_max_shortcut(m: BipartiteMatrix) -> bool:
    """True when the block-rank chain certifies the inequality; raises NotApplicable off its domain."""
    return lemma_sr_max_chain(m).holds


# --------------------------------------------------------------------------
# canonical form for 2x2 block grids of Schmidt rank three


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    N: BipartiteMatrix
    k: int
    w: GaussianRational
    branch: str
    certificate: LocalEquivalence
    pre_branch: BipartiteMatrix = field(repr=False)

    def check_invariants(self, source: BipartiteMatrix | None = None) -> bool:
        n11 = self.N.block(0, 0)
        if n11 != _diag_identity(self.N.m2, self.N.n2, self.k):
            return False
        if self.pre_branch.block(1, 1) != mx.scale(self.pre_branch.block(0, 0), self.w):
            return False
        expected = n11 if self.branch == W_NONZERO else Matrix.zeros(*n11.shape)
        if self.N.block(1, 1) != expected:
            return False
        if (self.branch == W_ZERO) != self.w.is_zero():
            return False
        return source is None or bp.apply_local(source, self.certificate) == self.N

    def __eq__(self, other):
        if not isinstance(other, CanonicalForm):
            return NotImplemented
        return (self.N == other.N and self.k == other.k and self.w == other.w
                and self.branch == other.branch and self.certificate == other.certificate
                and self.pre_branch == other.pre_branch)

    __hash__ = None

    def to_json(self) -> dict:
        return {"N": bp.to_json(self.N), "k": self.k, "w": [str(p) for p in self.w.parts()],
                "branch": self.branch, "certificate": bp.equivalence_to_json(self.certificate),
                "pre_branch": bp.to_json(self.pre_branch)}

    @classmethod
    def from_json(cls, obj) -> CanonicalForm:
        if not isinstance(obj, dict):
            raise mx.MatrixFormatError("canonical", "expected an object")
        for key in ("N", "k", "w", "branch", "certificate", "pre_branch"):
            if key not in obj:
                raise mx.MatrixFormatError(key, "missing")
        if obj["branch"] not in (W_NONZERO, W_ZERO):
            raise mx.MatrixFormatError("branch", f"unknown branch {obj['branch']!r}")
        try:
            w = GaussianRational.from_parts(*(int(p) for p in obj["w"]))
        except (TypeError, ValueError, ZeroDivisionError):
            raise mx.MatrixFormatError("w", "expected [re_num, re_den, im_num, im_den]") from None
        return cls(bp.from_json(obj["N"]), int(obj["k"]), w, obj["branch"],
                   bp.equivalence_from_json(obj["certificate"]), bp.from_json(obj["pre_branch"]))


def _diag_identity(rows, cols, k) -> Matrix:
    return Matrix.from_ints([[1 if (i == j and i < k) else 0 for j in range(cols)] for i in range(rows)])


def _rows(m: Matrix):
    return [[m[i, j] for j in range(m.cols)] for i in range(m.rows)]


def normal_form_factors(a: Matrix):
    """Invertible ``P``, ``Q`` and ``k`` with ``P a Q = diag(I_k, 0)``.

    ``P`` comes from Gauss-Jordan reduction of ``a`` to reduced row echelon
    form; ``Q`` moves the pivot columns to the front and clears the
    remaining entries of the pivot rows.
    """
    a._need_exact()
    rows, cols = a.shape
    one, zero = GaussianRational(1), GaussianRational(0)
    aug = [r + [one if i == j else zero for j in range(rows)] for i, r in enumerate(_rows(a))]
    pivots = []
    pr = 0
    for c in range(cols):
        p = next((i for i in range(pr, rows) if aug[i][c]), None)
        if p is None:
            continue
        aug[pr], aug[p] = aug[p], aug[pr]
        inv = aug[pr][c].inverse()
        aug[pr] = [x * inv for x in aug[pr]]
        for i in range(rows):
            if i != pr and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[pr])]
        pivots.append(c)
        pr += 1
        if pr == rows:
            break
    k = len(pivots)
    P = Matrix.exact([r[cols:] for r in aug])
    order = pivots + [c for c in range(cols) if c not in pivots]
    perm = [[one if order[j] == i else zero for j in range(cols)] for i in range(cols)]
    # after permuting, E = [[I_k, F], [0, 0]]; clear F with [[I, -F], [0, I]]
    clear = [[one if i == j else zero for j in range(cols)] for i in range(cols)]
    for i in range(k):
        for j in range(k, cols):
            clear[i][j] = -aug[i][order[j]]
    Q = Matrix.exact(perm) @ Matrix.exact(clear)
    return P, Q, k


_SWAP2 = [[0, 1], [1, 0]]
_POSITIONS = [(0, 0), (0, 1), (1, 0), (1, 1)]


def _outer_equivalence(m: BipartiteMatrix, U=None, W=None) -> LocalEquivalence:
    ident = Matrix.identity
    return LocalEquivalence(Matrix.exact(U) if U is not None else ident(2), ident(m.m2),
                            Matrix.exact(W) if W is not None else ident(2), ident(m.n2))


def reduce_to_canonical(m: BipartiteMatrix) -> CanonicalForm:
    """Normal form of a 2x2-block matrix of Schmidt rank three, with certificate.

    Steps: permute blocks so that ``M11, M12, M21`` are independent (first
    independent triple in lexicographic position order); write
    ``M22 = x M11 + y M12 + z M21``; subtract ``y`` times block row 1 from
    block row 2 and ``z`` times block column 1 from block column 2, leaving
    ``(x + y z) M11`` in the corner; then bring ``M11`` to ``diag(I_k, 0)``
    with inner factors.  Finally, for ``w = x + y z != 0`` block column 2 is
    scaled by ``1/w`` so the corner equals ``N11``; for ``w = 0`` it is zero.
    """
    if not m.is_exact:
        raise ContractError("canonical reduction needs exact input")
    if (m.m1, m.n1) != (2, 2):
        raise DimensionError("canonical reduction needs a 2x2 outer grid")
    if m.data.is_zero() or bp.schmidt_rank(m) != 3:
        raise ContractError("canonical reduction needs Schmidt rank 3")

    blocks = {p: m.block(*p) for p in _POSITIONS}
    triple = next(t for t in itertools.combinations(_POSITIONS, 3)
                  if bp.stacked_rank(blocks[p] for p in t) == 3)
    (excluded,) = set(_POSITIONS) - set(triple)
    cert = _outer_equivalence(m, U=_SWAP2 if excluded[0] == 0 else None,
                              W=_SWAP2 if excluded[1] == 0 else None)
    cur = bp.apply_local(m, cert)

    m11, m12, m21, m22 = (cur.block(*p) for p in _POSITIONS)
    basis = mx.vstack([bp.vec(b) for b in (m11, m12, m21)])
    pc = list(mx.rank(basis).pivot_cols)
    target = bp.vec(m22)
    coeffs = target.submatrix([0], pc) @ mx.inverse(basis.submatrix(range(3), pc))
    if coeffs @ basis != target:
        raise ArithmeticError("corner block is not in the span of the other three")
    x, y, z = coeffs[0, 0], coeffs[0, 1], coeffs[0, 2]

    step = _outer_equivalence(cur, U=[[1, 0], [-y, 1]], W=[[1, -z], [0, 1]])
    cert = cert.then(step)
    cur = bp.apply_local(cur, step)

    P, Q, k = normal_form_factors(cur.block(0, 0))
    ident = Matrix.identity
    step = LocalEquivalence(ident(2), P, ident(2), Q)
    cert = cert.then(step)
    pre = bp.apply_local(cur, step)
    w = x + y * z

    if w.is_zero():
        branch, N = W_ZERO, pre
    else:
        branch = W_NONZERO
        step = _outer_equivalence(pre, W=[[1, 0], [0, w.inverse()]])
        cert = cert.then(step)
        N = bp.apply_local(pre, step)

    form = CanonicalForm(N, k, w, branch, cert, pre)
    if not form.check_invariants(m):
        raise ArithmeticError("canonical form failed its own invariants")
    if bp.schmidt_rank(N) != 3 or bp.schmidt_rank(bp.partial_transpose(N, "B")) != 3:
        raise ArithmeticError("canonical form lost Schmidt rank three")
    return form


# --------------------------------------------------------------------------
# rank bounds on the normal form


@dataclass(frozen=True)
class AppendixBounds:
    k: int
    r1: int
    r2: int
    r3: int
    r4: int
    lower_bound_rank_M: Fraction
    upper_bound_rank_gamma: int
    branch: str
    rank_M: int
    rank_M_gamma: int

    @property
    def sandwich_holds(self) -> bool:
        return (self.lower_bound_rank_M <= self.rank_M
                and self.rank_M_gamma <= self.upper_bound_rank_gamma
                and self.upper_bound_rank_gamma <= 3 * self.lower_bound_rank_M)

    def to_json(self) -> dict:
        lb = self.lower_bound_rank_M
        return {"k": self.k, "r1": self.r1, "r2": self.r2, "r3": self.r3, "r4": self.r4,
                "lower_bound_rank_M": [str(lb.numerator), str(lb.denominator)],
                "upper_bound_rank_gamma": self.upper_bound_rank_gamma, "branch": self.branch,
                "rank_M": self.rank_M, "rank_M_gamma": self.rank_M_gamma}


def _rank_or_zero(m: Matrix, rows, cols) -> int:
    rows, cols = list(rows), list(cols)
    if not rows or not cols:
        return 0
    return mx.rank(m.submatrix(rows, cols)).rank


def verify_appendix_bounds(c: CanonicalForm) -> AppendixBounds:
    """Evaluate the sub-block rank bounds and check they bracket the true ranks.

    Blocks are zero-padded to ``d x d`` with ``d = max(m2, n2)``.  With
    ``Q = N12`` and ``R = N21`` split at ``k``:
    ``r1 = rank [R12; R22]``, ``r2 = rank [R21 R22]``,
    ``r3 = rank [Q12; Q22]``, ``r4 = rank [Q21 Q22]``.

    * ``w != 0``: ``rank M >= (r1+r2+r3+r4)/2 + k`` and ``rank M^{Gamma_A} <= 2k + r1 + r3``
    * ``w == 0``: ``rank M >= k + r1 + r4`` and ``rank M^{Gamma_A} <= 3k + r1 + r4``

    Raises :class:`AppendixBoundViolation` if either bound or
    ``upper <= 3 * lower`` fails.
    """
    n = c.N
    d = max(n.m2, n.n2)
    padded = BipartiteMatrix.from_blocks([[mx.pad(n.block(i, j), d, d) for j in range(2)] for i in range(2)])
    k = c.k
    q = padded.block(0, 1)
    r = padded.block(1, 0)
    tail = range(k, d)
    full = range(d)
    r1 = _rank_or_zero(r, full, tail)
    r2 = _rank_or_zero(r, tail, full)
    r3 = _rank_or_zero(q, full, tail)
    r4 = _rank_or_zero(q, tail, full)
    if c.branch == W_NONZERO:
        lower = Fraction(r1 + r2 + r3 + r4, 2) + k
        upper = 2 * k + r1 + r3
    else:
        lower = Fraction(k + r1 + r4)
        upper = 3 * k + r1 + r4
    rank_m = mx.rank(padded.data).rank
    rank_g = mx.rank(bp.partial_transpose(padded, "A").data).rank
    bounds = AppendixBounds(k, r1, r2, r3, r4, lower, upper, c.branch, rank_m, rank_g)
    if not bounds.sandwich_holds:
        raise AppendixBoundViolation(f"bound sandwich failed: {bounds}", c.N, bounds)
    return bounds


def block_rank_inequalities(a: Matrix, b: Matrix, c: Matrix) -> bool:
    """Check ``r(A) + r(C) <= r([[A, 0], [B, C]]) <= r([A; B]) + r(C)`` exactly."""
    if b.cols != a.cols or b.rows != c.rows:
        raise DimensionError(f"blocks A{a.shape}, B{b.shape}, C{c.shape} do not fit [[A, 0], [B, C]]")
    zero = Matrix.zeros(a.rows, c.cols, a.scalar)
    whole = mx.block_matrix([[a, zero], [b, c]])
    ra, rc = mx.rank(a).rank, mx.rank(c).rank
    rw = mx.rank(whole).rank
    rab = mx.rank(mx.vstack([a, b])).rank
    return ra + rc <= rw <= rab + rc


# --------------------------------------------------------------------------
# special block layouts


@dataclass(frozen=True)
class SpecialCaseTag:
    case: str
    witness: tuple = ()

    def to_json(self) -> dict:
        return {"case": self.case, "witness": [list(w) for w in self.witness]}


def _independent_prefix(blocks):
    """Indices of the greedily chosen linearly independent blocks, left to right."""
    chosen = []
    for j, b in enumerate(blocks):
        if bp.stacked_rank([blocks[t] for t in chosen] + [b]) > len(chosen):
            chosen.append(j)
    return chosen


def detect_special_case(m: BipartiteMatrix) -> SpecialCaseTag:
    """First matching layout, checked in the order full_row, row_with_s_minus_1, single_independent_per_row."""
    s = bp.schmidt_rank(m)
    if s > m.n1:
        return SpecialCaseTag(NO_CASE)
    grid = m.blocks()
    indep = [_independent_prefix(row) for row in grid]

    for i, idx in enumerate(indep):
        if len(idx) == s:
            return SpecialCaseTag(FULL_ROW, tuple((i, j) for j in idx))

    if s >= 2:
        for i, row in enumerate(grid):
            nonzero = [j for j, b in enumerate(row) if not b.is_zero()]
            if len(nonzero) != s - 1 or len(indep[i]) != s - 1:
                continue
            zero_cols = [j for j in range(m.n1) if j not in nonzero]
            base = [row[j] for j in nonzero]
            for r in range(i + 1, m.m1):
                for col in zero_cols:
                    blk = grid[r][col]
                    if not blk.is_zero() and bp.stacked_rank(base + [blk]) == s:
                        return SpecialCaseTag(ROW_S_MINUS_1, tuple((i, j) for j in nonzero) + ((r, col),))

    if all(len(idx) <= 1 for idx in indep):
        return SpecialCaseTag(SINGLE_PER_ROW, tuple((i, idx[0]) for i, idx in enumerate(indep) if idx))

    return SpecialCaseTag(NO_CASE)


def verify_special_case(m: BipartiteMatrix, tag: SpecialCaseTag) -> bool:
    """Re-check a tag's witness against the matrix."""
    s = bp.schmidt_rank(m)
    if tag.case == NO_CASE:
        return True
    wit = list(tag.witness)
    if tag.case == FULL_ROW:
        return (len(wit) == s and len({i for i, _ in wit}) == 1
                and bp.stacked_rank(m.block(i, j) for i, j in wit) == s)
    if tag.case == ROW_S_MINUS_1:
        *head, (r, col) = wit
        if len(head) != s - 1 or len({i for i, _ in head}) != 1:
            return False
        i = head[0][0]
        head_cols = {j for _, j in head}
        others_zero = all(m.block(i, j).is_zero() for j in range(m.n1) if j not in head_cols)
        return (others_zero and r > i and col not in head_cols
                and bp.stacked_rank(m.block(*p) for p in head) == s - 1
                and bp.stacked_rank([m.block(*p) for p in head] + [m.block(r, col)]) == s)
    if tag.case == SINGLE_PER_ROW:
        rows_ok = all(bp.stacked_rank(m.block(i, j) for j in range(m.n1)) <= 1 for i in range(m.m1))
        return rows_ok and all(not m.block(i, j).is_zero() for i, j in wit)
    return False


def independent_blocks(count, rows, cols, seed, entry_bound=bp.DEFAULT_ENTRY_BOUND):
    """``count`` random exact ``rows x cols`` matrices that are linearly independent."""
    if count > rows * cols:
        raise ContractError("more blocks requested than the block space holds")
    rng = make_rng(seed)
    for _ in range(64):
        out = [mx.random_matrix(rows, cols, rng, entry_bound) for _ in range(count)]
        if bp.stacked_rank(out) == count:
            return out
    raise RuntimeError("could not draw independent blocks")


def _nonzero_gaussian(rng, bound):
    while True:
        re, im = (int(v) for v in rng.integers(-bound, bound + 1, size=2))
        if re or im:
            return GaussianRational(re, im)


def random_special_case(case, s, m1, n1, m2, n2, seed, entry_bound=bp.DEFAULT_ENTRY_BOUND) -> BipartiteMatrix:
    """Build a random Schmidt-rank-``s`` matrix laid out as ``case``.

    * ``full_row``: row 0 is ``[S_1 .. S_s 0 ..]``, other rows random combinations.
    * ``single_independent_per_row``: row ``i`` is ``[a_i1 S_t, a_i2 S_t, ..]`` with
      ``t = i mod s`` and every ``a_ij`` nonzero (needs ``s >= 2``, ``m1 >= s``).
    * ``row_with_s_minus_1``: row 0 is ``[S_1 .. S_{s-1} 0 ..]``, row 1 carries
      ``S_s`` in column ``s-1`` (plus ``c S_1`` in column 0 when ``s >= 3``), later rows
      hold multiples of ``S_1`` in column 0.
    """
    if s > n1:
        raise ContractError("special layouts need s <= n1")
    rng = make_rng(seed)
    S = independent_blocks(s, m2, n2, rng, entry_bound)
    zero = Matrix.zeros(m2, n2)
    grid = [[zero] * n1 for _ in range(m1)]
    if case == FULL_ROW:
        for j in range(s):
            grid[0][j] = S[j]
        for i in range(1, m1):
            for j in range(n1):
                coeffs = mx.random_matrix(1, s, rng, entry_bound)
                blk = mx.scale(S[0], coeffs[0, 0])
                for t in range(1, s):
                    blk = blk + mx.scale(S[t], coeffs[0, t])
                grid[i][j] = blk
    elif case == SINGLE_PER_ROW:
        if s < 2 or m1 < s:
            raise ContractError("single_independent_per_row needs 2 <= s <= m1")
        for i in range(m1):
            for j in range(n1):
                grid[i][j] = mx.scale(S[i % s], _nonzero_gaussian(rng, entry_bound))
    elif case == ROW_S_MINUS_1:
        if s < 2 or m1 < 2:
            raise ContractError("row_with_s_minus_1 needs s >= 2 and m1 >= 2")
        for j in range(s - 1):
            grid[0][j] = S[j]
        grid[1][s - 1] = S[s - 1]
        if s >= 3:
            grid[1][0] = mx.scale(S[0], _nonzero_gaussian(rng, entry_bound))
        for i in range(2, m1):
            grid[i][0] = mx.scale(S[0], _nonzero_gaussian(rng, entry_bound))
    else:
        raise ValueError(f"unknown case {case!r}")
    return BipartiteMatrix.from_blocks(grid)


def random_w_zero_instance(m2, n2, seed, entry_bound=bp.DEFAULT_ENTRY_BOUND) -> BipartiteMatrix:
    """Random 2x2-block Schmidt-rank-3 matrix whose normal form has ``w = 0``.

    Starts from ``[[A, B], [C, 0]]`` with independent ``A, B, C`` and scrambles
    it with a random local equivalence; the branch is a local invariant.
    """
    rng = make_rng(seed)
    a, b, c = independent_blocks(3, m2, n2, rng, entry_bound)
    base = BipartiteMatrix.from_blocks([[a, b], [c, Matrix.zeros(m2, n2)]])
    return bp.apply_local(base, bp.random_local_equivalence(base.dims, rng))
