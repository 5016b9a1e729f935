"""Tripartite density matrices, their reductions, PPT tests and rank screens."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bipartite as bp
from . import matrix as mx
from ._kernels._pykernel import _gdiv
from .matrix import ContractError, DimensionError, Matrix
from .rng import make_rng

PAIRS = {"AB": (0, 1), "AC": (0, 2), "BC": (1, 2)}
MAX_ATTEMPTS = 64
FLOAT_TRACE_TOL = 1e-12


class NotHermitianError(ContractError):
    pass


class StateError(ContractError):
    """Matrix is not a valid density operator."""


# --------------------------------------------------------------------------
# positivity


def is_hermitian(m: Matrix, tolerance=None) -> bool:
    if m.rows != m.cols:
        return False
    if m.is_exact:
        re, im, _ = m.numerators
        return bool(np.array_equal(re, re.T) and np.array_equal(im, -im.T))
    a = m.array()
    tol = 1e-12 if tolerance is None else tolerance
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol * max(1.0, np.max(np.abs(a))))


def _psd_exact(m: Matrix) -> bool:
    """Fraction-free symmetric elimination with diagonal pivoting.

    After choosing pivot set ``P`` the working entry ``(i, i)`` equals the
    principal minor ``det H[P + {i}]``; since ``det H[P] > 0`` its sign is the
    sign of the Schur-complement diagonal.  A negative diagonal refutes
    positivity; an all-zero diagonal forces the remaining block to vanish.
    """
    re, im, _ = m.numerators
    n = m.rows
    ar = [[int(v) for v in row] for row in re]
    ai = [[int(v) for v in row] for row in im]
    alive = list(range(n))
    pr, pnorm = 1, 1
    while alive:
        diag = [(ar[i][i], i) for i in alive]
        if any(d < 0 for d, _ in diag):
            return False
        best, k = max(diag, key=lambda t: (t[0], -t[1]))
        if best == 0:
            return all(ar[i][j] == 0 and ai[i][j] == 0 for i in alive for j in alive)
        alive.remove(k)
        for i in alive:
            xr, xi = ar[i][k], ai[i][k]
            for j in alive:
                tr = best * ar[i][j] - (xr * ar[k][j] - xi * ai[k][j])
                ti = best * ai[i][j] - (xr * ai[k][j] + xi * ar[k][j])
                ar[i][j], ai[i][j] = _gdiv(tr, ti, pr, 0, pnorm)
        pr, pnorm = best, best * best
    return True


def is_psd(m: Matrix, tolerance=None) -> bool:
    """Positive semidefiniteness; exact pivots for exact input, eigenvalues otherwise."""
    if not is_hermitian(m):
        raise NotHermitianError("positivity test needs a Hermitian matrix")
    if m.is_exact:
        return _psd_exact(m)
    w = np.linalg.eigvalsh(m.array())
    tol = tolerance if tolerance is not None else m.rows * np.finfo(float).eps * max(1.0, float(np.max(np.abs(w))))
    return bool(w[0] >= -tol)


def partial_transpose_state(rho: Matrix, dims) -> Matrix:
    d1, d2 = dims
    return bp.partial_transpose(bp.BipartiteMatrix(d1, d1, d2, d2, rho), "B").data


def is_ppt(rho: Matrix, dims, tolerance=None) -> bool:
    """Whether the second-factor partial transpose of ``rho`` is positive semidefinite."""
    d1, d2 = dims
    if rho.shape != (d1 * d2, d1 * d2):
        raise DimensionError(f"rho of shape {rho.shape} does not act on {d1}x{d2}")
    if not is_hermitian(rho, tolerance):
        raise NotHermitianError("PPT test needs a Hermitian matrix")
    return is_psd(partial_transpose_state(rho, dims), tolerance)


# --------------------------------------------------------------------------
# reductions


def reduce_factors(rho: Matrix, dims, keep) -> Matrix:
    """Partial trace over every factor of ``dims`` not listed in ``keep``."""
    dims = tuple(dims)
    keep = tuple(sorted(keep))
    n = len(dims)

    def fn(a):
        t = a.reshape(dims + dims)
        cur = list(range(n))
        for f in reversed(range(n)):
            if f in keep:
                continue
            ax = cur.index(f)
            t = np.trace(t, axis1=ax, axis2=ax + len(cur))
            cur.remove(f)
        d = int(np.prod([dims[f] for f in keep])) if keep else 1
        return t.reshape(d, d)

    return rho.map_layout(fn)


@dataclass(frozen=True, eq=False)
class TripartiteState:
    dA: int
    dB: int
    dC: int
    rho: Matrix
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        d = self.dA * self.dB * self.dC
        if min(self.dA, self.dB, self.dC) < 1:
            raise DimensionError("local dimensions must be positive")
        if self.rho.shape != (d, d):
            raise DimensionError(f"rho shape {self.rho.shape} does not match dims {self.dims}")
        if self.validate:
            check_density(self.rho)

    @property
    def dims(self):
        return (self.dA, self.dB, self.dC)

    def reduced(self, keep: str) -> Matrix:
        if keep in PAIRS:
            return reduce_factors(self.rho, self.dims, PAIRS[keep])
        if keep in ("A", "B", "C"):
            return reduce_factors(self.rho, self.dims, ("ABC".index(keep),))
        raise ValueError(f"keep must be one of AB, AC, BC, A, B, C; got {keep!r}")

    def __eq__(self, other):
        if not isinstance(other, TripartiteState):
            return NotImplemented
        return self.dims == other.dims and self.rho == other.rho

    __hash__ = None


def check_density(rho: Matrix):
    if not is_hermitian(rho):
        raise StateError("density matrix must be Hermitian")
    tr = mx.trace(rho)
    if rho.is_exact:
        if tr != 1:
            raise StateError(f"trace is {tr}, expected exactly 1")
    elif abs(tr - 1) > FLOAT_TRACE_TOL:
        raise StateError(f"trace is {tr}, expected 1")
    if not is_psd(rho):
        raise StateError("density matrix is not positive semidefinite")


def partial_trace(s: TripartiteState, keep: str) -> Matrix:
    """Reduced density operator on the pair ``keep`` (``"AB"``, ``"AC"`` or ``"BC"``)."""
    if keep not in PAIRS:
        raise ValueError(f"keep must be AB, AC or BC; got {keep!r}")
    return s.reduced(keep)


@dataclass(frozen=True)
class RankTriple:
    r_AB: int
    r_AC: int
    r_BC: int
    certificates: tuple = field(default=(), repr=False, compare=False)

    @property
    def inequality_holds(self) -> bool:
        return self.r_AB * self.r_AC >= self.r_BC


def rank_triple(s: TripartiteState, tolerance=None) -> RankTriple:
    """Ranks of the three two-party reductions and the product inequality flag."""
    certs = tuple(mx.rank(partial_trace(s, p), tolerance) for p in ("AB", "AC", "BC"))
    return RankTriple(*(c.rank for c in certs), certificates=certs)


# --------------------------------------------------------------------------
# distillability screen

RANK_LE_4 = "rank_le_4"
RANK_LE_MAXMN = "rank_le_maxmn"
NO_BOUND = "none"


@dataclass(frozen=True)
class DistillabilityVerdict:
    npt: bool
    rank_bound_used: str
    distillable: bool
    notes: str
    ranks: RankTriple
    support_dims: tuple  # (rank rho_B, rank rho_C)

    def to_json(self) -> dict:
        return {"npt": self.npt, "rank_bound_used": self.rank_bound_used,
                "distillable": self.distillable, "notes": self.notes,
                "r_AB": self.ranks.r_AB, "r_AC": self.ranks.r_AC, "r_BC": self.ranks.r_BC,
                "support_dims": list(self.support_dims)}


def distillability_screen(s: TripartiteState, tolerance=None) -> DistillabilityVerdict:
    """Certify distillability of ``rho_BC`` from the ranks of the other reductions.

    Two criteria, both requiring ``rho_BC`` to be NPT:

    * ``r_AB = r_AC = 2``: then ``r_BC <= 4``, and NPT states of rank at most
      four are distillable.
    * ``r_AB <= 3`` and ``max(m, n) >= r_AB r_AC`` with ``m, n`` the support
      dimensions of ``rho_B``, ``rho_C``: then ``r_BC <= max(m, n)``, and NPT
      states of that rank are distillable.

    The rank bound is recomputed, never assumed.  A false ``distillable``
    means the screen is inconclusive, not that the state is undistillable.
    """
    ranks = rank_triple(s, tolerance)
    rho_bc = partial_trace(s, "BC")
    npt = not is_ppt(rho_bc, (s.dB, s.dC), tolerance)
    m = mx.rank(s.reduced("B"), tolerance).rank
    n = mx.rank(s.reduced("C"), tolerance).rank
    ambient = f"ambient max(dB, dC) = {max(s.dB, s.dC)}"
    support = (m, n)

    if not npt:
        return DistillabilityVerdict(False, NO_BOUND, False,
                                     f"inconclusive: rho_BC is PPT; {ambient}", ranks, support)
    if ranks.r_AB == 2 and ranks.r_AC == 2:
        if ranks.r_BC <= 4:
            return DistillabilityVerdict(True, RANK_LE_4, True,
                                         f"NPT with r_BC = {ranks.r_BC} <= 4", ranks, support)
        return DistillabilityVerdict(True, NO_BOUND, False,
                                     f"rank bound r_BC <= 4 FAILED (r_BC = {ranks.r_BC})", ranks, support)
    if ranks.r_AB <= 3 and max(m, n) >= ranks.r_AB * ranks.r_AC:
        if ranks.r_BC <= max(m, n):
            return DistillabilityVerdict(True, RANK_LE_MAXMN, True,
                                         f"NPT with r_BC = {ranks.r_BC} <= max(m, n) = {max(m, n)} "
                                         f"(support dims); {ambient}", ranks, support)
        return DistillabilityVerdict(True, NO_BOUND, False,
                                     f"rank bound r_BC <= max(m, n) FAILED; {ambient}", ranks, support)
    return DistillabilityVerdict(True, NO_BOUND, False,
                                 f"inconclusive: NPT but no rank criterion applies; {ambient}", ranks, support)


# --------------------------------------------------------------------------
# generators


def density_from_vectors(psi: Matrix) -> Matrix:
    """``psi psi^dagger / tr`` for a ``D x e`` matrix of purification columns."""
    g = psi @ psi.H
    tr = mx.trace(g)
    if tr == 0:
        raise StateError("zero vector")
    return mx.scale(g, tr.inverse()) if g.is_exact else mx.scale(g, 1 / tr)


def random_tripartite(dA, dB, dC, target_rank, seed, entry_bound=bp.DEFAULT_ENTRY_BOUND) -> TripartiteState:
    """``G G^dagger`` normalised, with ``G`` a random exact ``D x target_rank`` matrix."""
    d = dA * dB * dC
    if not 1 <= target_rank <= d:
        raise ContractError(f"target_rank must lie in [1, {d}]")
    rng = make_rng(seed)
    for _ in range(MAX_ATTEMPTS):
        g = mx.random_matrix(d, target_rank, rng, entry_bound)
        if g.is_zero():
            continue
        rho = density_from_vectors(g)
        if mx.rank(rho).rank == target_rank:
            return TripartiteState(dA, dB, dC, rho)
    raise RuntimeError("rank target not reached")


def random_with_reduced_rank(dA, dB, dC, r_ab_target, seed, purification_rank=None,
                             entry_bound=bp.DEFAULT_ENTRY_BOUND) -> TripartiteState:
    """Random state whose ``rho_AB`` has certified rank ``r_ab_target``.

    The purification on ``A B C E`` is ``sum_t phi_t (x) chi_t`` with ``r``
    random vectors ``phi_t`` on ``AB`` and ``chi_t`` on ``CE``; tracing ``E``
    gives ``rho_ABC``.  ``purification_rank`` is the dimension of ``E``
    (defaults to the smallest value with ``dC * e >= r``).
    """
    r = r_ab_target
    if not 1 <= r <= dA * dB:
        raise ContractError(f"r_ab_target must lie in [1, {dA * dB}]")
    e = purification_rank if purification_rank is not None else -(-r // dC)
    if r > dC * e:
        raise ContractError("purification too small for the requested rank")
    rng = make_rng(seed)
    for _ in range(MAX_ATTEMPTS):
        phi = mx.random_matrix(dA * dB, r, rng, entry_bound)
        chi = mx.random_matrix(r, dC * e, rng, entry_bound)
        psi = (phi @ chi).map_layout(lambda a: a.reshape(dA * dB * dC, e))
        if psi.is_zero():
            continue
        state = TripartiteState(dA, dB, dC, density_from_vectors(psi), validate=False)
        if mx.rank(partial_trace(state, "AB")).rank == r:
            return TripartiteState(dA, dB, dC, state.rho)
    raise RuntimeError("rank target not reached")


def product_state(factors) -> Matrix:
    out = factors[0]
    for f in factors[1:]:
        out = mx.kron(out, f)
    return out


def random_density(d, rank_, seed, entry_bound=bp.DEFAULT_ENTRY_BOUND) -> Matrix:
    """Normalised ``G G^dagger`` with ``G`` random ``d x rank_``; the rank is not certified."""
    rng = make_rng(seed)
    for _ in range(MAX_ATTEMPTS):
        g = mx.random_matrix(d, rank_, rng, entry_bound)
        if not g.is_zero():
            return density_from_vectors(g)
    raise RuntimeError("only zero draws")


def engineered_two_two_state(dA, dB, dC, seed, require_npt=True, entry_bound=bp.DEFAULT_ENTRY_BOUND) -> TripartiteState:
    """Pure state ``sum_{p,q<2} a_pq (x) b_p (x) c_q`` with ``r_AB = r_AC = 2``.

    ``rho_B`` and ``rho_C`` live on two-dimensional supports, so ``r_AC = r_B``
    and ``r_AB = r_C`` are both two.  With ``require_npt`` draws are repeated
    until ``rho_BC`` is NPT.
    """
    if min(dB, dC) < 2:
        raise ContractError("dB and dC must be at least 2")
    rng = make_rng(seed)
    for _ in range(MAX_ATTEMPTS):
        a = [mx.random_matrix(dA, 1, rng, entry_bound) for _ in range(4)]
        b = [mx.random_matrix(dB, 1, rng, entry_bound) for _ in range(2)]
        c = [mx.random_matrix(dC, 1, rng, entry_bound) for _ in range(2)]
        psi = mx.kron(mx.kron(a[0], b[0]), c[0])
        for p, q in ((0, 1), (1, 0), (1, 1)):
            psi = psi + mx.kron(mx.kron(a[2 * p + q], b[p]), c[q])
        if psi.is_zero():
            continue
        s = TripartiteState(dA, dB, dC, density_from_vectors(psi))
        t = rank_triple(s)
        if (t.r_AB, t.r_AC) != (2, 2):
            continue
        if require_npt and is_ppt(partial_trace(s, "BC"), (dB, dC)):
            continue
        return s
    raise RuntimeError("no instance found")


def engineered_support_state(dA, dB, r_ab, seed, dC=1, entry_bound=bp.DEFAULT_ENTRY_BOUND) -> TripartiteState:
    """State meeting ``r_AB <= 3`` and ``rank(rho_B) >= r_AB * r_AC``.

    ``rho_AB = sum_t |phi_t><phi_t|`` with ``phi_t = sum_x |x>_A |b_tx>_B`` for
    ``r_ab * dA`` independent vectors ``b_tx``, tensored with a pure ``C``.
    Then ``rank rho_B = r_ab * dA = r_AB * r_AC``, the tight case.
    """
    if r_ab * dA > dB:
        raise ContractError("need dB >= r_ab * dA")
    rng = make_rng(seed)
    for _ in range(MAX_ATTEMPTS):
        bvecs = mx.random_matrix(dB, r_ab * dA, rng, entry_bound)
        if mx.rank(bvecs).rank != r_ab * dA:
            continue
        cols = []
        for t in range(r_ab):
            phi = None
            for x in range(dA):
                ex = Matrix.from_ints([[1 if i == x else 0] for i in range(dA)])
                term = mx.kron(ex, bvecs.submatrix(range(dB), [t * dA + x]))
                phi = term if phi is None else phi + term
            cols.append(phi)
        gamma = mx.random_matrix(dC, 1, rng, entry_bound)
        if gamma.is_zero():
            continue
        psi = mx.hstack([mx.kron(c, gamma) for c in cols])
        s = TripartiteState(dA, dB, dC, density_from_vectors(psi))
        if rank_triple(s).r_AB == r_ab:
            return s
    raise RuntimeError("no instance found")


# --------------------------------------------------------------------------
# JSON


def to_json(s: TripartiteState) -> dict:
    return {"dims": list(s.dims), "rho": mx.to_json(s.rho)}


def from_json(obj) -> TripartiteState:
    if not isinstance(obj, dict):
        raise mx.MatrixFormatError("state", "expected an object")
    dims = obj.get("dims")
    if (not isinstance(dims, list) or len(dims) != 3
            or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)):
        raise mx.MatrixFormatError("dims", "expected three positive integers [dA, dB, dC]")
    if "rho" not in obj:
        raise mx.MatrixFormatError("rho", "missing")
    rho = mx.from_json(obj["rho"])
    try:
        return TripartiteState(*dims, rho)
    except (DimensionError, StateError) as exc:
        raise mx.MatrixFormatError("rho", str(exc)) from None
