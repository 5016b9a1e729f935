import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankineq import bipartite as bp
from rankineq import matrix as mx
from rankineq.bipartite import BipartiteMatrix, LocalEquivalence
from rankineq.matrix import ContractError, DimensionError, Matrix, MatrixFormatError

dims_strategy = st.tuples(*(st.integers(1, 3) for _ in range(4)))


@st.composite
def bipartite_matrices(draw, max_k=None):
    m1, n1, m2, n2 = draw(dims_strategy)
    kmax = min(m1 * n1, m2 * n2)
    k = draw(st.integers(1, min(kmax, max_k or kmax)))
    seed = draw(st.integers(0, 2**32))
    return bp.random_schmidt_rank_k(k, m1, n1, m2, n2, seed), k


ARANGE = BipartiteMatrix(2, 2, 2, 2, Matrix.from_ints(np.arange(16).reshape(4, 4)))


def test_partial_transpose_reference_values():
    assert bp.partial_transpose(ARANGE, "B").data == Matrix.exact(
        [[0, 4, 2, 6], [1, 5, 3, 7], [8, 12, 10, 14], [9, 13, 11, 15]])
    assert bp.partial_transpose(ARANGE, "A").data == Matrix.exact(
        [[0, 1, 8, 9], [4, 5, 12, 13], [2, 3, 10, 11], [6, 7, 14, 15]])
    assert bp.full_transpose(ARANGE).data == ARANGE.data.T


def test_block_access_and_layout():
    m = BipartiteMatrix(2, 3, 2, 1, Matrix.from_ints(np.arange(12).reshape(4, 3)))
    assert m.block(1, 2) == Matrix.exact([[8], [11]])
    assert BipartiteMatrix.from_blocks(m.blocks()) == m
    with pytest.raises(DimensionError):
        BipartiteMatrix(2, 2, 2, 2, Matrix.identity(3))


def test_bell_projector_partial_transpose_rank():
    bell = Matrix.exact([[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]])
    m = BipartiteMatrix(2, 2, 2, 2, bell)
    assert mx.rank(bell).rank == 1
    assert mx.rank(bp.partial_transpose(m).data).rank == 4


def test_swap_realignment_rank():
    swap = Matrix.exact([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    m = BipartiteMatrix(2, 2, 2, 2, swap)
    assert mx.rank(bp.realign(m)).rank == 4
    assert bp.schmidt_rank(m) == 4
    # its partial transpose is the unnormalised Bell projector
    assert mx.rank(bp.partial_transpose(m).data).rank == 1


def test_side_a_needs_square_grid():
    m = bp.random_schmidt_rank_k(1, 2, 3, 2, 2, 0)
    with pytest.raises(DimensionError):
        bp.partial_transpose(m, "A")
    with pytest.raises(ValueError):
        bp.partial_transpose(m, "C")


def test_product_matrix():
    r = mx.random_matrix(2, 3, 1, 3)
    s = mx.random_matrix(3, 2, 2, 3)
    m = BipartiteMatrix(2, 3, 3, 2, mx.kron(r, s))
    assert bp.partial_transpose(m).data == mx.kron(r, s.T)
    assert bp.schmidt_rank(m) == 1
    assert mx.rank(bp.realign(m)).rank == 1
    (rr, ss), = bp.schmidt_decompose(m).terms
    assert mx.kron(rr, ss) == m.data
    assert bp.swap_factors(m).data == mx.kron(s, r)


def test_zero_matrix_rejected():
    z = BipartiteMatrix(2, 2, 2, 2, Matrix.zeros(4, 4))
    with pytest.raises(bp.ZeroMatrixError):
        bp.schmidt_rank(z)
    with pytest.raises(bp.ZeroMatrixError):
        bp.schmidt_decompose(z)


def test_block_diagonal_decomposition():
    ss = [mx.random_matrix(2, 2, 10 + i, 3) for i in range(3)]
    grid = [[ss[i] if i == j else Matrix.zeros(2, 2) for j in range(3)] for i in range(3)]
    m = BipartiteMatrix.from_blocks(grid)
    d = bp.schmidt_decompose(m)
    assert d.schmidt_rank == 3
    assert d.reconstruct() == m


def test_schmidt_rank_three_from_explicit_terms():
    rs = [mx.random_matrix(2, 2, 20 + i, 3) for i in range(3)]
    ss = [mx.random_matrix(3, 3, 30 + i, 3) for i in range(3)]
    assert bp.stacked_rank(rs) == 3 and bp.stacked_rank(ss) == 3
    m = bp.SchmidtDecomposition(tuple(zip(rs, ss))).reconstruct()
    assert bp.schmidt_rank(m) == 3


@given(bipartite_matrices())
def test_generator_hits_requested_rank(case):
    m, k = case
    assert bp.schmidt_rank(m) == k


@given(bipartite_matrices())
def test_schmidt_rank_invariant_under_transposes(case):
    m, k = case
    assert bp.schmidt_rank(bp.partial_transpose(m, "B")) == k
    assert bp.schmidt_rank(bp.full_transpose(m)) == k
    assert bp.schmidt_rank(bp.swap_factors(m)) == k
    if m.m1 == m.n1:
        assert bp.schmidt_rank(bp.partial_transpose(m, "A")) == k


@given(bipartite_matrices())
def test_involutions(case):
    m, _ = case
    assert bp.partial_transpose(bp.partial_transpose(m)) == m
    assert bp.swap_factors(bp.swap_factors(m)) == m
    assert bp.unrealign(bp.realign(m), m.dims) == m
    if m.m1 == m.n1:
        assert bp.partial_transpose(bp.partial_transpose(m, "A"), "A") == m
        # Gamma_A is the full transpose of Gamma_B
        assert bp.partial_transpose(m, "A") == bp.full_transpose(bp.partial_transpose(m, "B"))


@given(bipartite_matrices(), st.integers(0, 2**32))
def test_realign_is_linear(case, seed):
    a, _ = case
    b = bp.random_schmidt_rank_k(1, *a.dims, seed)
    assert bp.realign(a + b) == bp.realign(a) + bp.realign(b)


@given(bipartite_matrices())
def test_exact_decomposition(case):
    m, k = case
    d = bp.schmidt_decompose(m)
    assert d.schmidt_rank == k
    assert d.reconstruct() == m
    assert d.factors_independent()


@given(bipartite_matrices())
def test_float_decomposition(case):
    m, k = case
    f = BipartiteMatrix(*m.dims, mx.to_float(m.data))
    d = bp.schmidt_decompose(f)
    assert d.schmidt_rank == k
    err = np.max(np.abs(d.reconstruct().data.array() - f.data.array()))
    assert err <= 1e-9 * max(1.0, np.max(np.abs(f.data.array())))


def test_schmidt_rank_matches_partial_transpose_on_200_instances():
    for seed in range(200):
        m = bp.random_schmidt_rank_k(1 + seed % 4, 2, 2, 3, 3, seed)
        assert bp.schmidt_rank(m) == bp.schmidt_rank(bp.partial_transpose(m))


def test_500_rank_three_draws():
    assert all(bp.schmidt_rank(bp.random_schmidt_rank_k(3, 2, 2, 3, 3, s)) == 3 for s in range(500))


def test_generator_range():
    with pytest.raises(ContractError):
        bp.random_schmidt_rank_k(5, 2, 2, 2, 2, 0)
    with pytest.raises(ContractError):
        bp.random_schmidt_rank_k(0, 2, 2, 2, 2, 0)
    m = bp.random_schmidt_rank_k(4, 2, 2, 3, 3, 0)
    assert bp.schmidt_rank(m) == 4


def test_generator_is_deterministic():
    assert bp.random_schmidt_rank_k(3, 2, 3, 3, 2, 77) == bp.random_schmidt_rank_k(3, 2, 3, 3, 2, 77)


@given(bipartite_matrices(), st.integers(0, 2**32))
def test_local_equivalence_preserves_ranks(case, seed):
    m, k = case
    e = bp.random_local_equivalence(m.dims, seed)
    n = bp.apply_local(m, e)
    assert mx.rank(n.data).rank == mx.rank(m.data).rank
    assert bp.schmidt_rank(n) == k
    assert (mx.rank(bp.partial_transpose(n).data).rank
            == mx.rank(bp.partial_transpose(m).data).rank)


def test_local_equivalence_composition():
    m = bp.random_schmidt_rank_k(2, 2, 2, 2, 3, 5)
    e = bp.random_local_equivalence(m.dims, 1)
    f = bp.random_local_equivalence(m.dims, 2)
    assert bp.apply_local(m, e.then(f)) == bp.apply_local(bp.apply_local(m, e), f)
    assert bp.apply_local(m, LocalEquivalence.identity(m.dims)) == m


def test_singular_factor_rejected():
    i2 = Matrix.identity(2)
    with pytest.raises(bp.NotInvertibleError):
        LocalEquivalence(i2, Matrix.exact([[1, 1], [1, 1]]), i2, i2)


def test_json_round_trips():
    m = bp.random_schmidt_rank_k(3, 2, 3, 2, 2, 4)
    assert bp.from_json(bp.to_json(m)) == m
    d = bp.schmidt_decompose(m)
    assert bp.decomposition_from_json(bp.decomposition_to_json(d)).reconstruct() == m
    e = bp.random_local_equivalence(m.dims, 9)
    assert bp.equivalence_from_json(bp.equivalence_to_json(e)) == e


def test_json_dims_errors():
    obj = bp.to_json(bp.random_schmidt_rank_k(1, 2, 2, 2, 2, 0))
    obj["dims"] = [2, 2, 2]
    with pytest.raises(MatrixFormatError) as info:
        bp.from_json(obj)
    assert info.value.field == "dims"
    obj["dims"] = [2, 2, 1, 4]
    with pytest.raises(MatrixFormatError) as info:
        bp.from_json(obj)
    assert info.value.field == "dims"
