"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from rankineq.matrix import Matrix


@st.composite
def gaussian_matrices(draw, max_rows=5, max_cols=5, bound=4, rows=None, cols=None):
    r = rows or draw(st.integers(1, max_rows))
    c = cols or draw(st.integers(1, max_cols))
    ints = st.integers(-bound, bound)
    re = draw(st.lists(st.lists(ints, min_size=c, max_size=c), min_size=r, max_size=r))
    im = draw(st.lists(st.lists(ints, min_size=c, max_size=c), min_size=r, max_size=r))
    return Matrix.from_ints(re, im)


@st.composite
def low_rank_matrices(draw, max_dim=6, bound=3):
    """Products of random factors, so rank deficiency is common."""
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    k = draw(st.integers(1, min(r, c)))
    a = draw(gaussian_matrices(rows=r, cols=k, bound=bound))
    b = draw(gaussian_matrices(rows=k, cols=c, bound=bound))
    return a @ b
