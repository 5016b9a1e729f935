"""Exact rank-inequality verification for bipartite matrices and tripartite states."""

from .bipartite import (
    BipartiteMatrix,
    LocalEquivalence,
    SchmidtDecomposition,
    apply_local,
    partial_transpose,
    random_schmidt_rank_k,
    realign,
    schmidt_decompose,
    schmidt_rank,
)
from .conjecture import (
    check_conjecture,
    detect_special_case,
    lemma_sr_max_shortcut,
    reduce_to_canonical,
    verify_appendix_bounds,
)
from .matrix import ContractError, Matrix, RankCertificate, rank
from .scalar import GaussianRational
from .scan import ScanParams, ScanReport, scan_campaign
from .states import (
    TripartiteState,
    distillability_screen,
    is_ppt,
    partial_trace,
    random_tripartite,
    random_with_reduced_rank,
    rank_triple,
)

__version__ = "0.1.0"
