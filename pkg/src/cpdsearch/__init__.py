"""Exact CPD search over prime finite fields.

Decides whether a tensor over GF(p) has rank at most R and produces a
witness decomposition when one exists.  Public surface: field and exact
linear algebra (GF, Mat), tensors and decompositions (Tensor, Cpd),
concise reduction, two search algorithms, a brute-force oracle, benchmark
instances, and the decompose/rank pipeline used by the CLI.
"""
from .errors import (BudgetExceededError, CpdSearchError, FieldError,
                     InfeasibleInnerDimError, NotACpdError, ShapeError,
                     SearchInputError, SingularMatrixError)
from .field import GF, Field
from .matrix import (Mat, RankNormalForm, RrefResult, enumerate_factorizations,
                     enumerate_full_rank, hstack, inverse, kernel_basis, rank,
                     rank_normal_form, rref_transform, solve_right_factors,
                     vstack)
from .tensor import (Cpd, Tensor, contract, cpd_eval, cpd_verify, outer_flat,
                     rank1_decompose, transpose, unfold)
from .preprocess import (ConciseReduction, concise_reduce, lift_cpd,
                         rank_lower_bound, trivial_cpd)
from .search_general import (SearchConfig, SearchOutcome, SearchState,
                             SearchStats, YAssignment, enumerate_y_assignments,
                             good_pairs, search_general, test_assignment)
from .search_3d import (RStarResult, compute_rstar, enumerate_y12, search_3d,
                        shortcut_construct, slice_matrix)
from .oracle import oracle_decompose, oracle_rank
from .instances import (ScrambleResult, SplitMix64, lysikov,
                        lysikov_rank8_cpd, mmt, mmt222_rank7_cpd, random_gl,
                        random_tensor, runtime_exponent, scramble)
from .cli import decompose_tensor, predicted_exponents, tensor_rank

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError", "CpdSearchError", "FieldError",
    "InfeasibleInnerDimError", "NotACpdError", "ShapeError",
    "SearchInputError", "SingularMatrixError",
    "GF", "Field",
    "Mat", "RankNormalForm", "RrefResult", "enumerate_factorizations",
    "enumerate_full_rank", "hstack", "inverse", "kernel_basis", "rank",
    "rank_normal_form", "rref_transform", "solve_right_factors", "vstack",
    "Cpd", "Tensor", "contract", "cpd_eval", "cpd_verify", "outer_flat",
    "rank1_decompose", "transpose", "unfold",
    "ConciseReduction", "concise_reduce", "lift_cpd", "rank_lower_bound",
    "trivial_cpd",
    "SearchConfig", "SearchOutcome", "SearchState", "SearchStats",
    "YAssignment", "enumerate_y_assignments", "good_pairs", "search_general",
    "test_assignment",
    "RStarResult", "compute_rstar", "enumerate_y12", "search_3d",
    "shortcut_construct", "slice_matrix",
    "oracle_decompose", "oracle_rank",
    "ScrambleResult", "SplitMix64", "lysikov", "lysikov_rank8_cpd", "mmt",
    "mmt222_rank7_cpd", "random_gl", "random_tensor", "runtime_exponent",
    "scramble",
    "decompose_tensor", "predicted_exponents", "tensor_rank",
]
