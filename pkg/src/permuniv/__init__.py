"""Permutation universality: patterns, zero-one matrices, greedy scans and shift structure."""

from .errors import InvariantViolation, PermunivError
from .experiments import ExperimentConfig, ExperimentResult, run_experiment, tilted_grid
from .matrix import (
    ZeroOneMatrix,
    build_coupled_matrix,
    coupling_certificate,
    is_interval_minor,
    matrix_contains_permutation,
    permutation_matrix,
)
from .perm import (
    Permutation,
    all_permutations,
    contains_pattern,
    identity,
    is_k_universal,
    lis,
    make_permutation,
    parse_permutation,
    random_permutation,
)
from .quasirandom import (
    PartialMap,
    all_l_delta,
    in_Q_k,
    is_quasirandom_map,
    is_quasirandom_set,
    l_delta,
    l_delta_restricted,
    random_L_bound,
)
from .scanning import multi_thread_scan, negative_binomial_tail, run_length, scan_thread
from .structure import decode_structured, decompose, encode_structured, extract_structured_part

__version__ = "0.1.0"
