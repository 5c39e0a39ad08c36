from .types import TransitionTensor, SimplexVector, StatePair
from .errors import *
from .tensor_core import validate, bilinear_apply, bilinear_raw, f_p, slice_matrix, min_entry
from .conditions import (
    jacobian, check_min_entry_condition, check_jacobian_entry_condition,
    eigen_one_excluded, decompose_stochastic, is_irreducible,
)
from .solvers import (
    SolveOptions, Method, power_method, markov_process, augmented_map,
    power_contraction_bound, markov_bound_curve, Quadratic222, solve_2x2x2,
    oracle_solution, iteration_statistics,
)
from .generator import fixture, RandomTensorSpec, random_positive, random_simplex
