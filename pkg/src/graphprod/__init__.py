"""Graph products of finite-dimensional operator algebras on a truncated Fock space."""

from .errors import BudgetError, ConfigError, IncompleteFusionError, NotEquivalentError
from .words import (
    EMPTY,
    IDENTITY,
    FiniteGroup,
    GroupElement,
    SimplicialGraph,
    WordPermutation,
    enumerate_minimal,
    gp_inverse,
    gp_multiply,
    is_reduced,
    left_compatible,
    normalize,
    pentagon,
    reduce,
    right_compatible,
    sigma,
    split_left,
    split_right,
)

__version__ = "0.1.0"
