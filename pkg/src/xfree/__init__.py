"""Pattern-free subsets of [n]^d: exact solvers, constructions, and audits."""

from .patterns import (
    Pattern,
    RationalTriple,
    arithmetic_progression,
    corner,
    normalize,
    parse_pattern,
    pattern_hash,
    triple_to_primitive,
)
from .copies import (
    CopyPlacement,
    GridSet,
    HypergraphSummary,
    codegree_stats,
    count_copies_closed_form,
    enumerate_copies,
    gamma_count,
    is_x_free,
)
from .solver import (
    CountRecord,
    RNumberRecord,
    count_xfree_subsets,
    greedy_lower_bound,
    solve_rx_exact,
    verify_witness,
)
from .errors import BudgetExceededError, PatternError, PreconditionError

__version__ = "0.1.0"
