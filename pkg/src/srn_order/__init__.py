"""Preordering structures for mass-action stochastic reaction networks."""

from .coupling import (
    AffineRelation,
    HypothesisViolation,
    coupled_rates,
    marginal_rate_identity,
    oracle_check_conditions,
    simulate_coupled,
    simulate_ssa,
)
from .linalg import ConservationBasis, conservation_basis, normalize_row, rref
from .lp import FeasibilityCache, FeasibilityResult, Sign, Status, feasibility_cache, feasible
from .network import (
    KineticsPair,
    ParseError,
    Reaction,
    ReactionNetwork,
    Species,
    aggregate_rate,
    load_network,
    parse_network,
    propensity,
    reaction_vector,
    validate_network,
)
from .order import (
    PreorderingStructure,
    RateConstraint,
    SpeciesTag,
    analyze,
    canonicalize,
    check_structure,
    closure_simple,
    compute_AB,
    row_implied,
)
from .search import SearchOptions, SearchReport, dominates, enumerate_candidates, mirror, search

__all__ = [name for name in dir() if not name.startswith("_")]
