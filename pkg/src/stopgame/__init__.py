"""Exact solver and brute-force verifier for two-sided stopping games.

The payoff U(s, t) depends on both players' stopping times and is only
settled once both have stopped, so optimal play needs reaction strategies,
not just stopping times. The solver reduces the game to a stop-first game
between two standing-value processes and builds explicit optimal strategies;
the oracle re-derives every value by exhaustive enumeration on small finite
filtered spaces and checks the two routes agree exactly.
"""

from .space import (
    AdaptedProcess,
    FilteredSpace,
    Rational,
    RandomVariable,
    Violation,
    cond_exp,
    constant,
    expectation,
    is_measurable,
    validate_space,
)
from .stopping import (
    EnumerationOverflowError,
    StoppingStrategy,
    StoppingTime,
    StoppingTimeSet,
    StrategyKind,
    check_nonanticipativity,
    compose_family,
    count_stopping_times,
    enumerate_stopping_times,
    enumerate_strategies,
    is_stopping_time,
    nonanticipativity_witness,
)
from .payoff import (
    BiPayoff,
    ModeError,
    PayoffSpec,
    UtilityFn,
    build_payoff,
    expected_payoff,
    gen_distance,
    gen_dynkin,
    gen_market_entry,
    gen_mismatch,
    gen_utility_spread,
    realized_payoff,
    validate_payoff,
)
from .solver import (
    GameSolution,
    build_rho_star,
    build_rho_starstar,
    build_tau_star,
    build_tau_starstar,
    corollary_identities,
    dynkin_value,
    lower_process,
    solve,
    upper_process,
)
from .oracle import (
    Caps,
    CheckResult,
    GameValueReport,
    SkipNote,
    VerificationResult,
    check_ordering_chain,
    dynkin_pair_value,
    payoff_matrix,
    value_naive,
    value_strategic,
    verify_theorem,
)

__version__ = "0.1.0"

__all__ = [
    "AdaptedProcess",
    "BiPayoff",
    "Caps",
    "CheckResult",
    "EnumerationOverflowError",
    "FilteredSpace",
    "GameSolution",
    "GameValueReport",
    "ModeError",
    "PayoffSpec",
    "Rational",
    "RandomVariable",
    "SkipNote",
    "StoppingStrategy",
    "StoppingTime",
    "StoppingTimeSet",
    "StrategyKind",
    "UtilityFn",
    "VerificationResult",
    "Violation",
    "build_payoff",
    "build_rho_star",
    "build_rho_starstar",
    "build_tau_star",
    "build_tau_starstar",
    "check_nonanticipativity",
    "check_ordering_chain",
    "compose_family",
    "cond_exp",
    "constant",
    "corollary_identities",
    "count_stopping_times",
    "dynkin_pair_value",
    "dynkin_value",
    "enumerate_stopping_times",
    "enumerate_strategies",
    "expectation",
    "expected_payoff",
    "gen_distance",
    "gen_dynkin",
    "gen_market_entry",
    "gen_mismatch",
    "gen_utility_spread",
    "is_measurable",
    "is_stopping_time",
    "lower_process",
    "nonanticipativity_witness",
    "payoff_matrix",
    "realized_payoff",
    "solve",
    "upper_process",
    "validate_payoff",
    "validate_space",
    "value_naive",
    "value_strategic",
    "verify_theorem",
]
