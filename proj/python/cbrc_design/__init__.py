"""Optimal experimental designs under the compound Bayes risk criterion."""

from ._core import (
    DomainError,
    InfeasibleError,
    Problem,
    SingularError,
    TooLargeError,
    artificial_a_criterion,
    build_artificial,
    cbrc_terms,
    cbrc_value,
    conic_program_text,
    enumerate_exact,
    information_matrix,
    is_feasible,
    load_config,
    make_problem,
    paper_example,
    parse_config,
    solve_approximate,
    solve_exact,
)

__all__ = [
    "DomainError",
    "InfeasibleError",
    "Problem",
    "SingularError",
    "TooLargeError",
    "artificial_a_criterion",
    "build_artificial",
    "cbrc_terms",
    "cbrc_value",
    "conic_program_text",
    "enumerate_exact",
    "information_matrix",
    "is_feasible",
    "load_config",
    "make_problem",
    "paper_example",
    "parse_config",
    "solve_approximate",
    "solve_exact",
]
