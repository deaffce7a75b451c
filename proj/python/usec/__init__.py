"""Min-max load optimizer, task assignment and elastic simulator for uncoded storage."""

from ._usec import (
    Error,
    InfeasibleError,
    ParseError,
    SizeCapError,
    StoragePlacement,
    ValidationError,
    assign,
    cyclic_placement,
    fill_submatrix,
    homogeneous_cyclic,
    man_placement,
    parse_placement,
    repetition_placement,
    run_trials,
    simulate,
    solve,
    verify_straggler_tolerance,
)

__all__ = [
    "Error",
    "InfeasibleError",
    "ParseError",
    "SizeCapError",
    "StoragePlacement",
    "ValidationError",
    "assign",
    "cyclic_placement",
    "fill_submatrix",
    "homogeneous_cyclic",
    "man_placement",
    "parse_placement",
    "repetition_placement",
    "run_trials",
    "simulate",
    "solve",
    "verify_straggler_tolerance",
]
