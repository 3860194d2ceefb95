"""Exact solver, verifier, generator, and benchmark tooling for
Hashiwokakero (bridge-building) puzzles."""

from .core import (
    Assignment,
    DimensionMismatch,
    Edge,
    EdgeSet,
    ParseError,
    Puzzle,
    Violation,
    ViolationKind,
    build_edges,
    connected_components,
    read_instance,
    read_solution,
    verify,
    write_instance,
    write_solution,
)
from .generator import GenConfig, GenerationFailed, GenOutcome, generate
from .oracle import EdgeLimitExceeded, OracleResult, enumerate_assignments
from .solver import (
    Cut,
    CutEmission,
    SearchContext,
    SearchState,
    SolveOptions,
    SolveOutcome,
    SolveStats,
    Verdict,
    branch,
    separate_connectivity,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "Cut",
    "CutEmission",
    "DimensionMismatch",
    "Edge",
    "EdgeLimitExceeded",
    "EdgeSet",
    "GenConfig",
    "GenOutcome",
    "GenerationFailed",
    "OracleResult",
    "ParseError",
    "Puzzle",
    "SearchContext",
    "SearchState",
    "SolveOptions",
    "SolveOutcome",
    "SolveStats",
    "Verdict",
    "Violation",
    "ViolationKind",
    "branch",
    "build_edges",
    "connected_components",
    "enumerate_assignments",
    "generate",
    "read_instance",
    "read_solution",
    "separate_connectivity",
    "solve",
    "verify",
    "write_instance",
    "write_solution",
]
