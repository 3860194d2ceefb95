"""Exhaustive ground-truth solver for small instances.

Walks every multiplicity vector in {0,1,2}^|E| in lexicographic order and
counts the ones ``verify`` accepts. Deliberately simple so it can serve as
the reference the real solver is tested against; the only shortcut is
skipping prefixes that already overshoot an island's degree, which can
never skip a feasible vector.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Assignment, EdgeSet, Puzzle, build_edges, verify

DEFAULT_EDGE_LIMIT = 12


class EdgeLimitExceeded(ValueError):
    """Instance too large to enumerate; callers should skip, not approximate."""


@dataclass(frozen=True)
class OracleResult:
    feasible_count: int
    witnesses: tuple[Assignment, ...]

    @property
    def feasible(self) -> bool:
        return self.feasible_count > 0


def enumerate_assignments(puzzle: Puzzle, edge_limit: int = DEFAULT_EDGE_LIMIT,
                          edges: EdgeSet | None = None,
                          collect_witnesses: bool = True) -> OracleResult:
    if edges is None:
        edges = build_edges(puzzle)
    n_edges = len(edges.edges)
    if n_edges > edge_limit:
        raise EdgeLimitExceeded(f"{n_edges} candidate edges exceed the limit of {edge_limit}")

    degrees = puzzle.degrees
    ends = [(edge.i, edge.j) for edge in edges.edges]
    partial = [0] * puzzle.n
    vec = [0] * n_edges
    count = 0
    witnesses: list[Assignment] = []

    def rec(pos: int) -> None:
        nonlocal count
        if pos == n_edges:
            a = Assignment(tuple(vec))
            if not verify(puzzle, edges, a):
                count += 1
                if collect_witnesses:
                    witnesses.append(a)
            return
        i, j = ends[pos]
        for m in (0, 1, 2):
            if partial[i] + m > degrees[i] or partial[j] + m > degrees[j]:
                break  # larger m only overshoots further
            vec[pos] = m
            partial[i] += m
            partial[j] += m
            rec(pos + 1)
            partial[i] -= m
            partial[j] -= m
        vec[pos] = 0

    rec(0)
    return OracleResult(count, tuple(witnesses))
