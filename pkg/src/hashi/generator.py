"""Seeded generator of guaranteed-feasible instances.

Builds a hidden solution first and derives the puzzle from it: grow a
spanning tree of islands on the grid, add extra aligned edges to create
cycles, upgrade each edge to a double bridge with some probability, then
record every island's bridge count and erase the bridges. The recorded
counts are the puzzle; the erased bridge layout is kept as the witness.

Every draw comes from one SplitMix64 stream in a fixed order, so a config
maps to exactly one instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import Assignment, Puzzle, build_edges, verify
from .rng import SplitMix64

_FREE, _ISLE, _EDGE = 0, 1, 2
_DIRS = ((-1, 0), (1, 0), (0, -1), (0, 1))  # up, down, left, right


class GenerationFailed(RuntimeError):
    """The retry budget ran out (typically a grid too dense for n islands)."""


@dataclass(frozen=True)
class GenConfig:
    n: int
    rows: int
    cols: int
    alpha: float = 0.0  # fraction of n extra cycle-edge attempts
    beta: float = 0.0   # per-edge probability of a double bridge
    seed: int = 0
    max_retries: int = 1000

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two islands")
        if self.n > self.rows * self.cols:
            raise ValueError(f"{self.n} islands cannot fit a {self.rows}x{self.cols} grid")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must be in [0, 1]")
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must be in [0, 1]")
        if self.max_retries < 1:
            raise ValueError("max_retries must be positive")


@dataclass(frozen=True)
class GenOutcome:
    puzzle: Puzzle
    witness: Assignment
    achieved_cycles: int
    emit_retries: int = 0


class _Layout:
    """Mutable grid under construction. Islands keep creation indices."""

    __slots__ = ("rows", "cols", "cell", "islands", "edges", "edge_keys")

    def __init__(self, rows: int, cols: int):
        self.rows = rows
        self.cols = cols
        self.cell = [[_FREE] * cols for _ in range(rows)]
        self.islands: list[tuple[int, int]] = []
        self.edges: list[tuple[int, int]] = []  # (a, b) with a < b
        self.edge_keys: set[tuple[int, int]] = set()

    def add_island(self, r: int, c: int) -> int:
        self.cell[r][c] = _ISLE
        self.islands.append((r, c))
        return len(self.islands) - 1

    def add_edge(self, a: int, b: int) -> None:
        if a > b:
            a, b = b, a
        (r1, c1), (r2, c2) = self.islands[a], self.islands[b]
        if r1 == r2:
            for c in range(min(c1, c2) + 1, max(c1, c2)):
                self.cell[r1][c] = _EDGE
        else:
            for r in range(min(r1, r2) + 1, max(r1, r2)):
                self.cell[r][c1] = _EDGE
        self.edges.append((a, b))
        self.edge_keys.add((a, b))

    def ray_cells(self, src: int, dr: int, dc: int) -> list[tuple[int, int]]:
        """Free cells along a ray until an island, an edge, or the border.

        An edge cell met this way always belongs to an orthogonal bridge
        (a parallel one would be hidden behind its endpoint island), so it
        both blocks placement and ends the ray.
        """
        r, c = self.islands[src]
        out = []
        r += dr
        c += dc
        while 0 <= r < self.rows and 0 <= c < self.cols and self.cell[r][c] == _FREE:
            out.append((r, c))
            r += dr
            c += dc
        return out

    def addable_pairs(self) -> list[tuple[int, int]]:
        """Island pairs connectable by a new edge right now: aligned, all
        cells between free, and not already joined."""
        by_row: dict[int, list[tuple[int, int]]] = {}
        by_col: dict[int, list[tuple[int, int]]] = {}
        for idx, (r, c) in enumerate(self.islands):
            by_row.setdefault(r, []).append((c, idx))
            by_col.setdefault(c, []).append((r, idx))
        pairs: list[tuple[int, int]] = []

        def scan(groups: dict[int, list[tuple[int, int]]], horizontal: bool) -> None:
            for fixed, members in groups.items():
                members.sort()
                for (p1, a), (p2, b) in zip(members, members[1:]):
                    row = self.cell[fixed] if horizontal else None
                    if horizontal:
                        clear = all(row[x] == _FREE for x in range(p1 + 1, p2))
                    else:
                        clear = all(self.cell[x][fixed] == _FREE for x in range(p1 + 1, p2))
                    if not clear:
                        continue
                    key = (a, b) if a < b else (b, a)
                    if key not in self.edge_keys:
                        pairs.append(key)

        scan(by_row, True)
        scan(by_col, False)
        pairs.sort()
        return pairs


def step1_place_islands(cfg: GenConfig, rng: SplitMix64) -> _Layout:
    """Grow a random spanning tree of islands on the grid.

    The first island lands on a uniform cell; each later island extends a
    uniformly chosen existing island along a uniformly chosen viable
    direction to a uniformly chosen free cell on that ray. Islands with no
    viable direction are redrawn, up to the retry budget per placement.
    """
    lay = _Layout(cfg.rows, cfg.cols)
    lay.add_island(rng.randrange(cfg.rows), rng.randrange(cfg.cols))
    for _ in range(cfg.n - 1):
        checked_stuck = False
        for _attempt in range(cfg.max_retries):
            src = rng.randrange(len(lay.islands))
            rays = [cells for dr, dc in _DIRS if (cells := lay.ray_cells(src, dr, dc))]
            if not rays:
                # Give up right away if provably no island can extend; the
                # layout does not change between failed draws.
                if not checked_stuck:
                    checked_stuck = True
                    if not any(
                            lay.ray_cells(k, dr, dc)
                            for k in range(len(lay.islands))
                            for dr, dc in _DIRS):
                        raise GenerationFailed(
                            f"grid saturated with {len(lay.islands)} of {cfg.n} islands placed")
                continue
            cells = rays[rng.randrange(len(rays))]
            r, c = cells[rng.randrange(len(cells))]
            new = lay.add_island(r, c)
            lay.add_edge(src, new)
            break
        else:
            raise GenerationFailed(
                f"no island placement found in {cfg.max_retries} attempts "
                f"({len(lay.islands)} of {cfg.n} placed)")
    return lay


def step2_add_cycles(lay: _Layout, cfg: GenConfig, rng: SplitMix64) -> int:
    """Attempt floor(alpha*n) extra edges between currently connectable
    pairs. An attempt with no connectable pair is spent, not retried;
    returns the number of edges actually added."""
    achieved = 0
    attempts = math.floor(cfg.alpha * cfg.n + 1e-9)
    for _ in range(attempts):
        pairs = lay.addable_pairs()
        if not pairs:
            continue
        a, b = pairs[rng.randrange(len(pairs))]
        lay.add_edge(a, b)
        achieved += 1
    return achieved


def step3_double_edges(lay: _Layout, cfg: GenConfig, rng: SplitMix64) -> list[int]:
    """One draw per edge, in sorted (a, b) order: double with probability
    beta. Returns multiplicities aligned with ``lay.edges``."""
    mult = [1] * len(lay.edges)
    for pos in sorted(range(len(lay.edges)), key=lambda p: lay.edges[p]):
        if rng.chance(cfg.beta):
            mult[pos] = 2
    return mult


def step4_emit(lay: _Layout, mult: list[int]) -> tuple[Puzzle, Assignment] | None:
    """Count bridges per island, erase them, and re-derive the witness over
    the emitted puzzle's own edge set.

    Returns None when some witness edge is missing from the rebuilt edge
    set or the witness fails verification; erasing edges can only widen
    visibility, so in practice this never happens (tests assert it).
    """
    deg = [0] * len(lay.islands)
    for (a, b), m in zip(lay.edges, mult):
        deg[a] += m
        deg[b] += m
    puzzle = Puzzle(lay.rows, lay.cols,
                    tuple((r, c, deg[k]) for k, (r, c) in enumerate(lay.islands)))
    edges = build_edges(puzzle)
    coord_index = puzzle.coord_to_index
    vec = [0] * len(edges.edges)
    for (a, b), m in zip(lay.edges, mult):
        i = coord_index[lay.islands[a]]
        j = coord_index[lay.islands[b]]
        e = edges.index_of.get((i, j) if i < j else (j, i))
        if e is None:
            return None
        vec[e] = m
    witness = Assignment(tuple(vec))
    if verify(puzzle, edges, witness):
        return None
    return puzzle, witness


def generate(cfg: GenConfig) -> GenOutcome:
    """Produce one feasible instance plus its hidden solution.

    Pure function of the config. Raises GenerationFailed if island
    placement runs out of retries; the caller may reseed.
    """
    seeder = SplitMix64(cfg.seed)
    emit_retries = 0
    for _ in range(cfg.max_retries):
        rng = SplitMix64(seeder.next_u64())
        lay = step1_place_islands(cfg, rng)
        achieved = step2_add_cycles(lay, cfg, rng)
        mult = step3_double_edges(lay, cfg, rng)
        emitted = step4_emit(lay, mult)
        if emitted is None:
            emit_retries += 1
            continue
        puzzle, witness = emitted
        return GenOutcome(puzzle, witness, achieved, emit_retries)
    raise GenerationFailed(f"emit check failed for {cfg.max_retries} derived seeds")
