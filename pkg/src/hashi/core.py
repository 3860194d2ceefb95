"""Grid model, candidate edges, solution checking, and text formats for
Hashiwokakero (bridge-building) puzzles.

A puzzle is a ``rows x cols`` grid where some cells hold islands labeled
1..8. A solution assigns a multiplicity in {0, 1, 2} to every candidate
edge, where a candidate edge joins two islands that face each other along
a row or column with no island in between. ``verify`` checks a full
assignment against all six play rules and reports every violation it
finds rather than stopping at the first.

All types here are immutable after construction; the functions are pure.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

HORIZONTAL = "H"
VERTICAL = "V"

_EMPTY = "."
_H_GLYPHS = {"-": 1, "=": 2}
_V_GLYPHS = {"|": 1, '"': 2}
_GLYPH_FOR = {
    (HORIZONTAL, 1): "-",
    (HORIZONTAL, 2): "=",
    (VERTICAL, 1): "|",
    (VERTICAL, 2): '"',
}
_SOLUTION_CHARS = set(".12345678-=|\"")

# Bounded search used when a solution file leaves bridge counts between
# orthogonally adjacent islands implicit (no cell to draw a glyph on).
_INFER_CLUSTER_LIMIT = 16
_INFER_COMBO_LIMIT = 4096


class ParseError(ValueError):
    """Malformed instance or solution text. Positions are 1-based."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", col {col}" if col is not None else "") + ")"
        super().__init__(message + where)


class DimensionMismatch(ParseError):
    """Solution grid size does not match the instance it is checked against."""


class ViolationKind(enum.Enum):
    """The six play rules; the enum value is the rule number.

    ENDPOINT_INVALID and NOT_AXIS_ALIGNED cannot arise from an Assignment
    over a valid EdgeSet (edges join distinct, aligned islands by
    construction); they are kept for diagnostics on hand-authored solution
    files.
    """

    ENDPOINT_INVALID = 1
    CROSSING = 2
    NOT_AXIS_ALIGNED = 3
    BAD_MULTIPLICITY = 4
    DEGREE_MISMATCH = 5
    DISCONNECTED = 6

    @property
    def rule(self) -> int:
        return self.value


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    where: tuple[int, ...]
    message: str = field(default="", compare=False)

    def __str__(self) -> str:
        return f"rule {self.kind.rule} ({self.kind.name}): {self.message}"


@dataclass(frozen=True)
class Puzzle:
    """Grid dimensions plus islands as (row, col, degree) triples.

    Islands are stored sorted by (row, col), so island indices are
    canonical: permuting the input list yields an equal Puzzle.
    """

    rows: int
    cols: int
    islands: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        isl = tuple(sorted((int(r), int(c), int(d)) for r, c, d in self.islands))
        object.__setattr__(self, "islands", isl)
        seen: set[tuple[int, int]] = set()
        for r, c, d in isl:
            if not (0 <= r < self.rows and 0 <= c < self.cols):
                raise ValueError(f"island ({r},{c}) outside {self.rows}x{self.cols} grid")
            if (r, c) in seen:
                raise ValueError(f"duplicate island at ({r},{c})")
            seen.add((r, c))
            if not 1 <= d <= 8:
                raise ValueError(f"island ({r},{c}) has degree {d}, must be 1..8")

    @property
    def n(self) -> int:
        return len(self.islands)

    @cached_property
    def coord_to_index(self) -> dict[tuple[int, int], int]:
        return {(r, c): k for k, (r, c, _) in enumerate(self.islands)}

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        return tuple(d for _, _, d in self.islands)


@dataclass(frozen=True)
class Edge:
    """Candidate bridge segment between islands ``i < j``.

    ``cells`` holds the strictly interior grid cells; it is empty when the
    islands sit in adjacent cells.
    """

    i: int
    j: int
    orientation: str
    cells: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class EdgeSet:
    """All candidate edges of a puzzle plus the orthogonal crossing pairs."""

    edges: tuple[Edge, ...]
    crossings: tuple[tuple[int, int], ...]
    island_count: int

    def __len__(self) -> int:
        return len(self.edges)

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices incident to each island."""
        inc: list[list[int]] = [[] for _ in range(self.island_count)]
        for e, edge in enumerate(self.edges):
            inc[edge.i].append(e)
            inc[edge.j].append(e)
        return tuple(tuple(v) for v in inc)

    @cached_property
    def crossing_partners(self) -> tuple[tuple[int, ...], ...]:
        """For each edge, the edges it crosses."""
        part: list[list[int]] = [[] for _ in range(len(self.edges))]
        for e, f in self.crossings:
            part[e].append(f)
            part[f].append(e)
        return tuple(tuple(v) for v in part)

    @cached_property
    def index_of(self) -> dict[tuple[int, int], int]:
        return {(edge.i, edge.j): e for e, edge in enumerate(self.edges)}


@dataclass(frozen=True)
class Assignment:
    """Bridge multiplicity per candidate edge, indexed like the EdgeSet.

    Values outside {0, 1, 2} are representable on purpose: ``verify``
    reports them as rule-4 violations instead of refusing to construct.
    """

    mult: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "mult", tuple(int(m) for m in self.mult))

    def __len__(self) -> int:
        return len(self.mult)

    def __getitem__(self, e: int) -> int:
        return self.mult[e]


def build_edges(puzzle: Puzzle) -> EdgeSet:
    """Construct every candidate edge and all orthogonal crossing pairs.

    Two islands form an edge iff they share a row or column and no island
    lies strictly between them. Two edges cross iff they have orthogonal
    orientations and share an interior cell; edges meeting at a shared
    island are never crossings.
    """
    occupied = puzzle.coord_to_index
    edges: list[Edge] = []
    for k, (r, c, _) in enumerate(puzzle.islands):
        for cc in range(c + 1, puzzle.cols):
            if (r, cc) in occupied:
                cells = tuple((r, x) for x in range(c + 1, cc))
                edges.append(Edge(k, occupied[(r, cc)], HORIZONTAL, cells))
                break
        for rr in range(r + 1, puzzle.rows):
            if (rr, c) in occupied:
                cells = tuple((x, c) for x in range(r + 1, rr))
                edges.append(Edge(k, occupied[(rr, c)], VERTICAL, cells))
                break
    edges.sort(key=lambda e: (e.i, e.j))

    # Interior cells are unique per orientation: two parallel edges sharing
    # a cell would see each other's endpoint islands first.
    h_cells: dict[tuple[int, int], int] = {}
    for e, edge in enumerate(edges):
        if edge.orientation == HORIZONTAL:
            for cell in edge.cells:
                h_cells[cell] = e
    crossings: set[tuple[int, int]] = set()
    for f, edge in enumerate(edges):
        if edge.orientation == VERTICAL:
            for cell in edge.cells:
                e = h_cells.get(cell)
                if e is not None:
                    crossings.add((e, f) if e < f else (f, e))
    return EdgeSet(tuple(edges), tuple(sorted(crossings)), puzzle.n)


def connected_components(edges: EdgeSet, mult) -> list[list[int]]:
    """Components of the graph induced by positive edges, over all islands."""
    n = edges.island_count
    adj: list[list[int]] = [[] for _ in range(n)]
    for e, edge in enumerate(edges.edges):
        if mult[e] >= 1:
            adj[edge.i].append(edge.j)
            adj[edge.j].append(edge.i)
    seen = [False] * n
    comps: list[list[int]] = []
    for start in range(n):
        if seen[start]:
            continue
        seen[start] = True
        comp = [start]
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    comp.append(v)
                    stack.append(v)
        comps.append(sorted(comp))
    return comps


def verify(puzzle: Puzzle, edges: EdgeSet, a: Assignment) -> list[Violation]:
    """Check an assignment against all six rules; empty list means feasible.

    Violations are reported exhaustively, in rule order: multiplicity
    domain (4), crossings (2), island degrees (5), connectivity (6).
    """
    if len(a) != len(edges.edges):
        raise ValueError(f"assignment has {len(a)} entries for {len(edges.edges)} edges")
    mult = a.mult
    out: list[Violation] = []

    for e, m in enumerate(mult):
        if m not in (0, 1, 2):
            edge = edges.edges[e]
            out.append(Violation(
                ViolationKind.BAD_MULTIPLICITY, (e,),
                f"edge {edge.i}-{edge.j} carries {m} bridges, allowed 0..2"))

    for e, f in edges.crossings:
        if mult[e] >= 1 and mult[f] >= 1:
            ee, ef = edges.edges[e], edges.edges[f]
            out.append(Violation(
                ViolationKind.CROSSING, (e, f),
                f"bridges {ee.i}-{ee.j} and {ef.i}-{ef.j} cross"))

    for k, (r, c, d) in enumerate(puzzle.islands):
        got = sum(mult[e] for e in edges.incident[k])
        if got != d:
            out.append(Violation(
                ViolationKind.DEGREE_MISMATCH, (k,),
                f"island at ({r},{c}) needs {d} bridges, has {got}"))

    if puzzle.n > 1:
        comps = connected_components(edges, mult)
        if len(comps) > 1:
            stranded = sorted(k for comp in comps[1:] for k in comp)
            out.append(Violation(
                ViolationKind.DISCONNECTED, tuple(stranded),
                f"{len(stranded)} island(s) unreachable from island 0"))
    return out


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------
# Line 1: "<rows> <cols>". Then exactly rows lines of exactly cols characters
# from {., 1..8}. Trailing newline required.


def read_instance(text: str) -> Puzzle:
    if not text.endswith("\n"):
        raise ParseError("missing trailing newline")
    lines = text.split("\n")[:-1]
    if not lines:
        raise ParseError("empty file", line=1)
    header = lines[0].split(" ")
    if len(header) != 2 or not all(t.isdigit() for t in header):
        raise ParseError("header must be '<rows> <cols>'", line=1, col=1)
    rows, cols = int(header[0]), int(header[1])
    if rows < 1 or cols < 1:
        raise ParseError("grid dimensions must be positive", line=1, col=1)
    if len(lines) - 1 != rows:
        raise ParseError(f"expected {rows} grid lines, found {len(lines) - 1}", line=len(lines))
    islands = []
    for r in range(rows):
        row = lines[1 + r]
        if len(row) != cols:
            raise ParseError(f"row has {len(row)} characters, expected {cols}",
                             line=2 + r, col=min(len(row), cols) + 1)
        for c, ch in enumerate(row):
            if ch == _EMPTY:
                continue
            if ch in "12345678":
                islands.append((r, c, int(ch)))
            else:
                raise ParseError(f"invalid character {ch!r}, expected '.' or '1'..'8'",
                                 line=2 + r, col=c + 1)
    if len(islands) < 2:
        raise ParseError("a puzzle needs at least two islands")
    return Puzzle(rows, cols, tuple(islands))


def write_instance(puzzle: Puzzle) -> str:
    grid = [[_EMPTY] * puzzle.cols for _ in range(puzzle.rows)]
    for r, c, d in puzzle.islands:
        grid[r][c] = str(d)
    body = "\n".join("".join(row) for row in grid)
    return f"{puzzle.rows} {puzzle.cols}\n{body}\n"


# ---------------------------------------------------------------------------
# Solution files
# ---------------------------------------------------------------------------
# Same grid with islands as digits; interior cells of positive edges carry
# '-' (1 horizontal), '=' (2 horizontal), '|' (1 vertical), '"' (2 vertical);
# everything else '.'. Bridges between islands in adjacent cells have no
# interior cell to draw on; read_solution recovers them from the leftover
# island degrees (unique in all but deliberately ambiguous cases).


def write_solution(puzzle: Puzzle, a: Assignment, edges: EdgeSet | None = None) -> str:
    """Render an assignment. Output is canonical for crossing-free
    assignments; crossing bridges overwrite each other's shared cell."""
    if edges is None:
        edges = build_edges(puzzle)
    if len(a) != len(edges.edges):
        raise ValueError(f"assignment has {len(a)} entries for {len(edges.edges)} edges")
    grid = [[_EMPTY] * puzzle.cols for _ in range(puzzle.rows)]
    for r, c, d in puzzle.islands:
        grid[r][c] = str(d)
    for e, edge in enumerate(edges.edges):
        m = a.mult[e]
        if m == 0:
            continue
        if m not in (1, 2):
            raise ValueError(f"multiplicity {m} on edge {edge.i}-{edge.j} is not drawable")
        glyph = _GLYPH_FOR[(edge.orientation, m)]
        for r, c in edge.cells:
            grid[r][c] = glyph
    body = "\n".join("".join(row) for row in grid)
    return f"{puzzle.rows} {puzzle.cols}\n{body}\n"


def read_solution(puzzle: Puzzle, text: str,
                  edges: EdgeSet | None = None) -> tuple[Assignment, list[Violation]]:
    """Decode a solution grid against its instance.

    Returns the assignment plus any structural violations found while
    decoding (bridge runs that do not join two islands cleanly). Character
    and shape problems raise ParseError; a header that disagrees with the
    instance raises DimensionMismatch.
    """
    if edges is None:
        edges = build_edges(puzzle)
    if not text.endswith("\n"):
        raise ParseError("missing trailing newline")
    lines = text.split("\n")[:-1]
    if not lines:
        raise ParseError("empty file", line=1)
    header = lines[0].split(" ")
    if len(header) != 2 or not all(t.isdigit() for t in header):
        raise ParseError("header must be '<rows> <cols>'", line=1, col=1)
    rows, cols = int(header[0]), int(header[1])
    if (rows, cols) != (puzzle.rows, puzzle.cols):
        raise DimensionMismatch(
            f"solution grid is {rows}x{cols}, instance is {puzzle.rows}x{puzzle.cols}",
            line=1, col=1)
    if len(lines) - 1 != rows:
        raise ParseError(f"expected {rows} grid lines, found {len(lines) - 1}", line=len(lines))
    grid: list[str] = []
    for r in range(rows):
        row = lines[1 + r]
        if len(row) != cols:
            raise ParseError(f"row has {len(row)} characters, expected {cols}",
                             line=2 + r, col=min(len(row), cols) + 1)
        for c, ch in enumerate(row):
            if ch not in _SOLUTION_CHARS:
                raise ParseError(f"invalid character {ch!r}", line=2 + r, col=c + 1)
        grid.append(row)

    island_at = puzzle.coord_to_index
    for r in range(rows):
        for c, ch in enumerate(grid[r]):
            if ch.isdigit():
                k = island_at.get((r, c))
                if k is None or puzzle.islands[k][2] != int(ch):
                    raise ParseError("island does not match the instance",
                                     line=2 + r, col=c + 1)
    for r, c, d in puzzle.islands:
        if grid[r][c] != str(d):
            raise ParseError(f"island at ({r},{c}) missing from solution grid",
                             line=2 + r, col=c + 1)

    violations: list[Violation] = []
    mult = [0] * len(edges.edges)

    def decode_run(r: int, c: int, cells: list[tuple[int, int]], glyphs: set[str],
                   before: tuple[int, int], after: tuple[int, int]) -> None:
        i = island_at.get(before)
        j = island_at.get(after)
        if i is None or j is None or len(glyphs) != 1:
            violations.append(Violation(
                ViolationKind.ENDPOINT_INVALID, (r, c),
                f"bridge run at ({r},{c}) does not join two islands cleanly"))
            return
        glyph = next(iter(glyphs))
        a, b = (i, j) if i < j else (j, i)
        e = edges.index_of.get((a, b))
        if e is None or tuple(cells) != edges.edges[e].cells:
            violations.append(Violation(
                ViolationKind.ENDPOINT_INVALID, (r, c),
                f"bridge run at ({r},{c}) does not follow a candidate edge"))
            return
        mult[e] = _H_GLYPHS.get(glyph) or _V_GLYPHS[glyph]

    for r in range(rows):
        c = 0
        while c < cols:
            if grid[r][c] in _H_GLYPHS:
                start = c
                glyphs = set()
                while c < cols and grid[r][c] in _H_GLYPHS:
                    glyphs.add(grid[r][c])
                    c += 1
                decode_run(r, start, [(r, x) for x in range(start, c)], glyphs,
                           (r, start - 1), (r, c))
            else:
                c += 1
    for c in range(cols):
        r = 0
        while r < rows:
            if grid[r][c] in _V_GLYPHS:
                start = r
                glyphs = set()
                while r < rows and grid[r][c] in _V_GLYPHS:
                    glyphs.add(grid[r][c])
                    r += 1
                decode_run(start, c, [(x, c) for x in range(start, r)], glyphs,
                           (start - 1, c), (r, c))
            else:
                r += 1

    if not violations:
        _infer_invisible_bridges(puzzle, edges, mult)
    return Assignment(tuple(mult)), violations


def _infer_invisible_bridges(puzzle: Puzzle, edges: EdgeSet, mult: list[int]) -> None:
    """Fill in multiplicities of edges with no interior cells.

    Each island's leftover degree pins down its adjacent-cell bridges;
    clusters of such edges are solved exactly and, if several readings
    remain, the first one that verifies cleanly is taken.
    """
    hidden = [e for e, edge in enumerate(edges.edges) if not edge.cells]
    if not hidden:
        return
    residual = list(puzzle.degrees)
    for e, edge in enumerate(edges.edges):
        if edge.cells and mult[e]:
            residual[edge.i] -= mult[e]
            residual[edge.j] -= mult[e]

    # Group hidden edges into connected clusters; degrees decouple across
    # clusters, so each can be solved independently.
    parent = list(range(len(hidden)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_island: dict[int, list[int]] = {}
    for idx, e in enumerate(hidden):
        edge = edges.edges[e]
        for k in (edge.i, edge.j):
            by_island.setdefault(k, []).append(idx)
    for members in by_island.values():
        for other in members[1:]:
            ra, rb = find(members[0]), find(other)
            if ra != rb:
                parent[rb] = ra
    clusters: dict[int, list[int]] = {}
    for idx, e in enumerate(hidden):
        clusters.setdefault(find(idx), []).append(e)

    options_per_cluster: list[list[tuple[int, ...]]] = []
    cluster_edges: list[list[int]] = []
    for members in clusters.values():
        members.sort()
        cluster_edges.append(members)
        options_per_cluster.append(_consistent_fillings(edges, members, residual))

    if any(not opts for opts in options_per_cluster):
        return  # leave zeros; verify will surface the degree mismatches

    combos = 1
    for opts in options_per_cluster:
        combos *= len(opts)
    if combos == 1:
        for members, opts in zip(cluster_edges, options_per_cluster):
            for e, m in zip(members, opts[0]):
                mult[e] = m
        return

    # Ambiguous: prefer a reading that verifies cleanly, else the first.
    best = None
    tried = 0
    for combo in product(*options_per_cluster):
        if best is None:
            best = combo
        for members, values in zip(cluster_edges, combo):
            for e, m in zip(members, values):
                mult[e] = m
        if not verify(puzzle, edges, Assignment(tuple(mult))):
            return
        tried += 1
        if tried >= _INFER_COMBO_LIMIT:
            break
    for members, values in zip(cluster_edges, best):
        for e, m in zip(members, values):
            mult[e] = m


def _consistent_fillings(edges: EdgeSet, members: list[int],
                         residual: list[int]) -> list[tuple[int, ...]]:
    """All multiplicity vectors over ``members`` matching leftover degrees."""
    if len(members) > _INFER_CLUSTER_LIMIT:
        raise ParseError("too many bridges between adjacent islands to reconstruct")
    islands = sorted({k for e in members for k in (edges.edges[e].i, edges.edges[e].j)})
    need = {k: residual[k] for k in islands}
    remaining_cap = {k: 0 for k in islands}
    for e in members:
        edge = edges.edges[e]
        remaining_cap[edge.i] += 2
        remaining_cap[edge.j] += 2

    out: list[tuple[int, ...]] = []
    values = [0] * len(members)

    def rec(pos: int, acc: dict[int, int]) -> None:
        if pos == len(members):
            if all(acc[k] == need[k] for k in islands):
                out.append(tuple(values))
            return
        edge = edges.edges[members[pos]]
        remaining_cap[edge.i] -= 2
        remaining_cap[edge.j] -= 2
        for m in (0, 1, 2):
            ai = acc[edge.i] + m
            aj = acc[edge.j] + m
            if ai > need[edge.i] or aj > need[edge.j]:
                break
            if ai + remaining_cap[edge.i] < need[edge.i]:
                continue
            if aj + remaining_cap[edge.j] < need[edge.j]:
                continue
            values[pos] = m
            acc[edge.i] = ai
            acc[edge.j] = aj
            rec(pos + 1, acc)
            acc[edge.i] -= m
            acc[edge.j] -= m
        values[pos] = 0
        remaining_cap[edge.i] += 2
        remaining_cap[edge.j] += 2

    if any(need[k] < 0 for k in islands):
        return []
    rec(0, {k: 0 for k in islands})
    return out
