"""Exact feasibility search over edge multiplicities.

Depth-first branch-and-bound with constraint propagation. Connectivity is
handled lazily: the search runs without it until a fully assigned candidate
turns out disconnected, at which point boundary cuts for the offending
components are added to a global pool and the search restarts against the
enlarged pool. Cuts persist across restarts and take part in propagation,
so each restart redirects the search near the root rather than deep inside
the subtree that produced the rejected candidate.

Indicator variables are never materialized: an edge "carries a bridge"
exactly when its multiplicity is nonzero, so the linking between counts and
indicators holds by construction.
"""

from __future__ import annotations

import enum
import sys
import time
from dataclasses import dataclass, field

from .core import Assignment, EdgeSet, Puzzle, build_edges, connected_components

# Domains are bitmasks over the values {0, 1, 2}: bit v set iff v possible.
_FULL = 0b111
_MINV = (3, 0, 1, 0, 2, 0, 1, 0)  # index 0 unused (empty domain)
_MAXV = (-1, 0, 1, 1, 2, 2, 2, 2)
_POP = (0, 1, 1, 2, 1, 2, 2, 3)
_LO_MASK = (0b111, 0b110, 0b100)  # values >= lo
_HI_MASK = (0b001, 0b011, 0b111)  # values <= hi


class CutEmission(enum.Enum):
    ALL_COMPONENTS = "all"
    ALL_BUT_LARGEST = "all-but-largest"


class Verdict(enum.Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    LIMIT_REACHED = "limit"


@dataclass(frozen=True)
class SolveOptions:
    use_weak_connectivity: bool = True
    node_limit: int | None = None
    time_limit: float | None = None
    cut_emission: CutEmission = CutEmission.ALL_COMPONENTS

    def __post_init__(self):
        if self.node_limit is not None and self.node_limit < 1:
            raise ValueError("node_limit must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time_limit must be positive")


@dataclass(frozen=True)
class SolveOutcome:
    verdict: Verdict
    assignment: Assignment | None = None


@dataclass(frozen=True)
class Cut:
    """Island subset whose boundary must carry at least one bridge."""

    members: frozenset[int]
    boundary: tuple[int, ...]


@dataclass
class SolveStats:
    nodes_explored: int = 0
    cuts_added: int = 0
    restarts_or_backjumps: int = 0  # leaf candidates rejected by separation
    wall_time: float = 0.0
    cuts: tuple[Cut, ...] = field(default=(), repr=False)


def separate_connectivity(edges: EdgeSet, a: Assignment,
                          policy: CutEmission = CutEmission.ALL_COMPONENTS) -> list[Cut]:
    """Boundary cuts for the components of a disconnected candidate.

    Returns one cut per component (or one per component except the largest),
    with the boundary being every candidate edge leaving the component. Each
    returned cut is violated by ``a``. An empty list means connected.
    """
    comps = connected_components(edges, a.mult)
    if len(comps) <= 1:
        return []
    label = [0] * edges.island_count
    for ci, comp in enumerate(comps):
        for k in comp:
            label[k] = ci
    boundaries: list[list[int]] = [[] for _ in comps]
    for e, edge in enumerate(edges.edges):
        li, lj = label[edge.i], label[edge.j]
        if li != lj:
            boundaries[li].append(e)
            boundaries[lj].append(e)
    keep = range(len(comps))
    if policy is CutEmission.ALL_BUT_LARGEST:
        largest = max(range(len(comps)), key=lambda ci: (len(comps[ci]), -comps[ci][0]))
        keep = [ci for ci in keep if ci != largest]
    return [Cut(frozenset(comps[ci]), tuple(boundaries[ci])) for ci in keep]


class SearchContext:
    """Shared read-only search data plus the growing global cut pool."""

    __slots__ = ("edges", "n", "n_edges", "degrees", "ends", "incident",
                 "cross_partners", "use_weak", "cuts", "cut_members",
                 "cuts_by_edge", "fail_weight", "region_cache")

    def __init__(self, puzzle: Puzzle, edges: EdgeSet, opts: SolveOptions):
        self.edges = edges
        self.n = puzzle.n
        self.n_edges = len(edges.edges)
        self.degrees = puzzle.degrees
        self.ends = tuple((edge.i, edge.j) for edge in edges.edges)
        self.incident = edges.incident
        self.cross_partners = edges.crossing_partners
        self.use_weak = opts.use_weak_connectivity
        self.cuts: list[Cut] = []
        self.cut_members: set[frozenset[int]] = set()
        self.cuts_by_edge: list[list[int]] = [[] for _ in range(self.n_edges)]
        # Conflict counts per island degree equation; steers branching
        # toward the part of the grid that keeps failing.
        self.fail_weight = [0] * puzzle.n
        # Memo of solved regions: key -> completion values or None.
        self.region_cache: dict = {}

    def add_cuts(self, cuts: list[Cut]) -> int:
        """Append cuts not already in the pool (set semantics on members)."""
        added = 0
        for cut in cuts:
            if cut.members in self.cut_members:
                continue
            ci = len(self.cuts)
            self.cuts.append(cut)
            self.cut_members.add(cut.members)
            for e in cut.boundary:
                self.cuts_by_edge[e].append(ci)
            added += 1
        return added


class SearchState:
    """Per-node domains and derived bookkeeping.

    Tracks, per island, the sum of domain minima/maxima of incident edges
    and the number of undecided incident edges; per cut, whether it is
    already satisfied and how many boundary edges can still be positive.
    """

    __slots__ = ("ctx", "dom", "sum_min", "sum_max", "und", "n_fixed_zero",
                 "n_fixed_pos", "n_undecided", "cut_sat", "cut_live",
                 "weak_live", "reason", "cut_reason", "zero_reason", "conflict",
                 "_dirty", "_dirty_flag", "_unit_cuts")

    def __init__(self, ctx: SearchContext):
        self.ctx = ctx
        ne = ctx.n_edges
        self.dom = bytearray([_FULL] * ne)
        self.sum_min = [0] * ctx.n
        self.sum_max = [2 * len(inc) for inc in ctx.incident]
        self.und = [len(inc) for inc in ctx.incident]
        self.n_fixed_zero = 0
        self.n_fixed_pos = 0
        self.n_undecided = ne
        self.cut_sat = bytearray()
        self.cut_live = []
        self.weak_live = ctx.use_weak
        # Blame masks for backjumping: per edge, the set of decision levels
        # (as an int bitmask) its current domain was derived from. Level 0
        # (mask 0) is root inference. ``conflict`` carries the blame of the
        # last dead end out of propagate.
        self.reason = [0] * ne
        self.cut_reason = []
        self.zero_reason = 0
        self.conflict = 0
        self._dirty = list(range(ctx.n))
        self._dirty_flag = bytearray([1] * ctx.n)
        self._unit_cuts: list[int] = []

    def copy(self) -> "SearchState":
        clone = SearchState.__new__(SearchState)
        clone.ctx = self.ctx
        clone.dom = bytearray(self.dom)
        clone.sum_min = list(self.sum_min)
        clone.sum_max = list(self.sum_max)
        clone.und = list(self.und)
        clone.n_fixed_zero = self.n_fixed_zero
        clone.n_fixed_pos = self.n_fixed_pos
        clone.n_undecided = self.n_undecided
        clone.cut_sat = bytearray(self.cut_sat)
        clone.cut_live = list(self.cut_live)
        clone.weak_live = self.weak_live
        clone.reason = list(self.reason)
        clone.cut_reason = list(self.cut_reason)
        clone.zero_reason = self.zero_reason
        clone.conflict = 0
        clone._dirty = []
        clone._dirty_flag = bytearray(self.ctx.n)
        clone._unit_cuts = []
        return clone

    # -- domain updates ------------------------------------------------

    def _mark(self, k: int) -> None:
        if not self._dirty_flag[k]:
            self._dirty_flag[k] = 1
            self._dirty.append(k)

    def set_mask(self, e: int, new: int, cause: int = 0) -> bool:
        """Narrow edge ``e`` to ``new``; False signals a dead node.

        ``cause`` is the blame mask of whatever drove the narrowing; it is
        folded into the edge's own blame and into any conflict raised here.
        """
        old = self.dom[e]
        new &= old
        if new == old:
            return True
        reason = self.reason
        if new == 0:
            self.conflict = reason[e] | cause
            return False
        ctx = self.ctx
        self.dom[e] = new
        blame = reason[e] | cause
        reason[e] = blame
        i, j = ctx.ends[e]
        dmin = _MINV[new] - _MINV[old]
        dmax = _MAXV[new] - _MAXV[old]
        if dmin:
            self.sum_min[i] += dmin
            self.sum_min[j] += dmin
        if dmax:
            self.sum_max[i] += dmax
            self.sum_max[j] += dmax
        self._mark(i)
        self._mark(j)
        if _POP[old] > 1 and _POP[new] == 1:
            self.n_undecided -= 1
            self.und[i] -= 1
            self.und[j] -= 1
        if old & 1 and not new & 1:
            # Edge now carries a bridge: crossing partners drop to zero and
            # every cut it borders is satisfied for good.
            self.n_fixed_pos += 1
            cut_sat = self.cut_sat
            for ci in ctx.cuts_by_edge[e]:
                if ci < len(cut_sat):
                    cut_sat[ci] = 1
            for p in ctx.cross_partners[e]:
                if not self.set_mask(p, 1, blame):
                    return False
        if new == 1 and old != 1:
            self.n_fixed_zero += 1
            self.zero_reason |= blame
            if self.weak_live and ctx.n_edges - self.n_fixed_zero < ctx.n - 1:
                self.conflict = self.zero_reason
                return False
            cut_sat = self.cut_sat
            cut_live = self.cut_live
            cut_reason = self.cut_reason
            for ci in ctx.cuts_by_edge[e]:
                if ci < len(cut_live) and not cut_sat[ci]:
                    cut_reason[ci] |= blame
                    live = cut_live[ci] - 1
                    cut_live[ci] = live
                    if live == 0:
                        self.conflict = cut_reason[ci]
                        return False
                    if live == 1:
                        self._unit_cuts.append(ci)
        return True

    def assign(self, e: int, v: int, decision: int = 0) -> bool:
        return self.set_mask(e, 1 << v, decision)

    # -- propagation ----------------------------------------------------

    def _sync_cuts(self) -> bool:
        """Fold cuts added to the pool since this state was created."""
        ctx = self.ctx
        pool = ctx.cuts
        reason = self.reason
        while len(self.cut_live) < len(pool):
            ci = len(self.cut_live)
            cut = pool[ci]
            dom = self.dom
            sat = 0
            live = 0
            blame = 0
            for e in cut.boundary:
                m = dom[e]
                if not m & 1:
                    sat = 1
                    break
                if m != 1:
                    live += 1
                else:
                    blame |= reason[e]
            self.cut_sat.append(sat)
            self.cut_live.append(live)
            self.cut_reason.append(blame)
            if not sat:
                if live == 0:
                    self.conflict = blame
                    return False
                if live == 1:
                    self._unit_cuts.append(ci)
        return True

    def _revise_island(self, k: int) -> bool:
        """Bounds-consistency of the degree equation at island ``k``.

        A failed revision bumps the island's conflict weight, which the
        branching rule uses to stay near the contentious part of the grid.
        """
        ctx = self.ctx
        d = ctx.degrees[k]
        sum_min = self.sum_min
        sum_max = self.sum_max
        reason = self.reason
        # Everything inferred here follows from the incident domains; their
        # combined blame stays valid for narrowings made inside the loop.
        cause = 0
        for e in ctx.incident[k]:
            cause |= reason[e]
        if d < sum_min[k] or d > sum_max[k]:
            ctx.fail_weight[k] += 1
            self.conflict = cause
            return False
        dom = self.dom
        for e in ctx.incident[k]:
            m = dom[e]
            if _POP[m] == 1:
                continue
            lo = d - (sum_max[k] - _MAXV[m])
            hi = d - (sum_min[k] - _MINV[m])
            if lo > 2 or hi < 0:
                ctx.fail_weight[k] += 1
                self.conflict = cause
                return False
            allowed = _LO_MASK[lo if lo > 0 else 0] & _HI_MASK[hi if hi < 2 else 2]
            if m & allowed != m:
                if not self.set_mask(e, allowed, cause):
                    ctx.fail_weight[k] += 1
                    return False
        return True

    def _force_unit_cut(self, ci: int) -> bool:
        if self.cut_sat[ci]:
            return True
        dom = self.dom
        for e in self.ctx.cuts[ci].boundary:
            if dom[e] != 1:
                return self.set_mask(e, dom[e] & 0b110, self.cut_reason[ci])
        self.conflict = self.cut_reason[ci]
        return False  # live count said one edge remained; none found

    def propagate(self) -> bool:
        """Run all filters to fixpoint. False signals a dead node and leaves
        the blame mask of the failure in ``self.conflict``."""
        ctx = self.ctx
        if self.weak_live and ctx.n_edges - self.n_fixed_zero < ctx.n - 1:
            self.conflict = self.zero_reason
            return False
        if not self._sync_cuts():
            return False
        dirty = self._dirty
        flags = self._dirty_flag
        units = self._unit_cuts
        while dirty or units:
            while dirty:
                k = dirty.pop()
                flags[k] = 0
                if not self._revise_island(k):
                    return False
            while units and not dirty:
                ci = units.pop()
                if not self._force_unit_cut(ci):
                    return False
        return True

    # -- queries ----------------------------------------------------------

    def domain(self, e: int) -> tuple[int, ...]:
        m = self.dom[e]
        return tuple(v for v in (0, 1, 2) if m & (1 << v))

    def values(self) -> tuple[int, ...]:
        return tuple(_MINV[m] for m in self.dom)


def branch(state: SearchState,
           region: tuple[int, ...] | None = None) -> tuple[int, tuple[int, ...]]:
    """Pick the edge and value order to branch on. Deterministic.

    Considers islands with an undecided incident edge (within ``region``
    when given) and picks the one with the most recorded conflicts, then
    the least slack between its demanded degree and what its edges could
    still deliver, then the lowest island index; within the island, the
    lowest undecided edge index. High remaining demand is served large
    values first, otherwise values ascend.
    """
    ctx = state.ctx
    und = state.und
    sum_max = state.sum_max
    degrees = ctx.degrees
    weight = ctx.fail_weight
    dom = state.dom
    best_k = -1
    best_key = None
    if region is None:
        candidates = (k for k in range(ctx.n) if und[k])
    else:
        seen: set[int] = set()
        ends = ctx.ends
        for e in region:
            if _POP[dom[e]] > 1:
                seen.update(ends[e])
        candidates = (k for k in sorted(seen))
    for k in candidates:
        key = (-weight[k], sum_max[k] - degrees[k], k)
        if best_key is None or key < best_key:
            best_key = key
            best_k = k
    if best_k < 0:
        raise ValueError("branch called on a fully decided state")
    edge = -1
    if region is None:
        pool = ctx.incident[best_k]
    else:
        pool = sorted(e for e in region if best_k in ctx.ends[e])
    for e in pool:
        if _POP[dom[e]] > 1:
            edge = e
            break
    residual = degrees[best_k] - state.sum_min[best_k]
    order = (2, 1, 0) if residual >= 2 * und[best_k] - 1 else (0, 1, 2)
    m = dom[edge]
    return edge, tuple(v for v in order if m & (1 << v))


def split_regions(state: SearchState, live: list[int]) -> list[tuple[int, ...]]:
    """Partition undecided edges into independently solvable components.

    Two undecided edges interact iff they meet at an island, form a
    crossing pair, or border the same unsatisfied cut. Sub-searches drop
    the global edge-count bound, so components share no constraint at all
    and can be completed in isolation.
    """
    if not live:
        return []
    ctx = state.ctx
    pos = {e: idx for idx, e in enumerate(live)}
    parent = list(range(len(live)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    by_island: dict[int, int] = {}
    by_cut: dict[int, int] = {}
    ends = ctx.ends
    cross_partners = ctx.cross_partners
    cuts_by_edge = ctx.cuts_by_edge
    cut_sat = state.cut_sat
    n_cuts = len(cut_sat)
    for e in live:
        idx = pos[e]
        i, j = ends[e]
        for k in (i, j):
            first = by_island.setdefault(k, idx)
            if first != idx:
                ra, rb = find(first), find(idx)
                if ra != rb:
                    parent[rb] = ra
        for p in cross_partners[e]:
            other = pos.get(p)
            if other is not None and other < idx:
                ra, rb = find(other), find(idx)
                if ra != rb:
                    parent[rb] = ra
        for ci in cuts_by_edge[e]:
            if ci < n_cuts and not cut_sat[ci]:
                first = by_cut.setdefault(ci, idx)
                if first != idx:
                    ra, rb = find(first), find(idx)
                    if ra != rb:
                        parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for e in live:
        groups.setdefault(find(pos[e]), []).append(e)
    comps = [tuple(g) for g in groups.values()]
    comps.sort(key=lambda g: (len(g), g[0]))
    return comps


class _LimitReached(Exception):
    pass


_CACHE_LIMIT = 200_000
_MISS = object()


def region_key(state: SearchState, region: tuple[int, ...]):
    """Identity of a region subproblem.

    With the global edge-count bound off, a region's feasible completions
    are determined by its edges' domains, the leftover degree each involved
    island demands from them, and the unsatisfied cuts whose live boundary
    lies inside the region.
    """
    ctx = state.ctx
    dom = state.dom
    ends = ctx.ends
    degrees = ctx.degrees
    sum_min = state.sum_min
    region_min: dict[int, int] = {}
    cut_ids: set[int] = set()
    cut_sat = state.cut_sat
    n_cuts = len(cut_sat)
    for e in region:
        m = _MINV[dom[e]]
        i, j = ends[e]
        region_min[i] = region_min.get(i, 0) + m
        region_min[j] = region_min.get(j, 0) + m
        for ci in ctx.cuts_by_edge[e]:
            if ci < n_cuts and not cut_sat[ci]:
                cut_ids.add(ci)
    residuals = tuple(degrees[k] - sum_min[k] + rm for k, rm in sorted(region_min.items()))
    return (region, bytes(dom[e] for e in region), residuals, tuple(sorted(cut_ids)))


class _Searcher:
    """Recursive AND-OR search over independent regions with backjumping.

    OR-nodes branch on one edge inside a region; whenever the undecided
    part of a region falls apart into independent components, each is
    solved on its own and a component with no completion fails the whole
    node. Every dead end carries a blame mask of the decision levels it
    was derived from; an OR-node whose level is not blamed skips its
    remaining values and passes the conflict up unchanged. Complete
    assignments are checked for connectivity at the top level only; new
    cuts restart the search against the enlarged pool.
    """

    def __init__(self, ctx: SearchContext, opts: SolveOptions, stats: SolveStats,
                 deadline: float | None):
        self.ctx = ctx
        self.opts = opts
        self.stats = stats
        self.deadline = deadline
        self.depth = 0
        self.conflict = 0  # blame mask handed up alongside a None result

    def _tick(self) -> None:
        if self.opts.node_limit is not None and self.stats.nodes_explored >= self.opts.node_limit:
            raise _LimitReached
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise _LimitReached
        self.stats.nodes_explored += 1

    def _region_blame(self, state: SearchState, region: tuple[int, ...]) -> int:
        """Every decision that shaped a region: its edges' domains plus the
        decided incident edges that determine the leftover degrees."""
        ctx = state.ctx
        reason = state.reason
        blame = 0
        seen_islands = set()
        for e in region:
            blame |= reason[e]
            seen_islands.update(ctx.ends[e])
        for k in seen_islands:
            for f in ctx.incident[k]:
                blame |= reason[f]
        return blame

    def solve_region(self, state: SearchState, region: tuple[int, ...],
                     last_split: int = 0) -> SearchState | None:
        """Complete every edge of ``region`` or prove it has no completion.

        ``last_split`` is the region's size when components were last
        recomputed; resplitting is skipped until the region shrank enough,
        since searching a still-connected region costs nothing extra.
        On failure, ``self.conflict`` holds the blame mask.
        """
        dom = state.dom
        live = [e for e in region if _POP[dom[e]] > 1]
        if not live:
            return state
        if last_split == 0 or len(live) <= 24 or 4 * len(live) <= 3 * last_split:
            comps = split_regions(state, live)
            if len(comps) > 1:
                # The spanning-tree bound couples components through the
                # global zero count; it is only a redundant inequality, so
                # subsearches run with it off rather than lose independence.
                state.weak_live = False
                for comp in comps:
                    nxt = self.solve_region(state, comp, len(comp))
                    if nxt is None:
                        return None  # conflict mask already set
                    state = nxt
                return state
            live = list(comps[0])
            last_split = len(live)
        region = tuple(live)

        # Regions are self-contained once the edge-count bound is off, so
        # their outcomes can be memoized across sibling branches/restarts.
        cache = self.ctx.region_cache
        key = region_key(state, region) if not state.weak_live else None
        if key is not None:
            hit = cache.get(key, _MISS)
            if hit is None:
                self.conflict = self._region_blame(state, region)
                return None
            if hit is not _MISS:
                self._tick()
                blame = self._region_blame(state, region)
                for e, v in zip(region, hit):
                    if not state.set_mask(e, 1 << v, blame):
                        break
                else:
                    if state.propagate():
                        return state
                self.conflict = blame  # unreachable for a sound cache entry
                return None

        e, values = branch(state, region)
        self.depth += 1
        level_bit = 1 << self.depth
        merged = 0
        done = None
        for v in values:
            self._tick()
            child = state.copy()
            if child.assign(e, v, level_bit) and child.propagate():
                done = self.solve_region(child, region, last_split)
                if done is not None:
                    break
                fail = self.conflict
            else:
                fail = child.conflict
            if not fail & level_bit:
                # This decision played no part in the dead end: trying other
                # values here cannot help, hand the conflict further up.
                self.depth -= 1
                self.conflict = fail
                if key is not None and len(cache) < _CACHE_LIMIT:
                    cache[key] = None
                return None
            merged |= fail & ~level_bit
        self.depth -= 1
        if key is not None and len(cache) < _CACHE_LIMIT:
            if done is None:
                cache[key] = None
            else:
                final = done.dom
                cache[key] = bytes(_MINV[final[x]] for x in region)
        if done is None:
            self.conflict = merged
        return done


def solve(puzzle: Puzzle, opts: SolveOptions | None = None,
          edges: EdgeSet | None = None) -> tuple[SolveOutcome, SolveStats]:
    """Decide feasibility; on success the assignment passes ``verify``.

    Deterministic for a given (puzzle, opts): identical node counts, cut
    pools, and returned assignments on every run.
    """
    if opts is None:
        opts = SolveOptions()
    start = time.perf_counter()
    if edges is None:
        edges = build_edges(puzzle)
    ctx = SearchContext(puzzle, edges, opts)
    stats = SolveStats()
    deadline = None if opts.time_limit is None else start + opts.time_limit

    def finish(verdict: Verdict, assignment: Assignment | None = None):
        stats.wall_time = time.perf_counter() - start
        stats.cuts = tuple(ctx.cuts)
        return SolveOutcome(verdict, assignment), stats

    limit = sys.getrecursionlimit()
    needed = 4 * len(edges.edges) + 1000
    if needed > limit:
        sys.setrecursionlimit(needed)
    searcher = _Searcher(ctx, opts, stats, deadline)
    try:
        while True:
            stats.nodes_explored += 1
            root = SearchState(ctx)
            if not root.propagate():
                return finish(Verdict.INFEASIBLE)
            done = searcher.solve_region(root, tuple(range(ctx.n_edges)))
            if done is None:
                return finish(Verdict.INFEASIBLE)
            candidate = Assignment(done.values())
            cuts = separate_connectivity(ctx.edges, candidate, opts.cut_emission)
            if not cuts:
                return finish(Verdict.FEASIBLE, candidate)
            # Restart against the enlarged pool: the new cuts redirect the
            # search near the root instead of deep inside a dead subtree.
            stats.cuts_added += ctx.add_cuts(cuts)
            stats.restarts_or_backjumps += 1
    except _LimitReached:
        return finish(Verdict.LIMIT_REACHED)
