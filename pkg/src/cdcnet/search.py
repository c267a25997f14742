"""Centralized minimum-weight CDC path search over the expanded graph.

Single-source alternating-path search in the style of one phase of Edmonds'
weighted matching algorithm. Every sub-node carries two distances: d_T (the
cheapest odd alternating walk from the source, ending on an unmatched edge)
and d_S (the cheapest even walk, equivalently d_T of its mate). The main
loop repeatedly takes the globally cheapest candidate event:

    val(u, v) = d_S[u] + w(u, v)                  for v unlabeled
    val(u, v) = (d_S[u] + d_S[v] + w(u, v)) / 2   for v with an S label

growing the tree in the first case and discovering a blossom in the second.
The search terminates when the destination leaves the unlabeled set.

All arithmetic is exact: distances and event values are stored as integers
in doubled weight units so the halved S-S values never lose precision.
"""

from __future__ import annotations

import heapq
import sys
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from .expand import CDCPath, ExpandedGraph, Matching, contract_path, expand
from .model import Network

LABEL_F = 0
LABEL_S = 1
LABEL_T = 2

FORM_TO_F = 0
FORM_S_TO_S = 1

PHASE_GROW = "GROW"
PHASE_BLOSSOM = "BLOSSOM"
PHASE_AUGMENT = "AUGMENT"
NOPATH_LINE = "NOPATH"

KIND_TO_F = "to_F"
KIND_S_TO_S = "S_to_S"


class InvariantError(AssertionError):
    """An internal consistency check failed; indicates an implementation bug."""


class SearchTrace:
    """Ordered decision log: one line per accepted (phase, edge, value).

    Values are recorded in doubled weight units so they are exact integers.
    The text form is byte-comparable across engines.
    """

    def __init__(self) -> None:
        self.lines: list[str] = []

    def add(self, phase: str, u: int, v: int, val2: int) -> None:
        a, b = (u, v) if u < v else (v, u)
        self.lines.append(f"{phase} {a} {b} {val2}")

    def add_nopath(self) -> None:
        self.lines.append(NOPATH_LINE)

    def to_text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")

    def events(self) -> list[tuple[str, int, int, int]]:
        out = []
        for line in self.lines:
            parts = line.split()
            if parts[0] == NOPATH_LINE:
                continue
            out.append((parts[0], int(parts[1]), int(parts[2]), int(parts[3])))
        return out

    def blossom_count(self) -> int:
        return sum(1 for line in self.lines if line.startswith(PHASE_BLOSSOM))

    def __eq__(self, other) -> bool:
        return isinstance(other, SearchTrace) and self.lines == other.lines


@dataclass
class Blossom:
    """Registry record for one discovered blossom."""

    rec_id: int
    base: int
    members: list[int]
    formed_at2: int
    bridge: tuple[int, int]
    bridge_edge: int
    enclosed_at2: int | None = None
    parent: int | None = None


class FindMinOutcome(NamedTuple):
    edge: int
    u: int
    v: int
    val2: int
    kind: str


@dataclass
class SearchOptions:
    reduced: bool = True
    check_certificate: bool = False
    event_hook: Optional[Callable] = None


@dataclass
class SearchState:
    """Mutable state of one search run over a fixed expanded graph."""

    expanded: ExpandedGraph
    matching: Matching
    label: list[int]                 # first-acquired label per sub-node
    ds2: list[int | None]            # d_S, doubled units
    dt2: list[int | None]            # d_T, doubled units
    ps: list[int | None]             # parent when S was acquired (the mate)
    pt: list[int | None]             # parent when T was acquired by growth
    pt_edge: list[int | None]
    bridge: dict[int, tuple[int, int]] = field(default_factory=dict)
    bridge_edge: dict[int, int] = field(default_factory=dict)
    b: list[int] = field(default_factory=list)   # outermost blossom base
    examined: set[tuple[int, int]] = field(default_factory=set)
    blossoms: list[Blossom] = field(default_factory=list)
    base_members: dict[int, list[int]] = field(default_factory=dict)
    heap: list = field(default_factory=list)
    delta2: int = 0
    events: int = 0

    @classmethod
    def initial(cls, expanded: ExpandedGraph, matching: Matching) -> "SearchState":
        n = expanded.n_exp
        state = cls(
            expanded=expanded,
            matching=matching,
            label=[LABEL_F] * n,
            ds2=[None] * n,
            dt2=[None] * n,
            ps=[None] * n,
            pt=[None] * n,
            pt_edge=[None] * n,
            b=list(range(n)),
        )
        s = expanded.s
        state.label[s] = LABEL_S
        state.ds2[s] = 0
        push_candidates(state, s)
        return state

    def in_s(self, v: int) -> bool:
        return self.ds2[v] is not None

    def in_f(self, v: int) -> bool:
        return self.ds2[v] is None and self.dt2[v] is None


def push_candidates(state: SearchState, u: int) -> None:
    """Queue u's edges as candidate events, using current neighbour labels."""
    expanded = state.expanded
    ds2u = state.ds2[u]
    for ei in expanded.adj[u]:
        edge = expanded.edges[ei]
        v = edge.other(u)
        w2 = 2 * edge.weight
        if state.ds2[v] is not None:
            val2 = (ds2u + state.ds2[v] + w2) // 2
            a, b = (u, v) if u < v else (v, u)
            heapq.heappush(state.heap, (val2, a, b, edge.channel, ei, u, v, FORM_S_TO_S))
        elif state.dt2[v] is None:
            a, b = (u, v) if u < v else (v, u)
            heapq.heappush(state.heap, (ds2u + w2, a, b, edge.channel, ei, u, v, FORM_TO_F))


def base_of(state: SearchState, v: int) -> int:
    return state.b[v]


def findmin(state: SearchState, expanded: ExpandedGraph | None = None) -> FindMinOutcome | None:
    """Pop the globally minimum valid candidate event, or None if exhausted.

    Candidates whose target has since been absorbed into the scanner's own
    blossom are skipped and marked examined; candidates whose target label
    changed are dropped (a fresh entry was queued at the label change).
    Ties break on (value, smaller id, larger id, channel).
    """
    heap = state.heap
    while heap:
        val2, _a, _b, _chan, ei, u, v, form = heap[0]
        if (u, v) in state.examined:
            heapq.heappop(heap)
            continue
        if form == FORM_TO_F:
            if not state.in_f(v):
                heapq.heappop(heap)
                continue
            heapq.heappop(heap)
            return FindMinOutcome(ei, u, v, val2, KIND_TO_F)
        # S-to-S candidate
        if state.b[u] == state.b[v]:
            heapq.heappop(heap)
            state.examined.add((u, v))
            state.examined.add((v, u))
            continue
        heapq.heappop(heap)
        return FindMinOutcome(ei, u, v, val2, KIND_S_TO_S)
    return None


def grow(state: SearchState, outcome: FindMinOutcome) -> None:
    """Add the target to T and its mate to S (the four growth assignments)."""
    u, v, val2 = outcome.u, outcome.v, outcome.val2
    edge = state.expanded.edges[outcome.edge]
    if not state.in_f(v):
        raise InvariantError("grow target is not unlabeled")
    m = state.matching.mate[v]
    if m is None:
        raise InvariantError("grow target is unmatched (only s and d are)")
    assert val2 == state.ds2[u] + 2 * edge.weight
    state.label[v] = LABEL_T
    state.dt2[v] = val2
    state.pt[v] = u
    state.pt_edge[v] = outcome.edge
    state.label[m] = LABEL_S
    state.ds2[m] = val2
    state.ps[m] = v
    state.examined.add((u, v))
    state.examined.add((v, u))
    push_candidates(state, m)


def _chain_step(state: SearchState, atom: int) -> tuple[int, int] | None:
    """From an outermost base, return (T-vertex above it, next atom base)."""
    t = state.matching.mate[atom]
    if t is None:
        return None  # atom is the unmatched source
    u = state.pt[t]
    if u is None:
        raise InvariantError("chain T-vertex lacks a growth parent")
    return t, state.b[u]


def discover_blossom(state: SearchState, outcome: FindMinOutcome) -> Blossom:
    """Shrink the odd cycle closed by an S-S edge across distinct blossoms.

    Walks both ancestries at blossom-atom granularity to their first common
    atom, whose base becomes the base of the new outermost blossom. Every
    member missing a label gains it together with the complementary distance
    2*val - d (the dual-change identity at formation value val); members
    acquiring a T label record the bridge edge, side-oriented, for later
    path unfolding.
    """
    u, v, val2 = outcome.u, outcome.v, outcome.val2
    if state.b[u] == state.b[v]:
        raise InvariantError("blossom endpoints already share a base")

    chains: list[list] = [[state.b[u]], [state.b[v]]]
    seen: dict[int, int] = {state.b[u]: 0, state.b[v]: 1}
    alive = [True, True]
    meet: int | None = None
    # Advance the two walks alternately; the first atom visited by both is
    # the nearest common ancestor (both chains coincide above it).
    while meet is None:
        progressed = False
        for side in (0, 1):
            if not alive[side]:
                continue
            step = _chain_step(state, chains[side][-1])
            if step is None:
                alive[side] = False
                continue
            progressed = True
            t, nxt = step
            chains[side].append(t)
            chains[side].append(nxt)
            owner = seen.get(nxt)
            if owner is not None and owner != side:
                meet = nxt
                break
            seen[nxt] = side
        if meet is None and not progressed:
            raise InvariantError("blossom walks exhausted without meeting")

    members: list[int] = []
    sides: dict[int, int] = {}
    sub_bases: list[int] = []
    for side in (0, 1):
        chain = chains[side]
        cut = chain.index(meet) if meet in chain else len(chain) - 1
        for pos in range(cut + 1):
            elem = chain[pos]
            if pos % 2 == 0:  # atom base
                if elem == meet and side == 1:
                    continue  # meet atom collected once, on side 0
                sub_bases.append(elem)
                for m in state.base_members.get(elem, (elem,)):
                    members.append(m)
                    sides[m] = side
            else:  # T-vertex between atoms
                members.append(elem)
                sides[elem] = side
    if meet is None:
        raise InvariantError("no common base found")
    if len(members) % 2 == 0:
        raise InvariantError("blossom must have an odd member count")

    rec = Blossom(
        rec_id=len(state.blossoms),
        base=meet,
        members=members,
        formed_at2=val2,
        bridge=(u, v),
        bridge_edge=outcome.edge,
    )
    for sub in sub_bases:
        for old in state.blossoms:
            if old.base == sub and old.enclosed_at2 is None:
                old.enclosed_at2 = val2
                old.parent = rec.rec_id
    state.blossoms.append(rec)
    state.base_members[meet] = members

    endpoints = (u, v)
    for m in members:
        state.b[m] = meet
        if state.ds2[m] is None:
            state.ds2[m] = 2 * val2 - state.dt2[m]
            state.ps[m] = state.matching.mate[m]
            push_candidates(state, m)
        if state.dt2[m] is None and m != meet:
            # Bases skip this at their own formation (no simple odd path to
            # the base exists yet) and acquire it here, at enclosure, with
            # the enclosing bridge as the odd-label tracing source.
            state.dt2[m] = 2 * val2 - state.ds2[m]
            same = endpoints[sides[m]]
            other = endpoints[1 - sides[m]]
            state.bridge[m] = (same, other)
            state.bridge_edge[m] = outcome.edge

    state.examined.add((u, v))
    state.examined.add((v, u))
    return rec


class _Trail(NamedTuple):
    verts: list[int]
    edges: list[int]


def extract_path(state: SearchState, expanded: ExpandedGraph, d: int) -> tuple[list[int], list[int]]:
    """Trace the alternating s-d path back through parents and bridges.

    Blossoms are unfolded recursively: an odd path into a blossom member
    crosses the stored bridge and descends the even-length side toward the
    base. Returns (vertex sequence, edge index sequence).
    """
    if state.dt2[d] is None:
        raise InvariantError("destination was never reached")
    mate = state.matching.mate
    mate_edge = state.matching.mate_edge
    s = state.expanded.s
    budget = [200 * expanded.n_exp + 1000]

    def spend() -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise InvariantError("path extraction exceeded work budget")

    def trace_even(x: int) -> _Trail:
        spend()
        if x == s:
            return _Trail([s], [])
        t = mate[x]
        trail = trace_odd(t)
        trail.verts.append(x)
        trail.edges.append(mate_edge[x])
        return trail

    def trace_odd(x: int) -> _Trail:
        spend()
        if state.pt[x] is not None:
            trail = trace_even(state.pt[x])
            trail.verts.append(x)
            trail.edges.append(state.pt_edge[x])
            return trail
        w, other = state.bridge[x]
        trail = trace_even(other)
        down_trail = down(w, x)
        trail.verts.extend(down_trail.verts)
        trail.edges.append(state.bridge_edge[x])
        trail.edges.extend(down_trail.edges)
        return trail

    def down(w: int, stop: int) -> _Trail:
        spend()
        if w == stop:
            return _Trail([w], [])
        t = mate[w]
        tail = down_odd(t, stop)
        return _Trail([w] + tail.verts, [mate_edge[w]] + tail.edges)

    def down_odd(t: int, stop: int) -> _Trail:
        spend()
        if t == stop:
            return _Trail([t], [])
        if state.pt[t] is not None:
            tail = down(state.pt[t], stop)
            return _Trail([t] + tail.verts, [state.pt_edge[t]] + tail.edges)
        w, other = state.bridge[t]
        up_trail = down(w, t)
        rev_verts = up_trail.verts[::-1]
        rev_edges = up_trail.edges[::-1]
        tail = down(other, stop)
        return _Trail(rev_verts + tail.verts, rev_edges + [state.bridge_edge[t]] + tail.edges)

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 40 * expanded.n_exp + 1000))
    try:
        trail = trace_odd(d)
    finally:
        sys.setrecursionlimit(limit)
    verify_alternating_path(state, expanded, trail.verts, trail.edges)
    return trail.verts, trail.edges


def verify_alternating_path(
    state: SearchState, expanded: ExpandedGraph, verts: list[int], edges: list[int]
) -> None:
    if verts[0] != expanded.s or verts[-1] != expanded.d:
        raise InvariantError("extracted path endpoints wrong")
    if len(set(verts)) != len(verts):
        raise InvariantError("extracted path is not vertex-simple")
    if len(edges) != len(verts) - 1:
        raise InvariantError("edge/vertex count mismatch")
    for i, ei in enumerate(edges):
        edge = expanded.edges[ei]
        if {edge.a, edge.b} != {verts[i], verts[i + 1]}:
            raise InvariantError(f"edge {ei} does not join step {i}")
        matched = state.matching.mate[verts[i]] == verts[i + 1]
        if (i % 2 == 0) == matched:
            raise InvariantError(f"alternation violated at step {i}")


@dataclass
class DualCertificate:
    """Reconstructed matching duals plus the verified identity residuals."""

    y2: list[int]
    z2: dict[int, int]
    max_violation: int
    checks: int


def dual_certificate(state: SearchState, expanded: ExpandedGraph | None = None) -> DualCertificate:
    """Rebuild dual variables from distances and blossom history and verify:
    matched edges stay tight, every T-labeled sub-node's d_T equals
    y(s) + y(u) + sum of blossom duals containing it, mates agree on
    d_S/d_T, and no edge has negative slack. All residuals must be zero.
    """
    expanded = expanded or state.expanded
    delta2 = state.delta2
    n = expanded.n_exp
    y2 = [0] * n
    for vtx in range(n):
        if state.ds2[vtx] is not None:
            y2[vtx] = delta2 - state.ds2[vtx]
        elif state.dt2[vtx] is not None:
            y2[vtx] = state.dt2[vtx] - delta2
    z2: dict[int, int] = {}
    member_sets: dict[int, set[int]] = {}
    rec_base: dict[int, int] = {}
    for rec in state.blossoms:
        until = rec.enclosed_at2 if rec.enclosed_at2 is not None else delta2
        z2[rec.rec_id] = -2 * (until - rec.formed_at2)
        member_sets[rec.rec_id] = set(rec.members)
        rec_base[rec.rec_id] = rec.base

    def z_sum_vertex(vtx: int) -> int:
        # A shortest co-link path to the base of a blossom crosses that
        # blossom rather than terminating inside it, so its dual cancels:
        # blossoms based at the vertex itself are excluded.
        return sum(
            z2[r] for r, ms in member_sets.items() if vtx in ms and rec_base[r] != vtx
        )

    def z_sum_pair(a: int, b: int) -> int:
        return sum(z2[r] for r, ms in member_sets.items() if a in ms and b in ms)

    worst = 0
    checks = 0
    for vtx in range(n):
        m = state.matching.mate[vtx]
        if m is not None and m > vtx:
            worst = max(worst, abs(y2[vtx] + y2[m] + z_sum_pair(vtx, m)))
            checks += 1
            if state.ds2[vtx] is not None:
                worst = max(worst, abs(state.ds2[vtx] - (state.dt2[m] if state.dt2[m] is not None else -1)))
                checks += 1
            if state.ds2[m] is not None:
                worst = max(worst, abs(state.ds2[m] - (state.dt2[vtx] if state.dt2[vtx] is not None else -1)))
                checks += 1
        if state.dt2[vtx] is not None:
            lhs = state.dt2[vtx]
            rhs = delta2 + y2[vtx] + z_sum_vertex(vtx)
            worst = max(worst, abs(lhs - rhs))
            checks += 1
    for edge in expanded.edges:
        slack2 = 2 * edge.weight - y2[edge.a] - y2[edge.b] - z_sum_pair(edge.a, edge.b)
        if slack2 < 0:
            worst = max(worst, -slack2)
        checks += 1
    return DualCertificate(y2, z2, worst, checks)


@dataclass
class SearchResult:
    path: CDCPath | None
    trace: SearchTrace
    state: SearchState | None
    expanded: ExpandedGraph | None
    subnode_path: list[int] | None = None


def search(network: Network, s: int, d: int, options: SearchOptions | None = None) -> SearchResult:
    """Run the full search; always returns trace and final state."""
    options = options or SearchOptions()
    trace = SearchTrace()
    if s == d:
        return SearchResult(CDCPath((), 0), trace, None, None)
    expanded, matching = expand(network, s, d, reduced=options.reduced)
    state = SearchState.initial(expanded, matching)
    max_events = 3 * expanded.n_exp + 3
    while True:
        outcome = findmin(state)
        if outcome is None:
            trace.add_nopath()
            return SearchResult(None, trace, state, expanded)
        if outcome.val2 < state.delta2:
            raise InvariantError("event values must be non-decreasing")
        state.events += 1
        if state.events > max_events:
            raise InvariantError("main loop exceeded its iteration bound")
        if options.event_hook is not None:
            options.event_hook(state, expanded, outcome)
        state.delta2 = outcome.val2
        if outcome.kind == KIND_TO_F and outcome.v == expanded.d:
            trace.add(PHASE_AUGMENT, outcome.u, outcome.v, outcome.val2)
            state.dt2[expanded.d] = outcome.val2
            state.pt[expanded.d] = outcome.u
            state.pt_edge[expanded.d] = outcome.edge
            state.label[expanded.d] = LABEL_T
            state.examined.add((outcome.u, outcome.v))
            state.examined.add((outcome.v, outcome.u))
            verts, edges = extract_path(state, expanded, expanded.d)
            path = contract_path(expanded, verts, edges)
            if 2 * path.total_weight != outcome.val2:
                raise InvariantError("contracted weight disagrees with event value")
            if options.check_certificate:
                _assert_certificate(state, expanded)
            return SearchResult(path, trace, state, expanded, verts)
        if outcome.kind == KIND_TO_F:
            trace.add(PHASE_GROW, outcome.u, outcome.v, outcome.val2)
            grow(state, outcome)
        else:
            trace.add(PHASE_BLOSSOM, outcome.u, outcome.v, outcome.val2)
            discover_blossom(state, outcome)
        if options.check_certificate:
            _assert_certificate(state, expanded)


def _assert_certificate(state: SearchState, expanded: ExpandedGraph) -> None:
    cert = dual_certificate(state, expanded)
    if cert.max_violation != 0:
        raise InvariantError(f"dual certificate violated by {cert.max_violation}")


def shortest_cdc(
    network: Network, s: int, d: int, options: SearchOptions | None = None
) -> tuple[CDCPath, SearchTrace] | None:
    """Minimum-weight CDC path with explicit channels, or None if none exists."""
    result = search(network, s, d, options)
    if result.path is None:
        return None
    return result.path, result.trace
