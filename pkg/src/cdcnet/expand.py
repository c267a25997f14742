"""Gadget expansion turning CDC routing into an alternating-path search.

Every node except the source and destination is replaced by a gadget of
2|C(x)|+2 sub-nodes: one (chan, chan') pair per channel available at the
node plus one (g, g') pair. All gadget-internal edges have weight zero and
the initial matching pairs chan(c) with chan'(c) and g with g', leaving
exactly the source and destination exposed. A channel-c edge of weight
w(link) joins the chan(c) sub-nodes of linked gadgets, so a minimum-weight
alternating path between the two exposed vertices is a minimum-weight
channel-discontinuity path in the original network.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .model import Network

KIND_TERMINAL = "terminal"
KIND_CHAN = "chan"
KIND_CHAN_P = "chan'"
KIND_G = "g"
KIND_G_P = "g'"

REDUCED_CHANNEL_LIMIT = 3


class ExpandError(ValueError):
    """Invalid expansion input."""


class PathError(ValueError):
    """A sub-node sequence that is not a valid alternating s-d path."""


@dataclass(frozen=True)
class SubNode:
    id: int
    owner: int
    kind: str
    channel: int | None = None

    def label(self) -> str:
        if self.kind == KIND_TERMINAL:
            return f"n{self.owner}"
        if self.channel is not None:
            tick = "'" if self.kind == KIND_CHAN_P else ""
            return f"n{self.owner}c{self.channel}{tick}"
        tick = "'" if self.kind == KIND_G_P else ""
        return f"n{self.owner}g{tick}"


class ExpEdge(NamedTuple):
    a: int
    b: int
    weight: int
    channel: int  # -1 for gadget-internal edges
    link: int     # originating link index, -1 for internal

    @property
    def external(self) -> bool:
        return self.channel >= 0

    def other(self, v: int) -> int:
        return self.b if v == self.a else self.a


@dataclass
class ExpandedGraph:
    subnodes: list[SubNode]
    edges: list[ExpEdge]
    adj: list[list[int]]
    s: int
    d: int
    network: Network
    s_node: int
    d_node: int

    @property
    def n_exp(self) -> int:
        return len(self.subnodes)

    def edge_between(self, a: int, b: int) -> list[int]:
        """All edge indices joining a and b (parallel s-d channel edges)."""
        return [e for e in self.adj[a] if self.edges[e].other(a) == b]


@dataclass
class Matching:
    """Symmetric mate lookup; mate_edge gives the matched edge index."""

    mate: list[int | None]
    mate_edge: list[int | None]

    def is_matched(self, edge: ExpEdge) -> bool:
        return self.mate[edge.a] == edge.b

    def size(self) -> int:
        return sum(1 for m in self.mate if m is not None) // 2


class Hop(NamedTuple):
    u: int
    v: int
    channel: int
    weight: int


@dataclass(frozen=True)
class CDCPath:
    """Walk of (link, channel) hops with no two consecutive channels equal."""

    hops: tuple[Hop, ...]
    total_weight: int

    def node_sequence(self) -> list[int]:
        if not self.hops:
            return []
        seq = [self.hops[0].u]
        seq.extend(h.v for h in self.hops)
        return seq

    def channels(self) -> list[int]:
        return [h.channel for h in self.hops]

    def validate(self, network: Network | None = None, simple: bool = True) -> None:
        prev_chan = None
        total = 0
        for i, hop in enumerate(self.hops):
            if i and self.hops[i - 1].v != hop.u:
                raise PathError(f"hop {i} does not continue hop {i - 1}")
            if prev_chan is not None and hop.channel == prev_chan:
                raise PathError(f"channel repeats across hops {i - 1},{i}")
            prev_chan = hop.channel
            total += hop.weight
            if network is not None:
                link = network.link_between(hop.u, hop.v)
                if link is None:
                    raise PathError(f"hop {i} is not a network link")
                if hop.channel not in link.channels:
                    raise PathError(f"hop {i} channel {hop.channel} not on link")
                if hop.weight != link.weight:
                    raise PathError(f"hop {i} weight mismatch")
        if total != self.total_weight:
            raise PathError("total_weight does not match hop sum")
        if simple:
            seq = self.node_sequence()
            if len(set(seq)) != len(seq):
                raise PathError("path is not node-simple")


def _kept_channels(channels, reduced: bool) -> list[int]:
    chans = list(channels)
    if reduced and len(chans) > REDUCED_CHANNEL_LIMIT:
        return chans[:REDUCED_CHANNEL_LIMIT]
    return chans


def expand(network: Network, s: int, d: int, reduced: bool = True) -> tuple[ExpandedGraph, Matching]:
    """Build the expanded graph and its zero-weight initial matching.

    With ``reduced`` set, links carrying three or more channels keep only
    their three lowest-numbered channel edges; any proper assignment can be
    re-chosen within three options, so reachability and optimal weight are
    preserved.
    """
    if s == d:
        raise ExpandError("source and destination must differ")
    if not (0 <= s < network.n and 0 <= d < network.n):
        raise ExpandError("node id out of range")

    subnodes = [SubNode(0, s, KIND_TERMINAL), SubNode(1, d, KIND_TERMINAL)]
    # chan_sub[(owner, channel)] -> chan sub-node id (terminals map directly)
    chan_sub: dict[tuple[int, int], int] = {}
    gadget: dict[int, dict] = {}
    for node in network.nodes:
        if node.id in (s, d):
            continue
        ids = {}
        for c in node.channels:
            sc = SubNode(len(subnodes), node.id, KIND_CHAN, c)
            subnodes.append(sc)
            scp = SubNode(len(subnodes), node.id, KIND_CHAN_P, c)
            subnodes.append(scp)
            ids[c] = (sc.id, scp.id)
            chan_sub[(node.id, c)] = sc.id
        g = SubNode(len(subnodes), node.id, KIND_G)
        subnodes.append(g)
        gp = SubNode(len(subnodes), node.id, KIND_G_P)
        subnodes.append(gp)
        gadget[node.id] = {"chan": ids, "g": g.id, "gp": gp.id}
        assert 2 * len(node.channels) + 2 == 2 + 2 * len(ids)

    edges: list[ExpEdge] = []
    mate: list[int | None] = [None] * len(subnodes)
    mate_edge: list[int | None] = [None] * len(subnodes)

    def add_edge(a: int, b: int, w: int, channel: int = -1, link: int = -1) -> int:
        edges.append(ExpEdge(a, b, w, channel, link))
        return len(edges) - 1

    for node in network.nodes:
        if node.id in (s, d):
            continue
        info = gadget[node.id]
        for c in sorted(info["chan"]):
            sc, scp = info["chan"][c]
            e = add_edge(sc, scp, 0)
            mate[sc], mate[scp] = scp, sc
            mate_edge[sc] = mate_edge[scp] = e
            add_edge(scp, info["g"], 0)
            add_edge(scp, info["gp"], 0)
        e = add_edge(info["g"], info["gp"], 0)
        mate[info["g"]], mate[info["gp"]] = info["gp"], info["g"]
        mate_edge[info["g"]] = mate_edge[info["gp"]] = e

    def endpoint(owner: int, channel: int) -> int:
        if owner == s:
            return 0
        if owner == d:
            return 1
        return gadget[owner]["chan"][channel][0]

    for li, link in enumerate(network.links):
        for c in _kept_channels(link.channels, reduced):
            add_edge(endpoint(link.u, c), endpoint(link.v, c), link.weight, c, li)

    adj: list[list[int]] = [[] for _ in subnodes]
    for ei, edge in enumerate(edges):
        adj[edge.a].append(ei)
        adj[edge.b].append(ei)

    expanded = ExpandedGraph(subnodes, edges, adj, 0, 1, network, s, d)
    matching = Matching(mate, mate_edge)
    _check_initial_matching(expanded, matching)
    return expanded, matching


def _check_initial_matching(expanded: ExpandedGraph, matching: Matching) -> None:
    # Fact: the initial matching is perfect off {s, d} and entirely weight 0.
    for sub in expanded.subnodes:
        m = matching.mate[sub.id]
        if sub.id in (expanded.s, expanded.d):
            assert m is None
            continue
        assert m is not None and matching.mate[m] == sub.id
        e = matching.mate_edge[sub.id]
        assert e is not None and expanded.edges[e].weight == 0


def contract_path(
    expanded: ExpandedGraph,
    subnode_path: list[int],
    edge_path: list[int] | None = None,
) -> CDCPath:
    """Map an alternating s-d path in the expanded graph back to a
    channel-assigned CDC path over original links.

    ``edge_path`` disambiguates parallel s-d channel edges; when omitted the
    lowest-channel candidate is used (weights are equal, so this only fixes
    the reported channel).
    """
    if len(subnode_path) < 2:
        raise PathError("path must contain at least one edge")
    if subnode_path[0] != expanded.s or subnode_path[-1] != expanded.d:
        raise PathError("path endpoints must be the expanded s and d")
    if len(set(subnode_path)) != len(subnode_path):
        raise PathError("path revisits a sub-node")

    if edge_path is None:
        edge_path = []
        for a, b in zip(subnode_path, subnode_path[1:]):
            cands = expanded.edge_between(a, b)
            if not cands:
                raise PathError(f"no edge between sub-nodes {a} and {b}")
            edge_path.append(min(cands, key=lambda e: expanded.edges[e].channel))
    if len(edge_path) != len(subnode_path) - 1:
        raise PathError("edge path length mismatch")

    hops: list[Hop] = []
    total = 0
    from_node = expanded.s_node
    for i, ei in enumerate(edge_path):
        edge = expanded.edges[ei]
        if {edge.a, edge.b} != {subnode_path[i], subnode_path[i + 1]}:
            raise PathError(f"edge {ei} does not join path positions {i},{i + 1}")
        matched = _is_initially_matched(expanded, edge)
        if i % 2 == 0:
            if matched:
                raise PathError(f"edge at position {i} should be unmatched")
        elif not matched:
            raise PathError(f"edge at position {i} should be matched")
        if edge.external:
            link = expanded.network.links[edge.link]
            to_node = link.other(from_node)
            if hops and hops[-1].channel == edge.channel:
                raise PathError("consecutive hops share a channel")
            hops.append(Hop(from_node, to_node, edge.channel, edge.weight))
            total += edge.weight
            from_node = to_node
    if from_node != expanded.d_node:
        raise PathError("external hops do not reach the destination")
    return CDCPath(tuple(hops), total)


def _is_initially_matched(expanded: ExpandedGraph, edge: ExpEdge) -> bool:
    if edge.external:
        return False
    a, b = expanded.subnodes[edge.a], expanded.subnodes[edge.b]
    kinds = {a.kind, b.kind}
    if kinds == {KIND_CHAN, KIND_CHAN_P}:
        return a.channel == b.channel
    return kinds == {KIND_G, KIND_G_P}
