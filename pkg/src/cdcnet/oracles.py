"""Independent ground-truth oracles for cross-checking the search engines.

These deliberately share no code with the search: exhaustive enumeration
with pruning only. Budgets keep the exponential blow-up inside test scale.
"""

from __future__ import annotations

from .expand import ExpandedGraph
from .model import Network

MATCHING_VERTEX_BUDGET = 34
CDC_PATH_NODE_BUDGET = 12


class BudgetError(ValueError):
    """Instance too large for exhaustive search."""


def brute_force_matching(expanded: ExpandedGraph) -> int | None:
    """Exact minimum total weight over all perfect matchings, None if none.

    Recursive: match the lowest-id uncovered vertex against each uncovered
    neighbour, pruning branches whose partial weight already meets the best.
    """
    n = expanded.n_exp
    if n > MATCHING_VERTEX_BUDGET:
        raise BudgetError(f"{n} vertices exceeds matching budget {MATCHING_VERTEX_BUDGET}")
    if n % 2 == 1:
        return None
    neighbours: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for edge in expanded.edges:
        neighbours[edge.a].append((edge.weight, edge.b))
        neighbours[edge.b].append((edge.weight, edge.a))
    for lst in neighbours:
        lst.sort()

    best: list[int | None] = [None]
    covered = bytearray(n)

    def rec(partial: int) -> None:
        u = -1
        for i in range(n):
            if not covered[i]:
                u = i
                break
        if u < 0:
            if best[0] is None or partial < best[0]:
                best[0] = partial
            return
        covered[u] = 1
        for w, v in neighbours[u]:
            if covered[v]:
                continue
            if best[0] is not None and partial + w >= best[0]:
                break  # neighbours sorted by weight; the rest only cost more
            covered[v] = 1
            rec(partial + w)
            covered[v] = 0
        covered[u] = 0

    rec(0)
    return best[0]


def brute_force_cdc_path(network: Network, s: int, d: int) -> int | None:
    """Exact minimum CDC path weight by enumerating all simple node paths
    together with all per-link channel choices; None if no CDC path exists.
    """
    if network.n > CDC_PATH_NODE_BUDGET:
        raise BudgetError(f"{network.n} nodes exceeds path budget {CDC_PATH_NODE_BUDGET}")
    if s == d:
        return 0
    best: list[int | None] = [None]
    on_path = bytearray(network.n)
    on_path[s] = 1

    def rec(u: int, prev_chan: int, partial: int) -> None:
        if best[0] is not None and partial >= best[0]:
            return
        for v, li in network.neighbors(u):
            if on_path[v]:
                continue
            link = network.links[li]
            usable = [c for c in link.channels if c != prev_chan]
            if not usable:
                continue
            if v == d:
                if best[0] is None or partial + link.weight < best[0]:
                    best[0] = partial + link.weight
                continue
            on_path[v] = 1
            for c in usable:
                rec(v, c, partial + link.weight)
            on_path[v] = 0

    rec(s, -1, 0)
    return best[0]


def brute_force_colink_distances(
    expanded: ExpandedGraph, mate: list[int | None]
) -> tuple[list[int | None], list[int | None]]:
    """Exhaustive minimum alternating-walk distances from the source.

    Returns (odd, even): odd[v] is the cheapest simple alternating path from
    s to v ending on an unmatched edge, even[v] the cheapest ending on a
    matched edge. These are the ground truth for d_T and d_S.
    """
    n = expanded.n_exp
    if n > 30:
        raise BudgetError(f"{n} sub-nodes exceeds alternating-walk budget 30")
    odd: list[int | None] = [None] * n
    even: list[int | None] = [None] * n
    even[expanded.s] = 0
    visited = bytearray(n)
    visited[expanded.s] = 1

    def rec(u: int, need_matched: bool, weight: int) -> None:
        for ei in expanded.adj[u]:
            edge = expanded.edges[ei]
            v = edge.other(u)
            if visited[v]:
                continue
            matched = mate[u] == v
            if matched != need_matched:
                continue
            total = weight + edge.weight
            table = even if matched else odd
            if table[v] is None or total < table[v]:
                table[v] = total
            visited[v] = 1
            rec(v, not need_matched, total)
            visited[v] = 0

    rec(expanded.s, False, 0)
    return odd, even
