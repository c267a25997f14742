"""Multi-channel geometric network model.

Nodes live in a 2-D region, each with a subset of the network's orthogonal
channels. Two nodes are linked when they are within transmission range and
share at least one channel; a link carries exactly the channel intersection
of its endpoints. Coordinates are snapped to a micro-unit grid (1e-6) so
that all distance comparisons and euclidean link weights are exact integers.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

MICRO = 10 ** 6
MAX_CHANNELS = 32

WEIGHT_UNIT = "unit"
WEIGHT_EUCLID = "euclid"


class NetworkError(ValueError):
    """Invalid network construction input."""


class FormatError(NetworkError):
    """Malformed network text."""


@dataclass(frozen=True)
class ChannelSet:
    """Immutable set of channel ids, iterated in ascending order.

    Backed by a bitmask; channel ids must be in [0, MAX_CHANNELS).
    """

    mask: int = 0

    @classmethod
    def of(cls, channels) -> "ChannelSet":
        mask = 0
        for c in channels:
            if not isinstance(c, int) or c < 0 or c >= MAX_CHANNELS:
                raise NetworkError(f"channel id {c!r} out of range [0, {MAX_CHANNELS})")
            mask |= 1 << c
        return cls(mask)

    def __iter__(self):
        mask = self.mask
        c = 0
        while mask:
            if mask & 1:
                yield c
            mask >>= 1
            c += 1

    def __contains__(self, c: int) -> bool:
        return 0 <= c < MAX_CHANNELS and bool(self.mask >> c & 1)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def __and__(self, other: "ChannelSet") -> "ChannelSet":
        return ChannelSet(self.mask & other.mask)

    def members(self) -> tuple[int, ...]:
        return tuple(self)

    def __str__(self) -> str:
        return ",".join(str(c) for c in self)


@dataclass(frozen=True)
class Node:
    """A network node: dense id, planar position, available channels."""

    id: int
    x: float
    y: float
    channels: ChannelSet

    def micro(self) -> tuple[int, int]:
        """Position in exact micro-units."""
        return round(self.x * MICRO), round(self.y * MICRO)


@dataclass(frozen=True)
class Link:
    """Undirected link; u < v; channels = intersection of endpoint sets."""

    u: int
    v: int
    channels: ChannelSet
    weight: int

    def other(self, node_id: int) -> int:
        return self.v if node_id == self.u else self.u


def snap(value: float) -> float:
    """Snap a coordinate to the micro-unit grid."""
    return round(value * MICRO) / MICRO


def dist2_micro(a: Node, b: Node) -> int:
    ax, ay = a.micro()
    bx, by = b.micro()
    return (ax - bx) ** 2 + (ay - by) ** 2


def euclid_weight_micro(a: Node, b: Node) -> int:
    """round(|a-b| * 1e6) computed exactly with integer square roots."""
    q = dist2_micro(a, b)
    w = math.isqrt(q)
    # round-to-nearest: (w + 0.5)^2 = w^2 + w + 0.25
    if q - w * w > w:
        w += 1
    return w


@dataclass
class Network:
    """Immutable multi-channel connectivity graph over geometric nodes."""

    nodes: list[Node]
    links: list[Link]
    range_: float | None
    weight_mode: str
    c_total: int
    adjacency: list[list[int]] = field(default_factory=list, repr=False)
    _link_index: dict[tuple[int, int], int] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if not self.adjacency:
            self.adjacency = [[] for _ in self.nodes]
            for idx, link in enumerate(self.links):
                self.adjacency[link.u].append(idx)
                self.adjacency[link.v].append(idx)
                self._link_index[(link.u, link.v)] = idx

    @property
    def n(self) -> int:
        return len(self.nodes)

    def neighbors(self, u: int):
        """Yield (neighbor id, link index) pairs for node u."""
        for idx in self.adjacency[u]:
            yield self.links[idx].other(u), idx

    def link_between(self, u: int, v: int) -> Link | None:
        idx = self._link_index.get((min(u, v), max(u, v)))
        return None if idx is None else self.links[idx]

    def link_index_between(self, u: int, v: int) -> int | None:
        return self._link_index.get((min(u, v), max(u, v)))


def _link_weight(a: Node, b: Node, weight_mode: str) -> int:
    if weight_mode == WEIGHT_UNIT:
        return 1
    if weight_mode == WEIGHT_EUCLID:
        return euclid_weight_micro(a, b)
    raise NetworkError(f"unknown weight mode {weight_mode!r}")


def _validate_nodes(nodes: list[Node]) -> None:
    seen_ids = set()
    seen_pos = set()
    for node in nodes:
        if node.id in seen_ids:
            raise NetworkError(f"duplicate node id {node.id}")
        seen_ids.add(node.id)
        pos = node.micro()
        if pos in seen_pos:
            raise NetworkError(f"duplicate coordinates for node {node.id}")
        seen_pos.add(pos)
        if not node.channels:
            raise NetworkError(f"node {node.id} has no channels")
    if seen_ids != set(range(len(nodes))):
        raise NetworkError("node ids must be dense from 0")


def _c_total_for(nodes: list[Node], c_total: int | None) -> int:
    highest = max(max(node.channels) for node in nodes)
    if c_total is None:
        c_total = highest + 1
    elif highest >= c_total:
        raise NetworkError(f"channel id {highest} exceeds declared total {c_total}")
    if c_total > MAX_CHANNELS:
        raise NetworkError(f"channel capacity {c_total} exceeds {MAX_CHANNELS}")
    return c_total


def build_network(
    nodes: list[Node],
    range_: float,
    weight_mode: str = WEIGHT_UNIT,
    c_total: int | None = None,
) -> Network:
    """Build the range-derived network: link two nodes iff their euclidean
    distance is at most ``range_`` and their channel sets intersect.
    """
    if range_ <= 0:
        raise NetworkError("range must be positive")
    _validate_nodes(nodes)
    c_total = _c_total_for(nodes, c_total)
    nodes = sorted(nodes, key=lambda nd: nd.id)
    r_micro_2 = round(range_ * MICRO) ** 2
    links = []
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            shared = a.channels & b.channels
            if not shared:
                continue
            if dist2_micro(a, b) > r_micro_2:
                continue
            links.append(Link(a.id, b.id, shared, _link_weight(a, b, weight_mode)))
    return Network(nodes, links, range_, weight_mode, c_total)


def explicit_network(
    nodes: list[Node],
    link_pairs: list[tuple[int, int]],
    weight_mode: str = WEIGHT_UNIT,
    c_total: int | None = None,
) -> Network:
    """Build a network from an explicit link list; channels derived by
    intersection (an empty intersection is an error here, not a skip).
    """
    _validate_nodes(nodes)
    c_total = _c_total_for(nodes, c_total)
    nodes = sorted(nodes, key=lambda nd: nd.id)
    links = []
    seen = set()
    for u, v in link_pairs:
        if u == v:
            raise NetworkError(f"self-link at node {u}")
        if not (0 <= u < len(nodes) and 0 <= v < len(nodes)):
            raise NetworkError(f"link endpoint out of range: ({u}, {v})")
        u, v = min(u, v), max(u, v)
        if (u, v) in seen:
            raise NetworkError(f"duplicate link ({u}, {v})")
        seen.add((u, v))
        shared = nodes[u].channels & nodes[v].channels
        if not shared:
            raise NetworkError(f"link ({u}, {v}) endpoints share no channel")
        links.append(Link(u, v, shared, _link_weight(nodes[u], nodes[v], weight_mode)))
    return Network(nodes, links, None, weight_mode, c_total)


CONSTANT_DENSITY = "constant_density"
FIXED_RANGE = "fixed_range"


def constant_density_range(n: int) -> float:
    """Transmission range keeping expected neighbour count constant on the
    100x100 region; interpolates between 11 units at n=100 and ~4 at n=800.
    """
    return 11.0 * math.sqrt(100.0 / n)


def random_topology(
    n: int,
    region_side: float = 100.0,
    mode: str = CONSTANT_DENSITY,
    c_total: int = 10,
    channels_per_node: int = 4,
    seed: int = 0,
    range_: float | None = None,
    weight_mode: str = WEIGHT_UNIT,
) -> Network:
    """Uniform random node placement with uniform random channel subsets.

    ``constant_density`` mode derives the range from n; ``fixed_range`` uses
    the given ``range_``. Deterministic for a fixed seed.
    """
    if n < 2:
        raise NetworkError("need at least 2 nodes")
    if channels_per_node > c_total:
        raise NetworkError("channels_per_node exceeds c_total")
    if mode == CONSTANT_DENSITY:
        r = constant_density_range(n)
    elif mode == FIXED_RANGE:
        if range_ is None:
            raise NetworkError("fixed_range mode requires range_")
        r = range_
    else:
        raise NetworkError(f"unknown topology mode {mode!r}")
    rng = random.Random(seed)
    nodes = []
    used = set()
    for i in range(n):
        while True:
            x = snap(rng.uniform(0.0, region_side))
            y = snap(rng.uniform(0.0, region_side))
            pos = (round(x * MICRO), round(y * MICRO))
            if pos not in used:
                used.add(pos)
                break
        channels = ChannelSet.of(rng.sample(range(c_total), channels_per_node))
        nodes.append(Node(i, x, y, channels))
    return build_network(nodes, r, weight_mode, c_total)


@dataclass
class TypePartition:
    """Partition of nodes into classes of identical channel sets."""

    classes: list[tuple[ChannelSet, list[int]]]
    type_of: list[int]

    @property
    def p(self) -> int:
        return len(self.classes)


def compute_type_partition(network: Network) -> TypePartition:
    by_mask: dict[int, list[int]] = {}
    for node in network.nodes:
        by_mask.setdefault(node.channels.mask, []).append(node.id)
    classes = []
    type_of = [0] * network.n
    for mask in sorted(by_mask):
        members = sorted(by_mask[mask])
        for m in members:
            type_of[m] = len(classes)
        classes.append((ChannelSet(mask), members))
    return TypePartition(classes, type_of)


def _fmt_float(value: float) -> str:
    text = f"{value:.6f}".rstrip("0").rstrip(".")
    return text if text else "0"


def serialize_network(network: Network, header_comments: list[str] | None = None) -> str:
    """Canonical line-oriented form; parse(serialize(net)) == net."""
    lines = []
    for comment in header_comments or []:
        lines.append(f"# {comment}")
    lines.append("cdcnet 1")
    lines.append(f"channels {network.c_total}")
    mode = "unit" if network.weight_mode == WEIGHT_UNIT else "euclid"
    lines.append(f"weightmode {mode}")
    if network.range_ is not None:
        lines.append(f"range {_fmt_float(network.range_)}")
    for node in network.nodes:
        lines.append(f"node {node.id} {_fmt_float(node.x)} {_fmt_float(node.y)} {node.channels}")
    if network.range_ is None:
        for link in network.links:
            lines.append(f"link {link.u} {link.v}")
    return "\n".join(lines) + "\n"


def parse_network(text: str) -> Network:
    """Parse the cdcnet text format (see serialize_network)."""
    c_total: int | None = None
    weight_mode: str | None = None
    range_: float | None = None
    node_rows: list[tuple[int, float, float, list[int]]] = []
    link_rows: list[tuple[int, int]] = []
    saw_magic = False
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0]
        try:
            if key == "cdcnet":
                if parts[1] != "1":
                    raise FormatError(f"unsupported format version {parts[1]}")
                saw_magic = True
            elif key == "channels":
                c_total = int(parts[1])
                if not (1 <= c_total <= MAX_CHANNELS):
                    raise FormatError(f"channel capacity {c_total} out of range")
            elif key == "weightmode":
                if parts[1] not in (WEIGHT_UNIT, WEIGHT_EUCLID):
                    raise FormatError(f"unknown weightmode {parts[1]!r}")
                weight_mode = parts[1]
            elif key == "range":
                range_ = float(parts[1])
            elif key == "node":
                chans = [int(c) for c in parts[4].split(",") if c != ""]
                node_rows.append((int(parts[1]), float(parts[2]), float(parts[3]), chans))
            elif key == "link":
                link_rows.append((int(parts[1]), int(parts[2])))
            else:
                raise FormatError(f"unknown directive {key!r}")
        except FormatError:
            raise
        except (IndexError, ValueError) as exc:
            raise FormatError(f"malformed line: {raw!r}") from exc
    if not saw_magic:
        raise FormatError("missing 'cdcnet 1' header")
    if c_total is None or weight_mode is None:
        raise FormatError("missing 'channels' or 'weightmode' header")
    if not node_rows:
        raise FormatError("no nodes")
    nodes = []
    for nid, x, y, chans in node_rows:
        for c in chans:
            if c >= c_total:
                raise FormatError(f"channel {c} exceeds declared capacity {c_total}")
        nodes.append(Node(nid, snap(x), snap(y), ChannelSet.of(chans)))
    try:
        if range_ is not None:
            if link_rows:
                raise FormatError("explicit 'link' lines not allowed in range mode")
            return build_network(nodes, range_, weight_mode, c_total)
        if not link_rows:
            raise FormatError("explicit mode requires 'link' lines (or add 'range')")
        return explicit_network(nodes, link_rows, weight_mode, c_total)
    except FormatError:
        raise
    except NetworkError as exc:
        raise FormatError(str(exc)) from exc
