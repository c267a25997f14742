"""Message-passing execution of the CDC path search.

One process per expanded-graph sub-node, holding only local state (labels,
distances, examined flags, outermost-base id, parents) plus per-neighbour
knowledge learned from delivered messages. A deterministic tick scheduler
delivers each message one tick after it is sent, in FIFO or seeded-permuted
order within a tick.

Round structure: the root (source process) floods the alternating tree with
an ANNOUNCE_WINNER round-start; every labeled process resolves its local
minimum candidate (REQUEST_B/REPLY_B probes settle cross-blossom checks),
then reports (edge, channel, value) up its first-label parent with
REPORT_MIN once all children have reported, and the root accepts the global
minimum. Event processing (GROW_NOTIFY bookkeeping, or BLOSSOM_WALK toward
the root from both bridge endpoints plus a BLOSSOM_INFORM flood from the
discovered base) completes before the next round starts, so reports always
reflect a fully applied event history and the accepted decision sequence is
identical to the centralized search regardless of delivery order.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import NamedTuple

from .expand import CDCPath, ExpandedGraph, Matching, contract_path, expand
from .model import Network
from .search import (
    FORM_S_TO_S,
    FORM_TO_F,
    LABEL_F,
    LABEL_S,
    LABEL_T,
    PHASE_AUGMENT,
    PHASE_BLOSSOM,
    PHASE_GROW,
    InvariantError,
    SearchState,
    SearchTrace,
    extract_path,
)

REQUEST_B = 0
REPLY_B = 1
REPORT_MIN = 2
ANNOUNCE_WINNER = 3
GROW_NOTIFY = 4
BLOSSOM_WALK = 5
BLOSSOM_INFORM = 6

KIND_NAMES = (
    "REQUEST_B",
    "REPLY_B",
    "REPORT_MIN",
    "ANNOUNCE_WINNER",
    "GROW_NOTIFY",
    "BLOSSOM_WALK",
    "BLOSSOM_INFORM",
)

# ANNOUNCE_WINNER subtypes
ANN_ROUND = 0
ANN_GROW = 1
ANN_BLOSSOM = 2  # and 3: side encoded as f - ANN_BLOSSOM

# GROW_NOTIFY subtypes
GN_STATUS = 0
GN_MAKE_T = 1
GN_MAKE_S = 2
GN_DONE = 3
GN_TERMINATE = 4

# BLOSSOM_INFORM subtypes; the walk side (0, 1, or 2 for the base's own
# member flood) rides in the upper bits of f, since the two walk trails can
# pass through a shared vertex and must be tracked independently.
BI_TRAIL = 0
BI_MEMBER = 1
BI_ACK = 2
BI_REGISTER = 3
BI_TRAIL_DONE = 4
BI_DONE = 5
BI_SIDE_SHIFT = 3
SIDE_BASE = 2

STATUS_S = 1
STATUS_T = 2

PAYLOAD_FIELDS = 4  # a, b, c plus one weight; framing adds kind/src/dst/round/f


class ProtocolMessage(NamedTuple):
    """Fixed-size message: framing plus at most 3 ids and 1 weight payload."""

    kind: int
    src: int
    dst: int
    round: int
    a: int = -1
    b: int = -1
    c: int = -1
    w: int = -1
    f: int = 0


@dataclass
class SchedulerConfig:
    seed: int = 0
    policy: str = "fifo"  # or "random": permute each tick's delivery batch

    def __post_init__(self) -> None:
        if self.policy not in ("fifo", "random"):
            raise ValueError(f"unknown scheduler policy {self.policy!r}")


@dataclass
class MessageLog:
    """Monotone per-kind counters plus run context for ratio reporting."""

    n: int
    n_exp: int
    c_total: int
    counts: list[int] = field(default_factory=lambda: [0] * len(KIND_NAMES))
    round_marks: list[int] = field(default_factory=list)
    blossoms: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts)

    def by_name(self) -> dict[str, int]:
        return dict(zip(KIND_NAMES, self.counts))

    def per_round(self) -> list[int]:
        marks = self.round_marks + [self.total]
        return [marks[i + 1] - marks[i] for i in range(len(marks) - 1)]


def count_report(log: MessageLog) -> tuple[int, int, int, int, int, float]:
    """Summary row (n, n_exp, C, messages, blossom_count, messages/n_exp^2)."""
    ratio = log.total / (log.n_exp ** 2) if log.n_exp else 0.0
    return (log.n, log.n_exp, log.c_total, log.total, log.blossoms, ratio)


class _Engine:
    """Tick scheduler: a message sent at tick t is delivered at tick t+1."""

    def __init__(self, config: SchedulerConfig, log: MessageLog) -> None:
        self.procs: list[_Proc] = []
        self.log = log
        self.pending: list[ProtocolMessage] = []
        self.policy = config.policy
        self.rng = random.Random(config.seed)
        self.halted = False

    def send(self, msg: ProtocolMessage) -> None:
        self.log.counts[msg.kind] += 1
        self.pending.append(msg)

    def run(self) -> None:
        ticks = 0
        while self.pending and not self.halted:
            batch = self.pending
            self.pending = []
            if self.policy == "random":
                self.rng.shuffle(batch)
            for msg in batch:
                self.procs[msg.dst].handle(msg)
                if self.halted:
                    break
            ticks += 1
            if ticks > 10 ** 7:
                raise InvariantError("scheduler failed to quiesce")
        if not self.halted:
            raise InvariantError("scheduler deadlock: queue drained before termination")


class _Root:
    """Coordinator bookkeeping attached to the source process."""

    __slots__ = ("round", "trace", "terminated", "augment_event")

    def __init__(self) -> None:
        self.round = 0
        self.trace = SearchTrace()
        self.terminated = False
        self.augment_event: tuple[int, int, int] | None = None


class _Proc:
    """One sub-node's process; reads no state but its own."""

    __slots__ = (
        "vid", "engine", "adj", "mate", "s_id", "d_id",
        "first_label", "ds2", "dt2", "ps", "pt", "pt_edge",
        "bridge", "b_self", "members",
        "nbr_status", "nbr_ds2", "examined", "heap", "b_cache",
        "parent", "children", "cur_round", "reports_pending", "best",
        "resolved", "probing", "reported",
        "walk_marks", "walk_prev", "inform", "root",
    )

    def __init__(self, vid: int, engine: _Engine, adj, mate: int | None,
                 s_id: int, d_id: int) -> None:
        self.vid = vid
        self.engine = engine
        self.adj = adj                      # tuples (edge_idx, nbr, w2, chan)
        self.mate = mate
        self.s_id = s_id
        self.d_id = d_id
        self.first_label = LABEL_F
        self.ds2: int | None = None
        self.dt2: int | None = None
        self.ps: int | None = None
        self.pt: int | None = None
        self.pt_edge: int | None = None
        self.bridge: tuple[int, int] | None = None
        self.b_self = vid
        self.members: list[int] = [vid]     # flat membership while a base
        self.nbr_status: dict[int, int] = {}
        self.nbr_ds2: dict[int, int] = {}
        self.examined: set[int] = set()
        self.heap: list = []
        self.b_cache: dict[int, int] = {}
        self.parent: int | None = None
        self.children: list[int] = []
        self.cur_round = -1
        self.reports_pending = 0
        self.best = None                    # (val2, a, b, chan, u, v, form)
        self.resolved = False
        self.probing: int | None = None
        self.reported = False
        self.walk_marks: dict[int, tuple[int, int]] = {}   # round -> (side, prev)
        self.walk_prev: dict[int, int] = {}
        self.inform: dict | None = None
        self.root: _Root | None = None

    # -- plumbing -----------------------------------------------------------

    def send(self, kind: int, dst: int, *, a: int = -1, b: int = -1, c: int = -1,
             w: int = -1, f: int = 0, rnd: int | None = None) -> None:
        rnd = self.cur_round if rnd is None else rnd
        self.engine.send(ProtocolMessage(kind, self.vid, dst, rnd, a, b, c, w, f))

    def handle(self, msg: ProtocolMessage) -> None:
        kind = msg.kind
        if kind == REPORT_MIN:
            self.on_report(msg)
        elif kind == ANNOUNCE_WINNER:
            self.on_announce(msg)
        elif kind == GROW_NOTIFY:
            self.on_grow_notify(msg)
        elif kind == REQUEST_B:
            self.send(REPLY_B, msg.src, a=self.b_self, rnd=msg.round)
        elif kind == REPLY_B:
            self.on_reply_b(msg)
        elif kind == BLOSSOM_WALK:
            self.on_walk(msg)
        elif kind == BLOSSOM_INFORM:
            self.on_inform(msg)

    # -- candidate bookkeeping ------------------------------------------------

    def in_s(self) -> bool:
        return self.ds2 is not None

    def push_candidates(self) -> None:
        """Queue all edges against locally known neighbour statuses."""
        ds2 = self.ds2
        vid = self.vid
        for edge_idx, nbr, w2, chan in self.adj:
            status = self.nbr_status.get(nbr)
            if status == STATUS_S:
                val2 = (ds2 + self.nbr_ds2[nbr] + w2) // 2
                a, b = (vid, nbr) if vid < nbr else (nbr, vid)
                heapq.heappush(self.heap, (val2, a, b, chan, edge_idx, nbr, FORM_S_TO_S))
            elif status is None:
                a, b = (vid, nbr) if vid < nbr else (nbr, vid)
                heapq.heappush(self.heap, (ds2 + w2, a, b, chan, edge_idx, nbr, FORM_TO_F))

    def push_one(self, nbr: int) -> None:
        """A neighbour just gained an S label; queue the S-S candidate."""
        for edge_idx, v, w2, chan in self.adj:
            if v != nbr:
                continue
            val2 = (self.ds2 + self.nbr_ds2[nbr] + w2) // 2
            a, b = (self.vid, nbr) if self.vid < nbr else (nbr, self.vid)
            heapq.heappush(self.heap, (val2, a, b, chan, edge_idx, nbr, FORM_S_TO_S))

    def notify_neighbors(self, status: int, dvalue: int) -> None:
        for _edge, nbr, _w2, _chan in self.adj:
            self.send(GROW_NOTIFY, nbr, a=self.vid, b=status, w=dvalue, f=GN_STATUS)

    def gain_s(self, ds2: int, ps: int | None) -> None:
        self.ds2 = ds2
        self.ps = ps
        if self.first_label == LABEL_F:
            self.first_label = LABEL_S
        self.push_candidates()
        self.notify_neighbors(STATUS_S, ds2)

    # -- rounds: start, resolve, report ---------------------------------------

    def start_round(self) -> None:
        """Root only: open the next round and flood the tree."""
        root = self.root
        root.round += 1
        self.cur_round = root.round
        self.begin_round()

    def begin_round(self) -> None:
        for child in self.children:
            self.send(ANNOUNCE_WINNER, child, f=ANN_ROUND)
        self.reports_pending = len(self.children)
        self.best = None
        self.resolved = False
        self.probing = None
        self.reported = False
        self.resolve_step()

    def on_announce(self, msg: ProtocolMessage) -> None:
        if msg.f == ANN_ROUND:
            self.cur_round = msg.round
            self.begin_round()
        elif msg.f == ANN_GROW:
            self.cur_round = msg.round
            self.do_grow(msg.a, msg.c, msg.w)
        else:
            self.cur_round = msg.round
            side = msg.f - ANN_BLOSSOM
            self.examined.add(msg.b if side == 0 else msg.a)
            self.start_walk(side, msg.a, msg.b, msg.w, msg.round)

    def resolve_step(self) -> None:
        """Settle the local minimum candidate, probing bases as needed."""
        heap = self.heap
        while heap:
            _val2, _a, _b, _chan, _edge, v, form = heap[0]
            if v in self.examined:
                heapq.heappop(heap)
                continue
            if form == FORM_TO_F:
                if self.nbr_status.get(v) is not None:
                    heapq.heappop(heap)  # target is labeled now; entry is stale
                    continue
                break
            cached = self.b_cache.get(v)
            if cached is None:
                self.probing = v
                self.send(REQUEST_B, v)
                return  # resolution resumes on the REPLY_B
            if cached == self.b_self:
                heapq.heappop(heap)
                self.examined.add(v)
                continue
            break
        self.resolved = True
        if self.in_s() and heap:
            val2, a, b, chan, _edge, v, form = heap[0]
            cand = (val2, a, b, chan, self.vid, v, form)
            # merge: children may already have reported during the probes
            if self.best is None or cand[:4] < self.best[:4]:
                self.best = cand
        self.maybe_report()

    def on_reply_b(self, msg: ProtocolMessage) -> None:
        if msg.src != self.probing:
            return  # stale reply
        self.probing = None
        self.b_cache[msg.src] = msg.a
        self.resolve_step()

    def on_report(self, msg: ProtocolMessage) -> None:
        if msg.round != self.cur_round:
            raise InvariantError("report delivered outside its round")
        if msg.f != 0:
            cand = (msg.w, min(msg.a, msg.b), max(msg.a, msg.b), msg.c,
                    msg.a, msg.b, msg.f - 1)
            if self.best is None or cand[:4] < self.best[:4]:
                self.best = cand
        self.reports_pending -= 1
        self.maybe_report()

    def maybe_report(self) -> None:
        if not self.resolved or self.reports_pending > 0 or self.reported:
            return
        self.reported = True
        if self.root is not None:
            _decide(self)
        elif self.best is None:
            self.send(REPORT_MIN, self.parent, f=0)
        else:
            val2, _a, _b, chan, u, v, form = self.best
            self.send(REPORT_MIN, self.parent, a=u, b=v, c=chan, w=val2, f=1 + form)

    # -- growth ---------------------------------------------------------------

    def do_grow(self, v: int, chan: int, val2: int) -> None:
        """This process's candidate won; attach v to the tree below it."""
        self.examined.add(v)
        self.children.append(v)
        edge_idx = next(e for e, nbr, _w2, c in self.adj if nbr == v and c == chan)
        self.send(GROW_NOTIFY, v, a=edge_idx, w=val2, f=GN_MAKE_T)

    def on_grow_notify(self, msg: ProtocolMessage) -> None:
        f = msg.f
        if f == GN_STATUS:
            vertex, status, dvalue = msg.a, msg.b, msg.w
            self.nbr_status[vertex] = status
            if status == STATUS_S:
                self.nbr_ds2[vertex] = dvalue
                if self.in_s():
                    self.push_one(vertex)
        elif f == GN_MAKE_T:
            self.cur_round = msg.round
            self.examined.add(msg.src)
            self.dt2 = msg.w
            self.pt = msg.src
            self.pt_edge = msg.a
            self.first_label = LABEL_T
            self.parent = msg.src
            if self.vid == self.d_id:
                self.send(GROW_NOTIFY, self.s_id, f=GN_TERMINATE)
                return
            self.notify_neighbors(STATUS_T, msg.w)
            self.children.append(self.mate)
            self.send(GROW_NOTIFY, self.mate, w=msg.w, f=GN_MAKE_S)
        elif f == GN_MAKE_S:
            self.cur_round = msg.round
            self.parent = msg.src
            self.gain_s(msg.w, msg.src)
            self.send(GROW_NOTIFY, self.s_id, f=GN_DONE)
        elif f == GN_DONE:
            self.start_round()
        elif f == GN_TERMINATE:
            self.root.terminated = True
            self.engine.halted = True

    # -- blossom discovery ------------------------------------------------------
    #
    # A walk front hops base -> mate(base) -> growth parent -> that vertex's
    # outermost base, repeating until it lands on an atom the other front
    # already marked. The hop stage rides in the payload's c field.

    WALK_ATOM = 0
    WALK_VIA_MATE = 1
    WALK_VIA_PT = 2

    def start_walk(self, side: int, same: int, other: int, val2: int, rnd: int) -> None:
        if self.b_self == self.vid:
            self.walk_arrive(side, -1, same, other, val2, rnd)
        else:
            self.send(BLOSSOM_WALK, self.b_self, a=same, b=other, w=val2,
                      c=self.WALK_ATOM, f=side, rnd=rnd)

    def on_walk(self, msg: ProtocolMessage) -> None:
        if self.root is not None and msg.round != self.root.round:
            return  # overshooting front from an already-resolved discovery
        if self.cur_round < msg.round:
            self.cur_round = msg.round
        stage = msg.c
        if stage == self.WALK_ATOM:
            self.walk_arrive(msg.f, msg.src, msg.a, msg.b, msg.w, msg.round)
        elif stage == self.WALK_VIA_MATE:
            # this is the T-vertex above an atom; continue to its growth parent
            self.walk_prev[msg.round] = msg.src
            if self.pt is None:
                raise InvariantError("walk reached a T-vertex without a parent")
            self.send(BLOSSOM_WALK, self.pt, a=msg.a, b=msg.b, w=msg.w,
                      c=self.WALK_VIA_PT, f=msg.f, rnd=msg.round)
        else:
            # growth parent, possibly an interior blossom member
            self.walk_prev[msg.round] = msg.src
            if self.b_self == self.vid:
                self.walk_arrive(msg.f, msg.src, msg.a, msg.b, msg.w, msg.round)
            else:
                self.send(BLOSSOM_WALK, self.b_self, a=msg.a, b=msg.b, w=msg.w,
                          c=self.WALK_ATOM, f=msg.f, rnd=msg.round)

    def walk_arrive(self, side: int, prev: int, same: int, other: int,
                    val2: int, rnd: int) -> None:
        mark = self.walk_marks.get(rnd)
        if mark is not None and mark[0] != side:
            self.become_base(rnd, same, other, val2, prev, side, mark[1])
            return
        self.walk_marks[rnd] = (side, prev)
        self.walk_prev[rnd] = prev
        if self.mate is None:
            return  # the source atom: hold until the other front arrives
        self.send(BLOSSOM_WALK, self.mate, a=same, b=other, w=val2,
                  c=self.WALK_VIA_MATE, f=side, rnd=rnd)

    def become_base(self, rnd: int, same: int, other: int, val2: int,
                    my_prev: int, my_side: int, other_prev: int) -> None:
        """The first common atom of the two walks: inform the new blossom."""
        self.b_cache.clear()
        own = [m for m in self.members if m != self.vid]
        state = {
            "round": rnd, "registered": set(self.members) | {self.vid},
            "acks": len(own), "downstream": 0, "base": True, "val2": val2,
        }
        # Existing members keep their labels and base id but must drop their
        # cross-blossom caches, since the blossom around them just grew.
        for m in own:
            self.send(BLOSSOM_INFORM, m, a=self.vid, b=same, c=other, w=val2,
                      f=BI_MEMBER, rnd=rnd)
        for prev, side in ((my_prev, my_side), (other_prev, 1 - my_side)):
            if prev < 0:
                continue
            state["downstream"] += 1
            a_ep = same if side == 0 else other
            b_ep = other if side == 0 else same
            self.send(BLOSSOM_INFORM, prev, a=self.vid, b=a_ep, c=b_ep, w=val2,
                      f=BI_TRAIL, rnd=rnd)
        self.inform = state
        self.maybe_inform_done()

    def apply_membership(self, base: int, same: int, other: int, val2: int,
                         rnd: int) -> None:
        """Join a blossom: update the base id, gain any missing label."""
        self.b_cache.clear()
        if self.b_self == base and base != self.vid:
            return  # duplicate inform
        self.b_self = base
        if self.ds2 is None:
            self.ds2 = 2 * val2 - self.dt2
            self.ps = self.mate
            self.push_candidates()
            self.notify_neighbors(STATUS_S, self.ds2)
        elif self.dt2 is None and base != self.vid:
            self.dt2 = 2 * val2 - self.ds2
            if self.pt is None and self.bridge is None:
                self.bridge = (same, other)
        if base != self.vid:
            self.send(BLOSSOM_INFORM, base, f=BI_REGISTER, rnd=rnd)

    def on_inform(self, msg: ProtocolMessage) -> None:
        f = msg.f
        if f == BI_TRAIL:
            base, same, other, val2 = msg.a, msg.b, msg.c, msg.w
            relay = [m for m in self.members if m != self.vid]
            self.apply_membership(base, same, other, val2, msg.round)
            state = {"round": msg.round, "done_to": msg.src,
                     "acks": len(relay), "downstream": 0, "base": False}
            for m in relay:
                self.send(BLOSSOM_INFORM, m, a=base, b=same, c=other, w=val2,
                          f=BI_MEMBER, rnd=msg.round)
            prev = self.walk_prev.get(msg.round, -1)
            if prev >= 0:
                state["downstream"] = 1
                self.send(BLOSSOM_INFORM, prev, a=base, b=same, c=other, w=val2,
                          f=BI_TRAIL, rnd=msg.round)
            self.inform = state
            self.maybe_inform_done()
        elif f == BI_MEMBER:
            self.apply_membership(msg.a, msg.b, msg.c, msg.w, msg.round)
            self.send(BLOSSOM_INFORM, msg.src, f=BI_ACK, rnd=msg.round)
        elif f == BI_ACK:
            self.inform["acks"] -= 1
            self.maybe_inform_done()
        elif f == BI_TRAIL_DONE:
            self.inform["downstream"] -= 1
            self.maybe_inform_done()
        elif f == BI_REGISTER:
            self.inform["registered"].add(msg.src)
        elif f == BI_DONE:
            self.start_round()

    def maybe_inform_done(self) -> None:
        state = self.inform
        if state is None or state["acks"] > 0 or state["downstream"] > 0:
            return
        self.inform = None
        if not state["base"]:
            self.send(BLOSSOM_INFORM, state["done_to"], f=BI_TRAIL_DONE,
                      rnd=state["round"])
            return
        self.members = sorted(state["registered"])
        self.engine.log.blossoms += 1
        if self.root is not None:
            self.start_round()
        else:
            self.send(BLOSSOM_INFORM, self.s_id, f=BI_DONE, rnd=state["round"])


def _decide(root_proc: _Proc) -> None:
    """The root accepts the round's global minimum and starts its processing."""
    root = root_proc.root
    log = root_proc.engine.log
    log.round_marks.append(log.total)
    best = root_proc.best
    if best is None:
        root.trace.add_nopath()
        root.terminated = True
        root_proc.engine.halted = True
        return
    val2, _a, _b, chan, u, v, form = best
    if form == FORM_TO_F:
        if v == root_proc.d_id:
            root.trace.add(PHASE_AUGMENT, u, v, val2)
            root.augment_event = (u, v, val2)
        else:
            root.trace.add(PHASE_GROW, u, v, val2)
        if u == root_proc.vid:
            root_proc.do_grow(v, chan, val2)
        else:
            root_proc.send(ANNOUNCE_WINNER, u, a=v, c=chan, w=val2, f=ANN_GROW)
    else:
        root.trace.add(PHASE_BLOSSOM, u, v, val2)
        for side, endpoint in enumerate((u, v)):
            if endpoint == root_proc.vid:
                root_proc.examined.add(v if side == 0 else u)
                root_proc.start_walk(side, u, v, val2, root.round)
            else:
                root_proc.send(ANNOUNCE_WINNER, endpoint, a=u, b=v, w=val2,
                               f=ANN_BLOSSOM + side)


@dataclass
class DistResult:
    path: CDCPath | None
    log: MessageLog
    trace: SearchTrace
    n_exp: int
    rounds: int

    @property
    def found(self) -> bool:
        return self.path is not None

    @property
    def blossom_count(self) -> int:
        return self.log.blossoms


def run_distributed(
    network: Network,
    s: int,
    d: int,
    scheduler: SchedulerConfig | None = None,
    reduced: bool = True,
) -> DistResult:
    """Execute the protocol; returns the path, message log, and trace."""
    scheduler = scheduler or SchedulerConfig()
    if s == d:
        return DistResult(CDCPath((), 0), MessageLog(network.n, 0, network.c_total),
                          SearchTrace(), 0, 0)
    expanded, matching = expand(network, s, d, reduced=reduced)
    log = MessageLog(network.n, expanded.n_exp, network.c_total)
    engine = _Engine(scheduler, log)
    for sub in expanded.subnodes:
        adj = tuple(
            (ei, expanded.edges[ei].other(sub.id), 2 * expanded.edges[ei].weight,
             expanded.edges[ei].channel)
            for ei in expanded.adj[sub.id]
        )
        engine.procs.append(
            _Proc(sub.id, engine, adj, matching.mate[sub.id], expanded.s, expanded.d)
        )
    root = _Root()
    src = engine.procs[expanded.s]
    src.root = root
    src.first_label = LABEL_S
    src.ds2 = 0
    src.push_candidates()
    src.start_round()
    engine.run()

    path = None
    if root.augment_event is not None:
        state = _gather_state(expanded, matching, engine.procs, root)
        verts, edges = extract_path(state, expanded, expanded.d)
        path = contract_path(expanded, verts, edges)
        if 2 * path.total_weight != root.augment_event[2]:
            raise InvariantError("distributed path weight disagrees with its trace")
    return DistResult(path, log, root.trace, expanded.n_exp, root.round)


def _gather_state(
    expanded: ExpandedGraph, matching: Matching, procs: list[_Proc], root: _Root
) -> SearchState:
    """Assemble per-process final states for path extraction.

    Runs only after termination: during the protocol no process reads
    another's state except through a delivered message.
    """
    state = SearchState(
        expanded=expanded,
        matching=matching,
        label=[p.first_label for p in procs],
        ds2=[p.ds2 for p in procs],
        dt2=[p.dt2 for p in procs],
        ps=[p.ps for p in procs],
        pt=[p.pt for p in procs],
        pt_edge=[p.pt_edge for p in procs],
        b=[p.b_self for p in procs],
    )
    state.delta2 = root.augment_event[2]
    for p in procs:
        if p.bridge is not None:
            state.bridge[p.vid] = p.bridge
            same, other = p.bridge
            cands = expanded.edge_between(same, other)
            if not cands:
                raise InvariantError("stored bridge endpoints are not adjacent")
            state.bridge_edge[p.vid] = cands[0]
    return state
