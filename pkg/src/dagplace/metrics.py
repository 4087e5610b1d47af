"""Embedding evaluation: cost, idealized delay, and contention-aware delay.

The cost of an embedding is the sum of all processing terms plus, for every
computation edge, its weight times the shortest-path distance between the
images of its endpoints.  The idealized delay propagates completion times
through the DAG taking the max over predecessors.  The contention-aware delay
re-plays the same routed paths through a discrete-event simulation in which
each link transmits one intermediate result at a time.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import ValidationError
from .model import ComputationGraph, DistanceMatrix, NetworkGraph, extract_path


@dataclass(frozen=True)
class Embedding:
    """Total map from computation vertices to network nodes.

    ``assignment[w]`` is the network node hosting computation vertex w.
    Sources are pinned to their network sources and the sink to the network
    sink.
    """

    assignment: tuple[int, ...]

    def __getitem__(self, w: int) -> int:
        return self.assignment[w]


@dataclass(frozen=True)
class DelayReport:
    per_vertex: tuple[float, ...]
    total: float


@dataclass(frozen=True)
class LinkUse:
    edge: int  # computation edge index
    tail: int  # network node the data left
    head: int  # network node the data reached
    arrival: float
    departure: float


@dataclass(frozen=True)
class LinkSchedule:
    """Per-link transmission log of the contention simulation, in service order."""

    uses: dict[tuple[int, int], tuple[LinkUse, ...]]  # key (min(u,v), max(u,v))


def validate_embedding(cg: ComputationGraph, net: NetworkGraph, e: Embedding) -> None:
    if len(e.assignment) != cg.p:
        raise ValidationError("embedding must assign every computation vertex")
    for v in e.assignment:
        if not 0 <= v < net.n:
            raise ValidationError(f"embedding target {v} outside the network")
    if net.sink is None or len(net.sources) != len(cg.sources):
        raise ValidationError("network roles do not match the computation graph")
    for i, s in enumerate(cg.sources):
        if e.assignment[s] != net.sources[i]:
            raise ValidationError(f"source {s} must map to network source {net.sources[i]}")
    if e.assignment[cg.sink] != net.sink:
        raise ValidationError("sink must map to the network sink")


def embedding_cost(cg: ComputationGraph, dm: DistanceMatrix, e: Embedding) -> float:
    """Total processing plus weighted shortest-path communication cost."""
    total = 0.0
    for w in range(cg.p):
        total += cg.processing[w, e.assignment[w]]
    d = dm.dist
    for a, b, lam in cg.edges:
        total += lam * d[e.assignment[a], e.assignment[b]]
    return float(total)


def embedding_delay(cg: ComputationGraph, dm: DistanceMatrix, e: Embedding) -> DelayReport:
    """Critical-path delay assuming links never queue.

    Completion of a vertex is the max over its predecessors of their completion
    plus the edge's transmission time, plus the vertex's own processing time.
    Sources complete at time zero.
    """
    order = cg.topological_order()
    ine = cg.in_edges()
    d = dm.dist
    done = [0.0] * cg.p
    src = set(cg.sources)
    for w in order:
        if w in src:
            continue
        arrive = 0.0
        for a, lam in ine[w]:
            arrive = max(arrive, done[a] + lam * d[e.assignment[a], e.assignment[w]])
        done[w] = float(arrive + cg.processing[w, e.assignment[w]])
    return DelayReport(per_vertex=tuple(done), total=done[cg.sink])


def route_edges(cg: ComputationGraph, dm: DistanceMatrix, e: Embedding):
    """Shortest routed path (node sequence) for each computation edge."""
    return [extract_path(dm, e.assignment[a], e.assignment[b]) for a, b, _ in cg.edges]


def max_link_usage(cg: ComputationGraph, dm: DistanceMatrix, e: Embedding) -> int:
    """Largest number of computation edges whose routed path crosses one link."""
    count: dict[tuple[int, int], int] = {}
    for path in route_edges(cg, dm, e):
        for a, b in zip(path, path[1:]):
            key = (min(a, b), max(a, b))
            count[key] = count.get(key, 0) + 1
    return max(count.values(), default=0)


_FINISH, _ARRIVE = 0, 1


def capacity_aware_delay(
    cg: ComputationGraph,
    net: NetworkGraph,
    dm: DistanceMatrix,
    e: Embedding,
    *,
    per_direction: bool = False,
) -> tuple[DelayReport, LinkSchedule]:
    """Delay when every link carries one intermediate result at a time.

    Each computation edge is routed along its shortest path and queues at each
    link behind earlier arrivals (ties broken by computation-edge index).  By
    default the two directions of a link share one FIFO; ``per_direction``
    gives each direction its own.  A vertex fires once the data of all its
    incoming edges has fully arrived, after its processing time.
    """
    paths = route_edges(cg, dm, e)
    weight = net.edge_weight()

    def link_key(a: int, b: int):
        base = (min(a, b), max(a, b))
        return base + ((0 if a < b else 1,) if per_direction else ())

    ine = cg.in_edges()
    pending = [len(ine[w]) for w in range(cg.p)]
    latest = [0.0] * cg.p
    fired = [False] * cg.p
    fire_time = [0.0] * cg.p
    segment = [0] * cg.q  # index of the path segment each edge sits at

    waiting: dict[tuple, list[tuple[float, int]]] = {}
    busy: dict[tuple, bool] = {}
    log: dict[tuple[int, int], list[LinkUse]] = {}

    events: list[tuple[float, int, tuple, int]] = []  # (time, kind, link, edge)

    def fire(w: int, t: float) -> None:
        fired[w] = True
        fire_time[w] = float(t)
        for idx, (a, b, _) in enumerate(cg.edges):
            if a != w:
                continue
            if len(paths[idx]) < 2:
                deliver(idx, t)
            else:
                key = link_key(paths[idx][0], paths[idx][1])
                heapq.heappush(events, (t, _ARRIVE, key, idx))

    def deliver(idx: int, t: float) -> None:
        head = cg.edges[idx][1]
        latest[head] = max(latest[head], t)
        pending[head] -= 1
        if pending[head] == 0 and not fired[head]:
            fire(head, latest[head] + cg.processing[head, e.assignment[head]])

    def start_next(key: tuple, now: float) -> None:
        q = waiting.get(key)
        if busy.get(key) or not q:
            return
        q.sort()
        arrival, idx = q.pop(0)
        busy[key] = True
        path = paths[idx]
        a, b = path[segment[idx]], path[segment[idx] + 1]
        span = weight[(min(a, b), max(a, b))] * cg.edges[idx][2]
        depart = max(now, arrival) + span
        log.setdefault((min(a, b), max(a, b)), []).append(
            LinkUse(edge=idx, tail=a, head=b, arrival=arrival, departure=depart)
        )
        heapq.heappush(events, (depart, _FINISH, key, idx))

    src = set(cg.sources)
    for w in cg.topological_order():
        if w in src:
            fire(w, 0.0)
        elif pending[w] == 0 and not fired[w]:
            fire(w, cg.processing[w, e.assignment[w]])

    while events:
        t, kind, key, idx = heapq.heappop(events)
        if kind == _ARRIVE:
            waiting.setdefault(key, []).append((t, idx))
            start_next(key, t)
        else:
            busy[key] = False
            segment[idx] += 1
            path = paths[idx]
            if segment[idx] < len(path) - 1:
                nxt = link_key(path[segment[idx]], path[segment[idx] + 1])
                heapq.heappush(events, (t, _ARRIVE, nxt, idx))
            else:
                deliver(idx, t)
            start_next(key, t)

    report = DelayReport(per_vertex=tuple(float(t) for t in fire_time),
                         total=float(fire_time[cg.sink]))
    schedule = LinkSchedule(uses={k: tuple(v) for k, v in log.items()})
    return report, schedule
