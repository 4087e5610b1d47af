"""Graph data model: communication networks, computation DAGs, shortest paths.

Node ids are dense integers 0..n-1 (resp. 0..p-1).  Human-readable names are
handled by the CLI layer.  All types are immutable after construction and all
operations here are pure functions.
"""

from __future__ import annotations

import heapq
import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CyclicGraph,
    DisconnectedGraph,
    DuplicateEdge,
    NegativeWeight,
    NotLayered,
    SelfLoop,
    SinkNotLast,
    UnknownNodeId,
    ValidationError,
)


@dataclass(frozen=True)
class NetworkGraph:
    """Undirected weighted connected network with optional source/sink roles.

    Edge weights are transmission times (or costs) of one unit of data.
    ``sources`` may be empty and ``sink`` None for a bare topology whose roles
    are assigned later; solvers require both to be set.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...]  # (u, v, weight) with u < v
    sources: tuple[int, ...] = ()
    sink: int | None = None

    @property
    def k(self) -> int:
        return len(self.sources)

    def adjacency(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return tuple(tuple(sorted(a)) for a in adj)

    def edge_weight(self) -> dict[tuple[int, int], float]:
        return {(u, v): w for u, v, w in self.edges}

    def with_roles(self, sources, sink) -> "NetworkGraph":
        return build_network(self.n, self.edges, sources, sink)


@dataclass(frozen=True)
class ComputationGraph:
    """Weighted computation DAG with a per-(vertex, network node) processing table.

    ``edges`` are directed (tail, head, weight) triples; the weight is the
    size of the intermediate result flowing along the edge.  ``processing``
    has shape (p, n) and is zero on source rows by convention.
    """

    p: int
    edges: tuple[tuple[int, int, float], ...]
    sources: tuple[int, ...]
    sink: int
    processing: np.ndarray  # (p, n); treated as read-only
    is_dag: bool = True
    _topo: tuple[int, ...] | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.sources)

    @property
    def q(self) -> int:
        return len(self.edges)

    def predecessors(self) -> tuple[tuple[int, ...], ...]:
        pre: list[list[int]] = [[] for _ in range(self.p)]
        for a, b, _ in self.edges:
            pre[b].append(a)
        return tuple(tuple(x) for x in pre)

    def successors(self) -> tuple[tuple[int, ...], ...]:
        suc: list[list[int]] = [[] for _ in range(self.p)]
        for a, b, _ in self.edges:
            suc[a].append(b)
        return tuple(tuple(x) for x in suc)

    def topological_order(self) -> tuple[int, ...]:
        if self._topo is None:
            raise CyclicGraph("computation graph is not acyclic")
        return self._topo

    def in_edges(self) -> tuple[tuple[tuple[int, float], ...], ...]:
        ine: list[list[tuple[int, float]]] = [[] for _ in range(self.p)]
        for a, b, lam in self.edges:
            ine[b].append((a, lam))
        return tuple(tuple(x) for x in ine)


@dataclass(frozen=True)
class DistanceMatrix:
    """All-pairs shortest path weights plus predecessor table.

    ``pred[u, j]`` is the predecessor of j on the chosen shortest u->j path
    (``pred[u, u] == u``).  Ties between equal-weight paths are broken toward
    the lexicographically smallest node sequence, so path extraction is
    deterministic.
    """

    dist: np.ndarray  # (n, n) float
    pred: np.ndarray  # (n, n) int

    @property
    def n(self) -> int:
        return self.dist.shape[0]


@dataclass(frozen=True)
class LayeredStructure:
    """Layer labelling of a computation graph.

    ``layer[w]`` is in 1..r; every edge stays within a layer or crosses to the
    next one, all sources sit at layer 1 and the sink is alone at layer r.
    """

    layer: tuple[int, ...]
    r: int
    k: int

    def layers(self) -> tuple[tuple[int, ...], ...]:
        """Vertices of each layer, ordered by vertex id; index 0 is layer 1."""
        out: list[list[int]] = [[] for _ in range(self.r)]
        for w, l in enumerate(self.layer):
            out[l - 1].append(w)
        return tuple(tuple(x) for x in out)


def _components(n: int, edges) -> list[set[int]]:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v, _ in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        comp = {s}
        seen[s] = True
        stack = [s]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    comp.add(y)
                    stack.append(y)
        comps.append(comp)
    return comps


def build_network(n, edges, sources=(), sink=None, *, allow_sink_source=False) -> NetworkGraph:
    """Validate and construct a NetworkGraph.

    Raises DisconnectedGraph, NegativeWeight, DuplicateEdge, UnknownNodeId,
    SelfLoop or ValidationError on malformed input.  ``allow_sink_source``
    permits the sink to coincide with a source (rejected by default).
    """
    if n < 1:
        raise ValidationError("network needs at least one node")
    norm = []
    seen_pairs = set()
    for u, v, w in edges:
        u, v, w = int(u), int(v), float(w)
        if not (0 <= u < n and 0 <= v < n):
            raise UnknownNodeId(f"edge ({u},{v}) references a node outside 0..{n - 1}")
        if u == v:
            raise SelfLoop(f"self-loop at node {u}")
        if w < 0:
            raise NegativeWeight(f"edge ({u},{v}) has negative weight {w}")
        pair = (min(u, v), max(u, v))
        if pair in seen_pairs:
            raise DuplicateEdge(f"more than one edge between {pair[0]} and {pair[1]}")
        seen_pairs.add(pair)
        norm.append((pair[0], pair[1], w))
    comps = _components(n, norm)
    if len(comps) > 1:
        raise DisconnectedGraph(comps)
    sources = tuple(int(s) for s in sources)
    for s in sources:
        if not 0 <= s < n:
            raise UnknownNodeId(f"source {s} outside 0..{n - 1}")
    if len(set(sources)) != len(sources):
        raise ValidationError("sources must be pairwise distinct")
    if sink is not None:
        sink = int(sink)
        if not 0 <= sink < n:
            raise UnknownNodeId(f"sink {sink} outside 0..{n - 1}")
        if sink in sources and not allow_sink_source:
            raise ValidationError(
                "sink coincides with a source (pass allow_sink_source=True to permit)"
            )
    return NetworkGraph(n=n, edges=tuple(sorted(norm)), sources=sources, sink=sink)


def _toposort(p: int, edges) -> tuple[int, ...] | None:
    indeg = [0] * p
    suc: list[list[int]] = [[] for _ in range(p)]
    for a, b, _ in edges:
        indeg[b] += 1
        suc[a].append(b)
    ready = [v for v in range(p) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in suc[v]:
            indeg[w] -= 1
            if indeg[w] == 0:
                heapq.heappush(ready, w)
    return tuple(order) if len(order) == p else None


def build_computation(
    p,
    edges,
    sources,
    sink,
    processing,
    *,
    require_dag=True,
    allow_nonzero_source_processing=False,
) -> ComputationGraph:
    """Validate and construct a ComputationGraph.

    ``processing`` is array-like of shape (p, n_network).  Source rows must be
    zero unless ``allow_nonzero_source_processing``.
    ``require_dag=False`` admits cyclic schemas; only cost-based operations
    accept those.
    """
    if p < 2:
        raise ValidationError("computation graph needs at least a source and a sink")
    sources = tuple(int(s) for s in sources)
    sink = int(sink)
    if len(sources) != len(set(sources)):
        raise ValidationError("computation sources must be distinct")
    if not sources:
        raise ValidationError("computation graph needs at least one source")
    for s in sources:
        if not 0 <= s < p:
            raise UnknownNodeId(f"source {s} outside 0..{p - 1}")
    if not 0 <= sink < p:
        raise UnknownNodeId(f"sink {sink} outside 0..{p - 1}")
    if sink in sources:
        raise ValidationError("computation sink cannot be a source")

    norm = []
    seen = set()
    indeg = [0] * p
    outdeg = [0] * p
    for a, b, lam in edges:
        a, b, lam = int(a), int(b), float(lam)
        if not (0 <= a < p and 0 <= b < p):
            raise UnknownNodeId(f"edge ({a},{b}) references a vertex outside 0..{p - 1}")
        if a == b:
            raise SelfLoop(f"self-loop at computation vertex {a}")
        if lam < 0:
            raise NegativeWeight(f"edge ({a},{b}) has negative weight {lam}")
        if (a, b) in seen:
            raise DuplicateEdge(f"more than one edge ({a},{b})")
        seen.add((a, b))
        indeg[b] += 1
        outdeg[a] += 1
        norm.append((a, b, lam))
    for s in sources:
        if indeg[s] != 0:
            raise ValidationError(f"source {s} has incoming edges")
    if outdeg[sink] != 0:
        raise ValidationError("sink has outgoing edges")
    for v in range(p):
        if indeg[v] == 0 and v not in sources and v != sink:
            warnings.warn(f"vertex {v} has no inputs but is not a declared source")

    topo = _toposort(p, norm)
    if require_dag and topo is None:
        raise CyclicGraph("computation graph contains a directed cycle")

    proc = np.asarray(processing, dtype=float)
    if proc.ndim != 2 or proc.shape[0] != p:
        raise ValidationError(f"processing table must have shape (p={p}, n); got {proc.shape}")
    if (proc < 0).any():
        raise NegativeWeight("processing table has negative entries")
    if not allow_nonzero_source_processing and any(proc[s].any() for s in sources):
        raise ValidationError(
            "processing of a source must be zero"
            " (pass allow_nonzero_source_processing=True to override)"
        )

    if topo is not None:
        _warn_off_path(p, norm, sources, sink)
    proc = proc.copy()
    proc.setflags(write=False)
    return ComputationGraph(
        p=p,
        edges=tuple(norm),
        sources=sources,
        sink=sink,
        processing=proc,
        is_dag=topo is not None,
        _topo=topo,
    )


def _warn_off_path(p, edges, sources, sink) -> None:
    fwd: list[list[int]] = [[] for _ in range(p)]
    back: list[list[int]] = [[] for _ in range(p)]
    for a, b, _ in edges:
        fwd[a].append(b)
        back[b].append(a)

    def reach(starts, adj):
        seen = set(starts)
        stack = list(starts)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return seen

    from_src = reach(sources, fwd)
    to_sink = reach([sink], back)
    off = [v for v in range(p) if v not in from_src or v not in to_sink]
    if off:
        warnings.warn(f"vertices {off} lie on no source-to-sink path")


def apsp(net: NetworkGraph) -> DistanceMatrix:
    """Exact all-pairs shortest paths with deterministic path choice.

    Runs one Dijkstra per source whose heap keys are (distance, node sequence),
    so among equal-weight simple paths the lexicographically smallest node
    sequence wins.  For strictly positive weights this is exactly the
    lexicographically minimal shortest path; zero-weight ties remain
    deterministic but may not be globally lex-minimal.
    """
    n = net.n
    adj = net.adjacency()
    dist = np.full((n, n), np.inf)
    pred = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0.0
        pred[s, s] = s
        heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (s,))]
        done = [False] * n
        while heap:
            d, path = heapq.heappop(heap)
            v = path[-1]
            if done[v]:
                continue
            done[v] = True
            dist[s, v] = d
            pred[s, v] = path[-2] if len(path) > 1 else s
            for w, wt in adj[v]:
                if not done[w]:
                    heapq.heappush(heap, (d + wt, path + (w,)))
    return DistanceMatrix(dist=dist, pred=pred)


def extract_path(dm: DistanceMatrix, u: int, v: int) -> list[int]:
    """Node sequence of the chosen shortest u->v path; [u] when u == v."""
    if u == v:
        return [u]
    out = [v]
    x = v
    while x != u:
        x = int(dm.pred[u, x])
        if x < 0:
            raise ValidationError(f"no path from {u} to {v}")
        out.append(x)
    out.reverse()
    return out


def infer_layering(cg: ComputationGraph) -> LayeredStructure:
    """Assign layer(w) = longest path length from the sources + 1 and verify.

    Raises NotLayered when an edge spans two or more layers under this
    labelling and SinkNotLast when the sink does not sit alone on the final
    layer.
    """
    topo = cg.topological_order()
    layer = [1] * cg.p
    pre = cg.predecessors()
    for v in topo:
        if pre[v]:
            layer[v] = max(layer[u] for u in pre[v]) + 1
    for a, b, _ in cg.edges:
        if layer[b] - layer[a] > 1:
            raise NotLayered(
                f"edge ({a},{b}) spans layers {layer[a]}..{layer[b]}"
            )
    r = max(layer)
    if layer[cg.sink] != r:
        raise SinkNotLast(f"sink at layer {layer[cg.sink]} but depth is {r}")
    at_last = [v for v in range(cg.p) if layer[v] == r]
    if at_last != [cg.sink]:
        raise SinkNotLast(f"layer {r} holds {at_last}, expected the sink alone")
    widths = [0] * r
    for l in layer:
        widths[l - 1] += 1
    return LayeredStructure(layer=tuple(layer), r=r, k=max(widths))


def validate_layering(cg: ComputationGraph, ls: LayeredStructure) -> None:
    """Check an externally supplied layer labelling against its invariants."""
    if len(ls.layer) != cg.p:
        raise NotLayered("layer map size does not match vertex count")
    if any(not 1 <= l <= ls.r for l in ls.layer):
        raise NotLayered("layer labels must lie in 1..r")
    for a, b, _ in cg.edges:
        if ls.layer[b] - ls.layer[a] not in (0, 1):
            raise NotLayered(f"edge ({a},{b}) spans layers {ls.layer[a]}..{ls.layer[b]}")
    for s in cg.sources:
        if ls.layer[s] != 1:
            raise NotLayered(f"source {s} not at layer 1")
    if ls.layer[cg.sink] != ls.r:
        raise SinkNotLast("sink not on the last layer")
    if [v for v in range(cg.p) if ls.layer[v] == ls.r] != [cg.sink]:
        raise SinkNotLast("last layer must hold the sink alone")
    widths = [0] * ls.r
    for l in ls.layer:
        widths[l - 1] += 1
    if min(widths) < 1:
        raise NotLayered("every layer needs at least one vertex")
    if max(widths) != ls.k:
        raise NotLayered(f"declared width {ls.k} but widths are {widths}")


def check_tree(cg: ComputationGraph) -> bool:
    """True iff every non-sink vertex has out-degree exactly 1 (sink 0)."""
    out = [0] * cg.p
    for a, _, _ in cg.edges:
        out[a] += 1
    if out[cg.sink] != 0:
        return False
    return all(out[v] == 1 for v in range(cg.p) if v != cg.sink)


def all_simple_paths(net: NetworkGraph, u: int, v: int):
    """Yield every simple u->v path; test oracle for shortest-path checks."""
    adj = net.adjacency()

    def rec(path, seen):
        x = path[-1]
        if x == v:
            yield list(path)
            return
        for y, _ in adj[x]:
            if y not in seen:
                path.append(y)
                seen.add(y)
                yield from rec(path, seen)
                seen.remove(y)
                path.pop()

    yield from rec([u], {u})


def path_weight(net: NetworkGraph, path) -> float:
    w = net.edge_weight()
    total = 0.0
    for a, b in itertools.pairwise(path):
        total += w[(min(a, b), max(a, b))]
    return total
