"""Exact minimum-cost embedding for layered computation graphs.

The dynamic program sweeps the layers once.  For layer l it tabulates, for
every assignment tuple Y of layer l+1, the cheapest way to place layers 1..l
(processing, intra-layer and layer-crossing communication) compatible with Y,
keeping a backtracking pointer.  Assignment tuples run over all network nodes
with repetition, with pinned vertices (sources, sink) fixed, so a full sweep
costs O(r n^{2k}).

The per-layer tables are returned in a ``LayeredDPState`` so that later graph
edits can be re-planned by recomputing only from the earliest affected layer;
the result is identical to a fresh solve on the edited graph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (
    BudgetExceeded,
    DanglingEdit,
    NotLayered,
    ValidationError,
    WidthExceeded,
)
from .metrics import Embedding
from .model import (
    ComputationGraph,
    DistanceMatrix,
    LayeredStructure,
    NetworkGraph,
    validate_layering,
)

DEFAULT_TABLE_BUDGET = 10**7


@dataclass(frozen=True)
class LayeredDPState:
    """Frozen snapshot of one layered solve, sufficient for incremental edits."""

    p: int
    edges: tuple[tuple[int, int, float], ...]
    layer: tuple[int, ...]
    r: int
    k: int
    n: int
    pinned: tuple[tuple[int, int], ...]  # (computation vertex, network node)
    h: tuple[dict, ...]  # h[l-1]: assignment tuple of layer l+1 -> cost
    x: tuple[dict, ...]  # x[l-1]: assignment tuple of layer l+1 -> tuple of layer l
    cost: float
    assignment: tuple[int, ...]


def _layer_lists(layer: tuple[int, ...], r: int) -> list[list[int]]:
    out: list[list[int]] = [[] for _ in range(r)]
    for w, l in enumerate(layer):
        out[l - 1].append(w)
    return out


def _domain(vertices, pinned: dict[int, int], n: int):
    choices = [(pinned[w],) if w in pinned else tuple(range(n)) for w in vertices]
    return [tuple(t) for t in itertools.product(*choices)]


def _check_budget(domains, budget: int) -> None:
    worst = 0
    for a, b in zip(domains, domains[1:]):
        worst = max(worst, len(a) * len(b))
    if worst > budget:
        raise BudgetExceeded(f"layer table of {worst} cells exceeds the budget of {budget}")


def _solve_forward(cg, layer, r, pinned, dm, start, h_prev_tables, x_prev_tables, budget):
    """Run the DP from layer ``start`` onward, reusing earlier tables."""
    n = dm.n
    layers = _layer_lists(layer, r)
    pos = [{w: i for i, w in enumerate(ws)} for ws in layers]
    domains = [_domain(ws, pinned, n) for ws in layers]
    _check_budget(domains, budget)

    intra: list[list[tuple[int, int, float]]] = [[] for _ in range(r)]
    inter: list[list[tuple[int, int, float]]] = [[] for _ in range(r)]
    for a, b, lam in cg.edges:
        la, lb = layer[a], layer[b]
        if la == lb:
            intra[la - 1].append((pos[la - 1][a], pos[la - 1][b], lam))
        else:
            inter[la - 1].append((pos[la - 1][a], pos[lb - 1][b], lam))

    d = dm.dist
    proc = cg.processing

    def local_cost(l, X):
        ws = layers[l]
        c = 0.0
        for i, w in enumerate(ws):
            c += proc[w, X[i]]
        for i, j, lam in intra[l]:
            c += lam * d[X[i], X[j]]
        return c

    h_tables = list(h_prev_tables[: start - 1])
    x_tables = list(x_prev_tables[: start - 1])
    if start == 1:
        h_prev = {X: 0.0 for X in domains[0]}
    else:
        h_prev = h_tables[start - 2]

    for l in range(start, r):
        base = {X: h_prev[X] + local_cost(l - 1, X) for X in domains[l - 1]}
        edges_lv = inter[l - 1]
        h_cur: dict = {}
        x_cur: dict = {}
        for Y in domains[l]:
            best = None
            best_x = None
            for X in domains[l - 1]:
                v = base[X]
                for i, j, lam in edges_lv:
                    v += lam * d[X[i], Y[j]]
                if best is None or v < best:
                    best, best_x = v, X
            h_cur[Y] = float(best)
            x_cur[Y] = best_x
        h_tables.append(h_cur)
        x_tables.append(x_cur)
        h_prev = h_cur

    best = None
    best_last = None
    for X in domains[r - 1]:
        v = h_prev[X] + local_cost(r - 1, X) if r > 1 else local_cost(0, X)
        if best is None or v < best:
            best, best_last = float(v), X

    asg = [0] * cg.p
    chosen = best_last
    for i, w in enumerate(layers[r - 1]):
        asg[w] = chosen[i]
    for l in range(r - 1, 0, -1):
        chosen = x_tables[l - 1][chosen]
        for i, w in enumerate(layers[l - 1]):
            asg[w] = chosen[i]
    return Embedding(tuple(asg)), best, tuple(h_tables), tuple(x_tables)


def _pinned_map(cg: ComputationGraph, net: NetworkGraph) -> dict[int, int]:
    pinned = {w: net.sources[i] for i, w in enumerate(cg.sources)}
    pinned[cg.sink] = net.sink
    return pinned


def min_cost_layered(
    cg: ComputationGraph,
    ls: LayeredStructure,
    net: NetworkGraph,
    dm: DistanceMatrix,
    *,
    budget: int = DEFAULT_TABLE_BUDGET,
) -> tuple[Embedding, float, LayeredDPState]:
    """Minimum-cost embedding of a layered graph; exact, deterministic.

    Ties in the per-layer minimization go to the lexicographically smallest
    assignment tuple.
    """
    validate_layering(cg, ls)
    pinned = _pinned_map(cg, net)
    e, cost, h, x = _solve_forward(cg, ls.layer, ls.r, pinned, dm, 1, (), (), budget)
    state = LayeredDPState(
        p=cg.p,
        edges=cg.edges,
        layer=ls.layer,
        r=ls.r,
        k=ls.k,
        n=net.n,
        pinned=tuple(sorted(pinned.items())),
        h=h,
        x=x,
        cost=cost,
        assignment=e.assignment,
    )
    return e, cost, state


def apply_perturbations(
    state: LayeredDPState,
    cg2: ComputationGraph,
    edits,
    dm: DistanceMatrix,
    *,
    budget: int = DEFAULT_TABLE_BUDGET,
) -> tuple[Embedding, float, LayeredDPState]:
    """Re-plan after adding edges (and possibly vertices) to the solved graph.

    ``edits`` is a list of ((tail, head, weight), layer) pairs describing the
    additions already present in ``cg2``; new vertices use ids >= the original
    vertex count and the edit's ``layer`` places them.  For an edit between
    two existing vertices the layer must match the edge's tail (or head, for
    a layer-crossing edge entering it).  Tables are recomputed from the
    earliest affected layer forward, which reproduces a fresh solve exactly.
    """
    if not edits:
        e = Embedding(state.assignment)
        return e, state.cost, state

    old_edges = set(state.edges)
    edited = set()
    for (a, b, lam), _ in edits:
        edited.add((int(a), int(b), float(lam)))
    if set(cg2.edges) != old_edges | edited or old_edges & edited:
        raise ValidationError("edited graph must equal the original plus the listed edits")

    layer = list(state.layer) + [0] * (cg2.p - state.p)
    start = state.r  # recompute at least nothing; minimized below
    for (a, b, lam), lay in edits:
        new_a, new_b = a >= state.p, b >= state.p
        if new_a and new_b:
            raise DanglingEdit(f"edge ({a},{b}) has no endpoint in the original graph")
        if not 1 <= lay <= state.r:
            raise NotLayered(f"edit layer {lay} outside 1..{state.r}")
        if new_a or new_b:
            w = a if new_a else b
            if layer[w] and layer[w] != lay:
                raise NotLayered(f"conflicting layers for new vertex {w}")
            layer[w] = lay
            start = min(start, max(1, lay - 1))
        else:
            if lay not in (layer[a], layer[b]):
                raise NotLayered(f"edit layer {lay} does not touch edge ({a},{b})")
            start = min(start, min(layer[a], layer[b]))
    if any(l == 0 for l in layer):
        raise DanglingEdit("a new vertex was added without any edit naming it")

    r = state.r
    widths = [0] * r
    for l in layer:
        widths[l - 1] += 1
    if max(widths) > state.k:
        raise WidthExceeded(f"widths {widths} exceed the original bound k={state.k}")

    ls2 = LayeredStructure(layer=tuple(layer), r=r, k=max(widths))
    validate_layering(cg2, ls2)
    pinned = dict(state.pinned)
    if any(s not in pinned for s in cg2.sources) or cg2.sink not in pinned:
        raise ValidationError("edits must not change the pinned sources or sink")

    e, cost, h, x = _solve_forward(
        cg2, ls2.layer, r, pinned, dm, start, state.h, state.x, budget
    )
    new_state = LayeredDPState(
        p=cg2.p,
        edges=cg2.edges,
        layer=ls2.layer,
        r=r,
        k=state.k,
        n=state.n,
        pinned=tuple(sorted(pinned.items())),
        h=h,
        x=x,
        cost=cost,
        assignment=e.assignment,
    )
    return e, cost, new_state
