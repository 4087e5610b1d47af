"""Minimum-cost embedding via dynamic programming over a tree decomposition.

Cost does not depend on edge directions, so this solver also accepts cyclic
computation schemas.  Every computation vertex and edge is charged exactly
once, at its home bag (the bag nearest the root that contains it), and bag
tables are combined bottom-up by matching assignments on shared vertices.
A solve costs O(#bags * n^{max bag size}).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import BudgetExceeded, InvalidDecomposition
from .metrics import Embedding
from .model import (
    ComputationGraph,
    DistanceMatrix,
    LayeredStructure,
    NetworkGraph,
)

DEFAULT_TABLE_BUDGET = 10**7


@dataclass(frozen=True)
class TreeDecomposition:
    """Rooted tree of vertex bags with home-bag charging for edges and vertices."""

    bags: tuple[tuple[int, ...], ...]  # each sorted by vertex id
    tree_edges: tuple[tuple[int, int], ...]
    root: int
    vertex_home: tuple[int, ...]  # bag index charging each computation vertex
    edge_home: tuple[int, ...]  # bag index charging each computation edge

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def children(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {i: [] for i in range(len(self.bags))}
        for a, b in self.tree_edges:
            adj[a].append(b)
            adj[b].append(a)
        out: dict[int, list[int]] = {}
        seen = {self.root}
        stack = [self.root]
        while stack:
            b = stack.pop()
            out[b] = [c for c in sorted(adj[b]) if c not in seen]
            for c in out[b]:
                seen.add(c)
                stack.append(c)
        return out


def check_decomposition(cg: ComputationGraph, bags, tree_edges) -> None:
    """Verify the three decomposition conditions; raise InvalidDecomposition."""
    nb = len(bags)
    if nb == 0:
        raise InvalidDecomposition("no bags")
    if len(tree_edges) != nb - 1:
        raise InvalidDecomposition(f"{nb} bags need {nb - 1} tree edges")
    adj: dict[int, set[int]] = {i: set() for i in range(nb)}
    for a, b in tree_edges:
        if not (0 <= a < nb and 0 <= b < nb) or a == b:
            raise InvalidDecomposition(f"bad tree edge ({a},{b})")
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        x = stack.pop()
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    if len(seen) != nb:
        raise InvalidDecomposition("bag tree is not connected")

    covered = set()
    for bag in bags:
        covered.update(bag)
    if covered != set(range(cg.p)):
        raise InvalidDecomposition("bags must cover every computation vertex")
    for a, b, _ in cg.edges:
        if not any(a in bag and b in bag for bag in bags):
            raise InvalidDecomposition(f"edge ({a},{b}) is in no bag")
    for w in range(cg.p):
        holding = [i for i, bag in enumerate(bags) if w in bag]
        seen = {holding[0]}
        stack = [holding[0]]
        hold = set(holding)
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y in hold and y not in seen:
                    seen.add(y)
                    stack.append(y)
        if seen != hold:
            raise InvalidDecomposition(f"bags containing vertex {w} are not connected")


def make_decomposition(cg: ComputationGraph, bags, tree_edges) -> TreeDecomposition:
    """Validate, root (at the bag holding the sink) and assign home bags."""
    bags = tuple(tuple(sorted(set(b))) for b in bags)
    tree_edges = tuple((int(a), int(b)) for a, b in tree_edges)
    check_decomposition(cg, bags, tree_edges)

    root = min(
        (i for i, b in enumerate(bags) if cg.sink in b), default=0
    )
    adj: dict[int, list[int]] = {i: [] for i in range(len(bags))}
    for a, b in tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    depth = {root: 0}
    order = [root]
    stack = [root]
    while stack:
        x = stack.pop()
        for y in sorted(adj[x]):
            if y not in depth:
                depth[y] = depth[x] + 1
                order.append(y)
                stack.append(y)

    def nearest(pred) -> int:
        cands = [i for i in range(len(bags)) if pred(bags[i])]
        return min(cands, key=lambda i: (depth[i], i))

    vertex_home = tuple(nearest(lambda bag, w=w: w in bag) for w in range(cg.p))
    edge_home = tuple(
        nearest(lambda bag, a=a, b=b: a in bag and b in bag) for a, b, _ in cg.edges
    )
    return TreeDecomposition(
        bags=bags, tree_edges=tree_edges, root=root,
        vertex_home=vertex_home, edge_home=edge_home,
    )


def layered_path_decomposition(ls: LayeredStructure, cg: ComputationGraph) -> TreeDecomposition:
    """Path of r-1 bags, bag i holding layers i and i+1."""
    layers = ls.layers()
    if ls.r == 1:
        bags = [tuple(layers[0])]
        return make_decomposition(cg, bags, [])
    bags = [tuple(sorted(layers[i] + layers[i + 1])) for i in range(ls.r - 1)]
    edges = [(i, i + 1) for i in range(len(bags) - 1)]
    return make_decomposition(cg, bags, edges)


def min_fill_decomposition(cg: ComputationGraph) -> TreeDecomposition:
    """Tree decomposition from min-fill elimination on the undirected schema.

    Ties go to the smallest vertex id, so the result is deterministic.  The
    width is an upper bound on the true treewidth, with no optimality claim.
    """
    nbrs: dict[int, set[int]] = {w: set() for w in range(cg.p)}
    for a, b, _ in cg.edges:
        nbrs[a].add(b)
        nbrs[b].add(a)

    def fill(w) -> int:
        ns = list(nbrs[w])
        missing = 0
        for i in range(len(ns)):
            for j in range(i + 1, len(ns)):
                if ns[j] not in nbrs[ns[i]]:
                    missing += 1
        return missing

    elim_bag: list[tuple[int, ...]] = []
    elim_vertex: list[int] = []
    alive = set(range(cg.p))
    while alive:
        w = min(alive, key=lambda v: (fill(v), v))
        bag = tuple(sorted({w} | nbrs[w]))
        elim_vertex.append(w)
        elim_bag.append(bag)
        for u in nbrs[w]:
            for v in nbrs[w]:
                if u != v:
                    nbrs[u].add(v)
        for u in nbrs[w]:
            u_set = nbrs[u]
            u_set.discard(w)
        del nbrs[w]
        alive.discard(w)

    index = {w: i for i, w in enumerate(elim_vertex)}
    tree_edges = []
    for i, bag in enumerate(elim_bag[:-1]):
        later = [index[v] for v in bag if v != elim_vertex[i]]
        parent = min(later) if later else i + 1
        tree_edges.append((i, parent))
    return make_decomposition(cg, elim_bag, tree_edges)


def min_cost_treewidth(
    cg: ComputationGraph,
    td: TreeDecomposition,
    net: NetworkGraph,
    dm: DistanceMatrix,
    *,
    budget: int = DEFAULT_TABLE_BUDGET,
) -> tuple[Embedding, float]:
    """Minimum-cost embedding using the supplied decomposition; exact.

    Ties go to the lexicographically smallest assignment per bag, resolved
    root-down.
    """
    check_decomposition(cg, td.bags, td.tree_edges)
    n = net.n
    if max(n ** len(b) for b in td.bags) > budget:
        raise BudgetExceeded(
            f"{n}^{max(len(b) for b in td.bags)} assignments exceed the budget of {budget}"
        )
    pinned = {w: net.sources[i] for i, w in enumerate(cg.sources)}
    pinned[cg.sink] = net.sink
    d = dm.dist

    pos = [{w: i for i, w in enumerate(bag)} for bag in td.bags]
    domains = []
    for bag in td.bags:
        choices = [(pinned[w],) if w in pinned else tuple(range(n)) for w in bag]
        domains.append([tuple(t) for t in itertools.product(*choices)])

    home_vertices: list[list[int]] = [[] for _ in td.bags]
    for w, b in enumerate(td.vertex_home):
        home_vertices[b].append(w)
    home_edges: list[list[tuple[int, int, float]]] = [[] for _ in td.bags]
    for (a, b, lam), hb in zip(cg.edges, td.edge_home):
        home_edges[hb].append((a, b, lam))

    children = td.children()
    post = []
    stack = [(td.root, False)]
    while stack:
        b, expanded = stack.pop()
        if expanded:
            post.append(b)
        else:
            stack.append((b, True))
            for c in children[b]:
                stack.append((c, False))

    tables: dict[int, dict] = {}
    choice: dict[tuple[int, int], dict] = {}  # (parent, child) -> shared asg -> child asg
    messages: dict[tuple[int, int], dict] = {}
    for b in post:
        local = {}
        for asg in domains[b]:
            c = 0.0
            for w in home_vertices[b]:
                c += cg.processing[w, asg[pos[b][w]]]
            for a2, b2, lam in home_edges[b]:
                c += lam * d[asg[pos[b][a2]], asg[pos[b][b2]]]
            local[asg] = float(c)
        for ch in children[b]:
            shared = [w for w in td.bags[ch] if w in pos[b]]
            ch_idx = [pos[ch][w] for w in shared]
            msg: dict = {}
            pick: dict = {}
            for asg in domains[ch]:
                key = tuple(asg[i] for i in ch_idx)
                v = tables[ch][asg]
                if key not in msg or v < msg[key]:
                    msg[key] = v
                    pick[key] = asg
            messages[(b, ch)] = (msg, [pos[b][w] for w in shared])
            choice[(b, ch)] = pick
        table = {}
        for asg in domains[b]:
            v = local[asg]
            for ch in children[b]:
                msg, b_idx = messages[(b, ch)]
                v += msg[tuple(asg[i] for i in b_idx)]
            table[asg] = v
        tables[b] = table

    root_dom = domains[td.root]
    best_asg = None
    best = None
    for asg in root_dom:
        v = tables[td.root][asg]
        if best is None or v < best:
            best, best_asg = float(v), asg

    assignment = [-1] * cg.p
    stack2 = [(td.root, best_asg)]
    while stack2:
        b, asg = stack2.pop()
        for w, v in zip(td.bags[b], asg):
            assignment[w] = v
        for ch in children[b]:
            msg, b_idx = messages[(b, ch)]
            key = tuple(asg[i] for i in b_idx)
            stack2.append((ch, choice[(b, ch)][key]))
    return Embedding(tuple(assignment)), best
