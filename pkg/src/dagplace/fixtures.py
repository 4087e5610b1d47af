"""Bundled reference instances used by the tests and shipped as JSON fixtures.

Four instances:

* ``prodsum``: the 7-vertex schema for (x1+x2)(x2+x3) on an 8-node network,
  with two weightings of the same topology (see ``prodsum_network`` /
  ``prodsum_network_alt``) and the two embeddings whose cost/delay values the
  acceptance suite pins.
* ``ladder``: a parameterized 2l-source chain of combine stages with two
  disjoint placement lanes whose cost and delay have closed forms.
* ``fanin``: the 8-vertex schema for (x1+x2)(x3+x4) on a 10-node unit-weight
  network where two routed edges contend on one link.
* ``loop``: a 7-vertex schema with a feedback edge (not a DAG) plus a width-2
  tree decomposition, for the treewidth solver.
"""

from __future__ import annotations

import numpy as np

from .metrics import Embedding
from .model import ComputationGraph, NetworkGraph, build_computation, build_network
from .solver_treewidth import TreeDecomposition, make_decomposition

# ---------------------------------------------------------------------------
# prodsum: f = (x1+x2)(x2+x3)
# computation vertices: 0,1,2 sources; 3 = x1+x2; 4 = x2+x3; 5 = product; 6 sink
# network nodes: 0..2 = sources s1..s3, 3 = a, 4 = b, 5 = c, 6 = d, 7 = t
# ---------------------------------------------------------------------------

PRODSUM_N = 8

_PRODSUM_EDGES = ((0, 3), (1, 3), (1, 4), (2, 4), (3, 5), (4, 5), (5, 6))


def prodsum_computation(sink_processing: float = 0.0) -> ComputationGraph:
    """Unit-weight schema with processing 1 on the three interior vertices.

    ``sink_processing`` selects between the two processing variants shipped as
    fixtures (0 reproduces the reference cost/delay values).
    """
    proc = np.zeros((7, PRODSUM_N))
    proc[3:6, :] = 1.0
    proc[6, :] = sink_processing
    return build_computation(
        7,
        [(a, b, 1.0) for a, b in _PRODSUM_EDGES],
        sources=(0, 1, 2),
        sink=6,
        processing=proc,
        allow_nonzero_source_processing=False,
    )


def prodsum_network() -> NetworkGraph:
    """Primary 8-node network; direct edges here are true shortest paths."""
    edges = [
        (0, 3, 10.0),  # s1-a
        (1, 3, 4.0),   # s2-a
        (1, 4, 2.0),   # s2-b
        (1, 5, 6.0),   # s2-c
        (2, 4, 11.0),  # s3-b
        (2, 5, 9.0),   # s3-c
        (3, 6, 1.0),   # a-d
        (4, 6, 2.0),   # b-d
        (5, 6, 2.0),   # c-d
        (6, 7, 1.0),   # d-t
    ]
    return build_network(PRODSUM_N, edges, sources=(0, 1, 2), sink=7)


def prodsum_network_alt() -> NetworkGraph:
    """Alternate weighting of the same topology (multi-hop shortcuts exist)."""
    edges = [
        (0, 3, 10.0),
        (1, 3, 2.0),
        (1, 4, 4.0),
        (1, 5, 8.0),
        (2, 4, 12.0),
        (2, 5, 10.0),
        (3, 6, 1.0),
        (4, 6, 1.0),
        (5, 6, 1.0),
        (6, 7, 1.0),
    ]
    return build_network(PRODSUM_N, edges, sources=(0, 1, 2), sink=7)


def prodsum_delay_optimal() -> Embedding:
    """Interior vertices on a, c, d; the minimum-delay embedding."""
    return Embedding(assignment=(0, 1, 2, 3, 5, 6, 7))


def prodsum_cost_optimal() -> Embedding:
    """Interior vertices on a, b, d; the minimum-cost embedding."""
    return Embedding(assignment=(0, 1, 2, 3, 4, 6, 7))


# ---------------------------------------------------------------------------
# ladder: 2l sources feeding a chain of l combine stages
# ---------------------------------------------------------------------------


def ladder_cost_low(a: float, eps: float, stages: int) -> float:
    """Closed-form cost of the low-cost lane embedding."""
    return stages * (3 + 1.1 * a + 2 * eps) + eps


def ladder_delay_low_cost_lane(a: float, eps: float, stages: int) -> float:
    return stages * (a + eps + 2) + eps


def ladder_cost_high(a: float, eps: float, stages: int) -> float:
    """Closed-form cost of the low-delay lane embedding."""
    return stages * (3 + 1.2 * a + 2 * eps) + eps


def ladder_delay_low_delay_lane(a: float, eps: float, stages: int) -> float:
    return stages * (0.7 * a + eps + 2) + eps


def ladder_instance(
    a: float, eps: float, stages: int
) -> tuple[ComputationGraph, NetworkGraph, Embedding, Embedding]:
    """Build the two-lane ladder and its two lane embeddings.

    The computation graph chains ``stages`` combine vertices: the first is fed
    by two relays from sources 1 and 2, each later one by a left/right pair
    that also absorbs two fresh sources.  The network provides two placement
    lanes per stage whose per-stage cost sums are 1.1a + 2eps (low-cost lane)
    and 1.2a + 2eps (low-delay lane) and whose critical-path increments are
    a + eps + 2 and 0.7a + eps + 2.  Edge weights are balanced so that every
    distance an embedding pays equals its direct edge weight even though the
    lanes share side hosts and the sink.
    """
    if stages < 1:
        raise ValueError("need at least one stage")
    l = stages
    n_src = 2 * l

    # computation vertices
    p1, q1 = n_src, n_src + 1
    sigma = [n_src + 2]
    left, right = [], []
    nxt = n_src + 3
    for _ in range(l - 1):
        left.append(nxt)
        right.append(nxt + 1)
        sigma.append(nxt + 2)
        nxt += 3
    sink = nxt
    p = sink + 1

    cg_edges = [(0, p1, 1.0), (1, q1, 1.0), (p1, sigma[0], 1.0), (q1, sigma[0], 1.0)]
    for i in range(l - 1):
        cg_edges += [
            (sigma[i], left[i], 1.0),
            (sigma[i], right[i], 1.0),
            (2 * i + 2, left[i], 1.0),
            (2 * i + 3, right[i], 1.0),
            (left[i], sigma[i + 1], 1.0),
            (right[i], sigma[i + 1], 1.0),
        ]
    cg_edges.append((sigma[l - 1], sink, 1.0))

    # network nodes: sources, four relay hosts, per-stage combiner pair,
    # per-gap shared side pair, sink
    np1, nq1, np2, nq2 = n_src, n_src + 1, n_src + 2, n_src + 3
    c = []    # low-cost lane combiner hosts
    cp = []   # low-delay lane combiner hosts
    g, h = [], []
    nn = n_src + 4
    for i in range(l):
        c.append(nn)
        cp.append(nn + 1)
        nn += 2
        if i < l - 1:
            g.append(nn)
            h.append(nn + 1)
            nn += 2
    t = nn
    n = t + 1

    net_edges = [
        (0, np1, 0.75 * a + eps),
        (0, np2, 0.5 * a),
        (1, nq1, 0.1 * a),
        (1, nq2, 0.4 * a + eps),
        (np1, c[0], 0.25 * a),
        (nq1, c[0], eps),
        (np2, cp[0], eps),
        (nq2, cp[0], 0.3 * a),
        (c[l - 1], t, eps),
        (cp[l - 1], t, eps),
    ]
    for i in range(l - 1):
        # Two weight patterns alternate so no cross-lane detour undercuts a
        # paid edge: the lanes' value difference sits on the combiner side
        # whose inter-lane bridge is wide, and the two patterns provide those
        # wide bridges to each other (the sink end starts the alternation).
        if (l - 2 - i) % 2 == 0:
            a1, b1, a2, b2 = 0.55 * a + eps, 0.45 * a, eps, 0.1 * a
            a1p, b1p, a2p, b2p = 0.25 * a + eps, 0.45 * a, 0.4 * a + eps, 0.1 * a
        else:
            a1, b1, a2, b2 = 0.5 * a + eps, 0.5 * a, eps, 0.1 * a
            a1p, b1p, a2p, b2p = 0.5 * a + eps, 0.2 * a, eps, 0.5 * a
        net_edges += [
            (c[i], g[i], a1),
            (g[i], c[i + 1], b1),
            (c[i], h[i], a2),
            (h[i], c[i + 1], b2),
            (cp[i], g[i], a1p),
            (g[i], cp[i + 1], b1p),
            (cp[i], h[i], a2p),
            (h[i], cp[i + 1], b2p),
            (2 * i + 2, g[i], 0.0),
            (2 * i + 3, h[i], 0.0),
        ]

    proc = np.zeros((p, n))
    for w in range(n_src, sink):
        proc[w, :] = 1.0
    cg = build_computation(p, cg_edges, sources=tuple(range(n_src)), sink=sink, processing=proc)
    net = build_network(n, net_edges, sources=tuple(range(n_src)), sink=t)

    asg1 = list(range(n_src)) + [0] * (p - n_src)
    asg2 = list(range(n_src)) + [0] * (p - n_src)
    asg1[p1], asg1[q1] = np1, nq1
    asg2[p1], asg2[q1] = np2, nq2
    for i in range(l):
        asg1[sigma[i]] = c[i]
        asg2[sigma[i]] = cp[i]
    for i in range(l - 1):
        asg1[left[i]] = asg2[left[i]] = g[i]
        asg1[right[i]] = asg2[right[i]] = h[i]
    asg1[sink] = asg2[sink] = t
    return cg, net, Embedding(tuple(asg1)), Embedding(tuple(asg2))


# ---------------------------------------------------------------------------
# fanin: f = (x1+x2)(x3+x4) on a 10-node unit network with one shared link
# computation: 0..3 sources, 4 = x1+x2, 5 = x3+x4, 6 = product, 7 sink
# network: 0..3 = s1..s4, 4 = i, 5 = j, 6 = k, 7 = l, 8 = m, 9 = t
# ---------------------------------------------------------------------------


def fanin_computation() -> ComputationGraph:
    edges = [(0, 4, 1.0), (1, 4, 1.0), (2, 5, 1.0), (3, 5, 1.0),
             (4, 6, 1.0), (5, 6, 1.0), (6, 7, 1.0)]
    return build_computation(
        8, edges, sources=(0, 1, 2, 3), sink=7, processing=np.zeros((8, 10))
    )


def fanin_network() -> NetworkGraph:
    edges = [
        (1, 4, 1.0),  # s2-i
        (2, 4, 1.0),  # s3-i
        (4, 5, 1.0),  # i-j
        (5, 6, 1.0),  # j-k
        (5, 7, 1.0),  # j-l
        (6, 8, 1.0),  # k-m
        (7, 8, 1.0),  # l-m
        (8, 9, 1.0),  # m-t
        (0, 6, 1.0),  # s1-k
        (3, 7, 1.0),  # s4-l
    ]
    return build_network(10, edges, sources=(0, 1, 2, 3), sink=9)


def fanin_embedding() -> Embedding:
    """Adders on k and l, product on m; the two source feeds share link i-j."""
    return Embedding(assignment=(0, 1, 2, 3, 6, 7, 8, 9))


# ---------------------------------------------------------------------------
# loop: chain with a feedback edge; vertices 0=s,1=a,2=b,3=c,4=d,5=e,6=t
# ---------------------------------------------------------------------------


def loop_computation() -> ComputationGraph:
    edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (2, 4, 1.0),
             (3, 5, 1.0), (4, 5, 1.0), (5, 6, 1.0), (5, 1, 1.0)]
    return build_computation(
        7, edges, sources=(0,), sink=6, processing=np.zeros((7, 4)), require_dag=False
    )


def loop_decomposition(cg: ComputationGraph) -> TreeDecomposition:
    bags = [(0, 1), (1, 2, 5), (2, 3, 5), (2, 4, 5), (5, 6)]
    return make_decomposition(cg, bags, [(0, 1), (1, 2), (1, 3), (3, 4)])


def loop_network() -> NetworkGraph:
    edges = [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (0, 3, 1.0)]
    return build_network(4, edges, sources=(0,), sink=2)


# ---------------------------------------------------------------------------
# JSON fixture files
# ---------------------------------------------------------------------------

PRODSUM_CG_NAMES = ["x1", "x2", "x3", "sum12", "sum23", "prod", "out"]
PRODSUM_NET_NAMES = ["s1", "s2", "s3", "a", "b", "c", "d", "t"]
FANIN_CG_NAMES = ["x1", "x2", "x3", "x4", "add12", "add34", "mul", "out"]
FANIN_NET_NAMES = ["s1", "s2", "s3", "s4", "i", "j", "k", "l", "m", "t"]
LOOP_CG_NAMES = ["src", "a", "b", "c", "d", "e", "out"]
LOOP_NET_NAMES = ["n0", "n1", "n2", "n3"]

LADDER_A, LADDER_EPS, LADDER_STAGES = 10.0, 0.1, 3


def _net_doc(net: NetworkGraph, names) -> dict:
    return {
        "nodes": list(names),
        "edges": [[names[u], names[v], w] for u, v, w in net.edges],
        "sources": [names[s] for s in net.sources],
        "sink": names[net.sink],
    }


def _cg_doc(cg: ComputationGraph, names, *, allow_cycles=False) -> dict:
    overrides = []
    for w in range(cg.p):
        row = cg.processing[w]
        if row.any():
            if (row == row[0]).all():
                overrides.append([names[w], "*", float(row[0])])
            else:
                overrides.extend([names[w], int(v), float(x)] for v, x in enumerate(row))
    doc = {
        "nodes": list(names),
        "edges": [[names[a], names[b], lam] for a, b, lam in cg.edges],
        "sources": [names[s] for s in cg.sources],
        "sink": names[cg.sink],
        "processing": {"default": 0.0, "overrides": overrides},
    }
    if allow_cycles:
        doc["allow_cycles"] = True
    return doc


def _emb_doc(e, cg_names, net_names) -> dict:
    return {"map": {cg_names[w]: net_names[v] for w, v in enumerate(e.assignment)}}


def ladder_names(stages: int) -> tuple[list[str], list[str]]:
    l = stages
    cg_names = [f"x{i + 1}" for i in range(2 * l)] + ["relay1", "relay2", "combine1"]
    for i in range(1, l):
        cg_names += [f"left{i}", f"right{i}", f"combine{i + 1}"]
    cg_names.append("out")
    net_names = [f"s{i + 1}" for i in range(2 * l)] + ["p1", "q1", "p2", "q2"]
    for i in range(1, l + 1):
        net_names += [f"c{i}", f"cc{i}"]
        if i < l:
            net_names += [f"g{i}", f"h{i}"]
    net_names.append("t")
    return cg_names, net_names


def fixture_documents() -> dict[str, dict]:
    """All shipped fixture files, keyed by file name."""
    docs: dict[str, dict] = {}

    cg0 = prodsum_computation(0.0)
    cg1 = prodsum_computation(1.0)
    docs["prodsum_cg.json"] = _cg_doc(cg0, PRODSUM_CG_NAMES)
    docs["prodsum_cg_sinkproc.json"] = _cg_doc(cg1, PRODSUM_CG_NAMES)
    docs["prodsum_net.json"] = _net_doc(prodsum_network(), PRODSUM_NET_NAMES)
    docs["prodsum_net_alt.json"] = _net_doc(prodsum_network_alt(), PRODSUM_NET_NAMES)
    docs["prodsum_emb_delay.json"] = _emb_doc(
        prodsum_delay_optimal(), PRODSUM_CG_NAMES, PRODSUM_NET_NAMES
    )
    docs["prodsum_emb_cost.json"] = _emb_doc(
        prodsum_cost_optimal(), PRODSUM_CG_NAMES, PRODSUM_NET_NAMES
    )
    docs["prodsum_edits.json"] = {
        "adds": [{"edge": ["prod", "tap", 1.0], "layer": 3}]
    }

    cg, net, e1, e2 = ladder_instance(LADDER_A, LADDER_EPS, LADDER_STAGES)
    cg_names, net_names = ladder_names(LADDER_STAGES)
    docs["ladder_cg.json"] = _cg_doc(cg, cg_names)
    docs["ladder_net.json"] = _net_doc(net, net_names)
    docs["ladder_emb_lowcost.json"] = _emb_doc(e1, cg_names, net_names)
    docs["ladder_emb_lowdelay.json"] = _emb_doc(e2, cg_names, net_names)

    docs["fanin_cg.json"] = _cg_doc(fanin_computation(), FANIN_CG_NAMES)
    docs["fanin_net.json"] = _net_doc(fanin_network(), FANIN_NET_NAMES)
    docs["fanin_emb.json"] = _emb_doc(fanin_embedding(), FANIN_CG_NAMES, FANIN_NET_NAMES)

    lcg = loop_computation()
    docs["loop_cg.json"] = _cg_doc(lcg, LOOP_CG_NAMES, allow_cycles=True)
    docs["loop_net.json"] = _net_doc(loop_network(), LOOP_NET_NAMES)
    td = loop_decomposition(lcg)
    docs["loop_td.json"] = {
        "bags": [[LOOP_CG_NAMES[w] for w in bag] for bag in td.bags],
        "tree_edges": [list(e) for e in td.tree_edges],
    }

    docs["bench_link_usage_desk.json"] = {
        "n": 60, "p_r_grid": [0.05, 0.1, 0.2, 0.4, 0.8],
        "instances": 8, "placements": 5, "p": 16, "master_seed": 42,
    }
    docs["bench_k2_desk.json"] = {
        "n": 5, "p_r_grid": [0.6], "instances": 100, "placements": 1,
        "p": 8, "master_seed": 7, "layers": 3, "width": 2, "xi_lo": 0, "xi_hi": 3,
    }
    return docs


def write_fixture_files(directory) -> None:
    import json
    import pathlib

    out = pathlib.Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, doc in fixture_documents().items():
        (out / name).write_text(json.dumps(doc, indent=2) + "\n")
