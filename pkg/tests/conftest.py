import warnings

import numpy as np
import pytest

from dagplace.metrics import Embedding
from dagplace.model import build_computation


@pytest.fixture(autouse=True)
def _silence_off_path_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="vertices .* lie on no source-to-sink path")
        yield


def random_tree_cg(rng: np.random.Generator, p: int, n: int, *, lam_hi=3, xi_hi=3):
    """Random in-tree with sources first and the sink last.

    Edge weights are integers in [0, lam_hi] (at least one nonzero route is
    not guaranteed); processing is integer per (vertex, node) cell, zero on
    sources.
    """
    edges = []
    for w in range(p - 1):
        tgt = int(rng.integers(w + 1, p))
        edges.append((w, tgt, float(rng.integers(0, lam_hi + 1))))
    indeg = [0] * p
    for a, b, _ in edges:
        indeg[b] += 1
    sources = [w for w in range(p) if indeg[w] == 0]
    order = sources + [w for w in range(p) if w not in sources and w != p - 1] + [p - 1]
    remap = {old: new for new, old in enumerate(order)}
    edges = [(remap[a], remap[b], lam) for a, b, lam in edges]
    proc = np.zeros((p, n))
    for w in range(len(sources), p):
        proc[w, :] = rng.integers(0, xi_hi + 1, size=n)
    return build_computation(
        p, edges, sources=tuple(range(len(sources))), sink=p - 1, processing=proc
    )


def random_dag_cg(rng: np.random.Generator, p: int, n: int, *, edge_p=0.45, xi_hi=3):
    """General random DAG (arbitrary fan-out, denser than a tree).

    Every vertex is wired onto some source-to-sink path; in-degree-0 vertices
    become the sources and vertex p-1 the sink.
    """
    edges = set()
    for a in range(p - 1):
        for b in range(a + 1, p):
            if rng.random() < edge_p:
                edges.add((a, b))
    for a in range(p - 1):  # everyone reaches onward
        if not any(x == a for x, _ in edges):
            edges.add((a, int(rng.integers(a + 1, p))))
    indeg = [0] * p
    for _, b in edges:
        indeg[b] += 1
    sources = [w for w in range(p) if indeg[w] == 0]
    order = sources + [w for w in range(p) if w not in sources and w != p - 1] + [p - 1]
    remap = {old: new for new, old in enumerate(order)}
    lam = {e: float(rng.integers(0, 4)) for e in edges}
    proc = np.zeros((p, n))
    for w in range(len(sources), p):
        proc[w, :] = rng.integers(0, xi_hi + 1, size=n)
    return build_computation(
        p, [(remap[a], remap[b], lam[(a, b)]) for a, b in sorted(edges)],
        sources=tuple(range(len(sources))), sink=p - 1, processing=proc,
    )


def place_roles(net, k: int, rng: np.random.Generator):
    picks = rng.choice(net.n, size=k + 1, replace=False)
    return net.with_roles(tuple(int(x) for x in picks[:-1]), int(picks[-1]))


def random_embedding(cg, net, rng: np.random.Generator) -> Embedding:
    asg = [int(rng.integers(0, net.n)) for _ in range(cg.p)]
    for i, s in enumerate(cg.sources):
        asg[s] = net.sources[i]
    asg[cg.sink] = net.sink
    return Embedding(tuple(asg))
