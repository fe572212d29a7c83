"""Instance families: the worked examples, the reduction gadgets, and random instances."""
from __future__ import annotations

import json
import random
from fractions import Fraction
from typing import Callable, Sequence

import networkx as nx

from .instance import Instance, InstanceError, build_instance, parse_weight

HEAVY = Fraction(7, 4)


def gen_gstar(prefix: str = "") -> Instance:
    """Path v1 -> v2 -> v3 -> v4 with weights 3, 2, 7, 1 and two facilities."""
    ids = [f"{prefix}v{i}" for i in range(1, 5)]
    return build_instance(zip(ids, (3, 2, 7, 1)), zip(ids, ids[1:]), 2)


def gen_fig1(side: str) -> Instance:
    if side == "left":
        nodes = [("v0", 0), ("v1", 2), ("v2", 0), ("v3", 2)]
        edges = [("v1", "v0"), ("v1", "v2"), ("v3", "v2")]
    elif side == "right":
        # v1, v2 are the two middle clients; facilities go on v0 and v3
        nodes = [("v0", 0), ("v1", 1), ("v2", 1), ("v3", 0), ("v4", 2)]
        edges = [("v1", "v0"), ("v1", "v3"), ("v2", "v0"), ("v2", "v3"), ("v4", "v3")]
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return build_instance(nodes, edges, 2)


def gen_lowerbound(t: int) -> Instance:
    """Lower-bound family: an isolated unit client, a hub, t stars of t heavy leaves.

    Each ``x_i`` shops at the hub ``va`` and at its leaves ``y{i}_{j}``;
    facility count is ``t^2 + 1``.
    """
    if not isinstance(t, int) or t < 2:
        raise ValueError(f"t must be an integer >= 2, got {t!r}")
    leaf = Fraction(2 * t - 2, t)
    nodes = [("vb", 1), ("va", 0)]
    edges = []
    for i in range(1, t + 1):
        nodes.append((f"x{i}", 1))
        edges.append((f"x{i}", "va"))
        for j in range(1, t + 1):
            nodes.append((f"y{i}_{j}", leaf))
            edges.append((f"x{i}", f"y{i}_{j}"))
    return build_instance(nodes, edges, t * t + 1)


def lowerbound_spe_placement(t: int) -> tuple[str, ...]:
    return ("vb",) + tuple(f"y{i}_{j}" for i in range(1, t + 1) for j in range(1, t + 1))


def gen_is_reduction(graph: nx.Graph, k: int) -> tuple[Instance, dict]:
    """Host graph whose waiting-time game has an SPE iff ``graph`` has an independent set of size k.

    Every edge becomes a weight-7/4 node shopping at both endpoints, each
    vertex is padded with weight-7/4 nodes up to three heavy in-neighbours,
    original vertices get weight 0, and k disjoint copies of the 4-node
    no-equilibrium path are appended.  Facility count is 2k.
    """
    if not isinstance(k, int) or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if any(d > 3 for _, d in graph.degree()):
        raise ValueError("graph must have maximum degree at most 3")
    if nx.number_of_selfloops(graph):
        raise ValueError("graph must be simple")
    vertices = list(graph.nodes)
    vid = {v: f"g[{v}]" for v in vertices}
    nodes = [(vid[v], 0) for v in vertices]
    edges = []
    mapping = {"vertices": {str(v): vid[v] for v in vertices}, "edges": {}, "padding": {}, "gadgets": []}
    for u, v in graph.edges:
        x = f"x[{u},{v}]"
        nodes.append((x, HEAVY))
        edges += [(x, vid[u]), (x, vid[v])]
        mapping["edges"][f"{u},{v}"] = x
    for v in vertices:
        pads = [f"{name}[{v}]" for name in ("y", "z", "q")][: 3 - graph.degree(v)]
        for p in pads:
            nodes.append((p, HEAVY))
            edges.append((p, vid[v]))
        mapping["padding"][str(v)] = pads
    for c in range(k):
        copy = gen_gstar(prefix=f"c{c}.")
        nodes += [(v, w) for v, w in zip(copy.ids, copy.weights)]
        edges += sorted(copy.edges)
        mapping["gadgets"].append(list(copy.ids))
    return build_instance(nodes, edges, 2 * k), mapping


def has_independent_set(graph: nx.Graph, k: int) -> bool:
    """Brute force over vertex subsets of size k."""
    from itertools import combinations
    for subset in combinations(graph.nodes, k):
        if not any(graph.has_edge(a, b) for a, b in combinations(subset, 2)):
            return True
    return False


def gen_maxcut_reduction(graph: nx.Graph, wiring: str = "parallel") -> tuple[Instance, Callable, dict]:
    """Uniform-game instance whose equilibria decode to local max cuts.

    Edge weights are read from the ``weight`` attribute (default 1).  Each
    vertex gets a gadget ``left/right`` (weight 0) fed by three dummies of
    weight ``M = 2 * total + 1``; each edge ``{u, v}`` gets two nodes of the
    edge weight.  With ``wiring="parallel"`` one edge node shops at both
    left nodes and the other at both right nodes, so an endpoint earns the
    full edge weight exactly when the edge is cut.  ``wiring="crossed"``
    pairs ``right_u`` with ``left_v`` and ``right_v`` with ``left_u``
    instead; that variant rewards uncut edges.  The undirected gadget is
    expanded to both edge directions.  Facility count is ``|V|``.

    Returns the instance, a decoder (placement -> set of vertices on the
    left side), and an id mapping.
    """
    if wiring not in ("parallel", "crossed"):
        raise ValueError(f"unknown wiring {wiring!r}")
    weights = {}
    for u, v, data in graph.edges(data=True):
        w = parse_weight(data.get("weight", 1))
        if w <= 0:
            raise ValueError(f"edge {{{u}, {v}}} has nonpositive weight {w}")
        weights[u, v] = w
    big = 2 * sum(weights.values(), Fraction(0)) + 1
    nodes, edges = [], []
    mapping = {"M": str(big), "left": {}, "right": {}, "edges": {}}
    for v in graph.nodes:
        left, right = f"left[{v}]", f"right[{v}]"
        d1, d2, d3 = (f"dummy{i}[{v}]" for i in (1, 2, 3))
        nodes += [(left, 0), (right, 0), (d1, big), (d2, big), (d3, big)]
        edges += [(d1, left), (d2, right), (d3, left), (d3, right)]
        mapping["left"][str(v)] = left
        mapping["right"][str(v)] = right
    for (u, v), w in weights.items():
        e1, e2 = f"e1[{u},{v}]", f"e2[{u},{v}]"
        nodes += [(e1, w), (e2, w)]
        if wiring == "parallel":
            edges += [(e1, f"left[{u}]"), (e1, f"left[{v}]"), (e2, f"right[{u}]"), (e2, f"right[{v}]")]
        else:
            edges += [(e1, f"right[{u}]"), (e1, f"left[{v}]"), (e2, f"right[{v}]"), (e2, f"left[{u}]")]
        mapping["edges"][f"{u},{v}"] = [e1, e2]
    inst = build_instance(nodes, edges, graph.number_of_nodes(), directed=False)
    left_of = {left: v for v, left in zip(graph.nodes, (f"left[{v}]" for v in graph.nodes))}

    def decode(placement: Sequence[str]) -> frozenset:
        return frozenset(left_of[p] for p in placement if p in left_of)

    return inst, decode, mapping


def cut_value(graph: nx.Graph, side: frozenset) -> Fraction:
    return sum((parse_weight(d.get("weight", 1)) for u, v, d in graph.edges(data=True)
                if (u in side) != (v in side)), Fraction(0))


def is_local_max_cut(graph: nx.Graph, side: frozenset) -> bool:
    base = cut_value(graph, side)
    return all(cut_value(graph, side ^ {v}) <= base for v in graph.nodes)


def gen_random(n: int, edge_prob: float, weight_range=(0, 5), k: int = 2, seed: int = 0,
               max_denominator: int = 4) -> Instance:
    """Reproducible random instance on nodes ``v0..v{n-1}`` with rational weights."""
    if n < 1 or k < 1:
        raise ValueError("n and k must be positive")
    if not 0 <= edge_prob <= 1:
        raise ValueError("edge_prob must lie in [0, 1]")
    lo, hi = weight_range
    if lo < 0 or hi < lo:
        raise ValueError(f"invalid weight range {weight_range!r}")
    rng = random.Random(seed)
    ids = [f"v{i}" for i in range(n)]
    nodes = []
    for v in ids:
        den = rng.randint(1, max_denominator)
        nodes.append((v, Fraction(rng.randint(lo * den, hi * den), den)))
    edges = [(u, v) for u in ids for v in ids if u != v and rng.random() < edge_prob]
    return build_instance(nodes, edges, k)


def load_graph(data) -> nx.Graph:
    """Simple-graph JSON: ``{"nodes": [...], "edges": [[u, v] or [u, v, weight], ...]}``."""
    raw = json.loads(data)
    if not isinstance(raw, dict) or not isinstance(raw.get("edges"), list):
        raise InstanceError("graph file needs an 'edges' list")
    g = nx.Graph()
    g.add_nodes_from(str(v) for v in raw.get("nodes", []))
    for e in raw["edges"]:
        if not isinstance(e, list) or len(e) not in (2, 3):
            raise InstanceError(f"malformed graph edge {e!r}")
        u, v = str(e[0]), str(e[1])
        if u == v:
            raise InstanceError(f"self-loop on {u!r}")
        if len(e) == 3:
            g.add_edge(u, v, weight=parse_weight(e[2]))
        else:
            g.add_edge(u, v)
    return g
