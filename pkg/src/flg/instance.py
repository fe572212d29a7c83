"""Game instances: host graph, client weights, facility count, and the JSON format."""
from __future__ import annotations

import json
import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

Number = Union[Fraction, float]
Placement = tuple  # tuple[str, ...]; entry j is the node of facility j


class InstanceError(ValueError):
    """Invalid instance data or an invalid reference into an instance."""


def parse_weight(value) -> Fraction:
    """Parse an int, decimal literal or ``"p/q"`` string into an exact Fraction."""
    if isinstance(value, bool):
        raise InstanceError(f"weight must be a number, got {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, float):
        # the repr of a JSON float is the decimal literal the user wrote
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InstanceError(f"unparseable weight {value!r}") from None
    raise InstanceError(f"weight must be a number, got {value!r}")


def as_fraction(x) -> Fraction:
    """Exact conversion for parameters such as alpha/epsilon (floats go through their repr)."""
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


def format_number(x, decimal: bool = False) -> str:
    if isinstance(x, Fraction) and not decimal:
        return str(x)
    return repr(float(x))


@dataclass(frozen=True, eq=False)
class Instance:
    """Vertex-weighted directed host graph plus the number of facility agents.

    An edge ``(u, v)`` means client ``u`` may shop at location ``v``.
    Nodes are addressed by string id in the public API and by their
    position in ``ids`` internally.
    """

    ids: tuple[str, ...]
    weights: tuple[Fraction, ...]
    edges: frozenset
    k: int
    index: dict = field(init=False, repr=False)
    shop: tuple = field(init=False, repr=False)
    attract: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not self.ids:
            raise InstanceError("no nodes")
        if len(self.weights) != len(self.ids):
            raise InstanceError("weights and ids differ in length")
        index = {}
        for pos, node in enumerate(self.ids):
            if not isinstance(node, str) or not node:
                raise InstanceError(f"node id must be a non-empty string, got {node!r}")
            if node in index:
                raise InstanceError(f"duplicate node id {node!r}")
            index[node] = pos
        weights = tuple(parse_weight(w) for w in self.weights)
        for node, w in zip(self.ids, weights):
            if w < 0:
                raise InstanceError(f"negative weight {w} on node {node!r}")
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise InstanceError(f"facility count must be a positive integer, got {self.k!r}")
        out = [[] for _ in self.ids]
        into = [[] for _ in self.ids]
        for edge in self.edges:
            u, v = edge
            for end in (u, v):
                if end not in index:
                    raise InstanceError(f"edge ({u!r}, {v!r}) references unknown node {end!r}")
            if u == v:
                raise InstanceError(f"self-loop on {u!r}; a node always shops at itself")
            out[index[u]].append(index[v])
            into[index[v]].append(index[u])
        shop = tuple((i, *sorted(out[i])) for i in range(len(self.ids)))
        attract = tuple((i, *sorted(into[i])) for i in range(len(self.ids)))
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "shop", shop)
        object.__setattr__(self, "attract", attract)

    @property
    def n(self) -> int:
        return len(self.ids)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.ids, self.weights, self.edges, self.k) == (
            other.ids, other.weights, other.edges, other.k)

    def __hash__(self):
        return hash((self.ids, self.weights, self.edges, self.k))

    def node(self, node_id: str) -> int:
        try:
            return self.index[node_id]
        except KeyError:
            raise InstanceError(f"unknown node id {node_id!r}") from None

    def weight(self, node_id: str) -> Fraction:
        return self.weights[self.node(node_id)]

    def with_k(self, k: int) -> "Instance":
        return Instance(self.ids, self.weights, self.edges, k)

    def locate(self, placement: Sequence[str]) -> tuple[int, ...]:
        """Node positions of a placement (any length; co-location allowed)."""
        return tuple(self.node(v) for v in placement)

    def names(self, locs: Iterable[int]) -> tuple[str, ...]:
        return tuple(self.ids[i] for i in locs)

    def check_placement(self, placement: Sequence[str]) -> tuple[str, ...]:
        placement = tuple(placement)
        if len(placement) != self.k:
            raise InstanceError(
                f"placement has {len(placement)} entries but the instance has {self.k} facilities")
        self.locate(placement)
        return placement

    def cover(self, node: int) -> Fraction:
        """Total weight of clients that can shop at ``node``."""
        return sum((self.weights[v] for v in self.attract[node]), Fraction(0))

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": v, "weight": str(w)} for v, w in zip(self.ids, self.weights)],
            "edges": [list(e) for e in sorted(self.edges, key=lambda e: (self.index[e[0]], self.index[e[1]]))],
            "facilities": self.k,
            "directed": True,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def shopping_range(inst: Instance, node_id: str) -> set[str]:
    return {inst.ids[v] for v in inst.shop[inst.node(node_id)]}


def reachable_facilities(inst: Instance, placement: Sequence[str], node_id: str) -> set[int]:
    rng = set(inst.shop[inst.node(node_id)])
    return {j for j, loc in enumerate(inst.locate(placement)) if loc in rng}


def attraction_range(inst: Instance, placement: Sequence[str], j: int) -> set[str]:
    if not 0 <= j < len(placement):
        raise InstanceError(f"facility index {j} out of range for {len(placement)} facilities")
    return {inst.ids[v] for v in inst.attract[inst.node(placement[j])]}


def facility_reach(inst: Instance, locs: Sequence[int]) -> list[list[int]]:
    """For every node, the facility indices within its shopping range (ascending)."""
    reach = [[] for _ in range(inst.n)]
    for j, loc in enumerate(locs):
        for v in inst.attract[loc]:
            reach[v].append(j)
    return reach


def build_instance(nodes, edges, k: int, directed: bool = True) -> Instance:
    """``nodes`` is a sequence of (id, weight) pairs."""
    nodes = list(nodes)
    ids = tuple(v for v, _ in nodes)
    weights = tuple(parse_weight(w) for _, w in nodes)
    edge_set = set()
    for e in edges:
        if not isinstance(e, (tuple, list)) or len(e) != 2:
            raise InstanceError(f"edge must be a pair, got {e!r}")
        u, v = e
        edge_set.add((u, v))
        if not directed:
            edge_set.add((v, u))
    return Instance(ids, weights, frozenset(edge_set), k)


def load_instance(data: Union[str, bytes]) -> Instance:
    """Parse and validate the JSON instance format."""
    try:
        raw = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InstanceError(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise InstanceError("malformed instance: top level must be an object")
    nodes = raw.get("nodes")
    if not isinstance(nodes, list):
        raise InstanceError("malformed instance: 'nodes' must be a list")
    if not nodes:
        raise InstanceError("no nodes")
    pairs = []
    for entry in nodes:
        if not isinstance(entry, dict) or "id" not in entry or "weight" not in entry:
            raise InstanceError(f"malformed node entry {entry!r}")
        pairs.append((entry["id"], entry["weight"]))
    edges = raw.get("edges", [])
    if not isinstance(edges, list):
        raise InstanceError("malformed instance: 'edges' must be a list")
    if "facilities" not in raw:
        raise InstanceError("malformed instance: missing 'facilities'")
    directed = raw.get("directed", True)
    if not isinstance(directed, bool):
        raise InstanceError("malformed instance: 'directed' must be a boolean")
    for e in edges:
        if not isinstance(e, list):
            raise InstanceError(f"malformed edge {e!r}: expected a [from, to] list")
    return build_instance(pairs, [tuple(e) for e in edges], raw["facilities"], directed=directed)


def read_instance(path) -> Instance:
    with open(path, "rb") as fh:
        return load_instance(fh.read())


def save_instance(inst: Instance, path) -> None:
    with open(path, "w") as fh:
        fh.write(inst.to_json())
        fh.write("\n")


@dataclass(frozen=True)
class WeightDistribution:
    """Sparse client weight distribution: ``(client id, facility index) -> weight``.

    Only strictly positive entries are stored.
    """

    entries: dict

    def of(self, client: str) -> dict[int, Number]:
        return {j: x for (i, j), x in self.entries.items() if i == client}

    def loads(self, k: int) -> list:
        loads = [0] * k
        for (_, j), x in self.entries.items():
            loads[j] += x
        return loads

    def to_list(self, inst: Instance, decimal: bool = False) -> list:
        order = sorted(self.entries, key=lambda key: (inst.index[key[0]], key[1]))
        return [[i, j, format_number(self.entries[i, j], decimal)] for i, j in order]


def check_feasible(inst: Instance, placement: Sequence[str], sigma: WeightDistribution,
                   tol: float = 0.0) -> None:
    """Raise InstanceError unless ``sigma`` is feasible for ``placement``."""
    locs = inst.locate(placement)
    reach = facility_reach(inst, locs)
    totals = [0] * inst.n
    for (client, j), x in sigma.entries.items():
        i = inst.node(client)
        if not 0 <= j < len(locs) or j not in reach[i]:
            raise InstanceError(f"client {client!r} cannot reach facility {j}")
        if x < 0:
            raise InstanceError(f"negative weight {x} from {client!r} to facility {j}")
        totals[i] += x
    for i, node in enumerate(inst.ids):
        need = inst.weights[i] if reach[i] else 0
        if abs(totals[i] - need) > tol * max(1, need):
            raise InstanceError(
                f"client {node!r} distributes {totals[i]} but must distribute {need}")
