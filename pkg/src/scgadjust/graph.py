"""Macro-level summary causal graphs and their kinship/cycle primitives.

A summary causal graph (SCG) has one node per time series.  Unlike the
full-time graphs it abstracts, an SCG may contain directed cycles and
self-loops; a self-loop is stored as an ordinary ``(v, v)`` edge and counts
as a cycle of length one.  Node order is declaration order and every
serialized node set is emitted in that order, so identical inputs produce
byte-identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

NodeId = str


class GraphError(ValueError):
    """Malformed graph input (duplicate names, undeclared endpoints, ...)."""


@dataclass(frozen=True)
class SCG:
    """Summary causal graph: ordered nodes plus a set of directed edges."""

    nodes: tuple[NodeId, ...]
    edges: frozenset[tuple[NodeId, NodeId]]
    _index: dict[NodeId, int] = field(repr=False, compare=False, hash=False, default=None)

    def __post_init__(self):
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.nodes)})

    def index(self, v: NodeId) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise GraphError(f"unknown node {v!r}") from None

    def check_nodes(self, s: Iterable[NodeId]) -> None:
        for v in s:
            self.index(v)

    @property
    def edge_list(self) -> list[tuple[NodeId, NodeId]]:
        """Edges sorted by (source, target) declaration order."""
        return sorted(self.edges, key=lambda e: (self._index[e[0]], self._index[e[1]]))

    def parents(self, v: NodeId) -> frozenset[NodeId]:
        self.index(v)
        return frozenset(u for (u, w) in self.edges if w == v)

    def children(self, v: NodeId) -> frozenset[NodeId]:
        self.index(v)
        return frozenset(w for (u, w) in self.edges if u == v)

    def parents_of_set(self, s: Iterable[NodeId]) -> frozenset[NodeId]:
        """Union of parents; a member with a self-loop is its own parent."""
        s = frozenset(s)
        self.check_nodes(s)
        return frozenset(u for (u, w) in self.edges if w in s)

    def has_self_loop(self, v: NodeId) -> bool:
        self.index(v)
        return (v, v) in self.edges

    def sorted_nodes(self, s: Iterable[NodeId]) -> list[NodeId]:
        return sorted(s, key=self.index)

    def without_node(self, v: NodeId) -> "SCG":
        """Induced subgraph with ``v`` (and its incident edges) removed."""
        self.index(v)
        keep = tuple(u for u in self.nodes if u != v)
        edges = frozenset(e for e in self.edges if v not in e)
        return SCG(keep, edges)

    def to_json(self) -> str:
        payload = {"nodes": list(self.nodes), "edges": [list(e) for e in self.edge_list]}
        return json.dumps(payload, indent=2)


def validate_scg(raw_nodes: Iterable[NodeId], raw_edges: Iterable[tuple[NodeId, NodeId]]) -> SCG:
    """Canonicalize raw node/edge lists into an SCG or raise ``GraphError``."""
    nodes = list(raw_nodes)
    seen: set[NodeId] = set()
    for v in nodes:
        if not isinstance(v, str) or not v:
            raise GraphError(f"node name must be a non-empty string, got {v!r}")
        if v in seen:
            raise GraphError(f"duplicate node name {v!r}")
        seen.add(v)
    edges = []
    edge_seen: set[tuple[NodeId, NodeId]] = set()
    for e in raw_edges:
        e = tuple(e)
        if len(e) != 2:
            raise GraphError(f"edge must be a (source, target) pair, got {e!r}")
        u, w = e
        if u not in seen:
            raise GraphError(f"edge {e!r} has undeclared endpoint {u!r}")
        if w not in seen:
            raise GraphError(f"edge {e!r} has undeclared endpoint {w!r}")
        if (u, w) in edge_seen:
            raise GraphError(f"duplicate edge {e!r}")
        edge_seen.add((u, w))
        edges.append((u, w))
    return SCG(tuple(nodes), frozenset(edges))


def scg_from_json(text: str) -> SCG:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid graph JSON: {exc}") from exc
    if not isinstance(payload, dict) or "nodes" not in payload or "edges" not in payload:
        raise GraphError('graph JSON must be an object with "nodes" and "edges"')
    return validate_scg(payload["nodes"], payload["edges"])


def descendants(g: SCG, s: Iterable[NodeId]) -> frozenset[NodeId]:
    """Reflexive-transitive closure along forward edges."""
    s = frozenset(s)
    g.check_nodes(s)
    children: dict[NodeId, list[NodeId]] = {v: [] for v in g.nodes}
    for (u, w) in g.edges:
        children[u].append(w)
    out = set(s)
    stack = list(s)
    while stack:
        v = stack.pop()
        for w in children[v]:
            if w not in out:
                out.add(w)
                stack.append(w)
    return frozenset(out)


def ancestors(g: SCG, s: Iterable[NodeId]) -> frozenset[NodeId]:
    """Reflexive-transitive closure along reversed edges."""
    s = frozenset(s)
    g.check_nodes(s)
    parents: dict[NodeId, list[NodeId]] = {v: [] for v in g.nodes}
    for (u, w) in g.edges:
        parents[w].append(u)
    out = set(s)
    stack = list(s)
    while stack:
        v = stack.pop()
        for u in parents[v]:
            if u not in out:
                out.add(u)
                stack.append(u)
    return frozenset(out)


@dataclass(frozen=True)
class SccPartition:
    """Strongly connected components; order and membership are deterministic."""

    component_of: dict[NodeId, int]
    components: tuple[tuple[NodeId, ...], ...]


def scc_partition(g: SCG) -> SccPartition:
    """Tarjan's algorithm, iterative; components ordered by smallest member index."""
    index_of: dict[NodeId, int] = {}
    lowlink: dict[NodeId, int] = {}
    on_stack: set[NodeId] = set()
    stack: list[NodeId] = []
    counter = 0
    raw_components: list[set[NodeId]] = []

    children: dict[NodeId, list[NodeId]] = {v: [] for v in g.nodes}
    for (u, w) in sorted(g.edges, key=lambda e: (g.index(e[0]), g.index(e[1]))):
        children[u].append(w)

    for root in g.nodes:
        if root in index_of:
            continue
        work = [(root, iter(children[root]))]
        index_of[root] = lowlink[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index_of:
                    index_of[w] = lowlink[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(children[w])))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[v] = min(lowlink[v], index_of[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
            if lowlink[v] == index_of[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                raw_components.append(comp)

    ordered = sorted(
        (tuple(g.sorted_nodes(c)) for c in raw_components),
        key=lambda c: g.index(c[0]),
    )
    component_of = {v: i for i, comp in enumerate(ordered) for v in comp}
    return SccPartition(component_of=component_of, components=tuple(ordered))


def scc_of(g: SCG, v: NodeId) -> frozenset[NodeId]:
    part = scc_partition(g)
    return frozenset(part.components[part.component_of[v]])


@dataclass(frozen=True)
class CycleProfile:
    has_self_loop: bool
    on_any_cycle: bool
    only_cycle_is_two_cycle_with: NodeId | None


def cycle_profile(g: SCG, v: NodeId) -> CycleProfile:
    """Cycle facts about ``v`` derived from SCC membership and self-loop flags.

    The set of cycles through ``v`` equals the single 2-cycle ``v <-> x``
    exactly when ``v`` has no self-loop and its SCC is ``{v, x}``: any longer
    cycle through ``v`` would pull a third node into the SCC.
    """
    g.index(v)
    comp = scc_of(g, v)
    self_loop = g.has_self_loop(v)
    on_cycle = self_loop or len(comp) > 1
    partner: NodeId | None = None
    if not self_loop and len(comp) == 2:
        (partner,) = [u for u in comp if u != v]
    return CycleProfile(self_loop, on_cycle, partner)


def on_any_cycle(g: SCG, v: NodeId) -> bool:
    return cycle_profile(g, v).on_any_cycle


def simple_directed_paths(g: SCG, src: NodeId, dst: NodeId) -> list[tuple[NodeId, ...]]:
    """All simple directed paths from ``src`` to ``dst``, in DFS/declaration order.

    Exponential in the worst case; intended for the small macro graphs this
    package targets (corpora stay at <= 8 nodes).
    """
    g.index(src), g.index(dst)
    children: dict[NodeId, list[NodeId]] = {v: [] for v in g.nodes}
    for (u, w) in g.edges:
        if u != w:
            children[u].append(w)
    for v in children:
        children[v].sort(key=g.index)

    paths: list[tuple[NodeId, ...]] = []
    path: list[NodeId] = [src]
    visiting = {src}

    def walk(v: NodeId) -> None:
        if v == dst:
            paths.append(tuple(path))
            return
        for w in children[v]:
            if w in visiting:
                continue
            visiting.add(w)
            path.append(w)
            walk(w)
            path.pop()
            visiting.discard(w)

    walk(src)
    return paths
