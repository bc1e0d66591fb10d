"""Full-time unrollings of a summary graph.

A compatible full-time DAG is encoded as a *template*: one non-empty set of
lags per macro edge, with self-loop lags >= 1 and an acyclic lag-0 edge
subgraph (two opposing instantaneous edges cannot coexist under causal
stationarity).  Unrolling a template over an offset window repeats the same
lagged edges at every slice.  Offsets are relative to the outcome time:
0 means t, negative values are the past.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterable, Iterator, NamedTuple

from .graph import SCG, GraphError, scc_partition, scg_from_json, validate_scg


class TemporalVar(NamedTuple):
    """One time point of one series, at an integer offset relative to t."""

    series: str
    offset: int

    def label(self) -> str:
        return f"{self.series}@{self.offset}"


class QueryError(ValueError):
    """Malformed micro query."""


class TemplateError(ValueError):
    """Lag assignment violates the template invariants."""


class TemplateCapExceeded(RuntimeError):
    """More compatible templates exist than the requested cap allows."""

    def __init__(self, cap: int, partial_count: int):
        super().__init__(f"more than {cap} compatible templates (stopped at {partial_count})")
        self.cap = cap
        self.partial_count = partial_count


@dataclass(frozen=True)
class MicroQuery:
    """Effect of treatment@(t-gamma) on outcome@t, with model horizon gamma_max."""

    treatment: str
    outcome: str
    gamma: int
    gamma_max: int

    def __post_init__(self):
        if self.treatment == self.outcome:
            raise QueryError("treatment and outcome must differ (self-effects are undefined)")
        if self.gamma < 0:
            raise QueryError("gamma must be >= 0")
        if self.gamma_max < 1:
            raise QueryError("gamma_max must be >= 1")

    @property
    def window_floor(self) -> int:
        return -(self.gamma + self.gamma_max)

    @property
    def treatment_var(self) -> TemporalVar:
        return TemporalVar(self.treatment, -self.gamma)

    @property
    def outcome_var(self) -> TemporalVar:
        return TemporalVar(self.outcome, 0)

    def to_json(self) -> str:
        return json.dumps(
            {
                "treatment": self.treatment,
                "outcome": self.outcome,
                "gamma": self.gamma,
                "gamma_max": self.gamma_max,
            }
        )


def instantiate(series: Iterable[str], lo: int, hi: int) -> frozenset[TemporalVar]:
    """The temporal-instantiation operator: every series at every offset in [lo, hi]."""
    return frozenset(TemporalVar(v, s) for v in series for s in range(lo, hi + 1))


def sort_temporal(g: SCG, vars_: Iterable[TemporalVar]) -> list[TemporalVar]:
    """Canonical order: most recent offset first, ties by node declaration."""
    return sorted(vars_, key=lambda tv: (-tv.offset, g.index(tv.series)))


@dataclass(frozen=True)
class FTDagTemplate:
    """One compatible full-time DAG, as per-edge lag sets."""

    scg: SCG
    gamma_max: int
    lag_entries: tuple[tuple[tuple[str, str], tuple[int, ...]], ...]

    @property
    def lags(self) -> dict[tuple[str, str], frozenset[int]]:
        return {edge: frozenset(ls) for edge, ls in self.lag_entries}

    def to_json(self) -> str:
        payload = {
            "scg": {"nodes": list(self.scg.nodes), "edges": [list(e) for e in self.scg.edge_list]},
            "gamma_max": self.gamma_max,
            "lags": [{"edge": list(edge), "set": list(ls)} for edge, ls in self.lag_entries],
        }
        return json.dumps(payload, indent=2)


def _edges_acyclic(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> bool:
    children: dict[str, list[str]] = {v: [] for v in nodes}
    indegree = {v: 0 for v in nodes}
    for (u, w) in edges:
        children[u].append(w)
        indegree[w] += 1
    queue = [v for v in children if indegree[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in children[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                queue.append(w)
    return seen == len(indegree)


def make_template(g: SCG, gamma_max: int, lags: dict[tuple[str, str], Iterable[int]]) -> FTDagTemplate:
    """Validate a lag assignment against the template invariants."""
    if gamma_max < 1:
        raise TemplateError("gamma_max must be >= 1")
    if set(lags) != set(g.edges):
        missing = set(g.edges) - set(lags)
        extra = set(lags) - set(g.edges)
        raise TemplateError(f"lag map must cover the SCG edges exactly (missing {missing}, extra {extra})")
    entries = []
    for edge in g.edge_list:
        ls = tuple(sorted(set(lags[edge])))
        if not ls:
            raise TemplateError(f"empty lag set for edge {edge}")
        lo = 1 if edge[0] == edge[1] else 0
        if ls[0] < lo or ls[-1] > gamma_max:
            raise TemplateError(f"lags {ls} for edge {edge} outside [{lo}, {gamma_max}]")
        entries.append((edge, ls))
    zero_edges = [edge for edge, ls in entries if 0 in ls]
    if not _edges_acyclic(g.nodes, zero_edges):
        raise TemplateError("lag-0 edge subgraph contains a macro cycle")
    return FTDagTemplate(g, gamma_max, tuple(entries))


def macro_projection(tmpl: FTDagTemplate) -> SCG:
    """Collapse a template back to its macro graph (one edge per non-empty lag set)."""
    return SCG(tmpl.scg.nodes, frozenset(edge for edge, ls in tmpl.lag_entries if ls))


def _nonempty_lag_subsets(gamma_max: int, self_loop: bool) -> list[tuple[int, ...]]:
    lo = 1 if self_loop else 0
    values = list(range(lo, gamma_max + 1))
    subsets: list[tuple[int, ...]] = []
    for k in range(1, len(values) + 1):
        subsets.extend(combinations(values, k))
    return sorted(subsets, key=lambda s: (len(s), s))


def iter_compatible_templates(g: SCG, gamma_max: int) -> Iterator[FTDagTemplate]:
    """Lazily enumerate every compatible template, in a deterministic order."""
    edges = g.edge_list
    choices = [_nonempty_lag_subsets(gamma_max, u == w) for (u, w) in edges]
    chosen: list[tuple[int, ...]] = []
    zero_children: dict[str, set[str]] = {v: set() for v in g.nodes}

    def zero_reaches(src: str, dst: str) -> bool:
        stack, seen = [src], {src}
        while stack:
            v = stack.pop()
            if v == dst:
                return True
            for w in zero_children[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return False

    def rec(i: int) -> Iterator[FTDagTemplate]:
        if i == len(edges):
            yield FTDagTemplate(g, gamma_max, tuple(zip(edges, chosen)))
            return
        u, w = edges[i]
        for subset in choices[i]:
            if 0 in subset and zero_reaches(w, u):
                continue
            chosen.append(subset)
            if 0 in subset:
                zero_children[u].add(w)
            yield from rec(i + 1)
            if 0 in subset:
                zero_children[u].discard(w)
            chosen.pop()

    yield from rec(0)


def enumerate_compatible_templates(g: SCG, gamma_max: int, cap: int) -> list[FTDagTemplate]:
    """Every compatible template, or ``TemplateCapExceeded`` past ``cap``."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    out: list[FTDagTemplate] = []
    for tmpl in iter_compatible_templates(g, gamma_max):
        out.append(tmpl)
        if len(out) > cap:
            raise TemplateCapExceeded(cap, len(out))
    return out


def count_compatible_templates(g: SCG, gamma_max: int, limit: int) -> int:
    """Number of compatible templates, counting no further than ``limit + 1``."""
    n = 0
    for _ in iter_compatible_templates(g, gamma_max):
        n += 1
        if n > limit:
            break
    return n


def _maximal_acyclic_subsets(nodes: tuple[str, ...], edges: list[tuple[str, str]]) -> list[frozenset[tuple[str, str]]]:
    # Maximal acyclic edge subsets are exactly the sets consistent with some
    # linear order of the nodes; enumerate orders and deduplicate.
    if not edges:
        return [frozenset()]
    seen: set[frozenset[tuple[str, str]]] = set()
    for order in permutations(nodes):
        rank = {v: i for i, v in enumerate(order)}
        seen.add(frozenset((u, w) for (u, w) in edges if rank[u] < rank[w]))
    return sorted(seen, key=lambda s: sorted(s))


def count_densest_templates(g: SCG) -> int:
    """Number of densest templates: the product over strongly connected
    components of their maximal acyclic internal-edge choices."""
    part = scc_partition(g)
    comp = part.component_of
    internal: dict[int, list[tuple[str, str]]] = {}
    for (u, w) in g.edge_list:
        if u != w and comp[u] == comp[w]:
            internal.setdefault(comp[u], []).append((u, w))
    count = 1
    for idx, members in enumerate(part.components):
        if idx in internal:
            count *= len(_maximal_acyclic_subsets(members, internal[idx]))
    return count


def densest_templates(g: SCG, gamma_max: int) -> list[FTDagTemplate]:
    """Templates with maximal lag sets: full lags everywhere, lag 0 kept on a
    maximal acyclic edge choice within each strongly connected component."""
    part = scc_partition(g)
    comp = part.component_of
    internal: dict[int, list[tuple[str, str]]] = {}
    always_zero: set[tuple[str, str]] = set()
    for (u, w) in g.edge_list:
        if u == w:
            continue
        if comp[u] == comp[w]:
            internal.setdefault(comp[u], []).append((u, w))
        else:
            always_zero.add((u, w))

    per_scc: list[list[frozenset[tuple[str, str]]]] = []
    for idx, members in enumerate(part.components):
        if idx in internal:
            per_scc.append(_maximal_acyclic_subsets(members, internal[idx]))

    def build(zero_set: set[tuple[str, str]]) -> FTDagTemplate:
        lags = {}
        for edge in g.edge_list:
            u, w = edge
            if u == w:
                lags[edge] = range(1, gamma_max + 1)
            elif edge in zero_set or edge in always_zero:
                lags[edge] = range(0, gamma_max + 1)
            else:
                lags[edge] = range(1, gamma_max + 1)
        return make_template(g, gamma_max, lags)

    results: list[FTDagTemplate] = []

    def rec(i: int, acc: set[tuple[str, str]]) -> None:
        if i == len(per_scc):
            results.append(build(acc))
            return
        for subset in per_scc[i]:
            rec(i + 1, acc | subset)

    rec(0, set())
    return results


@dataclass(frozen=True)
class UnrolledGraph:
    """A template unrolled over an offset window; always acyclic."""

    window: tuple[int, int]
    series: tuple[str, ...]
    nodes: tuple[TemporalVar, ...]
    edges: frozenset[tuple[TemporalVar, TemporalVar]]
    parents: dict[TemporalVar, tuple[TemporalVar, ...]] = field(compare=False, hash=False, default=None)
    children: dict[TemporalVar, tuple[TemporalVar, ...]] = field(compare=False, hash=False, default=None)

    def __post_init__(self):
        par: dict[TemporalVar, list[TemporalVar]] = {v: [] for v in self.nodes}
        chi: dict[TemporalVar, list[TemporalVar]] = {v: [] for v in self.nodes}
        for (u, w) in self.edges:
            par[w].append(u)
            chi[u].append(w)
        object.__setattr__(self, "parents", {v: tuple(par[v]) for v in self.nodes})
        object.__setattr__(self, "children", {v: tuple(chi[v]) for v in self.nodes})

    def check_nodes(self, s: Iterable[TemporalVar]) -> None:
        for v in s:
            if v not in self.parents:
                raise GraphError(f"temporal node {v} outside window {self.window}")

    def descendants_of(self, s: Iterable[TemporalVar]) -> frozenset[TemporalVar]:
        s = frozenset(s)
        self.check_nodes(s)
        out, stack = set(s), list(s)
        while stack:
            v = stack.pop()
            for w in self.children[v]:
                if w not in out:
                    out.add(w)
                    stack.append(w)
        return frozenset(out)

    def ancestors_of(self, s: Iterable[TemporalVar]) -> frozenset[TemporalVar]:
        s = frozenset(s)
        self.check_nodes(s)
        out, stack = set(s), list(s)
        while stack:
            v = stack.pop()
            for u in self.parents[v]:
                if u not in out:
                    out.add(u)
                    stack.append(u)
        return frozenset(out)

    def without_outgoing(self, v: TemporalVar) -> "UnrolledGraph":
        self.check_nodes([v])
        return UnrolledGraph(
            self.window,
            self.series,
            self.nodes,
            frozenset(e for e in self.edges if e[0] != v),
        )

    def to_edgelist(self) -> str:
        lines = [f"{u.label()} -> {w.label()}" for (u, w) in self.edges]
        return "\n".join(sorted(lines)) + ("\n" if lines else "")


def unroll(tmpl: FTDagTemplate, lo: int, hi: int) -> UnrolledGraph:
    """Repeat the template's lagged edges at every slice of [lo, hi]."""
    if lo > hi:
        raise ValueError("window must satisfy lo <= hi")
    g = tmpl.scg
    nodes = tuple(TemporalVar(v, s) for s in range(lo, hi + 1) for v in g.nodes)
    edges = set()
    for (u, w), ls in tmpl.lag_entries:
        for lag in ls:
            for target in range(lo + lag, hi + 1):
                edges.add((TemporalVar(u, target - lag), TemporalVar(w, target)))
    return UnrolledGraph((lo, hi), g.nodes, nodes, frozenset(edges))


def padded_window(g: SCG, q: MicroQuery, extra: int = 0) -> tuple[int, int]:
    """Unrolling window for blocking checks: the adjustment window extended by
    |nodes|*(gamma_max+1) past slices (plus ``extra``) and gamma_max future ones."""
    pad = len(g.nodes) * (q.gamma_max + 1) + extra
    return (q.window_floor - pad, q.gamma_max)


def d_separated(
    u: UnrolledGraph,
    a: Iterable[TemporalVar],
    b: Iterable[TemporalVar],
    z: Iterable[TemporalVar],
) -> bool:
    """Whether ``z`` blocks every path between ``a`` and ``b``.

    Linear-time reachability with collider bookkeeping: a trail may pass
    through a collider only when the collider has a descendant in ``z`` and
    through a non-collider only when the node itself is outside ``z``.
    """
    a, b, z = frozenset(a), frozenset(b), frozenset(z)
    if a & b or a & z or b & z:
        raise ValueError("a, b, z must be pairwise disjoint")
    u.check_nodes(a | b | z)
    opens = u.ancestors_of(z) if z else frozenset()

    seen: set[tuple[TemporalVar, bool]] = set()
    stack: list[tuple[TemporalVar, bool]] = [(x, True) for x in a]
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        v, arrived_up = state
        if v in b:
            return False
        if arrived_up:
            if v not in z:
                for p in u.parents[v]:
                    stack.append((p, True))
                for c in u.children[v]:
                    stack.append((c, False))
        else:
            if v not in z:
                for c in u.children[v]:
                    stack.append((c, False))
            if v in opens:
                for p in u.parents[v]:
                    stack.append((p, True))
    return True


def d_separated_bruteforce(
    u: UnrolledGraph,
    a: Iterable[TemporalVar],
    b: Iterable[TemporalVar],
    z: Iterable[TemporalVar],
) -> bool:
    """Path-enumeration oracle for d-separation; exponential, small graphs only."""
    a, b, z = frozenset(a), frozenset(b), frozenset(z)
    if a & b or a & z or b & z:
        raise ValueError("a, b, z must be pairwise disjoint")
    u.check_nodes(a | b | z)

    def path_active(path: list[TemporalVar], directions: list[bool]) -> bool:
        # directions[i] is True when the i-th step follows the edge forward.
        for i in range(1, len(path) - 1):
            into_prev = directions[i - 1]
            out_next = directions[i]
            collider = into_prev and not out_next
            if collider:
                if not (u.descendants_of([path[i]]) & z):
                    return False
            else:
                if path[i] in z:
                    return False
        return True

    for x in a:
        stack = [(x, [x], [])]
        while stack:
            v, path, dirs = stack.pop()
            if v in b and len(path) > 1:
                if path_active(path, dirs):
                    return False
                continue
            for w in u.children[v]:
                if w not in path:
                    stack.append((w, path + [w], dirs + [True]))
            for w in u.parents[v]:
                if w not in path:
                    stack.append((w, path + [w], dirs + [False]))
    return True


def possible_descendants(
    g: SCG, v: str, offset: int, window: tuple[int, int], gamma_max: int
) -> frozenset[TemporalVar]:
    """Temporal variables that descend from ``v@offset`` in some compatible FT-DAG.

    Every compatible template is contained lag-set-wise in a densest template
    and descendant sets grow with lag sets, so the union over densest
    templates equals the union over all compatible ones (the brute-force
    oracle below recomputes the latter directly).
    """
    lo, hi = window
    if not (lo <= offset <= hi):
        raise ValueError(f"offset {offset} outside window {window}")
    out: set[TemporalVar] = set()
    start = TemporalVar(v, offset)
    for tmpl in densest_templates(g, gamma_max):
        u = unroll(tmpl, lo, hi)
        out |= u.descendants_of([start])
    return frozenset(out)


def possible_descendants_bruteforce(
    g: SCG,
    v: str,
    offset: int,
    window: tuple[int, int],
    gamma_max: int,
    cap: int = 100_000,
) -> frozenset[TemporalVar]:
    """Union of descendant sets over every enumerated compatible template."""
    lo, hi = window
    if not (lo <= offset <= hi):
        raise ValueError(f"offset {offset} outside window {window}")
    out: set[TemporalVar] = set()
    start = TemporalVar(v, offset)
    for tmpl in enumerate_compatible_templates(g, gamma_max, cap):
        u = unroll(tmpl, lo, hi)
        out |= u.descendants_of([start])
    return frozenset(out)


def template_from_json(text: str) -> FTDagTemplate:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TemplateError(f"invalid template JSON: {exc}") from exc
    g = validate_scg(payload["scg"]["nodes"], payload["scg"]["edges"])
    lags = {tuple(item["edge"]): item["set"] for item in payload["lags"]}
    return make_template(g, int(payload["gamma_max"]), lags)


def query_from_json(text: str) -> MicroQuery:
    payload = json.loads(text)
    return MicroQuery(
        treatment=payload["treatment"],
        outcome=payload["outcome"],
        gamma=int(payload["gamma"]),
        gamma_max=int(payload["gamma_max"]),
    )


__all__ = [
    "TemporalVar",
    "MicroQuery",
    "QueryError",
    "FTDagTemplate",
    "TemplateError",
    "TemplateCapExceeded",
    "UnrolledGraph",
    "instantiate",
    "sort_temporal",
    "make_template",
    "macro_projection",
    "iter_compatible_templates",
    "enumerate_compatible_templates",
    "count_compatible_templates",
    "count_densest_templates",
    "densest_templates",
    "unroll",
    "padded_window",
    "d_separated",
    "d_separated_bruteforce",
    "possible_descendants",
    "possible_descendants_bruteforce",
    "template_from_json",
    "query_from_json",
    "scg_from_json",
]
