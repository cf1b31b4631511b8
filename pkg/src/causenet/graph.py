"""DAG construction from architecture declarations and observed support.

An architecture names ordered pairs of variable-type tags. Every pair
(T1, T2) fully connects the surviving T1 variables to the surviving T2
variables; occurrence filters drop weakly supported nodes and edges, and an
optional cap bounds the number of parents per node.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

from .dataset import (
    BinaryDataset,
    CAUSE,
    CAUSE_CATEGORY,
    EFFECT,
    EFFECT_CATEGORY,
    PROBLEM,
    VariableDescriptor,
    WEIGHT_MODES,
    node_support,
    pair_support_block,
)


class GraphError(Exception):
    pass


class ArchitectureError(GraphError):
    """The architecture references tags the dataset does not have, or is malformed."""


class CycleError(GraphError):
    pass


DEFAULT_NODE_FILTER = 5.0
DEFAULT_EDGE_FILTER = 3.0

ARCHITECTURE_CODES = tuple(f"A{i}" for i in range(9))


@dataclass(frozen=True)
class UseCase:
    """Which variable type a model predicts."""

    code: str
    output_tag: str

    @classmethod
    def from_code(cls, code: str) -> "UseCase":
        code = code.lower()
        if code == "diagnostic":
            return cls("diagnostic", CAUSE)
        if code == "predictive":
            return cls("predictive", PROBLEM)
        raise ValueError(f"unknown use case {code!r} (expected diagnostic or predictive)")


DIAGNOSTIC = UseCase.from_code("diagnostic")
PREDICTIVE = UseCase.from_code("predictive")


@dataclass(frozen=True)
class ArchitectureSpec:
    """Type-pair tuples plus filter and cap parameters.

    ``node_filter`` maps a tag to its minimum support; tags not listed fall
    back to ``node_filter_default`` (same scheme for edges, keyed by tag
    pair). ``parent_cap`` of None means unlimited.
    """

    name: str
    pairs: tuple[tuple[str, str], ...]
    node_filter: Mapping[str, float] = field(default_factory=dict)
    edge_filter: Mapping[tuple[str, str], float] = field(default_factory=dict)
    node_filter_default: float = 0.0
    edge_filter_default: float = 0.0
    weight_mode: str = "occurrence"
    parent_cap: int | None = None
    baseline_flag: bool = False

    def __post_init__(self):
        if self.weight_mode not in WEIGHT_MODES:
            raise ArchitectureError(f"unknown weight mode {self.weight_mode!r}")
        if self.parent_cap is not None and self.parent_cap < 1:
            raise ArchitectureError("parent_cap must be >= 1 when finite")
        for pair in self.pairs:
            if len(pair) != 2:
                raise ArchitectureError(f"malformed tag pair {pair!r}")
            if pair[0] == pair[1]:
                raise ArchitectureError(f"self-pair {pair!r} is never acyclic")
        _toposort_tags(self.pairs)  # raises on a cyclic type graph

    def tags(self) -> tuple[str, ...]:
        seen: list[str] = []
        for a, b in self.pairs:
            for t in (a, b):
                if t not in seen:
                    seen.append(t)
        return tuple(seen)

    def f(self, tag: str) -> float:
        return float(self.node_filter.get(tag, self.node_filter_default))

    def g(self, pair: tuple[str, str]) -> float:
        return float(self.edge_filter.get(tuple(pair), self.edge_filter_default))

    def with_filters(
        self,
        node_filter: float | Mapping[str, float] | None = None,
        edge_filter: float | Mapping[tuple[str, str], float] | None = None,
    ) -> "ArchitectureSpec":
        kwargs = {}
        if node_filter is not None:
            if isinstance(node_filter, Mapping):
                kwargs["node_filter"] = dict(node_filter)
            else:
                kwargs["node_filter"] = {}
                kwargs["node_filter_default"] = float(node_filter)
        if edge_filter is not None:
            if isinstance(edge_filter, Mapping):
                kwargs["edge_filter"] = {tuple(k): v for k, v in edge_filter.items()}
            else:
                kwargs["edge_filter"] = {}
                kwargs["edge_filter_default"] = float(edge_filter)
        return replace(self, **kwargs)

    def inverted(self, name: str | None = None) -> "ArchitectureSpec":
        """The same architecture with every tag pair reversed."""
        return replace(
            self,
            name=name or f"inverse {self.name}",
            pairs=tuple((b, a) for a, b in self.pairs),
            edge_filter={(b, a): v for (a, b), v in self.edge_filter.items()},
        )

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "pairs": [list(p) for p in self.pairs],
            "node_filter": dict(self.node_filter),
            "edge_filter": {f"{a}->{b}": v for (a, b), v in self.edge_filter.items()},
            "node_filter_default": self.node_filter_default,
            "edge_filter_default": self.edge_filter_default,
            "weight_mode": self.weight_mode,
            "parent_cap": self.parent_cap,
            "baseline": self.baseline_flag,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ArchitectureSpec":
        edge_filter = {}
        for key, value in obj.get("edge_filter", {}).items():
            a, _, b = key.partition("->")
            edge_filter[(a, b)] = float(value)
        return cls(
            name=obj["name"],
            pairs=tuple((a, b) for a, b in obj.get("pairs", ())),
            node_filter={k: float(v) for k, v in obj.get("node_filter", {}).items()},
            edge_filter=edge_filter,
            node_filter_default=float(obj.get("node_filter_default", 0.0)),
            edge_filter_default=float(obj.get("edge_filter_default", 0.0)),
            weight_mode=obj.get("weight_mode", "occurrence"),
            parent_cap=obj.get("parent_cap"),
            baseline_flag=bool(obj.get("baseline", False)),
        )


def _toposort_tags(pairs: Sequence[tuple[str, str]]) -> list[str]:
    tags: list[str] = []
    for a, b in pairs:
        for t in (a, b):
            if t not in tags:
                tags.append(t)
    succ = {t: set() for t in tags}
    indeg = {t: 0 for t in tags}
    for a, b in pairs:
        if b not in succ[a]:
            succ[a].add(b)
            indeg[b] += 1
    ready = [t for t in tags if indeg[t] == 0]
    order = []
    while ready:
        t = ready.pop(0)
        order.append(t)
        for s in sorted(succ[t]):
            indeg[s] -= 1
            if indeg[s] == 0:
                ready.append(s)
    if len(order) != len(tags):
        raise ArchitectureError(f"tag pairs {list(pairs)} contain a cycle")
    return order


class Dag:
    """Immutable directed acyclic graph over variable descriptors.

    Edges carry a support weight. Parent lists follow node insertion order,
    which makes CPT layouts reproducible.
    """

    def __init__(
        self,
        nodes: Sequence[VariableDescriptor],
        edges: Mapping[tuple[str, str], float] | Sequence[tuple[str, str, float]] = (),
    ):
        self._nodes: dict[str, VariableDescriptor] = {}
        for node in nodes:
            if node.name in self._nodes:
                raise GraphError(f"duplicate node {node.name!r}")
            self._nodes[node.name] = node
        if isinstance(edges, Mapping):
            items = [(u, v, w) for (u, v), w in edges.items()]
        else:
            items = list(edges)
        self._edges: dict[tuple[str, str], float] = {}
        self._parents: dict[str, list[str]] = {name: [] for name in self._nodes}
        self._children: dict[str, list[str]] = {name: [] for name in self._nodes}
        for u, v, w in items:
            if u not in self._nodes or v not in self._nodes:
                raise GraphError(f"edge ({u!r}, {v!r}) has an endpoint outside the node set")
            if u == v:
                raise GraphError(f"self-loop on {u!r}")
            if (u, v) in self._edges:
                raise GraphError(f"duplicate edge ({u!r}, {v!r})")
            self._edges[(u, v)] = float(w)
        order = {name: i for i, name in enumerate(self._nodes)}
        for u, v in sorted(self._edges, key=lambda e: (order[e[0]], order[e[1]])):
            self._parents[v].append(u)
            self._children[u].append(v)
        self._topo = self._toposort()

    @property
    def nodes(self) -> tuple[VariableDescriptor, ...]:
        return tuple(self._nodes.values())

    @property
    def node_names(self) -> tuple[str, ...]:
        return tuple(self._nodes)

    @property
    def edges(self) -> dict[tuple[str, str], float]:
        return dict(self._edges)

    def __contains__(self, name: str) -> bool:
        return name in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def descriptor(self, name: str) -> VariableDescriptor:
        return self._nodes[name]

    def parents(self, name: str) -> tuple[str, ...]:
        return tuple(self._parents[name])

    def children(self, name: str) -> tuple[str, ...]:
        return tuple(self._children[name])

    def edge_weight(self, u: str, v: str) -> float:
        return self._edges[(u, v)]

    def topological_order(self) -> tuple[str, ...]:
        return self._topo

    def nodes_by_tag(self, tag: str) -> tuple[str, ...]:
        return tuple(name for name, d in self._nodes.items() if d.tag == tag)

    def _toposort(self) -> tuple[str, ...]:
        indeg = {name: len(ps) for name, ps in self._parents.items()}
        ready = [name for name in self._nodes if indeg[name] == 0]
        order = []
        while ready:
            name = ready.pop()
            order.append(name)
            for child in self._children[name]:
                indeg[child] -= 1
                if indeg[child] == 0:
                    ready.append(child)
        if len(order) != len(self._nodes):
            raise CycleError("graph contains a cycle")
        return tuple(order)

    def to_json(self) -> dict:
        return {
            "nodes": [d.to_json() for d in self.nodes],
            "edges": [[u, v, w] for (u, v), w in sorted(self._edges.items())],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Dag":
        return cls(
            nodes=[VariableDescriptor.from_json(d) for d in obj["nodes"]],
            edges=[(u, v, w) for u, v, w in obj.get("edges", ())],
        )


# ---------------------------------------------------------------------------
# Construction operations


def select_nodes(ds: BinaryDataset, spec: ArchitectureSpec) -> tuple[VariableDescriptor, ...]:
    """Variables of the architecture's tags whose support clears the node filter."""
    present = {v.tag for v in ds.variables}
    out: list[VariableDescriptor] = []
    for tag in spec.tags():
        if tag not in present:
            raise ArchitectureError(f"tag {tag!r} required by {spec.name!r} is absent from the dataset")
        descs = ds.variables_by_tag(tag)
        names = [d.name for d in descs]
        support = node_support(ds, names, spec.weight_mode)
        threshold = spec.f(tag)
        out.extend(d for d, s in zip(descs, support) if s >= threshold)
    return tuple(out)


def build_edges(
    ds: BinaryDataset, spec: ArchitectureSpec, nodes: Sequence[VariableDescriptor]
) -> Dag:
    """Fully connect each declared tag pair, keeping edges that clear the edge filter."""
    by_tag: dict[str, list[str]] = {}
    for d in nodes:
        by_tag.setdefault(d.tag, []).append(d.name)
    edges: dict[tuple[str, str], float] = {}
    for tag_from, tag_to in spec.pairs:
        from_names = by_tag.get(tag_from, [])
        to_names = by_tag.get(tag_to, [])
        if not from_names or not to_names:
            continue
        support = pair_support_block(ds, from_names, to_names, spec.weight_mode)
        threshold = spec.g((tag_from, tag_to))
        for i, u in enumerate(from_names):
            for j, v in enumerate(to_names):
                if support[i, j] >= threshold:
                    edges[(u, v)] = float(support[i, j])
    return Dag(nodes=nodes, edges=edges)


def enforce_parent_cap(dag: Dag, cap: int | None) -> Dag:
    """Keep, for every node, only its cap strongest parents.

    Ties on support break lexicographically by parent name (smaller names
    survive). Idempotent; a cap of None returns the graph unchanged.
    """
    if cap is None:
        return dag
    if cap < 1:
        raise GraphError("parent cap must be >= 1")
    kept: dict[tuple[str, str], float] = {}
    for name in dag.node_names:
        parents = dag.parents(name)
        if len(parents) > cap:
            ranked = sorted(parents, key=lambda p: (-dag.edge_weight(p, name), p))
            parents = tuple(ranked[:cap])
        for p in parents:
            kept[(p, name)] = dag.edge_weight(p, name)
    return Dag(nodes=dag.nodes, edges=kept)


def build_graph(ds: BinaryDataset, spec: ArchitectureSpec) -> Dag:
    """select_nodes + build_edges + parent cap in one call."""
    nodes = select_nodes(ds, spec)
    dag = build_edges(ds, spec, nodes)
    return enforce_parent_cap(dag, spec.parent_cap)


# ---------------------------------------------------------------------------
# Predefined architectures

_CONTEXT_SENTINEL = "__context__"


def _expand_context(pairs, context_tags):
    out = []
    for a, b in pairs:
        if a == _CONTEXT_SENTINEL:
            out.extend((tag, b) for tag in context_tags)
        elif b == _CONTEXT_SENTINEL:
            out.extend((a, tag) for tag in context_tags)
        else:
            out.append((a, b))
    return tuple(out)


_PREDEFINED: dict[str, tuple[tuple[str, str], ...]] = {
    # A1: category-mediated chain, categories feeding their member answers.
    "A1": ((CAUSE_CATEGORY, CAUSE), (CAUSE, PROBLEM), (PROBLEM, EFFECT), (EFFECT, EFFECT_CATEGORY)),
    # A3: causes point at problems, problems at effects.
    "A3": ((CAUSE, PROBLEM), (PROBLEM, EFFECT)),
    # A5: star around problems, edges pointing away.
    "A5": ((PROBLEM, CAUSE), (PROBLEM, EFFECT)),
    # A6: A5 plus every context tag feeding the problems.
    "A6": ((PROBLEM, CAUSE), (PROBLEM, EFFECT), (_CONTEXT_SENTINEL, PROBLEM)),
}


def predefined_architecture(
    code: str,
    context_tags: Sequence[str] = (),
    node_filter: float | Mapping[str, float] = DEFAULT_NODE_FILTER,
    edge_filter: float | Mapping[tuple[str, str], float] = DEFAULT_EDGE_FILTER,
    weight_mode: str = "inverse-rank",
    parent_cap: int | None = None,
) -> ArchitectureSpec:
    """One of the nine stock architectures A0..A8.

    A0 is the graph-free relative-frequency baseline. Even codes above A0 are
    the edge-reversed twins of the preceding odd codes. Architectures that
    involve context tags (A6, A8) need the dataset's context tags passed in;
    A1/A2 require cause/effect category tags in the dataset.
    """
    code = code.upper()
    if code not in ARCHITECTURE_CODES:
        raise ArchitectureError(f"unknown architecture code {code!r}")
    base = ArchitectureSpec(
        name=code,
        pairs=(),
        weight_mode=weight_mode,
        parent_cap=parent_cap,
        baseline_flag=(code == "A0"),
    ).with_filters(node_filter=node_filter, edge_filter=edge_filter)
    if code == "A0":
        return base
    primary = {"A1": "A1", "A2": "A1", "A3": "A3", "A4": "A3", "A5": "A5", "A6": "A6", "A7": "A5", "A8": "A6"}[code]
    pairs = _expand_context(_PREDEFINED[primary], tuple(context_tags))
    if primary in ("A6",) and not context_tags:
        raise ArchitectureError(f"{code} needs at least one context tag")
    spec = replace(base, pairs=pairs)
    if code in ("A2", "A4", "A7", "A8"):
        spec = spec.inverted(name=code)
    return spec


# ---------------------------------------------------------------------------
# DOT export


def _dot_quote(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(dag: Dag, graph_name: str = "model") -> str:
    """Render the graph as Graphviz DOT text.

    Edge pen width grows linearly with support weight so that heavily
    reported relations draw thicker lines.
    """
    lines = [f"digraph {_dot_quote(graph_name)} {{"]
    for node in dag.nodes:
        lines.append(f"  {_dot_quote(node.name)} [shape=box];")
    weights = [w for w in dag.edges.values()]
    max_w = max(weights) if weights else 1.0
    for (u, v), w in sorted(dag.edges.items()):
        pen = 1.0 + 4.0 * (w / max_w if max_w > 0 else 0.0)
        lines.append(f"  {_dot_quote(u)} -> {_dot_quote(v)} [penwidth={pen:.2f}, weight={w:g}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
