"""Shared test fixtures and independent oracles.

The oracles here deliberately avoid the library's inference code paths:
posteriors come from a brute-force full-joint table, and DOT output is
checked by a small grammar parser rather than by the exporter itself.
"""

from __future__ import annotations

import itertools
import re

import numpy as np

from causenet.dataset import VariableDescriptor
from causenet.graph import Dag
from causenet.inference import BayesianNetwork, Cpt, FitMeta


def descriptor(name: str, tag: str = "X") -> VariableDescriptor:
    return VariableDescriptor(name=name, tag=tag, kind="answer-indicator", answer=name)


def network_from_tables(edges, tables, tags=None) -> BayesianNetwork:
    """Build a network from {node: table} plus an edge list.

    Table rows follow the library's convention: bit j of the row index is the
    value of the node's j-th parent (parents ordered by node declaration).
    """
    names = list(tables)
    tags = tags or {}
    dag = Dag(
        nodes=[descriptor(n, tags.get(n, "X")) for n in names],
        edges=[(u, v, 1.0) for u, v in edges],
    )
    cpts = {
        n: Cpt(variable=n, parents=dag.parents(n), table=np.asarray(tables[n], dtype=float))
        for n in names
    }
    return BayesianNetwork(dag=dag, cpts=cpts, fit_meta=FitMeta(samples=0, alpha=0.0))


def random_network(rng: np.random.Generator, n_nodes: int, edge_prob: float = 0.35) -> BayesianNetwork:
    """Random DAG over X00.. with CPT entries drawn strictly inside (0, 1)."""
    names = [f"X{i:02d}" for i in range(n_nodes)]
    order = rng.permutation(n_nodes)
    edges = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < edge_prob:
                edges.append((names[order[i]], names[order[j]]))
    dag = Dag(nodes=[descriptor(n) for n in names], edges=[(u, v, 1.0) for u, v in edges])
    cpts = {}
    for n in names:
        parents = dag.parents(n)
        table = rng.uniform(0.05, 0.95, size=2 ** len(parents))
        cpts[n] = Cpt(variable=n, parents=parents, table=table)
    return BayesianNetwork(dag=dag, cpts=cpts, fit_meta=FitMeta(samples=0, alpha=1.0))


# ---------------------------------------------------------------------------
# Brute-force posterior oracle


def full_joint_table(bn: BayesianNetwork) -> tuple[list[str], dict[tuple[bool, ...], float]]:
    """Joint probability of every total assignment, by direct CPT products."""
    names = list(bn.node_names)
    table = {}
    for values in itertools.product([False, True], repeat=len(names)):
        assignment = dict(zip(names, values))
        prob = 1.0
        for n in names:
            cpt = bn.cpts[n]
            idx = 0
            for j, p in enumerate(cpt.parents):
                if assignment[p]:
                    idx |= 1 << j
            p_true = float(cpt.table[idx])
            prob *= p_true if assignment[n] else 1.0 - p_true
        table[values] = prob
    return names, table


def oracle_posteriors(bn: BayesianNetwork, evidence, targets) -> dict[str, float]:
    """Condition the full joint table on the evidence and marginalize each target."""
    names, table = full_joint_table(bn)
    pos = {n: i for i, n in enumerate(names)}
    denom = 0.0
    numer = {t: 0.0 for t in targets}
    for values, prob in table.items():
        if any(values[pos[n]] != v for n, v in evidence.items()):
            continue
        denom += prob
        for t in targets:
            if values[pos[t]]:
                numer[t] += prob
    if denom == 0.0:
        raise ZeroDivisionError("evidence impossible under the oracle")
    return {t: numer[t] / denom for t in targets}


# ---------------------------------------------------------------------------
# Minimal DOT grammar checker

_ID = r'(?:"(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*|-?\d+(?:\.\d+)?)'
_ATTRS = r"(?:\s*\[[^\[\]]*\])?"
_NODE_STMT = re.compile(rf"^{_ID}{_ATTRS};?$")
_EDGE_STMT = re.compile(rf"^{_ID}\s*->\s*{_ID}{_ATTRS};?$")


def parse_dot(text: str) -> tuple[int, int]:
    """Validate digraph syntax; returns (node statement count, edge statement count)."""
    stripped = text.strip()
    m = re.match(rf"^digraph(?:\s+{_ID})?\s*\{{(.*)\}}$", stripped, re.DOTALL)
    assert m, f"not a digraph: {stripped[:60]!r}"
    body = m.group(1)
    nodes = edges = 0
    for line in body.splitlines():
        stmt = line.strip()
        if not stmt:
            continue
        if _EDGE_STMT.match(stmt):
            edges += 1
        elif _NODE_STMT.match(stmt):
            nodes += 1
        else:
            raise AssertionError(f"unparseable DOT statement: {stmt!r}")
    return nodes, edges
