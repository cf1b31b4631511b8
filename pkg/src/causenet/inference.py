"""Parameter fitting and posterior inference for binary Bayesian networks.

Each node stores P(node = true | parent configuration) for all 2^|parents|
configurations. Posteriors given evidence are computed either by exact
enumeration of the unobserved variables or by Gibbs sampling.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .dataset import BinaryDataset
from .graph import Dag


class InferenceError(Exception):
    pass


class ImpossibleEvidenceError(InferenceError):
    """The supplied evidence has probability zero under the model."""


class SizeGuardError(InferenceError):
    """Exact enumeration refused; use Gibbs sampling instead."""


class InferenceTimeout(InferenceError):
    pass


DEFAULT_EXACT_GUARD = 22

#: hard bound on parents per node when fitting (2^22 table rows, 33 MB)
MAX_PARENTS = 22


@dataclass(frozen=True)
class Cpt:
    """Conditional probability table of one binary node.

    ``table[idx]`` is P(variable = true) for the parent configuration whose
    index sets bit j iff parents[j] is true.
    """

    variable: str
    parents: tuple[str, ...]
    table: np.ndarray

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        object.__setattr__(self, "table", table)
        if table.shape != (2 ** len(self.parents),):
            raise InferenceError(
                f"{self.variable!r}: table has {table.shape} entries, expected {2 ** len(self.parents)}"
            )
        if np.any(table < 0.0) or np.any(table > 1.0):
            raise InferenceError(f"{self.variable!r}: table entries must lie in [0, 1]")
        table.setflags(write=False)

    def prob(self, value: bool, config_index: int = 0) -> float:
        p = float(self.table[config_index])
        return p if value else 1.0 - p


@dataclass(frozen=True)
class FitMeta:
    samples: int
    alpha: float
    weight_mode: str | None = None


@dataclass(frozen=True)
class BayesianNetwork:
    """A DAG plus one CPT per node."""

    dag: Dag
    cpts: Mapping[str, Cpt]
    fit_meta: FitMeta

    def __post_init__(self):
        names = set(self.dag.node_names)
        if set(self.cpts) != names:
            raise InferenceError("CPTs must be keyed exactly by the graph nodes")
        for name, cpt in self.cpts.items():
            if cpt.parents != self.dag.parents(name):
                raise InferenceError(f"{name!r}: CPT parent order disagrees with the graph")

    @property
    def node_names(self) -> tuple[str, ...]:
        return self.dag.node_names

    def to_json(self) -> dict:
        return {
            "graph": self.dag.to_json(),
            "cpts": {
                name: {"parents": list(c.parents), "table": [float(p) for p in c.table]}
                for name, c in sorted(self.cpts.items())
            },
            "fit_meta": {
                "samples": self.fit_meta.samples,
                "alpha": self.fit_meta.alpha,
                "weight_mode": self.fit_meta.weight_mode,
            },
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "BayesianNetwork":
        dag = Dag.from_json(obj["graph"])
        cpts = {
            name: Cpt(variable=name, parents=tuple(c["parents"]), table=np.array(c["table"], dtype=float))
            for name, c in obj["cpts"].items()
        }
        meta = obj.get("fit_meta", {})
        return cls(
            dag=dag,
            cpts=cpts,
            fit_meta=FitMeta(
                samples=int(meta.get("samples", 0)),
                alpha=float(meta.get("alpha", 0.0)),
                weight_mode=meta.get("weight_mode"),
            ),
        )


@dataclass(frozen=True)
class SamplerConfig:
    """Gibbs sampler settings; the seed is mandatory for reproducibility."""

    seed: int
    chains: int = 4
    burn_in: int = 1000
    samples_per_chain: int = 5000

    def __post_init__(self):
        if self.chains < 1 or self.samples_per_chain < 1 or self.burn_in < 0:
            raise InferenceError("invalid sampler configuration")
        if self.chains * self.samples_per_chain < 1000:
            warnings.warn("fewer than 1000 retained samples; estimates will be noisy", stacklevel=2)


@dataclass(frozen=True)
class PosteriorReport:
    """Posterior P(variable = true) per queried output variable."""

    probabilities: Mapping[str, float]
    method: str
    diagnostics: Mapping[str, object] = field(default_factory=dict)


Evidence = Mapping[str, bool]


def _check_query(bn: BayesianNetwork, evidence: Evidence, targets: Iterable[str]) -> tuple[str, ...]:
    targets = tuple(targets)
    for name in evidence:
        if name not in bn.dag:
            raise InferenceError(f"evidence variable {name!r} is not in the network")
    missing = [t for t in targets if t not in bn.dag]
    if missing:
        raise InferenceError(f"target variable {missing[0]!r} is not in the network")
    overlap = set(targets) & set(evidence)
    if overlap:
        raise InferenceError(f"targets and evidence overlap: {sorted(overlap)}")
    return targets


# ---------------------------------------------------------------------------
# Fitting


def fit_mle(dag: Dag, ds: BinaryDataset, alpha: float = 1.0, weight_mode: str | None = None) -> BayesianNetwork:
    """Maximum-likelihood CPTs with additive smoothing alpha.

    Each entry is (count(node true, parents = c) + alpha) divided by
    (count(parents = c) + 2 alpha). With alpha = 0 an unobserved parent
    configuration falls back to 0.5.
    """
    if alpha < 0:
        raise InferenceError("alpha must be >= 0")
    if ds.m == 0:
        raise InferenceError("cannot fit on an empty dataset")
    cols = {name: ds.column(name) for name in dag.node_names}
    data = ds.samples
    cpts = {}
    for name in dag.node_names:
        parents = dag.parents(name)
        if len(parents) > MAX_PARENTS:
            raise InferenceError(
                f"{name!r} has {len(parents)} parents; tables beyond {MAX_PARENTS} parents are "
                "intractable, raise the filters or set a parent cap"
            )
        n_cfg = 2 ** len(parents)
        values = data[:, cols[name]].astype(np.int64)
        if parents:
            pw = np.array([1 << j for j in range(len(parents))], dtype=np.int64)
            cfg = data[:, [cols[p] for p in parents]].astype(np.int64) @ pw
        else:
            cfg = np.zeros(ds.m, dtype=np.int64)
        joint = np.bincount(cfg * 2 + values, minlength=2 * n_cfg).reshape(n_cfg, 2)
        totals = joint.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            table = (joint[:, 1] + alpha) / (totals + 2.0 * alpha)
        table = np.where(totals + 2.0 * alpha > 0, table, 0.5)
        cpts[name] = Cpt(variable=name, parents=parents, table=table)
    return BayesianNetwork(dag=dag, cpts=cpts, fit_meta=FitMeta(samples=ds.m, alpha=alpha, weight_mode=weight_mode))


# ---------------------------------------------------------------------------
# Joint probability and likelihood


def joint_probability(bn: BayesianNetwork, assignment: Mapping[str, bool]) -> float:
    """Probability of one total assignment (product of per-node conditionals)."""
    missing = [n for n in bn.node_names if n not in assignment]
    if missing:
        raise InferenceError(f"assignment is not total; missing {missing[0]!r}")
    prob = 1.0
    for name in bn.node_names:
        cpt = bn.cpts[name]
        idx = 0
        for j, p in enumerate(cpt.parents):
            if assignment[p]:
                idx |= 1 << j
        prob *= cpt.prob(bool(assignment[name]), idx)
    return prob


def log_likelihood(bn: BayesianNetwork, ds: BinaryDataset) -> float:
    """Sum over samples of the log joint probability (-inf on a zero-probability sample)."""
    if ds.m == 0:
        return 0.0
    cols = {name: ds.column(name) for name in bn.node_names}
    data = ds.samples
    total = np.zeros(ds.m, dtype=float)
    for name in bn.node_names:
        cpt = bn.cpts[name]
        if cpt.parents:
            pw = np.array([1 << j for j in range(len(cpt.parents))], dtype=np.int64)
            cfg = data[:, [cols[p] for p in cpt.parents]].astype(np.int64) @ pw
        else:
            cfg = np.zeros(ds.m, dtype=np.int64)
        p_true = cpt.table[cfg]
        p = np.where(data[:, cols[name]], p_true, 1.0 - p_true)
        with np.errstate(divide="ignore"):
            total += np.log(p)
    return float(total.sum())


# ---------------------------------------------------------------------------
# Exact inference


def infer_exact(
    bn: BayesianNetwork,
    evidence: Evidence,
    targets: Iterable[str],
    guard: int = DEFAULT_EXACT_GUARD,
) -> PosteriorReport:
    """Posterior of each target by enumerating every completion of the evidence.

    Enumeration runs over the unobserved variables only; the guard bounds how
    many of those are allowed before the caller is redirected to Gibbs
    sampling.
    """
    targets = _check_query(bn, evidence, targets)
    free = [n for n in bn.node_names if n not in evidence]
    if len(free) > guard:
        raise SizeGuardError(
            f"{len(free)} unobserved variables exceed the enumeration guard of {guard}; use infer_gibbs"
        )
    n_states = 1 << len(free)
    free_pos = {name: i for i, name in enumerate(free)}
    states = np.arange(n_states, dtype=np.int64)

    def column(name: str):
        if name in free_pos:
            return ((states >> free_pos[name]) & 1).astype(np.uint8)
        return np.uint8(1 if evidence[name] else 0)

    joint = np.ones(n_states, dtype=float)
    for name in bn.node_names:
        cpt = bn.cpts[name]
        idx = np.zeros(n_states, dtype=np.int64) if cpt.parents else 0
        for j, p in enumerate(cpt.parents):
            idx = idx + (column(p).astype(np.int64) << j)
        p_true = cpt.table[idx]
        value = column(name)
        joint = joint * np.where(value == 1, p_true, 1.0 - p_true)
    denom = float(joint.sum())
    if denom <= 0.0:
        raise ImpossibleEvidenceError("evidence has zero probability under the model")
    probabilities = {}
    for t in targets:
        mask = column(t) == 1
        probabilities[t] = float(joint[mask].sum()) / denom
    return PosteriorReport(
        probabilities=probabilities,
        method="exact",
        diagnostics={
            "free_variables": len(free),
            "evidence": {name: 1.0 if v else 0.0 for name, v in evidence.items()},
        },
    )


# ---------------------------------------------------------------------------
# Gibbs sampling


class _GibbsPlan:
    """Precomputed index structures for single-site Gibbs updates."""

    def __init__(self, bn: BayesianNetwork, evidence: Evidence):
        order = bn.node_names
        self.pos = {name: i for i, name in enumerate(order)}
        self.order = order
        self.free = [n for n in bn.dag.topological_order() if n not in evidence]
        self.evidence_cols = [(self.pos[n], bool(v)) for n, v in evidence.items()]
        self.tables = {n: bn.cpts[n].table for n in order}
        self.parent_idx = {
            n: np.array([self.pos[p] for p in bn.cpts[n].parents], dtype=np.int64) for n in order
        }
        self.parent_pow = {
            n: np.array([1 << j for j in range(len(bn.cpts[n].parents))], dtype=np.int64) for n in order
        }
        # for each free variable: (child name, bit weight of the variable in the child's config)
        self.child_info = {}
        for n in self.free:
            info = []
            for ch in bn.dag.children(n):
                j = bn.cpts[ch].parents.index(n)
                info.append((ch, 1 << j))
            self.child_info[n] = info


def _gibbs_sweep(plan: _GibbsPlan, state: np.ndarray, uniforms: np.ndarray) -> None:
    # state: (chains, n_nodes) uint8; uniforms: (n_free, chains)
    for k, name in enumerate(plan.free):
        col = plan.pos[name]
        pidx = plan.parent_idx[name]
        cfg = state[:, pidx] @ plan.parent_pow[name] if pidx.size else 0
        t = plan.tables[name][cfg]
        p1 = t.copy() if isinstance(t, np.ndarray) else np.full(state.shape[0], t)
        p0 = 1.0 - p1
        for ch, bit in plan.child_info[name]:
            ch_cfg = state[:, plan.parent_idx[ch]] @ plan.parent_pow[ch]
            cfg0 = ch_cfg - bit * state[:, col].astype(np.int64)
            table = plan.tables[ch]
            t0 = table[cfg0]
            t1 = table[cfg0 + bit]
            ch_val = state[:, plan.pos[ch]] == 1
            p0 *= np.where(ch_val, t0, 1.0 - t0)
            p1 *= np.where(ch_val, t1, 1.0 - t1)
        total = p0 + p1
        with np.errstate(invalid="ignore", divide="ignore"):
            prob = np.where(total > 0.0, p1 / total, 0.5)
        state[:, col] = (uniforms[k] < prob).astype(np.uint8)


def infer_gibbs(
    bn: BayesianNetwork,
    evidence: Evidence,
    targets: Iterable[str],
    cfg: SamplerConfig,
    time_budget: float | None = None,
) -> PosteriorReport:
    """Posterior of each target estimated by Gibbs sampling.

    Evidence variables are clamped and never resampled; all other variables
    are swept in topological order. Each chain runs on an independent
    substream derived from the seed, so results do not depend on chain
    scheduling, and identical configurations reproduce identical reports.
    """
    targets = _check_query(bn, evidence, targets)
    plan = _GibbsPlan(bn, evidence)
    n = len(bn.node_names)
    chains = cfg.chains
    sweeps = cfg.burn_in + cfg.samples_per_chain
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(chains)]
    state = np.zeros((chains, n), dtype=np.uint8)
    for col, value in plan.evidence_cols:
        state[:, col] = 1 if value else 0
    # per-chain ancestral initialization (evidence already clamped)
    for c, rng in enumerate(rngs):
        for name in bn.dag.topological_order():
            if name in evidence:
                continue
            cpt = bn.cpts[name]
            idx = 0
            for j, p in enumerate(cpt.parents):
                idx |= int(state[c, plan.pos[p]]) << j
            state[c, plan.pos[name]] = 1 if rng.random() < cpt.table[idx] else 0
    n_free = len(plan.free)
    if n_free == 0:
        raise InferenceError("all variables are observed; nothing to sample")
    # pre-drawn uniforms, one per (sweep, free variable) per chain
    uniforms = np.stack([rng.random((sweeps, n_free)) for rng in rngs], axis=-1)
    target_cols = np.array([plan.pos[t] for t in targets], dtype=np.int64)
    acc = np.zeros((chains, len(targets)), dtype=np.int64)
    started = time.perf_counter()
    for sweep in range(sweeps):
        if time_budget is not None and sweep % 128 == 0:
            if time.perf_counter() - started > time_budget:
                raise InferenceTimeout(f"inference exceeded the {time_budget:.0f}s budget")
        _gibbs_sweep(plan, state, uniforms[sweep])
        if sweep >= cfg.burn_in:
            acc += state[:, target_cols]
    per_chain = acc / float(cfg.samples_per_chain)
    estimate = per_chain.mean(axis=0)
    probabilities = {t: float(estimate[i]) for i, t in enumerate(targets)}
    return PosteriorReport(
        probabilities=probabilities,
        method="gibbs",
        diagnostics={
            "chains": chains,
            "samples_per_chain": cfg.samples_per_chain,
            "burn_in": cfg.burn_in,
            "seed": cfg.seed,
            "evidence": {name: 1.0 if v else 0.0 for name, v in evidence.items()},
            "per_chain": {t: [float(per_chain[c, i]) for c in range(chains)] for i, t in enumerate(targets)},
        },
    )


def infer(
    bn: BayesianNetwork,
    evidence: Evidence,
    targets: Iterable[str],
    sampler: SamplerConfig | None = None,
    guard: int = DEFAULT_EXACT_GUARD,
    method: str = "auto",
    time_budget: float | None = None,
) -> PosteriorReport:
    """Dispatch to exact enumeration when tractable, else to Gibbs sampling."""
    targets = tuple(targets)
    if method == "exact":
        return infer_exact(bn, evidence, targets, guard=guard)
    if method == "gibbs":
        if sampler is None:
            raise InferenceError("gibbs inference needs a SamplerConfig")
        return infer_gibbs(bn, evidence, targets, cfg=sampler, time_budget=time_budget)
    if method != "auto":
        raise InferenceError(f"unknown inference method {method!r}")
    free = sum(1 for n in bn.node_names if n not in evidence)
    if free <= guard:
        return infer_exact(bn, evidence, targets, guard=guard)
    if sampler is None:
        raise InferenceError(f"{free} unobserved variables need Gibbs sampling, but no SamplerConfig given")
    return infer_gibbs(bn, evidence, targets, cfg=sampler, time_budget=time_budget)


# ---------------------------------------------------------------------------
# Ranking and baseline


def predict_ranking(
    report: PosteriorReport, k: int = 5, threshold: float = 0.0
) -> list[tuple[str, float]]:
    """Top-k output variables by posterior, dropping entries at or below the threshold.

    Ties in probability break lexicographically by name.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    ranked = sorted(report.probabilities.items(), key=lambda item: (-item[1], item[0]))
    return [(name, p) for name, p in ranked[:k] if p > threshold]


def baseline_predict(ds: BinaryDataset, output_tag: str) -> PosteriorReport:
    """Relative frequency of every output-tag variable, ignoring all evidence."""
    if ds.m == 0:
        raise InferenceError("cannot compute frequencies on an empty dataset")
    descs = ds.variables_by_tag(output_tag)
    if not descs:
        raise InferenceError(f"no variables carry tag {output_tag!r}")
    probabilities = {
        d.name: float(ds.samples[:, ds.column(d.name)].sum()) / ds.m for d in descs
    }
    return PosteriorReport(probabilities=probabilities, method="baseline", diagnostics={"samples": ds.m})


# ---------------------------------------------------------------------------
# Forward sampling (used for synthetic ground-truth datasets)


def sample_assignments(bn: BayesianNetwork, m: int, seed: int) -> np.ndarray:
    """Draw m total assignments by ancestral sampling; columns follow node order."""
    rng = np.random.default_rng(seed)
    pos = {name: i for i, name in enumerate(bn.node_names)}
    out = np.zeros((m, len(pos)), dtype=bool)
    for name in bn.dag.topological_order():
        cpt = bn.cpts[name]
        if cpt.parents:
            pw = np.array([1 << j for j in range(len(cpt.parents))], dtype=np.int64)
            cfg = out[:, [pos[p] for p in cpt.parents]].astype(np.int64) @ pw
        else:
            cfg = np.zeros(m, dtype=np.int64)
        out[:, pos[name]] = rng.random(m) < cpt.table[cfg]
    return out
