"""Cross-validation harness and the threshold/ranking metric definitions.

Metric averages are carried out in exact rational arithmetic over integer
per-sample counts and only converted to float at the edge, so fixture values
can be checked for equality rather than closeness.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .dataset import (
    BinaryDataset,
    Schema,
    SurveyRecord,
    binarize,
    fit_discretization,
    node_support,
)
from .graph import ArchitectureSpec, UseCase, build_graph
from .inference import (
    DEFAULT_EXACT_GUARD,
    SamplerConfig,
    baseline_predict,
    fit_mle,
    infer,
)

DEFAULT_THRESHOLDS = tuple(i / 10 for i in range(1, 10))
DEFAULT_REPETITIONS = 10
DEFAULT_HOLDOUT = 30


class EvaluationError(Exception):
    pass


# ---------------------------------------------------------------------------
# Fold plans


@dataclass(frozen=True)
class FoldPlan:
    """Per-repetition train/test index sets, reproducible from the seed."""

    repetitions: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    holdout_size: int
    seed: int

    def __post_init__(self):
        for train, test in self.repetitions:
            if set(train) & set(test):
                raise EvaluationError("train and test overlap within a repetition")
            if len(test) != self.holdout_size:
                raise EvaluationError("test size differs from the declared holdout size")


def split_folds(
    m: int,
    repetitions: int = DEFAULT_REPETITIONS,
    holdout_size: int = DEFAULT_HOLDOUT,
    seed: int = 0,
) -> FoldPlan:
    """Independent repetitions, each holding out a random sample subset.

    Every repetition draws ``holdout_size`` indices without replacement and
    trains on the rest; repetitions are drawn independently of each other.
    """
    if holdout_size >= m:
        raise EvaluationError(f"holdout of {holdout_size} needs more than {m} samples")
    if holdout_size < 1 or repetitions < 1:
        raise EvaluationError("holdout_size and repetitions must be >= 1")
    if holdout_size == m - 1:
        warnings.warn("training on a single sample per repetition", stacklevel=2)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    reps = []
    everything = np.arange(m)
    for _ in range(repetitions):
        test = np.sort(rng.choice(m, size=holdout_size, replace=False))
        mask = np.ones(m, dtype=bool)
        mask[test] = False
        reps.append((tuple(int(i) for i in everything[mask]), tuple(int(i) for i in test)))
    return FoldPlan(repetitions=tuple(reps), holdout_size=holdout_size, seed=seed)


# ---------------------------------------------------------------------------
# Metrics


@dataclass(frozen=True)
class ThresholdMetrics:
    """acc/pre/rec per probability threshold.

    ``precision`` entries are None when every sample was excluded (nothing
    predicted true). ``precision_excluded[t]`` counts samples skipped at t
    because no variable was predicted true; ``recall_excluded`` counts samples
    without any actually-true variable (constant across thresholds).
    """

    thresholds: tuple[float, ...]
    accuracy: Mapping[float, float]
    precision: Mapping[float, float | None]
    recall: Mapping[float, float | None]
    precision_excluded: Mapping[float, int]
    recall_excluded: int

    def to_json(self) -> dict:
        return {
            "thresholds": list(self.thresholds),
            "accuracy": {str(t): v for t, v in self.accuracy.items()},
            "precision": {str(t): v for t, v in self.precision.items()},
            "recall": {str(t): v for t, v in self.recall.items()},
            "precision_excluded": {str(t): v for t, v in self.precision_excluded.items()},
            "recall_excluded": self.recall_excluded,
        }

    def mean_accuracy(self) -> float:
        return float(np.mean([self.accuracy[t] for t in self.thresholds]))

    def mean_precision(self) -> float | None:
        vals = [self.precision[t] for t in self.thresholds if self.precision[t] is not None]
        return float(np.mean(vals)) if vals else None

    def mean_recall(self) -> float | None:
        vals = [self.recall[t] for t in self.thresholds if self.recall[t] is not None]
        return float(np.mean(vals)) if vals else None


@dataclass(frozen=True)
class RankingMetrics:
    """Ranking scores per cutoff length k.

    ``ranking_precision[k]`` divides the number of actually true variables in
    the top-k ranking by k; ``ranking_recall[k]`` divides it by the number of
    all actually true variables. The headline pair is reported at k = 5 (or
    the largest available k below that).
    """

    ranking_precision: Mapping[int, float]
    ranking_recall: Mapping[int, float | None]
    recall_excluded: int
    headline_k: int

    def headline(self) -> tuple[float, float | None]:
        return self.ranking_precision[self.headline_k], self.ranking_recall[self.headline_k]

    def to_json(self) -> dict:
        return {
            "ranking_precision": {str(k): v for k, v in self.ranking_precision.items()},
            "ranking_recall": {str(k): v for k, v in self.ranking_recall.items()},
            "recall_excluded": self.recall_excluded,
            "headline_k": self.headline_k,
        }


def _as_matrices(predictions, truth):
    predictions = np.asarray(predictions, dtype=float)
    truth = np.asarray(truth, dtype=bool)
    if predictions.shape != truth.shape or predictions.ndim != 2:
        raise EvaluationError("predictions and truth must be aligned (samples x output variables)")
    if predictions.shape[1] == 0:
        raise EvaluationError("no output variables to score")
    return predictions, truth


def threshold_metrics(
    predictions: np.ndarray,
    truth: np.ndarray,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
) -> ThresholdMetrics:
    """Binary accuracy, precision, and recall at each threshold.

    A variable is predicted true when its posterior strictly exceeds t.
    Accuracy pools all (sample, variable) decisions; precision and recall are
    averaged per sample, excluding samples with an undefined denominator (and
    reporting how many were excluded).
    """
    predictions, truth = _as_matrices(predictions, truth)
    s, n_vars = predictions.shape
    accuracy = {}
    precision = {}
    recall = {}
    pre_excluded = {}
    rec_excluded = int((truth.sum(axis=1) == 0).sum())
    for t in thresholds:
        predicted = predictions > t
        accuracy[float(t)] = float(Fraction(int((predicted == truth).sum()), s * n_vars))
        pre_terms = []
        rec_terms = []
        for i in range(s):
            n_pred = int(predicted[i].sum())
            n_true = int(truth[i].sum())
            n_hit = int((predicted[i] & truth[i]).sum())
            if n_pred > 0:
                pre_terms.append(Fraction(n_hit, n_pred))
            if n_true > 0:
                rec_terms.append(Fraction(n_hit, n_true))
        pre_excluded[float(t)] = s - len(pre_terms)
        precision[float(t)] = float(sum(pre_terms) / len(pre_terms)) if pre_terms else None
        recall[float(t)] = float(sum(rec_terms) / len(rec_terms)) if rec_terms else None
    return ThresholdMetrics(
        thresholds=tuple(float(t) for t in thresholds),
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        precision_excluded=pre_excluded,
        recall_excluded=rec_excluded,
    )


def ranking_metrics(
    predictions: np.ndarray,
    truth: np.ndarray,
    names: Sequence[str],
    k_max: int | None = None,
) -> RankingMetrics:
    """Top-k ranking scores for k = 1..k_max (ties break lexicographically by name)."""
    predictions, truth = _as_matrices(predictions, truth)
    s, n_vars = predictions.shape
    if len(names) != n_vars:
        raise EvaluationError("names must match the prediction columns")
    if k_max is None:
        k_max = n_vars
    if not 1 <= k_max <= n_vars:
        raise EvaluationError(f"k_max must lie in 1..{n_vars}")
    name_rank = np.argsort(np.argsort(np.array(names, dtype=object)))
    rp: dict[int, list[Fraction]] = {k: [] for k in range(1, k_max + 1)}
    rr: dict[int, list[Fraction]] = {k: [] for k in range(1, k_max + 1)}
    excluded = 0
    for i in range(s):
        order = sorted(range(n_vars), key=lambda j: (-predictions[i, j], name_rank[j]))
        n_true = int(truth[i].sum())
        if n_true == 0:
            excluded += 1
        hits = 0
        for k in range(1, k_max + 1):
            hits += int(truth[i, order[k - 1]])
            rp[k].append(Fraction(hits, k))
            if n_true > 0:
                rr[k].append(Fraction(hits, n_true))
    headline_k = min(5, k_max)
    return RankingMetrics(
        ranking_precision={k: float(sum(v) / s) for k, v in rp.items()},
        ranking_recall={k: (float(sum(v) / len(v)) if v else None) for k, v in rr.items()},
        recall_excluded=excluded,
        headline_k=headline_k,
    )


# ---------------------------------------------------------------------------
# Cross-validation


@dataclass(frozen=True)
class DatasetSource:
    """Raw records plus schema, so each repetition can refit discretization."""

    schema: Schema
    records: tuple[SurveyRecord, ...]


@dataclass(frozen=True)
class EvaluationReport:
    architecture: str
    use_case: str
    dataset_digest: str
    n_outputs: tuple[int, ...]
    thresholds: ThresholdMetrics
    ranking: RankingMetrics
    seconds_per_inference: float
    repetitions: int
    holdout_size: int
    seed: int

    def summary(self) -> dict:
        rp, rr = self.ranking.headline()
        return {
            "architecture": self.architecture,
            "use_case": self.use_case,
            "n_outputs": float(np.mean(self.n_outputs)),
            "mean_accuracy": self.thresholds.mean_accuracy(),
            "mean_recall": self.thresholds.mean_recall(),
            "mean_precision": self.thresholds.mean_precision(),
            f"ranking_precision_{self.ranking.headline_k}": rp,
            f"ranking_recall_{self.ranking.headline_k}": rr,
        }

    def to_json(self) -> dict:
        return {
            "architecture": self.architecture,
            "use_case": self.use_case,
            "dataset_digest": self.dataset_digest,
            "n_outputs": list(self.n_outputs),
            "thresholds": self.thresholds.to_json(),
            "ranking": self.ranking.to_json(),
            "seconds_per_inference": self.seconds_per_inference,
            "repetitions": self.repetitions,
            "holdout_size": self.holdout_size,
            "seed": self.seed,
            "summary": self.summary(),
        }


def _mean_metric(values):
    defined = [v for v in values if v is not None]
    return float(np.mean(defined)) if defined else None


def _merge_threshold_metrics(parts: Sequence[ThresholdMetrics]) -> ThresholdMetrics:
    thresholds = parts[0].thresholds
    return ThresholdMetrics(
        thresholds=thresholds,
        accuracy={t: float(np.mean([p.accuracy[t] for p in parts])) for t in thresholds},
        precision={t: _mean_metric([p.precision[t] for p in parts]) for t in thresholds},
        recall={t: _mean_metric([p.recall[t] for p in parts]) for t in thresholds},
        precision_excluded={t: sum(p.precision_excluded[t] for p in parts) for t in thresholds},
        recall_excluded=sum(p.recall_excluded for p in parts),
    )


def _merge_ranking_metrics(parts: Sequence[RankingMetrics]) -> RankingMetrics:
    k_common = min(max(p.ranking_precision) for p in parts)
    return RankingMetrics(
        ranking_precision={
            k: float(np.mean([p.ranking_precision[k] for p in parts])) for k in range(1, k_common + 1)
        },
        ranking_recall={
            k: _mean_metric([p.ranking_recall[k] for p in parts]) for k in range(1, k_common + 1)
        },
        recall_excluded=sum(p.recall_excluded for p in parts),
        headline_k=min(5, k_common),
    )


def _evidence_for_sample(ds: BinaryDataset, row: int, graph_names, output_set) -> dict[str, bool]:
    evidence = {}
    unknown = ds.unknown_factors[row]
    for name in graph_names:
        if name in output_set:
            continue
        desc = ds.descriptor(name)
        if desc.factor is not None and desc.factor in unknown:
            continue
        evidence[name] = bool(ds.samples[row, ds.column(name)])
    return evidence


def _binarize_split(source: DatasetSource, train_idx, test_idx):
    train_records = [source.records[i] for i in train_idx]
    test_records = [source.records[i] for i in test_idx]
    disc = {}
    for factor in source.schema.context_factors:
        if factor.type == "continuous":
            disc[factor.name] = fit_discretization(
                train_records, source.schema, factor.name, factor.intervals
            )
    ds_train = binarize(train_records, source.schema, disc)
    ds_test = binarize(test_records, source.schema, disc)
    return ds_train, ds_test


def run_cross_validation(
    data: BinaryDataset | DatasetSource,
    spec: ArchitectureSpec,
    use_case: UseCase,
    plan: FoldPlan | None = None,
    sampler: SamplerConfig | None = None,
    alpha: float = 1.0,
    method: str = "auto",
    exact_guard: int = DEFAULT_EXACT_GUARD,
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS,
    seed: int = 0,
) -> EvaluationReport:
    """Cross-validate one (architecture, use case) pair.

    Each repetition builds the graph and fits parameters on its training
    split only, then queries the posterior of every output variable for each
    held-out sample, using all other graph variables (minus unknown context
    answers) as evidence. Supplying a DatasetSource additionally refits the
    equal-frequency discretization per repetition, keeping the test split out
    of every fitted quantity. The baseline architecture skips graph and fit
    and predicts training-set relative frequencies.
    """
    if isinstance(data, DatasetSource):
        m = len(data.records)
        digest_ds = binarize(list(data.records), data.schema)
        digest = digest_ds.provenance["source_digest"]
    else:
        m = data.m
        digest = data.provenance.get("source_digest", data.digest())
    if plan is None:
        plan = split_folds(m, seed=seed)
    if sampler is None:
        sampler = SamplerConfig(seed=seed)
    threshold_parts = []
    ranking_parts = []
    n_outputs = []
    inference_seconds = []
    for rep, (train_idx, test_idx) in enumerate(plan.repetitions):
        if isinstance(data, DatasetSource):
            ds_train, ds_test = _binarize_split(data, train_idx, test_idx)
        else:
            ds_train, ds_test = data.subset(train_idx), data.subset(test_idx)
        if spec.baseline_flag:
            report = baseline_predict(ds_train, use_case.output_tag)
            candidates = [d.name for d in ds_train.variables_by_tag(use_case.output_tag)]
            support = node_support(ds_train, candidates, spec.weight_mode)
            outputs = sorted(
                name for name, s in zip(candidates, support) if s >= spec.f(use_case.output_tag)
            )
            if not outputs:
                raise EvaluationError(
                    f"no output variables survive the node filter f({use_case.output_tag}) = "
                    f"{spec.f(use_case.output_tag)}; lower it"
                )
            probs_row = np.array([report.probabilities[name] for name in outputs])
            predictions = np.tile(probs_row, (len(test_idx), 1))
            truth = np.stack(
                [[ds_test.samples[i, ds_test.column(n)] for n in outputs] for i in range(len(test_idx))]
            )
            inference_seconds.append(0.0)
        else:
            dag = build_graph(ds_train, spec)
            outputs = sorted(dag.nodes_by_tag(use_case.output_tag))
            if not outputs:
                raise EvaluationError(
                    f"no output variables survive the node filter f({use_case.output_tag}) = "
                    f"{spec.f(use_case.output_tag)}; lower it"
                )
            bn = fit_mle(dag, ds_train, alpha=alpha, weight_mode=spec.weight_mode)
            output_set = set(outputs)
            predictions = np.zeros((len(test_idx), len(outputs)))
            truth = np.zeros((len(test_idx), len(outputs)), dtype=bool)
            for i in range(len(test_idx)):
                evidence = _evidence_for_sample(ds_test, i, dag.node_names, output_set)
                derived = np.random.SeedSequence([sampler.seed, rep, i]).generate_state(1)[0]
                per_query = SamplerConfig(
                    seed=int(derived),
                    chains=sampler.chains,
                    burn_in=sampler.burn_in,
                    samples_per_chain=sampler.samples_per_chain,
                )
                begun = time.perf_counter()
                posterior = infer(
                    bn, evidence, outputs, sampler=per_query, guard=exact_guard, method=method
                )
                inference_seconds.append(time.perf_counter() - begun)
                predictions[i] = [posterior.probabilities[n] for n in outputs]
                truth[i] = [ds_test.samples[i, ds_test.column(n)] for n in outputs]
        n_outputs.append(len(outputs))
        threshold_parts.append(threshold_metrics(predictions, truth, thresholds))
        ranking_parts.append(ranking_metrics(predictions, truth, outputs))
    return EvaluationReport(
        architecture=spec.name,
        use_case=use_case.code,
        dataset_digest=str(digest),
        n_outputs=tuple(n_outputs),
        thresholds=_merge_threshold_metrics(threshold_parts),
        ranking=_merge_ranking_metrics(ranking_parts),
        seconds_per_inference=float(np.mean(inference_seconds)) if inference_seconds else 0.0,
        repetitions=len(plan.repetitions),
        holdout_size=plan.holdout_size,
        seed=plan.seed,
    )


# ---------------------------------------------------------------------------
# CSV writers


def report_table_csv(reports: Sequence[EvaluationReport]) -> str:
    """One row per report: output count, threshold means, and headline ranking pair."""
    header = (
        "use_case,architecture,n_outputs,mean_accuracy,mean_recall,mean_precision,"
        "ranking_precision_5,ranking_recall_5,seconds_per_inference"
    )
    rows = [header]
    for r in reports:
        s = r.summary()
        rp = s.get(f"ranking_precision_{r.ranking.headline_k}")
        rr = s.get(f"ranking_recall_{r.ranking.headline_k}")

        def fmt(v):
            return "" if v is None else f"{v:.4f}"

        rows.append(
            ",".join(
                [
                    r.use_case,
                    r.architecture,
                    f"{np.mean(r.n_outputs):.1f}",
                    fmt(s["mean_accuracy"]),
                    fmt(s["mean_recall"]),
                    fmt(s["mean_precision"]),
                    fmt(rp),
                    fmt(rr),
                    f"{r.seconds_per_inference:.4f}",
                ]
            )
        )
    return "\n".join(rows) + "\n"


def curves_csv(report: EvaluationReport) -> str:
    """Per-threshold rows for plotting acc/pre/rec curves."""
    rows = ["threshold,accuracy,precision,recall,precision_excluded"]
    tm = report.thresholds
    for t in tm.thresholds:
        pre = tm.precision[t]
        rec = tm.recall[t]
        rows.append(
            f"{t:.1f},{tm.accuracy[t]:.6f},"
            f"{'' if pre is None else f'{pre:.6f}'},"
            f"{'' if rec is None else f'{rec:.6f}'},"
            f"{tm.precision_excluded[t]}"
        )
    return "\n".join(rows) + "\n"
