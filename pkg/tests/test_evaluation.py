"""Fold plans, metric definitions (checked in exact rational arithmetic), and CV."""

from fractions import Fraction

import numpy as np
import pytest

from causenet.dataset import binarize
from causenet.evaluation import (
    DatasetSource,
    EvaluationError,
    FoldPlan,
    curves_csv,
    ranking_metrics,
    report_table_csv,
    run_cross_validation,
    split_folds,
    threshold_metrics,
)
from causenet.graph import ArchitectureSpec, UseCase, predefined_architecture
from causenet.inference import SamplerConfig, fit_mle
from causenet.graph import build_graph
from causenet.simulate import planted_problem_cause_records, sparse_single_cause_records

DIAG = UseCase.from_code("diagnostic")
PRED = UseCase.from_code("predictive")


# ---------------------------------------------------------------------------
# split_folds


def test_split_folds_shape_and_disjointness():
    plan = split_folds(488, repetitions=10, holdout_size=30, seed=1)
    assert len(plan.repetitions) == 10
    for train, test in plan.repetitions:
        assert len(test) == 30
        assert not set(train) & set(test)
        assert sorted(train + test) == list(range(488))


def test_split_folds_deterministic():
    assert split_folds(100, seed=7, holdout_size=10) == split_folds(100, seed=7, holdout_size=10)
    assert split_folds(100, seed=7, holdout_size=10) != split_folds(100, seed=8, holdout_size=10)


def test_split_folds_rejects_bad_holdout():
    with pytest.raises(EvaluationError):
        split_folds(30, holdout_size=30)
    with pytest.raises(EvaluationError):
        split_folds(30, holdout_size=0)
    with pytest.raises(EvaluationError):
        split_folds(30, repetitions=0, holdout_size=5)


def test_split_folds_single_training_sample_warns():
    with pytest.warns(UserWarning, match="single sample"):
        split_folds(10, holdout_size=9, repetitions=2)


def test_fold_plan_validates():
    with pytest.raises(EvaluationError):
        FoldPlan(repetitions=(((0, 1), (1, 2)),), holdout_size=2, seed=0)


# ---------------------------------------------------------------------------
# threshold metrics, with an independent rational-arithmetic oracle


def oracle_threshold(probs, truth, t):
    """The three displayed formulas, in exact fractions."""
    s = len(probs)
    n = len(probs[0])
    acc_hits = 0
    pre_terms, rec_terms = [], []
    for i in range(s):
        predicted = [p > t for p in probs[i]]
        acc_hits += sum(1 for j in range(n) if predicted[j] == truth[i][j])
        n_pred = sum(predicted)
        n_true = sum(truth[i])
        hits = sum(1 for j in range(n) if predicted[j] and truth[i][j])
        if n_pred:
            pre_terms.append(Fraction(hits, n_pred))
        if n_true:
            rec_terms.append(Fraction(hits, n_true))
    acc = Fraction(acc_hits, s * n)
    pre = sum(pre_terms) / len(pre_terms) if pre_terms else None
    rec = sum(rec_terms) / len(rec_terms) if rec_terms else None
    return acc, pre, rec, s - len(pre_terms)


def test_perfect_predictor_scores_one_everywhere():
    truth = np.array([[1, 0, 1, 0], [0, 1, 1, 0], [1, 1, 0, 0]], dtype=bool)
    tm = threshold_metrics(truth.astype(float), truth)
    for t in tm.thresholds:
        assert tm.accuracy[t] == 1.0
        assert tm.precision[t] == 1.0
        assert tm.recall[t] == 1.0
        assert tm.precision_excluded[t] == 0


def test_all_zero_predictor_shows_accuracy_paradox():
    truth = np.zeros((1, 20), dtype=bool)
    truth[0, :2] = True
    tm = threshold_metrics(np.zeros((1, 20)), truth)
    assert tm.accuracy[0.5] == pytest.approx(0.9)
    assert tm.recall[0.5] == 0.0
    assert tm.precision[0.5] is None
    assert tm.precision_excluded[0.5] == 1


def test_three_variable_fixture_against_formulas():
    # posteriors (0.8, 0.4, 0.6), truth (T, F, F), t = 0.5: the displayed
    # formulas give acc 2/3, pre 1/2, rec 1
    probs = np.array([[0.8, 0.4, 0.6]])
    truth = np.array([[True, False, False]])
    tm = threshold_metrics(probs, truth, thresholds=(0.5,))
    acc, pre, rec, excluded = oracle_threshold(probs.tolist(), truth.tolist(), 0.5)
    assert (acc, pre, rec) == (Fraction(2, 3), Fraction(1, 2), Fraction(1, 1))
    assert tm.accuracy[0.5] == float(acc)
    assert tm.precision[0.5] == float(pre)
    assert tm.recall[0.5] == float(rec)
    assert tm.precision_excluded[0.5] == excluded == 0


def test_threshold_metrics_match_oracle_exactly_on_random_fixtures():
    rng = np.random.default_rng(31)
    for trial in range(10):
        s, n = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        probs = np.round(rng.random((s, n)), 2)
        truth = rng.random((s, n)) < 0.4
        tm = threshold_metrics(probs, truth)
        for t in tm.thresholds:
            acc, pre, rec, excluded = oracle_threshold(probs.tolist(), truth.tolist(), t)
            assert tm.accuracy[t] == float(acc)
            assert tm.precision[t] == (None if pre is None else float(pre))
            assert tm.recall[t] == (None if rec is None else float(rec))
            assert tm.precision_excluded[t] == excluded


def test_predicted_count_and_recall_monotone_in_threshold():
    rng = np.random.default_rng(13)
    probs = rng.random((8, 10))
    truth = rng.random((8, 10)) < 0.5
    tm = threshold_metrics(probs, truth)
    counts = [(probs > t).sum() for t in tm.thresholds]
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    recalls = [tm.recall[t] for t in tm.thresholds]
    assert all(a >= b for a, b in zip(recalls, recalls[1:]) if a is not None and b is not None)


def test_metrics_invariant_under_variable_permutation():
    rng = np.random.default_rng(41)
    probs = rng.random((5, 6))
    truth = rng.random((5, 6)) < 0.5
    perm = rng.permutation(6)
    tm1 = threshold_metrics(probs, truth)
    tm2 = threshold_metrics(probs[:, perm], truth[:, perm])
    assert tm1.accuracy == tm2.accuracy
    assert tm1.precision == tm2.precision
    assert tm1.recall == tm2.recall


# ---------------------------------------------------------------------------
# ranking metrics


def test_ranking_all_true_saturates():
    truth = np.ones((3, 4), dtype=bool)
    rm = ranking_metrics(np.random.default_rng(1).random((3, 4)), truth, names=list("abcd"))
    for k, v in rm.ranking_precision.items():
        assert v == 1.0


def test_ranking_perfect_ordering_five_of_twenty():
    probs = np.zeros((1, 20))
    truth = np.zeros((1, 20), dtype=bool)
    probs[0, :5] = [0.9, 0.8, 0.7, 0.6, 0.55]
    truth[0, :5] = True
    names = [f"v{i:02d}" for i in range(20)]
    rm = ranking_metrics(probs, truth, names)
    assert rm.ranking_precision[5] == 1.0
    assert rm.ranking_recall[5] == 1.0


def test_ranking_two_hits_in_top_five():
    # 5 true overall, exactly 2 inside the top 5
    probs = np.array([[0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05]])
    truth = np.array([[1, 0, 1, 0, 0, 1, 1, 0, 1, 0]], dtype=bool)
    names = [f"v{i}" for i in range(10)]
    rm = ranking_metrics(probs, truth, names, k_max=5)
    assert rm.ranking_precision[5] == pytest.approx(2 / 5)
    assert rm.ranking_recall[5] == pytest.approx(2 / 5)


def test_ranking_recall_non_decreasing_in_k():
    rng = np.random.default_rng(55)
    probs = rng.random((6, 9))
    truth = rng.random((6, 9)) < 0.4
    names = [f"v{i}" for i in range(9)]
    rm = ranking_metrics(probs, truth, names)
    values = [rm.ranking_recall[k] for k in sorted(rm.ranking_recall)]
    values = [v for v in values if v is not None]
    assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_ranking_scores_agree_when_true_count_equals_k():
    rng = np.random.default_rng(56)
    probs = rng.random((5, 8))
    truth = np.zeros((5, 8), dtype=bool)
    for i in range(5):
        truth[i, rng.choice(8, size=3, replace=False)] = True
    rm = ranking_metrics(probs, truth, [f"v{i}" for i in range(8)], k_max=3)
    assert rm.ranking_precision[3] == pytest.approx(rm.ranking_recall[3])


def test_ranking_tie_break_is_lexicographic():
    probs = np.array([[0.5, 0.5, 0.5]])
    truth = np.array([[0, 0, 1]], dtype=bool)
    # all tied: the ranking is alphabetical, so "aaa" fills slot 1
    rm1 = ranking_metrics(probs, truth, ["aaa", "bbb", "ccc"], k_max=1)
    assert rm1.ranking_precision[1] == 0.0
    truth2 = np.array([[1, 0, 0]], dtype=bool)
    rm2 = ranking_metrics(probs, truth2, ["aaa", "bbb", "ccc"], k_max=1)
    assert rm2.ranking_precision[1] == 1.0


# ---------------------------------------------------------------------------
# cross-validation


@pytest.fixture(scope="module")
def planted():
    schema, records, truth = planted_problem_cause_records(m=260, seed=70)
    return schema, records, truth


def unfiltered_pc_spec():
    return ArchitectureSpec(
        name="planted", pairs=(("P", "C"),), weight_mode="occurrence"
    ).with_filters(node_filter=0.0, edge_filter=0.0)


def test_cv_planted_structure_beats_baseline(planted):
    schema, records, _ = planted
    ds = binarize(records, schema)
    plan = split_folds(ds.m, repetitions=3, holdout_size=30, seed=5)
    spec = unfiltered_pc_spec()
    a0 = predefined_architecture("A0", node_filter=0.0)
    model_report = run_cross_validation(ds, spec, DIAG, plan=plan, method="exact")
    base_report = run_cross_validation(ds, a0, DIAG, plan=plan)
    assert model_report.thresholds.recall[0.5] - base_report.thresholds.recall[0.5] >= 0.2


def test_cv_baseline_is_evidence_invariant(planted):
    schema, records, _ = planted
    ds = binarize(records, schema)
    plan = split_folds(ds.m, repetitions=2, holdout_size=20, seed=9)
    a0 = predefined_architecture("A0", node_filter=0.0)
    r1 = run_cross_validation(ds, a0, DIAG, plan=plan)
    # flipping evidence-side values (problems) in test rows cannot move baseline predictions
    flipped = ds.samples.copy()
    for _, test_idx in plan.repetitions:
        for i in test_idx:
            for p in schema.problems:
                col = ds.column(f"P:{p}")
                flipped[i, col] = ~flipped[i, col]
    import dataclasses

    ds2 = dataclasses.replace(
        ds, samples=flipped, provenance={"source_digest": "mutated"}
    )
    r2 = run_cross_validation(ds2, a0, DIAG, plan=plan)
    assert r1.thresholds.accuracy == r2.thresholds.accuracy
    assert r1.thresholds.recall == r2.thresholds.recall


def test_cv_training_never_sees_test_rows(planted):
    schema, records, _ = planted
    ds = binarize(records, schema)
    plan = split_folds(ds.m, repetitions=1, holdout_size=30, seed=3)
    train_idx, test_idx = plan.repetitions[0]
    spec = unfiltered_pc_spec()
    dag = build_graph(ds.subset(train_idx), spec)
    bn1 = fit_mle(dag, ds.subset(train_idx), alpha=1.0)
    # mutate one held-out row and refit: the training view is unchanged
    mutated = ds.samples.copy()
    mutated[test_idx[0]] = ~mutated[test_idx[0]]
    import dataclasses

    ds2 = dataclasses.replace(ds, samples=mutated)
    dag2 = build_graph(ds2.subset(train_idx), spec)
    bn2 = fit_mle(dag2, ds2.subset(train_idx), alpha=1.0)
    assert dag.edges == dag2.edges
    for name in bn1.node_names:
        assert np.array_equal(bn1.cpts[name].table, bn2.cpts[name].table)


def test_cv_accuracy_paradox_on_sparse_data():
    schema, records = sparse_single_cause_records(m=400, seed=8, n_causes=20)
    ds = binarize(records, schema)
    plan = split_folds(ds.m, repetitions=2, holdout_size=30, seed=2)
    a0 = predefined_architecture("A0", node_filter=0.0)
    report = run_cross_validation(ds, a0, DIAG, plan=plan)
    assert report.thresholds.accuracy[0.5] >= 0.9
    assert report.thresholds.recall[0.5] == 0.0


def test_cv_baseline_collapses_with_rising_threshold():
    # on sparse data the baseline offers no useful recall/precision trade-off:
    # recall decays to zero, precision stays below the top marginal frequency
    # and goes undefined once nothing clears the threshold
    from causenet.dataset import Schema, SurveyRecord, Triple

    schema = Schema(
        problems=tuple(f"p{i:02d}" for i in range(20)),
        causes=("c0", "c1"),
        effects=("e0",),
    )
    rng = np.random.default_rng(44)
    freqs = np.linspace(0.04, 0.44, 20)
    records = []
    for i in range(300):
        chosen = [j for j in range(20) if rng.random() < freqs[j]][:5]
        triples = tuple(
            Triple(schema.problems[j], "c0" if rng.random() < 0.5 else "c1", "e0", rank)
            for rank, j in enumerate(chosen, start=1)
        )
        records.append(SurveyRecord(f"r{i}", {}, triples))
    ds = binarize(records, schema)
    plan = split_folds(ds.m, repetitions=2, holdout_size=30, seed=11)
    a0 = predefined_architecture("A0", node_filter=0.0)
    report = run_cross_validation(ds, a0, PRED, plan=plan)
    tm = report.thresholds
    recs = [tm.recall[t] for t in tm.thresholds if tm.recall[t] is not None]
    assert all(a >= b - 1e-12 for a, b in zip(recs, recs[1:]))
    assert tm.recall[0.9] == 0.0
    for t in tm.thresholds:
        assert tm.precision[t] is None or tm.precision[t] < 0.6
    assert tm.precision[0.9] is None
    exclusions = [tm.precision_excluded[t] for t in tm.thresholds]
    assert all(a <= b for a, b in zip(exclusions, exclusions[1:]))


def test_cv_empty_output_set_is_reported(planted):
    schema, records, _ = planted
    ds = binarize(records, schema)
    plan = split_folds(ds.m, repetitions=1, holdout_size=20, seed=1)
    spec = unfiltered_pc_spec().with_filters(node_filter=float("inf"))
    with pytest.raises(EvaluationError, match="lower"):
        run_cross_validation(ds, spec, DIAG, plan=plan)


def test_cv_deterministic_given_seeds(planted):
    schema, records, _ = planted
    ds = binarize(records, schema)
    plan = split_folds(ds.m, repetitions=2, holdout_size=15, seed=21)
    spec = unfiltered_pc_spec()
    sampler = SamplerConfig(seed=5, chains=2, burn_in=50, samples_per_chain=600)
    r1 = run_cross_validation(ds, spec, DIAG, plan=plan, sampler=sampler, method="gibbs")
    r2 = run_cross_validation(ds, spec, DIAG, plan=plan, sampler=sampler, method="gibbs")
    assert r1.thresholds.accuracy == r2.thresholds.accuracy
    assert r1.ranking.ranking_precision == r2.ranking.ranking_precision


def test_cv_dataset_source_refits_discretization():
    from causenet.dataset import ContextFactor, Schema, SurveyRecord, Triple

    schema = Schema(
        problems=tuple(f"p{i}" for i in range(8)),
        causes=("c0",),
        effects=("e0",),
        context_factors=(ContextFactor(name="x", tag="CX", type="continuous", intervals=4),),
    )
    rng = np.random.default_rng(19)
    records = []
    for i in range(120):
        context = {"x": float(rng.integers(1, 60))} if rng.random() > 0.05 else {}
        triples = tuple(
            Triple(schema.problems[j], "c0", "e0", rank)
            for rank, j in enumerate(rng.choice(8, size=2, replace=False), start=1)
        )
        records.append(SurveyRecord(f"r{i}", context, triples))
    source = DatasetSource(schema=schema, records=tuple(records))
    plan = split_folds(120, repetitions=2, holdout_size=20, seed=6)
    spec = ArchitectureSpec(
        name="ctx", pairs=(("CX", "P"),), weight_mode="occurrence"
    ).with_filters(node_filter=0.0, edge_filter=0.0)
    sampler = SamplerConfig(seed=2, chains=2, burn_in=100, samples_per_chain=500)
    report = run_cross_validation(source, spec, PRED, plan=plan, sampler=sampler, method="auto")
    assert report.repetitions == 2
    assert all(n == 8 for n in report.n_outputs)


def test_report_csv_shapes(planted):
    schema, records, _ = planted
    ds = binarize(records, schema)
    plan = split_folds(ds.m, repetitions=1, holdout_size=20, seed=4)
    report = run_cross_validation(ds, unfiltered_pc_spec(), DIAG, plan=plan, method="exact")
    table = report_table_csv([report])
    assert len(table.strip().splitlines()) == 2
    curves = curves_csv(report)
    lines = curves.strip().splitlines()
    assert len(lines) == 1 + 9
    assert lines[0].startswith("threshold,")
    payload = report.to_json()
    assert payload["architecture"] == "planted"
    assert "summary" in payload
