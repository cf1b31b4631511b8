"""Capture real service responses as frontend test fixtures.

Builds a small diagnostic model over requirements-engineering-flavored
answer texts, mounts the HTTP app in process, replays the requests the
frontend tests need, and freezes the raw JSON bodies under test/fixtures/.
Rerun after changing the service or the fixture schema:

    python3 scripts/capture_fixtures.py
"""

import json
import pathlib

import numpy as np
from fastapi.testclient import TestClient

from causenet.dataset import Schema, SurveyRecord, Triple, binarize
from causenet.evaluation import run_cross_validation, split_folds
from causenet.graph import ArchitectureSpec, UseCase, build_graph
from causenet.inference import fit_mle
from causenet.registry import Model, Registry
from causenet.service import create_app

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "test" / "fixtures"

PROBLEMS = (
    "Unclear requirements",
    "Requirements keep changing",
    "Slow stakeholder feedback",
    "Team communication gaps",
    "Scope never agreed",
    "Requirements not testable",
    "Conflicting priorities",
    "Documentation lagging behind",
)
CAUSES = (
    "No requirements review",
    "Missing product vision",
    "Overloaded product owner",
    "No access to end users",
    "Inexperienced analysts",
    "Process skipped under pressure",
    "Unclear responsibilities",
    "Tooling mismatch",
    "High staff turnover",
    "Distributed team friction",
)
EFFECTS = (
    "Rework of finished features",
    "Missed deadlines",
    "Budget overrun",
    "Team frustration",
    "Growing defect backlog",
    "Customer distrust",
    "Features cut late",
    "Overtime spikes",
)

EVIDENCE_PROBLEMS = PROBLEMS[:5]
EVIDENCE_EFFECTS = EFFECTS[:8]


def fixture_records(schema, m=400, seed=97):
    rng = np.random.default_rng(seed)
    n_p, n_c, n_e = len(schema.problems), len(schema.causes), len(schema.effects)
    cause_pool = {j: rng.choice(n_c, size=3, replace=False) for j in range(n_p)}
    effect_pool = {j: rng.choice(n_e, size=3, replace=False) for j in range(n_p)}
    records = []
    for i in range(m):
        chosen = rng.choice(n_p, size=3, replace=False)
        triples = []
        for rank, j in enumerate(chosen, start=1):
            cause = int(rng.choice(cause_pool[int(j)])) if rng.random() < 0.8 else int(rng.integers(n_c))
            effect = int(rng.choice(effect_pool[int(j)])) if rng.random() < 0.8 else int(rng.integers(n_e))
            triples.append(
                Triple(schema.problems[int(j)], schema.causes[cause], schema.effects[effect], rank)
            )
        records.append(SurveyRecord(f"r{i:04d}", {}, tuple(triples)))
    return records


def main():
    schema = Schema(problems=PROBLEMS, causes=CAUSES, effects=EFFECTS)
    records = fixture_records(schema)
    ds = binarize(records, schema)
    spec = ArchitectureSpec(name="survey", pairs=(("C", "P"), ("P", "E")), weight_mode="inverse-rank")
    dag = build_graph(ds, spec)
    bn = fit_mle(dag, ds, alpha=1.0)
    use_case = UseCase.from_code("diagnostic")
    plan = split_folds(ds.m, repetitions=3, holdout_size=30, seed=5)
    evaluation = run_cross_validation(ds, spec, use_case, plan=plan, method="exact").to_json()
    model = Model(
        model_id="re-survey-diagnostic",
        architecture="survey",
        use_case="diagnostic",
        output_tag="C",
        dataset_digest=str(ds.provenance["source_digest"]),
        created_at="2026-01-01T00:00:00Z",
        network=bn,
        evaluation=evaluation,
    )
    client = TestClient(create_app(Registry({model.model_id: model})))

    evidence = [{"variable": f"P:{p}", "value": True} for p in EVIDENCE_PROBLEMS]
    evidence += [{"variable": f"E:{e}", "value": True} for e in EVIDENCE_EFFECTS]
    evidence.sort(key=lambda item: item["variable"])  # the UI sends sorted evidence
    predict_request = {"evidence": evidence, "k": 5, "threshold": 0.3}
    high_threshold_request = {"evidence": evidence, "k": 5, "threshold": 0.99}

    FIXTURES.mkdir(parents=True, exist_ok=True)
    captures = {
        "models.json": client.get("/models").json(),
        "variables.json": client.get(f"/models/{model.model_id}/variables").json(),
        "metrics.json": client.get(f"/models/{model.model_id}/metrics").json(),
        "predict_response.json": client.post(
            f"/models/{model.model_id}/predict", json=predict_request
        ).json(),
        "predict_response_t99.json": client.post(
            f"/models/{model.model_id}/predict", json=high_threshold_request
        ).json(),
        "predict_request.json": predict_request,
    }
    dot = client.get(f"/models/{model.model_id}/graph.dot").text
    for name, payload in captures.items():
        (FIXTURES / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    (FIXTURES / "graph.dot").write_text(dot)
    # the same model as a servable file, so `causenet serve test/fixtures`
    # reproduces these captures live
    model.save(FIXTURES / f"{model.model_id}.model.json")

    ranking = captures["predict_response.json"]["ranking"]
    print(f"captured {len(captures) + 1} fixtures to {FIXTURES}")
    print(f"top-5 ranking ({len(ranking)} entries):")
    for i, item in enumerate(ranking, start=1):
        print(f"  {i}. {item['variable']}  {item['probability']:.3f}")


if __name__ == "__main__":
    main()
