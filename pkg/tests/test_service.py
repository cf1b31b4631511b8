"""CLI subcommands and the HTTP prediction service."""

import json

import pytest
from fastapi.testclient import TestClient

from causenet.cli import main as cli_main
from causenet.dataset import BinaryDataset, Schema, SurveyRecord, Triple, binarize
from causenet.graph import ArchitectureSpec, build_graph
from causenet.inference import fit_mle
from causenet.registry import Model, Registry, derive_model_id, timestamp
from causenet.service import create_app
from causenet.simulate import layout_2018, planted_problem_cause_records, random_records
from helpers import parse_dot


def write_raw_file(tmp_path, name="raw.json", m=60, seed=23):
    schema = layout_2018()
    records = random_records(schema, m, seed=seed)
    doc = {
        "schema": schema.to_json(),
        "records": [
            {
                "id": r.record_id,
                "context": dict(r.context_answers),
                "triples": [
                    {"problem": t.problem, "cause": t.cause, "effect": t.effect, "rank": t.rank}
                    for t in r.triples
                ],
            }
            for r in records
        ],
    }
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


@pytest.fixture()
def prepared(tmp_path):
    raw = write_raw_file(tmp_path)
    out = tmp_path / "prepared.json"
    assert cli_main(["prepare", str(raw), "-o", str(out)]) == 0
    return out


# ---------------------------------------------------------------------------
# CLI


def test_cli_prepare_writes_216_variables(prepared):
    ds = BinaryDataset.load(prepared)
    assert len(ds.variables) == 216
    assert ds.m == 60


def test_cli_prepare_idempotent(tmp_path, prepared):
    again = tmp_path / "prepared2.json"
    assert cli_main(["prepare", str(tmp_path / "raw.json"), "-o", str(again)]) == 0
    assert (tmp_path / "prepared.json").read_bytes() == again.read_bytes()


def test_cli_prepare_missing_schema_for_csv(tmp_path):
    csv_path = tmp_path / "raw.csv"
    csv_path.write_text("id\nr1\n", encoding="utf-8")
    assert cli_main(["prepare", str(csv_path), "-o", str(tmp_path / "out.json")]) == 2


def test_cli_train_model_roundtrips(tmp_path, prepared):
    model_path = tmp_path / "a3.model.json"
    code = cli_main(
        [
            "train", str(prepared),
            "-a", "A3", "-u", "diagnostic",
            "--node-filter", "2", "--edge-filter", "1", "--cap", "15",
            "-o", str(model_path),
        ]
    )
    assert code == 0
    model = Model.load(model_path)
    assert model.architecture == "A3"
    assert not model.is_baseline
    assert max(len(model.network.dag.parents(n)) for n in model.network.node_names) <= 15
    again = Model.from_json(model.to_json())
    assert again.to_json() == model.to_json()


def test_cli_train_baseline(tmp_path, prepared):
    model_path = tmp_path / "a0.model.json"
    assert (
        cli_main(
            ["train", str(prepared), "-a", "A0", "-u", "predictive", "--node-filter", "1",
             "-o", str(model_path)]
        )
        == 0
    )
    model = Model.load(model_path)
    assert model.is_baseline
    assert model.network is None
    assert all(0.0 <= p <= 1.0 for p in model.baseline_probabilities.values())


def test_cli_train_empty_outputs_advisory(tmp_path, prepared, capsys):
    code = cli_main(
        ["train", str(prepared), "-a", "A3", "-u", "diagnostic",
         "--node-filter", "1e9", "-o", str(tmp_path / "x.model.json")]
    )
    assert code == 3
    assert "lower" in capsys.readouterr().err


def test_cli_validate_outputs(tmp_path):
    schema, records, _ = planted_problem_cause_records(m=120, seed=3)
    raw = tmp_path / "planted.json"
    raw.write_text(
        json.dumps(
            {
                "schema": schema.to_json(),
                "records": [
                    {
                        "id": r.record_id,
                        "context": {},
                        "triples": [
                            {"problem": t.problem, "cause": t.cause, "effect": t.effect, "rank": t.rank}
                            for t in r.triples
                        ],
                    }
                    for r in records
                ],
            }
        ),
        encoding="utf-8",
    )
    prepared = tmp_path / "planted.ds.json"
    assert cli_main(["prepare", str(raw), "-o", str(prepared)]) == 0
    report_path = tmp_path / "report.json"
    csv_path = tmp_path / "report.csv"
    curves_path = tmp_path / "curves.csv"
    args = [
        "validate", str(prepared),
        "-a", "A4", "-u", "diagnostic",
        "--node-filter", "0", "--edge-filter", "0",
        "--reps", "2", "--holdout", "15", "--seed", "5", "--sampler-seed", "5",
        "--method", "exact",
        "-o", str(report_path), "--csv", str(csv_path), "--curves", str(curves_path),
    ]
    assert cli_main(args) == 0
    report = json.loads(report_path.read_text())
    assert report["architecture"] == "A4"
    assert report["repetitions"] == 2
    curves = curves_path.read_text().strip().splitlines()
    assert len(curves) == 10  # header + 9 thresholds
    table = csv_path.read_text().strip().splitlines()
    assert table[0].startswith("use_case,architecture")
    # identical seeds reproduce the identical report
    report_path2 = tmp_path / "report2.json"
    args2 = args.copy()
    args2[args2.index(str(report_path))] = str(report_path2)
    assert cli_main(args2) == 0
    report2 = json.loads(report_path2.read_text())
    report.pop("seconds_per_inference")
    report2.pop("seconds_per_inference")
    assert report2 == report


def test_cli_predict_prints_ranking(tmp_path, prepared, capsys):
    model_path = tmp_path / "m.model.json"
    assert (
        cli_main(
            ["train", str(prepared), "-a", "A5", "-u", "diagnostic",
             "--node-filter", "2", "--edge-filter", "1", "--cap", "12", "-o", str(model_path)]
        )
        == 0
    )
    capsys.readouterr()
    model = Model.load(model_path)
    evidence_var = sorted(model.evidence_names())[0]
    code = cli_main(
        ["predict", str(model_path), "-e", f"{evidence_var}=true", "-k", "3",
         "--threshold", "0", "--seed", "1"]
    )
    assert code == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert 1 <= len(out) <= 3
    assert out[0].lstrip().startswith("1.")


# ---------------------------------------------------------------------------
# HTTP service


@pytest.fixture(scope="module")
def service_client():
    schema, records, _ = planted_problem_cause_records(m=200, seed=31)
    ds = binarize(records, schema)
    spec = ArchitectureSpec(name="planted", pairs=(("P", "C"),), weight_mode="occurrence")
    dag = build_graph(ds, spec)
    bn = fit_mle(dag, ds, alpha=1.0)
    digest = str(ds.provenance["source_digest"])
    model = Model(
        model_id="fixture",
        architecture="planted",
        use_case="diagnostic",
        output_tag="C",
        dataset_digest=digest,
        created_at=timestamp(),
        network=bn,
        evaluation={"summary": {"mean_accuracy": 0.9}},
    )
    # a second, degenerate model whose CPTs contain hard zeros (alpha = 0)
    always = Schema(problems=("p0",), causes=("c0", "c1"), effects=("e0",))
    det_records = [
        SurveyRecord(f"r{i}", {}, (Triple("p0", "c0" if i % 2 else "c1", "e0", 1),))
        for i in range(40)
    ]
    det_ds = binarize(det_records, always)
    det_spec = ArchitectureSpec(name="det", pairs=(("P", "C"),), weight_mode="occurrence")
    det_bn = fit_mle(build_graph(det_ds, det_spec), det_ds, alpha=0.0)
    deterministic = Model(
        model_id="deterministic",
        architecture="det",
        use_case="diagnostic",
        output_tag="C",
        dataset_digest=str(det_ds.provenance["source_digest"]),
        created_at=timestamp(),
        network=det_bn,
    )
    registry = Registry({"fixture": model, "deterministic": deterministic})
    return TestClient(create_app(registry))


def test_service_lists_models(service_client):
    body = service_client.get("/models").json()
    ids = {entry["model_id"] for entry in body}
    assert ids == {"fixture", "deterministic"}
    fixture = next(e for e in body if e["model_id"] == "fixture")
    assert fixture["metrics_summary"] == {"mean_accuracy": 0.9}
    assert fixture["use_case"] == "diagnostic"


def test_service_variables_grouped_by_tag(service_client):
    body = service_client.get("/models/fixture/variables").json()
    tags = [group["tag"] for group in body["groups"]]
    assert tags == ["C", "P"]
    assert body["output_tag"] == "C"
    c_group = body["groups"][0]
    assert all(v["name"].startswith("C:") for v in c_group["variables"])


def test_service_graph_dot_parses(service_client):
    response = service_client.get("/models/fixture/graph.dot")
    assert response.status_code == 200
    nodes, edges = parse_dot(response.text)
    assert nodes > 0 and edges > 0


def test_service_metrics_endpoint(service_client):
    assert service_client.get("/models/fixture/metrics").status_code == 200
    assert service_client.get("/models/deterministic/metrics").status_code == 404


def test_service_unknown_model_404(service_client):
    assert service_client.get("/models/nope/variables").status_code == 404
    assert service_client.post("/models/nope/predict", json={}).status_code == 404


def test_service_predict_empty_evidence_marginals(service_client):
    body = service_client.post(
        "/models/fixture/predict", json={"k": 5, "threshold": 0.0}
    ).json()
    assert body["model_id"] == "fixture"
    assert body["dataset_digest"]
    ranking = body["ranking"]
    assert 1 <= len(ranking) <= 5
    probs = [item["probability"] for item in ranking]
    assert probs == sorted(probs, reverse=True)
    assert body["cutoff"] == {"k": 5, "t": 0.0}


def test_service_predict_with_evidence_changes_ranking(service_client):
    problems = service_client.get("/models/fixture/variables").json()["groups"][1]["variables"]
    target_problem = problems[0]["name"]
    empty = service_client.post("/models/fixture/predict", json={"threshold": 0.0}).json()
    observed = service_client.post(
        "/models/fixture/predict",
        json={"evidence": [{"variable": target_problem, "value": True}], "threshold": 0.0},
    ).json()
    assert observed["ranking"] != empty["ranking"]


def test_service_rejects_unknown_evidence_variable(service_client):
    response = service_client.post(
        "/models/fixture/predict",
        json={"evidence": [{"variable": "C:not a variable", "value": True}]},
    )
    assert response.status_code == 422
    assert "not a variable" in response.json()["detail"]


def test_service_rejects_output_variable_as_evidence(service_client):
    outputs = service_client.get("/models/fixture/variables").json()["groups"][0]
    name = outputs["variables"][0]["name"]
    response = service_client.post(
        "/models/fixture/predict", json={"evidence": [{"variable": name, "value": True}]}
    )
    assert response.status_code == 422
    assert name in response.json()["detail"]


def test_service_impossible_evidence_error_body(service_client):
    response = service_client.post(
        "/models/deterministic/predict",
        json={"evidence": [{"variable": "P:p0", "value": False}], "threshold": 0.0},
    )
    assert response.status_code == 400
    body = response.json()
    assert body["error"] == "impossible_evidence"
    assert body["model_id"] == "deterministic"


def test_service_identical_requests_identical_bodies(service_client):
    payload = {"evidence": [], "k": 4, "threshold": 0.1, "seed": 11}
    r1 = service_client.post("/models/fixture/predict", json=payload)
    r2 = service_client.post("/models/fixture/predict", json=payload)
    assert r1.content == r2.content


def test_registry_from_dir_roundtrip(tmp_path, service_client):
    schema, records, _ = planted_problem_cause_records(m=80, seed=2)
    ds = binarize(records, schema)
    spec = ArchitectureSpec(name="planted", pairs=(("P", "C"),), weight_mode="occurrence")
    bn = fit_mle(build_graph(ds, spec), ds, alpha=1.0)
    model = Model(
        model_id=derive_model_id("planted", "diagnostic", "x"),
        architecture="planted",
        use_case="diagnostic",
        output_tag="C",
        dataset_digest="x",
        created_at=timestamp(),
        network=bn,
    )
    model.save(tmp_path / f"{model.model_id}.model.json")
    registry = Registry.from_dir(tmp_path)
    assert len(registry) == 1
    assert registry.get(model.model_id).architecture == "planted"
