"""HTTP facade over a read-only model registry.

Endpoints:
  GET  /models                      list registered models
  GET  /models/{id}/variables       variable names grouped by tag
  GET  /models/{id}/graph.dot       Graphviz DOT text of the fitted graph
  GET  /models/{id}/metrics         the stored evaluation report
  POST /models/{id}/predict         ranked posterior given tri-state evidence

Evidence over the wire is tri-state: variables listed with true/false are
clamped, absent variables stay unobserved and are marginalized.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .inference import ImpossibleEvidenceError, InferenceTimeout
from .registry import Model, Registry, RegistryError

DEFAULT_TIMEOUT_SECONDS = 600.0


class EvidenceItem(BaseModel):
    variable: str
    value: bool


class PredictRequest(BaseModel):
    evidence: list[EvidenceItem] = Field(default_factory=list)
    k: int = Field(default=5, ge=1)
    threshold: float = Field(default=0.3, ge=0.0, le=1.0)
    seed: Optional[int] = None


def _model_or_404(registry: Registry, model_id: str) -> Model:
    model = registry.get(model_id)
    if model is None:
        raise HTTPException(status_code=404, detail=f"no model with id {model_id!r}")
    return model


def _model_listing(model: Model) -> dict:
    summary = None
    if model.evaluation:
        summary = model.evaluation.get("summary", model.evaluation)
    return {
        "model_id": model.model_id,
        "architecture": model.architecture,
        "use_case": model.use_case,
        "output_tag": model.output_tag,
        "dataset_digest": model.dataset_digest,
        "created_at": model.created_at,
        "baseline": model.is_baseline,
        "metrics_summary": summary,
    }


def create_app(registry: Registry, timeout_seconds: float = DEFAULT_TIMEOUT_SECONDS) -> FastAPI:
    app = FastAPI(title="causenet prediction service")

    @app.get("/models")
    def list_models():
        return [_model_listing(m) for m in registry.entries()]

    @app.get("/models/{model_id}")
    def model_info(model_id: str):
        return _model_listing(_model_or_404(registry, model_id))

    @app.get("/models/{model_id}/variables")
    def model_variables(model_id: str):
        model = _model_or_404(registry, model_id)
        groups: dict[str, list] = {}
        for desc in model.variables():
            groups.setdefault(desc.tag, []).append(desc.to_json())
        return {
            "model_id": model.model_id,
            "dataset_digest": model.dataset_digest,
            "output_tag": model.output_tag,
            "groups": [
                {"tag": tag, "variables": sorted(items, key=lambda d: d["name"])}
                for tag, items in sorted(groups.items())
            ],
        }

    @app.get("/models/{model_id}/graph.dot")
    def model_graph(model_id: str):
        model = _model_or_404(registry, model_id)
        return PlainTextResponse(model.graph_dot(), media_type="text/vnd.graphviz")

    @app.get("/models/{model_id}/metrics")
    def model_metrics(model_id: str):
        model = _model_or_404(registry, model_id)
        if not model.evaluation:
            raise HTTPException(status_code=404, detail=f"model {model_id!r} has no stored evaluation")
        return {
            "model_id": model.model_id,
            "dataset_digest": model.dataset_digest,
            "evaluation": model.evaluation,
        }

    @app.post("/models/{model_id}/predict")
    def predict(model_id: str, request: PredictRequest):
        model = _model_or_404(registry, model_id)
        evidence = {}
        for item in request.evidence:
            if item.variable in evidence:
                raise HTTPException(status_code=422, detail=f"duplicate evidence variable {item.variable!r}")
            evidence[item.variable] = item.value
        try:
            ranking, diagnostics = model.predict(
                evidence,
                k=request.k,
                threshold=request.threshold,
                seed=request.seed,
                time_budget=timeout_seconds,
            )
        except RegistryError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        except ImpossibleEvidenceError as exc:
            return JSONResponse(
                status_code=400,
                content={
                    "error": "impossible_evidence",
                    "detail": str(exc),
                    "model_id": model.model_id,
                    "dataset_digest": model.dataset_digest,
                },
            )
        except InferenceTimeout as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from exc
        return {
            "model_id": model.model_id,
            "dataset_digest": model.dataset_digest,
            "ranking": [{"variable": name, "probability": p} for name, p in ranking],
            "cutoff": {"k": request.k, "t": request.threshold},
            "diagnostics": diagnostics,
        }

    return app
