"""Trained-model files and the read-only registry the service exposes.

A model file bundles the fitted network (or the baseline frequency table),
the architecture and use case it was built for, the dataset digest, and an
optional evaluation report. Files are written once by the CLI and never
mutated by the service.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import os
from dataclasses import dataclass
from typing import Mapping

from .dataset import VariableDescriptor
from .graph import Dag, export_dot
from .inference import (
    BayesianNetwork,
    DEFAULT_EXACT_GUARD,
    PosteriorReport,
    SamplerConfig,
    infer,
    predict_ranking,
)

MODEL_SUFFIX = ".model.json"


class RegistryError(Exception):
    pass


@dataclass(frozen=True)
class Model:
    """One immutable registry entry."""

    model_id: str
    architecture: str
    use_case: str
    output_tag: str
    dataset_digest: str
    created_at: str
    network: BayesianNetwork | None = None
    baseline_probabilities: Mapping[str, float] | None = None
    baseline_variables: tuple[VariableDescriptor, ...] = ()
    evaluation: Mapping | None = None

    def __post_init__(self):
        if (self.network is None) == (self.baseline_probabilities is None):
            raise RegistryError("a model carries either a network or baseline frequencies")

    @property
    def is_baseline(self) -> bool:
        return self.network is None

    def variables(self) -> tuple[VariableDescriptor, ...]:
        if self.network is not None:
            return self.network.dag.nodes
        return self.baseline_variables

    def output_names(self) -> tuple[str, ...]:
        return tuple(sorted(d.name for d in self.variables() if d.tag == self.output_tag))

    def evidence_names(self) -> frozenset[str]:
        return frozenset(d.name for d in self.variables() if d.tag != self.output_tag)

    def graph_dot(self) -> str:
        if self.network is not None:
            return export_dot(self.network.dag, graph_name=self.model_id)
        return export_dot(Dag(nodes=self.baseline_variables), graph_name=self.model_id)

    def predict(
        self,
        evidence: Mapping[str, bool],
        k: int = 5,
        threshold: float = 0.3,
        seed: int | None = None,
        exact_guard: int = DEFAULT_EXACT_GUARD,
        time_budget: float | None = None,
    ) -> tuple[list[tuple[str, float]], dict]:
        """Rank the output variables given tri-state evidence (absent = unknown)."""
        outputs = self.output_names()
        bad = [name for name in evidence if name in outputs]
        if bad:
            raise RegistryError(f"output variable {bad[0]!r} cannot be used as evidence")
        if self.is_baseline:
            report = PosteriorReport(
                probabilities=dict(self.baseline_probabilities),
                method="baseline",
                diagnostics={"evidence_ignored": len(evidence)},
            )
        else:
            known = self.evidence_names()
            unknown = [name for name in evidence if name not in known]
            if unknown:
                raise RegistryError(f"unknown evidence variable {unknown[0]!r}")
            sampler = SamplerConfig(seed=0 if seed is None else int(seed))
            report = infer(
                self.network,
                dict(evidence),
                outputs,
                sampler=sampler,
                guard=exact_guard,
                time_budget=time_budget,
            )
        ranking = predict_ranking(report, k=k, threshold=threshold)
        diagnostics = dict(report.diagnostics)
        diagnostics["method"] = report.method
        return ranking, diagnostics

    def to_json(self) -> dict:
        return {
            "model_id": self.model_id,
            "architecture": self.architecture,
            "use_case": self.use_case,
            "output_tag": self.output_tag,
            "dataset_digest": self.dataset_digest,
            "created_at": self.created_at,
            "network": self.network.to_json() if self.network is not None else None,
            "baseline_probabilities": dict(self.baseline_probabilities)
            if self.baseline_probabilities is not None
            else None,
            "baseline_variables": [d.to_json() for d in self.baseline_variables],
            "evaluation": self.evaluation,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Model":
        return cls(
            model_id=obj["model_id"],
            architecture=obj["architecture"],
            use_case=obj["use_case"],
            output_tag=obj["output_tag"],
            dataset_digest=obj["dataset_digest"],
            created_at=obj.get("created_at", ""),
            network=BayesianNetwork.from_json(obj["network"]) if obj.get("network") else None,
            baseline_probabilities=obj.get("baseline_probabilities"),
            baseline_variables=tuple(
                VariableDescriptor.from_json(d) for d in obj.get("baseline_variables", ())
            ),
            evaluation=obj.get("evaluation"),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Model":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def derive_model_id(architecture: str, use_case: str, dataset_digest: str) -> str:
    payload = f"{architecture}|{use_case}|{dataset_digest}".encode("utf-8")
    return hashlib.sha256(payload).hexdigest()[:12]


def timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


class Registry:
    """Read-only collection of models, loaded once at startup."""

    def __init__(self, models: Mapping[str, Model] | None = None):
        self._models: dict[str, Model] = dict(models or {})

    @classmethod
    def from_dir(cls, directory) -> "Registry":
        models = {}
        for entry in sorted(os.listdir(directory)):
            if not entry.endswith(MODEL_SUFFIX):
                continue
            model = Model.load(os.path.join(directory, entry))
            if model.model_id in models:
                raise RegistryError(f"duplicate model id {model.model_id!r} in {directory}")
            models[model.model_id] = model
        return cls(models)

    def add(self, model: Model) -> None:
        if model.model_id in self._models:
            raise RegistryError(f"model id {model.model_id!r} already registered")
        self._models[model.model_id] = model

    def get(self, model_id: str) -> Model | None:
        return self._models.get(model_id)

    def __len__(self) -> int:
        return len(self._models)

    def entries(self) -> list[Model]:
        return [self._models[k] for k in sorted(self._models)]
