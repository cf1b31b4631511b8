"""Survey data ingestion: schema declarations, raw records, and binary encoding.

A survey record consists of context-factor answers plus up to five ranked
(problem, cause, effect) triples. Every answer is expanded into one or more
binary indicator variables; continuous context factors are first cut into
equal-frequency intervals.
"""

from __future__ import annotations

import csv
import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

UNKNOWN = "unknown"

PROBLEM = "P"
CAUSE = "C"
EFFECT = "E"
CAUSE_CATEGORY = "CC"
EFFECT_CATEGORY = "EC"

#: tags whose indicators are activated by triples rather than context answers
TRIPLE_TAGS = frozenset({PROBLEM, CAUSE, EFFECT, CAUSE_CATEGORY, EFFECT_CATEGORY})

CONTEXT_TYPES = ("binary", "categorical", "ordinal", "continuous")

VARIABLE_KINDS = (
    "answer-indicator",
    "category-indicator",
    "context-binary",
    "context-categorical-level",
    "context-ordinal-level",
    "context-interval",
)

MAX_TRIPLES = 5
MAX_RANK = 5


class DatasetError(Exception):
    """Base class for ingestion failures."""


class ParseError(DatasetError):
    """The input file could not be parsed at all."""


class SchemaError(DatasetError):
    """A declaration is inconsistent or a record references an undeclared name."""


class ValidationError(DatasetError):
    """A record violates a structural rule (rank domain, duplicate ranks, ...)."""


class DegenerateFactorError(DatasetError):
    """A continuous factor has too little spread to discretize."""


@dataclass(frozen=True)
class ContextFactor:
    """One declared context factor and how it binarizes."""

    name: str
    tag: str
    type: str
    levels: tuple[str, ...] = ()
    intervals: int = 0

    def __post_init__(self):
        if self.type not in CONTEXT_TYPES:
            raise SchemaError(f"context factor {self.name!r}: unknown type {self.type!r}")
        if self.type in ("categorical", "ordinal") and len(self.levels) < 2:
            raise SchemaError(f"context factor {self.name!r}: needs at least two levels")
        if self.type == "continuous" and self.intervals < 2:
            raise SchemaError(f"context factor {self.name!r}: continuous factors need intervals >= 2")
        if len(set(self.levels)) != len(self.levels):
            raise SchemaError(f"context factor {self.name!r}: duplicate levels")


@dataclass(frozen=True)
class Schema:
    """Declares every answerable item of the survey.

    Category maps send a category name to the set of cause (or effect) answers
    belonging to it. Context factors carry their own variable-type tag.
    """

    problems: tuple[str, ...]
    causes: tuple[str, ...]
    effects: tuple[str, ...]
    cause_categories: Mapping[str, frozenset[str]] = field(default_factory=dict)
    effect_categories: Mapping[str, frozenset[str]] = field(default_factory=dict)
    context_factors: tuple[ContextFactor, ...] = ()

    def __post_init__(self):
        for label, names in (("problems", self.problems), ("causes", self.causes), ("effects", self.effects)):
            if len(set(names)) != len(names):
                raise SchemaError(f"duplicate {label} declared")
        for cat, members in self.cause_categories.items():
            unknown = members - set(self.causes)
            if unknown:
                raise SchemaError(f"cause category {cat!r} references undeclared causes {sorted(unknown)}")
        for cat, members in self.effect_categories.items():
            unknown = members - set(self.effects)
            if unknown:
                raise SchemaError(f"effect category {cat!r} references undeclared effects {sorted(unknown)}")
        factor_names = [f.name for f in self.context_factors]
        if len(set(factor_names)) != len(factor_names):
            raise SchemaError("duplicate context factor names")
        tags = [f.tag for f in self.context_factors]
        if len(set(tags)) != len(tags):
            raise SchemaError("context factor tags must be unique")
        if set(tags) & TRIPLE_TAGS:
            raise SchemaError(f"context factor tags may not reuse {sorted(TRIPLE_TAGS)}")

    def factor(self, name: str) -> ContextFactor:
        for f in self.context_factors:
            if f.name == name:
                return f
        raise SchemaError(f"undeclared context factor {name!r}")

    def categories_of_cause(self, cause: str) -> tuple[str, ...]:
        return tuple(cat for cat, members in self.cause_categories.items() if cause in members)

    def categories_of_effect(self, effect: str) -> tuple[str, ...]:
        return tuple(cat for cat, members in self.effect_categories.items() if effect in members)

    def to_json(self) -> dict:
        return {
            "problems": list(self.problems),
            "causes": list(self.causes),
            "effects": list(self.effects),
            "categories": {
                "cause": {k: sorted(v) for k, v in self.cause_categories.items()},
                "effect": {k: sorted(v) for k, v in self.effect_categories.items()},
            },
            "context_factors": [
                {
                    "name": f.name,
                    "tag": f.tag,
                    "type": f.type,
                    **({"levels": list(f.levels)} if f.levels else {}),
                    **({"intervals": f.intervals} if f.type == "continuous" else {}),
                }
                for f in self.context_factors
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Schema":
        try:
            cats = obj.get("categories", {})
            factors = []
            for fo in obj.get("context_factors", []):
                factors.append(
                    ContextFactor(
                        name=fo["name"],
                        tag=fo["tag"],
                        type=fo["type"],
                        levels=tuple(fo.get("levels", ())),
                        intervals=int(fo.get("intervals", 0)),
                    )
                )
            return cls(
                problems=tuple(obj["problems"]),
                causes=tuple(obj["causes"]),
                effects=tuple(obj["effects"]),
                cause_categories={k: frozenset(v) for k, v in cats.get("cause", {}).items()},
                effect_categories={k: frozenset(v) for k, v in cats.get("effect", {}).items()},
                context_factors=tuple(factors),
            )
        except KeyError as exc:
            raise SchemaError(f"schema is missing required field {exc}") from exc


@dataclass(frozen=True)
class Triple:
    problem: str
    cause: str
    effect: str
    rank: int

    @property
    def inverse_rank(self) -> int:
        return MAX_RANK - self.rank


@dataclass(frozen=True)
class SurveyRecord:
    """One participant's answers, still in raw (non-binary) form."""

    record_id: str
    context_answers: Mapping[str, object]
    triples: tuple[Triple, ...]


@dataclass(frozen=True)
class VariableDescriptor:
    """One binary indicator variable together with its variable-type tag."""

    name: str
    tag: str
    kind: str
    answer: str | None = None
    category: str | None = None
    factor: str | None = None
    level: str | None = None
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in VARIABLE_KINDS:
            raise SchemaError(f"unknown variable kind {self.kind!r}")
        if self.kind == "context-interval" and self.bounds is None:
            raise SchemaError(f"interval variable {self.name!r} must carry bounds")
        if self.kind in ("context-categorical-level", "context-ordinal-level") and self.level is None:
            raise SchemaError(f"level variable {self.name!r} must carry its level")

    def to_json(self) -> dict:
        out = {"name": self.name, "tag": self.tag, "kind": self.kind}
        for key in ("answer", "category", "factor", "level"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.bounds is not None:
            out["bounds"] = list(self.bounds)
        return out

    @classmethod
    def from_json(cls, obj: Mapping) -> "VariableDescriptor":
        bounds = obj.get("bounds")
        return cls(
            name=obj["name"],
            tag=obj["tag"],
            kind=obj["kind"],
            answer=obj.get("answer"),
            category=obj.get("category"),
            factor=obj.get("factor"),
            level=obj.get("level"),
            bounds=tuple(bounds) if bounds is not None else None,
        )


@dataclass(frozen=True)
class DiscretizationSpec:
    """Equal-frequency cut points for one continuous factor.

    Interval i covers (breakpoints[i-1], breakpoints[i]]; values equal to a
    breakpoint fall into the lower interval.
    """

    factor: str
    interval_count: int
    breakpoints: tuple[float, ...]

    def __post_init__(self):
        if self.interval_count < 2:
            raise DegenerateFactorError(f"factor {self.factor!r}: interval_count must be >= 2")
        if len(self.breakpoints) != self.interval_count - 1:
            raise SchemaError(f"factor {self.factor!r}: expected {self.interval_count - 1} breakpoints")
        if any(b1 >= b2 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise SchemaError(f"factor {self.factor!r}: breakpoints must be strictly increasing")

    def interval_of(self, value: float) -> int:
        """Index of the interval containing value (ties go to the lower interval)."""
        return int(np.searchsorted(self.breakpoints, value, side="left"))

    def bounds_of(self, index: int) -> tuple[float, float]:
        lo = self.breakpoints[index - 1] if index > 0 else float("-inf")
        hi = self.breakpoints[index] if index < len(self.breakpoints) else float("inf")
        return (lo, hi)


def _canonical_digest(obj) -> str:
    payload = json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _record_to_json(rec: SurveyRecord) -> dict:
    return {
        "id": rec.record_id,
        "context": dict(rec.context_answers),
        "triples": [
            {"problem": t.problem, "cause": t.cause, "effect": t.effect, "rank": t.rank}
            for t in rec.triples
        ],
    }


@dataclass
class BinaryDataset:
    """The fully binarized sample matrix plus per-record rank annotations.

    Immutable after construction. ``samples[i, j]`` is the boolean value of
    ``variables[j]`` for record i. ``rank_weights[i]`` maps each reported
    (problem, cause, effect) triple of record i to its summed inverse rank.
    ``unknown_factors[i]`` names the context factors record i answered with
    "unknown"; their indicators are all false and must be treated as
    unobserved, not as evidence of absence.
    """

    variables: tuple[VariableDescriptor, ...]
    samples: np.ndarray
    rank_weights: tuple[Mapping[tuple[str, str, str], int], ...]
    unknown_factors: tuple[frozenset[str], ...]
    record_ids: tuple[str, ...]
    schema: Schema
    discretization: Mapping[str, DiscretizationSpec]
    provenance: Mapping[str, object]

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=bool)
        if self.samples.ndim != 2 or self.samples.shape[1] != len(self.variables):
            raise ValidationError("sample matrix shape does not match variable list")
        if self.samples.shape[0] != len(self.record_ids):
            raise ValidationError("sample matrix shape does not match record count")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise SchemaError("variable names must be unique within a dataset")
        self._index = {name: i for i, name in enumerate(names)}
        self.samples.setflags(write=False)

    @property
    def m(self) -> int:
        """Number of samples."""
        return self.samples.shape[0]

    def column(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise SchemaError(f"variable {name!r} not in dataset") from None

    def descriptor(self, name: str) -> VariableDescriptor:
        return self.variables[self.column(name)]

    def variables_by_tag(self, tag: str) -> tuple[VariableDescriptor, ...]:
        return tuple(v for v in self.variables if v.tag == tag)

    def tags(self) -> tuple[str, ...]:
        seen: list[str] = []
        for v in self.variables:
            if v.tag not in seen:
                seen.append(v.tag)
        return tuple(seen)

    def subset(self, rows: Sequence[int]) -> "BinaryDataset":
        rows = list(rows)
        return BinaryDataset(
            variables=self.variables,
            samples=self.samples[rows].copy(),
            rank_weights=tuple(self.rank_weights[i] for i in rows),
            unknown_factors=tuple(self.unknown_factors[i] for i in rows),
            record_ids=tuple(self.record_ids[i] for i in rows),
            schema=self.schema,
            discretization=self.discretization,
            provenance=dict(self.provenance),
        )

    def digest(self) -> str:
        return _canonical_digest(self.to_json())

    def triple_weight_matrix(self) -> np.ndarray:
        """Per-record inverse-rank mass of every triple-activated variable.

        Entry (i, j) is the sum of 5 - r over record i's triples that mention
        variable j. Context columns stay zero.
        """
        mat = np.zeros(self.samples.shape, dtype=np.int64)
        for i, weights in enumerate(self.rank_weights):
            for (p, c, e), w in weights.items():
                mat[i, self._index[f"{PROBLEM}:{p}"]] += w
                mat[i, self._index[f"{CAUSE}:{c}"]] += w
                mat[i, self._index[f"{EFFECT}:{e}"]] += w
                for cat in self.schema.categories_of_cause(c):
                    mat[i, self._index[f"{CAUSE_CATEGORY}:{cat}"]] += w
                for cat in self.schema.categories_of_effect(e):
                    mat[i, self._index[f"{EFFECT_CATEGORY}:{cat}"]] += w
        return mat

    def to_json(self) -> dict:
        return {
            "schema": self.schema.to_json(),
            "variables": [v.to_json() for v in self.variables],
            "samples": [[int(b) for b in row] for row in self.samples],
            "record_ids": list(self.record_ids),
            "rank_weights": [
                [[p, c, e, int(w)] for (p, c, e), w in sorted(weights.items())]
                for weights in self.rank_weights
            ],
            "unknown_factors": [sorted(s) for s in self.unknown_factors],
            "discretization": {
                name: {
                    "factor": d.factor,
                    "interval_count": d.interval_count,
                    "breakpoints": list(d.breakpoints),
                }
                for name, d in sorted(self.discretization.items())
            },
            "provenance": dict(self.provenance),
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "BinaryDataset":
        schema = Schema.from_json(obj["schema"])
        disc = {
            name: DiscretizationSpec(
                factor=d["factor"],
                interval_count=int(d["interval_count"]),
                breakpoints=tuple(float(b) for b in d["breakpoints"]),
            )
            for name, d in obj.get("discretization", {}).items()
        }
        return cls(
            variables=tuple(VariableDescriptor.from_json(v) for v in obj["variables"]),
            samples=np.array(obj["samples"], dtype=bool).reshape(len(obj["samples"]), len(obj["variables"])),
            rank_weights=tuple(
                {(p, c, e): int(w) for p, c, e, w in entries} for entries in obj["rank_weights"]
            ),
            unknown_factors=tuple(frozenset(s) for s in obj["unknown_factors"]),
            record_ids=tuple(obj["record_ids"]),
            schema=schema,
            discretization=disc,
            provenance=dict(obj.get("provenance", {})),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "BinaryDataset":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def from_samples(
    variables: Sequence[VariableDescriptor],
    samples: np.ndarray,
    record_ids: Sequence[str] | None = None,
    schema: Schema | None = None,
) -> BinaryDataset:
    """Wrap a plain boolean matrix as a BinaryDataset (no triple annotations)."""
    samples = np.asarray(samples, dtype=bool)
    m = samples.shape[0]
    if record_ids is None:
        record_ids = tuple(str(i) for i in range(m))
    if schema is None:
        schema = Schema(problems=(), causes=(), effects=())
    return BinaryDataset(
        variables=tuple(variables),
        samples=samples,
        rank_weights=tuple({} for _ in range(m)),
        unknown_factors=tuple(frozenset() for _ in range(m)),
        record_ids=tuple(record_ids),
        schema=schema,
        discretization={},
        provenance={"source_digest": _canonical_digest([[int(b) for b in row] for row in samples])},
    )


# ---------------------------------------------------------------------------
# Raw loading


def _validate_record(rec: SurveyRecord, schema: Schema, where: str) -> None:
    if len(rec.triples) > MAX_TRIPLES:
        raise ValidationError(f"{where}: more than {MAX_TRIPLES} triples")
    ranks = [t.rank for t in rec.triples]
    if any(not isinstance(r, int) or isinstance(r, bool) or not 1 <= r <= MAX_RANK for r in ranks):
        raise ValidationError(f"{where}: rank outside 1..{MAX_RANK}")
    if len(set(ranks)) != len(ranks):
        raise ValidationError(f"{where}: duplicate rank within record")
    for t in rec.triples:
        if t.problem not in schema.problems:
            raise SchemaError(f"{where}: undeclared problem {t.problem!r}")
        if t.cause not in schema.causes:
            raise SchemaError(f"{where}: undeclared cause {t.cause!r}")
        if t.effect not in schema.effects:
            raise SchemaError(f"{where}: undeclared effect {t.effect!r}")
    for factor_name, value in rec.context_answers.items():
        factor = schema.factor(factor_name)
        if value == UNKNOWN:
            continue
        if factor.type == "binary":
            if not isinstance(value, bool):
                raise ValidationError(f"{where}: factor {factor_name!r} expects a boolean")
        elif factor.type in ("categorical", "ordinal"):
            if value not in factor.levels:
                raise SchemaError(f"{where}: factor {factor_name!r} has no level {value!r}")
        else:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"{where}: factor {factor_name!r} expects a number")


def _normalize_context(raw: Mapping, schema: Schema, where: str) -> dict:
    answers = {}
    for factor in schema.context_factors:
        value = raw.get(factor.name, UNKNOWN)
        if value is None or value == UNKNOWN:
            answers[factor.name] = UNKNOWN
        else:
            answers[factor.name] = value
    for key in raw:
        schema.factor(key)  # raises SchemaError on undeclared factor
    return answers


def _parse_record_json(obj: Mapping, schema: Schema, where: str) -> SurveyRecord:
    try:
        rec_id = str(obj["id"])
        triples = tuple(
            Triple(problem=t["problem"], cause=t["cause"], effect=t["effect"], rank=t["rank"])
            for t in obj.get("triples", ())
        )
    except KeyError as exc:
        raise ParseError(f"{where}: record is missing field {exc}") from exc
    rec = SurveyRecord(
        record_id=rec_id,
        context_answers=_normalize_context(obj.get("context", {}), schema, where),
        triples=triples,
    )
    _validate_record(rec, schema, f"{where} (record {rec_id!r})")
    return rec


def load_raw(path, schema: Schema | None = None) -> tuple[Schema, list[SurveyRecord]]:
    """Load raw survey records from a dataset JSON file or a CSV export.

    JSON files are self-describing (they embed the schema); for CSV files the
    schema must be supplied. Returns the effective schema and one record per
    participant row. Any invalid row aborts the load with a diagnostic naming
    the row.
    """
    path = str(path)
    if path.endswith(".csv"):
        if schema is None:
            raise SchemaError("loading CSV requires an explicit schema")
        return schema, _load_csv(path, schema)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict) or "records" not in doc:
        raise ParseError(f"{path}: expected an object with 'schema' and 'records'")
    if schema is None:
        if "schema" not in doc:
            raise SchemaError(f"{path}: file has no embedded schema and none was supplied")
        schema = Schema.from_json(doc["schema"])
    records = [
        _parse_record_json(obj, schema, f"{path}: records[{i}]")
        for i, obj in enumerate(doc["records"])
    ]
    return schema, records


def _load_csv(path: str, schema: Schema) -> list[SurveyRecord]:
    records = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ParseError(f"{path}: empty file, expected a header row")
        for row in reader:
            where = f"{path}: line {reader.line_num}"
            rec_id = row.get("id") or f"row{reader.line_num}"
            triples = []
            for slot in range(1, MAX_TRIPLES + 1):
                problem = (row.get(f"problem_{slot}") or "").strip()
                cause = (row.get(f"cause_{slot}") or "").strip()
                effect = (row.get(f"effect_{slot}") or "").strip()
                rank_raw = (row.get(f"rank_{slot}") or "").strip()
                if not any((problem, cause, effect, rank_raw)):
                    continue
                try:
                    rank = int(rank_raw)
                except ValueError:
                    raise ValidationError(f"{where}: rank_{slot} is not an integer") from None
                triples.append(Triple(problem=problem, cause=cause, effect=effect, rank=rank))
            raw_context = {}
            for factor in schema.context_factors:
                if factor.name not in row:
                    continue
                cell = (row[factor.name] or "").strip()
                if cell == "" or cell.lower() == UNKNOWN:
                    raw_context[factor.name] = UNKNOWN
                elif factor.type == "binary":
                    if cell.lower() in ("true", "yes", "1"):
                        raw_context[factor.name] = True
                    elif cell.lower() in ("false", "no", "0"):
                        raw_context[factor.name] = False
                    else:
                        raise ValidationError(f"{where}: factor {factor.name!r} expects a boolean")
                elif factor.type == "continuous":
                    try:
                        raw_context[factor.name] = float(cell)
                    except ValueError:
                        raise ValidationError(f"{where}: factor {factor.name!r} expects a number") from None
                else:
                    raw_context[factor.name] = cell
            rec = SurveyRecord(
                record_id=rec_id,
                context_answers=_normalize_context(raw_context, schema, where),
                triples=tuple(triples),
            )
            _validate_record(rec, schema, f"{where} (record {rec_id!r})")
            records.append(rec)
    return records


# ---------------------------------------------------------------------------
# Discretization


def fit_discretization(
    records: Iterable[SurveyRecord], schema: Schema, factor: str, k: int
) -> DiscretizationSpec:
    """Fit k equal-frequency intervals for a continuous context factor.

    Breakpoints are the i/k quantiles (i = 1..k-1) of the observed non-unknown
    values. If fewer than k distinct values exist, k is reduced to the number
    of distinct values (with a warning); fewer than two distinct values is an
    error.
    """
    decl = schema.factor(factor)
    if decl.type != "continuous":
        raise SchemaError(f"factor {factor!r} is declared {decl.type}, not continuous")
    values = [
        float(rec.context_answers[factor])
        for rec in records
        if rec.context_answers.get(factor, UNKNOWN) != UNKNOWN
    ]
    distinct = len(set(values))
    if distinct < 2:
        raise DegenerateFactorError(f"factor {factor!r}: only {distinct} distinct value(s) observed")
    if distinct < k:
        warnings.warn(
            f"factor {factor!r}: only {distinct} distinct values, reducing interval count from {k}",
            stacklevel=2,
        )
        k = distinct
    breaks = np.quantile(values, [i / k for i in range(1, k)])
    unique_breaks = []
    for b in breaks:
        if not unique_breaks or b > unique_breaks[-1]:
            unique_breaks.append(float(b))
    if len(unique_breaks) < k - 1:
        warnings.warn(
            f"factor {factor!r}: tied quantiles collapsed {k} intervals to {len(unique_breaks) + 1}",
            stacklevel=2,
        )
    if not unique_breaks:
        raise DegenerateFactorError(f"factor {factor!r}: quantiles degenerate to a single interval")
    return DiscretizationSpec(
        factor=factor, interval_count=len(unique_breaks) + 1, breakpoints=tuple(unique_breaks)
    )


# ---------------------------------------------------------------------------
# Binarization


def build_variables(
    schema: Schema, disc: Mapping[str, DiscretizationSpec]
) -> tuple[VariableDescriptor, ...]:
    """Expand a schema into the ordered list of binary indicator variables."""
    out: list[VariableDescriptor] = []
    for p in schema.problems:
        out.append(VariableDescriptor(name=f"{PROBLEM}:{p}", tag=PROBLEM, kind="answer-indicator", answer=p))
    for c in schema.causes:
        out.append(VariableDescriptor(name=f"{CAUSE}:{c}", tag=CAUSE, kind="answer-indicator", answer=c))
    for cat in schema.cause_categories:
        out.append(
            VariableDescriptor(
                name=f"{CAUSE_CATEGORY}:{cat}", tag=CAUSE_CATEGORY, kind="category-indicator", category=cat
            )
        )
    for e in schema.effects:
        out.append(VariableDescriptor(name=f"{EFFECT}:{e}", tag=EFFECT, kind="answer-indicator", answer=e))
    for cat in schema.effect_categories:
        out.append(
            VariableDescriptor(
                name=f"{EFFECT_CATEGORY}:{cat}", tag=EFFECT_CATEGORY, kind="category-indicator", category=cat
            )
        )
    for factor in schema.context_factors:
        if factor.type == "binary":
            out.append(
                VariableDescriptor(
                    name=f"{factor.tag}:{factor.name}", tag=factor.tag, kind="context-binary", factor=factor.name
                )
            )
        elif factor.type in ("categorical", "ordinal"):
            kind = "context-categorical-level" if factor.type == "categorical" else "context-ordinal-level"
            for level in factor.levels:
                out.append(
                    VariableDescriptor(
                        name=f"{factor.tag}:{factor.name}={level}",
                        tag=factor.tag,
                        kind=kind,
                        factor=factor.name,
                        level=level,
                    )
                )
        else:
            spec = disc.get(factor.name)
            if spec is None:
                raise SchemaError(f"no discretization fitted for continuous factor {factor.name!r}")
            for i in range(spec.interval_count):
                lo, hi = spec.bounds_of(i)
                out.append(
                    VariableDescriptor(
                        name=f"{factor.tag}:{factor.name}=({lo:g},{hi:g}]",
                        tag=factor.tag,
                        kind="context-interval",
                        factor=factor.name,
                        bounds=(lo, hi),
                    )
                )
    return tuple(out)


def binarize(
    records: Sequence[SurveyRecord],
    schema: Schema,
    disc: Mapping[str, DiscretizationSpec] | None = None,
) -> BinaryDataset:
    """Transform validated records into the binary sample matrix.

    Problem/cause/effect indicators are true iff the answer appears in at
    least one of the record's triples; category indicators are true iff some
    selected cause (or effect) belongs to the category. Unknown context
    answers leave all of that factor's indicators false and are flagged.
    """
    disc = dict(disc or {})
    for factor in schema.context_factors:
        if factor.type == "continuous" and factor.name not in disc:
            disc[factor.name] = fit_discretization(records, schema, factor.name, factor.intervals)
    variables = build_variables(schema, disc)
    index = {v.name: i for i, v in enumerate(variables)}
    m = len(records)
    samples = np.zeros((m, len(variables)), dtype=bool)
    rank_weights: list[dict] = []
    unknown_sets: list[frozenset[str]] = []
    for i, rec in enumerate(records):
        weights: dict[tuple[str, str, str], int] = {}
        for t in rec.triples:
            samples[i, index[f"{PROBLEM}:{t.problem}"]] = True
            samples[i, index[f"{CAUSE}:{t.cause}"]] = True
            samples[i, index[f"{EFFECT}:{t.effect}"]] = True
            for cat in schema.categories_of_cause(t.cause):
                samples[i, index[f"{CAUSE_CATEGORY}:{cat}"]] = True
            for cat in schema.categories_of_effect(t.effect):
                samples[i, index[f"{EFFECT_CATEGORY}:{cat}"]] = True
            key = (t.problem, t.cause, t.effect)
            weights[key] = weights.get(key, 0) + t.inverse_rank
        unknown = set()
        for factor in schema.context_factors:
            value = rec.context_answers.get(factor.name, UNKNOWN)
            if value == UNKNOWN:
                unknown.add(factor.name)
                continue
            if factor.type == "binary":
                samples[i, index[f"{factor.tag}:{factor.name}"]] = bool(value)
            elif factor.type in ("categorical", "ordinal"):
                samples[i, index[f"{factor.tag}:{factor.name}={value}"]] = True
            else:
                spec = disc[factor.name]
                lo, hi = spec.bounds_of(spec.interval_of(float(value)))
                samples[i, index[f"{factor.tag}:{factor.name}=({lo:g},{hi:g}]"]] = True
        rank_weights.append(weights)
        unknown_sets.append(frozenset(unknown))
    source_digest = _canonical_digest(
        {"schema": schema.to_json(), "records": [_record_to_json(r) for r in records]}
    )
    return BinaryDataset(
        variables=variables,
        samples=samples,
        rank_weights=tuple(rank_weights),
        unknown_factors=tuple(unknown_sets),
        record_ids=tuple(r.record_id for r in records),
        schema=schema,
        discretization=disc,
        provenance={
            "source_digest": source_digest,
            "discretization": {
                name: list(d.breakpoints) for name, d in sorted(disc.items())
            },
        },
    )


# ---------------------------------------------------------------------------
# Support counting

WEIGHT_MODES = ("occurrence", "inverse-rank")


def _is_triple_kind(desc: VariableDescriptor) -> bool:
    return desc.kind in ("answer-indicator", "category-indicator")


def weighted_count(ds: BinaryDataset, target, mode: str = "inverse-rank") -> int:
    """Support of one variable or of a variable pair.

    In occurrence mode a record contributes 1 whenever the variable is true
    (both true, for a pair). In inverse-rank mode a triple reported at rank r
    contributes 5 - r for every target it mentions; context indicators, which
    carry no rank, keep contributing 1 per record where true.
    """
    if mode not in WEIGHT_MODES:
        raise ValueError(f"unknown weight mode {mode!r}")
    if isinstance(target, (tuple, list)):
        u, v = target
        return _pair_weight(ds, str(u), str(v), mode)
    return _single_weight(ds, str(target), mode)


def _triple_matches(desc: VariableDescriptor, key: tuple[str, str, str], schema: Schema) -> bool:
    p, c, e = key
    if desc.tag == PROBLEM:
        return desc.answer == p
    if desc.tag == CAUSE:
        return desc.answer == c
    if desc.tag == EFFECT:
        return desc.answer == e
    if desc.tag == CAUSE_CATEGORY:
        return c in schema.cause_categories.get(desc.category, frozenset())
    if desc.tag == EFFECT_CATEGORY:
        return e in schema.effect_categories.get(desc.category, frozenset())
    return False


def _single_weight(ds: BinaryDataset, name: str, mode: str) -> int:
    col = ds.column(name)
    if mode == "occurrence":
        return int(ds.samples[:, col].sum())
    desc = ds.variables[col]
    if not _is_triple_kind(desc):
        return int(ds.samples[:, col].sum())
    total = 0
    for weights in ds.rank_weights:
        for key, w in weights.items():
            if _triple_matches(desc, key, ds.schema):
                total += w
    return total


def _pair_weight(ds: BinaryDataset, u: str, v: str, mode: str) -> int:
    cu, cv = ds.column(u), ds.column(v)
    if mode == "occurrence":
        return int((ds.samples[:, cu] & ds.samples[:, cv]).sum())
    du, dv = ds.variables[cu], ds.variables[cv]
    tu, tv = _is_triple_kind(du), _is_triple_kind(dv)
    if not tu and not tv:
        return int((ds.samples[:, cu] & ds.samples[:, cv]).sum())
    total = 0
    for i, weights in enumerate(ds.rank_weights):
        if tu and tv:
            for key, w in weights.items():
                if _triple_matches(du, key, ds.schema) and _triple_matches(dv, key, ds.schema):
                    total += w
        else:
            ctx_col, trip_desc = (cu, dv) if tv else (cv, du)
            if not ds.samples[i, ctx_col]:
                continue
            for key, w in weights.items():
                if _triple_matches(trip_desc, key, ds.schema):
                    total += w
    return total


def node_support(ds: BinaryDataset, names: Sequence[str], mode: str) -> np.ndarray:
    """Vector of supports for many variables at once (same semantics as weighted_count)."""
    if mode == "occurrence":
        cols = [ds.column(n) for n in names]
        return ds.samples[:, cols].sum(axis=0).astype(np.int64)
    wmat = ds.triple_weight_matrix()
    out = np.empty(len(names), dtype=np.int64)
    for j, name in enumerate(names):
        col = ds.column(name)
        if _is_triple_kind(ds.variables[col]):
            out[j] = wmat[:, col].sum()
        else:
            out[j] = ds.samples[:, col].sum()
    return out


def pair_support_block(
    ds: BinaryDataset, from_names: Sequence[str], to_names: Sequence[str], mode: str
) -> np.ndarray:
    """Support matrix for every (from, to) pair; block form of weighted_count."""
    ca = np.array([ds.column(n) for n in from_names], dtype=int)
    cb = np.array([ds.column(n) for n in to_names], dtype=int)
    A = ds.samples[:, ca]
    B = ds.samples[:, cb]
    if mode == "occurrence":
        return A.astype(np.int64).T @ B.astype(np.int64)
    triple_a = np.array([_is_triple_kind(ds.variables[c]) for c in ca])
    triple_b = np.array([_is_triple_kind(ds.variables[c]) for c in cb])
    wmat = ds.triple_weight_matrix()
    Wa = wmat[:, ca]
    Wb = wmat[:, cb]
    out = np.zeros((len(ca), len(cb)), dtype=np.int64)
    # context x context: plain co-occurrence
    out += (A.astype(np.int64).T @ B.astype(np.int64)) * np.outer(~triple_a, ~triple_b)
    # context x triple and triple x context: record-level gate times triple mass
    out += (A.astype(np.int64).T @ Wb) * np.outer(~triple_a, triple_b)
    out += (Wa.T @ B.astype(np.int64)) * np.outer(triple_a, ~triple_b)
    # triple x triple: both endpoints must sit in the same triple
    col_of_a = {int(c): j for j, c in enumerate(ca)}
    col_of_b = {int(c): j for j, c in enumerate(cb)}
    a_descs = [(col_of_a[int(c)], ds.variables[c]) for c in ca if _is_triple_kind(ds.variables[c])]
    b_descs = [(col_of_b[int(c)], ds.variables[c]) for c in cb if _is_triple_kind(ds.variables[c])]
    if a_descs and b_descs:
        for weights in ds.rank_weights:
            for key, w in weights.items():
                hits_a = [j for j, d in a_descs if _triple_matches(d, key, ds.schema)]
                if not hits_a:
                    continue
                hits_b = [j for j, d in b_descs if _triple_matches(d, key, ds.schema)]
                for ja in hits_a:
                    for jb in hits_b:
                        out[ja, jb] += w
    return out
