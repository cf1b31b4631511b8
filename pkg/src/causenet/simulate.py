"""Synthetic survey layouts and record generators.

The two stock layouts mirror the shape of the recurring practitioner survey
rounds this engine targets (one with category tags and coarse context, one
with richer context factors); answer texts are synthetic placeholders. The
planted-structure generators produce records with a known dependency
structure for end-to-end validation.
"""

from __future__ import annotations

import numpy as np

from .dataset import ContextFactor, Schema, SurveyRecord, Triple, UNKNOWN


def layout_2018() -> Schema:
    """Synthetic stand-in for the 2018 survey round: 216 binary variables.

    20 problems, 120 coded causes, 56 coded effects, no category tags, and
    five context factors expanding to 20 indicators (6 team-size intervals,
    5 development-method levels, 1 distributed flag, 5 customer-relation
    levels, 3 system types).
    """
    return Schema(
        problems=tuple(f"problem {i:02d}" for i in range(1, 21)),
        causes=tuple(f"cause {i:03d}" for i in range(1, 121)),
        effects=tuple(f"effect {i:02d}" for i in range(1, 57)),
        context_factors=(
            ContextFactor(name="team size", tag="CS", type="continuous", intervals=6),
            ContextFactor(
                name="development method",
                tag="CDM",
                type="ordinal",
                levels=("agile", "mostly agile", "hybrid", "mostly plan-driven", "plan-driven"),
            ),
            ContextFactor(name="distributed project", tag="CD", type="binary"),
            ContextFactor(
                name="customer relation",
                tag="CR",
                type="ordinal",
                levels=("very bad", "bad", "neutral", "good", "very good"),
            ),
            ContextFactor(
                name="system type", tag="CT", type="categorical", levels=("embedded", "business", "mixed")
            ),
        ),
    )


def layout_2014() -> Schema:
    """Synthetic stand-in for the 2014 survey round: 196 binary variables.

    21 problems, 92 causes grouped into 5 categories, 59 effects grouped into
    5 categories, and three context factors expanding to 14 indicators.
    """
    causes = tuple(f"cause {i:03d}" for i in range(1, 93))
    effects = tuple(f"effect {i:02d}" for i in range(1, 60))
    cause_cats = ("people", "process", "tooling", "organization", "inputs")
    effect_cats = ("product", "schedule", "budget", "customer", "team")
    return Schema(
        problems=tuple(f"problem {i:02d}" for i in range(1, 22)),
        causes=causes,
        effects=effects,
        cause_categories={
            cat: frozenset(c for j, c in enumerate(causes) if j % len(cause_cats) == i)
            for i, cat in enumerate(cause_cats)
        },
        effect_categories={
            cat: frozenset(e for j, e in enumerate(effects) if j % len(effect_cats) == i)
            for i, cat in enumerate(effect_cats)
        },
        context_factors=(
            ContextFactor(
                name="company size",
                tag="CS",
                type="categorical",
                levels=("1-10", "11-50", "51-100", "101-250", "251-500", "501-1000", "1001-2000", "2000+"),
            ),
            ContextFactor(
                name="development method",
                tag="CDM",
                type="categorical",
                levels=("waterfall", "iterative", "scrum", "xp", "custom"),
            ),
            ContextFactor(name="distributed projects", tag="CD", type="binary"),
        ),
    )


def _sample_context(schema: Schema, rng: np.random.Generator, unknown_rate: float) -> dict:
    answers = {}
    for factor in schema.context_factors:
        if rng.random() < unknown_rate:
            answers[factor.name] = UNKNOWN
        elif factor.type == "binary":
            answers[factor.name] = bool(rng.random() < 0.5)
        elif factor.type in ("categorical", "ordinal"):
            answers[factor.name] = str(rng.choice(factor.levels))
        else:
            answers[factor.name] = float(np.ceil(rng.lognormal(mean=2.0, sigma=1.0)))
    return answers


def random_records(
    schema: Schema,
    m: int,
    seed: int,
    unknown_rate: float = 0.05,
    min_triples: int = 3,
    max_triples: int = 5,
) -> list[SurveyRecord]:
    """Plausible random records with mild problem/cause/effect coupling.

    Problem popularity is skewed, and each problem prefers a small pool of
    causes and effects, so learned models have real signal to pick up.
    """
    rng = np.random.default_rng(seed)
    n_p, n_c, n_e = len(schema.problems), len(schema.causes), len(schema.effects)
    popularity = 1.0 / np.arange(1, n_p + 1)
    popularity /= popularity.sum()
    pref_rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    cause_pool = {j: pref_rng.choice(n_c, size=min(4, n_c), replace=False) for j in range(n_p)}
    effect_pool = {j: pref_rng.choice(n_e, size=min(3, n_e), replace=False) for j in range(n_p)}
    records = []
    for i in range(m):
        n_triples = int(rng.integers(min_triples, max_triples + 1))
        n_triples = min(n_triples, n_p)
        chosen = rng.choice(n_p, size=n_triples, replace=False, p=popularity)
        triples = []
        for rank, j in enumerate(chosen, start=1):
            if rng.random() < 0.8:
                cause = schema.causes[int(rng.choice(cause_pool[int(j)]))]
            else:
                cause = schema.causes[int(rng.integers(n_c))]
            if rng.random() < 0.8:
                effect = schema.effects[int(rng.choice(effect_pool[int(j)]))]
            else:
                effect = schema.effects[int(rng.integers(n_e))]
            triples.append(Triple(problem=schema.problems[int(j)], cause=cause, effect=effect, rank=rank))
        records.append(
            SurveyRecord(
                record_id=f"r{i:04d}",
                context_answers=_sample_context(schema, rng, unknown_rate),
                triples=tuple(triples),
            )
        )
    return records


def planted_schema(n_problems: int = 6, n_causes: int = 12, n_effects: int = 4) -> Schema:
    return Schema(
        problems=tuple(f"problem {i:02d}" for i in range(n_problems)),
        causes=tuple(f"cause {i:02d}" for i in range(n_causes)),
        effects=tuple(f"effect {i:02d}" for i in range(n_effects)),
    )


def planted_problem_cause_records(
    m: int,
    seed: int,
    n_problems: int = 6,
    n_causes: int = 12,
    n_effects: int = 4,
    problems_per_record: int = 2,
    dominant_prob: float = 0.85,
) -> tuple[Schema, list[SurveyRecord], dict[str, str]]:
    """Records whose causes depend on the selected problems (known structure).

    Problem i has the dominant cause i: whenever problem i is reported, its
    triple names cause i with probability ``dominant_prob`` and a uniformly
    random other cause otherwise. Returns the schema, the records, and the
    problem-to-dominant-cause map.
    """
    if n_causes < n_problems:
        raise ValueError("need at least one distinct dominant cause per problem")
    schema = planted_schema(n_problems, n_causes, n_effects)
    rng = np.random.default_rng(seed)
    records = []
    for i in range(m):
        chosen = rng.choice(n_problems, size=problems_per_record, replace=False)
        triples = []
        for rank, j in enumerate(chosen, start=1):
            if rng.random() < dominant_prob:
                cause_idx = int(j)
            else:
                cause_idx = int(rng.integers(n_causes))
            triples.append(
                Triple(
                    problem=schema.problems[int(j)],
                    cause=schema.causes[cause_idx],
                    effect=schema.effects[int(rng.integers(n_effects))],
                    rank=rank,
                )
            )
        records.append(SurveyRecord(record_id=f"r{i:04d}", context_answers={}, triples=tuple(triples)))
    truth = {schema.problems[j]: schema.causes[j] for j in range(n_problems)}
    return schema, records, truth


def sparse_single_cause_records(
    m: int, seed: int, n_causes: int = 20
) -> tuple[Schema, list[SurveyRecord]]:
    """One uniformly chosen cause per record: every cause is a 1/n_causes-rate positive."""
    schema = planted_schema(n_problems=1, n_causes=n_causes, n_effects=1)
    rng = np.random.default_rng(seed)
    records = []
    for i in range(m):
        cause = schema.causes[int(rng.integers(n_causes))]
        records.append(
            SurveyRecord(
                record_id=f"r{i:04d}",
                context_answers={},
                triples=(Triple(problem=schema.problems[0], cause=cause, effect=schema.effects[0], rank=1),),
            )
        )
    return schema, records
