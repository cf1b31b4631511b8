"""Command-line driver: prepare datasets, train and validate models, serve predictions."""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import dataset as ds_mod
from .dataset import BinaryDataset, load_raw, binarize, TRIPLE_TAGS
from .evaluation import (
    DEFAULT_HOLDOUT,
    DEFAULT_REPETITIONS,
    EvaluationError,
    curves_csv,
    report_table_csv,
    run_cross_validation,
    split_folds,
)
from .graph import (
    ARCHITECTURE_CODES,
    ArchitectureSpec,
    DEFAULT_EDGE_FILTER,
    DEFAULT_NODE_FILTER,
    UseCase,
    build_graph,
    predefined_architecture,
)
from .inference import SamplerConfig, baseline_predict, fit_mle
from .registry import Model, Registry, derive_model_id, timestamp

BIND_ENV = "CAUSENET_BIND"
DEFAULT_BIND = "127.0.0.1:8000"


def _load_architecture(arg: str, ds: BinaryDataset, args) -> ArchitectureSpec:
    cap = getattr(args, "cap", None)
    if arg.upper() in ARCHITECTURE_CODES:
        context_tags = tuple(t for t in ds.tags() if t not in TRIPLE_TAGS)
        return predefined_architecture(
            arg.upper(),
            context_tags=context_tags,
            node_filter=args.node_filter,
            edge_filter=args.edge_filter,
            weight_mode=args.weight_mode,
            parent_cap=cap,
        )
    with open(arg, encoding="utf-8") as fh:
        spec = ArchitectureSpec.from_json(json.load(fh))
    if cap is not None:
        from dataclasses import replace

        spec = replace(spec, parent_cap=cap)
    return spec


def _cmd_prepare(args) -> int:
    schema = None
    if args.schema:
        with open(args.schema, encoding="utf-8") as fh:
            schema = ds_mod.Schema.from_json(json.load(fh))
    if str(args.input).endswith(".csv") and schema is None:
        print("error: CSV input requires --schema", file=sys.stderr)
        return 2
    schema, records = load_raw(args.input, schema)
    ds = binarize(records, schema)
    ds.save(args.output)
    print(f"wrote {args.output}: {ds.m} records, {len(ds.variables)} binary variables")
    return 0


def _cmd_train(args) -> int:
    ds = BinaryDataset.load(args.dataset)
    spec = _load_architecture(args.architecture, ds, args)
    use_case = UseCase.from_code(args.use_case)
    digest = str(ds.provenance.get("source_digest", ds.digest()))
    model_id = args.model_id or derive_model_id(spec.name, use_case.code, digest)
    if spec.baseline_flag:
        report = baseline_predict(ds, use_case.output_tag)
        candidates = [d.name for d in ds.variables_by_tag(use_case.output_tag)]
        support = ds_mod.node_support(ds, candidates, spec.weight_mode)
        outputs = [n for n, s in zip(candidates, support) if s >= spec.f(use_case.output_tag)]
        if not outputs:
            print(
                f"advisory: no output variables survive f({use_case.output_tag}) = "
                f"{spec.f(use_case.output_tag)}; rerun with a lower --node-filter",
                file=sys.stderr,
            )
            return 3
        model = Model(
            model_id=model_id,
            architecture=spec.name,
            use_case=use_case.code,
            output_tag=use_case.output_tag,
            dataset_digest=digest,
            created_at=timestamp(),
            baseline_probabilities={n: report.probabilities[n] for n in outputs},
            baseline_variables=tuple(ds.descriptor(n) for n in outputs),
        )
        print(f"baseline model: {len(outputs)} output variables")
    else:
        dag = build_graph(ds, spec)
        outputs = dag.nodes_by_tag(use_case.output_tag)
        if not outputs:
            print(
                f"advisory: no output variables survive f({use_case.output_tag}) = "
                f"{spec.f(use_case.output_tag)}; rerun with a lower --node-filter",
                file=sys.stderr,
            )
            return 3
        bn = fit_mle(dag, ds, alpha=args.alpha, weight_mode=spec.weight_mode)
        model = Model(
            model_id=model_id,
            architecture=spec.name,
            use_case=use_case.code,
            output_tag=use_case.output_tag,
            dataset_digest=digest,
            created_at=timestamp(),
            network=bn,
        )
        print(
            f"graph: {len(dag)} nodes, {len(dag.edges)} edges; "
            f"{len(outputs)} output variables ({use_case.output_tag})"
        )
    model.save(args.output)
    print(f"wrote {args.output} (model_id {model_id})")
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(model.graph_dot())
        print(f"wrote {args.dot}")
    return 0


def _cmd_validate(args) -> int:
    ds = BinaryDataset.load(args.dataset)
    spec = _load_architecture(args.architecture, ds, args)
    use_case = UseCase.from_code(args.use_case)
    plan = split_folds(ds.m, repetitions=args.reps, holdout_size=args.holdout, seed=args.seed)
    sampler = SamplerConfig(
        seed=args.sampler_seed,
        chains=args.chains,
        burn_in=args.burn_in,
        samples_per_chain=args.samples,
    )
    try:
        report = run_cross_validation(
            ds, spec, use_case, plan=plan, sampler=sampler, alpha=args.alpha, method=args.method
        )
    except EvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    with open(args.output, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.output}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(report_table_csv([report]))
        print(f"wrote {args.csv}")
    if args.curves:
        with open(args.curves, "w", encoding="utf-8") as fh:
            fh.write(curves_csv(report))
        print(f"wrote {args.curves}")
    if args.update_model:
        model = Model.load(args.update_model)
        updated = Model.from_json({**model.to_json(), "evaluation": report.to_json()})
        updated.save(args.update_model)
        print(f"attached evaluation to {args.update_model}")
    for line in report_table_csv([report]).strip().splitlines():
        print(line)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    registry = Registry.from_dir(args.registry)
    if len(registry) == 0:
        print(f"error: no *.model.json files in {args.registry}", file=sys.stderr)
        return 2
    host, _, port = args.bind.rpartition(":")
    app = create_app(registry, timeout_seconds=args.timeout)
    print(f"serving {len(registry)} model(s) on {args.bind}")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def _parse_evidence(pairs) -> dict[str, bool]:
    evidence = {}
    for pair in pairs or ():
        name, sep, raw = pair.rpartition("=")
        if not sep or raw.lower() not in ("true", "false"):
            raise SystemExit(f"error: evidence must look like 'variable=true', got {pair!r}")
        evidence[name] = raw.lower() == "true"
    return evidence


def _cmd_predict(args) -> int:
    model = Model.load(args.model)
    evidence = _parse_evidence(args.evidence)
    if args.evidence_file:
        with open(args.evidence_file, encoding="utf-8") as fh:
            for item in json.load(fh):
                evidence[item["variable"]] = bool(item["value"])
    ranking, diagnostics = model.predict(
        evidence, k=args.k, threshold=args.threshold, seed=args.seed
    )
    if not ranking:
        print("(no output variable exceeds the threshold)")
    for i, (name, p) in enumerate(ranking, start=1):
        print(f"{i:2d}. {name}  {p:.4f}")
    if args.verbose:
        print(f"# method={diagnostics.get('method')} model={model.model_id}")
    return 0


def _add_architecture_options(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--architecture",
        "-a",
        required=True,
        help=f"one of {'/'.join(ARCHITECTURE_CODES)} or a path to an architecture JSON file",
    )
    p.add_argument("--use-case", "-u", required=True, choices=["diagnostic", "predictive"])
    p.add_argument("--node-filter", type=float, default=DEFAULT_NODE_FILTER, help="minimum variable support f")
    p.add_argument("--edge-filter", type=float, default=DEFAULT_EDGE_FILTER, help="minimum relation support g")
    p.add_argument("--weight-mode", choices=["occurrence", "inverse-rank"], default="inverse-rank")
    p.add_argument("--cap", type=int, default=None, help="maximum parents per node")
    p.add_argument("--alpha", type=float, default=1.0, help="additive smoothing for CPT fitting")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="causenet", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="binarize a raw survey file")
    p.add_argument("input", help="dataset JSON (self-describing) or CSV export")
    p.add_argument("--schema", help="schema JSON (required for CSV input)")
    p.add_argument("--output", "-o", required=True)
    p.set_defaults(func=_cmd_prepare)

    p = sub.add_parser("train", help="build a graph and fit CPTs on a prepared dataset")
    p.add_argument("dataset", help="prepared dataset file from 'prepare'")
    _add_architecture_options(p)
    p.add_argument("--output", "-o", required=True)
    p.add_argument("--model-id", default=None)
    p.add_argument("--dot", default=None, help="also write the graph as DOT text")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("validate", help="cross-validate an architecture on a prepared dataset")
    p.add_argument("dataset")
    _add_architecture_options(p)
    p.add_argument("--reps", type=int, default=DEFAULT_REPETITIONS)
    p.add_argument("--holdout", type=int, default=DEFAULT_HOLDOUT)
    p.add_argument("--seed", type=int, default=0, help="fold plan seed")
    p.add_argument("--sampler-seed", type=int, default=0)
    p.add_argument("--chains", type=int, default=4)
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--samples", type=int, default=5000, help="retained samples per chain")
    p.add_argument("--method", choices=["auto", "exact", "gibbs"], default="auto")
    p.add_argument("--output", "-o", required=True, help="report JSON path")
    p.add_argument("--csv", default=None, help="summary table CSV path")
    p.add_argument("--curves", default=None, help="per-threshold curves CSV path")
    p.add_argument("--update-model", default=None, help="model file to attach the report to")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("serve", help="serve registered models over HTTP")
    p.add_argument("registry", help="directory of *.model.json files")
    p.add_argument("--bind", default=os.environ.get(BIND_ENV, DEFAULT_BIND))
    p.add_argument("--timeout", type=float, default=600.0, help="per-inference budget in seconds")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("predict", help="one-shot ranking from a model file")
    p.add_argument("model")
    p.add_argument("--evidence", "-e", action="append", help="variable=true|false (repeatable)")
    p.add_argument("--evidence-file", default=None, help="JSON list of {variable, value}")
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--threshold", "-t", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--verbose", "-v", action="store_true")
    p.set_defaults(func=_cmd_predict)

    return parser


def main(argv=None) -> int:
    from .graph import GraphError
    from .inference import InferenceError
    from .registry import RegistryError

    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ds_mod.DatasetError, GraphError, InferenceError, RegistryError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
