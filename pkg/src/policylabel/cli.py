"""Command-line pipeline driver.

Subcommands: ingest, sample, train, eval, sweep, analyze, serve, perplexity.
Every artifact-producing command writes a run manifest (command, config
snapshot, input hashes, seed, outputs, timings) next to its outputs. Config
file values are overridden by flags; flags always win. Exit code is 0 exactly
when no error occurred; warnings never change it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluation, labeling, perplexity as ppl_mod, sampling
from .matchers import CrossEncoderMatcher, TrainConfig, train_cross_encoder
from .matchers.base import write_scores_jsonl

CONFIG_KEYS = (
    "base_model_identifier",
    "learning_rate",
    "epochs",
    "batch_size",
    "seed",
    "threshold",
    "max_length",
)


class CliError(Exception):
    pass


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(
    out_dir: Path,
    command: str,
    config: dict,
    inputs: list[Path],
    outputs: list[Path],
    seed: int | None,
    started: float,
) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs if p.exists()},
        "outputs": {str(p): _sha256(p) for p in outputs if p.exists()},
        "seed": seed,
        "elapsed_seconds": round(time.time() - started, 3),
    }
    path = out_dir / f"{command}.manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise CliError(f"config file is not valid JSON: {exc}")
    unknown = set(config) - set(CONFIG_KEYS)
    if unknown:
        raise CliError(f"unknown config keys: {sorted(unknown)}")
    return config


def _train_config(args, config: dict) -> TrainConfig:
    def pick(flag_value, key, default):
        if flag_value is not None:
            return flag_value
        return config.get(key, default)

    return TrainConfig(
        base_model_identifier=pick(args.base_model, "base_model_identifier", "tiny"),
        learning_rate=pick(args.learning_rate, "learning_rate", 1e-5),
        epochs=pick(args.epochs, "epochs", 3),
        batch_size=pick(args.batch_size, "batch_size", 16),
        seed=_seed(args, config),
        max_length=pick(getattr(args, "max_length", None), "max_length", 256),
    )


def _seed(args, config: dict) -> int:
    if args.seed is not None:
        return args.seed
    return int(config.get("seed", 0))


def _store_paths(store: Path) -> dict[str, Path]:
    return {
        "cases": store / "cases.json",
        "clusters": store / "clusters.json",
        "annotations": store / "annotations.jsonl",
        "splits": store / "splits.json",
        "stats": store / "stats.json",
    }


def _load_store(store: Path) -> tuple[corpus_mod.Corpus, corpus_mod.DataSplit]:
    paths = _store_paths(store)
    for key in ("cases", "annotations", "splits"):
        if not paths[key].exists():
            raise CliError(f"store is missing {paths[key].name}; run ingest first")
    clusters_path = paths["clusters"] if paths["clusters"].exists() else None
    corpus = corpus_mod.Corpus.load(paths["cases"], paths["annotations"], clusters_path)
    split = corpus_mod.load_split(paths["splits"], corpus.annotations, corpus.catalog)
    return corpus, split


# --- subcommands --------------------------------------------------------------


def cmd_ingest(args, config: dict) -> int:
    started = time.time()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = _seed(args, config)

    cases_path = Path(args.cases)
    annotations_path = Path(args.annotations)
    for path in (cases_path, annotations_path):
        if not path.exists():
            raise CliError(f"input file not found: {path}")
    catalog = corpus_mod.ingest_cases(cases_path)
    clusters = None
    if args.clusters:
        clusters_path = Path(args.clusters)
        if not clusters_path.exists():
            raise CliError(f"input file not found: {clusters_path}")
        clusters, catalog = corpus_mod.load_clusters(clusters_path, catalog)
    annotations = corpus_mod.ingest_annotations(annotations_path, catalog)
    split = corpus_mod.split_dataset(annotations, catalog, seed=seed)
    stats = corpus_mod.catalog_stats(catalog, annotations)

    paths = _store_paths(out)
    corpus_mod.save_cases(catalog, paths["cases"])
    if clusters is not None:
        corpus_mod.save_clusters(clusters, paths["clusters"])
    corpus_mod.save_annotations(annotations, paths["annotations"])
    corpus_mod.save_split(split, paths["splits"])
    with open(paths["stats"], "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    print(f"cases: {stats.case_count}")
    print(f"ratings: {stats.rating_histogram}")
    print(f"clusters: {stats.cluster_count}, standalone: {stats.standalone_count}")
    print(
        f"annotations: {stats.annotation_count}, "
        f"mean words/excerpt: {stats.mean_excerpt_words}"
    )
    print(
        f"split sizes: train={len(split.train)} validation={len(split.validation)} "
        f"test={len(split.test)} (standalone={len(split.standalone_set)}, "
        f"contrasting={len(split.contrasting_set)})"
    )
    inputs = [cases_path, annotations_path] + ([Path(args.clusters)] if args.clusters else [])
    write_manifest(out, "ingest", config, inputs, list(paths.values()), seed, started)
    return 0


def cmd_sample(args, config: dict) -> int:
    started = time.time()
    store = Path(args.store)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.ratio < 1:
        raise CliError("--ratio must be >= 1")
    corpus, split = _load_store(store)
    seed = _seed(args, config)
    sampling_config = sampling.SamplingConfig(
        strategy=args.strategy, ratio=args.ratio, seed=seed
    )
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", sampling.SamplingExhaustionWarning)
        training_set = sampling.sample_training_set(split.train, corpus, sampling_config)
    exhaustion = [str(w.message) for w in caught]
    for message in exhaustion:
        print(f"warning: {message}", file=sys.stderr)

    out_path = out / "training_set.jsonl"
    sampling.write_training_set(
        training_set, out_path, manifest_extra={"exhaustion_warnings": exhaustion}
    )
    print(f"wrote {len(training_set)} pairs to {out_path}")
    print(f"counts: {training_set.counts}")
    write_manifest(
        out,
        "sample",
        {**config, "strategy": args.strategy, "ratio": args.ratio},
        list(_store_paths(store).values()),
        [out_path, out_path.with_suffix(out_path.suffix + ".manifest.json")],
        seed,
        started,
    )
    return 0


def cmd_train(args, config: dict) -> int:
    started = time.time()
    training_path = Path(args.training_set)
    if not training_path.exists():
        raise CliError(f"training set not found: {training_path}")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train_config = _train_config(args, config)

    pairs = sampling.read_training_set(training_path)
    validation_pairs = None
    if args.store:
        corpus, split = _load_store(Path(args.store))
        validation_pairs = sampling.build_frozen_eval_sets(
            split.validation, corpus, seed=split.seed
        ).pairs
    matcher = train_cross_encoder(pairs, validation_pairs, train_config)
    checkpoint = out / "checkpoint"
    manifest_path = training_path.with_suffix(training_path.suffix + ".manifest.json")
    data_hash = _sha256(training_path) if training_path.exists() else None
    matcher.save(checkpoint, data_manifest_hash=data_hash)
    for epoch, loss in enumerate(matcher.history_["train_loss"], start=1):
        line = f"epoch {epoch}: train_loss={loss:.4f}"
        if matcher.history_.get("validation_loss"):
            line += f" validation_loss={matcher.history_['validation_loss'][epoch - 1]:.4f}"
        print(line)
    print(f"checkpoint: {checkpoint}")
    inputs = [training_path] + ([manifest_path] if manifest_path.exists() else [])
    write_manifest(
        out,
        "train",
        {**config, **train_config.to_dict()},
        inputs,
        [checkpoint / "manifest.json"],
        train_config.seed,
        started,
    )
    return 0


def cmd_eval(args, config: dict) -> int:
    started = time.time()
    store = Path(args.store)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus, split = _load_store(store)
    matcher = CrossEncoderMatcher.load(Path(args.checkpoint))
    if args.threshold is not None:
        matcher.decision_threshold = args.threshold

    standalone = sampling.build_frozen_eval_sets(
        split.standalone_set, corpus, seed=split.seed
    )
    contrasting = sampling.build_frozen_eval_sets(
        split.contrasting_set, corpus, seed=split.seed
    )
    if not standalone.pairs or not contrasting.pairs:
        raise CliError("a test partition is empty; check the split")
    report_s, report_c = evaluation.evaluate_partitioned(
        matcher, standalone, contrasting, metadata={"checkpoint": str(args.checkpoint)}
    )
    rows = []
    for report, set_name in ((report_s, "standalone"), (report_c, "contrasting")):
        for cls in (0, 1):
            rows.append(
                {
                    "strategy": "-",
                    "ratio": 0,
                    "set": set_name,
                    "class": cls,
                    "precision_mean": report.metric(cls, "precision"),
                    "precision_std": 0.0,
                    "recall_mean": report.metric(cls, "recall"),
                    "recall_std": 0.0,
                    "f1_mean": report.metric(cls, "f1"),
                    "f1_std": 0.0,
                    "support": int(report.metric(cls, "support")),
                    "runs": 1,
                }
            )
            print(
                f"{set_name} class {cls}: "
                f"P={report.metric(cls, 'precision'):.4f} "
                f"R={report.metric(cls, 'recall'):.4f} "
                f"F1={report.metric(cls, 'f1'):.4f} "
                f"S={int(report.metric(cls, 'support'))}"
            )
    csv_path, json_path = out / "results.csv", out / "results.json"
    evaluation.write_results(
        rows, csv_path, json_path, provenance={"checkpoint": str(args.checkpoint)}
    )
    scores_path = out / "scores.jsonl"
    write_scores_jsonl(matcher, standalone.pairs + contrasting.pairs, scores_path)
    write_manifest(
        out,
        "eval",
        config,
        list(_store_paths(store).values()) + [Path(args.checkpoint) / "manifest.json"],
        [csv_path, json_path, scores_path],
        split.seed,
        started,
    )
    return 0


def cmd_sweep(args, config: dict) -> int:
    started = time.time()
    store = Path(args.store)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus, split = _load_store(store)
    seed = _seed(args, config)
    train_config = _train_config(args, config)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    ratios = [int(r) for r in args.ratios.split(",")]

    eval_sets = {
        "standalone": sampling.build_frozen_eval_sets(
            split.standalone_set, corpus, seed=split.seed
        ),
        "contrasting": sampling.build_frozen_eval_sets(
            split.contrasting_set, corpus, seed=split.seed
        ),
    }

    def train_fn(training_set, run_seed):
        run_config = TrainConfig(**{**train_config.to_dict(), "seed": run_seed})
        return train_cross_encoder(training_set, None, run_config)

    rows = evaluation.sweep_ratios(
        train_fn,
        corpus,
        split,
        eval_sets,
        strategies=strategies,
        ratios=ratios,
        runs=args.runs,
        seed=seed,
    )
    csv_path, json_path = out / "results.csv", out / "results.json"
    evaluation.write_results(
        rows,
        csv_path,
        json_path,
        provenance={"seed": seed, "runs": args.runs, "train_config": train_config.to_dict()},
    )
    print(f"wrote {len(rows)} result rows to {csv_path}")
    write_manifest(
        out, "sweep", {**config, **train_config.to_dict()}, list(_store_paths(store).values()), [csv_path, json_path], seed, started
    )
    return 0


def cmd_analyze(args, config: dict) -> int:
    started = time.time()
    policy_path = Path(args.policy)
    if not policy_path.exists():
        raise CliError(f"policy file not found: {policy_path}")
    text = policy_path.read_text(encoding="utf-8")
    if not text.strip():
        raise CliError("policy file is empty")
    store = Path(args.store)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus, _ = _load_store(store)
    matcher = CrossEncoderMatcher.load(Path(args.checkpoint))
    threshold = args.threshold if args.threshold is not None else config.get("threshold")

    segments = labeling.segment_policy(text)
    print(f"segments: {len(segments)}")
    service_id = args.service_id or policy_path.stem
    results = labeling.scan_policy(
        matcher, segments, corpus.catalog, threshold=threshold, service_id=service_id
    )
    label = labeling.build_label(
        {"id": service_id, "name": args.service_name or service_id},
        results,
        corpus.catalog,
        segments,
    )
    label_path = out / "label.json"
    labeling.write_label(label, label_path)

    identified = sum(len(group) for group in label.groups.values())
    print(f"grade: {label.grade.value}")
    print(f"identified cases: {identified}")
    for rating in labeling.RATING_ORDER:
        group = label.groups[rating]
        if group:
            print(f"  {rating}: {', '.join(entry['case_id'] for entry in group)}")
    print(f"label: {label_path}")
    write_manifest(
        out,
        "analyze",
        {**config, "threshold": threshold},
        [policy_path, Path(args.checkpoint) / "manifest.json"],
        [label_path],
        _seed(args, config),
        started,
    )
    return 0


def cmd_serve(args, config: dict) -> int:
    import uvicorn

    from .service import FeedbackStore, LabelStore, ServiceState, create_app

    checkpoint = Path(args.checkpoint)
    if not checkpoint.exists():
        raise CliError(f"checkpoint not found: {checkpoint}; train a model first")
    store = Path(args.store)
    corpus, _ = _load_store(store)
    matcher = CrossEncoderMatcher.load(checkpoint)

    labels = LabelStore()
    for label_file in args.label or []:
        with open(label_file, encoding="utf-8") as fh:
            payload = json.load(fh)
        labels.put_payload(payload["service"]["id"], payload)
    feedback = FeedbackStore(args.feedback_log)
    state = ServiceState(
        catalog=corpus.catalog,
        matcher=matcher,
        labels=labels,
        feedback=feedback,
        scan_threshold=args.threshold if args.threshold is not None else config.get("threshold"),
    )
    app = create_app(state)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_perplexity(args, config: dict) -> int:
    started = time.time()
    store = Path(args.store)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus, _ = _load_store(store)
    model_ids = [m.strip() for m in args.models.split(",") if m.strip()]
    if not model_ids:
        raise CliError("--models must name at least one model")
    try:
        models = [ppl_mod.resolve_model(mid) for mid in model_ids]
    except Exception as exc:
        raise CliError(f"failed to load model: {exc}")

    summary = ppl_mod.rating_perplexity_report(
        models,
        corpus.annotations,
        corpus.catalog,
        window_size=args.window_size,
        stride=args.stride,
        limit_per_rating=args.limit,
    )
    csv_path, json_path = out / "perplexity.csv", out / "perplexity_summary.json"
    ppl_mod.write_perplexity_csv(summary["records"], csv_path)
    ppl_mod.write_summary_json(summary, json_path)
    for model_id, ratings in summary["models"].items():
        for rating, dist in ratings.items():
            print(
                f"{model_id} {rating}: mean={dist['mean']:.4f} "
                f"median={dist['median']:.4f} n={dist['count']}"
            )
    write_manifest(
        out,
        "perplexity",
        {**config, "models": model_ids},
        list(_store_paths(store).values()),
        [csv_path, json_path],
        _seed(args, config),
        started,
    )
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="policylabel",
        description="Privacy-policy case matching, grading and serving pipeline.",
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    parser.add_argument("--seed", type=int, default=None, help="global random seed")
    parser.add_argument("--out-dir", default="out", help="artifact output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate corpus files into a store")
    p.add_argument("--cases", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--clusters")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sample", help="build a training set")
    p.add_argument("--store", required=True)
    p.add_argument("--strategy", choices=("rs", "cbs"), required=True)
    p.add_argument("--ratio", type=int, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("train", help="fine-tune the cross-encoder")
    p.add_argument("--training-set", required=True)
    p.add_argument("--store", help="store for validation-loss tracking")
    p.add_argument("--base-model", default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--max-length", type=int, default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the frozen test sets")
    p.add_argument("--store", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="strategy x ratio grid with repeated runs")
    p.add_argument("--store", required=True)
    p.add_argument("--strategies", default="rs,cbs")
    p.add_argument("--ratios", default="1,2,3,5")
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--base-model", default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--max-length", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="grade a raw policy file")
    p.add_argument("policy")
    p.add_argument("--store", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--service-id", default=None)
    p.add_argument("--service-name", default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--store", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--label", action="append", help="preload a label.json file")
    p.add_argument("--feedback-log", default="feedback.jsonl")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("perplexity", help="per-rating pseudo-perplexity report")
    p.add_argument("--store", required=True)
    p.add_argument("--models", required=True, help="comma-separated model ids")
    p.add_argument("--window-size", type=int, default=8)
    p.add_argument("--stride", type=int, default=4)
    p.add_argument("--limit", type=int, default=None, help="max excerpts per rating")
    p.set_defaults(func=cmd_perplexity)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return args.func(args, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (corpus_mod.CorpusError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
