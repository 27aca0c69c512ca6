"""Command-line entry point.

Exit codes: 0 success, 1 data or file error, 2 usage error.  Every command
emits a run manifest (single JSON line on stderr, optionally a file via
--manifest) so reruns can be compared byte for byte.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import hashlib
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import analysis, figures
from .backends import BackendKind, CountingBackend, make_backend
from .baseline.features import DEFAULT_DIM, check_dim, featurize_matrix
from .baseline.linear import save_model, train_linear, train_multitask
from .baseline.losses import LossConfig, LossKind
from .codecs import decode_stage1_output, decode_stage2_output
from .corpus import (
    Corpus,
    corpus_stats,
    ingest,
    record_from_row,
    render_stats,
    split_corpus,
)
from .errors import DataError, PddError, SchemaError
from .fileio import (
    ensure_parent,
    read_annotations,
    read_events,
    read_jsonl,
    read_predictions,
    read_sentences,
    read_speakers,
    read_split,
    write_annotations,
    write_predictions,
    write_sentences,
    write_split,
)
from .labelmap import DEFAULT_LABEL_MAP, load_label_map
from .pipeline import export_training_file, parse_training_file, run_pipeline
from .records import Source, coerce_source
from .segmentation import segment_document
from .version import __version__

# -- config ---------------------------------------------------------------------

CONFIG_ENV = "PDD_CONFIG"


def load_config(path: Optional[str]) -> tuple[dict, Optional[Path]]:
    """Read the --config file, falling back to $PDD_CONFIG; {} without either."""
    if path is None:
        path = os.environ.get(CONFIG_ENV) or None
    if path is None:
        return {}, None
    p = Path(path)
    raw = p.read_bytes()
    if p.suffix.lower() == ".json":
        data = json.loads(raw.decode("utf-8"))
    else:
        try:
            import tomllib
        except ImportError:
            import tomli as tomllib
        data = tomllib.loads(raw.decode("utf-8"))
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: config must be a table/object at top level")
    return data, p


def cfg(config: dict, dotted: str, default=None):
    node = config
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def pick(flag_value, config: dict, dotted: str, default):
    """Explicit flag wins, then config, then the builtin default."""
    if flag_value is not None:
        return flag_value
    value = cfg(config, dotted)
    return default if value is None else value


# -- run manifest ------------------------------------------------------------------

def _digest(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclasses.dataclass(frozen=True)
class RunManifest:
    command: str
    config_hash: Optional[str]
    input_digests: dict[str, str]
    seed: Optional[int]
    tool_version: str
    started: str
    finished: str

    def as_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), ensure_ascii=False,
                          sort_keys=True)


class ManifestBuilder:
    def __init__(self, command: str, config_path: Optional[Path]):
        self.command = command
        self.config_hash = _digest(config_path) if config_path else None
        self.inputs: dict[str, str] = {}
        self.seed: Optional[int] = None
        self.started = dt.datetime.now(dt.timezone.utc).isoformat()

    def add_input(self, path) -> Path:
        p = Path(path)
        self.inputs[str(p)] = _digest(p)
        return p

    def finish(self, manifest_path: Optional[str]) -> RunManifest:
        manifest = RunManifest(
            command=self.command, config_hash=self.config_hash,
            input_digests=dict(sorted(self.inputs.items())), seed=self.seed,
            tool_version=__version__, started=self.started,
            finished=dt.datetime.now(dt.timezone.utc).isoformat())
        line = manifest.as_json()
        print(f"manifest: {line}", file=sys.stderr)
        if manifest_path:
            with open(ensure_parent(manifest_path), "w", encoding="utf-8") as fh:
                fh.write(line + "\n")
        return manifest


# -- shared argument helpers ----------------------------------------------------------

def _ratios(text: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ratio list {text!r}")
    return parts


def _date(text: str) -> dt.date:
    return dt.date.fromisoformat(text)


def _label_map(args, config: dict):
    path = pick(getattr(args, "label_map", None), config, "paths.label_map", None)
    return load_label_map(path) if path else DEFAULT_LABEL_MAP


def _load_corpus(mb: ManifestBuilder, path) -> Corpus:
    return read_sentences(mb.add_input(path))


# -- commands ---------------------------------------------------------------------------

def cmd_ingest(args, config: dict, mb: ManifestBuilder) -> int:
    rows = read_jsonl(mb.add_input(args.input))
    source = coerce_source(args.source) if args.source else None
    corpus = ingest(rows, source=source)
    n = write_sentences(args.out, corpus)
    print(f"ingested {n} sentences -> {args.out}")
    return 0


def cmd_segment(args, config: dict, mb: ManifestBuilder) -> int:
    corpus = Corpus()
    n_docs = 0
    for row in read_jsonl(mb.add_input(args.input)):
        for key in ("doc_id", "text", "source", "date"):
            if key not in row:
                raise SchemaError(f"document row missing {key!r}")
        n_docs += 1
        meta = {k: v for k, v in row.items() if k not in ("doc_id", "text")}
        for sent_id, sentence in segment_document(row["doc_id"], row["text"]):
            corpus.add(record_from_row({**meta, "id": sent_id,
                                        "text": sentence,
                                        "doc_id": row["doc_id"]}))
    n = write_sentences(args.out, corpus)
    print(f"segmented {n_docs} documents into {n} sentences -> {args.out}")
    return 0


def cmd_split(args, config: dict, mb: ManifestBuilder) -> int:
    corpus = _load_corpus(mb, args.sentences)
    ratios = pick(args.ratios, config, "split.ratios", (0.7, 0.15, 0.15))
    seed = pick(args.seed, config, "split.seed", 0)
    mb.seed = seed
    split = split_corpus(corpus, ratios=tuple(ratios), seed=seed)
    write_split(args.out, split)
    print(f"split sizes train/dev/test = {split.sizes()} -> {args.out}")
    return 0


def cmd_stats(args, config: dict, mb: ManifestBuilder) -> int:
    corpus = _load_corpus(mb, args.sentences)
    annotations = (read_annotations(mb.add_input(args.annotations))
                   if args.annotations else [])
    stats = corpus_stats(corpus, annotations)
    print(render_stats(stats))
    if args.out:
        rows = [("total_sentences", stats.total)]
        rows += [(f"source_{s.value}", n)
                 for s, n in sorted(stats.source_counts.items(),
                                    key=lambda kv: kv[0].value)]
        rows += [(f"source_{s.value}_pct", f"{100 * r:.2f}")
                 for s, r in sorted(stats.source_rates().items(),
                                    key=lambda kv: kv[0].value)]
        if stats.annotated_count:
            rows.append(("annotated", stats.annotated_count))
            rows.append(("delegit", stats.delegit_count))
            rows.append(("delegit_pct", f"{100 * stats.delegit_rate():.1f}"))
        figures.write_csv(args.out, figures.csv_table(["metric", "value"], rows))
    return 0


def cmd_serve_annotation(args, config: dict, mb: ManifestBuilder) -> int:
    from .service import create_app
    from .workflow import AnnotationWorkflow

    corpus = _load_corpus(mb, args.sentences)
    annotators = [a for a in args.annotators.split(",") if a]
    if not annotators:
        raise SchemaError("need at least one annotator id")
    shared: list[str] = []
    if args.shared_ids:
        text = Path(mb.add_input(args.shared_ids)).read_text(encoding="utf-8")
        shared = [line.strip() for line in text.splitlines() if line.strip()]
    elif args.shared_n:
        shared = corpus.ids()[:args.shared_n]
    workflow = AnnotationWorkflow(corpus, annotators=annotators,
                                  shared_sample=shared)
    app = create_app(workflow)
    import uvicorn
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_agreement(args, config: dict, mb: ManifestBuilder) -> int:
    from .agreement import agreement_report

    annotations = read_annotations(mb.add_input(args.annotations))
    report = agreement_report(annotations)
    print(f"annotators: {', '.join(report.annotators)}")
    print(f"shared sentences (>=2 raters): {report.n_shared}")
    for pair in sorted(report.kappa):
        kappa = report.kappa[pair]
        corr = report.correlation[pair]
        corr_text = "undefined" if corr is None else f"{corr:.3f}"
        print(f"  {pair[0]} vs {pair[1]}: kappa={kappa:.3f} "
              f"r={corr_text} n={report.pair_counts[pair]}")
    avg_corr = ("undefined" if report.avg_correlation is None
                else f"{report.avg_correlation:.3f}")
    print(f"average kappa: {report.avg_kappa:.3f}")
    print(f"average correlation: {avg_corr}")
    print(f"disagreements: {len(report.disagreements)}")
    if args.out:
        rows = [(a, b, report.kappa[(a, b)],
                 report.correlation[(a, b)], report.pair_counts[(a, b)])
                for a, b in sorted(report.kappa)]
        figures.write_csv(args.out, figures.csv_table(
            ["annotator_a", "annotator_b", "kappa", "pearson_r", "n"], rows))
    return 0


def cmd_export_train(args, config: dict, mb: ManifestBuilder) -> int:
    corpus = _load_corpus(mb, args.sentences)
    annotations = read_annotations(mb.add_input(args.annotations))
    if args.split:
        split = read_split(mb.add_input(args.split))
        ids: Sequence[str] = split.part(args.part)
    else:
        annotated = {a.sentence_id for a in annotations}
        ids = [i for i in corpus.ids() if i in annotated]
    task = BackendKind(args.task)
    text, n, skipped = export_training_file(corpus, annotations, ids, task,
                                            _label_map(args, config))
    with open(ensure_parent(args.out), "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"wrote {n} {args.task} examples -> {args.out} (skipped {skipped})")
    return 0


def cmd_train_baseline(args, config: dict, mb: ManifestBuilder) -> int:
    label_map = _label_map(args, config)
    raw = Path(mb.add_input(args.train)).read_text(encoding="utf-8")
    pairs = parse_training_file(raw)
    if not pairs:
        raise DataError(f"{args.train}: no training examples")
    dim = pick(args.dim, config, "baseline.dim", DEFAULT_DIM)
    check_dim(dim)
    seed = pick(args.seed, config, "baseline.seed", 0)
    mb.seed = seed
    epochs = pick(args.epochs, config, "baseline.epochs", 200)
    lr = pick(args.learning_rate, config, "baseline.learning_rate", 1.0)
    X = featurize_matrix([inp for inp, _t in pairs], dim)
    if args.task == "binary":
        labels = []
        for i, (_inp, target) in enumerate(pairs):
            value = decode_stage1_output(target, label_map)
            if value is None:
                raise DataError(f"{args.train}: example {i} target is neither label")
            labels.append(int(value))
        loss = LossConfig(kind=LossKind(args.loss),
                          gamma=args.gamma, alpha_t=args.alpha_t)
        model = train_linear(X, labels, dim=dim, n_classes=2, loss=loss,
                             epochs=epochs, learning_rate=lr, seed=seed)
    else:
        targets = []
        for i, (_inp, target) in enumerate(pairs):
            chars, ok = decode_stage2_output(target, label_map)
            if not ok:
                raise DataError(f"{args.train}: example {i} target does not parse")
            targets.append(chars)
        model = train_multitask(X, targets, dim=dim, epochs=epochs,
                                learning_rate=lr, seed=seed)
    save_model(model, args.out, task=args.task, label_map_id=label_map.id)
    print(f"trained {args.task} baseline on {len(pairs)} examples -> {args.out} "
          f"(final loss {model.loss_history[-1]:.6f})")
    return 0


def cmd_predict(args, config: dict, mb: ManifestBuilder) -> int:
    label_map = _label_map(args, config)
    corpus = _load_corpus(mb, args.sentences)
    threshold = pick(args.threshold, config, "pipeline.threshold", 0.5)
    batch_size = pick(args.batch_size, config, "pipeline.batch_size", 64)
    stage1 = make_backend(args.stage1, BackendKind.BINARY, label_map)
    stage2c = CountingBackend(make_backend(
        pick(args.stage2_characteristics, config,
             "pipeline.stage2_characteristics", "mock:zero"),
        BackendKind.CHARACTERISTICS, label_map))
    stage2s = CountingBackend(make_backend(
        pick(args.stage2_spans, config, "pipeline.stage2_spans", "mock:echo"),
        BackendKind.SPAN, label_map))
    records = list(corpus)
    predictions = run_pipeline(stage1, stage2c, stage2s,
                               [(r.id, r.text) for r in records], label_map,
                               threshold=threshold, batch_size=batch_size)
    n = write_predictions(args.out, predictions)
    positives = sum(1 for p in predictions if p.delegit)
    print(f"predicted {n} sentences ({positives} positive) -> {args.out}")
    print(f"stage2 calls: characteristics={stage2c.sentences_seen} "
          f"spans={stage2s.sentences_seen}", file=sys.stderr)
    return 0


def cmd_evaluate(args, config: dict, mb: ManifestBuilder) -> int:
    from .evaluation import evaluate, report_to_csv_rows

    predictions = read_predictions(mb.add_input(args.pred))
    gold = read_annotations(mb.add_input(args.gold))
    corpus = _load_corpus(mb, args.sentences)
    texts = {r.id: r.text for r in list(corpus)}
    report = evaluate(predictions, gold, texts)
    print(json.dumps(report.as_dict(), indent=2, ensure_ascii=False))
    if args.out:
        model_id = predictions[0].model_id if predictions else ""
        rows = report_to_csv_rows(report, model_id=model_id)
        figures.write_csv(args.out, figures.csv_table(
            ["family", "model_id", "m1", "m2", "m3", "m4", "m5", "m6",
             "m7", "m8"], [row + [""] * (10 - len(row)) for row in rows]))
    return 0


# -- analyze sub-targets ------------------------------------------------------------------

def _emit_figure(out_dir: Path, stem: str, csv_text: str, plot_data: dict,
                 svg: bool) -> None:
    figures.write_csv(out_dir / f"{stem}.csv", csv_text)
    figures.write_plot_data(out_dir / f"{stem}.json", plot_data)
    if svg:
        figures.render_svg(plot_data, out_dir / f"{stem}.svg")


def _analysis_inputs(args, mb: ManifestBuilder):
    predictions = read_predictions(mb.add_input(args.pred))
    corpus = _load_corpus(mb, args.sentences)
    return predictions, corpus


def cmd_analyze(args, config: dict, mb: ManifestBuilder) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = args.target

    if target == "temporal":
        predictions, corpus = _analysis_inputs(args, mb)
        scheme = pick(args.bin, config, "analysis.bin", "half_year")
        events = (read_events(mb.add_input(args.events))
                  if args.events else [])
        result = analysis.speaker_aggregate(predictions, corpus, binning=scheme)
        points = analysis.temporal_series(result.shares, scheme)
        _emit_figure(out_dir, "temporal", figures.csv_temporal(points),
                     figures.plot_data_temporal({"all speakers": points}, events),
                     args.svg)
        print(f"temporal: {len(points)} bins, {result.n_speakerless} "
              f"speakerless sentences excluded -> {out_dir}")
        return 0

    if target in ("gender", "bloc"):
        predictions, corpus = _analysis_inputs(args, mb)
        speakers = read_speakers(mb.add_input(args.speakers))
        group_fn = (analysis.gender_group_fn(speakers) if target == "gender"
                    else analysis.bloc_group_fn(speakers))
        result = analysis.speaker_aggregate(predictions, corpus)
        comparison = analysis.compare_groups(result.shares, group_fn)
        _emit_figure(out_dir, target, figures.csv_comparison(comparison),
                     _comparison_plot(comparison), args.svg)
        if target == "gender":
            curves = {}
            for group in sorted(comparison.means):
                values = [s.pdd_share for s in result.shares
                          if group_fn(s.speaker_id) == group]
                try:
                    curves[group] = analysis.density_estimate(values)
                except (DataError, PddError):
                    print(f"density for {group!r} skipped (degenerate sample)",
                          file=sys.stderr)
            if curves:
                _emit_figure(out_dir, "gender_density",
                             figures.csv_density(curves),
                             figures.plot_data_density(curves), args.svg)
        for pair, test in sorted(comparison.tests.items()):
            print(f"{pair[0]} vs {pair[1]}: t={test.t:.3f} df={test.df:.1f} "
                  f"p={test.p_value:.4f}")
        return 0

    if target == "platform":
        predictions, corpus = _analysis_inputs(args, mb)
        profiles = {}
        for source in Source:
            try:
                profiles[source.value] = analysis.characteristics_profile(
                    predictions, corpus, source=source,
                    start=args.start, end=args.end)
            except DataError:
                continue
        if not profiles:
            raise DataError("no platform has any sentences under the filter")
        _emit_figure(out_dir, "platform", figures.csv_profile(profiles),
                     figures.plot_data_profile(profiles), args.svg)
        for name, profile in sorted(profiles.items()):
            print(f"{name}: n={profile.n_sentences} positives="
                  f"{profile.n_positive} share={profile.pdd_share:.4f}")
        return 0

    if target == "logodds":
        predictions, corpus = _analysis_inputs(args, mb)
        speakers = read_speakers(mb.add_input(args.speakers))
        group_fn = (analysis.gender_group_fn(speakers) if args.by == "gender"
                    else analysis.bloc_group_fn(speakers))
        counts = analysis.term_counts_from_predictions(predictions, corpus,
                                                       group_fn)
        alpha0 = pick(args.alpha0, config, "analysis.alpha0", 100.0)
        top_k = pick(args.top_k, config, "analysis.top_k", 10)
        result = analysis.weighted_log_odds(counts, alpha0=alpha0, top_k=top_k)
        _emit_figure(out_dir, "logodds", figures.csv_logodds(result),
                     figures.plot_data_logodds(result), args.svg)
        for group in sorted(result):
            top = ", ".join(e.term for e in result[group][:3])
            print(f"{group}: top terms {top}")
        return 0

    if target == "before-after":
        predictions, corpus = _analysis_inputs(args, mb)
        speakers = read_speakers(mb.add_input(args.speakers))
        events = read_events(mb.add_input(args.events))
        matches = [e for e in events if e["name"] == args.event]
        if not matches:
            raise DataError(f"event {args.event!r} not in {args.events}")
        event_date = matches[0]["date"]
        cohort_fn = analysis.coalition_cohort_fn(speakers, event_date)
        table = analysis.before_after(predictions, corpus, cohort_fn, event_date)
        _emit_figure(out_dir, "before_after", figures.csv_before_after(table),
                     figures.plot_data_before_after(table), args.svg)
        for key in sorted(table.cells):
            value = table.cells[key]
            text = "null" if value is None else f"{value:.4f}"
            print(f"{key[0]}/{key[1]}: {text} (n={table.sizes[key]})")
        for warning in table.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        return 0

    raise SchemaError(f"unknown analyze target {target!r}")


def _comparison_plot(comparison) -> dict:
    groups = sorted(comparison.means)
    return {
        "kind": "bars",
        "x_label": "group",
        "y_label": "mean speaker share",
        "series": [{"name": "groups", "categories": groups,
                    "y": [comparison.means[g] for g in groups]}],
        "markers": [],
    }


def cmd_report(args, config: dict, mb: ManifestBuilder) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus = _load_corpus(mb, args.sentences)
    annotations = (read_annotations(mb.add_input(args.annotations))
                   if args.annotations else [])
    produced: list[str] = []

    def do_stats():
        stats = corpus_stats(corpus, annotations)
        path = out_dir / "stats.txt"
        path.write_text(render_stats(stats) + "\n", encoding="utf-8")
        return str(path)

    def do_agreement():
        from .agreement import agreement_report
        try:
            report = agreement_report(annotations)
        except DataError:
            return None
        rows = [(a, b, report.kappa[(a, b)], report.correlation[(a, b)],
                 report.pair_counts[(a, b)]) for a, b in sorted(report.kappa)]
        path = out_dir / "agreement.csv"
        figures.write_csv(path, figures.csv_table(
            ["annotator_a", "annotator_b", "kappa", "pearson_r", "n"], rows))
        return str(path)

    def do_metrics():
        if not args.pred:
            return None
        from .evaluation import evaluate
        predictions = read_predictions(mb.add_input(args.pred))
        texts = {r.id: r.text for r in list(corpus)}
        report = evaluate(predictions, annotations, texts)
        path = out_dir / "metrics.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, indent=2, ensure_ascii=False)
            fh.write("\n")
        return str(path)

    jobs = [do_stats]
    if annotations:
        jobs.append(do_agreement)
        jobs.append(do_metrics)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        for path in pool.map(lambda fn: fn(), jobs):
            if path:
                produced.append(path)
    index = out_dir / "index.json"
    with open(index, "w", encoding="utf-8") as fh:
        json.dump({"files": sorted(produced)}, fh, indent=2)
        fh.write("\n")
    produced.append(str(index))
    print("\n".join(produced))
    return 0


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdd",
        description="Delegitimization-discourse corpus, pipeline, and "
                    "analysis toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="TOML or JSON config file "
                        f"(fallback: ${CONFIG_ENV})")
    parser.add_argument("--manifest", help="also write the run manifest here")
    parser.add_argument("--jobs", type=int, default=1,
                        help="max parallel workers where a command fans out")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize raw sentence rows")
    p.add_argument("--input", required=True)
    p.add_argument("--source", help="force one source for every row")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("segment", help="split documents into sentences")
    p.add_argument("--input", required=True, help="JSONL of document rows")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_segment)

    p = sub.add_parser("split", help="deterministic train/dev/test split")
    p.add_argument("--sentences", required=True)
    p.add_argument("--ratios", type=_ratios)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("stats", help="corpus descriptive statistics")
    p.add_argument("--sentences", required=True)
    p.add_argument("--annotations")
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("serve-annotation", help="run the annotation service")
    p.add_argument("--sentences", required=True)
    p.add_argument("--annotators", required=True, help="comma-separated ids")
    p.add_argument("--shared-ids", help="file of ids every annotator labels")
    p.add_argument("--shared-n", type=int,
                   help="first N sentences become the shared sample")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8021)
    p.set_defaults(fn=cmd_serve_annotation)

    p = sub.add_parser("agreement", help="inter-annotator agreement report")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(fn=cmd_agreement)

    p = sub.add_parser("export-train", help="render a training text file")
    p.add_argument("--sentences", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--split")
    p.add_argument("--part", default="train",
                   choices=("train", "dev", "validation", "test"))
    p.add_argument("--task", required=True,
                   choices=("binary", "characteristics", "span"))
    p.add_argument("--label-map")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export_train)

    p = sub.add_parser("train-baseline", help="train the hashed linear model")
    p.add_argument("--train", required=True, help="training text file")
    p.add_argument("--task", required=True, choices=("binary", "characteristics"))
    p.add_argument("--dim", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--loss", default="default",
                   choices=tuple(k.value for k in LossKind))
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--alpha-t", type=float, default=1.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--label-map")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_train_baseline)

    p = sub.add_parser("predict", help="run the two-stage cascade")
    p.add_argument("--sentences", required=True)
    p.add_argument("--stage1", required=True,
                   help="backend spec: mock:NAME | baseline:PATH | "
                        "script:PATH | wire:URL")
    p.add_argument("--stage2-characteristics")
    p.add_argument("--stage2-spans")
    p.add_argument("--threshold", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--label-map")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("evaluate", help="score predictions against gold")
    p.add_argument("--gold", required=True, help="gold annotation JSONL")
    p.add_argument("--pred", required=True, help="prediction JSONL")
    p.add_argument("--sentences", required=True)
    p.add_argument("--out", help="CSV output path")
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("analyze", help="statistics over predictions")
    p.add_argument("target", choices=("temporal", "gender", "bloc", "platform",
                                      "logodds", "before-after"))
    p.add_argument("--pred", required=True)
    p.add_argument("--sentences", required=True)
    p.add_argument("--speakers", help="speaker metadata CSV")
    p.add_argument("--events", help="events config JSON")
    p.add_argument("--event", help="event name for before-after")
    p.add_argument("--bin", choices=("half_year", "week"))
    p.add_argument("--by", default="bloc", choices=("bloc", "gender"),
                   help="grouping for logodds")
    p.add_argument("--alpha0", type=float)
    p.add_argument("--top-k", type=int)
    p.add_argument("--start", type=_date)
    p.add_argument("--end", type=_date)
    p.add_argument("--svg", action="store_true", help="also render SVG figures")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("report", help="write stats/agreement/metrics bundle")
    p.add_argument("--sentences", required=True)
    p.add_argument("--annotations")
    p.add_argument("--pred")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(fn=cmd_report)

    return parser


def _validate_analyze_args(args) -> None:
    needs_speakers = {"gender", "bloc", "logodds", "before-after"}
    if args.command == "analyze":
        if args.target in needs_speakers and not args.speakers:
            raise SchemaError(f"analyze {args.target} needs --speakers")
        if args.target == "before-after" and not (args.events and args.event):
            raise SchemaError("analyze before-after needs --events and --event")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _validate_analyze_args(args)
        config, config_path = load_config(args.config)
        mb = ManifestBuilder(args.command, config_path)
        code = args.fn(args, config, mb)
        mb.finish(args.manifest)
        return code
    except PddError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
