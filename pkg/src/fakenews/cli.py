"""Batch command-line interface.

Subcommands: build-lexicons, train-embeddings, train, evaluate, predict,
ablate.  Exit codes: 0 ok, 1 usage/config error, 2 data error, 3 model
mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import corpus as corpus_mod
from . import embeddings as emb_mod
from . import evaluation as eval_mod
from . import neural
from . import pipeline
from . import resources as res_mod
from . import svm as svm_mod
from .errors import DataError, ModelMismatchError
from .textproc import tokenize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MODEL = 3


def _config_epilog() -> str:
    lines = ["configuration keys (flat key=value file, # comments allowed):"]
    for key, doc in pipeline.CONFIG_KEY_DOCS.items():
        lines.append(f"  {key:<22} {doc}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="path to the key=value config file")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--threads", type=int, default=1,
                        help="worker threads for independent grid cells (default 1)")
    common.add_argument("--deterministic", action="store_true",
                        help="force single-threaded execution regardless of --threads")

    parser = argparse.ArgumentParser(
        prog="fakenews",
        description="Text-only fake news detection pipeline (batch tool).",
        epilog=_config_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("build-lexicons", parents=[common],
                   help="build the PMI scored lexicons from the labeled dataset")

    p = sub.add_parser("train-embeddings", parents=[common],
                       help="train skip-gram word vectors on the dataset text")
    p.add_argument("--out", default=None, help="output vector file (default: config embeddings path)")

    sub.add_parser("train", parents=[common],
                   help="run all training stages and write model artifacts")

    p = sub.add_parser("evaluate", parents=[common], help="score a labeled test set")
    p.add_argument("test", help="labeled test JSONL")
    p.add_argument("--baseline-only", action="store_true",
                   help="report only the majority-class baseline row")
    p.add_argument("--out", default=None, help="report CSV path (default: model_dir/report.csv)")

    p = sub.add_parser("predict", parents=[common], help="label new articles")
    p.add_argument("input", help="JSONL input (labels optional)")
    p.add_argument("--out", default=None, help="output JSONL (default: stdout)")

    p = sub.add_parser("ablate", parents=[common],
                       help="train and score one SVM per feature-group subset")
    p.add_argument("test", help="labeled test JSONL")
    p.add_argument("--subsets",
                   default="baseline;tfidf;attnn;tfidf+attnn;tfidf+feats+attnn",
                   help="semicolon-separated rows, each a +-joined group list")
    p.add_argument("--out", default=None, help="report CSV path (default: model_dir/ablation.csv)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = pipeline.load_config(args.config, seed_override=args.seed)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    threads = 1 if args.deterministic else max(1, args.threads)
    try:
        if args.command == "build-lexicons":
            return cmd_build_lexicons(config)
        if args.command == "train-embeddings":
            return cmd_train_embeddings(config, args.out)
        if args.command == "train":
            return cmd_train(config, threads)
        if args.command == "evaluate":
            return cmd_evaluate(config, args.test, args.baseline_only, args.out)
        if args.command == "predict":
            return cmd_predict(config, args.input, args.out)
        if args.command == "ablate":
            return cmd_ablate(config, args.test, args.subsets, args.out, threads)
        raise AssertionError(f"unhandled command {args.command}")
    except pipeline.StageFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc.cause)
    except (DataError, ModelMismatchError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code_for(exc)


def _exit_code_for(exc: Exception) -> int:
    if isinstance(exc, ModelMismatchError):
        return EXIT_MODEL
    if isinstance(exc, (DataError, OSError)):
        return EXIT_DATA
    return EXIT_USAGE


def cmd_build_lexicons(config: pipeline.PipelineConfig) -> int:
    if not config.scored_lexicon_dir:
        raise ValueError("config key scored_lexicon_dir must be set for build-lexicons")
    dataset = corpus_mod.load_dataset(config.dataset)
    os.makedirs(config.scored_lexicon_dir, exist_ok=True)
    for kind in res_mod.LEXICON_KINDS:
        lex = res_mod.build_pmi_lexicon(dataset, kind, min_df=config.pmi_min_df,
                                        smoothing=config.pmi_smoothing)
        path = os.path.join(config.scored_lexicon_dir, f"{kind}.tsv")
        res_mod.save_scored_lexicon(lex, path)
        top = sorted(
            ((scores["fake"], term) for term, scores in lex.entries.items() if "fake" in scores),
            reverse=True)[:5]
        print(f"[{kind}] {len(lex)} terms -> {path}")
        for score, term in top:
            print(f"  fake {score:+.4f}  {term}")
    return EXIT_OK


def cmd_train_embeddings(config: pipeline.PipelineConfig, out: str | None) -> int:
    out = out or config.embeddings
    if not out:
        raise ValueError("no output path: set the embeddings config key or pass --out")
    dataset = corpus_mod.load_dataset(config.dataset)
    docs = [tokenize(a.title).lowers() + tokenize(a.content).lowers()
            for a in dataset.articles()]
    vocab = emb_mod.build_vocab(docs, min_doc_freq=config.emb_min_doc_freq)
    sg_config = emb_mod.SkipgramConfig(
        dim=config.emb_dim, window=config.emb_window, negatives=config.emb_negatives,
        epochs=config.emb_epochs, seed=config.seed + 4)
    losses = []
    matrix = emb_mod.train_skipgram(docs, vocab, sg_config,
                                    log=lambda epoch, loss: losses.append((epoch, loss)))
    for epoch, loss in losses:
        print(f"[epoch {epoch}] mean loss {loss:.4f}")
    if out.endswith(".bin"):
        emb_mod.save_vectors_binary(vocab, matrix, out)
    else:
        emb_mod.save_vectors_text(vocab, matrix, out)
    print(f"[embeddings] {len(vocab)} words x {matrix.dim} -> {out}")
    return EXIT_OK


def cmd_train(config: pipeline.PipelineConfig, threads: int) -> int:
    pipeline.run_train(config, threads=threads)
    return EXIT_OK


def cmd_evaluate(config: pipeline.PipelineConfig, test_path: str,
                 baseline_only: bool, out: str | None) -> int:
    train_set = corpus_mod.load_dataset(config.dataset)
    test_set = corpus_mod.load_dataset(test_path)
    test_set.require_labels()
    rows = [eval_mod.AblationRow("baseline",
                                 eval_mod.majority_baseline(train_set, test_set))]
    if not baseline_only:
        loaded = pipeline.load_trained(config)
        preds, _, _ = pipeline.predict_dataset(loaded, test_set)
        gold = eval_mod.fake_labels_pm1(test_set)
        metrics = eval_mod.macro_metrics(eval_mod.confusion(preds, gold))
        rows.append(eval_mod.AblationRow("+".join(config.groups), metrics))
    report = eval_mod.format_report(rows)
    print(report)
    out = out or os.path.join(config.model_dir, "report.csv")
    eval_mod.write_report_csv(rows, out)
    print(f"[report] {out}")
    return EXIT_OK


def cmd_predict(config: pipeline.PipelineConfig, input_path: str, out: str | None) -> int:
    loaded = pipeline.load_trained(config)
    articles = []
    skipped = 0
    with open(input_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                articles.append(corpus_mod.Article(
                    id=len(articles), url=str(obj.get("url", "")),
                    date=str(obj.get("date", "")),
                    title=str(obj["title"]), content=str(obj["content"])))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                print(f"warning: {input_path}: line {lineno} skipped ({exc})", file=sys.stderr)
                skipped += 1
    dataset = corpus_mod.Dataset(items=tuple((a, None) for a in articles))
    sink = open(out, "w", encoding="utf-8") if out else sys.stdout
    try:
        if len(dataset):
            labels, values, probs = pipeline.predict_dataset(loaded, dataset)
            for art, label, value, prob in zip(articles, labels, values, probs):
                sink.write(json.dumps({
                    "id": art.id,
                    "fake_prediction": bool(label == 1),
                    "decision_value": float(value),
                    "nn_probability": float(prob),
                }, sort_keys=True) + "\n")
    finally:
        if out:
            sink.close()
    if skipped:
        print(f"[predict] skipped {skipped} malformed lines", file=sys.stderr)
    return EXIT_OK


def cmd_ablate(config: pipeline.PipelineConfig, test_path: str, subsets: str,
               out: str | None, threads: int) -> int:
    subset_list = [s.strip() for s in subsets.split(";") if s.strip()]
    for subset in subset_list:
        if subset != "baseline":
            eval_mod.resolve_groups(subset)  # fail fast on unknown names
    loaded = pipeline.load_trained(config)
    train_set = corpus_mod.load_dataset(config.dataset)
    test_set = corpus_mod.load_dataset(test_path)
    test_set.require_labels()

    task_train = task_test = None
    if "task_embedding" in config.groups:
        task_train = neural.extract_task_embeddings(
            train_set, loaded.net_params, loaded.models.vocab, loaded.models.matrix,
            loaded.net_config)
        task_test = neural.extract_task_embeddings(
            test_set, loaded.net_params, loaded.models.vocab, loaded.models.matrix,
            loaded.net_config)
    from . import features as feat

    train_matrix = feat.assemble_matrix(train_set, loaded.models, task_train)
    test_matrix = feat.assemble_matrix(test_set, loaded.models, task_test)
    rows = eval_mod.ablation_run(subset_list, loaded.schema, train_matrix, test_matrix,
                                 train_set, test_set, config.grid_spec(),
                                 seed=config.seed, threads=threads)
    print(eval_mod.format_report(rows))
    out = out or os.path.join(config.model_dir, "ablation.csv")
    eval_mod.write_report_csv(rows, out)
    print(f"[report] {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
