"""Batch pipeline orchestration: flat key=value config, staged training,
versioned model artifacts and a manifest binding them to config hash + seed.

Stage order follows the two-component design: resources and TF.IDF first,
then the attention network on a train/dev split, task embeddings for every
article, feature assembly + scaling, and finally the grid-searched SVM.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import corpus as corpus_mod
from . import embeddings as emb_mod
from . import evaluation as eval_mod
from . import features as feat
from . import neural
from . import resources as res_mod
from . import svm as svm_mod
from .errors import DataError, ModelMismatchError
from .textproc import LanguageProfile, tokenize

ARTIFACTS = {
    "tfidf": "tfidf.model",
    "features": "features.model",
    "network": "network.params",
    "history": "network_history.csv",
    "svm": "svm.model",
}
MANIFEST_NAME = "manifest.json"

CONFIG_KEY_DOCS = {
    "dataset": "path to the labeled training JSONL",
    "model_dir": "directory for trained model artifacts",
    "scored_lexicon_dir": "directory holding unigram/bigram/named_entity scored lexicons",
    "static_lexicon_dir": "directory holding typos.tsv, slang.txt, foreign.txt, english_equivalents.txt",
    "embeddings": "word vector file (.txt word2vec format or .bin compact format)",
    "groups": "comma list of feature groups (default: all eight)",
    "seed": "master seed; all stage seeds derive from it (default 0)",
    "dev_fraction": "fraction held out for network epoch selection (default 0.2)",
    "drop_duplicates": "true drops title reposts before training (default false)",
    "tfidf_min_df": "words must occur in strictly more documents than this (default 5)",
    "tfidf_content_cap": "content vocabulary cap (default 800)",
    "tfidf_title_cap": "title vocabulary cap (default 300)",
    "pmi_min_df": "minimum document frequency for scored lexicon terms (default 5)",
    "pmi_smoothing": "additive smoothing k for PMI (default 0.5)",
    "emb_dim": "dimension when training embeddings (default 300)",
    "emb_window": "skip-gram window (default 5)",
    "emb_negatives": "negative samples per pair (default 5)",
    "emb_epochs": "skip-gram epochs (default 5)",
    "emb_min_doc_freq": "vocabulary document-frequency floor (default 5)",
    "net_seq_len": "tokens kept per field (default 50)",
    "net_word_dim": "word vector dimension the network expects (default 300)",
    "net_gru_hidden": "GRU hidden size (default 128)",
    "net_attention_dim": "attention projection size (default 128)",
    "net_task_dim": "task embedding size (default 128)",
    "net_epochs": "training epochs (default 20)",
    "net_batch": "mini-batch size (default 32)",
    "net_lr": "learning rate (default 0.001)",
    "net_optimizer": "rmsprop or adam (default rmsprop)",
    "svm_c_grid": "comma list of C values (default 0.01,0.1,1,10,100)",
    "svm_gamma_grid": "comma list of gamma values (default 0.0001,0.001,0.01,0.1,1)",
    "svm_folds": "stratified CV folds (default 5)",
    "svm_tol": "SMO KKT tolerance (default 0.001)",
    "svm_max_passes": "quiet sweeps before SMO stops (default 5)",
}


@dataclass(frozen=True)
class PipelineConfig:
    dataset: str = ""
    model_dir: str = "models"
    scored_lexicon_dir: str = ""
    static_lexicon_dir: str = ""
    embeddings: str = ""
    groups: tuple[str, ...] = feat.GROUP_ORDER
    seed: int = 0
    dev_fraction: float = 0.2
    drop_duplicates: bool = False
    tfidf_min_df: int = 5
    tfidf_content_cap: int = 800
    tfidf_title_cap: int = 300
    pmi_min_df: int = 5
    pmi_smoothing: float = 0.5
    emb_dim: int = 300
    emb_window: int = 5
    emb_negatives: int = 5
    emb_epochs: int = 5
    emb_min_doc_freq: int = 5
    net_seq_len: int = 50
    net_word_dim: int = 300
    net_gru_hidden: int = 128
    net_attention_dim: int = 128
    net_task_dim: int = 128
    net_epochs: int = 20
    net_batch: int = 32
    net_lr: float = 0.001
    net_optimizer: str = "rmsprop"
    svm_c_grid: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)
    svm_gamma_grid: tuple[float, ...] = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
    svm_folds: int = 5
    svm_tol: float = 1e-3
    svm_max_passes: int = 5

    def network_config(self) -> neural.NetworkConfig:
        return neural.NetworkConfig(
            seq_len=self.net_seq_len, word_dim=self.net_word_dim,
            gru_hidden=self.net_gru_hidden, attention_dim=self.net_attention_dim,
            task_dim=self.net_task_dim, epochs=self.net_epochs, batch=self.net_batch,
            lr=self.net_lr, optimizer=self.net_optimizer, seed=self.seed + 1,
        )

    def grid_spec(self) -> svm_mod.GridSearchSpec:
        return svm_mod.GridSearchSpec(
            c_grid=self.svm_c_grid, gamma_grid=self.svm_gamma_grid,
            folds=self.svm_folds, seed=self.seed + 2,
        )

    def validate(self) -> None:
        unknown = [g for g in self.groups if g not in feat.GROUP_ORDER]
        if unknown:
            raise ValueError(f"unknown feature groups in config: {unknown}")
        if not 0.0 < self.dev_fraction < 1.0:
            raise ValueError(f"dev_fraction must be in (0, 1), got {self.dev_fraction}")
        self.network_config().validate()
        self.grid_spec().validate()


_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{source}: line {lineno}: expected key=value")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def config_from_mapping(values: dict[str, str], source: str = "<config>") -> PipelineConfig:
    kwargs = {}
    by_name = {f.name: f for f in fields(PipelineConfig)}
    for key, raw in values.items():
        if key not in by_name:
            raise ValueError(f"{source}: unknown config key {key!r}")
        default = getattr(PipelineConfig(), key)
        if key == "groups":
            kwargs[key] = tuple(g.strip() for g in raw.split(",") if g.strip())
        elif isinstance(default, bool):
            if raw.lower() not in _BOOL_VALUES:
                raise ValueError(f"{source}: key {key!r}: expected a boolean, got {raw!r}")
            kwargs[key] = _BOOL_VALUES[raw.lower()]
        elif isinstance(default, int):
            kwargs[key] = int(raw)
        elif isinstance(default, float):
            kwargs[key] = float(raw)
        elif isinstance(default, tuple):
            kwargs[key] = tuple(float(x) for x in raw.split(",") if x.strip())
        else:
            kwargs[key] = raw
    config = PipelineConfig(**kwargs)
    config.validate()
    return config


def load_config(path, seed_override: int | None = None) -> PipelineConfig:
    with open(path, encoding="utf-8") as fh:
        values = parse_config_text(fh.read(), source=str(path))
    config = config_from_mapping(values, source=str(path))
    if seed_override is not None:
        config = replace(config, seed=seed_override)
        config.validate()
    return config


def config_hash(config: PipelineConfig) -> str:
    canon = []
    for f in fields(PipelineConfig):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        canon.append(f"{f.name}={value!r}")
    return hashlib.sha256("\n".join(canon).encode("utf-8")).hexdigest()


class StageFailure(Exception):
    """A pipeline stage failed; partial outputs have been removed."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


# ---------------------------------------------------------------------------
# Model bundle loading
# ---------------------------------------------------------------------------

@dataclass
class LoadedModels:
    config: PipelineConfig
    profile: LanguageProfile
    models: feat.FeatureModels
    schema: feat.FeatureSchema
    scaler: feat.Scaler
    net_params: dict[str, np.ndarray] | None
    net_config: neural.NetworkConfig | None
    svm: svm_mod.SvmModel


def _needs_embeddings(groups) -> bool:
    return "embedding" in groups or "task_embedding" in groups


def load_resources(config: PipelineConfig, profile: LanguageProfile):
    """Scored/static lexicons and word vectors per the enabled groups."""
    scored = None
    if "pmi" in config.groups:
        if not config.scored_lexicon_dir:
            raise DataError("pmi group enabled but scored_lexicon_dir is not set")
        scored = {
            kind: res_mod.load_scored_lexicon(os.path.join(config.scored_lexicon_dir, f"{kind}.tsv"))
            for kind in res_mod.LEXICON_KINDS
        }
    static = None
    if "irregular" in config.groups:
        if not config.static_lexicon_dir:
            raise DataError("irregular group enabled but static_lexicon_dir is not set")
        names = {
            "typos": "typos.tsv",
            "slang": "slang.txt",
            "foreign": "foreign.txt",
            "english_equivalents": "english_equivalents.txt",
        }
        static = {
            kind: res_mod.load_static_lexicon(os.path.join(config.static_lexicon_dir, name), kind)
            for kind, name in names.items()
        }
    vocab = matrix = None
    if _needs_embeddings(config.groups):
        if not config.embeddings:
            raise DataError("embedding groups enabled but embeddings path is not set")
        if config.embeddings.endswith(".bin"):
            vocab, matrix = emb_mod.load_vectors_binary(config.embeddings)
        else:
            vocab, matrix = emb_mod.load_pretrained(config.embeddings)
    return scored, static, vocab, matrix


def _feature_models(config, profile, scored, static, tfidf, vocab, matrix) -> feat.FeatureModels:
    return feat.FeatureModels(
        profile=profile,
        scored_lexicons=scored,
        static_lexicons=static,
        tfidf=tfidf,
        vocab=vocab,
        matrix=matrix,
        groups=config.groups,
        word_dim=config.net_word_dim,
        task_dim=config.net_task_dim,
    )


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def run_train(config: PipelineConfig, profile: LanguageProfile | None = None,
              threads: int = 1, log=print) -> dict:
    """Execute all training stages; returns the manifest dictionary.

    Any stage failure removes files written so far and raises
    :class:`StageFailure` naming the stage.
    """
    config.validate()
    profile = profile or LanguageProfile.bulgarian()
    os.makedirs(config.model_dir, exist_ok=True)
    written: list[str] = []
    meta = {"config_hash": config_hash(config), "seed": str(config.seed)}
    stage = "load-data"
    try:
        dataset = corpus_mod.load_dataset(config.dataset)
        deduped, dup_report = corpus_mod.deduplicate_by_title(dataset)
        log(f"[load-data] {len(dataset)} articles, "
            f"{dup_report.duplicated_titles} duplicated titles, "
            f"max reposts {dup_report.max_reposts}")
        train_set = deduped if config.drop_duplicates else dataset
        train_set.require_labels()

        stage = "resources"
        scored, static, vocab, matrix = load_resources(config, profile)
        tfidf = None
        if "tfidf" in config.groups:
            tfidf = feat.fit_tfidf(train_set, min_df=config.tfidf_min_df,
                                   content_cap=config.tfidf_content_cap,
                                   title_cap=config.tfidf_title_cap)
            path = os.path.join(config.model_dir, ARTIFACTS["tfidf"])
            feat.save_tfidf_model(tfidf, path, meta=meta)
            written.append(path)
            log(f"[resources] tfidf vocab: {len(tfidf.content_vocab)} content, "
                f"{len(tfidf.title_vocab)} title")

        net_params = None
        net_config = None
        task_train = None
        if "task_embedding" in config.groups:
            stage = "network"
            net_config = config.network_config()
            nn_train, nn_dev = corpus_mod.split_train_dev(train_set, config.dev_fraction, config.seed)
            net_params, history = neural.train_network(nn_train, nn_dev, vocab, matrix, net_config)
            best = max(h.dev_accuracy for h in history)
            log(f"[network] {len(history)} epochs, best dev accuracy {best:.4f}")
            path = os.path.join(config.model_dir, ARTIFACTS["network"])
            neural.save_params(net_params, net_config, path, meta=meta)
            written.append(path)
            path = os.path.join(config.model_dir, ARTIFACTS["history"])
            _write_history_csv(history, path, meta)
            written.append(path)
            stage = "task-embeddings"
            task_train = neural.extract_task_embeddings(train_set, net_params, vocab, matrix, net_config)

        stage = "features"
        models = _feature_models(config, profile, scored, static, tfidf, vocab, matrix)
        schema = feat.build_schema(models)
        train_matrix = feat.assemble_matrix(train_set, models, task_train)
        scaler = feat.fit_scaler(train_matrix)
        path = os.path.join(config.model_dir, ARTIFACTS["features"])
        feat.save_feature_model(schema, scaler, path, meta=meta)
        written.append(path)
        log(f"[features] matrix {train_matrix.shape[0]} x {train_matrix.shape[1]}")

        stage = "svm"
        x_train = feat.apply_scaler(scaler, train_matrix)
        y_train = eval_mod.fake_labels_pm1(train_set)
        best_c, best_gamma, table = svm_mod.grid_search_cv(
            x_train, y_train, config.grid_spec(), tol=config.svm_tol,
            max_passes=config.svm_max_passes, threads=threads)
        log(f"[svm] grid best C={best_c} gamma={best_gamma} "
            f"(cv acc {max(acc for _, _, acc in table):.4f})")
        model = svm_mod.train_smo(x_train, y_train, C=best_c, gamma=best_gamma,
                                  tol=config.svm_tol, max_passes=config.svm_max_passes,
                                  seed=config.seed + 3)
        model.schema_hash = schema.hash()
        path = os.path.join(config.model_dir, ARTIFACTS["svm"])
        svm_mod.save_svm(model, path, meta=meta)
        written.append(path)

        stage = "manifest"
        manifest = {
            "format": 1,
            "config_hash": meta["config_hash"],
            "seed": config.seed,
            "schema_hash": schema.hash(),
            "artifacts": {key: name for key, name in ARTIFACTS.items()
                          if os.path.join(config.model_dir, name) in written},
        }
        manifest_path = os.path.join(config.model_dir, MANIFEST_NAME)
        _atomic_write_text(manifest_path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        log(f"[manifest] {len(manifest['artifacts'])} artifacts in {config.model_dir}")
        return manifest
    except Exception as exc:
        for path in written:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise StageFailure(stage, exc) from exc


def _write_history_csv(history, path, meta) -> None:
    lines = [f"# config_hash={meta['config_hash']} seed={meta['seed']}",
             "epoch,train_loss,dev_acc"]
    lines += [f"{h.epoch},{h.train_loss:.9g},{h.dev_accuracy:.9g}" for h in history]
    _atomic_write_text(path, "\n".join(lines) + "\n")


def _atomic_write_text(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# Loading trained artifacts back
# ---------------------------------------------------------------------------

def load_trained(config: PipelineConfig, profile: LanguageProfile | None = None) -> LoadedModels:
    """Load every artifact the manifest lists, verifying config and schema hashes."""
    config.validate()
    profile = profile or LanguageProfile.bulgarian()
    manifest_path = os.path.join(config.model_dir, MANIFEST_NAME)
    if not os.path.exists(manifest_path):
        raise DataError(f"missing manifest {manifest_path}; run train first")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    expected_hash = config_hash(config)
    if manifest.get("config_hash") != expected_hash:
        raise ModelMismatchError(
            "manifest config hash does not match the supplied configuration; "
            "re-train or use the original config/seed")
    artifacts = manifest.get("artifacts", {})

    def apath(key):
        if key not in artifacts:
            raise DataError(f"manifest lists no {key!r} artifact")
        return os.path.join(config.model_dir, artifacts[key])

    tfidf = None
    if "tfidf" in config.groups:
        tfidf, tf_meta = feat.load_tfidf_model(apath("tfidf"))
        _check_meta(tf_meta, expected_hash, "tfidf model")
    scored, static, vocab, matrix = load_resources(config, profile)
    net_params = net_config = None
    if "task_embedding" in config.groups:
        net_params, net_config, net_meta = neural.load_params(apath("network"))
        _check_meta(net_meta, expected_hash, "network parameters")
    schema, scaler, fm_meta = feat.load_feature_model(apath("features"))
    _check_meta(fm_meta, expected_hash, "feature model")
    model, svm_meta = svm_mod.load_svm(apath("svm"))
    _check_meta(svm_meta, expected_hash, "svm model")
    if model.schema_hash != schema.hash():
        raise ModelMismatchError("svm model was trained on a different feature schema")
    models = _feature_models(config, profile, scored, static, tfidf, vocab, matrix)
    if feat.build_schema(models).hash() != schema.hash():
        raise ModelMismatchError("loaded resources produce a different feature schema "
                                 "than the persisted one")
    return LoadedModels(config=config, profile=profile, models=models, schema=schema,
                        scaler=scaler, net_params=net_params, net_config=net_config,
                        svm=model)


def _check_meta(meta: dict, expected_hash: str, what: str) -> None:
    if meta.get("config_hash") != expected_hash:
        raise ModelMismatchError(f"{what} embeds a different config hash; artifacts "
                                 "and config do not belong together")


def featurize(loaded: LoadedModels, dataset: corpus_mod.Dataset) -> np.ndarray:
    """Scaled feature matrix for any dataset using the trained sub-models."""
    task = None
    if "task_embedding" in loaded.config.groups:
        task = neural.extract_task_embeddings(
            dataset, loaded.net_params, loaded.models.vocab, loaded.models.matrix,
            loaded.net_config)
    raw = feat.assemble_matrix(dataset, loaded.models, task)
    return feat.apply_scaler(loaded.scaler, raw)


def predict_dataset(loaded: LoadedModels, dataset: corpus_mod.Dataset):
    """(labels +-1, decision values, network probabilities or zeros)."""
    x = featurize(loaded, dataset)
    values = svm_mod.decision_function(loaded.svm, x)
    labels = np.where(values >= 0.0, 1, -1)
    if "task_embedding" in loaded.config.groups:
        encoded = neural.encode_indices(dataset.articles(), loaded.models.vocab, loaded.net_config)
        probs = neural.predict_proba_encoded(loaded.net_params, encoded, loaded.models.matrix)
    else:
        probs = np.zeros(len(dataset))
    return labels, values, probs
