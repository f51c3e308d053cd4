"""Text-only fake news / click-bait detection pipeline.

Resource building (PMI lexicons, skip-gram embeddings), hand-crafted
stylometric/lexical/grammatical/semantic features, an attention-based GRU
network producing task-specific article embeddings, an RBF-kernel SVM
combiner trained by SMO, and an evaluation/ablation harness — plus a batch
CLI tying the stages together.
"""

from .corpus import (
    Article,
    Dataset,
    Labels,
    class_prior,
    deduplicate_by_title,
    label_agreement,
    load_dataset,
    save_dataset,
    split_train_dev,
)
from .errors import DataError, ModelMismatchError
from .textproc import LanguageProfile, tokenize

__version__ = "0.1.0"

__all__ = [
    "Article",
    "Dataset",
    "Labels",
    "DataError",
    "ModelMismatchError",
    "LanguageProfile",
    "class_prior",
    "deduplicate_by_title",
    "label_agreement",
    "load_dataset",
    "save_dataset",
    "split_train_dev",
    "tokenize",
    "__version__",
]
