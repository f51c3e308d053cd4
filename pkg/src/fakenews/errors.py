"""Exception types shared across the pipeline."""


class DataError(Exception):
    """Malformed or inconsistent input data (bad JSONL line, missing field,
    unlabeled article where a label is required, empty lexicon file, ...)."""


class ModelMismatchError(Exception):
    """Persisted model artifacts do not fit together (schema hash or config
    hash mismatch, wrong file version, dimension mismatch)."""
