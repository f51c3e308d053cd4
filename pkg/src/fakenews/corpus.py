"""Labeled article datasets: JSONL loading, dedup by title, splits, label stats.

A :class:`Dataset` is immutable after load; every operation returns a new
dataset, so concurrent readers are safe.  URLs and dates are stored but never
enter any feature path.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field

from .errors import DataError

_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class Article:
    id: int
    url: str
    date: str
    title: str
    content: str


@dataclass(frozen=True)
class Labels:
    is_fake: bool
    is_clickbait: bool


@dataclass(frozen=True)
class Dataset:
    """Order-preserving list of (article, optional labels)."""

    items: tuple[tuple[Article, Labels | None], ...]

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def articles(self) -> list[Article]:
        return [a for a, _ in self.items]

    def labels(self) -> list[Labels | None]:
        return [l for _, l in self.items]

    def require_labels(self) -> list[Labels]:
        out = []
        for art, lab in self.items:
            if lab is None:
                raise DataError(f"article id={art.id} is unlabeled")
            out.append(lab)
        return out

    def fake_labels(self) -> list[bool]:
        return [l.is_fake for l in self.require_labels()]


def load_dataset(path, format: str = "jsonl") -> Dataset:
    """Load a dataset, assigning sequential ids in file order.

    Each line is a JSON object with keys url, date, title, content and
    optional fake_news / click_bait booleans.
    """
    if format != "jsonl":
        raise DataError(f"unknown dataset format {format!r}")
    items = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {lineno}: malformed JSON ({exc.msg})") from exc
            items.append(_parse_record(obj, len(items), path, lineno))
    return Dataset(items=tuple(items))


def _parse_record(obj, next_id: int, path, lineno: int) -> tuple[Article, Labels | None]:
    if not isinstance(obj, dict):
        raise DataError(f"{path}: line {lineno}: expected a JSON object")
    for key in ("title", "content"):
        if key not in obj:
            raise DataError(f"{path}: line {lineno}: missing required field {key!r}")
        if obj[key] is None:
            raise DataError(f"{path}: line {lineno}: field {key!r} is null")
    article = Article(
        id=next_id,
        url=str(obj.get("url", "")),
        date=str(obj.get("date", "")),
        title=str(obj["title"]),
        content=str(obj["content"]),
    )
    labels = None
    if "fake_news" in obj or "click_bait" in obj:
        if "fake_news" not in obj or "click_bait" not in obj:
            raise DataError(
                f"{path}: line {lineno}: both fake_news and click_bait are required when either is present"
            )
        labels = Labels(is_fake=bool(obj["fake_news"]), is_clickbait=bool(obj["click_bait"]))
    return article, labels


def save_dataset(dataset: Dataset, path) -> None:
    """Write JSONL that round-trips bit-exactly through :func:`load_dataset`."""
    with open(path, "w", encoding="utf-8") as fh:
        for art, lab in dataset:
            obj = {"url": art.url, "date": art.date, "title": art.title, "content": art.content}
            if lab is not None:
                obj["fake_news"] = lab.is_fake
                obj["click_bait"] = lab.is_clickbait
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def normalize_title(title: str) -> str:
    """Dedup key: casefold, strip punctuation/symbols, collapse whitespace."""
    out = []
    for ch in title.casefold():
        cat = unicodedata.category(ch)
        if cat.startswith("P") or cat.startswith("S"):
            out.append(" ")
        else:
            out.append(ch)
    return _WS_RE.sub(" ", "".join(out)).strip()


@dataclass(frozen=True)
class DupEntry:
    title: str            # first-seen surface form
    count: int            # total occurrences, reposts included
    fake: int             # labeled fake among them
    non_fake: int
    clickbait: int
    non_clickbait: int
    unlabeled: int


@dataclass(frozen=True)
class DupReport:
    entries: tuple[DupEntry, ...] = field(default_factory=tuple)

    @property
    def max_reposts(self) -> int:
        return max((e.count for e in self.entries), default=0)

    @property
    def duplicated_titles(self) -> int:
        return len(self.entries)


def deduplicate_by_title(dataset: Dataset, normalizer=normalize_title) -> tuple[Dataset, DupReport]:
    """Keep the first occurrence per normalized title; report every repost group."""
    groups: dict[str, list[tuple[Article, Labels | None]]] = {}
    order: list[str] = []
    for art, lab in dataset:
        key = normalizer(art.title)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append((art, lab))

    kept = tuple(groups[key][0] for key in order)
    entries = []
    for key in order:
        members = groups[key]
        if len(members) < 2:
            continue
        fake = sum(1 for _, l in members if l is not None and l.is_fake)
        non_fake = sum(1 for _, l in members if l is not None and not l.is_fake)
        cb = sum(1 for _, l in members if l is not None and l.is_clickbait)
        non_cb = sum(1 for _, l in members if l is not None and not l.is_clickbait)
        unlabeled = sum(1 for _, l in members if l is None)
        entries.append(DupEntry(
            title=members[0][0].title, count=len(members),
            fake=fake, non_fake=non_fake, clickbait=cb, non_clickbait=non_cb,
            unlabeled=unlabeled,
        ))
    return Dataset(items=kept), DupReport(entries=tuple(entries))


def split_train_dev(dataset: Dataset, dev_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Disjoint (train, dev) partition; dev size = round(n * dev_fraction)."""
    if not 0.0 < dev_fraction < 1.0:
        raise ValueError(f"dev_fraction must be in (0, 1), got {dev_fraction}")
    n = len(dataset)
    if n == 0:
        raise DataError("cannot split an empty dataset")
    import numpy as np

    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    dev_size = round(n * dev_fraction)
    dev_idx = set(perm[:dev_size].tolist())
    train_items = tuple(dataset.items[i] for i in range(n) if i not in dev_idx)
    dev_items = tuple(dataset.items[i] for i in range(n) if i in dev_idx)
    return Dataset(items=train_items), Dataset(items=dev_items)


def label_agreement(dataset: Dataset) -> float:
    """Fraction of items where the fake and click-bait labels coincide."""
    labels = dataset.require_labels()
    if not labels:
        raise DataError("label_agreement on an empty dataset")
    agree = sum(1 for l in labels if l.is_fake == l.is_clickbait)
    return agree / len(labels)


def class_prior(dataset: Dataset, label: str = "fake") -> float:
    """Positive fraction for the chosen label ('fake' or 'clickbait')."""
    if label not in ("fake", "clickbait"):
        raise ValueError(f"unknown label {label!r}")
    labels = dataset.require_labels()
    if not labels:
        raise DataError("class_prior on an empty dataset")
    if label == "fake":
        pos = sum(1 for l in labels if l.is_fake)
    else:
        pos = sum(1 for l in labels if l.is_clickbait)
    return pos / len(labels)
