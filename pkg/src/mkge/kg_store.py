"""Triple files, vocabularies, splits and the filter index."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np

log = logging.getLogger(__name__)

COLUMN_ORDERS = ("hrt", "htr")


class Triple(NamedTuple):
    head: int
    tail: int
    relation: int


class Vocabulary:
    """Dense 0-based index over names, in first-appearance order."""

    def __init__(self, names: Iterable[str] = ()):
        self.names: list[str] = []
        self.index: dict[str, int] = {}
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        idx = self.index.get(name)
        if idx is None:
            idx = len(self.names)
            self.names.append(name)
            self.index[name] = idx
        return idx

    def encode(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise KeyError(f"unknown name {name!r}") from None

    def decode(self, idx: int) -> str:
        return self.names[idx]

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def save(self, path: str | Path) -> None:
        Path(path).write_text("".join(n + "\n" for n in self.names), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        text = Path(path).read_text(encoding="utf-8")
        names = text.split("\n")
        if names and names[-1] == "":
            names.pop()
        vocab = cls(names)
        if len(vocab) != len(names):
            raise ValueError(f"{path}: duplicate names in vocabulary file")
        return vocab


class FilterIndex:
    """Exact set of known-valid triples, keyed by packed (h, t, r) integers.

    Built once; the per-query candidate maps used by the evaluator are
    derived lazily and cached.
    """

    def __init__(self, triples: np.ndarray, num_entities: int, num_relations: int):
        self.num_entities = num_entities
        self.num_relations = num_relations
        triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        self._keys = frozenset(self.pack(triples).tolist())
        self._triples = triples
        self._tails_of: dict[tuple[int, int], np.ndarray] | None = None
        self._heads_of: dict[tuple[int, int], np.ndarray] | None = None

    def pack(self, triples: np.ndarray) -> np.ndarray:
        triples = np.asarray(triples, dtype=np.int64)
        h, t, r = triples[..., 0], triples[..., 1], triples[..., 2]
        return (h * self.num_entities + t) * self.num_relations + r

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, t) -> bool:
        h, tl, r = (int(x) for x in t)
        return ((h * self.num_entities + tl) * self.num_relations + r) in self._keys

    def _build_maps(self) -> None:
        tails: dict[tuple[int, int], set[int]] = {}
        heads: dict[tuple[int, int], set[int]] = {}
        for h, t, r in self._triples.tolist():
            tails.setdefault((h, r), set()).add(t)
            heads.setdefault((t, r), set()).add(h)
        self._tails_of = {k: np.fromiter(sorted(v), dtype=np.int64) for k, v in tails.items()}
        self._heads_of = {k: np.fromiter(sorted(v), dtype=np.int64) for k, v in heads.items()}

    def known_tails(self, head: int, relation: int) -> np.ndarray:
        if self._tails_of is None:
            self._build_maps()
        return self._tails_of.get((head, relation), _EMPTY)

    def known_heads(self, tail: int, relation: int) -> np.ndarray:
        if self._heads_of is None:
            self._build_maps()
        return self._heads_of.get((tail, relation), _EMPTY)


_EMPTY = np.zeros(0, dtype=np.int64)


def contains(filter_index: FilterIndex, t) -> bool:
    return t in filter_index


@dataclass
class KgDataset:
    entities: Vocabulary
    relations: Vocabulary
    train: np.ndarray  # int64 [N, 3] as (head, tail, relation)
    valid: np.ndarray
    test: np.ndarray
    filter_index: FilterIndex = field(repr=False)

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def split(self, name: str) -> np.ndarray:
        if name not in ("train", "valid", "test"):
            raise ValueError(f"unknown split {name!r}; expected train, valid or test")
        return getattr(self, name)

    def save(self, directory: str | Path) -> None:
        """Write vocabularies and integer-encoded splits (tab-separated h, t, r)."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        self.entities.save(directory / "entities.txt")
        self.relations.save(directory / "relations.txt")
        for name in ("train", "valid", "test"):
            rows = self.split(name)
            with open(directory / f"{name}.tsv", "w", encoding="utf-8") as fh:
                for h, t, r in rows.tolist():
                    fh.write(f"{h}\t{t}\t{r}\n")

    @classmethod
    def load(cls, directory: str | Path) -> "KgDataset":
        directory = Path(directory)
        entities = Vocabulary.load(directory / "entities.txt")
        relations = Vocabulary.load(directory / "relations.txt")
        splits = {}
        for name in ("train", "valid", "test"):
            path = directory / f"{name}.tsv"
            rows = np.loadtxt(path, dtype=np.int64, delimiter="\t", ndmin=2) if path.stat().st_size else None
            splits[name] = rows.reshape(-1, 3) if rows is not None else np.zeros((0, 3), dtype=np.int64)
        return from_encoded(entities, relations, **splits)


def from_encoded(entities: Vocabulary, relations: Vocabulary,
                 train, valid=(), test=()) -> KgDataset:
    arrays = [np.asarray(s, dtype=np.int64).reshape(-1, 3) for s in (train, valid, test)]
    for a in arrays:
        if len(a) and (a[:, :2].max() >= len(entities) or a[:, 2].max() >= len(relations) or a.min() < 0):
            raise ValueError("triple index out of range for vocabulary")
    union = np.concatenate(arrays)
    fi = FilterIndex(union, len(entities), len(relations))
    return KgDataset(entities, relations, *arrays, filter_index=fi)


def parse_triples(path: str | Path, column_order: str = "hrt") -> list[tuple[str, str, str]]:
    """Read a tab-separated triple file as (head, relation, tail) strings."""
    column_order = column_order.lower()
    if column_order not in COLUMN_ORDERS:
        raise ValueError(f"column order must be one of {COLUMN_ORDERS}, got {column_order!r}")
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ValueError(f"{path}: expected 3 fields, got {len(fields)} at line {lineno}")
            if column_order == "hrt":
                h, r, t = fields
            else:
                h, t, r = fields
            out.append((h, r, t))
    return out


def build_dataset(train, valid=(), test=()) -> KgDataset:
    """Encode raw (head, relation, tail) string triples.

    Names are indexed in first-appearance order, scanning train, then valid,
    then test. Names that first appear outside train are admitted with a
    warning since their embeddings never receive training signal.
    """
    entities, relations = Vocabulary(), Vocabulary()
    encoded = []
    for split_name, rows in (("train", train), ("valid", valid), ("test", test)):
        n_before = len(entities)
        enc = np.zeros((len(rows), 3), dtype=np.int64)
        for n, (h, r, t) in enumerate(rows):
            enc[n] = (entities.add(h), entities.add(t), relations.add(r))
        if split_name != "train" and len(entities) > n_before:
            log.warning("%d entities first seen in %s split; they will keep untrained embeddings",
                        len(entities) - n_before, split_name)
        encoded.append(enc)
    return from_encoded(entities, relations, *encoded)
