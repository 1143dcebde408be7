"""Embedding tables, their initialization, and the handcrafted WNN features."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from .corpus_io import PAD, UNK, CorpusFormatError, Vocabulary, normalize_word

CAPITALIZATION_CLASSES = ("all_lower", "first_upper", "all_upper", "contains_upper", "other")


def uniform_bound(vocab_size: int, dimension: int) -> float:
    return math.sqrt(6.0 / (vocab_size + dimension))


def init_uniform(vocab_size: int, dimension: int, rng: np.random.Generator) -> np.ndarray:
    """``dimension x vocab_size`` matrix drawn from U(-r, r), r = sqrt(6 / (|V| + d))."""
    if vocab_size < 1 or dimension < 1:
        raise ValueError("vocab_size and dimension must be >= 1")
    r = uniform_bound(vocab_size, dimension)
    return rng.uniform(-r, r, size=(dimension, vocab_size))


@dataclass
class EmbeddingTable:
    """Column ``i`` of ``matrix`` is the vector for ``vocabulary[i]``."""

    vocabulary: Vocabulary
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.ndim != 2 or self.matrix.shape[1] != len(self.vocabulary):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match vocabulary of {len(self.vocabulary)}"
            )

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def random(cls, vocabulary: Vocabulary, dimension: int, rng: np.random.Generator):
        return cls(vocabulary, init_uniform(len(vocabulary), dimension, rng))

    def index(self, entry: str) -> int:
        return self.vocabulary.lookup(entry)

    def __getitem__(self, entry: str) -> np.ndarray:
        return self.matrix[:, self.vocabulary.lookup(entry)]


def load_word2vec_text(source: TextIO, rng: np.random.Generator | None = None) -> EmbeddingTable:
    """Read the word2vec text format.

    PADDING and UNKNOWN columns are appended after the file's entries and drawn
    with :func:`init_uniform`.
    """
    header = source.readline().split()
    if len(header) != 2:
        raise CorpusFormatError("header must be 'count dim'", 1)
    try:
        count, dim = int(header[0]), int(header[1])
    except ValueError:
        raise CorpusFormatError("header must be 'count dim'", 1) from None
    words, rows = [], []
    seen = set()
    for lineno, line in enumerate(source, 2):
        parts = line.rstrip("\r\n").split(" ")
        parts = [p for p in parts if p]
        if not parts:
            continue
        word, values = parts[0], parts[1:]
        if len(values) != dim:
            raise CorpusFormatError(f"expected {dim} values, got {len(values)}", lineno)
        if word in seen or word in (PAD, UNK):
            raise CorpusFormatError(f"duplicate word {word!r}", lineno)
        seen.add(word)
        words.append(word)
        rows.append([float(v) for v in values])
    if len(words) != count:
        raise CorpusFormatError(f"header announces {count} words, file has {len(words)}")
    vocab = Vocabulary(words, reserved_first=False)
    matrix = np.empty((dim, len(vocab)))
    if words:
        matrix[:, :count] = np.asarray(rows).T
    rng = rng if rng is not None else np.random.default_rng(0)
    r = uniform_bound(len(vocab), dim)
    matrix[:, count:] = rng.uniform(-r, r, size=(dim, len(vocab) - count))
    return EmbeddingTable(vocab, matrix)


def save_word2vec_text(table: EmbeddingTable, sink: TextIO):
    """Write the non-reserved entries in word2vec text format (exact float repr)."""
    entries = [(i, w) for i, w in enumerate(table.vocabulary) if w not in (PAD, UNK)]
    sink.write(f"{len(entries)} {table.dimension}\n")
    for i, w in entries:
        sink.write(w + " " + " ".join(repr(float(v)) for v in table.matrix[:, i]) + "\n")


def capitalization_class(surface: str) -> str:
    # order matters: "A" is all_upper, "McDonald" is contains_upper
    if not surface:
        raise ValueError("empty word")
    if surface.islower():
        return "all_lower"
    if surface.isupper():
        return "all_upper"
    if surface[0].isupper() and not any(c.isupper() for c in surface[1:]):
        return "first_upper"
    if any(c.isupper() for c in surface):
        return "contains_upper"
    return "other"


def suffix_feature(surface: str, length: int = 3) -> str:
    if not surface:
        raise ValueError("empty word")
    return normalize_word(surface)[-length:]


@dataclass(frozen=True)
class HandcraftedFeatureSpec:
    capitalization: bool = False
    suffix: bool = False
    suffix_length: int = 3
    dimension: int = 5

    def __post_init__(self):
        if self.suffix_length < 1 or self.dimension < 1:
            raise ValueError("feature dimensions must be positive")

    @property
    def enabled(self) -> bool:
        return self.capitalization or self.suffix
