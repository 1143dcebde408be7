"""CoNLL column-format corpora, IOB2 chunk coding, word normalization and vocabularies."""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, TextIO

PAD = "<PAD>"
UNK = "<UNK>"

_DIGIT = re.compile(r"\d")


class CorpusFormatError(ValueError):
    """Malformed corpus input. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def normalize_word(surface: str) -> str:
    """Lowercase and map every decimal digit to ``0``."""
    return _DIGIT.sub("0", surface.lower())


DEFAULT_SUBSTITUTE = "#"


def substitute_non_roman(text: str, substitute: str = DEFAULT_SUBSTITUTE) -> str:
    """Replace letters outside the Latin script (Greek, Cyrillic, CJK, ...) by ``substitute``.

    Digits, punctuation and symbols are kept.
    """
    out = []
    for ch in text:
        if ch.isascii() or not unicodedata.category(ch).startswith("L"):
            out.append(ch)
        else:
            out.append(ch if unicodedata.name(ch, "").startswith("LATIN") else substitute)
    return "".join(out)


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str = field(init=False, compare=False)

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"invalid token surface {self.surface!r}")
        object.__setattr__(self, "normalized", normalize_word(self.surface))


@dataclass(frozen=True)
class LabeledSentence:
    tokens: tuple[Token, ...]
    tags: tuple[str, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.tags):
            raise ValueError(f"{len(self.tokens)} tokens but {len(self.tags)} tags")

    @classmethod
    def from_pairs(cls, words: Sequence[str], tags: Sequence[str]) -> "LabeledSentence":
        return cls(tuple(Token(w) for w in words), tuple(tags))

    @property
    def words(self) -> list[str]:
        return [t.surface for t in self.tokens]

    def __len__(self):
        return len(self.tokens)


@dataclass(frozen=True, order=True)
class Span:
    start: int
    end: int
    entity_type: str

    def __post_init__(self):
        if not 0 <= self.start <= self.end:
            raise ValueError(f"invalid span [{self.start}, {self.end}]")


class Vocabulary:
    """Dense string -> index map with reserved padding and unknown entries.

    Absent entries look up to the unknown index.
    """

    def __init__(self, entries: Iterable[str] = (), reserved_first: bool = True):
        self._items: list[str] = []
        self._index: dict[str, int] = {}
        if reserved_first:
            self.add(PAD)
            self.add(UNK)
        for e in entries:
            self.add(e)
        if not reserved_first:
            self.add(PAD)
            self.add(UNK)

    def add(self, entry: str) -> int:
        idx = self._index.get(entry)
        if idx is None:
            idx = len(self._items)
            self._items.append(entry)
            self._index[entry] = idx
        return idx

    @property
    def pad_index(self) -> int:
        return self._index[PAD]

    @property
    def unk_index(self) -> int:
        return self._index[UNK]

    def lookup(self, entry: str) -> int:
        return self._index.get(entry, self._index[UNK])

    def __contains__(self, entry):
        return entry in self._index

    def __getitem__(self, idx: int) -> str:
        return self._items[idx]

    def __len__(self):
        return len(self._items)

    def __iter__(self) -> Iterator[str]:
        return iter(self._items)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self._items == other._items

    def to_list(self) -> list[str]:
        return list(self._items)

    @classmethod
    def from_list(cls, items: Sequence[str]) -> "Vocabulary":
        if PAD not in items or UNK not in items:
            raise ValueError("vocabulary list lacks reserved entries")
        if len(set(items)) != len(items):
            raise ValueError("duplicate vocabulary entries")
        vocab = cls.__new__(cls)
        vocab._items = list(items)
        vocab._index = {e: i for i, e in enumerate(items)}
        return vocab


def _split_tag(tag: str) -> tuple[str, str]:
    if tag == "O":
        return "O", ""
    prefix, sep, etype = tag.partition("-")
    if not sep or prefix not in ("B", "I") or not etype:
        raise ValueError(f"not an IOB2 tag: {tag!r}")
    return prefix, etype


class TagSet:
    """Ordered tag inventory: ``O`` first, then B-X/I-X pairs sorted by type."""

    def __init__(self, tags: Iterable[str]):
        present = set(tags)
        types = set()
        for tag in present:
            prefix, etype = _split_tag(tag)
            if prefix != "O":
                types.add(etype)
        ordered = ["O"]
        for etype in sorted(types):
            # B-X is implied by I-X; I-X only where observed
            ordered.append(f"B-{etype}")
            if f"I-{etype}" in present:
                ordered.append(f"I-{etype}")
        self.tags: tuple[str, ...] = tuple(ordered)
        self._index = {t: i for i, t in enumerate(self.tags)}

    @classmethod
    def from_list(cls, tags: Sequence[str]) -> "TagSet":
        ts = cls.__new__(cls)
        ts.tags = tuple(tags)
        ts._index = {t: i for i, t in enumerate(ts.tags)}
        return ts

    def index(self, tag: str) -> int:
        try:
            return self._index[tag]
        except KeyError:
            raise ValueError(f"tag {tag!r} not in tag set") from None

    def __getitem__(self, idx: int) -> str:
        return self.tags[idx]

    def __contains__(self, tag):
        return tag in self._index

    def __len__(self):
        return len(self.tags)

    def __iter__(self):
        return iter(self.tags)

    def __eq__(self, other):
        return isinstance(other, TagSet) and self.tags == other.tags


def iob2_decode(tags: Sequence[str]) -> list[Span]:
    """Chunks of an IOB2 tag sequence, in order.

    An ``I-X`` that does not continue a chunk of type X opens a new chunk,
    the way conlleval reads it.
    """
    spans = []
    start, current = None, None
    for i, tag in enumerate(tags):
        prefix, etype = _split_tag(tag)
        if current is not None and (prefix != "I" or etype != current):
            spans.append(Span(start, i - 1, current))
            current = None
        if prefix in ("B", "I") and current is None:
            start, current = i, etype
    if current is not None:
        spans.append(Span(start, len(tags) - 1, current))
    return spans


def iob2_encode(spans: Iterable[Span], length: int) -> list[str]:
    tags = ["O"] * length
    for span in sorted(spans):
        if span.end >= length:
            raise ValueError(f"span {span} outside sentence of length {length}")
        if any(t != "O" for t in tags[span.start : span.end + 1]):
            raise ValueError(f"overlapping span {span}")
        tags[span.start] = f"B-{span.entity_type}"
        for i in range(span.start + 1, span.end + 1):
            tags[i] = f"I-{span.entity_type}"
    return tags


def _iter_blocks(source: TextIO, separator: str | None, min_columns: int):
    rows, first_line = [], None
    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            if rows:
                yield first_line, rows
                rows = []
            continue
        cols = line.split(separator)
        if separator is not None:
            cols = [c for c in cols if c != ""]
        if len(cols) < min_columns:
            raise CorpusFormatError(
                f"expected at least {min_columns} columns, got {len(cols)}", lineno
            )
        if not rows:
            first_line = lineno
        rows.append((lineno, cols))
    if rows:
        yield first_line, rows


def read_conll(source: TextIO, column_separator: str | None = " ") -> list[LabeledSentence]:
    """Read ``token tag`` lines; blank lines end sentences.

    Lines with more than two columns use the first as token and the last as tag.
    """
    sentences = []
    for _, rows in _iter_blocks(source, column_separator, 2):
        words, tags = [], []
        for lineno, cols in rows:
            try:
                _split_tag(cols[-1])
                Token(cols[0])
            except ValueError as exc:
                raise CorpusFormatError(str(exc), lineno) from None
            words.append(cols[0])
            tags.append(cols[-1])
        sentences.append(LabeledSentence.from_pairs(words, tags))
    return sentences


def read_tokens(source: TextIO, column_separator: str | None = " ") -> list[list[str]]:
    """Token-only reader for tagging input; extra columns are ignored."""
    return [[cols[0] for _, cols in rows] for _, rows in _iter_blocks(source, column_separator, 1)]


def write_conll(sentences: Iterable[LabeledSentence], sink: TextIO, separator: str = " "):
    first = True
    for sent in sentences:
        if not first:
            sink.write("\n")
        first = False
        for tok, tag in zip(sent.tokens, sent.tags):
            sink.write(f"{tok.surface}{separator}{tag}\n")


def stride_split(sentences: Sequence, fraction: float = 0.05) -> tuple[list, list]:
    """Deterministic (train, dev) split taking every ``round(1/fraction)``-th sentence."""
    if not 0 < fraction < 1:
        raise ValueError("fraction must be in (0, 1)")
    stride = max(2, round(1 / fraction))
    train = [s for i, s in enumerate(sentences) if i % stride != stride - 1]
    dev = [s for i, s in enumerate(sentences) if i % stride == stride - 1]
    return train, dev


def build_vocabularies(
    corpus: Sequence[LabeledSentence], pretrained: Vocabulary | None = None
) -> tuple[Vocabulary, Vocabulary, TagSet]:
    if not corpus:
        raise ValueError("empty corpus")
    if pretrained is not None:
        words = Vocabulary.from_list(pretrained.to_list())
    else:
        words = Vocabulary()
    chars = Vocabulary()
    all_tags = set()
    for sent in corpus:
        for tok in sent.tokens:
            words.add(tok.normalized)
            for c in tok.surface:
                chars.add(c)
        all_tags.update(sent.tags)
    return words, chars, TagSet(all_tags)
