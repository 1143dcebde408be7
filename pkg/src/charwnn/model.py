"""Hyperparameters, model variants and the trainable parameter set."""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, fields, replace
from typing import Sequence

import numpy as np

from .char_conv import CharConvParams
from .corpus_io import LabeledSentence, TagSet, Vocabulary, build_vocabularies, normalize_word
from .features import (
    CAPITALIZATION_CLASSES,
    EmbeddingTable,
    HandcraftedFeatureSpec,
    capitalization_class,
    init_uniform,
    suffix_feature,
)

VARIANTS = ("charwnn", "wnn", "charnn")

# per-variant columns of the reference hyperparameter table; None = not applicable
VARIANT_DEFAULTS = {
    "charwnn": dict(d_wrd=100, k_wrd=5, d_chr=10, k_chr=5, cl_u=50, hl_u=300),
    "wnn": dict(d_wrd=100, k_wrd=5, d_chr=None, k_chr=None, cl_u=None, hl_u=300,
                capitalization=True, suffix=True),
    "charnn": dict(d_wrd=None, k_wrd=5, d_chr=50, k_chr=5, cl_u=200, hl_u=300),
}

# parameter groups in model-file order
PARAM_ORDER = (
    "word_emb", "char_emb", "conv_W", "conv_b", "cap_emb", "suf_emb",
    "hidden_W", "hidden_b", "out_W", "out_b", "transitions", "start",
)
EMBEDDING_PARAMS = ("word_emb", "char_emb", "cap_emb", "suf_emb")


@dataclass(frozen=True)
class Hyperparameters:
    variant: str = "charwnn"
    d_wrd: int | None = 100
    k_wrd: int = 5
    d_chr: int | None = 10
    k_chr: int | None = 5
    cl_u: int | None = 50
    hl_u: int = 300
    learning_rate: float = 0.0075
    epochs_max: int = 16
    seed: int = 1
    capitalization: bool = False
    suffix: bool = False
    suffix_length: int = 3
    feature_dim: int = 5
    freeze_embeddings: bool = False
    decode_mask: bool = False
    lr_decay: float = 0.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; choose from {', '.join(VARIANTS)}")
        if self.k_wrd < 1 or self.k_wrd % 2 == 0:
            raise ValueError("k_wrd must be a positive odd integer")
        if self.hl_u < 1:
            raise ValueError("hl_u must be positive")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs_max < 0 or self.lr_decay < 0:
            raise ValueError("epochs_max and lr_decay must be >= 0")
        if self.uses_words and not (self.d_wrd and self.d_wrd > 0):
            raise ValueError(f"{self.variant} needs d_wrd > 0")
        if self.uses_chars:
            if not (self.d_chr and self.d_chr > 0) or self.cl_u is None or self.cl_u < 0:
                raise ValueError(f"{self.variant} needs d_chr > 0 and cl_u >= 0")
            if not self.k_chr or self.k_chr % 2 == 0:
                raise ValueError("k_chr must be a positive odd integer")
        if self.handcrafted.enabled and self.variant != "wnn":
            raise ValueError("capitalization/suffix features are only used by the wnn variant")
        if self.word_repr_size < 1:
            raise ValueError("word representation would be empty")

    @classmethod
    def for_variant(cls, variant: str = "charwnn", **overrides) -> "Hyperparameters":
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
        values = dict(VARIANT_DEFAULTS[variant])
        values.update(overrides)
        return cls(variant=variant, **values)

    @property
    def uses_words(self) -> bool:
        return self.variant != "charnn"

    @property
    def uses_chars(self) -> bool:
        return self.variant != "wnn"

    @property
    def handcrafted(self) -> HandcraftedFeatureSpec:
        return HandcraftedFeatureSpec(
            self.capitalization, self.suffix, self.suffix_length, self.feature_dim
        )

    @property
    def word_repr_size(self) -> int:
        size = 0
        if self.uses_words:
            size += self.d_wrd
        if self.uses_chars:
            size += self.cl_u
        size += self.feature_dim * (int(self.capitalization) + int(self.suffix))
        return size

    def replace(self, **changes) -> "Hyperparameters":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "Hyperparameters":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown hyperparameter(s): {', '.join(sorted(unknown))}")
        return cls(**values)

    def header_lines(self) -> list[str]:
        """``key=value`` lines describing the network; ``-`` for unused sizes."""

        def show(value, used=True):
            return "-" if value is None or not used else str(value)

        lines = [
            f"variant={self.variant}",
            f"d_wrd={show(self.d_wrd, self.uses_words)}",
            f"k_wrd={self.k_wrd}",
            f"d_chr={show(self.d_chr, self.uses_chars)}",
            f"k_chr={show(self.k_chr, self.uses_chars)}",
            f"cl_u={show(self.cl_u, self.uses_chars)}",
            f"hl_u={self.hl_u}",
            f"learning_rate={self.learning_rate!r}",
            f"epochs_max={self.epochs_max}",
            f"seed={self.seed}",
        ]
        if self.capitalization:
            lines.append(
                f"capitalization={len(CAPITALIZATION_CLASSES)}-class dim={self.feature_dim}"
            )
        else:
            lines.append("capitalization=-")
        if self.suffix:
            lines.append(f"suffix=size-{self.suffix_length} dim={self.feature_dim}")
        else:
            lines.append("suffix=-")
        lines += [
            f"freeze_embeddings={str(self.freeze_embeddings).lower()}",
            f"decode_mask={str(self.decode_mask).lower()}",
            f"lr_decay={self.lr_decay!r}",
        ]
        return lines


@dataclass
class EncodedSentence:
    words: np.ndarray
    chars: list[list[int]]
    caps: np.ndarray
    suffixes: np.ndarray

    def __len__(self):
        return len(self.chars)


class ModelParams:
    """All trainable arrays plus the vocabularies they are indexed by.

    ``params`` maps group names (see ``PARAM_ORDER``) to float64 arrays. Arrays
    are updated in place so views handed out (e.g. ``char_conv``) stay live.
    """

    def __init__(
        self,
        hp: Hyperparameters,
        tagset: TagSet,
        params: dict[str, np.ndarray],
        word_vocab: Vocabulary | None = None,
        char_vocab: Vocabulary | None = None,
        suffix_vocab: Vocabulary | None = None,
    ):
        self.hp = hp
        self.tagset = tagset
        self.params = params
        self.word_vocab = word_vocab
        self.char_vocab = char_vocab
        self.cap_vocab = Vocabulary(CAPITALIZATION_CLASSES) if hp.capitalization else None
        self.suffix_vocab = suffix_vocab
        self._check()

    def _check(self):
        hp, p = self.hp, self.params
        expected = {
            "hidden_W": (hp.hl_u, hp.k_wrd * hp.word_repr_size),
            "hidden_b": (hp.hl_u,),
            "out_W": (len(self.tagset), hp.hl_u),
            "out_b": (len(self.tagset),),
            "transitions": (len(self.tagset), len(self.tagset)),
            "start": (len(self.tagset),),
        }
        if hp.uses_words:
            expected["word_emb"] = (hp.d_wrd, len(self.word_vocab))
        if hp.uses_chars:
            expected["char_emb"] = (hp.d_chr, len(self.char_vocab))
            expected["conv_W"] = (hp.cl_u, hp.d_chr * hp.k_chr)
            expected["conv_b"] = (hp.cl_u,)
        if hp.capitalization:
            expected["cap_emb"] = (hp.feature_dim, len(self.cap_vocab))
        if hp.suffix:
            expected["suf_emb"] = (hp.feature_dim, len(self.suffix_vocab))
        if set(expected) != set(p):
            raise ValueError(f"parameter groups {sorted(p)} != expected {sorted(expected)}")
        for name, shape in expected.items():
            if p[name].shape != shape:
                raise ValueError(f"{name} has shape {p[name].shape}, expected {shape}")

    @property
    def group_names(self) -> list[str]:
        return [n for n in PARAM_ORDER if n in self.params]

    @property
    def char_conv(self) -> CharConvParams | None:
        if not self.hp.uses_chars:
            return None
        return CharConvParams(
            self.params["char_emb"], self.params["conv_W"], self.params["conv_b"],
            self.hp.k_chr, self.char_vocab.pad_index,
        )

    def encode(self, words: Sequence[str]) -> EncodedSentence:
        if self.word_vocab is not None:
            w = np.array([self.word_vocab.lookup(normalize_word(x)) for x in words], dtype=np.intp)
        else:
            w = np.zeros(len(words), dtype=np.intp)
        if self.char_vocab is not None:
            c = [[self.char_vocab.lookup(ch) for ch in x] for x in words]
        else:
            c = [[] for _ in words]
        if self.cap_vocab is not None:
            caps = np.array([self.cap_vocab.lookup(capitalization_class(x)) for x in words], dtype=np.intp)
        else:
            caps = np.zeros(len(words), dtype=np.intp)
        if self.suffix_vocab is not None:
            sl = self.hp.suffix_length
            suf = np.array([self.suffix_vocab.lookup(suffix_feature(x, sl)) for x in words], dtype=np.intp)
        else:
            suf = np.zeros(len(words), dtype=np.intp)
        return EncodedSentence(w, c, caps, suf)

    def copy(self) -> "ModelParams":
        clone = copy.copy(self)
        clone.params = {k: v.copy() for k, v in self.params.items()}
        return clone

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.params.values())


def init_model(
    hp: Hyperparameters,
    corpus: Sequence[LabeledSentence],
    pretrained: EmbeddingTable | None = None,
    rng: np.random.Generator | None = None,
) -> ModelParams:
    """Build vocabularies from ``corpus`` and draw initial parameters.

    Every matrix uses U(-r, r) with r = sqrt(6 / (fan_a + fan_b)): for
    embeddings (|V| + d), for layers (inputs + outputs). Biases and
    transition scores start at zero. Pre-trained vectors replace the random
    columns of the words they cover.
    """
    rng = rng if rng is not None else np.random.default_rng(hp.seed)
    if pretrained is not None and not hp.uses_words:
        raise ValueError("pre-trained word vectors given to a model without word embeddings")
    if pretrained is not None and pretrained.dimension != hp.d_wrd:
        raise ValueError(
            f"pre-trained vectors have dimension {pretrained.dimension}, d_wrd is {hp.d_wrd}"
        )
    word_vocab, char_vocab, tagset = build_vocabularies(
        corpus, pretrained.vocabulary if pretrained is not None else None
    )
    params: dict[str, np.ndarray] = {}
    if hp.uses_words:
        params["word_emb"] = init_uniform(len(word_vocab), hp.d_wrd, rng)
        if pretrained is not None:
            n = len(pretrained.vocabulary)
            params["word_emb"][:, :n] = pretrained.matrix
    else:
        word_vocab = None
    if hp.uses_chars:
        params["char_emb"] = init_uniform(len(char_vocab), hp.d_chr, rng)
        fan_in = hp.d_chr * hp.k_chr
        params["conv_W"] = init_uniform(fan_in, hp.cl_u, rng) if hp.cl_u else np.zeros((0, fan_in))
        params["conv_b"] = np.zeros(hp.cl_u)
    else:
        char_vocab = None
    suffix_vocab = None
    if hp.capitalization:
        params["cap_emb"] = init_uniform(len(CAPITALIZATION_CLASSES) + 2, hp.feature_dim, rng)
    if hp.suffix:
        suffix_vocab = Vocabulary(
            sorted({suffix_feature(t.surface, hp.suffix_length) for s in corpus for t in s.tokens})
        )
        params["suf_emb"] = init_uniform(len(suffix_vocab), hp.feature_dim, rng)
    fan_in = hp.k_wrd * hp.word_repr_size
    params["hidden_W"] = init_uniform(fan_in, hp.hl_u, rng)
    params["hidden_b"] = np.zeros(hp.hl_u)
    params["out_W"] = init_uniform(hp.hl_u, len(tagset), rng)
    params["out_b"] = np.zeros(len(tagset))
    params["transitions"] = np.zeros((len(tagset), len(tagset)))
    params["start"] = np.zeros(len(tagset))
    return ModelParams(hp, tagset, params, word_vocab, char_vocab, suffix_vocab)
