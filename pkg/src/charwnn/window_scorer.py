"""Window approach scoring: joint word representations -> context window -> tag scores."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .char_conv import char_backward, char_forward
from .model import EncodedSentence, ModelParams


def assemble_window(reprs: np.ndarray, pad: np.ndarray, position: int, window: int) -> np.ndarray:
    """Concatenate the ``window`` representations centred on ``position`` (0-based).

    Rows of ``reprs`` are u_1..u_N; out-of-sentence slots take ``pad``.
    """
    n = len(reprs)
    if not 0 <= position < n:
        raise IndexError(f"position {position} outside sentence of length {n}")
    half = (window - 1) // 2
    parts = [
        reprs[i] if 0 <= i < n else pad for i in range(position - half, position + half + 1)
    ]
    return np.concatenate(parts)


def score_word(hidden_W, hidden_b, out_W, out_b, r: np.ndarray) -> np.ndarray:
    return out_W @ np.tanh(hidden_W @ r + hidden_b) + out_b


@dataclass
class EmissionCache:
    """Activations kept from the forward pass for :func:`emissions_backward`."""

    encoded: EncodedSentence
    windows: np.ndarray  # N x k*D
    hidden: np.ndarray  # N x hl_u, after tanh
    char_argmax: list[np.ndarray] = field(default_factory=list)
    pad_argmax: np.ndarray | None = None


@dataclass
class Gradients:
    """Dense gradients per group, plus sparse column updates for embedding tables.

    ``sparse[name]`` is a list of ``(column_indices, d x n values)`` pairs;
    repeated indices accumulate.
    """

    dense: dict[str, np.ndarray] = field(default_factory=dict)
    sparse: dict[str, list[tuple[np.ndarray, np.ndarray]]] = field(default_factory=dict)

    def add_sparse(self, name: str, ids, cols: np.ndarray):
        ids = np.atleast_1d(np.asarray(ids, dtype=np.intp))
        if cols.ndim == 1:
            cols = cols[:, None]
        self.sparse.setdefault(name, []).append((ids, cols))

    def to_dense(self, model: ModelParams) -> dict[str, np.ndarray]:
        out = {}
        for name in model.group_names:
            if name in self.dense:
                out[name] = self.dense[name].copy()
            else:
                g = np.zeros_like(model.params[name])
                for ids, cols in self.sparse.get(name, []):
                    np.add.at(g, (slice(None), ids), cols)
                out[name] = g
        return out


def _pad_parts(model: ModelParams):
    hp, p = model.hp, model.params
    parts, argmax = [], None
    if hp.uses_words:
        parts.append(p["word_emb"][:, model.word_vocab.pad_index])
    if hp.uses_chars:
        emb, argmax = char_forward(model.char_conv, [model.char_vocab.pad_index])
        parts.append(emb)
    if hp.capitalization:
        parts.append(p["cap_emb"][:, model.cap_vocab.pad_index])
    if hp.suffix:
        parts.append(p["suf_emb"][:, model.suffix_vocab.pad_index])
    return np.concatenate(parts), argmax


def word_representations(model: ModelParams, enc: EncodedSentence):
    """Rows u_n for the sentence, plus the char-conv argmax per word."""
    hp, p = model.hp, model.params
    blocks, argmaxes = [], []
    if hp.uses_words:
        blocks.append(p["word_emb"][:, enc.words].T)
    if hp.uses_chars:
        conv = model.char_conv
        embs = []
        for ids in enc.chars:
            emb, am = char_forward(conv, ids)
            embs.append(emb)
            argmaxes.append(am)
        blocks.append(np.vstack(embs) if embs else np.zeros((0, hp.cl_u)))
    if hp.capitalization:
        blocks.append(p["cap_emb"][:, enc.caps].T)
    if hp.suffix:
        blocks.append(p["suf_emb"][:, enc.suffixes].T)
    return np.hstack(blocks), argmaxes


def sentence_emissions(model: ModelParams, words: Sequence[str] | EncodedSentence):
    """``N x |T|`` emission lattice for a sentence and the cache for backprop."""
    enc = words if isinstance(words, EncodedSentence) else model.encode(words)
    n = len(enc)
    if n == 0:
        raise ValueError("empty sentence")
    hp, p = model.hp, model.params
    reprs, argmaxes = word_representations(model, enc)
    pad, pad_argmax = _pad_parts(model)
    half = (hp.k_wrd - 1) // 2
    padded = np.vstack([np.tile(pad, (half, 1)), reprs, np.tile(pad, (half, 1))])
    idx = np.arange(n)[:, None] + np.arange(hp.k_wrd)[None, :]
    windows = padded[idx].reshape(n, -1)
    hidden = np.tanh(windows @ p["hidden_W"].T + p["hidden_b"])
    scores = hidden @ p["out_W"].T + p["out_b"]
    return scores, EmissionCache(enc, windows, hidden, argmaxes, pad_argmax)


def emissions_backward(model: ModelParams, cache: EmissionCache, d_scores: np.ndarray) -> Gradients:
    """Backpropagate ``d_scores`` (same shape as the lattice) to every parameter group."""
    hp, p = model.hp, model.params
    enc = cache.encoded
    n = len(enc)
    grads = Gradients()
    grads.dense["out_W"] = d_scores.T @ cache.hidden
    grads.dense["out_b"] = d_scores.sum(axis=0)
    d_pre = (d_scores @ p["out_W"]) * (1.0 - cache.hidden**2)
    grads.dense["hidden_W"] = d_pre.T @ cache.windows
    grads.dense["hidden_b"] = d_pre.sum(axis=0)
    d_windows = (d_pre @ p["hidden_W"]).reshape(n, hp.k_wrd, -1)

    half = (hp.k_wrd - 1) // 2
    d_padded = np.zeros((n + 2 * half, hp.word_repr_size))
    for j in range(hp.k_wrd):
        d_padded[j : j + n] += d_windows[:, j]
    d_reprs = d_padded[half : half + n]
    d_pad = d_padded[:half].sum(axis=0) + d_padded[half + n :].sum(axis=0)

    offset = 0
    if hp.uses_words:
        width = hp.d_wrd
        grads.add_sparse("word_emb", enc.words, d_reprs[:, offset : offset + width].T)
        grads.add_sparse("word_emb", model.word_vocab.pad_index, d_pad[offset : offset + width])
        offset += width
    if hp.uses_chars:
        conv = model.char_conv
        width = hp.cl_u
        d_w = np.zeros_like(p["conv_W"])
        d_b = np.zeros_like(p["conv_b"])
        items = list(zip(enc.chars, cache.char_argmax, d_reprs[:, offset : offset + width]))
        items.append(([model.char_vocab.pad_index], cache.pad_argmax, d_pad[offset : offset + width]))
        for ids, argmax, upstream in items:
            g = char_backward(conv, ids, upstream, argmax)
            d_w += g.conv_weights
            d_b += g.conv_bias
            grads.add_sparse("char_emb", g.char_ids, g.char_cols)
        grads.dense["conv_W"] = d_w
        grads.dense["conv_b"] = d_b
        offset += width
    if hp.capitalization:
        width = hp.feature_dim
        grads.add_sparse("cap_emb", enc.caps, d_reprs[:, offset : offset + width].T)
        grads.add_sparse("cap_emb", model.cap_vocab.pad_index, d_pad[offset : offset + width])
        offset += width
    if hp.suffix:
        width = hp.feature_dim
        grads.add_sparse("suf_emb", enc.suffixes, d_reprs[:, offset : offset + width].T)
        grads.add_sparse("suf_emb", model.suffix_vocab.pad_index, d_pad[offset : offset + width])
        offset += width
    return grads
