"""Character-level word embedding: convolution over character windows + max pooling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass
class CharConvParams:
    char_emb: np.ndarray  # d_chr x |V_chr|
    conv_weights: np.ndarray  # cl_u x (k_chr * d_chr)
    conv_bias: np.ndarray  # cl_u
    window: int
    pad_index: int

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError(f"character window must be odd, got {self.window}")
        d = self.char_emb.shape[0]
        if self.conv_weights.shape != (self.conv_bias.shape[0], d * self.window):
            raise ValueError(
                f"conv weights {self.conv_weights.shape} inconsistent with "
                f"d_chr={d}, k_chr={self.window}, cl_u={self.conv_bias.shape[0]}"
            )

    @property
    def units(self) -> int:
        return self.conv_bias.shape[0]


def padded_ids(params: CharConvParams, char_ids: Sequence[int]) -> np.ndarray:
    half = (params.window - 1) // 2
    pad = [params.pad_index] * half
    return np.asarray(pad + list(char_ids) + pad, dtype=np.intp)


def window_matrix(params: CharConvParams, char_ids: Sequence[int]) -> np.ndarray:
    """``M x (k*d)`` matrix whose row m is the window vector centred on character m."""
    ids = padded_ids(params, char_ids)
    m = len(char_ids)
    cols = ids[np.arange(m)[:, None] + np.arange(params.window)[None, :]]  # M x k
    return params.char_emb[:, cols].transpose(1, 2, 0).reshape(m, -1)


def char_forward(params: CharConvParams, char_ids: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Return the ``cl_u`` embedding and, per unit, the index of the winning window.

    Ties go to the lowest window index.
    """
    if len(char_ids) == 0:
        raise ValueError("cannot embed an empty word")
    z = window_matrix(params, char_ids)
    pre = z @ params.conv_weights.T + params.conv_bias  # M x cl_u
    argmax = pre.argmax(axis=0) if params.units else np.zeros(0, dtype=np.intp)
    out = pre[argmax, np.arange(params.units)]
    return out, argmax


@dataclass
class CharConvGrads:
    conv_weights: np.ndarray
    conv_bias: np.ndarray
    char_ids: np.ndarray  # columns of char_emb touched (may repeat)
    char_cols: np.ndarray  # d_chr x len(char_ids)


def char_backward(
    params: CharConvParams,
    char_ids: Sequence[int],
    upstream: np.ndarray,
    argmax: np.ndarray,
) -> CharConvGrads:
    z = window_matrix(params, char_ids)
    units = np.arange(params.units)
    d_w = upstream[:, None] * z[argmax]
    d_b = upstream.copy()
    # each unit routes its gradient to its winning window only
    d_z = np.zeros_like(z)
    np.add.at(d_z, argmax, upstream[:, None] * params.conv_weights[units])
    d = params.char_emb.shape[0]
    m, k = len(char_ids), params.window
    ids = padded_ids(params, char_ids)
    cols = ids[np.arange(m)[:, None] + np.arange(k)[None, :]].ravel()
    d_cols = d_z.reshape(m * k, d).T
    return CharConvGrads(d_w, d_b, cols, d_cols)
