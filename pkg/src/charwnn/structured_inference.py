"""Sentence-level tag path scores, Viterbi decoding and the conditional log-likelihood.

A path t_1..t_N over an ``N x |T|`` emission lattice scores

    start[t_1] + sum_{n>1} transitions[t_{n-1}, t_n] + sum_n emissions[n, t_n]

There is no end-of-sentence transition. All dynamic programs run in log space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import logsumexp


@dataclass
class TransitionParams:
    transitions: np.ndarray  # |T| x |T|, [t, u] scores t -> u
    start: np.ndarray  # |T|

    def __post_init__(self):
        k = self.start.shape[0]
        if self.transitions.shape != (k, k):
            raise ValueError(f"transitions {self.transitions.shape} do not match {k} tags")


def path_score(emissions: np.ndarray, trans: TransitionParams, path: Sequence[int]) -> float:
    n = emissions.shape[0]
    if len(path) != n:
        raise ValueError(f"path of length {len(path)} for {n} words")
    # same summation order as the forward recursion, so a single-tag set gives log p == 0.0
    score = trans.start[path[0]] + emissions[0, path[0]]
    for i in range(1, n):
        score = (score + trans.transitions[path[i - 1], path[i]]) + emissions[i, path[i]]
    return float(score)


def iob2_allowed(tags: Sequence[str]) -> tuple[np.ndarray, np.ndarray]:
    """Boolean (transition, start) masks of IOB2-legal moves: I-X only after B-X or I-X."""
    k = len(tags)
    trans = np.ones((k, k), dtype=bool)
    start = np.ones(k, dtype=bool)
    for u, tag in enumerate(tags):
        if tag.startswith("I-"):
            etype = tag[2:]
            start[u] = False
            for t, prev in enumerate(tags):
                trans[t, u] = prev in (f"B-{etype}", f"I-{etype}")
    return trans, start


def viterbi_decode(
    emissions: np.ndarray,
    trans: TransitionParams,
    allowed: tuple[np.ndarray, np.ndarray] | None = None,
) -> tuple[list[int], float]:
    """Highest-scoring path and its score.

    Among equally scoring paths the lexicographically smallest tag-index
    sequence wins: the DP runs right-to-left over best suffix scores and the
    path is read off left-to-right taking the lowest maximizing index.
    ``allowed`` optionally forbids transitions/starts (see :func:`iob2_allowed`).
    """
    n, k = emissions.shape
    if n == 0:
        raise ValueError("empty lattice")
    A, s0 = trans.transitions, trans.start
    if allowed is not None:
        A = np.where(allowed[0], A, -np.inf)
        s0 = np.where(allowed[1], s0, -np.inf)
    # suffix[i, t]: best score of positions i+1..N-1 given tag t at i
    suffix = np.zeros((n, k))
    for i in range(n - 2, -1, -1):
        suffix[i] = (A + emissions[i + 1] + suffix[i + 1]).max(axis=1)
    path = [int(np.argmax(s0 + emissions[0] + suffix[0]))]
    for i in range(1, n):
        path.append(int(np.argmax(A[path[-1]] + emissions[i] + suffix[i])))
    return path, path_score(emissions, trans, path)


def _forward(emissions: np.ndarray, trans: TransitionParams) -> np.ndarray:
    n, k = emissions.shape
    alpha = np.empty((n, k))
    alpha[0] = trans.start + emissions[0]
    for i in range(1, n):
        alpha[i] = logsumexp(alpha[i - 1][:, None] + trans.transitions, axis=0) + emissions[i]
    return alpha


def _backward(emissions: np.ndarray, trans: TransitionParams) -> np.ndarray:
    n, k = emissions.shape
    beta = np.zeros((n, k))
    for i in range(n - 2, -1, -1):
        beta[i] = logsumexp(trans.transitions + (emissions[i + 1] + beta[i + 1])[None, :], axis=1)
    return beta


def log_partition(emissions: np.ndarray, trans: TransitionParams) -> float:
    """log of the summed exponentiated score of every path (forward recursion)."""
    if emissions.shape[0] == 0:
        raise ValueError("empty lattice")
    return float(logsumexp(_forward(emissions, trans)[-1]))


@dataclass
class LikelihoodResult:
    value: float
    d_emissions: np.ndarray
    d_transitions: np.ndarray
    d_start: np.ndarray


def log_likelihood(
    emissions: np.ndarray, trans: TransitionParams, gold: Sequence[int]
) -> LikelihoodResult:
    """log p(gold | sentence) and its gradients (gold indicators minus marginals)."""
    n, k = emissions.shape
    alpha = _forward(emissions, trans)
    beta = _backward(emissions, trans)
    log_z = float(logsumexp(alpha[-1]))
    value = path_score(emissions, trans, gold) - log_z

    # normalizing per position (rather than by log_z once) keeps each marginal row summing to 1
    joint = alpha + beta
    unary = np.exp(joint - logsumexp(joint, axis=1, keepdims=True))
    d_em = -unary
    d_em[np.arange(n), gold] += 1.0
    d_start = -unary[0]
    d_start[gold[0]] += 1.0
    d_trans = np.zeros((k, k))
    for i in range(1, n):
        pair = alpha[i - 1][:, None] + trans.transitions + (emissions[i] + beta[i])[None, :]
        d_trans -= np.exp(pair - logsumexp(pair))
        d_trans[gold[i - 1], gold[i]] += 1.0
    return LikelihoodResult(value, d_em, d_trans, d_start)
