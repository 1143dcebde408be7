"""Per-sentence SGD on the sentence-level negative log-likelihood, with dev-set model selection."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .corpus_io import LabeledSentence
from .evaluation import EvalReport, evaluate
from .features import EmbeddingTable
from .model import Hyperparameters, ModelParams, init_model
from .structured_inference import (
    TransitionParams,
    iob2_allowed,
    log_likelihood,
    log_partition,
    path_score,
    viterbi_decode,
)
from .window_scorer import Gradients, emissions_backward, sentence_emissions

log = logging.getLogger(__name__)


class DivergenceError(RuntimeError):
    def __init__(self, message: str, epoch: int | None = None, sentence: int | None = None):
        where = []
        if epoch is not None:
            where.append(f"epoch {epoch}")
        if sentence is not None:
            where.append(f"sentence {sentence}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.epoch = epoch
        self.sentence = sentence


def transition_params(model: ModelParams) -> TransitionParams:
    return TransitionParams(model.params["transitions"], model.params["start"])


def loss_and_gradients(model: ModelParams, sentence: LabeledSentence) -> tuple[float, Gradients]:
    """Negative log-likelihood of the gold path and the gradient of the *log-likelihood*."""
    scores, cache = sentence_emissions(model, sentence.words)
    gold = [model.tagset.index(t) for t in sentence.tags]
    ll = log_likelihood(scores, transition_params(model), gold)
    grads = emissions_backward(model, cache, ll.d_emissions)
    grads.dense["transitions"] = ll.d_transitions
    grads.dense["start"] = ll.d_start
    return -ll.value, grads


def apply_gradients(model: ModelParams, grads: Gradients, lr: float, freeze: Sequence[str] = ()):
    """Ascend the log-likelihood: p <- p + lr * grad. Embedding tables only touch listed columns."""
    p = model.params
    for name, g in grads.dense.items():
        if name not in freeze:
            p[name] += lr * g
    for name, updates in grads.sparse.items():
        if name in freeze:
            continue
        for ids, cols in updates:
            np.add.at(p[name], (slice(None), ids), lr * cols)


def sgd_step(model: ModelParams, sentence: LabeledSentence, lr: float | None = None) -> float:
    """One in-place SGD update from one sentence; returns the loss before the update."""
    if len(sentence) == 0:
        raise ValueError("empty sentence")
    lr = model.hp.learning_rate if lr is None else lr
    # overflow is reported as a DivergenceError below, not as numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        loss, grads = loss_and_gradients(model, sentence)
        if not math.isfinite(loss):
            raise DivergenceError(f"non-finite loss {loss}")
        freeze = ("word_emb",) if model.hp.freeze_embeddings else ()
        if lr != 0:
            apply_gradients(model, grads, lr, freeze)
    return loss


def tag(model: ModelParams, words: Sequence[str]) -> list[str]:
    if len(words) == 0:
        return []
    scores, _ = sentence_emissions(model, words)
    allowed = iob2_allowed(model.tagset.tags) if model.hp.decode_mask else None
    path, _ = viterbi_decode(scores, transition_params(model), allowed)
    return [model.tagset[i] for i in path]


def tag_corpus(model: ModelParams, sentences: Sequence[Sequence[str]]) -> list[list[str]]:
    return [tag(model, s) for s in sentences]


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    learning_rate: float
    dev: EvalReport
    seconds: float


@dataclass
class TrainingReport:
    hp: Hyperparameters
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0

    def header(self) -> list[str]:
        return self.hp.header_lines()

    def lines(self) -> list[str]:
        out = ["# hyperparameters"] + self.header() + ["# epochs"]
        for e in self.epochs:
            d = e.dev
            out.append(
                f"epoch {e.epoch}: loss={e.loss:.6f} lr={e.learning_rate:g} "
                f"dev P={d.precision:.2f} R={d.recall:.2f} F1={d.f1:.2f} "
                f"acc={d.token_accuracy:.2f} ({e.seconds:.1f}s)"
            )
        out.append(f"best_epoch={self.best_epoch}")
        return out

    def key_values(self) -> list[str]:
        """Machine-readable ``key=value`` lines (no timings, so reruns compare equal)."""
        out = list(self.header())
        for e in self.epochs:
            k = f"epoch.{e.epoch}"
            out += [
                f"{k}.loss={e.loss!r}",
                f"{k}.learning_rate={e.learning_rate!r}",
                f"{k}.dev_precision={e.dev.precision:.2f}",
                f"{k}.dev_recall={e.dev.recall:.2f}",
                f"{k}.dev_f1={e.dev.f1:.2f}",
            ]
        out.append(f"best_epoch={self.best_epoch}")
        return out


def train(
    corpus: Sequence[LabeledSentence],
    dev_corpus: Sequence[LabeledSentence],
    hp: Hyperparameters,
    pretrained: EmbeddingTable | None = None,
    on_epoch: Callable[[EpochRecord], None] | None = None,
) -> tuple[ModelParams, TrainingReport]:
    """Train for up to ``hp.epochs_max`` epochs; return the best-dev-F1 snapshot.

    Ties in dev F1 keep the earlier epoch. With zero epochs the initial
    parameters are returned.
    """
    if not corpus or not dev_corpus:
        raise ValueError("training and development corpora must be non-empty")
    rng = np.random.default_rng(hp.seed)
    model = init_model(hp, corpus, pretrained, rng)
    report = TrainingReport(hp)
    best, best_f1 = model.copy(), -1.0
    order = np.arange(len(corpus))
    for epoch in range(1, hp.epochs_max + 1):
        t0 = time.perf_counter()
        lr = hp.learning_rate / (1.0 + hp.lr_decay * (epoch - 1))
        rng.shuffle(order)
        total = 0.0
        for i in order:
            try:
                total += sgd_step(model, corpus[i], lr)
            except DivergenceError as exc:
                raise DivergenceError("training diverged", epoch, int(i)) from exc
        if not model.all_finite():
            raise DivergenceError("non-finite parameters", epoch)
        dev = evaluate(dev_corpus, tag_corpus(model, [s.words for s in dev_corpus]))
        rec = EpochRecord(epoch, total / len(corpus), lr, dev, time.perf_counter() - t0)
        report.epochs.append(rec)
        log.info("epoch %d loss %.4f dev F1 %.2f", epoch, rec.loss, dev.f1)
        if on_epoch is not None:
            on_epoch(rec)
        if dev.f1 > best_f1:
            best, best_f1, report.best_epoch = model.copy(), dev.f1, epoch
    return best, report


def sentence_nll(model: ModelParams, sentence: LabeledSentence) -> float:
    """Negative log-likelihood only (no backward pass)."""
    scores, _ = sentence_emissions(model, sentence.words)
    trans = transition_params(model)
    gold = [model.tagset.index(t) for t in sentence.tags]
    return log_partition(scores, trans) - path_score(scores, trans, gold)


@dataclass
class GradientCheck:
    errors: dict[str, float]  # relative error per parameter group
    max_abs: dict[str, float]

    @property
    def worst(self) -> float:
        return max(self.errors.values(), default=0.0)


def gradient_check(
    model: ModelParams,
    sentence: LabeledSentence,
    step: float = 1e-5,
    groups: Sequence[str] | None = None,
) -> GradientCheck:
    """Compare backprop gradients of the log-likelihood with central differences.

    Per group the relative error is ||analytic - numeric|| / max(||analytic||, ||numeric||)
    (0 when both vanish). Every entry of every group is perturbed, so keep the
    model small. ``model`` is restored afterwards.
    """
    _, grads = loss_and_gradients(model, sentence)
    analytic = grads.to_dense(model)
    errors, max_abs = {}, {}
    for name in groups or model.group_names:
        param = model.params[name]
        numeric = np.zeros_like(param)
        flat, num_flat = param.reshape(-1), numeric.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + step
            up = -sentence_nll(model, sentence)
            flat[j] = orig - step
            down = -sentence_nll(model, sentence)
            flat[j] = orig
            num_flat[j] = (up - down) / (2 * step)
        a = analytic[name]
        scale = max(np.linalg.norm(a), np.linalg.norm(numeric))
        diff = np.linalg.norm(a - numeric)
        errors[name] = float(diff / scale) if scale > 0 else float(diff)
        max_abs[name] = float(np.abs(a - numeric).max()) if a.size else 0.0
    return GradientCheck(errors, max_abs)
