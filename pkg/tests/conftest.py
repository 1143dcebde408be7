import itertools
import sys

import numpy as np
import pytest

from charwnn.corpus_io import LabeledSentence
from charwnn.model import Hyperparameters, init_model
from charwnn.structured_inference import TransitionParams, path_score


def enumerate_paths(emissions, trans):
    """(path, score) for every tag path, in lexicographic order."""
    n, k = emissions.shape
    return [(list(p), path_score(emissions, trans, p)) for p in itertools.product(range(k), repeat=n)]


def brute_best(emissions, trans):
    best_path, best = None, -np.inf
    for path, score in enumerate_paths(emissions, trans):
        if score > best:  # strict: first (lexicographically smallest) maximizer wins
            best_path, best = path, score
    return best_path, best


def brute_log_partition(emissions, trans):
    scores = np.array([s for _, s in enumerate_paths(emissions, trans)])
    m = scores.max()
    return float(m + np.log(np.exp(scores - m).sum()))


def random_instance(rng, n, k, scale=2.0):
    return (
        rng.normal(scale=scale, size=(n, k)),
        TransitionParams(rng.normal(scale=scale, size=(k, k)), rng.normal(scale=scale, size=k)),
    )


TINY_CORPUS = [
    LabeledSentence.from_pairs(["Wolff", ",", "a", "journalist", "in", "Argentina"],
                               ["B-PER", "O", "O", "O", "O", "B-LOC"]),
    LabeledSentence.from_pairs(["Del", "Bosque", "played", "in", "Real", "Madrid"],
                               ["B-PER", "I-PER", "O", "O", "B-ORG", "I-ORG"]),
    LabeledSentence.from_pairs(["In", "1984", "Bennett", "moved"], ["O", "O", "B-PER", "O"]),
]


def randomized(model, seed=0, scale=0.5):
    """Overwrite every parameter (biases and transitions included) with random values."""
    rng = np.random.default_rng(seed)
    for arr in model.params.values():
        arr[...] = rng.normal(scale=scale, size=arr.shape)
    return model


def small_model(variant="charwnn", seed=0, corpus=TINY_CORPUS, **overrides):
    dims = dict(k_wrd=3, hl_u=6)
    if variant != "charnn":
        dims["d_wrd"] = 4
    if variant != "wnn":
        dims.update(d_chr=3, k_chr=3, cl_u=4)
    else:
        dims.update(feature_dim=2)
    dims.update(overrides)
    hp = Hyperparameters.for_variant(variant, seed=seed, **dims)
    return randomized(init_model(hp, corpus, rng=np.random.default_rng(seed)), seed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is not None and acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acceptance.RESULTS:
            terminalreporter.write_line(line)
