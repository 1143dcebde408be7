"""Rule-generated toy NER corpus for smoke tests and demos.

Entities follow fixed rules: capitalized names after ``mr``/``dr`` are PER
(two-token names get I-PER), a capitalized word after ``in``/``at`` (when not
an organization) is LOC, and ``<Name> Corp``/``<Name> SA`` is ORG.
"""

from __future__ import annotations

import numpy as np

from .corpus_io import LabeledSentence

FIRST = ["Anna", "Bruno", "Carla", "Diego", "Elena", "Felipe", "Gloria", "Hugo", "Ines", "Jorge"]
LAST = ["Garcia", "Lopez", "Martin", "Sanchez", "Romero", "Torres", "Navarro", "Ruiz"]
CITIES = ["Madrid", "Lisboa", "Sevilla", "Porto", "Valencia", "Bilbao", "Toledo", "Braga"]
ORGS = ["Acme", "Globex", "Initech", "Umbrella", "Hooli", "Vandelay"]
ORG_SUFFIX = ["Corp", "SA"]


def _per(rng, full: bool):
    if full:
        return [(FIRST[rng.integers(len(FIRST))], "B-PER"), (LAST[rng.integers(len(LAST))], "I-PER")]
    return [(LAST[rng.integers(len(LAST))], "B-PER")]


def _loc(rng):
    return [(CITIES[rng.integers(len(CITIES))], "B-LOC")]


def _org(rng):
    return [(ORGS[rng.integers(len(ORGS))], "B-ORG"), (ORG_SUFFIX[rng.integers(2)], "I-ORG")]


def _o(*words):
    return [(w, "O") for w in words]


def _sentence(rng) -> list[tuple[str, str]]:
    kind = rng.integers(6)
    title = ["mr", "dr"][rng.integers(2)]
    if kind == 0:
        return _o(title) + _per(rng, True) + _o("visited") + _loc(rng) + _o("today", ".")
    if kind == 1:
        return (_o("the", "report", "from") + _org(rng) + _o("said", title) + _per(rng, False)
                + _o("works", "in") + _loc(rng) + _o("."))
    if kind == 2:
        return _o(title) + _per(rng, True) + _o("met", "mr") + _per(rng, False) + _o("at") + _org(rng) + _o(".")
    if kind == 3:
        return _o("yesterday", "a", "new", "office", "opened", "in") + _loc(rng) + _o(".")
    if kind == 4:
        return _org(rng) + _o("hired", title) + _per(rng, True) + _o("in", str(1990 + rng.integers(30)), ".")
    return _o("nothing", "happened", "at", "the", "office", "on", "monday", ".")


def generate(n: int, seed: int = 0) -> list[LabeledSentence]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        pairs = _sentence(rng)
        out.append(LabeledSentence.from_pairs([w for w, _ in pairs], [t for _, t in pairs]))
    return out
