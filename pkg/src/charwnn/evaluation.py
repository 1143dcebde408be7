"""Exact-match chunk precision/recall/F1 with the CoNLL evaluation script's conventions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence, TextIO

from .corpus_io import CorpusFormatError, LabeledSentence, iob2_decode


def _prf(correct: int, predicted: int, gold: int) -> tuple[float, float, float]:
    # conlleval: a metric with an empty denominator is 0, not undefined
    p = 100.0 * correct / predicted if predicted else 0.0
    r = 100.0 * correct / gold if gold else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


@dataclass(frozen=True)
class TypeScore:
    precision: float
    recall: float
    f1: float
    gold: int
    predicted: int
    correct: int

    @classmethod
    def from_counts(cls, correct: int, predicted: int, gold: int) -> "TypeScore":
        return cls(*_prf(correct, predicted, gold), gold, predicted, correct)


@dataclass(frozen=True)
class EvalReport:
    overall: TypeScore
    per_type: dict[str, TypeScore] = field(default_factory=dict)
    token_accuracy: float = 0.0
    tokens: int = 0

    @property
    def precision(self) -> float:
        return self.overall.precision

    @property
    def recall(self) -> float:
        return self.overall.recall

    @property
    def f1(self) -> float:
        return self.overall.f1


def evaluate(
    gold: Sequence[LabeledSentence | Sequence[str]], predicted: Sequence[Sequence[str]]
) -> EvalReport:
    """Score predicted tag sequences against gold sentences.

    A predicted chunk counts as correct only if its type, first and last token
    all match a gold chunk.
    """
    if len(gold) != len(predicted):
        raise ValueError(f"{len(gold)} gold sentences but {len(predicted)} predicted")
    n_gold, n_pred, n_correct = Counter(), Counter(), Counter()
    tokens = token_hits = 0
    for i, (g, p) in enumerate(zip(gold, predicted)):
        g_tags = list(g.tags) if isinstance(g, LabeledSentence) else list(g)
        p_tags = list(p)
        if len(g_tags) != len(p_tags):
            raise ValueError(
                f"sentence {i}: {len(g_tags)} gold tags but {len(p_tags)} predicted"
            )
        g_spans = set(iob2_decode(g_tags))
        p_spans = set(iob2_decode(p_tags))
        n_gold.update(s.entity_type for s in g_spans)
        n_pred.update(s.entity_type for s in p_spans)
        n_correct.update(s.entity_type for s in g_spans & p_spans)
        tokens += len(g_tags)
        token_hits += sum(a == b for a, b in zip(g_tags, p_tags))
    per_type = {
        t: TypeScore.from_counts(n_correct[t], n_pred[t], n_gold[t])
        for t in sorted(set(n_gold) | set(n_pred))
    }
    overall = TypeScore.from_counts(
        sum(n_correct.values()), sum(n_pred.values()), sum(n_gold.values())
    )
    accuracy = 100.0 * token_hits / tokens if tokens else 0.0
    return EvalReport(overall, per_type, accuracy, tokens)


def read_conlleval(source: TextIO) -> tuple[list[list[str]], list[list[str]]]:
    """Parse conlleval input (``token ... gold predicted``) into gold and predicted tag lists."""
    gold, pred = [], []
    cur_g, cur_p = [], []
    for lineno, line in enumerate(source, 1):
        cols = line.split()
        if not cols or cols[0] == "-DOCSTART-":
            if cur_g:
                gold.append(cur_g)
                pred.append(cur_p)
                cur_g, cur_p = [], []
            continue
        if len(cols) < 3:
            raise CorpusFormatError(f"expected token, gold and predicted columns, got {len(cols)}", lineno)
        cur_g.append(cols[-2])
        cur_p.append(cols[-1])
    if cur_g:
        gold.append(cur_g)
        pred.append(cur_p)
    return gold, pred


def format_conlleval(report: EvalReport) -> str:
    """Render a report the way the conlleval script prints its summary."""
    o = report.overall
    lines = [
        f"processed {report.tokens} tokens with {o.gold} phrases; "
        f"found: {o.predicted} phrases; correct: {o.correct}.",
        f"accuracy: {report.token_accuracy:6.2f}%; precision: {o.precision:6.2f}%; "
        f"recall: {o.recall:6.2f}%; FB1: {o.f1:6.2f}",
    ]
    for t, s in report.per_type.items():
        lines.append(
            f"{t:>17}: precision: {s.precision:6.2f}%; recall: {s.recall:6.2f}%; "
            f"FB1: {s.f1:6.2f}  {s.predicted}"
        )
    return "\n".join(lines) + "\n"


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]

    def fmt(row):
        first = row[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        return " | ".join([first] + rest).rstrip()

    rule = "-+-".join("-" * w for w in widths)
    return "\n".join([fmt(header), rule] + [fmt(r) for r in rows]) + "\n"


def report_table(reports: Mapping[str, EvalReport], per_type: bool = False) -> str:
    """Aligned comparison table, percentages to two decimals.

    Default: one row per system with Prec./Rec./F1. ``per_type``: one row per
    entity type plus ``Overall``, with a Prec./Rec./F1 column group per system.
    """
    if not reports:
        raise ValueError("no reports to tabulate")
    if not per_type:
        rows = [
            [name, f"{r.precision:.2f}", f"{r.recall:.2f}", f"{r.f1:.2f}"]
            for name, r in reports.items()
        ]
        return _table(["System", "Prec.", "Rec.", "F1"], rows)
    names = list(reports)
    types = sorted({t for r in reports.values() for t in r.per_type})
    header = ["Entity"]
    for name in names:
        header += [f"{name} Prec.", "Rec.", "F1"]
    rows = []
    for t in types + ["Overall"]:
        row = [t]
        for name in names:
            r = reports[name]
            s = r.overall if t == "Overall" else r.per_type.get(t, TypeScore.from_counts(0, 0, 0))
            row += [f"{s.precision:.2f}", f"{s.recall:.2f}", f"{s.f1:.2f}"]
        rows.append(row)
    return _table(header, rows)
