"""Command-line interface: preprocess, train, tag, evaluate, gradcheck.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 training divergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .corpus_io import (
    DEFAULT_SUBSTITUTE,
    CorpusFormatError,
    LabeledSentence,
    normalize_word,
    read_conll,
    read_tokens,
    stride_split,
    substitute_non_roman,
)
from .evaluation import evaluate, format_conlleval, read_conlleval, report_table
from .features import load_word2vec_text
from .model import VARIANTS, Hyperparameters, init_model
from .model_io import ModelFormatError, load_model, save_model
from .trainer import DivergenceError, gradient_check, tag_corpus, train

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_DIVERGED = 0, 1, 2, 3

PATH_KEYS = ("train", "dev", "test", "embeddings", "model", "report")
_ALIASES = {"lr": "learning_rate", "epochs": "epochs_max"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _convert(key: str, raw: str):
    default = {f.name: f.default for f in fields(Hyperparameters)}[key]
    if isinstance(default, bool):
        low = raw.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"{key}: expected a boolean, got {raw!r}")
    try:
        if isinstance(default, float):
            return float(raw)
        if key == "variant":
            return raw.strip().lower()
        if raw.strip() in ("-", "none", ""):
            return None
        return int(raw)
    except ValueError:
        raise UsageError(f"{key}: cannot parse {raw!r}") from None


def parse_assignments(items: Sequence[tuple[int | None, str]], source: str) -> dict:
    """``key=value`` pairs -> typed values. Unknown keys are errors."""
    hp_keys = {f.name for f in fields(Hyperparameters)}
    out = {}
    for lineno, item in items:
        where = f"{source}:{lineno}" if lineno is not None else source
        key, sep, value = item.partition("=")
        key = _ALIASES.get(key.strip(), key.strip())
        if not sep:
            raise UsageError(f"{where}: expected key=value, got {item!r}")
        if key in PATH_KEYS:
            out[key] = value.strip()
        elif key in hp_keys:
            out[key] = _convert(key, value)
        else:
            raise UsageError(f"{where}: unknown key {key!r}")
    return out


def read_config(path: str) -> dict:
    items = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            items.append((lineno, line))
    return parse_assignments(items, path)


def resolve_config(args: argparse.Namespace) -> tuple[Hyperparameters, dict]:
    """Merge settings: command-line flag > config file > variant defaults."""
    settings = read_config(args.config) if args.config else {}
    flags = parse_assignments([(None, s) for s in args.hp or []], "--hp")
    direct = {
        "variant": args.variant,
        "seed": args.seed,
        "learning_rate": args.lr,
        "epochs_max": args.epochs,
        "lr_decay": args.lr_decay,
        "freeze_embeddings": True if args.freeze_embeddings else None,
        "decode_mask": True if args.decode_mask else None,
    }
    flags.update({k: v for k, v in direct.items() if v is not None})
    for key in PATH_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            flags[key] = value
    settings.update(flags)
    paths = {k: settings.pop(k) for k in PATH_KEYS if k in settings}
    variant = settings.pop("variant", "charwnn")
    try:
        hp = Hyperparameters.for_variant(variant, **settings)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return hp, paths


def _read_corpus(path: str) -> list[LabeledSentence]:
    with open(path, encoding="utf-8") as fh:
        return read_conll(fh)


def _out(path: str | None):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def cmd_preprocess(args) -> int:
    with open(args.input, encoding="utf-8") as fh:
        corpus = read_conll(fh)
    sink, close = _out(args.output)
    try:
        for i, sent in enumerate(corpus):
            if i:
                sink.write("\n")
            for tok, tag in zip(sent.tokens, sent.tags):
                surface = tok.surface
                if args.non_roman:
                    surface = substitute_non_roman(surface, args.substitute)
                sink.write(f"{surface} {normalize_word(surface)} {tag}\n")
    finally:
        if close:
            sink.close()
    return EXIT_OK


def cmd_train(args) -> int:
    hp, paths = resolve_config(args)
    if "train" not in paths or "model" not in paths:
        raise UsageError("train needs --train and --model (flag or config file)")
    corpus = _read_corpus(paths["train"])
    if "dev" in paths:
        dev = _read_corpus(paths["dev"])
    else:
        corpus, dev = stride_split(corpus, 0.05)
        print(f"# no --dev given: held out {len(dev)} sentences (every 20th) as development set")
    pretrained = None
    if "embeddings" in paths:
        with open(paths["embeddings"], encoding="utf-8") as fh:
            pretrained = load_word2vec_text(fh, np.random.default_rng(hp.seed))
        if hp.uses_words and pretrained.dimension != hp.d_wrd:
            print(f"# d_wrd set to {pretrained.dimension} to match the embeddings file")
            hp = hp.replace(d_wrd=pretrained.dimension)
    for line in ["# hyperparameters"] + hp.header_lines():
        print(line)
    print("# epochs")

    def show(rec):
        d = rec.dev
        print(
            f"epoch {rec.epoch}: loss={rec.loss:.6f} dev P={d.precision:.2f} "
            f"R={d.recall:.2f} F1={d.f1:.2f}",
            flush=True,
        )

    model, report = train(corpus, dev, hp, pretrained, on_epoch=show)
    print(f"best_epoch={report.best_epoch}")
    save_model(model, paths["model"])
    report_path = paths.get("report", paths["model"] + ".report")
    Path(report_path).write_text("\n".join(report.key_values()) + "\n", encoding="utf-8")
    if "test" in paths:
        test = _read_corpus(paths["test"])
        result = evaluate(test, tag_corpus(model, [s.words for s in test]))
        print("# test")
        sys.stdout.write(format_conlleval(result))
    return EXIT_OK


def cmd_tag(args) -> int:
    model = load_model(args.model)
    if args.decode_mask:
        model.hp = model.hp.replace(decode_mask=True)
    with open(args.input, encoding="utf-8") as fh:
        if args.with_gold:
            gold = read_conll(fh)
            sentences = [s.words for s in gold]
        else:
            gold = None
            sentences = read_tokens(fh)
    predicted = tag_corpus(model, sentences)
    sink, close = _out(args.output)
    try:
        for i, (words, tags) in enumerate(zip(sentences, predicted)):
            if i:
                sink.write("\n")
            for j, (w, t) in enumerate(zip(words, tags)):
                if gold is not None:
                    sink.write(f"{w} {gold[i].tags[j]} {t}\n")
                else:
                    sink.write(f"{w} {t}\n")
    finally:
        if close:
            sink.close()
    return EXIT_OK


def cmd_evaluate(args) -> int:
    if args.combined:
        with open(args.combined, encoding="utf-8") as fh:
            gold, predicted = read_conlleval(fh)
    elif args.gold and args.predicted:
        gold_corpus = _read_corpus(args.gold)
        pred_corpus = _read_corpus(args.predicted)
        if len(gold_corpus) != len(pred_corpus):
            raise CorpusFormatError(
                f"{len(gold_corpus)} gold sentences but {len(pred_corpus)} predicted"
            )
        for i, (g, p) in enumerate(zip(gold_corpus, pred_corpus)):
            if g.words != p.words:
                raise CorpusFormatError(f"sentence {i}: tokens differ between gold and predicted")
        gold = gold_corpus
        predicted = [list(p.tags) for p in pred_corpus]
    else:
        raise UsageError("evaluate needs a conlleval file or both --gold and --predicted")
    report = evaluate(gold, predicted)
    sys.stdout.write(format_conlleval(report))
    print()
    sys.stdout.write(report_table({args.name: report}, per_type=True))
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    hp, paths = resolve_config(args)
    if "train" not in paths:
        raise UsageError("gradcheck needs --train")
    corpus = _read_corpus(paths["train"])
    model = init_model(hp, corpus, rng=np.random.default_rng(hp.seed))
    sentence = corpus[args.sentence]
    result = gradient_check(model, sentence, step=args.step)
    for name, err in result.errors.items():
        status = "ok" if err < args.tolerance else "FAIL"
        print(f"{name:12s} rel_err={err:.3e} max_abs={result.max_abs[name]:.3e} {status}")
    return EXIT_OK if result.worst < args.tolerance else EXIT_DATA


def _add_run_options(p: argparse.ArgumentParser):
    p.add_argument("--config", metavar="PATH", help="key=value file (flags override it)")
    p.add_argument("--train", metavar="PATH")
    p.add_argument("--dev", metavar="PATH", help="default: every 20th training sentence")
    p.add_argument("--test", metavar="PATH")
    p.add_argument("--embeddings", metavar="PATH", help="word2vec text-format vectors")
    p.add_argument("--model", metavar="PATH")
    p.add_argument("--report", metavar="PATH", help="key=value report (default MODEL.report)")
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("--seed", type=int)
    p.add_argument("--lr", type=float, help="learning rate (0.0075; 0.005 was used for Spanish CoNLL-2002)")
    p.add_argument("--epochs", type=int, help="maximum epochs (best dev F1 epoch is kept)")
    p.add_argument("--lr-decay", type=float, help="lr / (1 + decay * (epoch - 1)); default 0")
    p.add_argument("--freeze-embeddings", action="store_true", help="do not update word vectors")
    p.add_argument("--decode-mask", action="store_true", help="forbid illegal IOB2 moves when decoding")
    p.add_argument("--hp", action="append", metavar="KEY=VALUE", help="any other hyperparameter, e.g. hl_u=20")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="charwnn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("preprocess", help="add normalized forms to a column corpus")
    p.add_argument("input")
    p.add_argument("-o", "--output", help="default: stdout")
    p.add_argument("--non-roman", action="store_true", help="replace non-Latin letters")
    p.add_argument(
        "--substitute", default=DEFAULT_SUBSTITUTE,
        help=f"replacement for non-Latin letters (default {DEFAULT_SUBSTITUTE!r})",
    )
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("train", help="train a model")
    _add_run_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tag", help="tag a tokenized corpus with a trained model")
    p.add_argument("input")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--output", help="default: stdout")
    p.add_argument("--with-gold", action="store_true", help="input has tags; emit token gold predicted")
    p.add_argument("--decode-mask", action="store_true")
    p.set_defaults(func=cmd_tag)

    p = sub.add_parser("evaluate", help="chunk P/R/F1 as computed by conlleval")
    p.add_argument("combined", nargs="?", help="conlleval file: token ... gold predicted")
    p.add_argument("--gold")
    p.add_argument("--predicted")
    p.add_argument("--name", default="system")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("gradcheck", help="finite-difference check of the backward pass")
    _add_run_options(p)
    p.add_argument("--sentence", type=int, default=0)
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"charwnn: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DivergenceError as exc:
        print(f"charwnn: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except (CorpusFormatError, ModelFormatError, OSError, ValueError) as exc:
        print(f"charwnn: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
