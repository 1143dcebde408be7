"""Model file: versioned binary with a JSON header and little-endian float64 arrays.

Layout::

    b"CHARWNN\\n"                      magic
    uint32 LE                          header length in bytes
    header                             UTF-8 JSON, sorted keys, no whitespace
    float64 LE arrays                  C order, in header["arrays"] order

The header carries ``format_version``, the hyperparameters, every vocabulary,
the tag set and ``arrays``: a list of ``{"name", "shape"}`` entries.
"""

from __future__ import annotations

import io
import json
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from .corpus_io import TagSet, Vocabulary
from .model import Hyperparameters, ModelParams

MAGIC = b"CHARWNN\n"
FORMAT_VERSION = 1


class ModelFormatError(ValueError):
    pass


def _header(model: ModelParams) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "hyperparameters": model.hp.to_dict(),
        "tags": list(model.tagset.tags),
        "vocabularies": {
            "word": model.word_vocab.to_list() if model.word_vocab is not None else None,
            "char": model.char_vocab.to_list() if model.char_vocab is not None else None,
            "suffix": model.suffix_vocab.to_list() if model.suffix_vocab is not None else None,
        },
        "arrays": [
            {"name": n, "shape": list(model.params[n].shape)} for n in model.group_names
        ],
    }


def write_model(model: ModelParams, sink: BinaryIO):
    header = json.dumps(_header(model), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    raw = header.encode("utf-8")
    sink.write(MAGIC)
    sink.write(struct.pack("<I", len(raw)))
    sink.write(raw)
    for name in model.group_names:
        sink.write(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())


def read_model(source: BinaryIO) -> ModelParams:
    if source.read(len(MAGIC)) != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    size = source.read(4)
    if len(size) != 4:
        raise ModelFormatError("truncated header")
    (n,) = struct.unpack("<I", size)
    try:
        header = json.loads(source.read(n).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt header: {exc}") from None
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version!r}")
    params = {}
    for entry in header["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape))
        buf = source.read(8 * count)
        if len(buf) != 8 * count:
            raise ModelFormatError(f"truncated payload for {entry['name']}")
        params[entry["name"]] = np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shape)
    if source.read(1):
        raise ModelFormatError("trailing bytes after payload")
    vocabs = header["vocabularies"]

    def vocab(key):
        return Vocabulary.from_list(vocabs[key]) if vocabs.get(key) is not None else None

    try:
        return ModelParams(
            Hyperparameters.from_dict(header["hyperparameters"]),
            TagSet.from_list(header["tags"]),
            params,
            vocab("word"),
            vocab("char"),
            vocab("suffix"),
        )
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"inconsistent model file: {exc}") from None


def save_model(model: ModelParams, path: str | Path):
    buf = io.BytesIO()
    write_model(model, buf)
    Path(path).write_bytes(buf.getvalue())


def load_model(path: str | Path) -> ModelParams:
    with open(path, "rb") as fh:
        return read_model(fh)
