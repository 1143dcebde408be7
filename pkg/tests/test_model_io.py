import io
import json
import struct

import numpy as np
import pytest

from charwnn.model_io import FORMAT_VERSION, MAGIC, ModelFormatError, load_model, read_model, save_model, write_model
from charwnn.trainer import tag_corpus
from charwnn.synthetic import generate
from conftest import TINY_CORPUS, small_model


def dump(model):
    buf = io.BytesIO()
    write_model(model, buf)
    return buf.getvalue()


@pytest.mark.parametrize("variant", ["charwnn", "wnn", "charnn"])
def test_round_trip_is_exact(variant, tmp_path):
    model = small_model(variant, seed=2)
    path = tmp_path / "m.bin"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.hp == model.hp
    assert loaded.tagset.tags == model.tagset.tags
    assert loaded.group_names == model.group_names
    for name in model.group_names:
        assert np.array_equal(loaded.params[name], model.params[name])
    sents = [s.words for s in generate(30, seed=4)] + [s.words for s in TINY_CORPUS]
    assert tag_corpus(loaded, sents) == tag_corpus(model, sents)
    assert dump(loaded) == dump(model)


def test_layout():
    model = small_model()
    raw = dump(model)
    assert raw.startswith(MAGIC)
    (n,) = struct.unpack("<I", raw[len(MAGIC) : len(MAGIC) + 4])
    header = json.loads(raw[len(MAGIC) + 4 : len(MAGIC) + 4 + n])
    assert header["format_version"] == FORMAT_VERSION
    sizes = [int(np.prod(a["shape"])) for a in header["arrays"]]
    assert len(raw) == len(MAGIC) + 4 + n + 8 * sum(sizes)
    first = header["arrays"][0]
    payload = np.frombuffer(raw[len(MAGIC) + 4 + n :][: 8 * sizes[0]], dtype="<f8")
    np.testing.assert_array_equal(payload.reshape(first["shape"]), model.params[first["name"]])


def _with_header(raw, edit):
    (n,) = struct.unpack("<I", raw[len(MAGIC) : len(MAGIC) + 4])
    header = json.loads(raw[len(MAGIC) + 4 : len(MAGIC) + 4 + n])
    edit(header)
    new = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    return MAGIC + struct.pack("<I", len(new)) + new + raw[len(MAGIC) + 4 + n :]


def test_unknown_version_rejected():
    raw = _with_header(dump(small_model()), lambda h: h.update(format_version=99))
    with pytest.raises(ModelFormatError, match="version"):
        read_model(io.BytesIO(raw))


def test_bad_magic():
    with pytest.raises(ModelFormatError, match="magic"):
        read_model(io.BytesIO(b"NOTAMODEL" + b"\0" * 20))


def test_truncated_payload():
    raw = dump(small_model())
    with pytest.raises(ModelFormatError, match="truncated"):
        read_model(io.BytesIO(raw[:-8]))


def test_trailing_bytes():
    with pytest.raises(ModelFormatError, match="trailing"):
        read_model(io.BytesIO(dump(small_model()) + b"\0"))


def test_shape_mismatch_detected():
    def shrink(h):
        h["arrays"][-1]["shape"] = [1]

    raw = _with_header(dump(small_model()), shrink)
    with pytest.raises(ModelFormatError):
        read_model(io.BytesIO(raw))
