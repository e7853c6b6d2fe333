import io

import numpy as np
import pytest

from evt.embeddings import EmbeddingTable, write_text_vectors
from evt.modelio import MAGIC, ModelFormatError, load_model, model_bytes, open_model, save_model
from evt.network import emissions
from evt.training import TINY_CONFIG, tiny_problem


def test_round_trip_bit_exact(marco):
    model, _, _ = tiny_problem(TINY_CONFIG, 0)
    blob = model_bytes(model)
    back = load_model(io.BytesIO(blob), model.embeddings)
    assert list(back.params) == list(model.params)
    for k, v in model.params.items():
        assert back.params[k].tobytes() == v.tobytes()
    assert back.labels == model.labels and back.char_vocab == model.char_vocab
    assert back.config == model.config
    assert model_bytes(back) == blob


def test_round_trip_via_recorded_vectors(tmp_path):
    model, batch, _ = tiny_problem(TINY_CONFIG, 1)
    vec = tmp_path / "v.txt"
    with open(vec, "w") as fh:
        write_text_vectors({k: v for k, v in model.embeddings.entries.items()}, fh)
    model.vectors_path = str(vec)
    save_model(model, tmp_path / "m.bin")
    back = open_model(tmp_path / "m.bin")
    np.testing.assert_array_equal(emissions(batch[0], back), emissions(batch[0], model))


def test_bad_magic():
    with pytest.raises(ModelFormatError, match="magic"):
        load_model(io.BytesIO(b"NOTMODEL" + b"\0" * 20))


def test_truncated():
    model, _, _ = tiny_problem(TINY_CONFIG, 0)
    blob = model_bytes(model)
    assert blob.startswith(MAGIC)
    with pytest.raises(ModelFormatError):
        load_model(io.BytesIO(blob[:-3]), model.embeddings)
    with pytest.raises(ModelFormatError):
        load_model(io.BytesIO(blob + b"x"), model.embeddings)


def test_dimension_mismatch():
    model, _, _ = tiny_problem(TINY_CONFIG, 0)
    wrong = EmbeddingTable.from_dict({"a": np.zeros(TINY_CONFIG.word_dim + 1)})
    with pytest.raises(ModelFormatError, match="dim"):
        load_model(io.BytesIO(model_bytes(model)), wrong)


def test_missing_vectors_path():
    model, _, _ = tiny_problem(TINY_CONFIG, 0)
    model.vectors_path = ""
    with pytest.raises(ModelFormatError):
        load_model(io.BytesIO(model_bytes(model)))
