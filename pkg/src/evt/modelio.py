"""Binary model container.

Layout (all integers little-endian):

    8 bytes   magic b"EVTMODEL"
    u32       format version (1)
    u32, ...  length-prefixed UTF-8 JSON header: config, labels, char vocab,
              vectors path and header flag (keys sorted, compact separators)
    u32       number of tensors, then per tensor:
                u16 name length, name (UTF-8), u32 ndim, ndim x u64 shape,
                prod(shape) float64 values in row-major order

The word vectors themselves are not stored; they are reloaded from the
recorded path so training and tagging always use the same table.
"""
from __future__ import annotations

import io
import json
import struct
from pathlib import Path

import numpy as np

from .embeddings import CharVocab, EmbeddingTable, load_vectors
from .network import NetworkConfig, TaggerModel

MAGIC = b"EVTMODEL"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def dump_model(model: TaggerModel, stream, vectors_has_header: bool = False) -> None:
    header = {
        "config": model.config.to_dict(),
        "labels": list(model.labels),
        "chars": list(model.char_vocab.chars),
        "vectors_path": model.vectors_path,
        "vectors_has_header": vectors_has_header,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode()
    stream.write(MAGIC)
    stream.write(struct.pack("<II", VERSION, len(blob)))
    stream.write(blob)
    stream.write(struct.pack("<I", len(model.params)))
    for name, arr in model.params.items():
        raw = name.encode()
        stream.write(struct.pack("<H", len(raw)) + raw)
        stream.write(struct.pack("<I", arr.ndim))
        stream.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        stream.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read(stream, n: int) -> bytes:
    data = stream.read(n)
    if len(data) != n:
        raise ModelFormatError("truncated model file")
    return data


def read_model_parts(stream):
    """Header dict and ordered ``{name: array}`` from a model stream."""
    if _read(stream, len(MAGIC)) != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    version, n = struct.unpack("<II", _read(stream, 8))
    if version != VERSION:
        raise ModelFormatError(f"unsupported model format version {version}")
    header = json.loads(_read(stream, n).decode())
    (n_tensors,) = struct.unpack("<I", _read(stream, 4))
    params = {}
    for _ in range(n_tensors):
        (k,) = struct.unpack("<H", _read(stream, 2))
        name = _read(stream, k).decode()
        (ndim,) = struct.unpack("<I", _read(stream, 4))
        shape = struct.unpack(f"<{ndim}Q", _read(stream, 8 * ndim))
        count = int(np.prod(shape, dtype=np.int64))
        arr = np.frombuffer(_read(stream, 8 * count), dtype="<f8").astype(np.float64)
        params[name] = arr.reshape(shape)
    if stream.read(1):
        raise ModelFormatError("trailing bytes after last tensor")
    return header, params


def load_model(stream, embeddings: EmbeddingTable | None = None) -> TaggerModel:
    """Rebuild a model; without ``embeddings`` the recorded vectors file is loaded."""
    header, params = read_model_parts(stream)
    config = NetworkConfig(**header["config"])
    if embeddings is None:
        path = header["vectors_path"]
        if not path:
            raise ModelFormatError("model records no vectors path; pass embeddings explicitly")
        embeddings = load_vectors(path, header.get("vectors_has_header"))
    if embeddings.dim != config.word_dim:
        raise ModelFormatError(
            f"vectors have dim {embeddings.dim} but the model expects {config.word_dim}")
    try:
        return TaggerModel(config, params, CharVocab(tuple(header["chars"])), embeddings,
                           tuple(header["labels"]), header["vectors_path"])
    except ValueError as err:
        raise ModelFormatError(str(err)) from None


def save_model(model: TaggerModel, path, vectors_has_header: bool = False) -> None:
    buf = io.BytesIO()
    dump_model(model, buf, vectors_has_header)
    Path(path).write_bytes(buf.getvalue())


def model_bytes(model: TaggerModel, vectors_has_header: bool = False) -> bytes:
    buf = io.BytesIO()
    dump_model(model, buf, vectors_has_header)
    return buf.getvalue()


def open_model(path, embeddings: EmbeddingTable | None = None) -> TaggerModel:
    with open(path, "rb") as fh:
        return load_model(fh, embeddings)
