"""Pre-trained word vectors, character vocabularies and OOV statistics."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from .corpus import Corpus

log = logging.getLogger(__name__)

UNK_SEED = 13
UNK_RANGE = 0.25
_DIGIT = re.compile(r"\d")


class VectorFormatError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


def unk_vector(dim: int) -> np.ndarray:
    """Fixed vector for unknown words: uniform on [-0.25, 0.25]^dim, seed 13."""
    return np.random.default_rng(UNK_SEED).uniform(-UNK_RANGE, UNK_RANGE, size=dim)


@dataclass(frozen=True)
class EmbeddingTable:
    dim: int
    entries: dict[str, np.ndarray]
    unk_vector: np.ndarray
    duplicates: int = 0

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if self.unk_vector.shape != (self.dim,):
            raise ValueError("unk_vector has the wrong length")
        for word, vec in self.entries.items():
            if vec.shape != (self.dim,):
                raise ValueError(f"vector for {word!r} has the wrong length")

    @classmethod
    def from_dict(cls, vectors: dict[str, np.ndarray]) -> "EmbeddingTable":
        vectors = {w: np.asarray(v, dtype=np.float64) for w, v in vectors.items()}
        dim = len(next(iter(vectors.values())))
        return cls(dim, vectors, unk_vector(dim))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word in self.entries


def _candidates(token: str):
    yield token
    lower = token.lower()
    yield lower
    yield _DIGIT.sub("0", lower)


def find_key(table: EmbeddingTable, token: str) -> str | None:
    """First key matched by the exact -> lowercase -> digits-as-zero chain."""
    for key in _candidates(token):
        if key in table.entries:
            return key
    return None


def lookup(table: EmbeddingTable, token: str) -> np.ndarray:
    key = find_key(table, token)
    return table.unk_vector if key is None else table.entries[key]


def load_text_vectors(stream: IO[str], has_header: bool = False) -> EmbeddingTable:
    """Read ``word v1 ... vd`` lines, optionally preceded by ``vocab_size dim``.

    Lines whose first field contains spaces cannot exist in this format, so
    multi-word keys (phrase vectors) come through as joined tokens like
    ``New_York`` and are looked up like any other word.
    """
    header_dim = None
    dim = None
    entries: dict[str, np.ndarray] = {}
    duplicates = 0
    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip()
        if line_no == 1 and has_header:
            parts = line.split()
            if len(parts) != 2:
                raise VectorFormatError("header must be 'vocab_size dim'", line_no)
            try:
                header_dim = int(parts[1])
            except ValueError:
                raise VectorFormatError("header must be 'vocab_size dim'", line_no) from None
            continue
        if not line:
            continue
        parts = line.split(" ")
        word, values = parts[0], parts[1:]
        if dim is None:
            dim = len(values)
            if dim == 0:
                raise VectorFormatError("line has no vector values", line_no)
            if header_dim is not None and header_dim != dim:
                raise VectorFormatError(f"header says dim {header_dim}, data has {dim}", line_no)
        elif len(values) != dim:
            raise VectorFormatError(f"expected {dim} values, got {len(values)}", line_no)
        if word in entries:
            duplicates += 1
            continue
        try:
            entries[word] = np.array(values, dtype=np.float64)
        except ValueError:
            raise VectorFormatError("non-numeric vector value", line_no) from None
    if dim is None:
        raise VectorFormatError("no vectors found")
    if duplicates:
        log.warning("%d duplicate words ignored (first occurrence kept)", duplicates)
    return EmbeddingTable(dim, entries, unk_vector(dim), duplicates)


def sniff_header(path) -> bool:
    """Guess whether a vector file starts with a ``vocab_size dim`` line."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().split()
        second = fh.readline().split()
    if len(first) != 2 or not all(p.isdigit() for p in first):
        return False
    return len(second) != 2


def load_vectors(path, has_header: bool | None = None) -> EmbeddingTable:
    if has_header is None:
        has_header = sniff_header(path)
    with open(path, encoding="utf-8") as fh:
        return load_text_vectors(fh, has_header)


def write_text_vectors(vectors: dict[str, np.ndarray], stream: IO[str]) -> None:
    for word, vec in vectors.items():
        stream.write(word + " " + " ".join(repr(float(x)) for x in vec) + "\n")


@dataclass
class OovReport:
    token_oov_rate: float
    type_oov_rate: float
    n_tokens: int
    n_types: int
    oov_tokens: int = 0
    oov_types: int = 0


def oov_rate(corpus: Corpus, table: EmbeddingTable) -> OovReport:
    """Percentage of tokens and lowercased types with no match in the table."""
    n_tokens = oov_tokens = 0
    type_oov: dict[str, bool] = {}
    for sentence in corpus:
        for token in sentence.surfaces:
            missing = find_key(table, token) is None
            n_tokens += 1
            oov_tokens += missing
            # a type is OOV only if none of its surface variants matched
            key = token.lower()
            type_oov[key] = type_oov.get(key, True) and missing
    n_types = len(type_oov)
    oov_types = sum(type_oov.values())
    return OovReport(
        token_oov_rate=100.0 * oov_tokens / n_tokens if n_tokens else 0.0,
        type_oov_rate=100.0 * oov_types / n_types if n_types else 0.0,
        n_tokens=n_tokens,
        n_types=n_types,
        oov_tokens=oov_tokens,
        oov_types=oov_types,
    )


PAD = "<pad>"
UNK = "<unk>"


@dataclass(frozen=True)
class CharVocab:
    chars: tuple[str, ...] = field(default=(PAD, UNK))

    def __post_init__(self):
        if self.chars[:2] != (PAD, UNK) or len(set(self.chars)) != len(self.chars):
            raise ValueError("char vocab must start with PAD, UNK and have no duplicates")
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(self.chars)})

    def __len__(self) -> int:
        return len(self.chars)

    def index(self, char: str) -> int:
        return self._index.get(char, 1)

    def encode(self, word: str) -> list[int]:
        return [self.index(c) for c in word]


def build_char_vocab(corpus: Corpus) -> CharVocab:
    chars = {c for sentence in corpus for w in sentence.surfaces for c in w}
    return CharVocab((PAD, UNK) + tuple(sorted(chars)))
