"""Event-annotated sentences, the BIO label scheme and the column file format.

Column files hold one token per line as ``surface<TAB>pos<TAB>label`` with a
blank line after each sentence. ``pos`` is ``_`` when unknown.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np


class EventClass(str, enum.Enum):
    OCCURRENCE = "OCCURRENCE"
    ASPECTUAL = "ASPECTUAL"
    I_STATE = "I_STATE"
    I_ACTION = "I_ACTION"
    PERCEPTION = "PERCEPTION"
    REPORTING = "REPORTING"
    STATE = "STATE"

    def __str__(self) -> str:
        return self.value


EVENT_CLASSES: tuple[EventClass, ...] = tuple(EventClass)
NO_POS = "_"


class InvalidAnnotationError(ValueError):
    """Spans that overlap or fall outside their sentence."""


class ColumnFormatError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Token:
    surface: str
    pos: str | None = None

    def __post_init__(self):
        if not self.surface:
            raise ValueError("token surface must be non-empty")


@dataclass(frozen=True, order=True)
class EventSpan:
    """Inclusive token range ``[start, end]`` carrying one event class."""

    start: int
    end: int
    event_class: EventClass

    def __post_init__(self):
        if not isinstance(self.event_class, EventClass):
            object.__setattr__(self, "event_class", EventClass(self.event_class))

    @property
    def length(self) -> int:
        return self.end - self.start + 1

    def overlaps(self, other: "EventSpan") -> bool:
        return self.start <= other.end and other.start <= self.end


@dataclass(frozen=True)
class Sentence:
    tokens: tuple[Token, ...]
    events: tuple[EventSpan, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(
            self, "events", tuple(sorted(self.events, key=lambda s: (s.start, s.end)))
        )

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def surfaces(self) -> tuple[str, ...]:
        return tuple(t.surface for t in self.tokens)

    @classmethod
    def from_words(cls, words: Iterable[str], events: Iterable[EventSpan] = ()) -> "Sentence":
        return cls(tuple(Token(w) for w in words), tuple(events))


@dataclass(frozen=True)
class Corpus:
    sentences: tuple[Sentence, ...] = ()
    split_name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "sentences", tuple(self.sentences))

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    @property
    def n_events(self) -> int:
        return sum(len(s.events) for s in self.sentences)


_ALPHABET: tuple[str, ...] = ("O",) + tuple(
    f"{prefix}-{cls.value}" for cls in EVENT_CLASSES for prefix in ("B", "I")
)
LABEL_INDEX: dict[str, int] = {label: i for i, label in enumerate(_ALPHABET)}


def label_alphabet() -> list[str]:
    """The 15 tags: ``O`` then ``B-x``, ``I-x`` for each class in canonical order.

    A label's integer id is its position in this list.
    """
    return list(_ALPHABET)


def check_spans(n_tokens: int, spans: Sequence[EventSpan]) -> None:
    previous = None
    for span in sorted(spans, key=lambda s: (s.start, s.end)):
        if not 0 <= span.start <= span.end < n_tokens:
            raise InvalidAnnotationError(
                f"span [{span.start},{span.end}] outside sentence of length {n_tokens}"
            )
        if previous is not None and previous.overlaps(span):
            raise InvalidAnnotationError(
                f"spans [{previous.start},{previous.end}] and [{span.start},{span.end}] overlap"
            )
        previous = span


def encode_bio(sentence: Sentence) -> list[str]:
    check_spans(len(sentence), sentence.events)
    tags = ["O"] * len(sentence)
    for span in sentence.events:
        tags[span.start] = f"B-{span.event_class.value}"
        for i in range(span.start + 1, span.end + 1):
            tags[i] = f"I-{span.event_class.value}"
    return tags


def decode_bio(tags: Sequence[str]) -> list[EventSpan]:
    """Recover spans from a tag sequence.

    Decoding is total: an ``I-x`` that does not continue a run of class ``x``
    opens a new span, exactly as if it were ``B-x``.
    """
    spans = []
    start = None
    current = None
    for i, tag in enumerate(tags):
        if tag not in LABEL_INDEX:
            raise ValueError(f"unknown label {tag!r}")
        if tag == "O":
            prefix, cls = "O", None
        else:
            prefix, cls = tag[0], EventClass(tag[2:])
        if current is not None and not (prefix == "I" and cls is current):
            spans.append(EventSpan(start, i - 1, current))
            current = None
        if prefix != "O" and current is None:
            start, current = i, cls
    if current is not None:
        spans.append(EventSpan(start, len(tags) - 1, current))
    return spans


def tags_to_ids(tags: Sequence[str]) -> np.ndarray:
    try:
        return np.array([LABEL_INDEX[t] for t in tags], dtype=np.int64)
    except KeyError as err:
        raise ValueError(f"unknown label {err.args[0]!r}") from None


def ids_to_tags(ids: Iterable[int]) -> list[str]:
    return [_ALPHABET[int(i)] for i in ids]


# -- column files ---------------------------------------------------------------


def read_column_file(stream: IO[str], split_name: str = "") -> Corpus:
    sentences = []
    block: list[tuple[str, str, str]] = []

    def flush():
        if block:
            tokens = tuple(Token(w, None if p == NO_POS else p) for w, p, _ in block)
            events = decode_bio([lab for _, _, lab in block])
            sentences.append(Sentence(tokens, tuple(events)))
            block.clear()

    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            flush()
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise ColumnFormatError(f"expected 3 tab-separated columns, got {len(fields)}", line_no)
        surface, pos, label = fields
        if not surface:
            raise ColumnFormatError("empty token surface", line_no)
        if label not in LABEL_INDEX:
            raise ColumnFormatError(f"unknown label {label!r}", line_no)
        block.append((surface, pos or NO_POS, label))
    flush()
    return Corpus(tuple(sentences), split_name)


def write_column_file(corpus: Corpus, stream: IO[str]) -> None:
    for sentence in corpus:
        for token, tag in zip(sentence.tokens, encode_bio(sentence)):
            if any(c in token.surface for c in "\t\n\r"):
                raise ValueError(f"token {token.surface!r} cannot be written as a column")
            stream.write(f"{token.surface}\t{token.pos or NO_POS}\t{tag}\n")
        stream.write("\n")


def load_corpus(path, split_name: str | None = None) -> Corpus:
    with open(path, encoding="utf-8") as fh:
        return read_column_file(fh, split_name if split_name is not None else str(path))


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_column_file(corpus, fh)


# -- statistics -----------------------------------------------------------------


@dataclass
class CountsReport:
    per_class: dict[str, int] = field(default_factory=dict)
    per_pos: dict[str, int] = field(default_factory=dict)
    multi_token: int = 0
    total_events: int = 0
    total_event_tokens: int = 0


def corpus_stats(corpus: Corpus) -> CountsReport:
    """Events per class, event tokens per POS and multi-token event counts."""
    per_class = Counter()
    per_pos = Counter()
    report = CountsReport()
    for sentence in corpus:
        for span in sentence.events:
            per_class[span.event_class.value] += 1
            report.total_events += 1
            report.multi_token += span.length > 1
            for token in sentence.tokens[span.start : span.end + 1]:
                per_pos[token.pos or NO_POS] += 1
                report.total_event_tokens += 1
    report.per_class = {cls.value: per_class[cls.value] for cls in EVENT_CLASSES}
    report.per_pos = dict(sorted(per_pos.items()))
    return report
