import numpy as np
import pytest
from hypothesis import strategies as st

from evt.corpus import EVENT_CLASSES, Corpus, EventSpan, Sentence, Token

WORDS = ["Marco", "pensa", "di", "andare", "a", "casa", ".", "Il", "governo", "2014", "è", "c'"]


@st.composite
def sentences(draw, max_len=12):
    n = draw(st.integers(1, max_len))
    tokens = tuple(Token(draw(st.sampled_from(WORDS)), draw(st.sampled_from([None, "Noun", "Verb"])))
                   for _ in range(n))
    # non-overlapping spans: walk left to right, skipping a random gap each time
    events = []
    i = draw(st.integers(0, n))
    while i < n:
        length = draw(st.integers(1, min(3, n - i)))
        events.append(EventSpan(i, i + length - 1, draw(st.sampled_from(EVENT_CLASSES))))
        i += length + draw(st.integers(0, 3))
    return Sentence(tokens, tuple(events))


@st.composite
def span_sets(draw, n_tokens=15):
    """Non-overlapping spans inside a sentence of ``n_tokens`` tokens."""
    events = []
    i = draw(st.integers(0, 4))
    while i < n_tokens:
        length = draw(st.integers(1, min(4, n_tokens - i)))
        events.append(EventSpan(i, i + length - 1, draw(st.sampled_from(EVENT_CLASSES))))
        i += length + draw(st.integers(0, 4))
    return events


@pytest.fixture
def marco():
    return Sentence.from_words(
        "Marco pensa di andare a casa .".split(),
        [EventSpan(1, 1, "I_STATE"), EventSpan(3, 3, "OCCURRENCE")],
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def corpus_of(*sentences, split=""):
    return Corpus(tuple(sentences), split)


# -- acceptance summary -------------------------------------------------------------

_acceptance = []


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        tag = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[outcome]
        terminalreporter.write_line(f"[{tag}] {name}")
