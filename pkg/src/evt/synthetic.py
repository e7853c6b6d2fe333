"""Seeded toy corpus with a learnable trigger -> class mapping.

Every trigger word (or fixed multi-word trigger) always carries the same
class, and the words used outside events never occur inside one, so a tagger
can in principle reach perfect accuracy. Class frequencies follow the EVENTI
training-split proportions.
"""
from __future__ import annotations

import numpy as np

from .corpus import Corpus, EventClass, EventSpan, Sentence, Token

# events per class in the EVENTI training split
CLASS_COUNTS: dict[EventClass, int] = {
    EventClass.OCCURRENCE: 9041,
    EventClass.ASPECTUAL: 446,
    EventClass.I_STATE: 1599,
    EventClass.I_ACTION: 1476,
    EventClass.PERCEPTION: 162,
    EventClass.REPORTING: 714,
    EventClass.STATE: 4090,
}
MULTI_TOKEN_RATE = 1207 / 17528

TRIGGERS: dict[EventClass, list[tuple[str, str]]] = {
    EventClass.OCCURRENCE: [
        ("andare", "Verb"), ("arrivato", "Verb"), ("partiti", "Verb"), ("esplosione", "Noun"),
        ("attacco", "Noun"), ("incontro", "Noun"), ("vinto", "Verb"), ("costruito", "Verb"),
        ("crollo", "Noun"), ("votato", "Verb"), ("morti", "Adjective"), ("elezioni", "Noun"),
    ],
    EventClass.ASPECTUAL: [
        ("iniziato", "Verb"), ("finito", "Verb"), ("continua", "Verb"), ("inizio", "Noun"),
    ],
    EventClass.I_STATE: [
        ("pensa", "Verb"), ("vuole", "Verb"), ("teme", "Verb"), ("speranza", "Noun"),
        ("crede", "Verb"),
    ],
    EventClass.I_ACTION: [
        ("promesso", "Verb"), ("tentato", "Verb"), ("chiesto", "Verb"), ("richiesta", "Noun"),
        ("deciso", "Verb"),
    ],
    EventClass.PERCEPTION: [("visto", "Verb"), ("sentito", "Verb"), ("osservato", "Verb")],
    EventClass.REPORTING: [
        ("detto", "Verb"), ("dichiarato", "Verb"), ("annunciato", "Verb"), ("riferisce", "Verb"),
    ],
    EventClass.STATE: [
        ("crisi", "Noun"), ("presente", "Adjective"), ("guerra", "Noun"), ("malato", "Adjective"),
        ("vive", "Verb"), ("disoccupazione", "Noun"),
    ],
}

MULTI_TRIGGERS: dict[EventClass, list[list[tuple[str, str]]]] = {
    EventClass.OCCURRENCE: [
        [("fare", "Verb"), ("valigie", "Noun")],
        [("strage", "Noun"), ("Beslan", "Noun")],
        [("prendere", "Verb"), ("parte", "Noun")],
    ],
    EventClass.STATE: [
        [("in", "Preposition"), ("grado", "Noun")],
        [("c'", "Verb"), ("è", "Verb")],
    ],
    EventClass.I_STATE: [[("avere", "Verb"), ("paura", "Noun")]],
    EventClass.REPORTING: [[("rendere", "Verb"), ("noto", "Adjective")]],
}

SUBJECTS = [
    ["Marco"], ["Maria"], ["Il", "governo"], ["La", "polizia"], ["Il", "sindaco"],
    ["I", "cittadini"], ["Il", "ministro"], ["Gli", "studenti"], ["Lucia"], ["L'", "azienda"],
]
FILLERS = [
    ["a", "casa"], ["ieri"], ["oggi"], ["nel", "centro"], ["della", "città"], ["per", "lavoro"],
    ["con", "gli", "amici"], ["a", "Roma"], ["a", "Milano"], ["domani"], ["molto"],
    ["sulla", "strada"], ["nel", "2014"], ["alle", "10"], ["che"], ["e"],
]
FILLER_POS = {"ieri": "Adverb", "oggi": "Adverb", "domani": "Adverb", "molto": "Adverb"}


def template_vocabulary() -> list[str]:
    """Every distinct surface form the generator can emit, sorted."""
    words = {"."}
    for chunk in SUBJECTS + FILLERS:
        words.update(chunk)
    for triggers in TRIGGERS.values():
        words.update(w for w, _ in triggers)
    for phrases in MULTI_TRIGGERS.values():
        for phrase in phrases:
            words.update(w for w, _ in phrase)
    return sorted(words)


def generate_synthetic_corpus(seed: int, n_sentences: int, split_name: str = "synthetic") -> Corpus:
    if n_sentences < 0:
        raise ValueError("n_sentences must be >= 0")
    rng = np.random.default_rng(seed)
    classes = list(CLASS_COUNTS)
    weights = np.array([CLASS_COUNTS[c] for c in classes], dtype=float)
    weights /= weights.sum()

    sentences = []
    for _ in range(n_sentences):
        tokens: list[Token] = []
        events: list[EventSpan] = []
        subject = SUBJECTS[rng.integers(len(SUBJECTS))]
        tokens.extend(Token(w, "Noun") for w in subject)
        n_events = int(rng.choice(4, p=[0.1, 0.45, 0.3, 0.15]))
        for _ in range(n_events):
            cls = classes[rng.choice(len(classes), p=weights)]
            if cls in MULTI_TRIGGERS and rng.random() < 2 * MULTI_TOKEN_RATE:
                options = MULTI_TRIGGERS[cls]
                phrase = options[rng.integers(len(options))]
            else:
                options = TRIGGERS[cls]
                phrase = [options[rng.integers(len(options))]]
            start = len(tokens)
            tokens.extend(Token(w, pos) for w, pos in phrase)
            events.append(EventSpan(start, len(tokens) - 1, cls))
            for _ in range(rng.integers(0, 3)):
                filler = FILLERS[rng.integers(len(FILLERS))]
                tokens.extend(Token(w, FILLER_POS.get(w, "Other")) for w in filler)
        if not events:
            filler = FILLERS[rng.integers(len(FILLERS))]
            tokens.extend(Token(w, FILLER_POS.get(w, "Other")) for w in filler)
        tokens.append(Token(".", "Punct"))
        sentences.append(Sentence(tuple(tokens), tuple(events)))
    return Corpus(tuple(sentences), split_name)


def random_vectors(words, dim: int, seed: int) -> dict[str, np.ndarray]:
    """Gaussian vectors for the lowercased forms of ``words``."""
    rng = np.random.default_rng(seed)
    keys = sorted({w.lower() for w in words})
    return {w: rng.normal(0.0, 1.0 / np.sqrt(dim), size=dim) for w in keys}


def synthetic_splits(seed: int, sizes=(2000, 200, 200)) -> tuple[Corpus, Corpus, Corpus]:
    """Train/dev/test corpora cut from one seeded stream."""
    full = generate_synthetic_corpus(seed, sum(sizes))
    a, b = sizes[0], sizes[0] + sizes[1]
    parts = (full.sentences[:a], full.sentences[a:b], full.sentences[b:])
    return tuple(Corpus(p, name) for p, name in zip(parts, ("train", "dev", "test")))
