"""Strict/relaxed span scoring, class F1, POS and confusion diagnostics, McNemar.

Relaxed matching is one-to-one: gold spans are visited left to right and each
takes the first still-unmatched system span it overlaps.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import EVENT_CLASSES, NO_POS, Corpus, EventSpan

MODES = ("strict", "relaxed")
CHI2_CRITICAL_005 = 3.841


class AlignmentError(ValueError):
    def __init__(self, message: str, sentence_index: int | None = None):
        self.sentence_index = sentence_index
        super().__init__(message)


def match_spans(gold, system, mode: str = "strict") -> list[tuple[int, int]]:
    if mode == "strict":
        index = {(s.start, s.end): j for j, s in enumerate(system)}
        return [(i, index[(g.start, g.end)]) for i, g in enumerate(gold) if (g.start, g.end) in index]
    if mode != "relaxed":
        raise ValueError(f"unknown match mode {mode!r}")
    order = sorted(range(len(gold)), key=lambda i: (gold[i].start, gold[i].end))
    sys_order = sorted(range(len(system)), key=lambda j: (system[j].start, system[j].end))
    used = set()
    pairs = []
    for i in order:
        for j in sys_order:
            if j not in used and gold[i].overlaps(system[j]):
                used.add(j)
                pairs.append((i, j))
                break
    return pairs


def check_alignment(*corpora: Corpus) -> None:
    first = corpora[0]
    for other in corpora[1:]:
        if len(other) != len(first):
            raise AlignmentError(f"corpora have {len(first)} and {len(other)} sentences")
        for k, (a, b) in enumerate(zip(first, other)):
            if a.surfaces != b.surfaces:
                raise AlignmentError(f"sentence {k + 1} differs between files", k)


def prf(tp: int, n_system: int, n_gold: int) -> tuple[float, float, float]:
    p = tp / n_system if n_system else 0.0
    r = tp / n_gold if n_gold else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


@dataclass
class ModeScores:
    precision: float = 0.0
    recall: float = 0.0
    f1: float = 0.0
    f1_class: float = 0.0


@dataclass
class ScoreReport:
    strict: ModeScores = field(default_factory=ModeScores)
    relaxed: ModeScores = field(default_factory=ModeScores)
    counts: dict[str, int] = field(default_factory=dict)

    def mode(self, name: str) -> ModeScores:
        return getattr(self, name)

    def as_kv(self) -> dict[str, float]:
        out = {}
        for m in MODES:
            for k, v in vars(self.mode(m)).items():
                out[f"{m}.{k}"] = v
        for k, v in self.counts.items():
            out[f"count.{k}"] = v
        return out


def score(gold: Corpus, system: Corpus) -> ScoreReport:
    check_alignment(gold, system)
    counts = Counter(gold=0, system=0)
    for g, s in zip(gold, system):
        counts["gold"] += len(g.events)
        counts["system"] += len(s.events)
        for m in MODES:
            pairs = match_spans(g.events, s.events, m)
            counts[f"{m}_tp"] += len(pairs)
            counts[f"{m}_tp_class"] += sum(
                g.events[i].event_class is s.events[j].event_class for i, j in pairs
            )
    report = ScoreReport(counts={k: counts[k] for k in (
        "gold", "system", "strict_tp", "relaxed_tp", "strict_tp_class", "relaxed_tp_class")})
    for m in MODES:
        p, r, f = prf(counts[f"{m}_tp"], counts["system"], counts["gold"])
        f_cls = prf(counts[f"{m}_tp_class"], counts["system"], counts["gold"])[2]
        setattr(report, m, ModeScores(p, r, f, f_cls))
    return report


def format_table(report: ScoreReport, label: str = "system") -> str:
    """Plain-text table with R, P, F1, F1-class for both matching modes."""
    head = f"{'':<16}{'Strict':>36}{'Relaxed':>36}"
    cols = f"{'System':<16}" + "".join(f"{c:>9}" for c in ("R", "P", "F1", "F1-class") * 2)
    row = f"{label:<16}"
    for m in MODES:
        s = report.mode(m)
        row += "".join(f"{v:>9.3f}" for v in (s.recall, s.precision, s.f1, s.f1_class))
    c = report.counts
    foot = (f"gold={c['gold']} system={c['system']} strict_tp={c['strict_tp']} "
            f"relaxed_tp={c['relaxed_tp']}")
    return "\n".join([head, cols, "-" * len(cols), row, foot]) + "\n"


def format_kv(report: ScoreReport) -> str:
    lines = []
    for k, v in report.as_kv().items():
        lines.append(f"{k}={v}" if isinstance(v, int) else f"{k}={v:.6f}")
    return "\n".join(lines) + "\n"


def parse_kv(text: str) -> dict[str, float]:
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"not a key=value line: {line!r}")
        out[key.strip()] = float(value)
    return out


# -- diagnostics ----------------------------------------------------------------------


def event_pos(sentence, span: EventSpan) -> str:
    """POS of an event: the first tagged POS among its tokens, else ``_``."""
    for token in sentence.tokens[span.start : span.end + 1]:
        if token.pos and token.pos != NO_POS:
            return token.pos
    return NO_POS


@dataclass
class PosBreakdown:
    gold: dict[str, int]
    matched: dict[str, int]

    @property
    def recall(self) -> dict[str, float]:
        return {p: 100.0 * self.matched[p] / n if n else 0.0 for p, n in self.gold.items()}


def pos_breakdown(gold: Corpus, system: Corpus) -> PosBreakdown:
    """Per-POS share of gold events found with an exact extent match."""
    check_alignment(gold, system)
    n_gold = Counter()
    n_matched = Counter()
    for g, s in zip(gold, system):
        found = {i for i, _ in match_spans(g.events, s.events, "strict")}
        for i, span in enumerate(g.events):
            pos = event_pos(g, span)
            n_gold[pos] += 1
            n_matched[pos] += i in found
    keys = sorted(n_gold)
    return PosBreakdown({k: n_gold[k] for k in keys}, {k: n_matched[k] for k in keys})


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # rows gold class, columns system class
    classes: tuple[str, ...] = tuple(c.value for c in EVENT_CLASSES)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def class_errors(self) -> int:
        return int(self.counts.sum() - np.trace(self.counts))

    def error_share(self) -> dict[str, float]:
        """Percentage of all class errors in which each class was (wrongly) assigned."""
        off = self.counts - np.diag(np.diag(self.counts))
        total = off.sum()
        return {c: 100.0 * off[:, k].sum() / total if total else 0.0
                for k, c in enumerate(self.classes)}


def class_confusion(gold: Corpus, system: Corpus, mode: str = "strict") -> ConfusionMatrix:
    check_alignment(gold, system)
    index = {c: k for k, c in enumerate(EVENT_CLASSES)}
    counts = np.zeros((len(EVENT_CLASSES), len(EVENT_CLASSES)), dtype=np.int64)
    for g, s in zip(gold, system):
        for i, j in match_spans(g.events, s.events, mode):
            counts[index[g.events[i].event_class], index[s.events[j].event_class]] += 1
    return ConfusionMatrix(counts)


@dataclass
class McNemarResult:
    b: int
    c: int
    chi2: float
    significant_at_005: bool

    @property
    def p_value(self) -> float:
        # survival function of chi-squared with one degree of freedom
        return math.erfc(math.sqrt(self.chi2 / 2.0))


def mcnemar_from_counts(b: int, c: int) -> McNemarResult:
    chi2 = (abs(b - c) - 1) ** 2 / (b + c) if b + c else 0.0
    return McNemarResult(b, c, chi2, chi2 > CHI2_CRITICAL_005)


def mcnemar(system_a: Corpus, system_b: Corpus, gold: Corpus, mode: str = "strict") -> McNemarResult:
    """Continuity-corrected McNemar test over per-gold-event correctness.

    ``b`` counts events only system A gets right, ``c`` those only B gets right.
    """
    check_alignment(gold, system_a, system_b)
    b = c = 0
    for g, sa, sb in zip(gold, system_a, system_b):
        hit_a = {i for i, _ in match_spans(g.events, sa.events, mode)}
        hit_b = {i for i, _ in match_spans(g.events, sb.events, mode)}
        b += len(hit_a - hit_b)
        c += len(hit_b - hit_a)
    return mcnemar_from_counts(b, c)
