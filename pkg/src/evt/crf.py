"""Linear-chain CRF over per-token emission scores.

A label sequence ``y`` of length T scores

    start[y_0] + sum_t emissions[t, y_t] + sum_t transitions[y_t, y_{t+1}] + end[y_{T-1}]

and ``transitions[i, j]`` is the score of label ``j`` following label ``i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class CrfParams:
    transitions: np.ndarray
    start_scores: np.ndarray
    end_scores: np.ndarray

    @classmethod
    def zeros(cls, n_labels: int) -> "CrfParams":
        return cls(np.zeros((n_labels, n_labels)), np.zeros(n_labels), np.zeros(n_labels))

    @property
    def n_labels(self) -> int:
        return len(self.start_scores)


def logsumexp(x: np.ndarray, axis=None) -> np.ndarray:
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(x - m), axis=axis, keepdims=True)) + m
    return out.squeeze(axis) if axis is not None else out.item()


def sequence_score(emissions: np.ndarray, crf: CrfParams, tags) -> float:
    tags = np.asarray(tags, dtype=np.int64)
    if tags.shape != (emissions.shape[0],):
        raise ValueError("tag sequence length must equal the number of tokens")
    if tags.min() < 0 or tags.max() >= crf.n_labels:
        raise ValueError("tag outside the label alphabet")
    score = crf.start_scores[tags[0]] + crf.end_scores[tags[-1]]
    score += emissions[np.arange(len(tags)), tags].sum()
    score += crf.transitions[tags[:-1], tags[1:]].sum()
    return float(score)


def _forward(emissions: np.ndarray, crf: CrfParams) -> np.ndarray:
    T, L = emissions.shape
    alpha = np.empty((T, L))
    alpha[0] = crf.start_scores + emissions[0]
    for t in range(1, T):
        alpha[t] = logsumexp(alpha[t - 1][:, None] + crf.transitions, axis=0) + emissions[t]
    return alpha


def _backward(emissions: np.ndarray, crf: CrfParams) -> np.ndarray:
    T, L = emissions.shape
    beta = np.empty((T, L))
    beta[T - 1] = crf.end_scores
    for t in range(T - 2, -1, -1):
        beta[t] = logsumexp(crf.transitions + (emissions[t + 1] + beta[t + 1])[None, :], axis=1)
    return beta


def crf_log_partition(emissions: np.ndarray, crf: CrfParams) -> float:
    alpha = _forward(emissions, crf)
    return float(logsumexp(alpha[-1] + crf.end_scores))


def crf_nll(emissions: np.ndarray, crf: CrfParams, gold_tags) -> float:
    """Negative log-likelihood of ``gold_tags`` (label ids); never negative."""
    gold = sequence_score(emissions, crf, gold_tags)
    return max(crf_log_partition(emissions, crf) - gold, 0.0)


def crf_marginals(emissions: np.ndarray, crf: CrfParams):
    """Forward-backward posteriors.

    Returns ``(log_z, unary, pairwise)`` where ``unary[t, j] = P(y_t = j)`` and
    ``pairwise[i, j]`` is the expected number of ``i -> j`` transitions.
    """
    alpha = _forward(emissions, crf)
    beta = _backward(emissions, crf)
    log_z = float(logsumexp(alpha[-1] + crf.end_scores))
    unary = np.exp(alpha + beta - log_z)
    pairwise = np.zeros_like(crf.transitions)
    for t in range(emissions.shape[0] - 1):
        pairwise += np.exp(
            alpha[t][:, None] + crf.transitions + (emissions[t + 1] + beta[t + 1])[None, :] - log_z
        )
    return log_z, unary, pairwise


def crf_nll_and_grads(emissions: np.ndarray, crf: CrfParams, gold_tags):
    """NLL plus its gradients w.r.t. emissions, transitions, start and end scores."""
    gold = np.asarray(gold_tags, dtype=np.int64)
    log_z, unary, pairwise = crf_marginals(emissions, crf)
    nll = log_z - sequence_score(emissions, crf, gold)
    T = len(gold)
    d_em = unary.copy()
    d_em[np.arange(T), gold] -= 1.0
    d_trans = pairwise
    np.subtract.at(d_trans, (gold[:-1], gold[1:]), 1.0)
    d_start = unary[0].copy()
    d_start[gold[0]] -= 1.0
    d_end = unary[-1].copy()
    d_end[gold[-1]] -= 1.0
    return nll, d_em, CrfParams(d_trans, d_start, d_end)


def viterbi_decode(emissions: np.ndarray, crf: CrfParams) -> list[int]:
    """Highest-scoring label ids; ties go to the lowest label index."""
    T, L = emissions.shape
    delta = crf.start_scores + emissions[0]
    backpointers = np.empty((T, L), dtype=np.int64)
    for t in range(1, T):
        cand = delta[:, None] + crf.transitions
        # argmax returns the first maximal index
        backpointers[t] = np.argmax(cand, axis=0)
        delta = cand[backpointers[t], np.arange(L)] + emissions[t]
    best = [int(np.argmax(delta + crf.end_scores))]
    for t in range(T - 1, 0, -1):
        best.append(int(backpointers[t, best[-1]]))
    return best[::-1]
