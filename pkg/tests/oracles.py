"""Brute-force CRF reference values by explicit enumeration of all label paths."""
import itertools
import math


def path_score(em, trans, start, end, path):
    s = start[path[0]] + end[path[-1]]
    for t, y in enumerate(path):
        s += em[t][y]
    for a, b in zip(path, path[1:]):
        s += trans[a][b]
    return s


def all_paths(T, L):
    return list(itertools.product(range(L), repeat=T))


def log_partition(em, trans, start, end):
    T, L = len(em), len(em[0])
    scores = [path_score(em, trans, start, end, p) for p in all_paths(T, L)]
    m = max(scores)
    return m + math.log(math.fsum(math.exp(s - m) for s in scores))


def nll(em, trans, start, end, gold):
    return log_partition(em, trans, start, end) - path_score(em, trans, start, end, tuple(gold))


def best_path(em, trans, start, end):
    """Argmax path; among exact ties prefer the smallest label at the last
    position, then the one before it, and so on."""
    T, L = len(em), len(em[0])
    best = None
    for p in all_paths(T, L):
        s = path_score(em, trans, start, end, p)
        key = (-s, p[::-1])
        if best is None or key < best[0]:
            best = (key, p)
    return list(best[1])


def unary_marginals(em, trans, start, end):
    T, L = len(em), len(em[0])
    log_z = log_partition(em, trans, start, end)
    out = [[0.0] * L for _ in range(T)]
    for p in all_paths(T, L):
        w = math.exp(path_score(em, trans, start, end, p) - log_z)
        for t, y in enumerate(p):
            out[t][y] += w
    return out
