"""Reference implementations that share no code with the package.

Slow on purpose: nested loops, dense vectors, exhaustive recursion.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np


def brute_confusion(pred, ref):
    """(tp, fn, fp, tn) by a double loop over every cell."""
    tp = fn = fp = tn = 0
    for i in range(len(ref)):
        for j in range(len(ref[i])):
            r, p = int(ref[i][j]), int(pred[i][j])
            if r == 1 and p == 1:
                tp += 1
            elif r == 1 and p == 0:
                fn += 1
            elif r == 0 and p == 1:
                fp += 1
            else:
                tn += 1
    return tp, fn, fp, tn


def crg_exact(tp, fn, fp, tn):
    """CRG by direct substitution with exact rationals."""
    t = tp + fn + fp + tn
    a = tp + fn
    w = Fraction(t - a, 2 * a)
    s = tp * w - fn * w - fp
    s_max = a * w
    return s_max / (2 * s_max - s)


def lcs_recursive(a, b):
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    return go(0, 0)


def _grams(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def cider_dense(cands, refs, max_n=4, sigma=6.0):
    """Per-pair CIDEr-D using dense tf-idf vectors over the full n-gram vocabulary."""
    n_docs = len(refs)
    log_n = math.log(2.0) if n_docs == 1 else math.log(n_docs)
    out = []
    vocab = {}
    for n in range(1, max_n + 1):
        allg = sorted({g for doc in list(cands) + list(refs) for g in _grams(doc, n)})
        vocab[n] = {g: k for k, g in enumerate(allg)}
    df = {}
    for n in range(1, max_n + 1):
        d = np.zeros(len(vocab[n]))
        for r in refs:
            for g in set(_grams(r, n)):
                d[vocab[n][g]] += 1
        df[n] = d
    for c, r in zip(cands, refs):
        total = 0.0
        for n in range(1, max_n + 1):
            idf = log_n - np.log(np.maximum(df[n], 1.0))
            hv = np.zeros(len(vocab[n]))
            rv = np.zeros(len(vocab[n]))
            for g in _grams(c, n):
                hv[vocab[n][g]] += 1
            for g in _grams(r, n):
                rv[vocab[n][g]] += 1
            hv, rv = hv * idf, rv * idf
            val = float(np.sum(np.minimum(hv, rv) * rv))
            nh, nr = np.linalg.norm(hv), np.linalg.norm(rv)
            if nh != 0 and nr != 0:
                val /= nh * nr
            total += val * math.exp(-((len(c) - len(r)) ** 2) / (2 * sigma**2))
        out.append(10.0 * total / max_n)
    return out


def cider_self_maximum(refs, max_n=4):
    """Score of the identity corpus: 10 times the fraction of (doc, order) pairs with a nonzero vector."""
    n_docs = len(refs)
    log_n = math.log(2.0) if n_docs == 1 else math.log(n_docs)
    per_doc = []
    for r in refs:
        hits = 0
        for n in range(1, max_n + 1):
            weights = []
            for g in set(_grams(r, n)):
                df = sum(1 for other in refs if g in set(_grams(other, n)))
                weights.append(log_n - math.log(df))
            hits += any(w != 0 for w in weights)
        per_doc.append(10.0 * hits / max_n)
    return sum(per_doc) / len(per_doc)
