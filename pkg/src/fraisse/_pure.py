"""Pure-Python relabeling kernels (reference lane).

Same API as the compiled module ``_speedups``; results must be identical.
"""

from __future__ import annotations

from itertools import permutations
from math import comb

BACKEND = "pure"


def _rank(sub, k, n):
    rank = 0
    prev = -1
    for i in range(n):
        v = sub[i]
        for u in range(prev + 1, v):
            rank += comb(k - 1 - u, n - 1 - i)
        prev = v
    return rank


def _section_key(k, section, perm, out):
    n, m, members, class_of, n_classes, rpairs, cycle = section
    img_rank = [0] * m
    for t in range(m):
        img = sorted(perm[members[t * n + j]] for j in range(n))
        img_rank[t] = _rank(img, k, n)
    by_class = [[] for _ in range(n_classes)]
    for t in range(m):
        by_class[class_of[t]].append(img_rank[t])
    for ci in range(n_classes):
        by_class[ci].sort()
    order = sorted(range(n_classes), key=lambda ci: by_class[ci][0])
    out.append(n_classes)
    for ci in order:
        out.extend(by_class[ci])
        out.append(-1)
    # rmap edges as (min-rank src, min-rank dst), sorted
    pairs = sorted((by_class[rpairs[2 * i]][0], by_class[rpairs[2 * i + 1]][0])
                   for i in range(len(rpairs) // 2))
    out.append(len(pairs))
    for a, b in pairs:
        out.append(a)
        out.append(b)
    if cycle:
        ring = [by_class[ci][0] for ci in cycle]
        i = ring.index(min(ring))
        out.append(1)
        out.extend(ring[i:] + ring[:i])
    else:
        out.append(0)
    return out


def struct_key(enc, perm):
    """Serialization-ordered integer key of the structure relabeled by perm."""
    k, sections = enc
    out = []
    for section in sections:
        _section_key(k, section, perm, out)
    return tuple(out)


def best_relabeling(enc, perms=None):
    """(perm, key) minimizing struct_key; first minimizer in iteration order."""
    k, sections = enc
    it = perms if perms is not None else permutations(range(k))
    best_perm = None
    best_key = None
    for perm in it:
        key = struct_key(enc, perm)
        if best_key is None or key < best_key:
            best_key = key
            best_perm = tuple(perm)
    return best_perm, best_key
