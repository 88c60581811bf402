"""Integer encoding of structures for the relabeling kernels.

A structure over k points becomes a tuple ``(k, sections)`` where each
section encodes one arity block over point indices 0..k-1:

    (n, m, members, class_of, n_classes, rpairs, cycle)

``members`` is the flat tuple of all m subsets in lex order (m*n ints),
``class_of[t]`` the class index of the t-th subset, ``rpairs`` a flat tuple
of rmap edges as class-index pairs (sorted), ``cycle`` the cycle order as
class indices (empty for K0 or when absent).  Class indices follow the
block's id order, so index order equals id order.

The key produced from an encoding under a point permutation mirrors the
serialization field order exactly (classes by least member with a -1
terminator, then rmap pairs, then the rotated cycle), so comparing keys of
two relabelings of the same structure agrees with comparing the serialized
texts under equal-width point names.
"""

from __future__ import annotations

from math import comb


def encode_structure(s) -> tuple:
    idx = {p: i for i, p in enumerate(sorted(s.points))}
    k = len(s.points)
    sections = []
    for n in sorted(s.blocks):
        block = s.blocks[n]
        members = []
        class_of = {}
        for ci, cls in enumerate(block.classes):
            for sub in cls:
                class_of[tuple(sorted(idx[p] for p in sub))] = ci
        flat = []
        subs = []
        from itertools import combinations
        for t, c in enumerate(combinations(range(k), n)):
            subs.append(c)
            flat.extend(c)
        co = tuple(class_of[c] for c in subs)
        cid_index = {cls[0]: ci for ci, cls in enumerate(block.classes)}
        rpairs = []
        for u, w in sorted(block.rmap.items()):
            rpairs.extend((cid_index[u], cid_index[w]))
        cycle = tuple(cid_index[c] for c in block.cycle_order)
        sections.append((n, len(subs), tuple(flat), co, len(block.classes),
                         tuple(rpairs), cycle))
    return (k, tuple(sections))


def subset_rank(sub, k: int) -> int:
    """Lex rank of a sorted index tuple among combinations(range(k), n)."""
    n = len(sub)
    rank = 0
    prev = -1
    for i, v in enumerate(sub):
        for u in range(prev + 1, v):
            rank += comb(k - 1 - u, n - 1 - i)
        prev = v
    return rank
