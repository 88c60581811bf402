"""Isomorphism testing, canonical forms, and exhaustive small-size census.

Canonical forms relabel points to the standard alphabet and take the
lexicographically least serialization over all point permutations; the
search runs on integer keys (see encoding) that mirror serialization order.
Isomorphism and embedding search is permutation backtracking with per-class
matching as the pruning invariant; sizes stay small enough that no external
canonical-labeling engine is warranted.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterator, Optional

from . import kernels
from .encoding import encode_structure
from .structures import (
    FLAVOR_K, FLAVOR_K0, FiniteStructure, InvalidStructureError, make_block,
    relabel, restrict, serialize_structure, subsets_of, validate_K, is_strong,
)

ALPHABET = "abcdefghijklmnopqrstuvwxyz"

CANONICAL_MAX = 8
K0_SIZE_MAX = 5
C_SIZE_MAX = 4


@dataclass(frozen=True)
class CanonicalForm:
    text: str


@dataclass(frozen=True)
class Embedding:
    """An injective point map certified to preserve the structure exactly:
    the induced structure on the image equals the relabeled source."""

    source: FiniteStructure
    target: FiniteStructure
    point_map: tuple  # sorted (src, dst) pairs

    @property
    def mapping(self) -> dict:
        return dict(self.point_map)

    def image_points(self):
        return [d for _, d in self.point_map]

    def check(self) -> bool:
        m = self.mapping
        return restrict(self.target, m.values()) == relabel(self.source, m)


def standard_points(k: int) -> list:
    if k > len(ALPHABET):
        raise ValueError("standard alphabet exhausted")
    return list(ALPHABET[:k])


def canonical_form(s: FiniteStructure) -> CanonicalForm:
    """Lexicographically least serialization over all point relabelings."""
    if len(s.points) > CANONICAL_MAX:
        raise InvalidStructureError(
            f"canonical form guarded at {CANONICAL_MAX} points")
    return CanonicalForm(serialize_structure(canonicalize(s)))


def canonicalize(s: FiniteStructure) -> FiniteStructure:
    """The canonical representative itself (points renamed a, b, c, ...)."""
    perm, _ = kernels.best_relabeling(encode_structure(s))
    spts = sorted(s.points)
    mapping = {p: ALPHABET[perm[i]] for i, p in enumerate(spts)}
    out = relabel(s, mapping, name="canonical")
    return FiniteStructure(tuple(sorted(out.points)), out.blocks,
                           out.flavor, out.name)


def _class_match_update(small, big, match, rev, n, sub, img):
    sc = small.blocks[n].member_to_id[sub]
    bc = big.blocks[n].member_to_id[img]
    prev = match.setdefault((n, sc), bc)
    if prev != bc:
        return False
    prevr = rev.setdefault((n, bc), sc)
    return prevr == sc


def _relations_match(small, big, match, rev):
    for n, sblock in small.blocks.items():
        bblock = big.blocks[n]
        for u, w in sblock.rmap.items():
            if bblock.rmap.get(match[(n, u)]) != match[(n, w)]:
                return False
        for bu, bw in bblock.rmap.items():
            su = rev.get((n, bu))
            sw = rev.get((n, bw))
            if su is not None and sw is not None and sblock.rmap.get(su) != sw:
                return False
        if len(sblock.classes) >= 3 and small.flavor == FLAVOR_K:
            induced = [rev[(n, c)] for c in bblock.cycle_order if (n, c) in rev]
            want = list(sblock.cycle_order)
            i = induced.index(min(induced))
            j = want.index(min(want))
            if induced[i:] + induced[:i] != want[j:] + want[:j]:
                return False
    return True


def find_embeddings(small: FiniteStructure, big: FiniteStructure,
                    fixed: Optional[dict] = None) -> Iterator[Embedding]:
    """All induced-exact embeddings of ``small`` into ``big`` extending the
    partial point map ``fixed``, in lexicographic order of the assignment."""
    if small.flavor != big.flavor:
        return
    spts = sorted(small.points)
    bpts = sorted(big.points)
    if len(spts) > len(bpts):
        return
    fixed = dict(fixed or {})
    arities = sorted(small.blocks)

    def extend(i, assign, used, match, rev):
        if i == len(spts):
            if _relations_match(small, big, match, rev):
                yield Embedding(small, big,
                                tuple(sorted(zip(spts, assign))))
            return
        p = spts[i]
        cands = [fixed[p]] if p in fixed else [b for b in bpts if b not in used]
        for b in cands:
            if b in used:
                continue
            new_match = dict(match)
            new_rev = dict(rev)
            ok = True
            for n in arities:
                if n > i + 1:
                    break
                for rest in combinations(range(i), n - 1):
                    sub = tuple(sorted([spts[j] for j in rest] + [p]))
                    img = tuple(sorted([assign[j] for j in rest] + [b]))
                    if not _class_match_update(small, big, new_match, new_rev,
                                               n, sub, img):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                yield from extend(i + 1, assign + [b], used | {b},
                                  new_match, new_rev)

    yield from extend(0, [], set(), {}, {})


def find_embedding(small, big, fixed=None) -> Optional[Embedding]:
    return next(find_embeddings(small, big, fixed), None)


def are_isomorphic(s: FiniteStructure, t: FiniteStructure) -> Optional[Embedding]:
    """A bijective embedding when one exists (first in lexicographic order
    of the point assignment), else None."""
    if len(s.points) != len(t.points) or s.flavor != t.flavor:
        return None
    for n in s.blocks:
        sb, tb = s.blocks[n], t.blocks.get(n)
        if tb is None:
            return None
        if sorted(map(len, sb.classes)) != sorted(map(len, tb.classes)):
            return None
        if len(sb.rmap) != len(tb.rmap):
            return None
    return find_embedding(s, t)


# ---------------------------------------------------------------------------
# Set partitions and the orbit sweep


def set_partitions(items: list) -> Iterator[list]:
    """All partitions of ``items`` in restricted-growth order."""
    m = len(items)
    if m == 0:
        yield []
        return
    rgs = [0] * m

    def rec(i, maxval):
        if i == m:
            nclasses = maxval + 1
            parts = [[] for _ in range(nclasses)]
            for j, c in enumerate(rgs):
                parts[c].append(items[j])
            yield parts
            return
        for c in range(maxval + 2):
            rgs[i] = c
            yield from rec(i + 1, max(maxval, c))

    yield from rec(1, 0) if m > 1 else iter([[list(items)]])


def _partition_sig(parts):
    return tuple(sorted(tuple(sorted(cls)) for cls in parts))


def _apply_perm_to_partition(parts, point_perm, spts):
    ren = {p: spts[point_perm[i]] for i, p in enumerate(spts)}
    return [[tuple(sorted(ren[x] for x in sub)) for sub in cls] for cls in parts]


def partition_orbit_reps(k: int, n: int, perms=None) -> Iterator[tuple]:
    """Orbit transversal of partitions of the n-subsets of k standard points
    under the given point permutations (default: all of Sym(k)).

    Yields (rep, stab) where rep is the orbit member minimizing the
    relabeling key and stab its stabilizer within the given group.
    """
    spts = standard_points(k)
    subs = subsets_of(spts, n)
    group = list(perms) if perms is not None else list(permutations(range(k)))
    seen = set()
    for parts in set_partitions(subs):
        sig = _partition_sig(parts)
        if sig in seen:
            continue
        for perm in group:
            seen.add(_partition_sig(_apply_perm_to_partition(parts, perm, spts)))
        enc = _partition_enc(k, n, parts, spts)
        best_perm, _ = kernels.best_relabeling(enc, perms=group)
        rep = _apply_perm_to_partition(parts, best_perm, spts)
        rep_sig = _partition_sig(rep)
        stab = [perm for perm in group
                if _partition_sig(_apply_perm_to_partition(rep, perm, spts))
                == rep_sig]
        yield tuple(rep_sig), stab


def _partition_enc(k, n, parts, spts):
    idx = {p: i for i, p in enumerate(spts)}
    class_of = {}
    for ci, cls in enumerate(sorted(tuple(sorted(tuple(sorted(s)) for s in cls))
                                    for cls in parts)):
        for sub in cls:
            class_of[tuple(sorted(idx[p] for p in sub))] = ci
    flat = []
    co = []
    for c in combinations(range(k), n):
        flat.extend(c)
        co.append(class_of[c])
    nc = len(parts)
    return (k, ((n, len(co), tuple(flat), tuple(co), nc, (), ()),))


# ---------------------------------------------------------------------------
# K0 census


def enumerate_K0(size: int) -> list:
    """One representative per isomorphism class of K0 structures on ``size``
    points, sorted by canonical form; exhaustive."""
    if not 0 <= size <= K0_SIZE_MAX:
        raise ValueError(f"enumerate_K0 guarded to sizes 0..{K0_SIZE_MAX}")
    pts = standard_points(size)
    if size < 3:
        return [FiniteStructure(tuple(pts), {}, FLAVOR_K0, "k0")]
    out = []
    # canonical arity-3 partitions first, then the higher arities under the
    # stabilizer of everything chosen so far; the assembled labeling is then
    # already the canonical one (the key orders lower arities first).
    group0 = list(permutations(range(size)))

    def assemble(n, group, blocks):
        if n > size:
            s = FiniteStructure(tuple(pts), dict(blocks), FLAVOR_K0, "k0")
            out.append(s)
            return
        for rep, stab in partition_orbit_reps(size, n, perms=group):
            nb = dict(blocks)
            nb[n] = make_block(rep, {}, ())
            assemble(n + 1, stab, nb)

    assemble(3, group0, {})
    out.sort(key=lambda s: serialize_structure(s))
    return [relabel(s, {p: p for p in s.points}, name=f"k0_{size}_{i}")
            for i, s in enumerate(out)]


# ---------------------------------------------------------------------------
# Strong census (full language)


def _partial_injections(ids) -> Iterator[dict]:
    ids = list(ids)
    c = len(ids)
    for dsize in range(c + 1):
        for dom in combinations(range(c), dsize):
            for img in permutations(range(c), dsize):
                m = {ids[d]: ids[i] for d, i in zip(dom, img)}
                if all(u != w for u, w in m.items()):
                    yield m


def _cycle_orders(ids) -> Iterator[tuple]:
    ids = sorted(ids)
    if len(ids) < 3:
        yield tuple(ids)
        return
    first = ids[0]
    for rest in permutations(ids[1:]):
        yield (first,) + rest


def enumerate_C(size: int) -> list:
    """One representative per isomorphism class of strong structures on
    ``size`` points, sorted by canonical form; exhaustive brute force
    (all block assignments, validator and strongness filters, canonical
    dedupe)."""
    if not 0 <= size <= C_SIZE_MAX:
        raise ValueError(f"enumerate_C guarded to sizes 0..{C_SIZE_MAX}")
    pts = standard_points(size)
    if size < 3:
        return [FiniteStructure(tuple(pts), {}, FLAVOR_K, "c")]

    per_arity = []
    for n in range(3, size + 1):
        subs = subsets_of(pts, n)
        options = []
        for parts in set_partitions(subs):
            classes = make_block(parts, {}, None).classes
            ids = [c[0] for c in classes]
            for rmap in _partial_injections(ids):
                for cyc in _cycle_orders(ids):
                    options.append((parts, rmap, cyc))
        per_arity.append((n, options))

    reps = {}

    def assemble(i, blocks):
        if i == len(per_arity):
            s = FiniteStructure(tuple(pts), dict(blocks), FLAVOR_K, "c")
            if not validate_K(s).ok:
                return
            ok, _ = is_strong(s)
            if not ok:
                return
            canon = canonicalize(s)
            reps.setdefault(serialize_structure(canon), canon)
            return
        n, options = per_arity[i]
        for parts, rmap, cyc in options:
            nb = dict(blocks)
            nb[n] = make_block(parts, rmap, cyc)
            assemble(i + 1, nb)

    assemble(0, {})
    out = [reps[k] for k in sorted(reps)]
    return [relabel(s, {p: p for p in s.points}, name=f"c_{size}_{i}")
            for i, s in enumerate(out)]
