"""Core representation and axiom validation for finite graded structures.

A structure carries, for every arity ``n`` with ``3 <= n <= |points|``, an
:class:`ArityBlock`: a partition of the n-element point subsets into classes,
a partial injective successor map on those classes (``rmap``), and a single
cyclic arrangement of the classes (``cycle_order``).  Flavor ``K0`` keeps only
the partitions; flavor ``K`` carries all three components.

Everything here is a pure function on immutable values.  Classes are
identified by their lexicographically least member subset; all deterministic
tie-breaks resolve to the lexicographically least candidate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterator, Optional

Subset = tuple  # tuple[str, ...], sorted

FLAVOR_K0 = "K0"
FLAVOR_K = "K"


class ParseError(ValueError):
    """Structure file does not conform to the format."""


class InvalidStructureError(ValueError):
    """Operation precondition requires a valid (or strong) structure."""


def subsets_of(points, n) -> list[Subset]:
    """All n-element subsets of ``points`` as sorted tuples, in lex order."""
    return [tuple(c) for c in combinations(sorted(points), n)]


@dataclass(frozen=True)
class ArityBlock:
    """The (partition, successor map, cycle order) data for one arity.

    ``classes`` is a tuple of classes, each a sorted tuple of subsets, the
    whole tuple sorted by class id (least member).  ``rmap`` maps class id to
    class id.  ``cycle_order`` lists every class id exactly once; it is
    rotation-normalised so the least id comes first, and empty for flavor K0.
    """

    classes: tuple
    rmap: dict = field(default_factory=dict)
    cycle_order: tuple = ()

    @cached_property
    def class_ids(self) -> tuple:
        return tuple(cls[0] for cls in self.classes)

    @cached_property
    def member_to_id(self) -> dict:
        out = {}
        for cls in self.classes:
            for s in cls:
                out[s] = cls[0]
        return out

    @cached_property
    def id_to_class(self) -> dict:
        return {cls[0]: cls for cls in self.classes}

    @cached_property
    def cycle_pos(self) -> dict:
        return {cid: i for i, cid in enumerate(self.cycle_order)}

    @cached_property
    def rmap_pred(self) -> dict:
        return {dst: src for src, dst in self.rmap.items()}

    def key(self):
        return (self.classes, tuple(sorted(self.rmap.items())), self.cycle_order)

    def __eq__(self, other):
        return isinstance(other, ArityBlock) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())


def _normalize_cycle(cycle) -> tuple:
    cycle = tuple(cycle)
    if not cycle:
        return cycle
    i = cycle.index(min(cycle))
    return cycle[i:] + cycle[:i]


def make_block(classes, rmap=None, cycle_order=None) -> ArityBlock:
    """Normalise raw block data: sort members, sort classes by id, rotate K.

    Class references in rmap and cycle_order may be any member subset; they
    are rewritten to the class id (least member).  Unknown references are
    kept verbatim for the validator to flag.
    """
    norm_classes = tuple(sorted(tuple(sorted(tuple(sorted(s)) for s in cls))
                                for cls in classes if cls))
    member = {}
    for cls in norm_classes:
        for s in cls:
            member[s] = cls[0]
    ref = lambda x: member.get(tuple(sorted(x)), tuple(sorted(x)))
    rmap = {ref(u): ref(w) for u, w in dict(rmap or {}).items()}
    if cycle_order is None:
        cycle_order = tuple(cls[0] for cls in norm_classes)
    else:
        cycle_order = tuple(ref(c) for c in cycle_order)
    return ArityBlock(norm_classes, rmap, _normalize_cycle(cycle_order))


@dataclass(frozen=True)
class FiniteStructure:
    """A finite structure of flavor K0 or K."""

    points: tuple
    blocks: dict  # arity -> ArityBlock
    flavor: str = FLAVOR_K
    name: str = "s"

    @cached_property
    def point_set(self) -> frozenset:
        return frozenset(self.points)

    def key(self):
        return (tuple(sorted(self.points)), self.flavor,
                tuple(sorted((n, b.key()) for n, b in self.blocks.items())))

    def __eq__(self, other):
        return isinstance(other, FiniteStructure) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"<FiniteStructure {self.name} |{len(self.points)}| {self.flavor}>"

    def class_of(self, n, subset) -> Subset:
        """Class id of an n-subset."""
        return self.blocks[n].member_to_id[tuple(sorted(subset))]


def build_structure(points, blocks, flavor=FLAVOR_K, name="s") -> FiniteStructure:
    """Assemble a structure from raw per-arity (classes, rmap, cycle) data.

    ``blocks`` maps arity to either an ArityBlock or a (classes, rmap, cycle)
    triple.  No axiom checking happens here; use :func:`validate_K`.
    """
    norm = {}
    for n, data in blocks.items():
        if isinstance(data, ArityBlock):
            norm[n] = data
        else:
            classes, rmap, cycle = data
            norm[n] = make_block(classes, rmap, cycle)
    return FiniteStructure(tuple(points), norm, flavor, name)


def trivial_structure(points, flavor=FLAVOR_K, name="s") -> FiniteStructure:
    """The structure with a single class at every arity (no rmap edges)."""
    points = tuple(points)
    blocks = {}
    for n in range(3, len(points) + 1):
        blocks[n] = make_block([subsets_of(points, n)], {}, None)
    if flavor == FLAVOR_K0:
        blocks = {n: make_block(b.classes, {}, ()) for n, b in blocks.items()}
        return FiniteStructure(points, blocks, FLAVOR_K0, name)
    return FiniteStructure(points, blocks, flavor, name)


def lift_to_K(s: FiniteStructure, name=None) -> FiniteStructure:
    """K0 structure re-flagged to flavor K with empty rmap, degenerate cycle."""
    blocks = {n: make_block(b.classes, {}, None) for n, b in s.blocks.items()}
    return FiniteStructure(s.points, blocks, FLAVOR_K,
                           name if name is not None else s.name)


def k0_reduct(s: FiniteStructure, name=None) -> FiniteStructure:
    """Forget rmap and cycle order, keep the partitions."""
    blocks = {n: make_block(b.classes, {}, ()) for n, b in s.blocks.items()}
    return FiniteStructure(s.points, blocks, FLAVOR_K0,
                           name if name is not None else s.name)


# ---------------------------------------------------------------------------
# rmap graph helpers


def rmap_cycles(block: ArityBlock) -> list[list]:
    """Disjoint cycles of the successor map, each starting at its least id."""
    seen = set()
    cycles = []
    for start in block.class_ids:
        if start in seen or start not in block.rmap:
            continue
        path = [start]
        node = block.rmap[start]
        while node not in (None, start) and node not in seen and node in block.rmap:
            path.append(node)
            node = block.rmap.get(node)
        if node == start:
            i = path.index(min(path))
            cyc = path[i:] + path[:i]
            if all(p not in seen for p in cyc):
                cycles.append(cyc)
                seen.update(cyc)
    return cycles


def rmap_paths(block: ArityBlock) -> list[list]:
    """Maximal non-cyclic rmap paths (isolated classes excluded)."""
    on_cycle = {c for cyc in rmap_cycles(block) for c in cyc}
    touched = set(block.rmap) | set(block.rmap.values())
    starts = [c for c in block.class_ids
              if c in touched and c not in on_cycle and c not in block.rmap_pred]
    paths = []
    for start in starts:
        path = [start]
        node = block.rmap.get(start)
        while node is not None and node not in path:
            path.append(node)
            node = block.rmap.get(node)
        paths.append(path)
    return paths


def closed_rmap(n: int, block: ArityBlock) -> dict:
    """rmap plus the forced closing edge of every path with exactly n nodes."""
    f = dict(block.rmap)
    for path in rmap_paths(block):
        if len(path) == n and path[-1] not in f:
            f[path[-1]] = path[0]
    return f


def apply_R(s: FiniteStructure, n: int, v) -> Optional[Subset]:
    """Successor of class ``v``: rmap image, or the virtual closing image
    when ``v`` ends a path of exactly n classes; None otherwise."""
    block = s.blocks[n]
    v = tuple(v)
    if v not in block.id_to_class:
        raise KeyError(f"unknown class id {v!r} at arity {n}")
    return closed_rmap(n, block).get(v)


def between(s: FiniteStructure, n: int, x, y, z) -> bool:
    """True iff walking the cycle order forward from x meets y strictly
    before z.  Requires three distinct class ids of block n."""
    block = s.blocks[n]
    x, y, z = tuple(x), tuple(y), tuple(z)
    for c in (x, y, z):
        if c not in block.id_to_class:
            raise KeyError(f"unknown class id {c!r} at arity {n}")
    if x == y or y == z or x == z:
        raise ValueError("between() needs three distinct class ids")
    if len(block.cycle_order) < 3:
        return False
    pos = block.cycle_pos
    c = len(block.cycle_order)
    return (pos[y] - pos[x]) % c < (pos[z] - pos[x]) % c


def in_arc(s: FiniteStructure, n: int, x, y, z) -> bool:
    """Weak membership y ∈ [x, z): y = x, or y strictly between x and z."""
    x, y, z = tuple(x), tuple(y), tuple(z)
    if y == x:
        return True
    if y == z or x == z:
        return False
    return between(s, n, x, y, z)


# ---------------------------------------------------------------------------
# Validation


@dataclass
class ValidationReport:
    ok: bool
    violations: list  # of (arity, axiom, detail)

    def __bool__(self):
        return self.ok


def _check_partition(n, block, all_subsets, bad):
    seen = {}
    for cls in block.classes:
        if not cls:
            bad(n, "empty-class", "empty class")
        for sub in cls:
            if sub not in all_subsets:
                bad(n, "subset-outside", f"{sub} not an {n}-subset of the universe")
            elif sub in seen:
                bad(n, "partition-overlap", f"{sub} in two classes")
            seen[sub] = True
    for sub in all_subsets:
        if sub not in seen:
            bad(n, "partition-cover", f"uncovered subset {sub}")


def validate_K(s: FiniteStructure) -> ValidationReport:
    """Check every block axiom; violations are data, not errors.

    For flavor K0 only the partition axioms (and emptiness of rmap and cycle
    order) are checked.  For flavor K the successor map must be an injective,
    irreflexive partial map whose graph splits into paths of at most n nodes
    and cycles of exactly n, compatible with the cyclic class order, with the
    forced closing edge of every full-length path included in the check.
    """
    v = []
    bad = lambda n, ax, detail: v.append((n, ax, detail))

    expected = set(range(3, len(s.points) + 1))
    if set(s.blocks) != expected:
        bad(0, "block-range",
            f"blocks {sorted(s.blocks)} != expected {sorted(expected)}")
    for n, block in sorted(s.blocks.items()):
        if n not in expected:
            continue
        all_subsets = set(subsets_of(s.points, n))
        _check_partition(n, block, all_subsets, bad)
        if s.flavor == FLAVOR_K0:
            if block.rmap:
                bad(n, "k0-relations-empty", "K0 block carries rmap edges")
            if block.cycle_order:
                bad(n, "k0-relations-empty", "K0 block carries a cycle order")
            continue

        ids = set(block.class_ids)
        rmap_ok = True
        for src, dst in block.rmap.items():
            if src not in ids or dst not in ids:
                bad(n, "r-unknown-class", f"{src}->{dst} references unknown class")
                rmap_ok = False
            elif src == dst:
                bad(n, "r-irreflexive", f"{src}->{src}")
                rmap_ok = False
        targets = list(block.rmap.values())
        if len(set(targets)) != len(targets):
            bad(n, "r-injective", "two classes share an rmap image")
            rmap_ok = False

        if tuple(sorted(block.cycle_order)) != tuple(sorted(ids)):
            bad(n, "k-not-permutation",
                "cycle order is not a permutation of the class ids")
            continue
        if not rmap_ok:
            continue

        cycles = rmap_cycles(block)
        for cyc in cycles:
            if len(cyc) != n:
                bad(n, "cycle-length", f"cycle length {len(cyc)} != {n}: {cyc[0]}")
        for path in rmap_paths(block):
            if len(path) > n:
                bad(n, "path-length", f"path of {len(path)} > {n} nodes: {path[0]}")
        if any(len(c) != n for c in cycles) or \
                any(len(p) > n for p in rmap_paths(block)):
            continue

        if len(block.class_ids) >= 3:
            f = closed_rmap(n, block)
            pos = block.cycle_pos
            c = len(block.cycle_order)
            btw = lambda x, y, z: (pos[y] - pos[x]) % c < (pos[z] - pos[x]) % c
            for x, y in f.items():
                z = f.get(y)
                if z is not None and len({x, y, z}) == 3 and not btw(x, y, z):
                    bad(n, "r-order-compat",
                        f"consecutive edges {x}->{y}->{z} wind against the cycle order")
            dom = sorted(f)
            for x, y, z in combinations(dom, 3):
                if btw(x, y, z) != btw(f[x], f[y], f[z]):
                    bad(n, "r-order-compat",
                        f"triple ({x},{y},{z}) not preserved by the successor map")

    return ValidationReport(not v, v)


def is_strong(s: FiniteStructure):
    """Whether every block has one class or is fully covered by rmap cycles
    of length exactly n.  Returns (bool, witness) with the first failing
    (arity, class id) as witness.

    Strongness counts only actual rmap cycles; a full-length path that merely
    closes virtually is not strong (its closing edge is missing).
    """
    if s.flavor != FLAVOR_K:
        raise InvalidStructureError("strongness is only defined for flavor K")
    rep = validate_K(s)
    if not rep.ok:
        raise InvalidStructureError(f"invalid structure: {rep.violations[:3]}")
    for n in sorted(s.blocks):
        block = s.blocks[n]
        if len(block.classes) == 1:
            continue
        on_cycle = {c for cyc in rmap_cycles(block) for c in cyc}
        for cid in block.class_ids:
            if cid not in on_cycle:
                return False, (n, cid)
    return True, None


# ---------------------------------------------------------------------------
# Restriction and relabeling


def restrict(s: FiniteStructure, subset, name=None) -> FiniteStructure:
    """Induced structure on a subset of the points.

    Classes are intersected with the surviving subsets (empty intersections
    dropped), rmap edges kept when both endpoint classes survive, and the
    cyclic sequence filtered in place.
    """
    keep = set(subset)
    if not keep <= s.point_set:
        raise ValueError("restriction target is not a subset of the universe")
    new_points = tuple(p for p in s.points if p in keep)
    blocks = {}
    for n in range(3, len(new_points) + 1):
        block = s.blocks[n]
        id_map = {}
        new_classes = []
        for cls in block.classes:
            members = tuple(sub for sub in cls if set(sub) <= keep)
            if members:
                id_map[cls[0]] = members[0]
                new_classes.append(members)
        new_rmap = {id_map[u]: id_map[w] for u, w in block.rmap.items()
                    if u in id_map and w in id_map}
        new_cycle = tuple(id_map[c] for c in block.cycle_order if c in id_map)
        if s.flavor == FLAVOR_K0:
            new_cycle = ()
        blocks[n] = make_block(new_classes, new_rmap, new_cycle)
    return FiniteStructure(new_points, blocks, s.flavor,
                           name if name is not None else s.name)


def relabel(s: FiniteStructure, mapping, name=None) -> FiniteStructure:
    """Rename points through an injective mapping (given as a dict)."""
    if len(set(mapping.values())) != len(mapping) or set(mapping) != s.point_set:
        raise ValueError("relabeling must be an injective map on all points")
    ren = lambda sub: tuple(sorted(mapping[p] for p in sub))
    blocks = {}
    for n, block in s.blocks.items():
        classes = [[ren(sub) for sub in cls] for cls in block.classes]
        rmap = {ren(u): ren(w) for u, w in block.rmap.items()}
        cycle = tuple(ren(c) for c in block.cycle_order)
        blocks[n] = make_block(classes, rmap, cycle)
    return FiniteStructure(tuple(mapping[p] for p in s.points), blocks,
                           s.flavor, name if name is not None else s.name)


# ---------------------------------------------------------------------------
# File format

_SUBSET_RE = re.compile(r"\{([^{}]*)\}")
_HEADER_RE = re.compile(r"^structure (\S+) flavor=(K0|K)$")


def _fmt_subset(sub) -> str:
    return "{" + ",".join(sub) + "}"


def serialize_structure(s: FiniteStructure) -> str:
    """Canonical text form: blocks ascending, classes sorted by id, subsets
    sorted, cycle rotated to start at the least class id."""
    lines = [f"structure {s.name} flavor={s.flavor}"]
    lines.append("points: " + " ".join(s.points) if s.points else "points:")
    for n in sorted(s.blocks):
        block = s.blocks[n]
        lines.append(f"arity {n}")
        for cls in block.classes:
            lines.append("class " + " ".join(_fmt_subset(x) for x in cls))
        if block.rmap:
            pairs = sorted(block.rmap.items())
            lines.append("R: " + ", ".join(f"{_fmt_subset(u)}->{_fmt_subset(w)}"
                                           for u, w in pairs))
        if len(block.classes) >= 3 and s.flavor != FLAVOR_K0:
            lines.append("K: " + " ".join(_fmt_subset(c)
                                          for c in _normalize_cycle(block.cycle_order)))
    return "\n".join(lines) + "\n"


def _parse_subset(token, lineno, universe, n=None):
    m = _SUBSET_RE.fullmatch(token.strip())
    if not m:
        raise ParseError(f"line {lineno}: malformed subset {token!r}")
    ids = tuple(sorted(x.strip() for x in m.group(1).split(",") if x.strip()))
    if len(set(ids)) != len(ids):
        raise ParseError(f"line {lineno}: repeated point in subset {token!r}")
    for p in ids:
        if p not in universe:
            raise ParseError(f"line {lineno}: subset point {p!r} outside universe")
    if n is not None and len(ids) != n:
        raise ParseError(f"line {lineno}: subset {token!r} has wrong arity")
    return ids


def parse_structure(text: str) -> FiniteStructure:
    """Parse the line-oriented structure format (see serialize_structure)."""
    raw = [(i + 1, ln.rstrip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in raw if ln.strip()]
    if not lines:
        raise ParseError("line 1: empty file")
    lineno, header = lines[0]
    m = _HEADER_RE.match(header)
    if not m:
        raise ParseError(f"line {lineno}: bad header {header!r}")
    name, flavor = m.group(1), m.group(2)
    if len(lines) < 2 or not lines[1][1].startswith("points:"):
        raise ParseError("line 2: missing points line")
    lineno, pts_line = lines[1]
    pts = pts_line[len("points:"):].split()
    for p in pts:
        if not re.fullmatch(r"[^\s{},]+", p):
            raise ParseError(f"line {lineno}: bad point id {p!r}")
    if len(set(pts)) != len(pts):
        raise ParseError(f"line {lineno}: duplicate point")
    universe = set(pts)

    blocks_raw = {}  # n -> (classes, rpairs, cycle, have_k)
    cur = None
    for lineno, ln in lines[2:]:
        ln = ln.strip()
        if ln.startswith("arity "):
            try:
                n = int(ln.split()[1])
            except (IndexError, ValueError):
                raise ParseError(f"line {lineno}: bad arity line {ln!r}")
            if n in blocks_raw:
                raise ParseError(f"line {lineno}: duplicate block for arity {n}")
            if not 3 <= n <= len(pts):
                raise ParseError(f"line {lineno}: arity {n} out of range")
            blocks_raw[n] = ([], [], None)
            cur = n
        elif ln.startswith("class "):
            if cur is None:
                raise ParseError(f"line {lineno}: class line before any arity line")
            toks = ln[len("class "):].split()
            cls = [_parse_subset(t, lineno, universe, cur) for t in toks]
            if not cls:
                raise ParseError(f"line {lineno}: empty class line")
            blocks_raw[cur][0].append(cls)
        elif ln.startswith("R:"):
            if cur is None:
                raise ParseError(f"line {lineno}: R line before any arity line")
            if flavor == FLAVOR_K0:
                raise ParseError(f"line {lineno}: R line in a K0 structure")
            blocks_raw[cur][1].extend(_parse_rpairs(ln[2:], lineno, universe, cur))
        elif ln.startswith("K:"):
            if cur is None:
                raise ParseError(f"line {lineno}: K line before any arity line")
            if flavor == FLAVOR_K0:
                raise ParseError(f"line {lineno}: K line in a K0 structure")
            cyc = [_parse_subset(t, lineno, universe, cur) for t in ln[2:].split()]
            classes, rpairs, _ = blocks_raw[cur]
            blocks_raw[cur] = (classes, rpairs, cyc)
        else:
            raise ParseError(f"line {lineno}: unrecognised line {ln!r}")

    expected = set(range(3, len(pts) + 1))
    if set(blocks_raw) != expected:
        missing = sorted(expected - set(blocks_raw))
        extra = sorted(set(blocks_raw) - expected)
        raise ParseError(f"line {raw[-1][0] if raw else 1}: block arities mismatch "
                         f"(missing {missing}, extra {extra})")

    blocks = {}
    for n, (classes, rpairs, cyc) in sorted(blocks_raw.items()):
        all_subsets = set(subsets_of(pts, n))
        seen = set()
        for cls in classes:
            for sub in cls:
                if sub in seen:
                    raise ParseError(f"subset {_fmt_subset(sub)} in two classes "
                                     f"(arity {n})")
                seen.add(sub)
        for sub in all_subsets:
            if sub not in seen:
                raise ParseError(f"uncovered subset {_fmt_subset(sub)} (arity {n})")
        member = {}
        for cls in classes:
            cid = min(tuple(sorted(s)) for s in cls)
            for sub in cls:
                member[sub] = cid
        rmap = {}
        for u, w in rpairs:
            src, dst = member[u], member[w]
            if src in rmap:
                raise ParseError(f"two rmap images for class {_fmt_subset(src)} "
                                 f"(arity {n})")
            rmap[src] = dst
        n_classes = len(classes)
        if cyc is not None:
            if n_classes < 3:
                raise ParseError(f"K line with fewer than 3 classes (arity {n})")
            cyc_ids = [member[c] for c in cyc]
            if sorted(cyc_ids) != sorted({member[s] for s in seen}):
                raise ParseError(f"K line is not a permutation of the classes "
                                 f"(arity {n})")
        else:
            if flavor == FLAVOR_K and n_classes >= 3:
                raise ParseError(f"missing K line for arity {n}")
            cyc_ids = None
        if flavor == FLAVOR_K0:
            blocks[n] = make_block(classes, {}, ())
        else:
            blocks[n] = make_block(classes, rmap, cyc_ids)
    return FiniteStructure(tuple(pts), blocks, flavor, name)


def _parse_rpairs(text, lineno, universe, n):
    # "  {a,b,c}->{a,b,d}, {x,..}->{y,..}" ; subsets may contain commas, so
    # split on the arrow structure rather than naively on commas.
    pairs = []
    for m in re.finditer(r"(\{[^{}]*\})\s*->\s*(\{[^{}]*\})", text):
        u = _parse_subset(m.group(1), lineno, universe, n)
        w = _parse_subset(m.group(2), lineno, universe, n)
        pairs.append((u, w))
    stripped = re.sub(r"(\{[^{}]*\})\s*->\s*(\{[^{}]*\})", "", text)
    if stripped.replace(",", "").strip():
        raise ParseError(f"line {lineno}: malformed R line")
    if not pairs:
        raise ParseError(f"line {lineno}: empty R line")
    return pairs
