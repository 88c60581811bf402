import random
from itertools import combinations, permutations

import pytest

from conftest import DATA, load
from oracles import naive_validate, random_mutant, random_valid_K
from fraisse.structures import (
    FLAVOR_K0, InvalidStructureError, ParseError, apply_R, between,
    build_structure, in_arc, is_strong, lift_to_K, parse_structure, relabel,
    restrict, serialize_structure, subsets_of, trivial_structure, validate_K,
)


def cyc4():
    pts = ["a", "b", "c", "d"]
    subs = subsets_of(pts, 3)
    classes = [[subs[0], subs[1]], [subs[2]], [subs[3]]]
    rmap = {subs[0]: subs[2], subs[2]: subs[3], subs[3]: subs[0]}
    return build_structure(
        pts, {3: (classes, rmap, [subs[0], subs[2], subs[3]]),
              4: ([subsets_of(pts, 4)], {}, None)}, name="cyc4")


# --- parsing / serialization ------------------------------------------------

def test_parse_trivial3():
    s = load("trivial3.struct")
    assert len(s.points) == 3 and len(s.blocks[3].classes) == 1


def test_golden_serialization_frozen():
    s = trivial_structure(["a", "b", "c"], name="trivial3")
    assert serialize_structure(s) == (DATA / "trivial3.struct").read_text()


def test_roundtrip_corpus_byte_identical(corpus):
    for name, s in corpus.items():
        text = (DATA / name).read_text()
        assert serialize_structure(s) == text
        assert parse_structure(serialize_structure(s)) == s


def test_empty_structure_roundtrip():
    s = trivial_structure([], name="empty")
    text = serialize_structure(s)
    assert text.splitlines()[1] == "points:"
    assert parse_structure(text) == s


def test_parse_uncovered_subset_rejected():
    text = ("structure bad flavor=K\n"
            "points: a b c d\n"
            "arity 3\n"
            "class {a,b,c} {a,b,d}\n"
            "class {a,c,d}\n"
            "arity 4\n"
            "class {a,b,c,d}\n")
    with pytest.raises(ParseError, match="uncovered"):
        parse_structure(text)


def test_parse_subset_in_two_classes_rejected():
    text = ("structure bad flavor=K\n"
            "points: a b c\n"
            "arity 3\n"
            "class {a,b,c}\n"
            "class {a,b,c}\n")
    with pytest.raises(ParseError, match="two classes"):
        parse_structure(text)


def test_parse_duplicate_point_rejected():
    with pytest.raises(ParseError, match="duplicate point"):
        parse_structure("structure bad flavor=K\npoints: a a b\n")


def test_parse_subset_outside_universe():
    text = ("structure bad flavor=K\n"
            "points: a b c\n"
            "arity 3\n"
            "class {a,b,z}\n")
    with pytest.raises(ParseError, match="outside universe"):
        parse_structure(text)


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ParseError, match="line 1"):
        parse_structure("banana\n")


# --- validation --------------------------------------------------------------

def test_validate_trivial_ok():
    assert validate_K(trivial_structure(list("abc"))).ok


def test_two_cycle_rejected():
    pts = ["a", "b", "c", "d"]
    subs = subsets_of(pts, 3)
    classes = [[subs[0], subs[1]], [subs[2]], [subs[3]]]
    rmap = {subs[0]: subs[2], subs[2]: subs[0]}
    s = build_structure(pts, {3: (classes, rmap, None),
                              4: ([subsets_of(pts, 4)], {}, None)})
    rep = validate_K(s)
    assert not rep.ok
    assert any(ax == "cycle-length" for _, ax, _ in rep.violations)


def test_reversed_cycle_order_rejected():
    pts = ["a", "b", "c", "d"]
    subs = subsets_of(pts, 3)
    classes = [[subs[0], subs[1]], [subs[2]], [subs[3]]]
    rmap = {subs[0]: subs[2], subs[2]: subs[3], subs[3]: subs[0]}
    s = build_structure(pts, {3: (classes, rmap, [subs[0], subs[3], subs[2]]),
                              4: ([subsets_of(pts, 4)], {}, None)})
    rep = validate_K(s)
    assert not rep.ok
    assert any(ax == "r-order-compat" for _, ax, _ in rep.violations)


def test_k0_with_relations_rejected():
    s = cyc4()
    bad = build_structure(s.points, {n: (b.classes, b.rmap, b.cycle_order)
                                     for n, b in s.blocks.items()},
                          flavor=FLAVOR_K0)
    rep = validate_K(bad)
    assert not rep.ok


def test_corpus_validates(corpus):
    for s in corpus.values():
        assert validate_K(s).ok


# --- strongness ---------------------------------------------------------------

def test_trivial_strong():
    assert is_strong(trivial_structure(list("abc"))) == (True, None)


def test_two_classes_not_strong(corpus):
    s = corpus["twoclass4.struct"]
    ok, witness = is_strong(s)
    assert not ok
    assert witness == (3, ("a", "b", "c"))


def test_cycle4_strong():
    assert is_strong(cyc4())[0]


def test_is_strong_requires_valid():
    pts = ["a", "b", "c"]
    s = build_structure(pts, {3: ([[("a", "b", "c")]],
                                  {("a", "b", "c"): ("a", "b", "c")}, None)})
    with pytest.raises(InvalidStructureError):
        is_strong(s)


def test_divisibility_on_strong(corpus):
    for s in corpus.values():
        if s.flavor != "K":
            continue
        if not is_strong(s)[0]:
            continue
        for n, block in s.blocks.items():
            c = len(block.classes)
            assert c == 1 or (c % n == 0 and c > 0)


# --- restriction ---------------------------------------------------------------

def test_restrict_identity():
    s = cyc4()
    assert restrict(s, s.points) == s


def test_restrict_to_two_points_no_blocks():
    s = cyc4()
    assert restrict(s, ["a", "b"]).blocks == {}


def test_restrict_hereditarily_valid(corpus):
    for s in corpus.values():
        if len(s.points) > 5:
            continue
        pts = list(s.points)
        for r in range(len(pts) + 1):
            for keep in combinations(pts, r):
                assert validate_K(restrict(s, keep)).ok


def test_restrict_keeps_surviving_edges(corpus):
    s = corpus["strong5_twocycles.struct"]
    r = restrict(s, ["a", "b", "c", "d"])
    assert validate_K(r).ok
    # the two interleaved 3-cycles lose members but the induced map survives
    # wherever both endpoint classes do
    for u, w in r.blocks[3].rmap.items():
        assert any(set(x) <= set("abcd") for x in r.blocks[3].id_to_class[u])


# --- between / apply_R ----------------------------------------------------------

def test_between_cycle_basics():
    s = cyc4()
    ids = s.blocks[3].cycle_order
    assert between(s, 3, ids[0], ids[1], ids[2])
    assert not between(s, 3, ids[0], ids[2], ids[1])


def test_between_circular_order_axioms(corpus):
    s = corpus["strong5_twocycles.struct"]
    ids = s.blocks[3].class_ids
    assert len(ids) == 6
    n_true = 0
    for x, y, z in permutations(ids, 3):
        b = between(s, 3, x, y, z)
        if b:
            n_true += 1
            assert between(s, 3, y, z, x)          # cyclicity
            assert not between(s, 3, x, z, y)      # asymmetry
        else:
            assert between(s, 3, x, z, y)          # totality
    assert n_true == 120 / 2


def test_between_rejects_bad_input():
    s = cyc4()
    ids = s.blocks[3].class_ids
    with pytest.raises(ValueError):
        between(s, 3, ids[0], ids[0], ids[1])
    with pytest.raises(KeyError):
        between(s, 3, ("z", "z", "z"), ids[0], ids[1])


def test_apply_R_cycle_and_missing():
    s = cyc4()
    b = s.blocks[3]
    v = b.cycle_order[0]
    assert apply_R(s, 3, v) == b.rmap[v]
    t = trivial_structure(list("abc"))
    assert apply_R(t, 3, t.blocks[3].class_ids[0]) is None


def test_apply_R_virtual_closing():
    # length-3 path with no stored closing edge: the closure is forced
    pts = ["a", "b", "c", "d"]
    subs = subsets_of(pts, 3)
    classes = [[subs[0], subs[1]], [subs[2]], [subs[3]]]
    rmap = {subs[0]: subs[2], subs[2]: subs[3]}
    s = build_structure(pts, {3: (classes, rmap, [subs[0], subs[2], subs[3]]),
                              4: ([subsets_of(pts, 4)], {}, None)})
    assert validate_K(s).ok
    assert apply_R(s, 3, subs[3]) == subs[0]
    assert not is_strong(s)[0]  # virtual closure is not an actual cycle


def test_apply_R_order_compatibility(corpus):
    for s in corpus.values():
        if s.flavor != "K":
            continue
        for n, block in s.blocks.items():
            if len(block.classes) < 3:
                continue
            from fraisse.structures import closed_rmap
            f = closed_rmap(n, block)
            for x, y, z in permutations(sorted(f), 3):
                assert between(s, n, x, y, z) == between(s, n, f[x], f[y], f[z])


def test_in_arc_weak_form():
    s = cyc4()
    ids = s.blocks[3].cycle_order
    assert in_arc(s, 3, ids[0], ids[0], ids[1])
    assert not in_arc(s, 3, ids[0], ids[1], ids[1])


# --- relabel -------------------------------------------------------------------

def test_relabel_roundtrip():
    s = cyc4()
    m = {"a": "x1", "b": "x2", "c": "x3", "d": "x4"}
    r = relabel(s, m)
    back = relabel(r, {v: k for k, v in m.items()})
    assert back == s
    assert validate_K(r).ok


# --- oracle agreement on corpus + mutants ---------------------------------------

def test_naive_oracle_agrees_on_corpus(corpus):
    for s in corpus.values():
        assert naive_validate(s) == validate_K(s).ok


def test_naive_oracle_agrees_on_mutants(corpus):
    rng = random.Random(7)
    bases = [s for s in corpus.values()]
    for _ in range(300):
        m = random_mutant(rng, rng.choice(bases))
        assert naive_validate(m) == validate_K(m).ok, serialize_structure_safe(m)


def serialize_structure_safe(s):
    try:
        return serialize_structure(s)
    except Exception:
        return repr(s)


def test_random_valid_generator_is_valid():
    rng = random.Random(3)
    for _ in range(50):
        s = random_valid_K(rng, rng.randint(3, 5))
        assert validate_K(s).ok == naive_validate(s)


def test_lift_to_K_valid():
    rng = random.Random(5)
    for _ in range(20):
        s = random_valid_K(rng, 4)
        from fraisse.structures import k0_reduct
        red = k0_reduct(s)
        assert validate_K(red).ok
        lifted = lift_to_K(red)
        assert validate_K(lifted).ok
