import random

import pytest
from hypothesis import given, settings, strategies as st

from vfk import fingroup as fg
from vfk.corpus import load
from vfk.gog import Edge, GraphOfGroups, Vertex
from vfk.randgen import random_gog
from vfk.transport import (
    anchor_at,
    bounded_in_collapse,
    build_transport_graph,
    conjugacy_class_of,
    conjugator_between,
    edge_anchor,
    finite_classes,
    finite_proper_overgroup,
    fix_subtree,
    is_maximal_finite,
    maximal_finite_classes,
    maximality_counterexamples,
    normalizer_in_G,
    pointed_conjugacy,
    states_of,
    tree_of_cylinders,
    vertex_group_anchor,
)
from vfk.words import (
    INFINITE,
    conjugate,
    element_order,
    enumerate_normal_forms,
    fixes_vertex,
    key,
    parse_word,
    vertex_key,
)


def keyset(words):
    return frozenset(key(w) for w in words)


def all_vertex_anchors(gog):
    out = []
    for v, vert in enumerate(gog.vertices):
        for H in fg.all_subgroups(vert.group):
            out.append(anchor_at(gog, v, H.elements))
    return out


def brute_classes(gog, radius):
    """Group anchors by conjugacy, searching conjugators among short normal forms."""
    conj = list(enumerate_normal_forms(gog, radius))
    reps = []
    for a in all_vertex_anchors(gog):
        ws = a.words()
        orbit = {keyset(conjugate(g, w) for w in ws) for g in conj}
        for r in reps:
            if r[0].order == a.order and keyset(r[0].words()) in orbit:
                break
        else:
            reps.append((a, orbit))
    return len(reps)


@pytest.mark.parametrize("name,count", [("gl2z", 13), ("psl2z", 3), ("sl2z", 5), ("dinf", 3), ("z2", 2)])
def test_class_counts_match_conjugator_search(name, count):
    g = load(name)
    assert len(finite_classes(g)) == count
    assert brute_classes(g, 3) == count


@pytest.mark.parametrize("name,count", [("cohopfoutinfini", 17), ("s4s3s4", 18), ("gl2z-hnn", 13), ("s3-hnn", 4)])
def test_class_counts_frozen(name, count):
    assert len(finite_classes(load(name))) == count


def test_class_orders_gl2z():
    assert [c.order for c in finite_classes(load("gl2z"))] == [1, 2, 2, 2, 3, 4, 4, 4, 6, 6, 6, 8, 12]


def test_transport_graph_is_deterministic():
    a = build_transport_graph(load("s4s3s4"))
    b = build_transport_graph(load("s4s3s4"))
    assert [c.describe() for c in a.classes] == [c.describe() for c in b.classes]


def test_every_vertex_subgroup_has_a_class(corpus_graph):
    n = len(finite_classes(corpus_graph))
    for a in all_vertex_anchors(corpus_graph):
        assert 0 <= conjugacy_class_of(a) < n


@pytest.mark.parametrize("name", ["gl2z", "psl2z", "sl2z", "cohopfoutinfini", "s3-hnn"])
def test_conjugator_between_agrees_with_classes(name):
    g = load(name)
    anchors = all_vertex_anchors(g)
    for a in anchors:
        for b in anchors:
            if a.order != b.order:
                continue
            c = conjugator_between(a, b)
            same = conjugacy_class_of(a) == conjugacy_class_of(b)
            assert (c is not None) == same
            if c is not None:
                assert keyset(conjugate(c, w) for w in a.words()) == keyset(b.words())


def test_conjugator_between_rejects_order_mismatch():
    g = load("gl2z")
    assert conjugator_between(vertex_group_anchor(g, "u"), vertex_group_anchor(g, "w")) is None


def test_pointed_conjugacy_recovers_a_conjugator():
    g = load("gl2z")
    a = vertex_group_anchor(g, "w")
    h = parse_word(g, "u:1 . e+ . w:1 . e-")
    imgs = a.words()
    moved = [conjugate(h, w) for w in imgs]
    c = pointed_conjugacy(imgs, moved)
    assert c is not None
    assert [key(conjugate(c, w)) for w in imgs] == [key(w) for w in moved]
    # a rotated list does not even preserve the identity, so no conjugator fits
    swapped = moved[1:] + moved[:1]
    assert pointed_conjugacy(imgs, swapped) is None


def test_pointed_conjugacy_needs_elements():
    with pytest.raises(ValueError):
        pointed_conjugacy([], [])


# ------------------------------------------------------------- fix subtrees


def test_gl2z_edge_fix_subtree():
    g = load("gl2z")
    f = fix_subtree(edge_anchor(g, "e"))
    assert f.status == "complete"
    assert len(f.vertices) == 3
    assert f.diameter == 2


def check_fix(f):
    a = f.anchor
    ws = a.words()
    for p in f.vertices:
        assert all(fixes_vertex(w, p) for w in ws)
    assert len({vertex_key(p) for p in f.vertices}) == len(f.vertices)


def test_fix_subtrees_are_fixed_and_distinct(corpus_graph):
    for c in finite_classes(corpus_graph):
        f = fix_subtree(c.rep)
        if f.status == "complete":
            check_fix(f)
        elif f.status == "pumped":
            assert element_order(f.witness) == INFINITE
            ws = c.rep.words()
            assert keyset(conjugate(f.witness, w) for w in ws) == keyset(ws)


def test_fix_subtree_cap_reports_capped():
    g = load("gl2z")
    assert fix_subtree(anchor_at(g, "u", [0]), cap=1).status == "capped"


# ------------------------------------------------------------- normalizers


def brute_normalizer(anchor, radius):
    ws = anchor.words()
    ks = keyset(ws)
    return [g for g in enumerate_normal_forms(anchor.gog, radius) if keyset(conjugate(g, w) for w in ws) == ks]


@pytest.mark.parametrize("name", ["gl2z", "psl2z", "sl2z", "dinf", "z2"])
def test_normalizers_against_enumeration(name):
    g = load(name)
    for c in finite_classes(g):
        res = normalizer_in_G(c.rep)
        found = brute_normalizer(c.rep, 3)
        if res.status == "finite":
            assert len(found) == res.order
            assert keyset(found) == keyset(res.anchor.words())
        else:
            assert res.status == "infinite"
            # an infinite normalizer shows up as growth past any finite vertex group
            assert len(found) > g.max_vertex_order


def test_gl2z_edge_normalizer():
    res = normalizer_in_G(edge_anchor(load("gl2z"), "e"))
    assert res.status == "finite" and res.order == 8


def test_cohopfoutinfini_infinite_normalizer_witness():
    g = load("cohopfoutinfini")
    a = edge_anchor(g, "e1")
    res = normalizer_in_G(a)
    assert res.status == "infinite"
    assert element_order(res.witness) == INFINITE
    assert keyset(conjugate(res.witness, w) for w in a.words()) == keyset(a.words())


def test_normalizer_contains_subgroup(corpus_graph):
    for c in finite_classes(corpus_graph):
        res = normalizer_in_G(c.rep)
        if res.status == "finite":
            assert keyset(c.rep.words()) <= keyset(res.anchor.words())


# ------------------------------------------------------------- maximality


def test_gl2z_maximal_classes():
    mx = maximal_finite_classes(load("gl2z"))
    assert sorted(c.order for c in mx) == [8, 12]


def test_psl2z_maximal_classes():
    assert [c.order for c in maximal_finite_classes(load("psl2z"))] == [3, 3]


def test_non_maximal_have_overgroups(corpus_graph):
    for c in finite_classes(corpus_graph):
        over = finite_proper_overgroup(c.rep)
        if over is None:
            continue
        assert over.order > c.order
        big = keyset(over.words())
        assert keyset(c.rep.words()) < big


@pytest.mark.parametrize("name", ["gl2z", "psl2z", "sl2z"])
def test_maximality_condition_on_short_words(name):
    g = load(name)
    for c in finite_classes(g):
        bad = maximality_counterexamples(c.rep, 3)
        if is_maximal_finite(c.rep):
            assert bad == []
        else:
            assert bad


def test_states_of_start_state():
    g = load("gl2z")
    a = edge_anchor(g, "e")
    st_ = states_of(a)
    assert (a.vertex, a.elements) in st_


# ------------------------------------------------------------- collapse / cylinders


def test_bounded_in_collapse_gl2z():
    g = load("gl2z")
    a = edge_anchor(g, "e")
    assert bounded_in_collapse(a, 4)[0] == "bounded"


def test_bounded_in_collapse_cohopfoutinfini():
    g = load("cohopfoutinfini")
    a = edge_anchor(g, "e1")
    assert bounded_in_collapse(a, 2) == ("bounded", None)
    # k = 4 collapses nothing, so the infinite normalizer stays visible
    status, w = bounded_in_collapse(a, 4)
    assert status == "unbounded" and element_order(w) == INFINITE


def test_tree_of_cylinders_gl2z():
    rep = tree_of_cylinders(load("gl2z")).describe()
    assert rep["obstruction"] is None
    assert [v["vertex"] for v in rep["V0"]] == ["w"]


def test_tree_of_cylinders_rejects_mixed_orders():
    Z4, Z2, Z1 = fg.cyclic(4), fg.cyclic(2), fg.cyclic(1)

    def mono(C):
        return fg.GroupMono(C, Z4, fg.embeddings(C, Z4)[0])

    g = GraphOfGroups(
        (Vertex("a", Z4),),
        (Edge("s", 0, 0, Z2, mono(Z2), mono(Z2)), Edge("t", 0, 0, Z1, mono(Z1), mono(Z1))),
        0,
        "mixed",
    )
    with pytest.raises(ValueError):
        tree_of_cylinders(g)


# ------------------------------------------------------------- random graphs


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_random_classes_cover_vertex_subgroups(seed):
    g = random_gog(random.Random(seed), max_vertices=2, max_order=8, max_edges=2)
    n = len(finite_classes(g))
    assert n >= 1
    for a in all_vertex_anchors(g):
        assert conjugacy_class_of(a) < n


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_random_normalizers_are_consistent(seed):
    g = random_gog(random.Random(seed), max_vertices=2, max_order=8, max_edges=2)
    for c in finite_classes(g):
        res = normalizer_in_G(c.rep)
        ws = c.rep.words()
        if res.status == "finite":
            ns = res.anchor.words()
            assert keyset(ws) <= keyset(ns)
            for n in ns:
                assert keyset(conjugate(n, w) for w in ws) == keyset(ws)
            for h in brute_normalizer(c.rep, 2):
                assert key(h) in keyset(ns)
        elif res.status == "infinite":
            assert element_order(res.witness) == INFINITE
            assert keyset(conjugate(res.witness, w) for w in ws) == keyset(ws)
