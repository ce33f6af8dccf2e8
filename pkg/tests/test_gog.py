import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from vfk.corpus import BUILDERS, NAMES, load, load_doc
from vfk.fingroup import GroupMono, cyclic, symmetric
from vfk.gog import (
    AmalgamSplitting,
    Edge,
    GraphError,
    GraphOfGroups,
    HNNSplitting,
    Vertex,
    collapse,
    delta_e,
    delta_k,
    from_json,
    to_json,
)
from vfk.randgen import random_gog
from vfk.words import generator_words, is_identity, key, normal_form, random_word, realize, substitute


@pytest.mark.parametrize("name", NAMES)
def test_bundled_json_matches_builder(name):
    built, loaded = BUILDERS[name](), load(name)
    assert [v.group.table for v in built.vertices] == [v.group.table for v in loaded.vertices]
    assert [(e.origin, e.terminus, e.alpha.map, e.omega.map) for e in built.edges] == [
        (e.origin, e.terminus, e.alpha.map, e.omega.map) for e in loaded.edges
    ]


@pytest.mark.parametrize("name", NAMES)
def test_json_round_trip(name):
    g = load(name)
    again = from_json(json.loads(json.dumps(to_json(g))), name)
    assert to_json(again) == to_json(g)
    assert not again.validate()


def test_perm_group_input():
    doc = {
        "groups": {"S3": {"perm_gens": [[1, 0, 2], [1, 2, 0]], "degree": 3}, "Z2": {"table": [[0, 1], [1, 0]]}},
        "graph": {"vertices": [{"id": "a", "group": "S3"}, {"id": "b", "group": "S3"}], "edges": [{"id": "e", "from": "a", "to": "b", "group": "Z2", "mono_from": [0, 1], "mono_to": [0, 1]}]},
    }
    g = from_json(doc)
    assert g.group(0).order == 6
    assert not g.validate()


def _amalgam(alpha, omega, G=None, H=None):
    G = G or symmetric(3)
    H = H or symmetric(3)
    z2 = cyclic(2)
    return GraphOfGroups((Vertex("a", G), Vertex("b", H)), (Edge("e", 0, 1, z2, GroupMono(z2, G, alpha), GroupMono(z2, H, omega)),), 0)


def test_validation_catches_bad_monos():
    assert any("injective" in d for d in _amalgam((0, 0), (0, 1)).validate())
    s3 = symmetric(3)
    rot = next(x for x in range(6) if s3.element_order(x) == 3)
    assert any("homomorphism" in d for d in _amalgam((0, rot), (0, 1)).validate())
    with pytest.raises(GraphError):
        _amalgam((0, 0), (0, 1)).check()


def test_validation_catches_disconnected_graph():
    g = GraphOfGroups((Vertex("a", cyclic(2)), Vertex("b", cyclic(2))), (), 0)
    assert any("connected" in d for d in g.validate())


@pytest.mark.parametrize("bad", [{}, {"groups": {}}, {"groups": {"G": {"table": [[0]]}}, "graph": {"vertices": [{"id": "a", "group": "H"}]}}])
def test_malformed_documents(bad):
    with pytest.raises((GraphError, ValueError)):
        from_json(bad).check()


def test_presentation_size_gl2z():
    g = load("gl2z")
    pres = g.presentation()
    # multiplication tables of D4 and D6, three nontrivial edge relations, one tree letter
    assert len(pres.relators) == 7 * 7 + 11 * 11 + 3 + 1
    assert len(pres.generators) == 7 + 11 + 1


@pytest.mark.parametrize("name", NAMES)
def test_relators_are_trivial(name):
    g = load(name)
    for r in g.presentation().relators:
        assert is_identity(normal_form(realize(g, r)))


def test_spanning_tree_is_deterministic():
    g = load("cohopfoutinfini")
    assert g.spanning_tree == frozenset({0, 1})
    assert load("gl2z-hnn").spanning_tree == frozenset({0})


def test_delta_e_kinds():
    assert isinstance(delta_e(load("gl2z"), "e"), AmalgamSplitting)
    sp = delta_e(load("gl2z-hnn"), "t")
    assert isinstance(sp, HNNSplitting)
    assert len(sp.A.edges) == 1


def test_delta_k_collapses_large_edges():
    g = load("cohopfoutinfini")
    cg = delta_k(g, 2)
    assert len(cg.composites) == 2
    assert [ce.edge for ce in cg.edges] == [0]
    assert cg.expand().vertices == g.vertices


def test_collapse_expand_round_trip(rng):
    for _ in range(30):
        g = random_gog(rng)
        E0 = [i for i in range(len(g.edges)) if rng.random() < 0.5]
        back = collapse(g, E0).expand()
        assert to_json(back) == to_json(g)


def test_reduce_contracts_surjective_edges():
    s3 = symmetric(3)
    z2 = cyclic(2)
    t = next(x for x in range(6) if s3.element_order(x) == 2)
    # a -- Z2 -- b(Z2) -- Z2 -- c: the middle vertex is absorbed
    g = GraphOfGroups(
        (Vertex("a", s3), Vertex("b", z2), Vertex("c", symmetric(3))),
        (Edge("e", 0, 1, z2, GroupMono(z2, s3, (0, t)), GroupMono(z2, z2, (0, 1))), Edge("f", 1, 2, z2, GroupMono(z2, z2, (0, 1)), GroupMono(z2, symmetric(3), (0, t)))),
        0,
    )
    red, fwds, bwds = g.reduce_with_maps()
    assert red.is_reduced()
    assert len(red.vertices) == 2 and len(red.edges) == 1
    rng_ = random.Random(5)
    for _ in range(200):
        w = random_word(g, rng_.randint(0, 6), rng_)
        u = w
        for f in fwds:
            u = substitute(f, u)
        for b in reversed(bwds):
            u = substitute(b, u)
        assert key(normal_form(u)) == key(normal_form(w))


@settings(max_examples=60)
@given(st.integers(0, 10_000))
def test_reduction_preserves_the_word_problem(seed):
    rng_ = random.Random(seed)
    g = random_gog(rng_)
    red, fwds, bwds = g.reduce_with_maps()
    for w in generator_words(g)[:6]:
        u = w
        for f in fwds:
            u = substitute(f, u)
        for b in reversed(bwds):
            u = substitute(b, u)
        assert key(normal_form(u)) == key(normal_form(w))


def test_load_doc_carries_extras():
    assert "to_z12" in load_doc("sl2z")["homs"]
    assert "relator" in load_doc("gl2z")["words"]
