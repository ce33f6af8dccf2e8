import math
import random
from functools import cache

import pytest
from hypothesis import given, settings, strategies as st

from vfk.cohopf import (
    CO_HOPFIAN,
    NOT_CO_HOPFIAN,
    UNKNOWN,
    check_witness,
    decide_cohopf,
    fold_trace,
    hnn_witness,
    max_finite_order,
    cylinder_check,
    cylinder_summary,
)
from vfk.corpus import load, load_doc
from vfk.homs import compose, hom_from_json, identity_hom, validate_hom
from vfk.randgen import random_gog
from vfk.words import INFINITE, element_order, enumerate_normal_forms, is_identity, key, mul

graph = cache(load)

VERDICTS = {
    "gl2z": CO_HOPFIAN,
    "s4s3s4": CO_HOPFIAN,
    "cohopfoutinfini": CO_HOPFIAN,
    "sl2z": NOT_CO_HOPFIAN,
    "psl2z": NOT_CO_HOPFIAN,
    "gl2z-hnn": NOT_CO_HOPFIAN,
    "s3-hnn": NOT_CO_HOPFIAN,
    "dinf": NOT_CO_HOPFIAN,
    "z12": CO_HOPFIAN,
    "z2": CO_HOPFIAN,
}


def corpus_hom(name, hom):
    g = graph(name)
    doc = load_doc(name)["homs"][hom]
    return hom_from_json(g, graph(doc["target"]) if "target" in doc else g, doc, hom)


@pytest.mark.parametrize("name", sorted(VERDICTS))
def test_verdicts(name):
    assert decide_cohopf(graph(name)).verdict == VERDICTS[name]


def test_verdict_report_shape():
    d = decide_cohopf(graph("gl2z")).describe()
    assert d["verdict"] == CO_HOPFIAN
    (edge,) = d["edges"]
    assert edge["splitting"] == "amalgam"
    assert edge["normalizers"] == {"origin_side": 8, "terminus_side": 4}
    assert edge["holds"] is True


def test_sl2z_edge_normalizers():
    (edge,) = decide_cohopf(graph("sl2z")).edges
    # the central Z/2 is normal on both sides
    assert edge.normalizers == {"origin_side": 4, "terminus_side": 6}
    assert edge.holds is False


def test_reduction_is_reported():
    v = decide_cohopf(graph("s4s3s4"))
    assert v.contracted == 0
    assert len(v.reduced.edges) == 1


@pytest.mark.parametrize("name", ["gl2z-hnn", "s3-hnn"])
def test_hnn_witness_small_radius(name):
    v = decide_cohopf(graph(name))
    assert v.witness is not None
    assert validate_hom(v.witness) is None
    w = hnn_witness(graph(name), v.witness_edge)
    chk = check_witness(w, 3, 4)
    assert chk.ok, chk


def test_witness_is_not_the_identity():
    w = hnn_witness(graph("s3-hnn"), "t")
    assert any(key(a) != key(b) for a, b in zip(w.hom.images, identity_hom(graph("s3-hnn")).images))
    assert element_order(w.stable) == INFINITE


def test_witness_needs_a_loop_edge():
    with pytest.raises(ValueError):
        hnn_witness(graph("gl2z"), "e")


def test_without_witness():
    assert decide_cohopf(graph("s3-hnn"), with_witness=False).witness is None


# ------------------------------------------------------------- cylinder cross-check


@pytest.mark.parametrize("name", sorted(VERDICTS))
def test_cylinder_summary_agrees_on_corpus(name):
    summary = cylinder_summary(cylinder_check(graph(name)))
    assert summary == ("bounded" if VERDICTS[name] == CO_HOPFIAN else "unbounded")


def test_unbounded_strata_carry_witnesses():
    for name in ("sl2z", "psl2z", "s3-hnn"):
        for rep in cylinder_check(graph(name)):
            for e, status in rep.edges.items():
                if status == "unbounded":
                    assert e in rep.witnesses


def consistent(g):
    v = decide_cohopf(g, with_witness=False).verdict
    m = cylinder_summary(cylinder_check(g))
    if UNKNOWN in (v, m):
        return True
    return (v == CO_HOPFIAN) == (m == "bounded")


@settings(max_examples=60)
@given(st.integers(0, 10**7))
def test_random_graphs_consistent(seed):
    assert consistent(random_gog(random.Random(seed)))


# ------------------------------------------------------------- fold traces


def order_by_multiplying(w, bound):
    x = w
    for n in range(1, bound + 1):
        if is_identity(x):
            return n
        x = mul(x, w)
    return INFINITE


@pytest.mark.parametrize("name,hom", [("sl2z", "to_z12"), ("psl2z", "kill_y")])
def test_fold_certificates(name, hom):
    phi = corpus_hom(name, hom)
    tr = fold_trace(phi)
    assert tr.terminal == "infinite-vertex-group"
    u = tr.certificate
    assert element_order(u) == INFINITE
    N = max_finite_order(phi.target)
    assert tr.exponent_base == N
    o = order_by_multiplying(phi.apply(u), N)
    assert o != INFINITE and math.factorial(N) % o == 0
    assert tr.image_order == o


def test_kill_y_has_finite_kernel_element():
    tr = fold_trace(corpus_hom("psl2z", "kill_y"))
    assert tr.kernel_element is not None
    assert is_identity(corpus_hom("psl2z", "kill_y").apply(tr.kernel_element))


@pytest.mark.parametrize("name", ["gl2z", "psl2z", "s3-hnn", "s4s3s4"])
def test_identity_folds_to_isometry(name):
    tr = fold_trace(identity_hom(graph(name)))
    assert tr.terminal == "isometry"
    assert tr.moves == []
    assert tr.injective_on_trace


@pytest.mark.parametrize("name,hom", [("cohopfoutinfini", "twist"), ("s3-hnn", "hnn_witness"), ("gl2z-hnn", "hnn_witness")])
def test_injective_homs_fold_to_isometry(name, hom):
    tr = fold_trace(corpus_hom(name, hom))
    assert tr.terminal == "isometry" and tr.injective_on_trace


def test_fold_cap():
    tr = fold_trace(corpus_hom("cohopfoutinfini", "twist"), max_steps=1)
    assert tr.terminal == "capped"


def test_fold_trace_describe():
    d = fold_trace(corpus_hom("sl2z", "to_z12")).describe()
    assert d["certificate"] == "u:1 . e+ . w:1 . e-"
    assert d["exponent"] == "12!"
    assert d["moves"][0]["move"] == "collapse"


def test_certificate_stays_valid_after_composition():
    # a non-injective map stays non-injective after an automorphism in front
    phi = compose(corpus_hom("sl2z", "to_z12"), identity_hom(graph("sl2z")))
    tr = fold_trace(phi)
    assert tr.certificate is not None
    assert element_order(tr.certificate) == INFINITE


@pytest.mark.parametrize("name", ["sl2z", "psl2z"])
def test_enumerated_normal_forms_are_distinct(name):
    # the witness injectivity check relies on this
    g = graph(name)
    ks = [key(w) for w in enumerate_normal_forms(g, 3)]
    assert len(ks) == len(set(ks))
