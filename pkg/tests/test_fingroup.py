import itertools

import pytest
from hypothesis import given, strategies as st

from vfk import fingroup as fg
from vfk.config import CapExceeded


def brute_normalizer(G, H):
    H = set(H)
    return sorted(g for g in range(G.order) if {G.conj(g, h) for h in H} == H)


def brute_subgroups(G):
    out = set()
    for k in range(1, 3):
        for gens in itertools.combinations(range(G.order), k):
            out.add(fg.subgroup_closure(G, gens).elements)
    return out


GROUPS = [fg.cyclic(6), fg.dihedral(4), fg.dihedral(6), fg.symmetric(3), fg.quaternion(), fg.alternating4(), fg.direct_product(fg.cyclic(2), fg.cyclic(2))]


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: g.name)
def test_tables_are_groups(G):
    G.check()
    assert all(G.table[a][G.inv(a)] == 0 for a in range(G.order))


def test_cyclic_closure():
    assert fg.subgroup_closure(fg.cyclic(6), [2]).elements == (0, 2, 4)


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: g.name)
def test_normalizers_match_brute_force(G):
    for H in fg.all_subgroups(G):
        assert fg.normalizer(G, H).elements == tuple(brute_normalizer(G, H.elements))


def test_dihedral_normalizers_of_klein_subgroups():
    d4, d6 = fg.dihedral(4), fg.dihedral(6)
    assert fg.normalizer(d4, [0, 2, 4, 6]).order == 8
    assert fg.normalizer(d6, [0, 3, 6, 9]).order == 4
    assert fg.normalizer(fg.cyclic(4), [0, 2]).order == 4
    assert fg.normalizer(fg.cyclic(6), [0, 3]).order == 6


@pytest.mark.parametrize("G", GROUPS, ids=lambda g: g.name)
def test_subgroup_lattice_matches_two_generator_closures(G):
    # every group listed here has all subgroups 2-generated
    assert {H.elements for H in fg.all_subgroups(G)} == brute_subgroups(G)


@pytest.mark.parametrize(
    "G, n",
    [(fg.cyclic(12), 4), (fg.direct_product(fg.cyclic(2), fg.cyclic(2)), 6), (fg.symmetric(3), 6), (fg.dihedral(4), 8), (fg.quaternion(), 24), (fg.alternating4(), 24)],
    ids=lambda x: getattr(x, "name", str(x)),
)
def test_automorphism_group_orders(G, n):
    assert fg.automorphism_group_order(G) == n


def test_automorphism_cap(monkeypatch):
    monkeypatch.setenv("VFK_CAP_AUT", "4")
    with pytest.raises(CapExceeded):
        fg.automorphism_group_order(fg.symmetric(3))


def test_subgroup_classes_of_s4():
    # S4 has 11 conjugacy classes of subgroups
    assert len(fg.subgroup_classes(fg.symmetric(4))) == 11


def test_homomorphism_counts():
    # |Hom(Z_m, Z_n)| = gcd(m, n); Hom(S3, Z2) = trivial + sign
    assert len(fg.homomorphisms(fg.cyclic(4), fg.cyclic(6))) == 2
    assert len(fg.homomorphisms(fg.symmetric(3), fg.cyclic(2))) == 2
    assert len(fg.embeddings(fg.cyclic(2), fg.dihedral(4))) == 5


@given(st.sampled_from(GROUPS), st.lists(st.integers(0, 23), max_size=3))
def test_closure_is_a_subgroup(G, seed):
    H = fg.subgroup_closure(G, [s % G.order for s in seed])
    S = H.elementset
    assert 0 in S
    assert all(G.table[a][b] in S for a in S for b in S)


@given(st.sampled_from(GROUPS), st.data())
def test_conjugate_subgroups_detected(G, data):
    subs = fg.all_subgroups(G)
    H = data.draw(st.sampled_from(subs))
    g = data.draw(st.integers(0, G.order - 1))
    K = fg.conjugate_set(G, g, H.elements)
    c = fg.are_conjugate_subgroups(G, H.elements, K)
    assert c is not None
    assert set(fg.conjugate_set(G, c, H.elements)) == set(K)


def test_table_validation_rejects_non_groups():
    with pytest.raises(fg.GroupError):
        fg.FiniteGroup.from_table([[0, 1], [0, 1]])
