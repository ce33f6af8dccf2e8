"""Bundled example graphs of groups.

The JSON files next to this module are generated by ``scripts/build_corpus.py``
from the builders below.  ``load`` reads the JSON, so the files are what the
CLI and the tests actually exercise.
"""

from __future__ import annotations

import json
from importlib import resources

from ..fingroup import (
    FiniteGroup,
    GroupMono,
    cyclic,
    dihedral,
    direct_product,
    extend_hom,
    find_element,
    symmetric,
)
from ..gog import Edge, GraphOfGroups, Vertex, from_json

NAMES = ("gl2z", "sl2z", "psl2z", "s4s3s4", "cohopfoutinfini", "gl2z-hnn", "s3-hnn", "z12", "z2", "dinf")


def _mono(src: FiniteGroup, dst: FiniteGroup, gens, images) -> GroupMono:
    m = extend_hom(src, dst, gens, images)
    if m is None:
        raise ValueError("generator images do not define a homomorphism")
    return GroupMono(src, dst, m)


def _v4() -> FiniteGroup:
    g = direct_product(cyclic(2), cyclic(2))
    return FiniteGroup(g.table, "D2")


def gl2z() -> GraphOfGroups:
    # D2 = <z, s> with z = (1,0) = 2 and s = (0,1) = 1
    d4, d6, d2 = dihedral(4), dihedral(6), _v4()
    alpha = _mono(d2, d4, [2, 1], [2, 4])  # z -> r^2, s -> s
    omega = _mono(d2, d6, [2, 1], [3, 6])  # z -> r^3, s -> s
    return GraphOfGroups(
        (Vertex("u", d4), Vertex("w", d6)),
        (Edge("e", 0, 1, d2, alpha, omega),),
        0,
        "gl2z",
    )


def gl2z_hnn() -> GraphOfGroups:
    g = gl2z()
    d4 = g.group(0)
    d2 = g.edges[0].group
    alpha = g.edges[0].alpha
    loop = Edge("t", 0, 0, d2, alpha, GroupMono(d2, d4, alpha.map))
    return g.replace(edges=list(g.edges) + [loop], name="gl2z-hnn")


def sl2z() -> GraphOfGroups:
    z4, z6, z2 = cyclic(4), cyclic(6), cyclic(2)
    return GraphOfGroups(
        (Vertex("u", z4), Vertex("w", z6)),
        (Edge("e", 0, 1, z2, GroupMono(z2, z4, (0, 2)), GroupMono(z2, z6, (0, 3))),),
        0,
        "sl2z",
    )


def psl2z() -> GraphOfGroups:
    z3a, z3b, z1 = cyclic(3), cyclic(3), cyclic(1)
    return GraphOfGroups(
        (Vertex("u", z3a), Vertex("w", z3b)),
        (Edge("e", 0, 1, z1, GroupMono(z1, z3a, (0,)), GroupMono(z1, z3b, (0,))),),
        0,
        "psl2z",
    )


def dinf() -> GraphOfGroups:
    a, b, z1 = cyclic(2), cyclic(2), cyclic(1)
    return GraphOfGroups(
        (Vertex("u", a), Vertex("w", b)),
        (Edge("e", 0, 1, z1, GroupMono(z1, a, (0,)), GroupMono(z1, b, (0,))),),
        0,
        "dinf",
    )


def s4s3s4() -> GraphOfGroups:
    s4a, s4b, s3 = symmetric(4), symmetric(4), symmetric(3)
    # S3 as the stabilizer of the point 3
    def into(s4):
        return GroupMono(s3, s4, tuple(s4.index_of_perm(tuple(p) + (3,)) for p in s3.perms))

    return GraphOfGroups(
        (Vertex("u", s4a), Vertex("w", s4b)),
        (Edge("e", 0, 1, s3, into(s4a), into(s4b)),),
        0,
        "s4s3s4",
    )


def cohopfoutinfini() -> GraphOfGroups:
    """A = S3, joined over <a> to <a> x B, which is joined over <a> x <b=c> to <a> x C."""
    s3 = symmetric(3)
    a = s3.index_of_perm((1, 0, 2))
    A = FiniteGroup(s3.table, "S3", perms=s3.perms)
    B = direct_product(cyclic(2), s3)  # (x, y) -> 6x + y
    C = FiniteGroup(B.table, "Z2xS3'")
    z2 = cyclic(2)
    v4 = _v4()  # generators 2 = (1,0) -> central factor, 1 = (0,1) -> b / c
    e1 = Edge("e1", 0, 1, z2, GroupMono(z2, A, (0, a)), GroupMono(z2, B, (0, 6)))
    e2 = Edge("e2", 1, 2, v4, _mono(v4, B, [2, 1], [6, a]), _mono(v4, C, [2, 1], [6, a]))
    return GraphOfGroups((Vertex("A", A), Vertex("B", B), Vertex("C", C)), (e1, e2), 0, "cohopfoutinfini")


def s3_hnn() -> GraphOfGroups:
    s3 = symmetric(3)
    z2 = cyclic(2)
    t12 = s3.index_of_perm((1, 0, 2))
    t13 = s3.index_of_perm((2, 1, 0))
    return GraphOfGroups(
        (Vertex("v", s3),),
        (Edge("t", 0, 0, z2, GroupMono(z2, s3, (0, t12)), GroupMono(z2, s3, (0, t13))),),
        0,
        "s3-hnn",
    )


def single(g: FiniteGroup, vid: str = "v", name: str = "") -> GraphOfGroups:
    return GraphOfGroups((Vertex(vid, g),), (), 0, name or g.name)


def z12() -> GraphOfGroups:
    return single(cyclic(12), "z", "z12")


def z2() -> GraphOfGroups:
    return single(cyclic(2), "v", "z2")


BUILDERS = {
    "gl2z": gl2z,
    "sl2z": sl2z,
    "psl2z": psl2z,
    "s4s3s4": s4s3s4,
    "cohopfoutinfini": cohopfoutinfini,
    "gl2z-hnn": gl2z_hnn,
    "s3-hnn": s3_hnn,
    "z12": z12,
    "z2": z2,
    "dinf": dinf,
}


def load_doc(name: str) -> dict:
    return json.loads(resources.files(__name__).joinpath(f"{name}.json").read_text())


def load(name: str) -> GraphOfGroups:
    return from_json(load_doc(name), name)


__all__ = ["BUILDERS", "NAMES", "load", "load_doc", "single", "find_element"]
