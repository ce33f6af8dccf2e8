"""Random graphs of finite groups for property tests and stress runs."""

from __future__ import annotations

import random

from .fingroup import (
    FiniteGroup,
    GroupMono,
    all_subgroups,
    alternating4,
    cyclic,
    dihedral,
    direct_product,
    embeddings,
    quaternion,
    symmetric,
)
from .gog import Edge, GraphOfGroups, Vertex


def small_groups(max_order: int = 12) -> list[FiniteGroup]:
    """A fixed battery of groups of order at most ``max_order``."""
    cands = [cyclic(n) for n in range(1, 13)]
    cands += [
        direct_product(cyclic(2), cyclic(2)),
        symmetric(3),
        dihedral(4),
        quaternion(),
        direct_product(cyclic(2), cyclic(4)),
        direct_product(direct_product(cyclic(2), cyclic(2)), cyclic(2)),
        direct_product(cyclic(3), cyclic(3)),
        dihedral(5),
        dihedral(6),
        alternating4(),
        direct_product(cyclic(2), cyclic(6)),
    ]
    cands += [
        dihedral(8),
        direct_product(cyclic(2), dihedral(4)),
        direct_product(cyclic(4), cyclic(4)),
        direct_product(cyclic(2), quaternion()),
        cyclic(16),
        dihedral(7),
        cyclic(14),
        cyclic(15),
        cyclic(13),
    ]
    return [g for g in cands if g.order <= max_order]


def _edge_between(rng: random.Random, A: FiniteGroup, B: FiniteGroup, tries: int = 12):
    """A random subgroup of A together with an embedding into B, or None."""
    subs = all_subgroups(A)
    for _ in range(tries):
        H = rng.choice(subs)
        C, into_a = H.as_group()
        embs = embeddings(C, B)
        if embs:
            return C, into_a, GroupMono(C, B, rng.choice(embs))
    return None


def random_gog(rng: random.Random, max_vertices: int = 3, max_order: int = 12, max_edges: int = 3, loops: bool = True) -> GraphOfGroups:
    """Connected graph of groups: random tree plus up to ``max_edges`` edges in total."""
    battery = small_groups(max_order)
    while True:
        nv = rng.randint(1, max_vertices)
        groups = [rng.choice(battery) for _ in range(nv)]
        # copies, so vertex groups are distinct objects even when repeated
        groups = [FiniteGroup(g.table, g.name) for g in groups]
        verts = tuple(Vertex(f"v{i}", g) for i, g in enumerate(groups))
        pairs = [(rng.randrange(i), i) for i in range(1, nv)]
        extra = rng.randint(0, max(0, max_edges - len(pairs))) if loops else 0
        for _ in range(extra):
            pairs.append((rng.randrange(nv), rng.randrange(nv)))
        if not pairs and nv == 1 and rng.random() < 0.5:
            pairs.append((0, 0))
        edges = []
        ok = True
        for k, (a, b) in enumerate(pairs):
            if rng.random() < 0.5:
                a, b = b, a
            made = _edge_between(rng, groups[a], groups[b])
            if made is None:
                ok = False
                break
            C, ia, ib = made
            edges.append(Edge(f"e{k}", a, b, C, ia, ib))
        if ok:
            return GraphOfGroups(verts, tuple(edges), 0, "random")
