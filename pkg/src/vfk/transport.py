"""Finite subgroups of pi_1 through their action on the Bass-Serre tree.

Every finite subgroup is conjugate into a vertex group, so it can be recorded
as an anchor ``(vertex, subgroup of G_vertex, conjugator path)``.  Moving an
anchored subgroup across an edge whose image contains it, or conjugating it
inside the current vertex group, walks through the tree while keeping the
subgroup fixed.  Everything below is built from these two moves.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import networkx as nx

from . import fingroup as fg
from .config import CapExceeded, caps
from .gog import GraphOfGroups, rev
from .words import (
    INFINITE,
    PathWord,
    SubgroupAnchor,
    anchor_elements,
    conjugate,
    element_order,
    enumerate_normal_forms,
    format_word,
    identity,
    inverse,
    key,
    letter,
    mul,
    normal_form,
    tree_path,
)


def anchor_at(gog: GraphOfGroups, v: int | str, elements: Sequence[int]) -> SubgroupAnchor:
    """Anchor a subgroup of G_v, conjugated into pi_1 along the spanning tree."""
    if isinstance(v, str):
        v = gog.vindex[v]
    els = tuple(sorted(set(elements)))
    if fg._closure(gog.group(v), els) != frozenset(els):
        raise ValueError("anchor elements do not form a subgroup")
    return SubgroupAnchor(gog, v, els, tree_path(gog, v))


def vertex_group_anchor(gog: GraphOfGroups, v: int | str) -> SubgroupAnchor:
    if isinstance(v, str):
        v = gog.vindex[v]
    return anchor_at(gog, v, range(gog.group(v).order))


def edge_anchor(gog: GraphOfGroups, e: int | str, side: str = "origin") -> SubgroupAnchor:
    if isinstance(e, str):
        e = gog.eindex[e]
    x = 2 * e if side == "origin" else 2 * e + 1
    return anchor_at(gog, gog.start(x), gog.image(x))


def _path_from(gog: GraphOfGroups, v: int, steps: Sequence[tuple[int, int]]) -> PathWord:
    """The path ``h1 y1 h2 y2 ...`` starting at v."""
    elems = tuple(h for h, _ in steps) + (0,)
    return PathWord(gog, v, elems, tuple(y for _, y in steps))


def _conj_set(G: fg.FiniteGroup, a: int, elems) -> tuple[int, ...]:
    """``a^-1 E a`` as a sorted tuple."""
    ai = G.inv(a)
    t = G.table
    return tuple(sorted(t[t[ai][x]][a] for x in elems))


# --------------------------------------------------------------- transport graph


@dataclass
class TransportGraph:
    gog: GraphOfGroups
    vertex_classes: list[list[list[tuple[int, ...]]]]  # per vertex: conjugacy classes of subgroups
    lookup: list[dict[tuple[int, ...], int]]  # per vertex: subgroup -> class index
    arcs: list[tuple[tuple[int, int], tuple[int, int], int, tuple[int, ...]]]  # (node, node, edge, K)
    component: dict[tuple[int, int], int]  # node -> G-class id
    classes: list["FiniteClass"]

    def class_of(self, anchor: SubgroupAnchor) -> int:
        return self.component[(anchor.vertex, self.lookup[anchor.vertex][anchor.elements])]

    def node_of(self, v: int, elements) -> tuple[int, int]:
        return (v, self.lookup[v][tuple(sorted(elements))])


@dataclass(frozen=True)
class FiniteClass:
    index: int
    order: int
    rep: SubgroupAnchor
    nodes: tuple[tuple[int, int], ...]

    def describe(self) -> dict:
        d = self.rep.describe()
        d["class"] = self.index
        return d


_TG_CACHE: dict[int, tuple[GraphOfGroups, TransportGraph]] = {}


def build_transport_graph(gog: GraphOfGroups) -> TransportGraph:
    hit = _TG_CACHE.get(id(gog))
    if hit is not None and hit[0] is gog:
        return hit[1]
    vclasses = [fg.subgroup_classes(v.group) for v in gog.vertices]
    lookup = []
    for cls in vclasses:
        d = {}
        for i, c in enumerate(cls):
            for s in c:
                d[s] = i
        lookup.append(d)
    arcs = []
    ug = nx.Graph()
    for v, cls in enumerate(vclasses):
        ug.add_nodes_from((v, i) for i in range(len(cls)))
    for ei, e in enumerate(gog.edges):
        for K in fg._all_subgroups(e.group):
            a = (e.origin, lookup[e.origin][tuple(sorted(e.alpha.map[k] for k in K))])
            b = (e.terminus, lookup[e.terminus][tuple(sorted(e.omega.map[k] for k in K))])
            arcs.append((a, b, ei, K))
            ug.add_edge(a, b)
    comps = []
    for comp in nx.connected_components(ug):
        nodes = sorted(comp)
        # canonical representative: least (vertex, element set)
        rep_v, rep_c = min(nodes, key=lambda n: (n[0], vclasses[n[0]][n[1]][0]))
        rep_els = vclasses[rep_v][rep_c][0]
        comps.append((len(rep_els), rep_v, rep_els, tuple(nodes)))
    comps.sort()
    component = {}
    classes = []
    for i, (order, v, els, nodes) in enumerate(comps):
        for n in nodes:
            component[n] = i
        classes.append(FiniteClass(i, order, SubgroupAnchor(gog, v, els, tree_path(gog, v)), nodes))
    tg = TransportGraph(gog, vclasses, lookup, arcs, component, classes)
    _TG_CACHE[id(gog)] = (gog, tg)
    return tg


def finite_classes(gog: GraphOfGroups) -> list[FiniteClass]:
    return build_transport_graph(gog).classes


def conjugacy_class_of(anchor: SubgroupAnchor) -> int:
    return build_transport_graph(anchor.gog).class_of(anchor)


# ---------------------------------------------------------------- conjugator search


def _search(gog: GraphOfGroups, v1: int, O1: tuple, v2: int, O2: tuple, pointed: bool) -> PathWord | None:
    """A path p from v1 to v2 with ``p^-1 O1 p = O2`` (element-wise when pointed)."""

    def canon(t):
        return tuple(t) if pointed else tuple(sorted(t))

    start = (v1, canon(O1))
    goal = (v2, canon(O2))
    parent: dict = {start: None}
    queue = deque([start])
    while queue:
        st = queue.popleft()
        if st == goal:
            break
        w, O = st
        G = gog.group(w)
        t = G.table
        for a in range(1, G.order):
            ai = G.inv(a)
            nO = canon(t[t[ai][x]][a] for x in O)
            ns = (w, nO)
            if ns not in parent:
                parent[ns] = (st, "c", a)
                queue.append(ns)
        for x in gog.traversals_from[w]:
            img = gog.image(x)
            if all(o in img for o in O):
                tr = gog.transport(x)
                ns = (gog.end(x), canon(tr[o] for o in O))
                if ns not in parent:
                    parent[ns] = (st, "x", x)
                    queue.append(ns)
    if goal not in parent:
        return None
    moves = []
    st = goal
    while parent[st] is not None:
        prev, kind, val = parent[st]
        moves.append((kind, val))
        st = prev
    moves.reverse()
    elems = [0]
    travs = []
    for kind, val in moves:
        if kind == "c":
            cur = gog.group(gog.end(travs[-1]) if travs else v1)
            elems[-1] = cur.table[elems[-1]][val]
        else:
            travs.append(val)
            elems.append(0)
    return PathWord(gog, v1, tuple(elems), tuple(travs))


def conjugator_between(a1: SubgroupAnchor, a2: SubgroupAnchor) -> PathWord | None:
    """g with ``g A1 g^-1 = A2`` as subgroups of pi_1, or None."""
    if a1.order != a2.order:
        return None
    p = _search(a1.gog, a1.vertex, a1.elements, a2.vertex, a2.elements, pointed=False)
    if p is None:
        return None
    return normal_form(mul(mul(a2.conjugator, inverse(p)), inverse(a1.conjugator)))


def pointed_conjugacy(images1: Sequence[PathWord], images2: Sequence[PathWord]) -> PathWord | None:
    """g' with ``images2[i] = g' images1[i] g'^-1`` for every i, or None.

    Both lists are the images of one fixed list of elements of a finite group,
    so they generate finite subgroups of the target.
    """
    if len(images1) != len(images2):
        raise ValueError("image lists differ in length")
    if not images1:
        raise ValueError("pointed conjugacy needs at least one element")
    gog = images1[0].gog
    an1, m1 = anchor_elements(images1)
    an2, m2 = anchor_elements(images2)
    e1 = tuple(m1[key(w)] for w in images1)
    e2 = tuple(m2[key(w)] for w in images2)
    p = _search(gog, an1.vertex, e1, an2.vertex, e2, pointed=True)
    if p is None:
        return None
    return normal_form(mul(mul(an2.conjugator, inverse(p)), inverse(an1.conjugator)))


# ---------------------------------------------------------------- fixed subtrees


@dataclass
class FixSubtree:
    """The subtree fixed pointwise by an anchored finite subgroup.

    ``complete``: finite; ``vertices`` holds a path to every fixed vertex.
    ``pumped``: infinite; ``witness`` is a hyperbolic element normalizing the subgroup.
    ``capped``: the exploration budget ran out.
    """

    anchor: SubgroupAnchor
    status: str
    states: int
    vertices: list[PathWord] = field(default_factory=list)
    tree_edges: list[tuple[int, int]] = field(default_factory=list)
    witness: PathWord | None = None
    center: int | None = None
    diameter: int | None = None

    def describe(self) -> dict:
        d = {"status": self.status, "states": self.states}
        if self.status == "complete":
            d["fixed_vertices"] = len(self.vertices)
            d["diameter"] = self.diameter
        if self.witness is not None:
            d["witness"] = format_word(self.witness)
        return d


def _state_cap(gog: GraphOfGroups) -> int:
    c = caps().fix_states
    if c:
        return c
    total = 0
    for v, vert in enumerate(gog.vertices):
        total += len(fg._all_subgroups(vert.group)) * (len(gog.traversals_from[v]) + 1)
    return 4 * total


def _children(gog: GraphOfGroups, w: int, D: tuple[int, ...], incoming: int | None):
    """Fixed edges leaving the fixed vertex with state (w, D): (y, h, child state)."""
    G = gog.group(w)
    out = []
    for y in gog.traversals_from[w]:
        img = gog.image(y)
        tr = gog.transport(y)
        for h in gog.coset_reps(y):
            if incoming is not None and y == rev(incoming) and h == 0:
                continue
            hD = _conj_set(G, h, D)
            if all(x in img for x in hD):
                out.append((y, h, (gog.end(y), tuple(sorted(tr[x] for x in hD)), y)))
    return out


def _key_graph(anchor: SubgroupAnchor, cap: int):
    gog = anchor.gog
    root = (anchor.vertex, anchor.elements, None)
    adj: dict = {}
    pred: dict = {root: None}
    queue = deque([root])
    while queue:
        k = queue.popleft()
        if len(adj) >= cap:
            return root, adj, pred, True
        ch = _children(gog, k[0], k[1], k[2])
        adj[k] = ch
        for y, h, c in ch:
            if c not in pred:
                pred[c] = (k, y, h)
                queue.append(c)
    return root, adj, pred, False


def _steps_to(pred, k) -> list[tuple[int, int]]:
    steps = []
    while pred[k] is not None:
        k, y, h = pred[k]
        steps.append((h, y))
    steps.reverse()
    return steps


def _pump(anchor: SubgroupAnchor, root, adj, pred, small=None) -> PathWord | None:
    """A hyperbolic normalizer from a cycle in the state graph, or None without cycles.

    With ``small`` (a predicate on traversals), the cycle must use an arc
    crossing an edge for which the predicate holds.
    """
    dg = nx.DiGraph()
    dg.add_nodes_from(adj)
    labels: dict = {}
    for k, ch in adj.items():
        for y, h, c in ch:
            if c in adj:
                dg.add_edge(k, c)
                labels.setdefault((k, c), []).append((h, y))
    for comp in sorted(nx.strongly_connected_components(dg), key=lambda s: min(map(repr, s))):
        inside = set(comp)
        cands = []
        for (u, c), labs in labels.items():
            if u in inside and c in inside:
                for lab in labs:
                    if small is None or small(lab[1]):
                        cands.append((repr(u), repr(c), lab, u, c))
        if not cands:
            continue
        _, _, lab, u, c = min(cands, key=lambda t: (t[0], t[1], t[2]))
        back = nx.shortest_path(dg.subgraph(inside), c, u) if c != u else [u]
        cycle = [lab]
        for a, b in zip(back, back[1:]):
            cycle.append(min(labels[(a, b)]))
        gog = anchor.gog
        lead = mul(anchor.conjugator, _path_from(gog, root[0], _steps_to(pred, u)))
        loop = _path_from(gog, u[0], cycle)
        return conjugate(lead, loop)
    return None


def _verify_normalizes(anchor: SubgroupAnchor, g: PathWord) -> bool:
    els = {key(w) for w in anchor.words()}
    return all(key(conjugate(g, w)) in els for w in anchor.words())


def fix_subtree(anchor: SubgroupAnchor, cap: int | None = None) -> FixSubtree:
    gog = anchor.gog
    cap = cap or _state_cap(gog)
    root, adj, pred, capped = _key_graph(anchor, cap)
    if capped:
        return FixSubtree(anchor, "capped", len(adj))
    g = _pump(anchor, root, adj, pred)
    if g is not None:
        if element_order(g) != INFINITE or not _verify_normalizes(anchor, g):
            raise AssertionError("pumping produced an invalid witness")
        return FixSubtree(anchor, "pumped", len(adj), witness=g)
    # finite: unfold the state graph into the actual fixed subtree
    limit = caps().closure
    verts = [(root, [])]
    tree_edges = []
    i = 0
    while i < len(verts):
        k, steps = verts[i]
        for y, h, c in adj[k]:
            tree_edges.append((i, len(verts)))
            verts.append((c, steps + [(h, y)]))
            if len(verts) > limit:
                return FixSubtree(anchor, "capped", len(adj))
        i += 1
    t = nx.Graph()
    t.add_nodes_from(range(len(verts)))
    t.add_edges_from(tree_edges)
    center, diam = _tree_center(t)
    paths = [mul(anchor.conjugator, _path_from(gog, root[0], s)) for _, s in verts]
    return FixSubtree(anchor, "complete", len(adj), paths, tree_edges, None, center, diam)


def _tree_center(t: nx.Graph) -> tuple[int, int]:
    """A center vertex (lowest index endpoint when the center is an edge) and the diameter."""
    if t.number_of_nodes() == 1:
        return 0, 0
    far = lambda s: max(nx.single_source_shortest_path_length(t, s).items(), key=lambda kv: (kv[1], -kv[0]))
    a, _ = far(0)
    b, d = far(a)
    path = nx.shortest_path(t, a, b)
    mid = path[d // 2] if d % 2 == 0 else min(path[d // 2], path[d // 2 + 1])
    return mid, d


def states_of(anchor: SubgroupAnchor) -> dict[tuple[int, tuple[int, ...]], PathWord]:
    """Every (vertex, transported subgroup) state reachable in Fix, with a path."""
    gog = anchor.gog
    start = (anchor.vertex, anchor.elements)
    seen = {start: identity(gog, anchor.vertex)}
    queue = deque([start])
    while queue:
        w, D = queue.popleft()
        p = seen[(w, D)]
        for y, h, c in _children(gog, w, D, None):
            s = (c[0], c[1])
            if s not in seen:
                seen[s] = mul(p, PathWord(gog, w, (h, 0), (y,)))
                queue.append(s)
    return seen


# --------------------------------------------------------------------- normalizers


@dataclass
class NormalizerResult:
    status: str  # "finite" | "infinite" | "unknown"
    anchor: SubgroupAnchor | None = None  # the normalizer itself, when finite
    witness: PathWord | None = None
    fix: FixSubtree | None = None

    @property
    def order(self) -> int | float | None:
        if self.status == "finite":
            return self.anchor.order
        if self.status == "infinite":
            return INFINITE
        return None

    def describe(self) -> dict:
        d = {"status": self.status}
        if self.anchor is not None:
            d["order"] = self.anchor.order
            d["normalizer"] = self.anchor.describe()
        if self.witness is not None:
            d["witness"] = format_word(self.witness)
        return d


def normalizer_in_G(anchor: SubgroupAnchor, cap: int | None = None) -> NormalizerResult:
    fix = fix_subtree(anchor, cap)
    if fix.status == "pumped":
        return NormalizerResult("infinite", witness=fix.witness, fix=fix)
    if fix.status == "capped":
        return NormalizerResult("unknown", fix=fix)
    gog = anchor.gog
    z = fix.vertices[fix.center]
    # the state at the center: the transported subgroup D_z inside G_w
    inner = [normal_form(mul(mul(inverse(z), w), z)) for w in anchor.words()]
    if any(w.travs for w in inner):
        raise AssertionError("center vertex not fixed")
    wv = inner[0].base
    Dz = sorted({w.elems[0] for w in inner})
    N = fg.normalizer(gog.group(wv), Dz)
    zn = normal_form(z)
    return NormalizerResult("finite", anchor=SubgroupAnchor(gog, wv, N.elements, zn), fix=fix)


def is_maximal_finite(anchor: SubgroupAnchor) -> bool:
    return finite_proper_overgroup(anchor) is None


def finite_proper_overgroup(anchor: SubgroupAnchor) -> SubgroupAnchor | None:
    """A vertex stabilizer properly containing the anchored subgroup, if one exists."""
    gog = anchor.gog
    for (w, D), p in sorted(states_of(anchor).items(), key=lambda kv: (kv[0][0], len(kv[0][1]), kv[0][1])):
        if len(D) < gog.group(w).order:
            return SubgroupAnchor(gog, w, tuple(range(gog.group(w).order)), normal_form(mul(anchor.conjugator, p)))
    return None


def maximal_finite_classes(gog: GraphOfGroups) -> list[FiniteClass]:
    return [c for c in finite_classes(gog) if is_maximal_finite(c.rep)]


def maximality_counterexamples(anchor: SubgroupAnchor, radius: int = 4) -> list[PathWord]:
    """Finite-order g outside A (Britton length <= radius) with g*a finite for every a in A.

    For a maximal finite subgroup A none should exist.
    """
    gog = anchor.gog
    A = anchor.words()
    Akeys = {key(a) for a in A}
    bad = []
    for g in enumerate_normal_forms(gog, radius):
        if key(g) in Akeys or element_order(g) == INFINITE:
            continue
        if all(element_order(mul(g, a)) != INFINITE for a in A):
            bad.append(g)
    return bad


# --------------------------------------------------------------- tree of cylinders


def bounded_in_collapse(anchor: SubgroupAnchor, k: int, cap: int | None = None) -> tuple[str, PathWord | None]:
    """Is Fix(anchor) bounded once every edge of order > k is collapsed?

    Returns ("bounded", None), ("unbounded", witness) or ("unknown", None);
    the witness normalizes the subgroup and crosses an uncollapsed edge on each period.
    """
    gog = anchor.gog
    cap = cap or _state_cap(gog)
    root, adj, pred, capped = _key_graph(anchor, cap)
    if capped:
        return "unknown", None
    g = _pump(anchor, root, adj, pred, small=lambda y: gog.edges[y >> 1].group.order <= k)
    if g is None:
        return "bounded", None
    if element_order(g) != INFINITE or not _verify_normalizes(anchor, g):
        raise AssertionError("pumping produced an invalid witness")
    return "unbounded", g


@dataclass
class CylinderReport:
    k: int
    v0: list[dict]
    v1: list[dict]
    edges: list[dict]
    obstruction: dict | None
    trivial: bool

    def describe(self) -> dict:
        return {
            "k": self.k,
            "V0": self.v0,
            "V1": self.v1,
            "edges": self.edges,
            "obstruction": self.obstruction,
            "trivial": self.trivial,
        }


def tree_of_cylinders(gog: GraphOfGroups) -> CylinderReport:
    """Quotient data of the tree of cylinders of a splitting over groups of one order k."""
    orders = {e.group.order for e in gog.edges}
    if len(orders) > 1:
        raise ValueError("tree of cylinders needs all edge groups of the same order")
    if not orders:
        return CylinderReport(0, [], [], [], None, True)
    k = orders.pop()
    tg = build_transport_graph(gog)
    # cylinder orbits: G-classes of edge groups
    cyl: dict[int, SubgroupAnchor] = {}
    for ei in range(len(gog.edges)):
        a = edge_anchor(gog, ei)
        cyl.setdefault(tg.class_of(a), a)
    v1 = []
    obstruction = None
    for cid in sorted(cyl):
        res = normalizer_in_G(cyl[cid])
        entry = {"cylinder": cid, "edge_group": cyl[cid].describe(), "normalizer": res.describe()}
        v1.append(entry)
        if res.status != "finite" and obstruction is None:
            obstruction = {"cylinder": cid, "status": res.status}
            if res.witness is not None:
                obstruction["witness"] = format_word(res.witness)
    v0 = []
    edges = []
    for v, vert in enumerate(gog.vertices):
        G = vert.group
        S = set()
        for y in gog.traversals_from[v]:
            img = tuple(sorted(gog.image(y)))
            S.update(fg.conjugate_set(G, a, img) for a in range(G.order))
        if len(S) < 2:
            continue
        v0.append({"vertex": vert.id, "order": G.order, "cylinders_met": len(S)})
        done = set()
        for K in sorted(S, key=lambda s: (len(s), s)):
            if K in done:
                continue
            done.update(fg.conjugate_set(G, a, K) for a in range(G.order))
            edges.append({
                "vertex": vert.id,
                "edge_group": list(K),
                "cylinder": tg.class_of(SubgroupAnchor(gog, v, K, tree_path(gog, v))),
                "order": fg.normalizer(G, K).order,
            })
    return CylinderReport(k, v0, v1, edges, obstruction, not v0)
