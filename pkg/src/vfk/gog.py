"""Finite graphs of finite groups and the moves performed on them.

Edges carry two monomorphisms: ``alpha`` into the origin group and ``omega``
into the terminus group.  A *traversal* is an int code ``2*e`` (cross ``e``
from origin to terminus, written ``e+``) or ``2*e + 1`` (``e-``).  Crossing
``e+`` conjugates ``alpha(c)`` to ``omega(c)``: in path words the identity
``e- . alpha(c) . e+ = omega(c)`` holds.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .fingroup import FiniteGroup, GroupMono, GroupError


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Vertex:
    id: str
    group: FiniteGroup


@dataclass(frozen=True, eq=False)
class Edge:
    id: str
    origin: int
    terminus: int
    group: FiniteGroup
    alpha: GroupMono
    omega: GroupMono

    @property
    def is_loop(self) -> bool:
        return self.origin == self.terminus


def rev(x: int) -> int:
    return x ^ 1


def edge_of(x: int) -> int:
    return x >> 1


def sign_of(x: int) -> int:
    return -1 if x & 1 else 1


@dataclass(frozen=True, eq=False)
class GraphOfGroups:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    basepoint: int = 0
    name: str = ""

    # ------------------------------------------------------------- basic lookup

    @cached_property
    def vindex(self) -> dict[str, int]:
        return {v.id: i for i, v in enumerate(self.vertices)}

    @cached_property
    def eindex(self) -> dict[str, int]:
        return {e.id: i for i, e in enumerate(self.edges)}

    def group(self, v: int) -> FiniteGroup:
        return self.vertices[v].group

    def start(self, x: int) -> int:
        e = self.edges[x >> 1]
        return e.terminus if x & 1 else e.origin

    def end(self, x: int) -> int:
        e = self.edges[x >> 1]
        return e.origin if x & 1 else e.terminus

    def trav_name(self, x: int) -> str:
        return self.edges[x >> 1].id + ("-" if x & 1 else "+")

    @cached_property
    def traversals_from(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.vertices]
        for i, e in enumerate(self.edges):
            out[e.origin].append(2 * i)
            out[e.terminus].append(2 * i + 1)
        return tuple(tuple(sorted(o)) for o in out)

    @cached_property
    def _trav_data(self):
        """Per traversal: (image at start, transport dict start->end, edge mono on start side)."""
        data = []
        for e in self.edges:
            for mono_s, mono_t in ((e.alpha, e.omega), (e.omega, e.alpha)):
                transport = {mono_s.map[c]: mono_t.map[c] for c in range(e.group.order)}
                data.append((frozenset(mono_s.map), transport, mono_s))
        return tuple(data)

    def image(self, x: int) -> frozenset[int]:
        """Edge-group image at the start vertex of traversal ``x``."""
        return self._trav_data[x][0]

    def transport(self, x: int) -> dict[int, int]:
        return self._trav_data[x][1]

    @cached_property
    def _cosets(self):
        """Per traversal x: (rep, k) splitting of every g in G_start as g = rep * k, k in image."""
        out = []
        for x in range(2 * len(self.edges)):
            g = self.group(self.start(x))
            K = sorted(self.image(x))
            split = [None] * g.order
            reps = []
            for a in range(g.order):
                if split[a] is not None:
                    continue
                coset = [g.table[a][k] for k in K]
                r = min(coset)
                reps.append(r)
                rinv = g.inv(r)
                for b in coset:
                    split[b] = (r, g.table[rinv][b])
            out.append((tuple(split), tuple(sorted(reps))))
        return tuple(out)

    def coset_split(self, x: int, g: int) -> tuple[int, int]:
        return self._cosets[x][0][g]

    def coset_reps(self, x: int) -> tuple[int, ...]:
        return self._cosets[x][1]

    # --------------------------------------------------------------- spanning tree

    @cached_property
    def _bfs(self):
        parent_trav: dict[int, int] = {}
        seen = {self.basepoint}
        queue = deque([self.basepoint])
        tree: set[int] = set()
        while queue:
            v = queue.popleft()
            for x in self.traversals_from[v]:
                w = self.end(x)
                if w not in seen:
                    seen.add(w)
                    parent_trav[w] = x
                    tree.add(x >> 1)
                    queue.append(w)
        return seen, parent_trav, frozenset(tree)

    @property
    def spanning_tree(self) -> frozenset[int]:
        return self._bfs[2]

    def is_connected(self) -> bool:
        return len(self._bfs[0]) == len(self.vertices)

    @cached_property
    def tree_paths(self) -> tuple[tuple[int, ...], ...]:
        """Traversal sequence of the tree geodesic from the basepoint to each vertex."""
        _, parent, _ = self._bfs
        out = []
        for v in range(len(self.vertices)):
            path = []
            w = v
            while w != self.basepoint:
                x = parent[w]
                path.append(x)
                w = self.start(x)
            out.append(tuple(reversed(path)))
        return tuple(out)

    @cached_property
    def max_vertex_order(self) -> int:
        return max(v.group.order for v in self.vertices)

    def separates(self, e: int) -> bool:
        return not self.remove_edges([e]).is_connected()

    # ------------------------------------------------------------------ validation

    def validate(self) -> list[str]:
        diags = []
        if not self.vertices:
            return ["no vertices"]
        if not 0 <= self.basepoint < len(self.vertices):
            diags.append("basepoint out of range")
            return diags
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            diags.append("duplicate vertex id")
        eids = [e.id for e in self.edges]
        if len(set(eids)) != len(eids):
            diags.append("duplicate edge id")
        for e in self.edges:
            for label, mono, v in (("origin", e.alpha, e.origin), ("terminus", e.omega, e.terminus)):
                if mono.target is not self.vertices[v].group or mono.source is not e.group:
                    diags.append(f"edge {e.id}: {label} mono has wrong source/target")
                    continue
                for p in mono.problems():
                    diags.append(f"edge {e.id}: {p}")
        if not self.is_connected():
            diags.append("not connected")
        return diags

    def check(self) -> "GraphOfGroups":
        diags = self.validate()
        if diags:
            raise GraphError("; ".join(diags))
        return self

    # ------------------------------------------------------------------ rebuilding

    def replace(self, vertices=None, edges=None, basepoint=None, name=None) -> "GraphOfGroups":
        return GraphOfGroups(
            tuple(self.vertices if vertices is None else vertices),
            tuple(self.edges if edges is None else edges),
            self.basepoint if basepoint is None else basepoint,
            self.name if name is None else name,
        )

    def remove_edges(self, drop: Iterable[int]) -> "GraphOfGroups":
        drop = set(drop)
        return self.replace(edges=[e for i, e in enumerate(self.edges) if i not in drop])

    def induced(self, vertex_ids: Sequence[int], edge_ids: Sequence[int] | None = None, basepoint: int | None = None) -> "GraphOfGroups":
        """Sub-graph of groups on the given vertices (and edges; default all induced edges)."""
        vs = sorted(set(vertex_ids))
        pos = {v: i for i, v in enumerate(vs)}
        if edge_ids is None:
            edge_ids = [i for i, e in enumerate(self.edges) if e.origin in pos and e.terminus in pos]
        edges = []
        for i in sorted(set(edge_ids)):
            e = self.edges[i]
            edges.append(Edge(e.id, pos[e.origin], pos[e.terminus], e.group, e.alpha, e.omega))
        bp = vs[0] if basepoint is None else basepoint
        return GraphOfGroups(tuple(self.vertices[v] for v in vs), tuple(edges), pos[bp], self.name)

    def relabel(self, vmap: dict[str, str], emap: dict[str, str] | None = None) -> "GraphOfGroups":
        emap = emap or {}
        return self.replace(
            vertices=[Vertex(vmap.get(v.id, v.id), v.group) for v in self.vertices],
            edges=[Edge(emap.get(e.id, e.id), e.origin, e.terminus, e.group, e.alpha, e.omega) for e in self.edges],
        )

    def permuted(self, vorder: Sequence[int], eorder: Sequence[int]) -> "GraphOfGroups":
        """Same graph with vertices/edges listed in a different declaration order."""
        pos = {old: new for new, old in enumerate(vorder)}
        edges = []
        for i in eorder:
            e = self.edges[i]
            edges.append(Edge(e.id, pos[e.origin], pos[e.terminus], e.group, e.alpha, e.omega))
        return GraphOfGroups(tuple(self.vertices[v] for v in vorder), tuple(edges), pos[self.basepoint], self.name)

    # --------------------------------------------------------------- presentation

    @cached_property
    def generators(self) -> tuple[tuple[str, int, int], ...]:
        """Bass-Serre generators: ("v", vertex, element) for nonzero elements, then ("t", edge, 0)."""
        gens = []
        for v, vert in enumerate(self.vertices):
            gens.extend(("v", v, i) for i in range(1, vert.group.order))
        gens.extend(("t", e, 0) for e in range(len(self.edges)))
        return tuple(gens)

    @cached_property
    def generator_index(self) -> dict[tuple[str, int, int], int]:
        return {g: i for i, g in enumerate(self.generators)}

    def generator_name(self, i: int) -> str:
        kind, a, b = self.generators[i]
        if kind == "v":
            return f"{self.vertices[a].id}:{b}"
        return f"t_{self.edges[a].id}"

    @cached_property
    def generator_names(self) -> tuple[str, ...]:
        return tuple(self.generator_name(i) for i in range(len(self.generators)))

    def presentation(self) -> "Presentation":
        gi = self.generator_index

        def vl(v, a):
            return [] if a == 0 else [(gi[("v", v, a)], 1)]

        relators = []
        for v, vert in enumerate(self.vertices):
            g = vert.group
            for a in range(1, g.order):
                for b in range(1, g.order):
                    ab = g.table[a][b]
                    relators.append(vl(v, a) + vl(v, b) + [(i, -1) for i, _ in vl(v, ab)])
        for ei, e in enumerate(self.edges):
            t = gi[("t", ei, 0)]
            for c in range(1, e.group.order):
                a, w = e.alpha.map[c], e.omega.map[c]
                relators.append([(t, -1)] + vl(e.origin, a) + [(t, 1)] + [(i, -1) for i, _ in vl(e.terminus, w)])
        for ei in sorted(self.spanning_tree):
            relators.append([(gi[("t", ei, 0)], 1)])
        return Presentation(self.generator_names, tuple(tuple(r) for r in relators))

    # --------------------------------------------------------------------- moves

    def subdivide(self, e: int) -> "GraphOfGroups":
        """Split edge ``e`` through a new vertex carrying the edge group."""
        old = self.edges[e]
        mid = len(self.vertices)
        ident = GroupMono(old.group, old.group, tuple(range(old.group.order)))
        mv = Vertex(f"{old.id}_m", old.group)
        first = Edge(f"{old.id}_1", old.origin, mid, old.group, old.alpha, ident)
        second = Edge(f"{old.id}_2", mid, old.terminus, old.group, ident, old.omega)
        edges = list(self.edges[:e]) + [first, second] + list(self.edges[e + 1:])
        return self.replace(vertices=list(self.vertices) + [mv], edges=edges)

    def contractible_edge(self) -> int | None:
        """Lowest non-loop edge with at least one surjective mono."""
        for i, e in enumerate(self.edges):
            if e.is_loop:
                continue
            if e.group.order in (self.group(e.origin).order, self.group(e.terminus).order):
                return i
        return None

    def contract(self, e: int) -> tuple["GraphOfGroups", "Substitution", "Substitution"]:
        """Contract a non-loop edge with a surjective mono.

        Returns the new graph plus groupoid substitutions old->new and new->old.
        """
        ed = self.edges[e]
        if ed.is_loop:
            raise GraphError("cannot contract a loop")
        go, gt = self.group(ed.origin).order, self.group(ed.terminus).order
        n = ed.group.order
        if n == gt and (n != go or ed.terminus != self.basepoint):
            keep, gone, x_to_gone = ed.origin, ed.terminus, 2 * e
        elif n == go:
            keep, gone, x_to_gone = ed.terminus, ed.origin, 2 * e + 1
        else:
            raise GraphError("edge not contractible")
        # gone's group embeds in keep's group through the edge
        back = self.transport(rev(x_to_gone))
        emb = tuple(back[g] for g in range(self.group(gone).order))
        keep_g = self.group(keep)
        vpos = {}
        verts = []
        for i, v in enumerate(self.vertices):
            if i != gone:
                vpos[i] = len(verts)
                verts.append(v)
        vpos[gone] = vpos[keep]
        edges = []
        epos = {}
        for i, d in enumerate(self.edges):
            if i == e:
                continue
            alpha, omega = d.alpha, d.omega
            if d.origin == gone:
                alpha = GroupMono(d.group, keep_g, tuple(emb[a] for a in alpha.map))
            if d.terminus == gone:
                omega = GroupMono(d.group, keep_g, tuple(emb[a] for a in omega.map))
            epos[i] = len(edges)
            edges.append(Edge(d.id, vpos[d.origin], vpos[d.terminus], d.group, alpha, omega))
        new = GraphOfGroups(tuple(verts), tuple(edges), vpos[self.basepoint], self.name)

        fwd_v = {}
        for i, v in enumerate(self.vertices):
            for a in range(v.group.order):
                fwd_v[(i, a)] = (vpos[i], emb[a] if i == gone else a)
        fwd_t = {}
        for i in range(len(self.edges)):
            if i == e:
                fwd_t[2 * i] = fwd_t[2 * i + 1] = ()
            else:
                fwd_t[2 * i] = (2 * epos[i],)
                fwd_t[2 * i + 1] = (2 * epos[i] + 1,)
        fwd = Substitution(self, new, fwd_v, fwd_t)

        # new -> old: an edge end re-attached from `gone` to `keep` is routed through e
        to_gone = (x_to_gone,)
        from_gone = (rev(x_to_gone),)
        bwd_v = {(vpos[i], a): (i, a) for i, v in enumerate(self.vertices) if i != gone for a in range(v.group.order)}
        bwd_t = {}
        for i, d in enumerate(self.edges):
            if i == e:
                continue
            j = epos[i]
            plus = (2 * i,)
            if d.origin == gone:
                plus = to_gone + plus
            if d.terminus == gone:
                plus = plus + from_gone
            bwd_t[2 * j] = plus
            bwd_t[2 * j + 1] = tuple(rev(x) for x in reversed(plus))
        base_shift = from_gone if self.basepoint == gone else ()
        bwd = Substitution(new, self, bwd_v, bwd_t, base_prefix=base_shift)
        return new, fwd, bwd

    def reduce(self) -> "GraphOfGroups":
        return self.reduce_with_maps()[0]

    def reduce_with_maps(self) -> tuple["GraphOfGroups", list["Substitution"], list["Substitution"]]:
        g = self
        fwds, bwds = [], []
        while (e := g.contractible_edge()) is not None:
            g, f, b = g.contract(e)
            fwds.append(f)
            bwds.append(b)
        return g, fwds, bwds

    def is_reduced(self) -> bool:
        return self.contractible_edge() is None

    def edge_orders(self) -> list[int]:
        return sorted({e.group.order for e in self.edges})


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[tuple[tuple[int, int], ...], ...]

    def relator_text(self, r) -> str:
        return " ".join(self.generators[i] + ("" if s == 1 else "^-1") for i, s in r) or "1"


@dataclass(frozen=True, eq=False)
class Substitution:
    """A groupoid morphism between graphs of groups.

    Vertex elements map to vertex elements and traversals to traversal
    sequences; identity elements are implicit between consecutive traversals.
    ``base_prefix`` is prepended to images of loops at the source basepoint
    (and its inverse appended) when the basepoint moves.
    """

    source: GraphOfGroups
    target: GraphOfGroups
    vmap: dict
    tmap: dict
    base_prefix: tuple = ()


# ------------------------------------------------------------------ composites


@dataclass(frozen=True, eq=False)
class CompositeVertex:
    id: str
    members: tuple[int, ...]  # vertex indices in the parent graph
    internal_edges: tuple[int, ...]
    sub: GraphOfGroups  # the sub-graph of groups it spans; its group is pi_1(sub)

    @property
    def is_finite_vertex(self) -> bool:
        return len(self.members) == 1 and not self.internal_edges


@dataclass(frozen=True, eq=False)
class CollapsedEdge:
    edge: int  # index in parent
    origin: int  # composite index
    terminus: int
    origin_vertex: int  # parent vertex the edge attaches to, inside the composite
    terminus_vertex: int


@dataclass(frozen=True, eq=False)
class CollapsedGraph:
    parent: GraphOfGroups
    composites: tuple[CompositeVertex, ...]
    edges: tuple[CollapsedEdge, ...]

    def composite_of(self, v: int) -> int:
        for i, c in enumerate(self.composites):
            if v in c.members:
                return i
        raise KeyError(v)

    def expand(self) -> GraphOfGroups:
        """Recover the parent combinatorial data from the composites and outer edges."""
        verts: dict[int, Vertex] = {}
        edges: dict[int, Edge] = {}
        for c in self.composites:
            for local, v in enumerate(c.members):
                verts[v] = c.sub.vertices[local]
            pos = {local: v for local, v in enumerate(c.members)}
            for local_e, pe in zip(range(len(c.sub.edges)), c.internal_edges):
                d = c.sub.edges[local_e]
                edges[pe] = Edge(d.id, pos[d.origin], pos[d.terminus], d.group, d.alpha, d.omega)
        for ce in self.edges:
            d = self.parent.edges[ce.edge]
            edges[ce.edge] = Edge(d.id, ce.origin_vertex, ce.terminus_vertex, d.group, d.alpha, d.omega)
        return GraphOfGroups(
            tuple(verts[i] for i in sorted(verts)),
            tuple(edges[i] for i in sorted(edges)),
            self.parent.basepoint,
            self.parent.name,
        )


def collapse(gog: GraphOfGroups, E0: Iterable[int | str]) -> CollapsedGraph:
    E0 = {gog.eindex[e] if isinstance(e, str) else e for e in E0}
    # union-find over vertices joined by E0 edges
    parent = list(range(len(gog.vertices)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in sorted(E0):
        e = gog.edges[i]
        ra, rb = find(e.origin), find(e.terminus)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for v in range(len(gog.vertices)):
        groups.setdefault(find(v), []).append(v)
    comps = []
    cindex = {}
    for root in sorted(groups):
        members = tuple(groups[root])
        internal = tuple(i for i in sorted(E0) if find(gog.edges[i].origin) == root)
        bp = gog.basepoint if gog.basepoint in members else members[0]
        sub = gog.induced(members, internal, basepoint=bp)
        cid = gog.vertices[members[0]].id if len(members) == 1 else "{" + ",".join(gog.vertices[m].id for m in members) + "}"
        for m in members:
            cindex[m] = len(comps)
        comps.append(CompositeVertex(cid, members, internal, sub))
    outer = tuple(
        CollapsedEdge(i, cindex[e.origin], cindex[e.terminus], e.origin, e.terminus)
        for i, e in enumerate(gog.edges)
        if i not in E0
    )
    return CollapsedGraph(gog, tuple(comps), outer)


def delta_k(gog: GraphOfGroups, k: int) -> CollapsedGraph:
    return collapse(gog, [i for i, e in enumerate(gog.edges) if e.group.order > k])


@dataclass(frozen=True, eq=False)
class AmalgamSplitting:
    edge: int
    A: GraphOfGroups  # based at the origin of the edge
    B: GraphOfGroups  # based at the terminus
    C: FiniteGroup


@dataclass(frozen=True, eq=False)
class HNNSplitting:
    edge: int
    A: GraphOfGroups  # the graph minus the edge, based at its origin
    C: FiniteGroup
    terminus: int  # index of the edge terminus inside A


def delta_e(gog: GraphOfGroups, e: int | str) -> AmalgamSplitting | HNNSplitting:
    if isinstance(e, str):
        e = gog.eindex[e]
    ed = gog.edges[e]
    rest = [i for i in range(len(gog.edges)) if i != e]
    cg = collapse(gog, rest)
    if len(cg.composites) == 2:
        a = cg.composites[cg.composite_of(ed.origin)]
        b = cg.composites[cg.composite_of(ed.terminus)]
        A = gog.induced(a.members, a.internal_edges, basepoint=ed.origin)
        B = gog.induced(b.members, b.internal_edges, basepoint=ed.terminus)
        return AmalgamSplitting(e, A, B, ed.group)
    A = gog.remove_edges([e]).replace(basepoint=ed.origin)
    # after removing e, vertex indices are unchanged
    return HNNSplitting(e, A, ed.group, ed.terminus)


# -------------------------------------------------------------------- JSON I/O


def group_from_json(data: dict, name: str = "") -> FiniteGroup:
    if "table" in data:
        return FiniteGroup.from_table(data["table"], name)
    if "perm_gens" in data:
        return FiniteGroup.from_perms(data["perm_gens"], data.get("degree"), name)
    raise GroupError(f"group {name!r} needs 'table' or 'perm_gens'")


def from_json(doc: dict, name: str = "") -> GraphOfGroups:
    try:
        groups = {k: group_from_json(v, k) for k, v in doc["groups"].items()}
        graph = doc["graph"]
        verts = [Vertex(str(v["id"]), groups[v["group"]]) for v in graph["vertices"]]
        vpos = {v.id: i for i, v in enumerate(verts)}
        edges = []
        for e in graph.get("edges", []):
            eg = groups[e["group"]]
            o, t = vpos[str(e["from"])], vpos[str(e["to"])]

            def mono(raw, tgt):
                # translate raw input labels into canonical indices
                src_pos = {lab: i for i, lab in enumerate(eg.labels)}
                tgt_pos = {lab: i for i, lab in enumerate(tgt.labels)}
                if len(raw) != eg.order:
                    raise GraphError(f"edge {e['id']}: mono has {len(raw)} entries, expected {eg.order}")
                m = [0] * eg.order
                for lab, img in enumerate(raw):
                    if img not in tgt_pos:
                        raise GraphError(f"edge {e['id']}: mono image {img} out of range")
                    m[src_pos[lab]] = tgt_pos[img]
                return GroupMono(eg, tgt, tuple(m))

            edges.append(Edge(str(e["id"]), o, t, eg, mono(e["mono_from"], verts[o].group), mono(e["mono_to"], verts[t].group)))
        bp = vpos[str(graph.get("basepoint", verts[0].id))]
    except KeyError as exc:
        raise GraphError(f"missing or unknown key: {exc}") from None
    except (TypeError, IndexError, AttributeError, ValueError) as exc:
        raise GraphError(f"malformed input: {exc}") from None
    return GraphOfGroups(tuple(verts), tuple(edges), bp, name)


def to_json(gog: GraphOfGroups) -> dict:
    groups: dict[str, dict] = {}
    gname: dict[int, str] = {}

    def reg(g: FiniteGroup, hint: str) -> str:
        if id(g) not in gname:
            key = hint
            n = 1
            while key in groups:
                n += 1
                key = f"{hint}_{n}"
            gname[id(g)] = key
            groups[key] = {"table": [list(r) for r in g.table]}
        return gname[id(g)]

    vs = [{"id": v.id, "group": reg(v.group, v.group.name or f"G_{v.id}")} for v in gog.vertices]
    es = [
        {
            "id": e.id,
            "from": gog.vertices[e.origin].id,
            "to": gog.vertices[e.terminus].id,
            "group": reg(e.group, e.group.name or f"G_{e.id}"),
            "mono_from": list(e.alpha.map),
            "mono_to": list(e.omega.map),
        }
        for e in gog.edges
    ]
    return {"groups": groups, "graph": {"vertices": vs, "edges": es, "basepoint": gog.vertices[gog.basepoint].id}}
