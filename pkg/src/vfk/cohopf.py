"""Co-Hopficity: the normalizer criterion, the witness endomorphism for HNN
splittings, the cylinder-boundedness cross-check and fold traces of
non-injective homomorphisms."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import fingroup as fg
from .config import CapExceeded, caps
from .gog import AmalgamSplitting, GraphOfGroups, HNNSplitting, delta_e
from .homs import (
    HomSpec,
    compose,
    from_substitution,
    traversal_substitution,
    validate_hom,
)
from .transport import (
    SubgroupAnchor,
    bounded_in_collapse,
    conjugator_between,
    edge_anchor,
    finite_classes,
    normalizer_in_G,
)
from .words import (
    INFINITE,
    InfiniteSubgroup,
    PathWord,
    anchor_elements,
    closure,
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
    path,
    power,
    tree_path,
    vertex_key,
)

CO_HOPFIAN = "co-Hopfian"
NOT_CO_HOPFIAN = "not co-Hopfian"
UNKNOWN = "unknown"


@dataclass
class EdgeReport:
    edge: str
    kind: str  # "amalgam" | "hnn"
    holds: bool | None
    edge_order: int
    normalizers: dict[str, int | str]
    conjugate: bool | None = None

    def describe(self) -> dict:
        d = {
            "edge": self.edge,
            "splitting": self.kind,
            "edge_group_order": self.edge_order,
            "normalizers": self.normalizers,
            "holds": self.holds,
        }
        if self.kind == "hnn":
            d["images_conjugate"] = self.conjugate
        return d


@dataclass
class CohopfVerdict:
    verdict: str
    edges: list[EdgeReport]
    reduced: GraphOfGroups
    contracted: int
    witness: HomSpec | None = None
    witness_edge: str | None = None

    def describe(self) -> dict:
        d = {
            "verdict": self.verdict,
            "reduced": {"contracted_edges": self.contracted, "vertices": len(self.reduced.vertices), "edges": len(self.reduced.edges)},
            "edges": [e.describe() for e in self.edges],
        }
        if self.witness is not None:
            d["witness"] = {"edge": self.witness_edge, **self.witness.to_json()}
        return d


def _norm_status(res) -> int | str:
    if res.status == "finite":
        return res.anchor.order
    return res.status


def _self_normalizing(res, order: int) -> bool | None:
    if res.status == "unknown":
        return None
    return res.status == "finite" and res.anchor.order == order


def _either(a: bool | None, b: bool | None) -> bool | None:
    if a or b:
        return True
    if a is None or b is None:
        return None
    return False


def decide_cohopf(gog: GraphOfGroups, with_witness: bool = True) -> CohopfVerdict:
    red, fwds, bwds = gog.reduce_with_maps()
    reports = []
    witness = None
    witness_edge = None
    for ei, ed in enumerate(red.edges):
        sp = delta_e(red, ei)
        n = ed.group.order
        if isinstance(sp, AmalgamSplitting):
            ca = SubgroupAnchor(sp.A, sp.A.basepoint, tuple(sorted(ed.alpha.map)), identity(sp.A))
            cb = SubgroupAnchor(sp.B, sp.B.basepoint, tuple(sorted(ed.omega.map)), identity(sp.B))
            na, nb = normalizer_in_G(ca), normalizer_in_G(cb)
            holds = _either(_self_normalizing(na, n), _self_normalizing(nb, n))
            reports.append(EdgeReport(ed.id, "amalgam", holds, n, {"origin_side": _norm_status(na), "terminus_side": _norm_status(nb)}))
        else:
            A = sp.A
            c1 = SubgroupAnchor(A, ed.origin, tuple(sorted(ed.alpha.map)), identity(A))
            c2 = SubgroupAnchor(A, ed.terminus, tuple(sorted(ed.omega.map)), tree_path(A, ed.terminus))
            conj = conjugator_between(c1, c2)
            n1, n2 = normalizer_in_G(c1), normalizer_in_G(c2)
            holds = _either(_self_normalizing(n1, n), _self_normalizing(n2, n))
            if conj is not None:
                holds = False
            reports.append(EdgeReport(ed.id, "hnn", holds, n, {"origin_image": _norm_status(n1), "terminus_image": _norm_status(n2)}, conj is not None))
            if conj is not None and with_witness and witness is None:
                phi = hnn_witness(red, ei).hom
                # carry the witness back to the input graph
                for sub in reversed(bwds):
                    phi = compose(from_substitution(sub), phi)
                for sub in reversed(fwds):
                    phi = compose(phi, from_substitution(sub))
                witness, witness_edge = phi, ed.id
    if any(r.holds is False for r in reports):
        verdict = NOT_CO_HOPFIAN
    elif all(r.holds for r in reports):
        verdict = CO_HOPFIAN
    else:
        verdict = UNKNOWN
    return CohopfVerdict(verdict, reports, red, len(fwds), witness, witness_edge)


# -------------------------------------------------------------- witness for HNN


@dataclass
class HNNWitness:
    hom: HomSpec
    stable: PathWord  # the corrected stable letter, as a loop at the basepoint
    aut_order: int
    conjugator: PathWord

    def describe(self) -> dict:
        return {
            "aut_order": self.aut_order,
            "exponent": self.aut_order + 1,
            "stable_letter": format_word(self.stable),
            "conjugator": format_word(self.conjugator),
            **self.hom.to_json(),
        }


def hnn_witness(gog: GraphOfGroups, e: int | str) -> HNNWitness:
    """Injective, non-surjective endomorphism for a non-separating edge whose
    two edge-group images are conjugate in the complement."""
    if isinstance(e, str):
        e = gog.eindex[e]
    sp = delta_e(gog, e)
    if not isinstance(sp, HNNSplitting):
        raise ValueError("edge separates: no HNN witness")
    ed = gog.edges[e]
    A = sp.A
    c1 = SubgroupAnchor(A, ed.origin, tuple(sorted(ed.alpha.map)), identity(A))
    P_A = tree_path(A, ed.terminus)
    c2 = SubgroupAnchor(A, ed.terminus, tuple(sorted(ed.omega.map)), P_A)
    g0 = conjugator_between(c1, c2)
    if g0 is None:
        raise ValueError("edge-group images are not conjugate in the complement")
    # the same paths inside the full graph (A shares vertex and edge order up to the removed edge)
    def lift(w: PathWord) -> PathWord:
        travs = tuple(2 * (y >> 1 if (y >> 1) < e else (y >> 1) + 1) + (y & 1) for y in w.travs)
        return PathWord(gog, w.base, w.elems, travs)

    P, g = lift(P_A), lift(g0)
    m = fg.automorphism_group_order(ed.group)
    x = 2 * e
    s1 = mul(mul(path(gog, ed.origin, [x]), inverse(P)), g)  # loop at the origin normalizing C
    piece = mul(mul(power(s1, m + 1), inverse(g)), P)
    hom = traversal_substitution(gog, x, normal_form(piece), "hnn-witness")
    T = tree_path(gog, ed.origin)
    return HNNWitness(hom, conjugate(T, s1), m, g)


@dataclass
class WitnessCheck:
    valid_hom: bool
    injective_radius: int
    injective: bool
    surjectivity_radius: int
    stable_has_preimage: bool
    words_checked: int

    @property
    def ok(self) -> bool:
        return self.valid_hom and self.injective and not self.stable_has_preimage


def check_witness(w: HNNWitness, inj_radius: int = 4, surj_radius: int = 6) -> WitnessCheck:
    gog = w.hom.source
    valid = validate_hom(w.hom) is None
    seen = set()
    injective = True
    count = 0
    for u in enumerate_normal_forms(gog, inj_radius):
        k = key(w.hom.apply(u))
        count += 1
        if k in seen:
            injective = False
            break
        seen.add(k)
    # phi fixes vertex elements at the base, so phi(u a) = s' iff phi(u) = s' a^-1
    Gb = gog.group(gog.basepoint)
    targets = {key(mul(w.stable, letter(gog, gog.basepoint, Gb.inv(a)))) for a in range(Gb.order)}
    hit = False
    for u in enumerate_normal_forms(gog, surj_radius, trailing=False):
        count += 1
        if key(w.hom.apply(u)) in targets:
            hit = True
            break
    return WitnessCheck(valid, inj_radius, injective, surj_radius, hit, count)


# ------------------------------------------------------------ cylinder check


@dataclass
class StratumReport:
    k: int
    edges: dict[str, str]
    witnesses: dict[str, str] = field(default_factory=dict)

    @property
    def status(self) -> str:
        vals = set(self.edges.values())
        if "unbounded" in vals:
            return "unbounded"
        if "unknown" in vals:
            return "unknown"
        return "bounded"

    def describe(self) -> dict:
        return {"k": self.k, "status": self.status, "edges": self.edges, "witnesses": self.witnesses}


def cylinder_check(gog: GraphOfGroups) -> list[StratumReport]:
    red = gog.reduce()
    out = []
    for k in red.edge_orders():
        rep = StratumReport(k, {})
        for ei, ed in enumerate(red.edges):
            if ed.group.order != k:
                continue
            status, wit = bounded_in_collapse(edge_anchor(red, ei), k)
            rep.edges[ed.id] = status
            if wit is not None:
                rep.witnesses[ed.id] = format_word(wit)
        out.append(rep)
    return out


def cylinder_summary(reports: list[StratumReport]) -> str:
    """"bounded" if every stratum is bounded, "unbounded" if one is, else "unknown"."""
    st = {r.status for r in reports}
    if "unbounded" in st:
        return "unbounded"
    if "unknown" in st:
        return "unknown"
    return "bounded"


# ----------------------------------------------------------------- fold traces


@dataclass
class FoldTrace:
    moves: list[dict]
    terminal: str  # "infinite-vertex-group" | "isometry" | "capped"
    certificate: PathWord | None
    exponent_base: int  # N, the largest finite element order in the target
    kernel_element: PathWord | None = None
    image_order: int | None = None

    @property
    def injective_on_trace(self) -> bool:
        return self.terminal == "isometry" and self.kernel_element is None

    def describe(self) -> dict:
        d = {
            "terminal": self.terminal,
            "moves": self.moves,
            "N": self.exponent_base,
            "exponent": f"{self.exponent_base}!",
        }
        if self.certificate is not None:
            d["certificate"] = format_word(self.certificate)
            d["image_order"] = self.image_order
        if self.kernel_element is not None:
            d["finite_kernel_element"] = format_word(self.kernel_element)
        return d


def max_finite_order(gog: GraphOfGroups) -> int:
    return max(max(v.group.element_orders) for v in gog.vertices)


class _Fold:
    """A G-tree given by its quotient: finite vertex stabilizers (as element
    lists of G), chosen lifts, images in the target tree, and edges
    ``(x, y, g)`` joining the lift of x to ``g`` times the lift of y."""

    def __init__(self, phi: HomSpec):
        self.phi = phi
        self.G = phi.source
        self.Gt = phi.target
        self.K: dict[str, list[PathWord]] = {}
        self.keys: dict[str, set] = {}
        self.f: dict[str, PathWord] = {}
        self.order: list[str] = []
        self.edges: dict[str, list] = {}  # id -> [x, y, g]
        self.eorder: list[str] = []
        self.moves: list[dict] = []
        G = self.G
        for v, vert in enumerate(G.vertices):
            T = tree_path(G, v)
            K = closure([conjugate(T, letter(G, v, a)) for a in range(vert.group.order)])
            self._set_vertex(vert.id, K)
        for ei, e in enumerate(G.edges):
            t = normal_form(mul(mul(tree_path(G, e.origin), path(G, e.origin, [2 * ei])), inverse(tree_path(G, e.terminus))))
            self.edges[e.id] = [G.vertices[e.origin].id, G.vertices[e.terminus].id, t]
            self.eorder.append(e.id)

    def _set_vertex(self, vid, K, fx=None):
        if vid not in self.K:
            self.order.append(vid)
        self.K[vid] = K
        self.keys[vid] = {key(w) for w in K}
        if fx is None:
            an, _ = anchor_elements([self.phi.apply(w) for w in K])
            fx = an.conjugator
        self.f[vid] = normal_form(fx)

    def image(self, g: PathWord, y: str) -> PathWord:
        return normal_form(mul(self.phi.apply(g), self.f[y]))

    def ends_at(self, x: str):
        """Edge ends at x as (edge id, other vertex, g), lowest edge id first."""
        out = []
        for eid in self.eorder:
            a, b, g = self.edges[eid]
            if a == x:
                out.append((eid, "+", b, g))
            if b == x:
                out.append((eid, "-", a, normal_form(inverse(g))))
        return out

    def coset_reps(self, x: str, y: str, g: PathWord) -> list[PathWord]:
        conj = {key(conjugate(g, w)) for w in self.K[y]}
        stab = [w for w in self.K[x] if key(w) in conj]
        reps = []
        covered = set()
        for k in self.K[x]:
            if key(k) in covered:
                continue
            reps.append(k)
            covered.update(key(mul(k, s)) for s in stab)
        return reps

    def merge(self, a: str, b: str, c: PathWord) -> None:
        """Identify the lift of b with ``c`` times the lift of a."""
        if a == b:
            K = closure(self.K[a] + [c])
            self._set_vertex(a, K, self.f[a])
            return
        ci = inverse(c)
        K = closure(self.K[a] + [conjugate(ci, w) for w in self.K[b]])
        self._set_vertex(a, K, self.f[a])
        for eid in self.eorder:
            x, y, g = self.edges[eid]
            if x == b and y == b:
                self.edges[eid] = [a, a, normal_form(mul(mul(ci, g), c))]
            elif x == b:
                self.edges[eid] = [a, y, normal_form(mul(ci, g))]
            elif y == b:
                self.edges[eid] = [x, a, normal_form(mul(g, c))]
        self.order.remove(b)
        del self.K[b], self.keys[b], self.f[b]

    def drop_edge(self, eid: str) -> None:
        del self.edges[eid]
        self.eorder.remove(eid)

    def step(self) -> bool:
        """Perform one collapse, fold or subdivision; False when f is locally injective."""
        for eid in self.eorder:
            x, y, g = self.edges[eid]
            if vertex_key(self.f[x]) == vertex_key(self.image(g, y)):
                self.moves.append({"move": "collapse", "edge": eid, "loop": x == y})
                self.drop_edge(eid)
                self.merge(x, y, normal_form(inverse(g)))
                return True
        for x in list(self.order):
            fx = self.f[x]
            firsts: dict = {}
            for eid, d, y, g in self.ends_at(x):
                for k in self.coset_reps(x, y, g):
                    kg = normal_form(mul(k, g))
                    p = self.image(kg, y)
                    seg = normal_form(mul(inverse(fx), p))
                    first = vertex_key(mul(fx, PathWord(self.Gt, seg.base, (seg.elems[0], 0), seg.travs[:1])))
                    firsts.setdefault(first, []).append((eid, d, y, kg, p, seg.length))
            for first in sorted(firsts, key=repr):
                group = firsts[first]
                if len(group) < 2:
                    continue
                (e1, d1, y1, p1, im1, l1), (e2, d2, y2, p2, im2, l2) = group[0], group[1]
                if vertex_key(im1) == vertex_key(im2):
                    self.moves.append({"move": "fold", "edges": [e1, e2], "vertex": x})
                    # identify p1 y1 with p2 y2: lift(y2) ~ (p2^-1 p1) lift(y1)
                    if e1 != e2:
                        self.drop_edge(e2)
                    self.merge(y1, y2, normal_form(mul(inverse(p2), p1)))
                    return True
                eid = e1 if l1 >= l2 else e2
                self.subdivide(eid)
                return True
        return False

    def subdivide(self, eid: str) -> None:
        x, y, g = self.edges[eid]
        mid = f"{eid}_m"
        while mid in self.K:
            mid += "'"
        conj = {key(conjugate(g, w)) for w in self.K[y]}
        stab = [w for w in self.K[x] if key(w) in conj]
        fx = self.f[x]
        seg = normal_form(mul(inverse(fx), self.image(g, y)))
        fm = mul(fx, PathWord(self.Gt, seg.base, (seg.elems[0], 0), seg.travs[:1]))
        self._set_vertex(mid, stab, fm)
        i = self.eorder.index(eid)
        del self.edges[eid]
        self.eorder[i:i + 1] = [f"{eid}_1", f"{eid}_2"]
        self.edges[f"{eid}_1"] = [x, mid, identity(self.G)]
        self.edges[f"{eid}_2"] = [mid, y, g]
        self.moves.append({"move": "subdivide", "edge": eid})


def fold_trace(phi: HomSpec, max_steps: int | None = None) -> FoldTrace:
    G, Gt = phi.source, phi.target
    N = max_finite_order(Gt)
    kernel = None
    # injectivity on finite subgroups first
    for cls in finite_classes(G):
        seen = {}
        for w in cls.rep.words():
            k = key(phi.apply(w))
            if k in seen:
                kernel = normal_form(mul(w, inverse(seen[k])))
                break
            seen[k] = w
        if kernel is not None:
            break
    max_steps = max_steps or caps().fold_steps
    fold = _Fold(phi)
    try:
        for _ in range(max_steps):
            if not fold.step():
                return FoldTrace(fold.moves, "isometry", None, N, kernel)
    except InfiniteSubgroup as exc:
        u = exc.witness
        if u is None:
            raise
        u = normal_form(u)
        img = phi.apply(u)
        killed = power(img, math.factorial(N))
        if element_order(u) != INFINITE or killed.travs or killed.elems[0]:
            raise AssertionError("fold certificate failed verification")
        return FoldTrace(fold.moves, "infinite-vertex-group", u, N, kernel, int(element_order(img)))
    return FoldTrace(fold.moves, "capped", None, N, kernel)


# older names kept for callers
lemmecohopf_witness = hnn_witness
moioli1_check = cylinder_check
moioli1_summary = cylinder_summary
