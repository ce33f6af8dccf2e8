"""Homomorphisms between fundamental groups, given on the Bass-Serre generators."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

from . import fingroup as fg
from .config import caps
from .gog import GraphOfGroups, Substitution, rev
from .transport import (
    build_transport_graph,
    finite_classes,
    maximal_finite_classes,
    pointed_conjugacy,
    is_maximal_finite,
)
from .words import (
    PathWord,
    WordError,
    anchor_elements,
    conjugate,
    decompose,
    enumerate_normal_forms,
    format_word,
    generator_word,
    generator_words,
    identity,
    inverse,
    key,
    letter,
    mul,
    normal_form,
    parse_word,
    path,
    realize,
    substitute,
)


class HomError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class HomSpec:
    source: GraphOfGroups
    target: GraphOfGroups
    images: tuple[PathWord, ...]  # one normal-form loop at the target basepoint per source generator
    name: str = ""

    @cached_property
    def _vertex_images(self):
        gi = self.source.generator_index
        one = identity(self.target)
        out = []
        for v, vert in enumerate(self.source.vertices):
            out.append([one] + [self.images[gi[("v", v, a)]] for a in range(1, vert.group.order)])
        return out

    def apply(self, w: PathWord) -> PathWord:
        """Image of a loop at the source basepoint."""
        src = self.source
        if w.gog is not src:
            raise HomError("word belongs to a different graph")
        vi = self._vertex_images
        gi = src.generator_index
        out = identity(self.target)
        v = w.base
        for i, x in enumerate(w.travs):
            if w.elems[i]:
                out = normal_form(mul(out, vi[v][w.elems[i]]))
            t = self.images[gi[("t", x >> 1, 0)]]
            out = normal_form(mul(out, inverse(t) if x & 1 else t))
            v = src.end(x)
        if w.elems[-1]:
            out = normal_form(mul(out, vi[v][w.elems[-1]]))
        return out

    __call__ = apply

    def image_of_generator(self, i: int) -> PathWord:
        return self.images[i]

    def to_json(self) -> dict:
        return {"images": {n: format_word(w) for n, w in zip(self.source.generator_names, self.images)}}

    def describe(self) -> dict:
        d = self.to_json()
        d["name"] = self.name
        return d


def make_hom(source: GraphOfGroups, target: GraphOfGroups, images: Sequence[PathWord], name: str = "") -> HomSpec:
    if len(images) != len(source.generators):
        raise HomError("need one image per source generator")
    for w in images:
        if w.gog is not target or w.base != target.basepoint or not w.is_loop():
            raise HomError("images must be loops at the target basepoint")
    return HomSpec(source, target, tuple(normal_form(w) for w in images), name)


def hom_from_names(source: GraphOfGroups, target: GraphOfGroups, images: Mapping[str, PathWord | str], name: str = "") -> HomSpec:
    """Build from generator names.  Missing vertex letters are generated from the given ones;
    missing stable letters of spanning-tree edges map to the identity."""
    parsed = {}
    names = set(source.generator_names)
    for n, w in images.items():
        if n not in names:
            raise HomError(f"unknown generator {n!r}")
        parsed[n] = parse_word(target, w, target.basepoint) if isinstance(w, str) else w
    gi = source.generator_index
    out: list[PathWord | None] = [None] * len(source.generators)
    for n, w in parsed.items():
        out[source.generator_names.index(n)] = normal_form(w)
    one = identity(target)
    for v, vert in enumerate(source.vertices):
        G = vert.group
        known = {0: one}
        for a in range(1, G.order):
            w = out[gi[("v", v, a)]]
            if w is not None:
                known[a] = w
        seeds = [a for a in known if a]
        frontier = list(known)
        while frontier:
            nxt = []
            for a in frontier:
                for b in seeds:
                    c = G.table[a][b]
                    if c not in known:
                        known[c] = normal_form(mul(known[a], known[b]))
                        nxt.append(c)
            frontier = nxt
        for a in range(1, G.order):
            if a not in known:
                raise HomError(f"no image for generator {vert.id}:{a}")
            if out[gi[("v", v, a)]] is None:
                out[gi[("v", v, a)]] = known[a]
    for ei, e in enumerate(source.edges):
        i = gi[("t", ei, 0)]
        if out[i] is None:
            if ei in source.spanning_tree:
                out[i] = one
            else:
                raise HomError(f"no image for t_{e.id}")
    return make_hom(source, target, out, name)


def hom_from_json(source: GraphOfGroups, target: GraphOfGroups, doc: Mapping, name: str = "") -> HomSpec:
    try:
        return hom_from_names(source, target, doc["images"], name)
    except KeyError as exc:
        raise HomError(f"missing key {exc}") from None


def identity_hom(gog: GraphOfGroups) -> HomSpec:
    return make_hom(gog, gog, generator_words(gog), "id")


def inner(gog: GraphOfGroups, w: PathWord) -> HomSpec:
    return make_hom(gog, gog, [conjugate(w, s) for s in generator_words(gog)], f"ad({format_word(w)})")


def compose(f: HomSpec, g: HomSpec) -> HomSpec:
    """``f o g`` (apply g first)."""
    if g.target is not f.source:
        raise HomError("homomorphisms do not compose")
    return HomSpec(g.source, f.target, tuple(f.apply(w) for w in g.images), f"{f.name}o{g.name}")


def power(f: HomSpec, n: int) -> HomSpec:
    if n < 0:
        raise HomError("negative powers need an inverse")
    out = identity_hom(f.source)
    base = f
    while n:
        if n & 1:
            out = compose(base, out)
        n >>= 1
        if n:
            base = compose(base, base)
    return out


def from_substitution(sub: Substitution, name: str = "") -> HomSpec:
    return make_hom(sub.source, sub.target, [substitute(sub, s) for s in generator_words(sub.source)], name)


def from_finite_maps(source: GraphOfGroups, target: GraphOfGroups, vmaps: Sequence[Sequence[int]], tvals: Mapping[int, int] | None = None, name: str = "") -> HomSpec:
    """A hom into a single-vertex target: vertex homs ``vmaps[v]`` and stable-letter values."""
    tvals = dict(tvals or {})
    imgs = []
    for kind, a, b in source.generators:
        if kind == "v":
            imgs.append(letter(target, target.basepoint, vmaps[a][b]))
        else:
            imgs.append(letter(target, target.basepoint, tvals.get(a, 0)))
    return make_hom(source, target, imgs, name)


def finite_hom_data(source: GraphOfGroups, G: fg.FiniteGroup) -> Iterator[tuple[tuple, dict]]:
    """All homomorphisms pi_1(source) -> G, as (vertex maps, stable-letter values).

    Spanning-tree letters are 1, so adjacent vertex maps must agree on the edge
    group; every other stable letter t needs t^-1 phi(alpha(c)) t = phi(omega(c)).
    """
    tree = source.spanning_tree
    vh = [fg.homomorphisms(v.group, G) for v in source.vertices]
    tree_edges = [[e for e in sorted(tree) if max(source.edges[e].origin, source.edges[e].terminus) == v] for v in range(len(source.vertices))]
    loops = [e for e in range(len(source.edges)) if e not in tree]
    T, invs = G.table, G.inverses

    def fits(maps, e):
        ed = source.edges[e]
        a, w = maps[ed.origin], maps[ed.terminus]
        return all(a[ed.alpha.map[c]] == w[ed.omega.map[c]] for c in range(ed.group.order))

    def tvals(maps, i):
        if i == len(loops):
            yield {}
            return
        ed = source.edges[loops[i]]
        a, w = maps[ed.origin], maps[ed.terminus]
        for t in range(G.order):
            if all(T[T[invs[t]][a[ed.alpha.map[c]]]][t] == w[ed.omega.map[c]] for c in range(ed.group.order)):
                for rest in tvals(maps, i + 1):
                    yield {loops[i]: t, **rest}

    def rec(v, maps):
        if v == len(vh):
            for tv in tvals(maps, 0):
                yield tuple(maps), tv
            return
        for m in vh[v]:
            maps.append(m)
            if all(fits(maps, e) for e in tree_edges[v]):
                yield from rec(v + 1, maps)
            maps.pop()

    yield from rec(0, [])


def homs_to_finite(source: GraphOfGroups, target: GraphOfGroups) -> Iterator[HomSpec]:
    if len(target.vertices) != 1 or target.edges:
        raise HomError("target must be a single finite vertex group")
    for maps, tv in finite_hom_data(source, target.group(0)):
        yield from_finite_maps(source, target, maps, tv)


def equal_on_generators(f: HomSpec, g: HomSpec) -> bool:
    return all(key(a) == key(b) for a, b in zip(f.images, g.images))


# ------------------------------------------------------------------ validation


def validate_hom(h: HomSpec) -> str | None:
    """None when every relator maps to 1; otherwise the first failing relator."""
    pres = h.source.presentation()
    for r in pres.relators:
        w = identity(h.target)
        for i, s in r:
            w = normal_form(mul(w, h.images[i] if s == 1 else inverse(h.images[i])))
        if w.travs or w.elems[0]:
            return pres.relator_text(r)
    return None


def check_hom(h: HomSpec) -> HomSpec:
    bad = validate_hom(h)
    if bad is not None:
        raise HomError(f"relator not preserved: {bad}")
    return h


# ------------------------------------------------------------------ equivalence


@dataclass
class Equivalence:
    equivalent: bool
    conjugators: list[PathWord | None]  # one per finite class of the source

    def __bool__(self):
        return self.equivalent

    def describe(self) -> dict:
        return {
            "equivalent": self.equivalent,
            "conjugators": [None if c is None else format_word(c) for c in self.conjugators],
        }


def are_equivalent(f: HomSpec, g: HomSpec) -> Equivalence:
    if f.source is not g.source or f.target is not g.target:
        raise HomError("equivalence needs a common source and target")
    conj = []
    ok = True
    for cls in finite_classes(f.source):
        words = cls.rep.words()
        c = pointed_conjugacy([f.apply(w) for w in words], [g.apply(w) for w in words])
        conj.append(c)
        if c is None:
            ok = False
    return Equivalence(ok, conj)


# ------------------------------------------------------------ class permutation


@dataclass
class ClassPermutation:
    permuting: bool
    permutation: list[int] | None
    reason: str = ""

    def describe(self) -> dict:
        return {"class_permuting": self.permuting, "permutation": self.permutation, "reason": self.reason}


def is_class_permuting(f: HomSpec) -> ClassPermutation:
    if f.source is not f.target:
        raise HomError("class permutation needs an endomorphism")
    gog = f.source
    tg = build_transport_graph(gog)
    mx = maximal_finite_classes(gog)
    index = {c.index: i for i, c in enumerate(mx)}
    perm = []
    for i, c in enumerate(mx):
        an, _ = anchor_elements([f.apply(w) for w in c.rep.words()])
        if not is_maximal_finite(an):
            return ClassPermutation(False, None, f"image of maximal class {i} is not maximal")
        j = index[tg.class_of(an)]
        if j in perm:
            return ClassPermutation(False, None, f"images of maximal classes {perm.index(j)} and {i} are conjugate")
        perm.append(j)
    return ClassPermutation(True, perm)


def _perm_order(perm: Sequence[int]) -> int:
    seen = set()
    out = 1
    for s in range(len(perm)):
        if s in seen:
            continue
        n = 0
        x = s
        while x not in seen:
            seen.add(x)
            x = perm[x]
            n += 1
        out = math.lcm(out, n)
    return out


def equivalent_power_exponent(f: HomSpec, cap: int | None = None) -> int | None:
    """Least tested n with f^n equivalent to the identity, or None when the cap is reached."""
    cp = is_class_permuting(f)
    if not cp.permuting:
        raise HomError("not class-permuting")
    p = _perm_order(cp.permutation)
    if cap is None:
        cap = caps().power_search
    if not cap:
        cap = 1
        for c in maximal_finite_classes(f.source):
            cap = math.lcm(cap, fg.automorphism_group_order(c.rep.gog.group(c.rep.vertex)))
    ident = identity_hom(f.source)
    step = power(f, p)
    cur = step
    for d in range(1, cap + 1):
        if are_equivalent(cur, ident):
            return p * d
        cur = compose(step, cur)
    return None


def is_aut0_member(f: HomSpec, inverse_hom: HomSpec) -> bool:
    if inverse_hom is None:
        raise HomError("an inverse certificate is required")
    ident = identity_hom(f.source)
    if not (equal_on_generators(compose(f, inverse_hom), ident) and equal_on_generators(compose(inverse_hom, f), ident)):
        raise HomError("inverse certificate does not compose to the identity")
    return bool(are_equivalent(f, ident))


def is_inner_bounded(f: HomSpec, radius: int) -> PathWord | None:
    """A conjugator w of Britton length <= radius with f = ad(w) on generators, or None."""
    gog = f.source
    if f.target is not gog:
        raise HomError("inner check needs an endomorphism")
    gens = generator_words(gog)
    targets = [key(w) for w in f.images]
    # test the generators with long images first: they fail fastest
    order = sorted(range(len(gens)), key=lambda i: -f.images[i].length)
    for w in enumerate_normal_forms(gog, radius):
        wi = inverse(w)
        if all(key(mul(mul(w, gens[i]), wi)) == targets[i] for i in order):
            return w
    return None


# -------------------------------------------------------------------- twists


def groupoid_twist(gog: GraphOfGroups, x: int, before: PathWord | None, after: PathWord | None, name: str = "") -> HomSpec:
    """The endomorphism fixing vertex elements and traversals except ``x -> before . x . after``."""
    piece = path(gog, gog.start(x), [x])
    if before is not None:
        piece = mul(before, piece)
    if after is not None:
        piece = mul(piece, after)
    return traversal_substitution(gog, x, piece, name)


def traversal_substitution(gog: GraphOfGroups, x: int, piece: PathWord, name: str = "") -> HomSpec:
    """Fix every vertex element and traversal, except send ``x`` to the path ``piece``."""
    if piece.base != gog.start(x) or piece.end != gog.end(x):
        raise HomError("replacement path has the wrong endpoints")
    imgs = [_replace_traversal(s, x, piece) for s in generator_words(gog)]
    return make_hom(gog, gog, imgs, name)


def _replace_traversal(w: PathWord, x: int, piece: PathWord) -> PathWord:
    g = w.gog
    out = letter(g, w.base, w.elems[0])
    back = inverse(piece)
    for i, y in enumerate(w.travs):
        if y == x:
            out = mul(out, piece)
        elif y == rev(x):
            out = mul(out, back)
        else:
            out = mul(out, path(g, g.start(y), [y]))
        out = mul(out, letter(g, out.end, w.elems[i + 1]))
    return normal_form(out)


@dataclass
class Twist:
    hom: HomSpec
    inverse: HomSpec


def dehn_twist(gog: GraphOfGroups, e: int | str, h: PathWord) -> Twist:
    """Twist across a separating edge by a loop h centralizing the edge group.

    h is a loop at the terminus of e (not crossing e), or at its origin.
    """
    if isinstance(e, str):
        e = gog.eindex[e]
    ed = gog.edges[e]
    if not gog.separates(e):
        raise HomError("edge does not separate")
    if e in {y >> 1 for y in h.travs}:
        raise HomError("twisting loop crosses the edge")
    if not h.is_loop() or h.base not in (ed.origin, ed.terminus):
        raise HomError("twisting loop must be based at an endpoint of the edge")
    side = "terminus" if h.base == ed.terminus else "origin"
    mono = ed.omega if side == "terminus" else ed.alpha
    for c in range(ed.group.order):
        a = letter(gog, h.base, mono.map[c])
        if key(mul(h, a)) != key(mul(a, h)):
            raise HomError("twisting loop does not centralize the edge group")
    x = 2 * e
    hi = inverse(h)
    if side == "terminus":
        f = groupoid_twist(gog, x, None, h, "twist")
        g = groupoid_twist(gog, x, None, hi, "twist^-1")
    else:
        f = groupoid_twist(gog, x, h, None, "twist")
        g = groupoid_twist(gog, x, hi, None, "twist^-1")
    return Twist(f, g)
