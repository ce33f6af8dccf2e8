"""Elements of pi_1 of a graph of groups as based path words.

A :class:`PathWord` ``g0 x1 g1 ... xm gm`` alternates vertex-group elements
and traversals along an edge path.  Spanning-tree traversals stay explicit,
so the word is a morphism of the fundamental groupoid and validity is a
local check.  Normal forms remove pinches and push each edge-group factor to
the right, leaving left-coset representatives (minimal index) in every
non-final position.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .config import CapExceeded, caps
from .gog import GraphOfGroups, Substitution, rev

INFINITE = math.inf


class WordError(ValueError):
    """Malformed path word or word text."""


class InfiniteSubgroup(ValueError):
    """A supposedly finite subgroup contains an element of infinite order."""

    def __init__(self, msg: str, witness: "PathWord | None" = None):
        super().__init__(msg)
        self.witness = witness


@dataclass(frozen=True)
class PathWord:
    gog: GraphOfGroups = field(compare=False, hash=False, repr=False)
    base: int
    elems: tuple[int, ...]
    travs: tuple[int, ...]

    def __post_init__(self):
        if len(self.elems) != len(self.travs) + 1:
            raise WordError("a path word needs one more vertex element than traversals")

    @property
    def end(self) -> int:
        return self.gog.end(self.travs[-1]) if self.travs else self.base

    @property
    def length(self) -> int:
        return len(self.travs)

    def is_loop(self) -> bool:
        return self.end == self.base

    def validate(self) -> None:
        v = self.base
        g = self.gog
        for i, x in enumerate(self.travs):
            if not 0 <= x < 2 * len(g.edges):
                raise WordError(f"syllable {i}: unknown traversal")
            if not 0 <= self.elems[i] < g.group(v).order:
                raise WordError(f"syllable {i}: element out of range for vertex {g.vertices[v].id}")
            if g.start(x) != v:
                raise WordError(f"syllable {i}: traversal {g.trav_name(x)} does not start at {g.vertices[v].id}")
            v = g.end(x)
        if not 0 <= self.elems[-1] < g.group(v).order:
            raise WordError("final element out of range")

    def __mul__(self, other: "PathWord") -> "PathWord":
        return mul(self, other)

    def inverse(self) -> "PathWord":
        return inverse(self)

    def __str__(self) -> str:
        return format_word(self)


def identity(gog: GraphOfGroups, v: int | None = None) -> PathWord:
    return PathWord(gog, gog.basepoint if v is None else v, (0,), ())


def letter(gog: GraphOfGroups, v: int, a: int) -> PathWord:
    return PathWord(gog, v, (a,), ())


def path(gog: GraphOfGroups, start: int, travs: Sequence[int], elems: Sequence[int] | None = None) -> PathWord:
    elems = tuple(elems) if elems is not None else (0,) * (len(travs) + 1)
    w = PathWord(gog, start, elems, tuple(travs))
    w.validate()
    return w


def mul(u: PathWord, v: PathWord) -> PathWord:
    if u.end != v.base:
        raise WordError("cannot concatenate: paths do not meet")
    G = u.gog.group(v.base)
    mid = G.table[u.elems[-1]][v.elems[0]]
    return PathWord(u.gog, u.base, u.elems[:-1] + (mid,) + v.elems[1:], u.travs + v.travs)


def product(words: Iterable[PathWord], gog: GraphOfGroups | None = None, base: int | None = None) -> PathWord:
    out = None
    for w in words:
        out = w if out is None else mul(out, w)
    if out is None:
        if gog is None:
            raise WordError("empty product needs a graph")
        return identity(gog, base)
    return out


def inverse(w: PathWord) -> PathWord:
    g = w.gog
    verts = [w.base]
    for x in w.travs:
        verts.append(g.end(x))
    elems = tuple(g.group(verts[i]).inv(w.elems[i]) for i in reversed(range(len(w.elems))))
    return PathWord(g, w.end, elems, tuple(rev(x) for x in reversed(w.travs)))


def normal_form(w: PathWord) -> PathWord:
    g = w.gog
    elems = [w.elems[0]]
    travs: list[int] = []
    for i, x in enumerate(w.travs):
        nxt = w.elems[i + 1]
        if travs and x == rev(travs[-1]) and elems[-1] in g.image(x):
            c = g.transport(x)[elems[-1]]
            travs.pop()
            elems.pop()
            G = g.group(g.end(x))
            elems[-1] = G.table[G.table[elems[-1]][c]][nxt]
        else:
            travs.append(x)
            elems.append(nxt)
    for i, x in enumerate(travs):
        r, k = g.coset_split(x, elems[i])
        if k:
            elems[i] = r
            G = g.group(g.end(x))
            elems[i + 1] = G.table[g.transport(x)[k]][elems[i + 1]]
    return PathWord(g, w.base, tuple(elems), tuple(travs))


def nf(w: PathWord) -> PathWord:
    return normal_form(w)


def key(w: PathWord) -> tuple:
    """Hashable identity of the group element (w must be a loop at a fixed base)."""
    n = normal_form(w)
    return (n.base, n.elems, n.travs)


def equal(u: PathWord, v: PathWord) -> bool:
    return key(u) == key(v)


def is_identity(w: PathWord) -> bool:
    n = normal_form(w)
    return not n.travs and n.elems[0] == 0


def power(w: PathWord, k: int) -> PathWord:
    if k < 0:
        w, k = inverse(w), -k
    result = identity(w.gog, w.base)
    while k:
        if k & 1:
            result = normal_form(mul(result, w))
        w = normal_form(mul(w, w))
        k >>= 1
    return result


def conjugate(a: PathWord, w: PathWord) -> PathWord:
    """``a w a^-1``."""
    return normal_form(mul(mul(a, w), inverse(a)))


# ---------------------------------------------------------------- text syntax


def parse_word(gog: GraphOfGroups, text: str, base: int | str | None = None, loop: bool = True) -> PathWord:
    """Parse ``u:3 . e+ . v:2 . e-``.  Consecutive traversals imply identity elements."""
    if isinstance(base, str):
        base = gog.vindex[base]
    tokens = []
    pos = 0
    for raw in text.split("."):
        stripped = raw.strip()
        offset = pos + (len(raw) - len(raw.lstrip()))
        tokens.append((stripped, offset))
        pos += len(raw) + 1
    if not tokens or all(not t for t, _ in tokens):
        raise WordError("empty word")
    elems: list[int] = []
    travs: list[int] = []
    cur = base
    for tok, off in tokens:
        if not tok:
            raise WordError(f"empty token at position {off}")
        if ":" in tok:
            vid, _, k = tok.partition(":")
            if vid not in gog.vindex:
                raise WordError(f"unknown vertex {vid!r} at position {off}")
            v = gog.vindex[vid]
            try:
                a = int(k)
            except ValueError:
                raise WordError(f"bad element index {k!r} at position {off}") from None
            if not 0 <= a < gog.group(v).order:
                raise WordError(f"element {a} out of range for vertex {vid!r} at position {off}")
            if cur is None:
                cur = v
            if v != cur:
                raise WordError(f"vertex letter {tok!r} at position {off} is not at the current vertex {gog.vertices[cur].id!r}")
            if len(elems) == len(travs) + 1:
                G = gog.group(v)
                elems[-1] = G.table[elems[-1]][a]
            else:
                elems.append(a)
        elif tok[-1] in "+-":
            eid = tok[:-1]
            if eid not in gog.eindex:
                raise WordError(f"unknown edge {eid!r} at position {off}")
            x = 2 * gog.eindex[eid] + (1 if tok[-1] == "-" else 0)
            if cur is None:
                cur = gog.start(x)
            if gog.start(x) != cur:
                raise WordError(f"traversal {tok!r} at position {off} does not start at {gog.vertices[cur].id!r}")
            if len(elems) == len(travs):
                elems.append(0)
            travs.append(x)
            cur = gog.end(x)
        else:
            raise WordError(f"unrecognized token {tok!r} at position {off}")
    if len(elems) == len(travs):
        elems.append(0)
    start = base if base is not None else (gog.start(travs[0]) if travs else None)
    if start is None:
        # word made of vertex letters only: its base is that vertex
        start = cur
    w = PathWord(gog, start, tuple(elems), tuple(travs))
    if loop and not w.is_loop():
        raise WordError("word is not a closed loop")
    return w


def format_word(w: PathWord) -> str:
    g = w.gog
    parts = []
    v = w.base
    for i, x in enumerate(w.travs):
        if w.elems[i]:
            parts.append(f"{g.vertices[v].id}:{w.elems[i]}")
        parts.append(g.trav_name(x))
        v = g.end(x)
    if w.elems[-1] or not parts:
        parts.append(f"{g.vertices[v].id}:{w.elems[-1]}")
    return " . ".join(parts)


# ---------------------------------------------------------- Bass-Serre generators


def tree_path(gog: GraphOfGroups, v: int) -> PathWord:
    return PathWord(gog, gog.basepoint, (0,) * (len(gog.tree_paths[v]) + 1), gog.tree_paths[v])


def generator_word(gog: GraphOfGroups, i: int) -> PathWord:
    kind, a, b = gog.generators[i]
    if kind == "v":
        T = tree_path(gog, a)
        return mul(mul(T, letter(gog, a, b)), inverse(T))
    e = gog.edges[a]
    To, Tt = tree_path(gog, e.origin), tree_path(gog, e.terminus)
    return mul(mul(To, path(gog, e.origin, [2 * a])), inverse(Tt))


def generator_words(gog: GraphOfGroups) -> list[PathWord]:
    return [generator_word(gog, i) for i in range(len(gog.generators))]


def decompose(w: PathWord) -> list[tuple[int, int]]:
    """Write a loop at the basepoint as a word in the Bass-Serre generators."""
    g = w.gog
    if w.base != g.basepoint or not w.is_loop():
        raise WordError("decompose needs a loop at the basepoint")
    gi = g.generator_index
    out = []
    v = w.base
    for i, x in enumerate(w.travs):
        if w.elems[i]:
            out.append((gi[("v", v, w.elems[i])], 1))
        out.append((gi[("t", x >> 1, 0)], -1 if x & 1 else 1))
        v = g.end(x)
    if w.elems[-1]:
        out.append((gi[("v", v, w.elems[-1])], 1))
    return out


def realize(gog: GraphOfGroups, genword: Sequence[tuple[int, int]]) -> PathWord:
    gens = generator_words(gog)
    parts = [gens[i] if s == 1 else inverse(gens[i]) for i, s in genword]
    return product(parts, gog, gog.basepoint)


def substitute(sub: Substitution, w: PathWord) -> PathWord:
    """Image of a path word under a groupoid substitution."""
    src, tgt = sub.source, sub.target
    v = w.base
    first = sub.vmap[(v, w.elems[0])]
    elems = [first[1]]
    travs: list[int] = []
    cur = first[0]
    for i, x in enumerate(w.travs):
        for y in sub.tmap[x]:
            travs.append(y)
            elems.append(0)
            cur = tgt.end(y)
        v = src.end(x)
        tv, a = sub.vmap[(v, w.elems[i + 1])]
        if tv != cur:
            raise WordError("substitution does not produce a path")
        G = tgt.group(cur)
        elems[-1] = G.table[elems[-1]][a]
    out = PathWord(tgt, first[0], tuple(elems), tuple(travs))
    if sub.base_prefix and w.base == src.basepoint:
        p = path(tgt, tgt.basepoint, sub.base_prefix)
        out = mul(mul(p, out), inverse(p))
    return out


# ------------------------------------------------------------ order, ellipticity


def cyclic_reduce(w: PathWord) -> tuple[PathWord, PathWord]:
    """Return ``(c, r)`` with ``w = c r c^-1`` and ``r`` cyclically reduced.

    ``c`` is a path from ``w.base`` to ``r.base``.
    """
    if not w.is_loop():
        raise WordError("cyclic reduction needs a loop")
    g = w.gog
    conj = identity(g, w.base)
    cur = normal_form(w)
    while cur.travs:
        x1, xm = cur.travs[0], cur.travs[-1]
        G = g.group(cur.base)
        middle = G.table[cur.elems[-1]][cur.elems[0]]
        if not (xm == rev(x1) and middle in g.image(x1)):
            break
        c = PathWord(g, cur.base, (cur.elems[0], 0), (x1,))
        cur = normal_form(mul(mul(inverse(c), cur), c))
        conj = mul(conj, c)
    return normal_form(conj), cur


def translation_length(w: PathWord) -> int:
    return cyclic_reduce(w)[1].length


def elliptic_data(w: PathWord) -> tuple[int, int, PathWord] | None:
    """For an elliptic loop: (vertex, element, conjugator c) with w = c a c^-1; else None."""
    c, r = cyclic_reduce(w)
    if r.travs:
        return None
    return r.base, r.elems[0], c


def element_order(w: PathWord) -> int | float:
    data = elliptic_data(w)
    if data is None:
        return INFINITE
    v, a, _ = data
    return w.gog.group(v).element_order(a)


def is_finite_order(w: PathWord) -> bool:
    return elliptic_data(w) is not None


# ------------------------------------------------------------------ tree vertices


def vertex_key(p: PathWord) -> tuple:
    """Canonical key of the Bass-Serre tree vertex ``p G_v`` for a path p from the basepoint."""
    n = normal_form(p)
    return (n.end, n.elems[:-1], n.travs)


def tree_distance(p: PathWord, q: PathWord) -> int:
    return normal_form(mul(inverse(p), q)).length


def fixes_vertex(h: PathWord, p: PathWord) -> bool:
    """Does the loop h fix the tree vertex represented by path p?"""
    return not normal_form(mul(mul(inverse(p), h), p)).travs


# ------------------------------------------------------------- finite subgroups


def closure(gens: Sequence[PathWord], limit: int | None = None) -> list[PathWord]:
    """Elements of the finite subgroup generated by loops ``gens`` (normal forms).

    Raises InfiniteSubgroup with a witness when an infinite-order element appears.
    """
    if not gens:
        raise WordError("closure needs at least one generator word")
    g = gens[0].gog
    base = gens[0].base
    limit = limit or caps().closure
    bound = g.max_vertex_order
    gens = [normal_form(s) for s in gens]
    for s in gens:
        if not is_finite_order(s):
            raise InfiniteSubgroup("infinite order detected", s)
    one = identity(g, base)
    elems = {key(one): one}
    frontier = [one]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = normal_form(mul(x, s))
                k = (y.base, y.elems, y.travs)
                if k in elems:
                    continue
                if not is_finite_order(y):
                    raise InfiniteSubgroup("infinite order detected", y)
                elems[k] = y
                nxt.append(y)
                if len(elems) > limit:
                    raise CapExceeded(f"subgroup closure exceeded {limit} elements")
        frontier = nxt
    if len(elems) > bound:
        # cannot happen for finite subgroups; torsion-generated infinite subgroup
        raise InfiniteSubgroup("subgroup larger than every vertex group", None)
    return sorted(elems.values(), key=lambda w: (w.travs, w.elems))


@dataclass(frozen=True)
class SubgroupAnchor:
    """The finite subgroup ``c E c^-1`` of pi_1, with E a subgroup of G_vertex."""

    gog: GraphOfGroups = field(compare=False, hash=False, repr=False)
    vertex: int
    elements: tuple[int, ...]
    conjugator: PathWord = field(compare=False)

    @property
    def order(self) -> int:
        return len(self.elements)

    def words(self) -> list[PathWord]:
        c = self.conjugator
        return [conjugate(c, letter(self.gog, self.vertex, a)) for a in self.elements]

    def describe(self) -> dict:
        return {
            "vertex": self.gog.vertices[self.vertex].id,
            "elements": list(self.elements),
            "order": self.order,
            "conjugator": format_word(self.conjugator),
        }


def anchor_elements(S: Sequence[PathWord]) -> tuple[SubgroupAnchor, dict[tuple, int]]:
    """Anchor the finite subgroup <S> at a fixed vertex.

    The subgroup fixes the circumcenter of the orbit of the base vertex; with
    no inversions this center (or an endpoint of the central edge) is a vertex.
    Returns the anchor and a map from element keys of <S> to elements of the
    anchor vertex group.
    """
    H = closure(S)
    g = H[0].gog
    base = H[0].base
    orbit: dict[tuple, PathWord] = {}
    for h in H:
        orbit.setdefault(vertex_key(h), h)
    pts = [orbit[k] for k in sorted(orbit)]
    best = (0, 0, 0)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            d = tree_distance(pts[i], pts[j])
            if d > best[0]:
                best = (d, i, j)
    d, i, j = best
    a, b = pts[i], pts[j]
    seg = normal_form(mul(inverse(a), b))
    k = d // 2
    center = mul(a, PathWord(g, seg.base, seg.elems[:k] + (0,), seg.travs[:k]))
    center = normal_form(center)
    center = PathWord(g, center.base, center.elems[:-1] + (0,), center.travs)
    v = center.end
    emap = {}
    els = set()
    for h in H:
        r = normal_form(mul(mul(inverse(center), h), center))
        if r.travs:
            raise AssertionError("finite subgroup does not fix the orbit center")
        emap[key(h)] = r.elems[0]
        els.add(r.elems[0])
    return SubgroupAnchor(g, v, tuple(sorted(els)), center), emap


def fix_vertex_of_finite_subgroup(S: Sequence[PathWord]) -> SubgroupAnchor:
    return anchor_elements(S)[0]


# ----------------------------------------------------------------- enumeration


def enumerate_normal_forms(gog: GraphOfGroups, max_len: int, base: int | None = None, trailing: bool = True) -> Iterator[PathWord]:
    """Every normal-form loop at ``base`` with at most ``max_len`` traversals.

    With ``trailing=False`` only forms whose final element is the identity.
    """
    base = gog.basepoint if base is None else base
    Gb = gog.group(base)

    def rec(v, elems, travs):
        if v == base:
            if trailing:
                for a in range(Gb.order):
                    yield PathWord(gog, base, tuple(elems) + (a,), tuple(travs))
            else:
                yield PathWord(gog, base, tuple(elems) + (0,), tuple(travs))
        if len(travs) == max_len:
            return
        for x in gog.traversals_from[v]:
            for r in gog.coset_reps(x):
                if travs and x == rev(travs[-1]) and r == 0:
                    continue
                elems.append(r)
                travs.append(x)
                yield from rec(gog.end(x), elems, travs)
                elems.pop()
                travs.pop()

    yield from rec(base, [], [])


def random_word(gog: GraphOfGroups, length: int, rng: random.Random, base: int | None = None) -> PathWord:
    """A random loop: a random walk of the given length closed up by the tree path home."""
    base = gog.basepoint if base is None else base
    v = base
    elems = []
    travs = []
    for _ in range(length):
        outs = gog.traversals_from[v]
        if not outs:
            break
        elems.append(rng.randrange(gog.group(v).order))
        x = rng.choice(outs)
        travs.append(x)
        v = gog.end(x)
    elems.append(rng.randrange(gog.group(v).order))
    w = PathWord(gog, base, tuple(elems), tuple(travs))
    # close the walk through the spanning tree
    home = mul(inverse(tree_path(gog, v)), tree_path(gog, base)) if base == gog.basepoint else None
    if home is None:
        raise WordError("random_word closes loops only at the basepoint")
    return mul(w, home)
