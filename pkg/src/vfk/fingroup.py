"""Finite groups given by multiplication tables.

Elements are dense indices ``0..n-1`` with the identity at index 0.  Every
operation here is pure; groups, subgroups and monomorphisms are immutable.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .config import CapExceeded, caps


class GroupError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    table: tuple[tuple[int, ...], ...]
    name: str = ""
    # labels[i] is the index element i carried in the input the group was loaded from
    labels: tuple[int, ...] = field(default=(), repr=False)
    # permutation realizing each element, when built from permutations
    perms: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(self.table))))

    @property
    def order(self) -> int:
        return len(self.table)

    def __len__(self) -> int:
        return len(self.table)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or '?'}, order={self.order})"

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    @cached_property
    def inverses(self) -> tuple[int, ...]:
        return tuple(row.index(0) for row in self.table)

    def inv(self, a: int) -> int:
        return self.inverses[a]

    def conj(self, a: int, x: int) -> int:
        """``a x a^-1``."""
        t = self.table
        return t[t[a][x]][self.inverses[a]]

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        result = 0
        while k:
            if k & 1:
                result = self.table[result][a]
            a = self.table[a][a]
            k >>= 1
        return result

    @cached_property
    def element_orders(self) -> tuple[int, ...]:
        out = []
        for a in range(self.order):
            k, x = 1, a
            while x != 0:
                x = self.table[x][a]
                k += 1
            out.append(k)
        return tuple(out)

    def element_order(self, a: int) -> int:
        return self.element_orders[a]

    @cached_property
    def exponent(self) -> int:
        return math.lcm(*self.element_orders)

    @cached_property
    def generators(self) -> tuple[int, ...]:
        """A small generating set, chosen greedily by decreasing element order."""
        gens: list[int] = []
        current = frozenset([0])
        for a in sorted(range(1, self.order), key=lambda x: (-self.element_orders[x], x)):
            if a not in current:
                gens.append(a)
                current = _closure(self, gens)
            if len(current) == self.order:
                break
        return tuple(gens)

    def is_abelian(self) -> bool:
        t = self.table
        return all(t[a][b] == t[b][a] for a in range(self.order) for b in range(a))

    # ---------------------------------------------------------------- constructors

    @classmethod
    def from_table(cls, table: Sequence[Sequence[int]], name: str = "", check=True) -> "FiniteGroup":
        n = len(table)
        if n == 0:
            raise GroupError("empty table")
        rows = [list(r) for r in table]
        if any(len(r) != n for r in rows):
            raise GroupError("table is not square")
        ident = next((e for e in range(n) if rows[e] == list(range(n))), None)
        if ident is None:
            raise GroupError("no identity element")
        # swap ident <-> 0 so that the identity sits at index 0
        perm = list(range(n))
        perm[0], perm[ident] = ident, 0
        pos = {old: new for new, old in enumerate(perm)}
        new = tuple(tuple(pos[rows[perm[a]][perm[b]]] for b in range(n)) for a in range(n))
        g = cls(new, name, labels=tuple(perm))
        if check:
            g.check()
        return g

    @classmethod
    def from_perms(cls, gens: Sequence[Sequence[int]], degree: int | None = None, name: str = "") -> "FiniteGroup":
        """Close a set of permutations (0-based image lists).  ``(p*q)(i) = p[q[i]]``."""
        if degree is None:
            degree = max((len(p) for p in gens), default=1)
        ident = tuple(range(degree))
        gens_t = []
        for p in gens:
            p = tuple(p)
            if sorted(p) != list(ident):
                raise GroupError(f"not a permutation of degree {degree}: {p}")
            gens_t.append(p)
        elems = [ident]
        index = {ident: 0}
        i = 0
        while i < len(elems):
            x = elems[i]
            for p in gens_t:
                y = tuple(p[x[k]] for k in range(degree))
                if y not in index:
                    index[y] = len(elems)
                    elems.append(y)
            i += 1
        n = len(elems)
        table = tuple(
            tuple(index[tuple(a[b[k]] for k in range(degree))] for b in elems) for a in elems
        )
        return cls(table, name, perms=tuple(elems))

    def index_of_perm(self, p: Sequence[int]) -> int:
        return self.perms.index(tuple(p))

    def check(self) -> None:
        n = self.order
        full = set(range(n))
        for r in self.table:
            if set(r) != full:
                raise GroupError("table rows are not permutations")
        for c in range(n):
            if {self.table[r][c] for r in range(n)} != full:
                raise GroupError("table columns are not permutations")
        t = self.table
        if n <= 64:
            triples: Iterable = itertools.product(range(n), repeat=3)
        else:
            rng = random.Random(n)
            triples = [(rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(1000)]
        for a, b, c in triples:
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise GroupError(f"not associative at ({a}, {b}, {c})")


@dataclass(frozen=True)
class Subgroup:
    parent: FiniteGroup = field(compare=False, hash=False, repr=False)
    elements: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.elementset

    @cached_property
    def elementset(self) -> frozenset[int]:
        return frozenset(self.elements)

    def as_group(self) -> tuple["FiniteGroup", "GroupMono"]:
        """The subgroup as a standalone group with its inclusion into the parent."""
        pos = {x: i for i, x in enumerate(self.elements)}
        t = self.parent.table
        table = tuple(tuple(pos[t[a][b]] for b in self.elements) for a in self.elements)
        g = FiniteGroup(table, f"sub({self.parent.name})")
        return g, GroupMono(g, self.parent, self.elements)


@dataclass(frozen=True)
class GroupMono:
    source: FiniteGroup = field(compare=False, hash=False, repr=False)
    target: FiniteGroup = field(compare=False, hash=False, repr=False)
    map: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.map[x]

    @cached_property
    def image(self) -> frozenset[int]:
        return frozenset(self.map)

    @cached_property
    def preimage(self) -> dict[int, int]:
        return {y: x for x, y in enumerate(self.map)}

    def problems(self) -> list[str]:
        out = []
        if len(self.map) != self.source.order:
            return [f"mono has {len(self.map)} entries, source order is {self.source.order}"]
        if any(not 0 <= y < self.target.order for y in self.map):
            return ["mono image index out of range"]
        if len(set(self.map)) != len(self.map):
            out.append("edge mono not injective")
        s, t = self.source.table, self.target.table
        m = self.map
        if any(m[s[a][b]] != t[m[a]][m[b]] for a in range(len(m)) for b in range(len(m))):
            out.append("edge mono not a homomorphism")
        return out


def _closure(g: FiniteGroup, seed: Iterable[int]) -> frozenset[int]:
    gens = [x for x in set(seed) if x != 0]
    elems = {0}
    frontier = [0]
    t = g.table
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = t[x][s]
                if y not in elems:
                    elems.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(elems)


def subgroup_closure(g: FiniteGroup, seed: Iterable[int]) -> Subgroup:
    seed = list(seed)
    if any(not 0 <= x < g.order for x in seed):
        raise GroupError("seed element out of range")
    return Subgroup(g, tuple(sorted(_closure(g, seed))))


def make_subgroup(g: FiniteGroup, elements: Iterable[int]) -> Subgroup:
    els = tuple(sorted(set(elements)))
    if subgroup_closure(g, els).elements != els:
        raise GroupError("element set is not a subgroup")
    return Subgroup(g, els)


def conjugate_set(g: FiniteGroup, a: int, elems: Iterable[int]) -> tuple[int, ...]:
    """``a S a^-1`` as a sorted tuple."""
    return tuple(sorted(g.conj(a, x) for x in elems))


def normalizer(g: FiniteGroup, h: Subgroup | Iterable[int]) -> Subgroup:
    els = h.elements if isinstance(h, Subgroup) else tuple(sorted(set(h)))
    return Subgroup(g, tuple(x for x in range(g.order) if conjugate_set(g, x, els) == els))


def are_conjugate_subgroups(g: FiniteGroup, h1, h2) -> int | None:
    a = h1.elements if isinstance(h1, Subgroup) else tuple(sorted(set(h1)))
    b = h2.elements if isinstance(h2, Subgroup) else tuple(sorted(set(h2)))
    if len(a) != len(b):
        return None
    for x in range(g.order):
        if conjugate_set(g, x, a) == b:
            return x
    return None


def extend_hom(src: FiniteGroup, dst: FiniteGroup, gens: Sequence[int], images: Sequence[int]) -> tuple[int, ...] | None:
    """Extend ``gens -> images`` to a homomorphism, or None if it does not extend."""
    m = {0: 0}
    frontier = [0]
    ts, td = src.table, dst.table
    while frontier:
        nxt = []
        for x in frontier:
            for s, im in zip(gens, images):
                y = ts[x][s]
                val = td[m[x]][im]
                if y in m:
                    if m[y] != val:
                        return None
                else:
                    m[y] = val
                    nxt.append(y)
        frontier = nxt
    if len(m) != src.order:
        return None
    out = tuple(m[x] for x in range(src.order))
    if any(out[ts[a][b]] != td[out[a]][out[b]] for a in range(src.order) for b in range(src.order)):
        return None
    return out


def homomorphisms(src: FiniteGroup, dst: FiniteGroup) -> list[tuple[int, ...]]:
    gens = src.generators
    cands = [[y for y in range(dst.order) if src.element_order(s) % dst.element_order(y) == 0] for s in gens]
    out = []
    for images in itertools.product(*cands):
        m = extend_hom(src, dst, gens, images)
        if m is not None:
            out.append(m)
    return out


def embeddings(src: FiniteGroup, dst: FiniteGroup) -> list[tuple[int, ...]]:
    return [m for m in homomorphisms(src, dst) if len(set(m)) == src.order]


def automorphism_group_order(g: FiniteGroup) -> int:
    """|Aut(g)|, by exhausting bijective images of a generating set."""
    if g.order > caps().aut:
        raise CapExceeded(f"automorphism search capped at order {caps().aut}")
    gens = g.generators
    cands = [[y for y in range(g.order) if g.element_order(y) == g.element_order(s)] for s in gens]
    count = 0
    for images in itertools.product(*cands):
        m = extend_hom(g, g, gens, images)
        if m is not None and len(set(m)) == g.order:
            count += 1
    return count


def all_subgroups(g: FiniteGroup) -> list[Subgroup]:
    if g.order > caps().subgroups:
        raise CapExceeded(f"subgroup enumeration capped at order {caps().subgroups}")
    return [Subgroup(g, s) for s in _all_subgroups(g)]


_SUBGROUP_CACHE: dict[int, list[tuple[int, ...]]] = {}


def _all_subgroups(g: FiniteGroup) -> list[tuple[int, ...]]:
    key = id(g)
    hit = _SUBGROUP_CACHE.get(key)
    if hit is not None and hit[0] is g:  # guard against id reuse
        return hit[1]
    cyclic = {_closure(g, [x]) for x in range(g.order)}
    found = set(cyclic)
    frontier = set(cyclic)
    while frontier:
        nxt = set()
        for s in frontier:
            for c in cyclic:
                if not c <= s:
                    j = _closure(g, s | c)
                    if j not in found:
                        found.add(j)
                        nxt.add(j)
        frontier = nxt
    out = sorted((tuple(sorted(s)) for s in found), key=lambda s: (len(s), s))
    _SUBGROUP_CACHE[key] = (g, out)
    return out


def subgroup_classes(g: FiniteGroup) -> list[list[tuple[int, ...]]]:
    """Subgroups grouped into conjugacy classes, each class sorted, classes by first member."""
    seen: dict[tuple[int, ...], int] = {}
    classes: list[list[tuple[int, ...]]] = []
    for s in _all_subgroups(g):
        if s in seen:
            continue
        cls = sorted({conjugate_set(g, a, s) for a in range(g.order)}, key=lambda x: (len(x), x))
        for c in cls:
            seen[c] = len(classes)
        classes.append(cls)
    return classes


# ------------------------------------------------------------------ named groups


def cyclic(n: int) -> FiniteGroup:
    return FiniteGroup(tuple(tuple((a + b) % n for b in range(n)) for a in range(n)), f"Z{n}")


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n; element ``r^i s^j`` has index ``i + n*j``."""

    def mul(x, y):
        i, j = x % n, x // n
        k, l = y % n, y // n
        # r^i s^j r^k s^l = r^(i + (-1)^j k) s^(j+l)
        return (i + (k if j == 0 else -k)) % n + n * ((j + l) % 2)

    return FiniteGroup(tuple(tuple(mul(a, b) for b in range(2 * n)) for a in range(2 * n)), f"D{n}")


def symmetric(n: int) -> FiniteGroup:
    if n == 1:
        return FiniteGroup(((0,),), "S1")
    gens = [tuple([1, 0] + list(range(2, n)))]
    if n > 2:
        gens.append(tuple(list(range(1, n)) + [0]))
    return FiniteGroup.from_perms(gens, n, f"S{n}")


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    """Element ``(a, b)`` has index ``a * |h| + b``."""
    m = h.order
    table = tuple(
        tuple(g.table[a // m][b // m] * m + h.table[a % m][b % m] for b in range(g.order * m))
        for a in range(g.order * m)
    )
    return FiniteGroup(table, f"{g.name}x{h.name}")


def quaternion() -> FiniteGroup:
    # i -> (0 1 2 3)(4 5 6 7)... realized as permutations of the 8 elements
    i = (1, 2, 3, 0, 5, 6, 7, 4)
    j = (4, 7, 6, 5, 2, 1, 0, 3)
    return FiniteGroup.from_perms([i, j], 8, "Q8")


def alternating4() -> FiniteGroup:
    return FiniteGroup.from_perms([(1, 2, 0, 3), (1, 0, 3, 2)], 4, "A4")


def find_element(g: FiniteGroup, perm_or_pred) -> int:
    for x in range(g.order):
        if perm_or_pred(x):
            return x
    raise GroupError("no such element")
