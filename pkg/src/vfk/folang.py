"""First-order formulas in the language of groups.

Concrete syntax::

    formula  := disj ( "->" formula )?
    disj     := conj ( "|" conj )*
    conj     := unary ( "&" unary )*
    unary    := ("A" | "E") var "." formula | "(" formula ")" | atom
    atom     := term ( "=" | "!=" ) term
    term     := factor ( "*" factor )*
    factor   := primary ( "^-1" | "^" digits )*
    primary  := var | "1" | "(" term ")"

Variables match ``[a-z][a-z0-9_]*``.  Quantifier bodies extend as far right
as possible.  Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from .config import CapExceeded, caps
from .fingroup import FiniteGroup
from .gog import GraphOfGroups
from .transport import finite_classes, maximal_finite_classes
from .words import PathWord, decompose

# ------------------------------------------------------------------ AST


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Mul:
    factors: tuple


@dataclass(frozen=True)
class Inv:
    arg: "Term"


@dataclass(frozen=True)
class Pow:
    arg: "Term"
    exp: int


Term = Union[Var, One, Mul, Inv, Pow]


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Neq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class And:
    parts: tuple


@dataclass(frozen=True)
class Or:
    parts: tuple


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


Formula = Union[Eq, Neq, And, Or, Implies, Forall, Exists]

ONE = One()
TRUE = Eq(ONE, ONE)
FALSE = Neq(ONE, ONE)


def mul(*terms: Term) -> Term:
    ts = tuple(t for t in terms if t != ONE)
    if not ts:
        return ONE
    return ts[0] if len(ts) == 1 else Mul(ts)


def inv(t: Term) -> Term:
    return ONE if t == ONE else Inv(t)


def conj(parts: Sequence[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    return parts[0] if len(parts) == 1 else And(parts)


def disj(parts: Sequence[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    return parts[0] if len(parts) == 1 else Or(parts)


def forall(vs: Sequence[str], body: Formula) -> Formula:
    for v in reversed(vs):
        body = Forall(v, body)
    return body


def exists(vs: Sequence[str], body: Formula) -> Formula:
    for v in reversed(vs):
        body = Exists(v, body)
    return body


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, One):
        return set()
    if isinstance(t, Mul):
        return set().union(*(term_vars(f) for f in t.factors))
    return term_vars(t.arg)


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, (Eq, Neq)):
        return term_vars(f.lhs) | term_vars(f.rhs)
    if isinstance(f, (And, Or)):
        return set().union(*(free_vars(p) for p in f.parts))
    if isinstance(f, Implies):
        return free_vars(f.lhs) | free_vars(f.rhs)
    return free_vars(f.body) - {f.var}


def _natural(name: str):
    m = re.fullmatch(r"([a-z_]*?)(\d*)", name)
    if m and m.group(2):
        return (m.group(1), int(m.group(2)), name)
    return (name, -1, name)


def free_variables(f: Formula) -> list[str]:
    """Free variables in natural order (x2 before x10)."""
    return sorted(free_vars(f), key=_natural)


def quantifier_prefix(f: Formula) -> tuple[str, Formula]:
    """The prenex prefix as a string of 'A'/'E' and the remaining matrix."""
    out = []
    while isinstance(f, (Forall, Exists)):
        out.append("A" if isinstance(f, Forall) else "E")
        f = f.body
    return "".join(out), f


def is_quantifier_free(f: Formula) -> bool:
    if isinstance(f, (Eq, Neq)):
        return True
    if isinstance(f, (And, Or)):
        return all(is_quantifier_free(p) for p in f.parts)
    if isinstance(f, Implies):
        return is_quantifier_free(f.lhs) and is_quantifier_free(f.rhs)
    return False


def _prefix_shape(f: Formula) -> str | None:
    prefix, matrix = quantifier_prefix(f)
    if not is_quantifier_free(matrix):
        return None
    return re.sub(r"(.)\1*", r"\1", prefix)


def is_universal(f: Formula) -> bool:
    return _prefix_shape(f) in ("", "A")


def is_forall_exists(f: Formula) -> bool:
    return _prefix_shape(f) in ("", "A", "E", "AE")


def is_exists_forall(f: Formula) -> bool:
    return _prefix_shape(f) in ("", "A", "E", "EA")


# ------------------------------------------------------------------ printing


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, One):
        return "1"
    if isinstance(t, Mul):
        return " * ".join(f"({format_term(x)})" if isinstance(x, Mul) else format_term(x) for x in t.factors)
    base = format_term(t.arg)
    if isinstance(t.arg, Mul):
        base = f"({base})"
    return base + ("^-1" if isinstance(t, Inv) else f"^{t.exp}")


def _operand(f: Formula) -> str:
    s = format_formula(f)
    return s if isinstance(f, (Eq, Neq)) else f"({s})"


def format_formula(f: Formula) -> str:
    if isinstance(f, Eq):
        return f"{format_term(f.lhs)} = {format_term(f.rhs)}"
    if isinstance(f, Neq):
        return f"{format_term(f.lhs)} != {format_term(f.rhs)}"
    if isinstance(f, And):
        return " & ".join(_operand(p) for p in f.parts)
    if isinstance(f, Or):
        return " | ".join(_operand(p) for p in f.parts)
    if isinstance(f, Implies):
        return f"{_operand(f.lhs)} -> {_operand(f.rhs)}"
    q = "A" if isinstance(f, Forall) else "E"
    return f"{q} {f.var} . {format_formula(f.body)}"


# ------------------------------------------------------------------ parsing


class FormulaSyntaxError(ValueError):
    def __init__(self, msg: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {line}, column {col}: {msg}")
        self.pos = pos


_TOKEN = re.compile(r"\s+|#[^\n]*|(?P<tok>->|!=|[a-z][a-z0-9_]*|\d+|[AE]\b|[()&|=*^.-])")


def _tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", text, pos)
        if m.group("tok"):
            out.append((m.group("tok"), pos))
        pos = m.end()
    out.append(("", len(text)))
    return out


class _Backtrack(Exception):
    pass


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> str:
        return self.toks[self.i][0]

    def error(self, msg: str, soft: bool = False):
        if soft:
            raise _Backtrack()
        raise FormulaSyntaxError(msg, self.text, self.toks[self.i][1])

    def expect(self, t: str, soft: bool = False) -> None:
        if self.tok != t:
            self.error(f"expected {t!r}, found {self.tok or 'end of input'!r}", soft)
        self.i += 1

    def formula(self) -> Formula:
        lhs = self.disj()
        if self.tok == "->":
            self.i += 1
            return Implies(lhs, self.formula())
        return lhs

    def disj(self) -> Formula:
        parts = [self.conj()]
        while self.tok == "|":
            self.i += 1
            parts.append(self.conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conj(self) -> Formula:
        parts = [self.unary()]
        while self.tok == "&":
            self.i += 1
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        t = self.tok
        if t in ("A", "E"):
            self.i += 1
            v = self.tok
            if not re.fullmatch(r"[a-z][a-z0-9_]*", v):
                self.error("expected a variable after the quantifier")
            self.i += 1
            self.expect(".")
            body = self.formula()
            return Forall(v, body) if t == "A" else Exists(v, body)
        if t == "(":
            save = self.i
            try:
                return self.atom(soft=True)
            except _Backtrack:
                self.i = save
            self.i += 1
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def atom(self, soft: bool = False) -> Formula:
        lhs = self.term(soft)
        op = self.tok
        if op not in ("=", "!="):
            self.error(f"expected '=' or '!=', found {op or 'end of input'!r}", soft)
        self.i += 1
        rhs = self.term(False)
        return Eq(lhs, rhs) if op == "=" else Neq(lhs, rhs)

    def term(self, soft: bool) -> Term:
        fs = [self.factor(soft)]
        while self.tok == "*":
            self.i += 1
            fs.append(self.factor(soft))
        return fs[0] if len(fs) == 1 else Mul(tuple(fs))

    def factor(self, soft: bool) -> Term:
        t = self.primary(soft)
        while self.tok == "^":
            self.i += 1
            if self.tok == "-":
                self.i += 1
                self.expect("1")
                t = Inv(t)
            elif self.tok.isdigit():
                t = Pow(t, int(self.tok))
                self.i += 1
            else:
                self.error("expected '-1' or an exponent after '^'")
        return t

    def primary(self, soft: bool) -> Term:
        t = self.tok
        if t == "1":
            self.i += 1
            return ONE
        if t == "(":
            self.i += 1
            inner = self.term(soft)
            self.expect(")", soft)
            return inner
        if re.fullmatch(r"[a-z][a-z0-9_]*", t):
            self.i += 1
            return Var(t)
        self.error(f"expected a term, found {t or 'end of input'!r}", soft)


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.tok:
        p.error(f"unexpected {p.tok!r} after the formula")
    return f


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term(False)
    if p.tok:
        p.error(f"unexpected {p.tok!r} after the term")
    return t


# ------------------------------------------------------------------ evaluation


def miniscope(f: Formula) -> Formula:
    """Push quantifiers inward as far as logical equivalence allows."""
    if isinstance(f, (Eq, Neq)):
        return f
    if isinstance(f, And):
        return And(tuple(miniscope(p) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(miniscope(p) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(miniscope(f.lhs), miniscope(f.rhs))
    return _push(type(f), f.var, miniscope(f.body))


def _push(Q, x: str, body: Formula) -> Formula:
    if x not in free_vars(body):
        return body
    dual = Exists if Q is Forall else Forall
    spread = And if Q is Forall else Or
    split = Or if Q is Forall else And
    if isinstance(body, spread):
        return spread(tuple(_push(Q, x, p) for p in body.parts))
    if isinstance(body, split):
        inside = [p for p in body.parts if x in free_vars(p)]
        outside = [p for p in body.parts if x not in free_vars(p)]
        if outside:
            return split(tuple(outside) + (_push(Q, x, conj(inside) if split is And else disj(inside)),))
    if isinstance(body, Implies):
        if x not in free_vars(body.lhs):
            return Implies(body.lhs, _push(Q, x, body.rhs))
        if x not in free_vars(body.rhs):
            return Implies(_push(dual, x, body.lhs), body.rhs)
    return Q(x, body)


class _Counter:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def tick(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise CapExceeded("formula evaluation exceeded the step cap (VFK_CAP_EVAL_STEPS)")


def _compile_term(t: Term, G: FiniteGroup) -> Callable[[dict], int]:
    table, invs, orders = G.table, G.inverses, G.element_orders
    if isinstance(t, Var):
        name = t.name
        return lambda env: env[name]
    if isinstance(t, One):
        return lambda env: 0
    if isinstance(t, Mul):
        fs = [_compile_term(x, G) for x in t.factors]

        def run(env):
            acc = 0
            for f in fs:
                acc = table[acc][f(env)]
            return acc

        return run
    inner = _compile_term(t.arg, G)
    if isinstance(t, Inv):
        return lambda env: invs[inner(env)]
    k = t.exp

    def pw(env):
        a = inner(env)
        return G.power(a, k % orders[a])

    return pw


def _compile(f: Formula, G: FiniteGroup, ctr: _Counter) -> Callable[[dict], bool]:
    if isinstance(f, (Eq, Neq)):
        lhs, rhs = _compile_term(f.lhs, G), _compile_term(f.rhs, G)
        if isinstance(f, Eq):
            def eq(env):
                ctr.tick()
                return lhs(env) == rhs(env)
            return eq

        def neq(env):
            ctr.tick()
            return lhs(env) != rhs(env)
        return neq
    if isinstance(f, And):
        ps = [_compile(p, G, ctr) for p in f.parts]
        return lambda env: all(p(env) for p in ps)
    if isinstance(f, Or):
        ps = [_compile(p, G, ctr) for p in f.parts]
        return lambda env: any(p(env) for p in ps)
    if isinstance(f, Implies):
        a, b = _compile(f.lhs, G, ctr), _compile(f.rhs, G, ctr)
        return lambda env: (not a(env)) or b(env)
    body = _compile(f.body, G, ctr)
    x, n = f.var, G.order
    want = isinstance(f, Exists)

    def quant(env):
        saved = env.get(x, None)
        try:
            for g in range(n):
                env[x] = g
                if body(env) == want:
                    return want
            return not want
        finally:
            if saved is None:
                env.pop(x, None)
            else:
                env[x] = saved

    return quant


def eval_finite(f: Formula, model: FiniteGroup, assignment: Mapping[str, int] | None = None, step_cap: int | None = None) -> bool:
    """Truth of ``f`` in ``model`` by exhaustive quantification.

    ``assignment`` maps free variables to element indices of ``model``.
    """
    env = dict(assignment or {})
    missing = free_vars(f) - set(env)
    if missing:
        raise ValueError(f"unassigned free variables: {', '.join(sorted(missing, key=_natural))}")
    for k, v in env.items():
        if not 0 <= v < model.order:
            raise ValueError(f"value of {k} is not an element of the model")
    ctr = _Counter(caps().eval_steps if step_cap is None else step_cap)
    return _compile(miniscope(f), model, ctr)(env)


# ------------------------------------------------------------------ emitters


def word_term(genword: Sequence[tuple[int, int]], names: Sequence[str]) -> Term:
    return mul(*(Var(names[i]) if s == 1 else Inv(Var(names[i])) for i, s in genword))


def path_term(w: PathWord, names: Sequence[str]) -> Term:
    return word_term(decompose(w), names)


def variables(prefix: str, n: int, start: int = 1) -> list[str]:
    return [f"{prefix}{i}" for i in range(start, start + n)]


def relations(gog: GraphOfGroups, names: Sequence[str]) -> Formula:
    """Sigma(names) = 1 for the canonical presentation."""
    pres = gog.presentation()
    return conj([Eq(word_term(r, names), ONE) for r in pres.relators])


def _psi_matrix(gog: GraphOfGroups, xs: Sequence[str], xs2: Sequence[str], ys: Sequence[str]) -> Formula:
    parts = []
    for y, cls in zip(ys, finite_classes(gog)):
        for w in cls.rep.words():
            lhs = path_term(w, xs)
            rhs = mul(Var(y), path_term(w, xs2), Inv(Var(y)))
            parts.append(Eq(lhs, rhs))
    return conj(parts)


def emit_psi(gog: GraphOfGroups) -> Formula:
    """Existential formula in x1..x2n: the homs given by the two halves are equivalent."""
    n = len(gog.generators)
    r = len(finite_classes(gog))
    xs, xs2, ys = variables("x", n), variables("x", n, n + 1), variables("y", r)
    return exists(ys, _psi_matrix(gog, xs, xs2, ys))


def group_bound(gog: GraphOfGroups) -> int:
    return gog.max_vertex_order


def _theta_matrix(gog: GraphOfGroups, xs: Sequence[str], g: str) -> Formula:
    N = math.factorial(group_bound(gog))
    G = Var(g)
    reps = [[path_term(w, xs) for w in c.rep.words()] for c in maximal_finite_classes(gog)]
    parts = []
    for A in reps:
        outside = conj([Eq(Pow(G, N), ONE)] + [Neq(G, a) for a in A])
        escape = disj([Neq(Pow(mul(G, a), N), ONE) for a in A])
        parts.append(Implies(outside, escape))
    for i in range(len(reps)):
        for j in range(i + 1, len(reps)):
            A, B = reps[i], reps[j]
            B2 = [mul(G, b, Inv(G)) for b in B]
            miss_a = [conj([Neq(a, b) for b in B2]) for a in A]
            miss_b = [conj([Neq(b, a) for a in A]) for b in B2]
            parts.append(disj(miss_a + miss_b))
    return conj(parts)


def emit_theta(gog: GraphOfGroups, var: str = "g") -> Formula:
    """Universal formula in x1..xn true of the generator images exactly for class-permuting endomorphisms."""
    n = len(gog.generators)
    return Forall(var, _theta_matrix(gog, variables("x", n), var))


def emit_mu(gog: GraphOfGroups, F: Sequence[PathWord]) -> Formula:
    if not F:
        raise ValueError("mu needs a nonempty list of words")
    n = len(gog.generators)
    r = len(finite_classes(gog))
    xs, ys, zs = variables("x", n), variables("y", n), variables("z", r)
    killed = disj([Eq(path_term(w, ys), ONE) for w in F])
    rhs = conj([relations(gog, ys), _psi_matrix(gog, xs, ys, zs), killed])
    return forall(xs, exists(ys + zs, Implies(relations(gog, xs), rhs)))


def emit_mu_tuple(gog: GraphOfGroups, u: Sequence[PathWord]) -> Formula:
    """Formula in u1..uk: the tuple is the image of (w_1, ..., w_k) under a class-permuting endomorphism."""
    n = len(gog.generators)
    xs = variables("x", n)
    matches = [Eq(Var(f"u{i}"), path_term(w, xs)) for i, w in enumerate(u, 1)]
    body = conj([relations(gog, xs)] + matches + [_theta_matrix(gog, xs, "g")])
    return exists(xs, Forall("g", body))


def header(gog: GraphOfGroups, kind: str, extra: Sequence[str] = ()) -> str:
    """Comment block naming the generator each variable stands for."""
    n = len(gog.generators)
    lines = [f"# {kind} for {gog.name or 'graph of groups'}", "# generating set: Bass-Serre generators (vertex letters, then stable letters)"]
    names = gog.generator_names
    for i, nm in enumerate(names, 1):
        if kind == "psi":
            lines.append(f"#   x{i} = phi({nm}), x{i + n} = phi'({nm})")
        elif kind == "mu":
            lines.append(f"#   x{i}, y{i} <-> {nm}")
        else:
            lines.append(f"#   x{i} <-> {nm}")
    lines.extend(f"# {e}" for e in extra)
    return "\n".join(lines) + "\n"


def emit_text(f: Formula, head: str = "") -> str:
    return head + format_formula(f) + "\n"
