"""Command-line interface.

Every command reads a toolkit input: a JSON file with ``groups`` and
``graph``, optionally ``words``, ``homs`` and ``tuples``, or the name of a
bundled example (``gl2z``, ``sl2z``, ...).

Exit codes: 0 positive verdict, 10 negative verdict, 20 unknown or capped,
2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import folang, homs, transport, words
from .cohopf import CO_HOPFIAN, NOT_CO_HOPFIAN, decide_cohopf, fold_trace, cylinder_check, cylinder_summary
from .config import CapExceeded
from .corpus import NAMES, load_doc
from .fingroup import FiniteGroup, GroupError, make_subgroup
from .gog import GraphError, GraphOfGroups, from_json, group_from_json

EXIT_YES, EXIT_NO, EXIT_UNKNOWN, EXIT_INPUT = 0, 10, 20, 2


class InputError(ValueError):
    pass


@dataclass
class ToolkitInput:
    gog: GraphOfGroups
    doc: dict
    path: Path | None
    words: dict[str, str] = field(default_factory=dict)
    homs: dict[str, dict] = field(default_factory=dict)
    tuples: dict[str, list[str]] = field(default_factory=dict)


def _read_doc(ref: str, relative_to: Path | None = None) -> tuple[dict, Path | None, str]:
    p = Path(ref)
    if relative_to is not None and not p.is_absolute() and not p.exists():
        p = relative_to / ref
    if p.exists():
        try:
            return json.loads(p.read_text()), p, p.stem
        except json.JSONDecodeError as exc:
            raise InputError(f"{p}: invalid JSON: {exc}") from None
    if ref in NAMES:
        return load_doc(ref), None, ref
    raise InputError(f"no such file or bundled example: {ref}")


def load_input(ref: str, relative_to: Path | None = None) -> ToolkitInput:
    doc, path, name = _read_doc(ref, relative_to)
    if not isinstance(doc, dict):
        raise InputError("input must be a JSON object")
    gog = from_json(doc, name).check()
    extras = {}
    for k, typ in (("words", dict), ("homs", dict), ("tuples", dict)):
        v = doc.get(k, {})
        if not isinstance(v, typ):
            raise InputError(f"'{k}' must be an object")
        extras[k] = v
    return ToolkitInput(gog, doc, path, **extras)


def load_model(ref: str) -> FiniteGroup:
    """A finite group: a bare group description, or a toolkit input with one vertex and no edges."""
    doc, _, name = _read_doc(ref)
    if isinstance(doc, dict) and ("table" in doc or "perm_gens" in doc):
        return group_from_json(doc, name)
    gog = from_json(doc, name).check()
    if len(gog.vertices) != 1 or gog.edges:
        raise InputError("model must be a single finite group")
    return gog.group(0)


def _word(inp: ToolkitInput, text: str, loop: bool = True) -> words.PathWord:
    text = inp.words.get(text, text)
    return words.parse_word(inp.gog, text, inp.gog.basepoint if loop else None, loop)


def _hom(inp: ToolkitInput, name: str, target: ToolkitInput | None = None) -> homs.HomSpec:
    if name == "id":
        if target is not None and target.gog is not inp.gog:
            raise InputError("'id' needs the source as its target")
        return homs.identity_hom(inp.gog)
    if name not in inp.homs:
        raise InputError(f"unknown homomorphism {name!r}")
    doc = inp.homs[name]
    if target is None:
        target = inp
        if "target" in doc:
            target = load_input(doc["target"], inp.path.parent if inp.path else None)
    h = homs.hom_from_json(inp.gog, target.gog, doc, name)
    bad = homs.validate_hom(h)
    if bad is not None:
        raise InputError(f"{name}: relator not preserved: {bad}")
    return h


def _anchor(inp: ToolkitInput, args) -> words.SubgroupAnchor:
    g = inp.gog
    if args.edge:
        if args.edge not in g.eindex:
            raise InputError(f"unknown edge {args.edge!r}")
        return transport.edge_anchor(g, args.edge, args.side)
    if args.vertex:
        if args.vertex not in g.vindex:
            raise InputError(f"unknown vertex {args.vertex!r}")
        if args.elements is None:
            return transport.vertex_group_anchor(g, args.vertex)
        G = g.group(g.vindex[args.vertex])
        try:
            gens = [int(s) for s in args.elements.split(",") if s.strip()]
        except ValueError:
            raise InputError("elements must be comma-separated integers") from None
        if any(not 0 <= a < G.order for a in gens):
            raise InputError("element index out of range")
        return transport.anchor_at(g, args.vertex, make_subgroup(G, gens).elements)
    raise InputError("give --edge or --vertex")


# ----------------------------------------------------------------- commands


def cmd_check_cohopf(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    v = decide_cohopf(inp.gog, with_witness=not args.no_witness)
    report = {"input": inp.gog.name, **v.describe()}
    code = {CO_HOPFIAN: EXIT_YES, NOT_CO_HOPFIAN: EXIT_NO}.get(v.verdict, EXIT_UNKNOWN)
    return report, code


def cmd_classes(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    cls = transport.maximal_finite_classes(inp.gog) if args.maximal else transport.finite_classes(inp.gog)
    return {"input": inp.gog.name, "maximal_only": bool(args.maximal), "count": len(cls), "classes": [c.describe() for c in cls]}, EXIT_YES


def cmd_normalizer(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    a = _anchor(inp, args)
    res = transport.normalizer_in_G(a)
    code = {"finite": EXIT_YES, "infinite": EXIT_NO}.get(res.status, EXIT_UNKNOWN)
    return {"subgroup": a.describe(), **res.describe()}, code


def cmd_cylinders(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    strata = cylinder_check(inp.gog)
    if args.k is not None:
        strata = [s for s in strata if s.k == args.k]
    report = {"input": inp.gog.name, "strata": [s.describe() for s in strata], "summary": cylinder_summary(strata)}
    red = inp.gog.reduce()
    orders = {e.group.order for e in red.edges}
    if len(orders) <= 1 and (args.k is None or orders <= {args.k}):
        report["tree_of_cylinders"] = transport.tree_of_cylinders(red).describe()
    code = {"bounded": EXIT_YES, "unbounded": EXIT_NO}.get(report["summary"], EXIT_UNKNOWN)
    return report, code


def cmd_nf(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    w = _word(inp, args.word, loop=False)
    n = words.normal_form(w)
    out = {
        "word": words.format_word(w),
        "normal_form": words.format_word(n),
        "length": n.length,
        "identity": words.is_identity(n),
    }
    if n.is_loop():
        o = words.element_order(n)
        out["order"] = "infinite" if o == words.INFINITE else o
    return out, EXIT_YES


def cmd_hom_equiv(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    tgt = load_input(args.target) if args.target else None
    if tgt is None:
        # one shared target object, so both homs land in the same graph
        named = [inp.homs[n]["target"] for n in (args.phi, args.psi) if "target" in inp.homs.get(n, {})]
        if named:
            tgt = load_input(named[0], inp.path.parent if inp.path else None)
    f, g = _hom(inp, args.phi, tgt), _hom(inp, args.psi, tgt)
    eq = homs.are_equivalent(f, g)
    return {"phi": args.phi, "psi": args.psi, **eq.describe()}, EXIT_YES if eq else EXIT_NO


def cmd_class_permuting(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    f = _hom(inp, args.phi)
    if f.target is not f.source:
        raise InputError("class-permuting needs an endomorphism")
    cp = homs.is_class_permuting(f)
    out = {"phi": args.phi, **cp.describe()}
    if cp.permuting:
        n = homs.equivalent_power_exponent(f)
        out["power_equivalent_to_identity"] = n
        if n is None:
            return out, EXIT_UNKNOWN
    return out, EXIT_YES if cp.permuting else EXIT_NO


def cmd_fold_trace(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    tgt = load_input(args.target) if args.target else None
    phi = _hom(inp, args.phi, tgt)
    tr = fold_trace(phi)
    out = {"phi": args.phi, **tr.describe()}
    if tr.terminal == "infinite-vertex-group":
        return out, EXIT_NO  # a kernel certificate: not injective
    if tr.terminal == "isometry" and tr.kernel_element is None:
        return out, EXIT_YES
    return out, EXIT_NO if tr.kernel_element is not None else EXIT_UNKNOWN


def cmd_emit(args) -> tuple[dict, int]:
    inp = load_input(args.file)
    g = inp.gog
    extra = []
    if args.kind == "psi":
        f = folang.emit_psi(g)
    elif args.kind == "theta":
        f = folang.emit_theta(g)
        extra.append(f"N = {folang.group_bound(g)}")
    elif args.kind == "mu":
        names = args.words or sorted(inp.words)
        if not names:
            raise InputError("mu needs --words (or a 'words' table in the input)")
        F = [_word(inp, n) for n in names]
        f = folang.emit_mu(g, F)
        extra.extend(f"w{i} = {words.format_word(w)}" for i, w in enumerate(F, 1))
    else:
        if args.tuple is not None:
            if args.tuple not in inp.tuples:
                raise InputError(f"unknown tuple {args.tuple!r}")
            texts = inp.tuples[args.tuple]
        else:
            texts = args.words or []
        u = [_word(inp, t) for t in texts]
        f = folang.emit_mu_tuple(g, u)
        extra.extend(f"u{i} = {words.format_word(w)}" for i, w in enumerate(u, 1))
    text = folang.emit_text(f, folang.header(g, args.kind, extra))
    out = {
        "kind": args.kind,
        "free_variables": folang.free_variables(f),
        "prefix": folang.quantifier_prefix(f)[0],
        "characters": len(text),
    }
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        out["output"] = args.output
    else:
        out["formula"] = folang.format_formula(f)
    return out, EXIT_YES


def cmd_eval(args) -> tuple[dict, int]:
    p = Path(args.formula)
    text = p.read_text(encoding="utf-8") if p.exists() else args.formula
    f = folang.parse(text)
    G = load_model(args.model)
    pos = {lab: i for i, lab in enumerate(G.labels)}
    env = {}
    for item in (args.assign or "").split(","):
        if not item.strip():
            continue
        name, sep, val = item.partition("=")
        if not sep:
            raise InputError(f"bad assignment {item!r}, expected name=element")
        try:
            env[name.strip()] = pos[int(val)]
        except (ValueError, KeyError):
            raise InputError(f"bad element in assignment {item!r}") from None
    val = folang.eval_finite(f, G, env)
    return {"value": "true" if val else "false", "model_order": G.order}, EXIT_YES if val else EXIT_NO


# ------------------------------------------------------------------ plumbing


def _text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, list) and v and not any(isinstance(x, (dict, list)) for x in v):
                lines.append(f"{pad}{k}: " + ", ".join(_scalar(x) for x in v))
            elif isinstance(v, (dict, list)) and v:
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                sub = _text(v, indent + 1)
                lines.append(f"{pad}- " + sub[0].lstrip())
                lines.extend(sub[1:])
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(obj))
    return lines


def _scalar(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, (dict, list)):
        return "none"
    return str(v)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vfk", description="Virtually free groups as finite graphs of finite groups.")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON output (default)")
    mode.add_argument("--text", dest="fmt", action="store_const", const="text", help="indented text output")
    p.set_defaults(fmt="json")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check-cohopf", help="decide co-Hopficity")
    s.add_argument("file")
    s.add_argument("--no-witness", action="store_true", help="skip building the witness endomorphism")
    s.set_defaults(func=cmd_check_cohopf)

    s = sub.add_parser("classes", help="conjugacy classes of finite subgroups")
    s.add_argument("file")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--maximal", action="store_true")
    g.add_argument("--all", dest="maximal", action="store_false")
    s.set_defaults(func=cmd_classes)

    s = sub.add_parser("normalizer", help="normalizer of a finite subgroup")
    s.add_argument("file")
    s.add_argument("--edge")
    s.add_argument("--side", choices=("origin", "terminus"), default="origin")
    s.add_argument("--vertex")
    s.add_argument("--elements", help="comma-separated generators inside the vertex group")
    s.set_defaults(func=cmd_normalizer)

    s = sub.add_parser("cylinders", help="cylinder boundedness per edge order, tree of cylinders")
    s.add_argument("file")
    s.add_argument("-k", type=int)
    s.set_defaults(func=cmd_cylinders)

    s = sub.add_parser("nf", help="normal form of a word")
    s.add_argument("file")
    s.add_argument("word", help="word text, or a name from the input's 'words'")
    s.set_defaults(func=cmd_nf)

    s = sub.add_parser("hom-equiv", help="are two homomorphisms equivalent")
    s.add_argument("file")
    s.add_argument("phi")
    s.add_argument("psi")
    s.add_argument("--target")
    s.set_defaults(func=cmd_hom_equiv)

    s = sub.add_parser("class-permuting", help="is an endomorphism class-permuting")
    s.add_argument("file")
    s.add_argument("phi")
    s.set_defaults(func=cmd_class_permuting)

    s = sub.add_parser("fold-trace", help="collapse/fold trace and kernel certificate")
    s.add_argument("file")
    s.add_argument("phi")
    s.add_argument("--target")
    s.set_defaults(func=cmd_fold_trace)

    s = sub.add_parser("emit", help="write a first-order formula")
    s.add_argument("file")
    s.add_argument("kind", choices=("psi", "theta", "mu", "mu-tuple"))
    s.add_argument("-o", "--output")
    s.add_argument("--words", nargs="*", help="words (text or names) for mu / mu-tuple")
    s.add_argument("--tuple", help="name of a tuple from the input's 'tuples'")
    s.set_defaults(func=cmd_emit)

    s = sub.add_parser("eval", help="evaluate a formula in a finite group")
    s.add_argument("formula", help="formula file or formula text")
    s.add_argument("model", help="group file or bundled single-vertex example")
    s.add_argument("--assign", help="comma-separated name=element")
    s.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except (InputError, GraphError, GroupError, homs.HomError, words.WordError, folang.FormulaSyntaxError, ValueError) as exc:
        print(json.dumps({"error": str(exc)}) if args.fmt == "json" else f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceeded as exc:
        print(json.dumps({"error": str(exc), "verdict": "unknown"}) if args.fmt == "json" else f"capped: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    if args.fmt == "json":
        print(json.dumps(report, indent=2))
    else:
        print("\n".join(_text(report)))
    return code


if __name__ == "__main__":
    sys.exit(main())
