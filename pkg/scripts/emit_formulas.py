"""Write psi, theta, mu and mu(u) for every bundled example into a directory."""

import argparse
from pathlib import Path

from vfk import folang
from vfk.corpus import NAMES, load, load_doc
from vfk.words import WordError, generator_word, parse_word


def _loop(g, text):
    try:
        return parse_word(g, text, g.basepoint)
    except WordError:
        return None  # words based elsewhere are not elements of pi_1


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="formulas")
    a = ap.parse_args()
    out = Path(a.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        g = load(name)
        doc = load_doc(name)
        F = [w for w in (_loop(g, t) for t in doc.get("words", {}).values()) if w is not None]
        if not F and g.generators:
            F = [generator_word(g, 0)]
        tup = [parse_word(g, w, g.basepoint) for w in next(iter(doc.get("tuples", {}).values()), [])]
        emitted = {
            "psi": folang.emit_psi(g),
            "theta": folang.emit_theta(g),
            "mu-tuple": folang.emit_mu_tuple(g, tup),
        }
        if F:
            emitted["mu"] = folang.emit_mu(g, F)
        for kind, f in emitted.items():
            path = out / f"{name}.{kind}.txt"
            path.write_text(folang.emit_text(f, folang.header(g, kind)), encoding="utf-8")
            assert folang.parse(path.read_text(encoding="utf-8")) == f
            print(f"{path}  {len(path.read_text())} chars")


if __name__ == "__main__":
    main()
