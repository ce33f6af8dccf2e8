"""Regenerate the bundled example files in src/vfk/corpus/ from the builders."""

import json
from pathlib import Path

from vfk.cohopf import hnn_witness
from vfk.corpus import BUILDERS
from vfk.gog import to_json
from vfk.homs import dehn_twist
from vfk.words import format_word, parse_word

OUT = Path(__file__).resolve().parents[1] / "src" / "vfk" / "corpus"


def extras(name, gog):
    doc = {}
    if name == "gl2z":
        doc["words"] = {
            "relator": "u:2 . e+ . w:3 . e-",
            "d4_s": "u:4",
            "d4_rs": "u:5",
            "d4_center": "u:2",
        }
        doc["tuples"] = {"center": ["u:2"]}
    elif name == "sl2z":
        doc["homs"] = {"to_z12": {"target": "z12", "images": {"u:1": "z:3", "w:1": "z:2"}}}
    elif name == "psl2z":
        doc["words"] = {"xy": "u:1 . e+ . w:1 . e-"}
        doc["homs"] = {"kill_y": {"images": {"u:1": "u:1", "w:1": "u:0"}}}
    elif name == "cohopfoutinfini":
        h = parse_word(gog, "B:2 . e2+ . C:2 . e2-", "B")
        tw = dehn_twist(gog, "e1", h)
        doc["words"] = {"twist_loop": format_word(h)}
        doc["homs"] = {"twist": tw.hom.to_json(), "twist_inv": tw.inverse.to_json()}
    elif name in ("gl2z-hnn", "s3-hnn"):
        w = hnn_witness(gog, "t")
        doc["homs"] = {"hnn_witness": w.hom.to_json()}
    return doc


def main():
    for name, build in BUILDERS.items():
        gog = build()
        doc = to_json(gog)
        doc.update(extras(name, gog))
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
