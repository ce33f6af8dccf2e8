"""Cross-check the cylinder criterion against the normalizer criterion on random graphs.

    python3 scripts/random_consistency.py --n 500 --seed 3
"""

import argparse
import collections
import random
import time

from vfk.cohopf import CO_HOPFIAN, NOT_CO_HOPFIAN, decide_cohopf, cylinder_check, cylinder_summary
from vfk.gog import to_json
from vfk.randgen import random_gog


def run(n: int, seed: int, max_vertices: int = 3, max_order: int = 12):
    rng = random.Random(seed)
    table = collections.Counter()
    bad = []
    for i in range(n):
        g = random_gog(rng, max_vertices, max_order)
        verdict = decide_cohopf(g, with_witness=False).verdict
        cyl = cylinder_summary(cylinder_check(g))
        table[verdict, cyl] += 1
        if (verdict == CO_HOPFIAN and cyl == "unbounded") or (verdict == NOT_CO_HOPFIAN and cyl == "bounded"):
            bad.append((i, to_json(g)))
    return table, bad


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-vertices", type=int, default=3)
    ap.add_argument("--max-order", type=int, default=12)
    a = ap.parse_args()
    t0 = time.time()
    table, bad = run(a.n, a.seed, a.max_vertices, a.max_order)
    unknown = sum(c for (v, m), c in table.items() if "unknown" in (v, m))
    for (v, m), c in sorted(table.items()):
        print(f"{v:>15} | {m:<10} {c}")
    print(f"contradictions: {len(bad)}  unknown rate: {unknown / a.n:.1%}  time: {time.time() - t0:.1f}s")
    for i, doc in bad[:3]:
        print(i, doc)


if __name__ == "__main__":
    main()
