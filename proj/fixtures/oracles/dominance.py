#!/usr/bin/env python3
"""Manual dominance enumeration over a replay fixture's metric rows.

Scores are compared as integers in units of 1e-4. Prints the pairwise
dominance relation and the non-dominated set reached by every insertion order.

  dominance.py [FIXTURE]      default: ../replay_trajectory.json
"""

import itertools
import json
import sys
from pathlib import Path


def ticks(row):
    return tuple(round(row["metrics"][d] * 10000) for d in ("SAFE", "BENIGN", "IF"))


def dominates(a, b):
    ge = all(x >= y for x, y in zip(a, b))
    gt = any(x > y for x, y in zip(a, b))
    return ge and gt


def archive(order):
    kept = []
    for label, v in order:
        if any(dominates(w, v) for _, w in kept):
            continue
        kept = [(l, w) for l, w in kept if not dominates(v, w)]
        kept.append((label, v))
    return sorted(l for l, _ in kept)


def main():
    path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "replay_trajectory.json"
    rows = json.loads(path.read_text())["rows"]
    vecs = [(r["label"], ticks(r)) for r in rows]
    pairs = [[a, b] for (a, va), (b, vb) in itertools.permutations(vecs, 2) if dominates(va, vb)]
    fronts = {tuple(archive(p)) for p in itertools.permutations(vecs)}
    out = {
        "dominating_pairs": sorted(pairs),
        "non_dominated": sorted({l for f in fronts for l in f}),
        "orders": sum(1 for _ in itertools.permutations(vecs)),
        "order_independent": len(fronts) == 1,
        "front_metrics": {l: [x / 10000 for x in v] for l, v in vecs if any(l in f for f in fronts)},
    }
    print(json.dumps(out, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
