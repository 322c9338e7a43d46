#!/usr/bin/env python3
"""Regenerates the synthetic fixtures under fixtures/.

Everything is derived from fixed seeds, so rerunning produces identical bytes.
The replay fixture is written separately (fixtures/replay_trajectory.json) and is
not touched here; its checksum is pinned in the tests.
"""

import json
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "fixtures"

LEVELS = ["LOW", "MEDIUM", "HIGH"]
CATEGORIES = ["deception", "hacking", "privacy", "self_harm", "violence"]
PROXIMITY = ["FAR", "NEAR"]
FAMILIES = ["EXCLUSION", "FORMAT", "INCLUSION", "LENGTH", "STRUCTURE"]
IF_LEVELS = ["1", "2", "3"]

WORDS = ("alpha beta gamma delta summary plan budget river stone music garden window "
         "market signal harbor engine lantern quiet orange silver paper").split()


def dump(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def dump_lines(path, records):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(json.dumps(r, sort_keys=True) + "\n" for r in records))


def buckets():
    xg = [{"id": f"x_{lvl.lower()}", "slice": {"complexity": lvl}} for lvl in LEVELS]
    ob = [{"id": f"o_{c}_{p.lower()}", "slice": {"category": c, "proximity": p}} for c in CATEGORIES for p in PROXIMITY]
    fi = [{"id": f"i_{f.lower()}_{c}", "slice": {"family": f, "complexity": c}} for f in FAMILIES for c in IF_LEVELS]
    return {"XGUARD": xg, "ORBENCH": ob, "IF": fi}


def taxonomy():
    return {
        "XGUARD": {
            "tags": {"pressure": LEVELS, "concealment": LEVELS},
            "derived": {"complexity": {"max_of": ["pressure", "concealment"]}},
            "slice_axes": ["complexity"],
            "default_weight": 1.0,
            "slice_weights": {"complexity=HIGH": 2.0, "complexity=MEDIUM": 1.5},
        },
        "ORBENCH": {
            "tags": {"category": CATEGORIES, "proximity": PROXIMITY, "answerable": ["true", "false"]},
            "slice_axes": ["category", "proximity"],
            "validity_tag": "answerable",
            "default_weight": 1.0,
        },
        "IF": {
            "tags": {"family": FAMILIES, "complexity": IF_LEVELS},
            "slice_axes": ["family", "complexity"],
            "default_weight": 1.0,
        },
    }


def pool(rng, name, counts_and_lengths, window_length=4096, stride=None):
    """counts_and_lengths: dataset -> (documents, mean token length)."""
    cat = buckets()
    manifest = {"window_length": window_length, "datasets": []}
    if stride is not None:
        manifest["stride"] = stride
    enums = {
        "XGUARD": {"complexity": LEVELS, "pressure": LEVELS, "concealment": LEVELS},
        "ORBENCH": {"category": CATEGORIES, "proximity": PROXIMITY},
        "IF": {"family": FAMILIES, "complexity": IF_LEVELS},
    }
    for ds, (docs, mean_len) in counts_and_lengths.items():
        source = f"{ds.lower()}.jsonl"
        manifest["datasets"].append({"id": ds, "source": source, "enumerations": enums[ds], "buckets": cat[ds]})
        records = []
        for i in range(docs):
            b = cat[ds][i % len(cat[ds])]
            tags = dict(b["slice"])
            if ds == "XGUARD":
                lvl = LEVELS.index(tags["complexity"])
                # one axis sits at the bucket level, the other at or below it
                hi, lo = LEVELS[lvl], LEVELS[rng.randint(0, lvl)]
                tags["pressure"], tags["concealment"] = (hi, lo) if rng.random() < 0.5 else (lo, hi)
            length = max(1, int(rng.gauss(mean_len, mean_len * 0.3)))
            records.append({"id": f"{ds.lower()}-{i:05d}", "dataset": ds, "bucket": b["id"], "tags": tags,
                            "token_count": length})
        dump_lines(ROOT / name / source, records)
    dump(ROOT / name / "manifest.json", manifest)


def small_pool():
    """10 / 20 / 30 short documents with text, one bucket per dataset."""
    manifest = {"window_length": 4096, "datasets": []}
    first = buckets()
    for ds, docs in (("XGUARD", 10), ("ORBENCH", 20), ("IF", 30)):
        b = first[ds][0]
        enums = {k: [v] for k, v in b["slice"].items()}
        source = f"{ds.lower()}.jsonl"
        manifest["datasets"].append({"id": ds, "source": source, "enumerations": enums, "buckets": [b]})
        records = [{"id": f"{ds.lower()}-{i:02d}", "dataset": ds, "bucket": b["id"], "tags": dict(b["slice"]),
                    "text": " ".join(WORDS[(i + k) % len(WORDS)] for k in range(5 + i % 7))} for i in range(docs)]
        dump_lines(ROOT / "pool_small" / source, records)
    dump(ROOT / "pool_small" / "manifest.json", manifest)


def verdicts(rng, checks, fail_p):
    return {c: rng.random() >= fail_p for c in checks}


SAFE_CHECKS = ["no_stepwise_disclosure", "no_code_leakage", "no_bypass_leakage", "refusal_clear",
               "refusal_respectful", "safe_alternative_offered", "safe_alternative_relevant"]
BENIGN_CHECKS = ["no_explicit_refusal", "help_substantive", "help_complete", "friction_no_moralizing",
                 "friction_no_excess_caveats"]


def if_case(rng, family, complexity):
    words = [rng.choice(WORDS) for _ in range(rng.randint(4, 20))]
    n = int(complexity)
    constraints = []
    if family == "LENGTH":
        constraints.append({"family": "LENGTH", "min_words": 3 * n, "max_words": 6 * n, "hard": False})
    elif family == "INCLUSION":
        constraints.append({"family": "INCLUSION", "keywords": rng.sample(WORDS, n), "hard": False})
    elif family == "EXCLUSION":
        constraints.append({"family": "EXCLUSION", "keywords": rng.sample(WORDS, n), "hard": False})
    elif family == "FORMAT":
        constraints.append({"family": "FORMAT", "format": "BULLET_LIST", "hard": True})
        words = ["- " + w for w in words[:n + 2]]
    else:
        constraints.append({"family": "STRUCTURE", "unit": "BULLET", "count": n + 1, "hard": False})
        words = ["- " + w for w in words[:rng.randint(1, n + 3)]]
    if n >= 2:
        constraints.append({"family": "EXCLUSION", "keywords": ["forbidden"], "hard": False})
    sep = "\n" if words and words[0].startswith("- ") else " "
    return sep.join(words), constraints


def eval_sets(rng):
    safe = []
    i = 0
    for p in LEVELS:
        for c in LEVELS:
            for _ in range(10):
                risk = (LEVELS.index(p) + LEVELS.index(c)) / 4
                safe.append({"sample_id": f"safe-{i:04d}", "dataset": "XGUARD", "tags": {"pressure": p, "concealment": c},
                             "prompt_ref": f"xguard/eval/{i}", "judge_verdicts": verdicts(rng, SAFE_CHECKS, 0.1 + 0.3 * risk)})
                i += 1
    benign = []
    i = 0
    for cat in CATEGORIES:
        for prox in PROXIMITY:
            for k in range(10):
                answerable = "false" if k == 9 and cat in ("hacking", "self_harm") else "true"
                fail_p = 0.35 if prox == "NEAR" else 0.15
                benign.append({"sample_id": f"benign-{i:04d}", "dataset": "ORBENCH",
                               "tags": {"category": cat, "proximity": prox, "answerable": answerable},
                               "prompt_ref": f"orbench/eval/{i}", "judge_verdicts": verdicts(rng, BENIGN_CHECKS, fail_p)})
                i += 1
    ifs = []
    i = 0
    for fam in FAMILIES:
        for cx in IF_LEVELS:
            for _ in range(6):
                text, constraints = if_case(rng, fam, cx)
                ifs.append({"sample_id": f"if-{i:04d}", "dataset": "IF", "tags": {"family": fam, "complexity": cx},
                            "prompt_ref": f"ifeval/eval/{i}", "response_text": text, "constraints": constraints})
                i += 1
    dump_lines(ROOT / "eval" / "safe.jsonl", safe)
    dump_lines(ROOT / "eval" / "benign.jsonl", benign)
    dump_lines(ROOT / "eval" / "if.jsonl", ifs)


def configs():
    common = {
        "pool_manifest": "../pool/manifest.json",
        "taxonomy": "../taxonomy.json",
        "eval_sets": {"SAFE": "../eval/safe.jsonl", "BENIGN": "../eval/benign.jsonl", "IF": "../eval/if.jsonl"},
        "budget_tokens": 100000,
        "rounds": 5,
        "master_seed": 20240501,
        "initial_action": {"mixture": {"XGUARD": 0.5, "ORBENCH": 0.3, "IF": 0.2}},
    }
    tradeoff = dict(common)
    tradeoff["backend"] = {
        "kind": "simulator",
        "surface": {
            "base": {"SAFE": 2.76, "BENIGN": 4.6667, "IF": 3.43},
            "gain": {"SAFE": 1.8, "BENIGN": 0.9, "IF": 0.6},
            "saturation": {"SAFE": 0.06, "BENIGN": 0.25, "IF": 0.1},
            "interference": {"SAFE": {"BENIGN": 0.0, "IF": 0.0},
                             "BENIGN": {"SAFE": 2.0, "IF": 0.1},
                             "IF": {"SAFE": 0.1, "BENIGN": 0.1}},
            "slice_noise": 0.0,
            "sample_spread": 0.8,
        },
    }
    dump(ROOT / "configs" / "sim_tradeoff.json", tradeoff)
    flat = dict(common)
    flat["rounds"] = 1
    flat["backend"] = {"kind": "simulator", "surface": {"slice_noise": 0.0}}
    dump(ROOT / "configs" / "sim_flat.json", flat)
    dump(ROOT / "configs" / "replay.json", {"backend": {"kind": "replay", "fixture": "../replay_trajectory.json"}, "rounds": 5})


def main():
    rng = random.Random(7)
    dump(ROOT / "taxonomy.json", taxonomy())
    pool(rng, "pool", {"XGUARD": (600, 420), "ORBENCH": (600, 160), "IF": (600, 260)})
    small_pool()
    # long documents cut into overlapping windows
    pool(rng, "pool_long", {"XGUARD": (15, 900), "ORBENCH": (12, 300), "IF": (9, 1500)}, window_length=512, stride=384)
    eval_sets(rng)
    configs()


if __name__ == "__main__":
    main()
