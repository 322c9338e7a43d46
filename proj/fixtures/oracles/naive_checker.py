#!/usr/bin/env python3
"""Brute-force reference for the instruction-following constraint checks.

Written as a plain scan per rule, without sharing code or libraries with the
C++ checker (the JSON test uses its own recursive validator).

  naive_checker.py generate [--seed S] [--per-family N]   cases + verdicts as JSONL
  naive_checker.py check FILE                             re-derive verdicts for FILE
"""

import argparse
import json
import random
import sys

WS = " \t\n\r\v\f"


# ---------------------------------------------------------------------------
# Rule semantics
# ---------------------------------------------------------------------------

def words(text):
    out, cur = [], ""
    for ch in text:
        if ch in WS:
            if cur:
                out.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        out.append(cur)
    return out


def lower(s):
    return "".join(chr(ord(c) + 32) if "A" <= c <= "Z" else c for c in s)


def is_word_char(c):
    return ("a" <= c <= "z") or ("A" <= c <= "Z") or ("0" <= c <= "9")


def has_keyword(text, kw):
    h, n = lower(text), lower(kw)
    for i in range(len(h) - len(n) + 1):
        if h[i:i + len(n)] != n:
            continue
        left_ok = i == 0 or not is_word_char(h[i - 1])
        right_ok = i + len(n) == len(h) or not is_word_char(h[i + len(n)])
        if left_ok and right_ok:
            return True
    return False


def lines(text):
    out = text.split("\n")
    return [l[:-1] if l.endswith("\r") else l for l in out]


def blank(line):
    return all(c in " \t\r" for c in line)


def bullet(line):
    body = line.lstrip(" \t")
    return body.startswith("- ") or body.startswith("* ")


class JsonScan:
    """Minimal RFC 8259 recogniser."""

    def __init__(self, s):
        self.s, self.i = s, 0

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else ""

    def ws(self):
        while self.peek() in (" ", "\t", "\n", "\r") and self.peek() != "":
            self.i += 1

    def lit(self, word):
        if self.s[self.i:self.i + len(word)] != word:
            raise ValueError
        self.i += len(word)

    def value(self):
        self.ws()
        c = self.peek()
        if c == "{":
            self.obj()
        elif c == "[":
            self.arr()
        elif c == '"':
            self.string()
        elif c == "t":
            self.lit("true")
        elif c == "f":
            self.lit("false")
        elif c == "n":
            self.lit("null")
        elif c == "-" or c.isdigit() and c != "":
            self.number()
        else:
            raise ValueError
        self.ws()

    def obj(self):
        self.i += 1
        self.ws()
        if self.peek() == "}":
            self.i += 1
            return
        while True:
            self.ws()
            if self.peek() != '"':
                raise ValueError
            self.string()
            self.ws()
            if self.peek() != ":":
                raise ValueError
            self.i += 1
            self.value()
            if self.peek() == ",":
                self.i += 1
                continue
            if self.peek() == "}":
                self.i += 1
                return
            raise ValueError

    def arr(self):
        self.i += 1
        self.ws()
        if self.peek() == "]":
            self.i += 1
            return
        while True:
            self.value()
            if self.peek() == ",":
                self.i += 1
                continue
            if self.peek() == "]":
                self.i += 1
                return
            raise ValueError

    def hex4(self):
        h = self.s[self.i:self.i + 4]
        if len(h) != 4 or any(c not in "0123456789abcdefABCDEF" for c in h):
            raise ValueError
        self.i += 4
        return int(h, 16)

    def string(self):
        self.i += 1
        while True:
            c = self.peek()
            if c == "":
                raise ValueError
            self.i += 1
            if c == '"':
                return
            if ord(c) < 0x20:
                raise ValueError
            if c == "\\":
                e = self.peek()
                self.i += 1
                if e in '"\\/bfnrt' and e != "":
                    continue
                if e != "u":
                    raise ValueError
                cp = self.hex4()
                if 0xDC00 <= cp <= 0xDFFF:
                    raise ValueError
                if 0xD800 <= cp <= 0xDBFF:
                    if self.s[self.i:self.i + 2] != "\\u":
                        raise ValueError
                    self.i += 2
                    lo = self.hex4()
                    if not 0xDC00 <= lo <= 0xDFFF:
                        raise ValueError

    def digits(self):
        start = self.i
        while self.peek() != "" and self.peek() in "0123456789":
            self.i += 1
        if self.i == start:
            raise ValueError

    def number(self):
        if self.peek() == "-":
            self.i += 1
        if self.peek() == "0":
            self.i += 1
        else:
            if self.peek() == "" or self.peek() not in "123456789":
                raise ValueError
            self.digits()
        if self.peek() == ".":
            self.i += 1
            self.digits()
        if self.peek() in ("e", "E") and self.peek() != "":
            self.i += 1
            if self.peek() in ("+", "-") and self.peek() != "":
                self.i += 1
            self.digits()


def is_json_object(text):
    scan = JsonScan(text)
    scan.ws()
    if scan.peek() != "{":
        return False
    try:
        scan.value()
    except (ValueError, IndexError):
        return False
    return scan.i == len(text)


def check(text, spec):
    fam = spec["family"]
    if fam == "LENGTH":
        n = len(words(text))
        lo, hi = spec.get("min_words"), spec.get("max_words")
        return (lo is None or n >= lo) and (hi is None or n <= hi)
    if fam == "INCLUSION":
        return all(has_keyword(text, k) for k in spec["keywords"])
    if fam == "EXCLUSION":
        return not any(has_keyword(text, k) for k in spec["keywords"])
    if fam == "FORMAT":
        kind = spec["format"]
        if kind == "JSON_OBJECT":
            return is_json_object(text)
        if kind == "BULLET_LIST":
            body = [l for l in lines(text) if not blank(l)]
            return len(body) > 0 and all(bullet(l) for l in body)
        if kind == "LOWERCASE":
            return not any("A" <= c <= "Z" for c in text)
        raise ValueError(kind)
    if fam == "STRUCTURE":
        unit, count, exact = spec["unit"], spec["count"], spec.get("exact", False)
        n, inside = 0, False
        for l in lines(text):
            if unit == "SECTION" and l.lstrip(" \t").startswith("#"):
                n += 1
            elif unit == "BULLET" and bullet(l):
                n += 1
            elif unit == "PARAGRAPH":
                if not blank(l) and not inside:
                    n += 1
                inside = not blank(l)
        return n == count if exact else n >= count
    raise ValueError(fam)


# ---------------------------------------------------------------------------
# Case generation
# ---------------------------------------------------------------------------

VOCAB = ["apple", "Apple", "banana", "cat", "category", "dog", "e-mail", "ice cream", "json", "x1", "x", "plan",
         "summary", "Summary", "data", "data2", "item", "_tag", "note", "end"]
PUNCT = [" ", " ", " ", "  ", "\n", "\t", ", ", ". ", "-", "_", "!", "\r\n", "\n\n", "'", "\""]


def random_text(rng):
    n = rng.randint(0, 25)
    parts = []
    for _ in range(n):
        parts.append(rng.choice(VOCAB))
        parts.append(rng.choice(PUNCT))
    text = "".join(parts)
    if rng.random() < 0.3:
        text = text.upper() if rng.random() < 0.5 else text.lower()
    return text


def random_lines(rng):
    out = []
    for _ in range(rng.randint(0, 8)):
        kind = rng.random()
        word = rng.choice(VOCAB)
        if kind < 0.35:
            out.append(rng.choice(["- ", "* ", "  - ", "\t* ", "-", "*", "+ "]) + word)
        elif kind < 0.5:
            out.append(rng.choice(["# ", "## ", "  #", "#"]) + word)
        elif kind < 0.7:
            out.append(rng.choice(["", " ", "\t", "\r"]))
        else:
            out.append(word + " " + rng.choice(VOCAB))
    return rng.choice(["\n", "\r\n"]).join(out)


def random_json_value(rng, depth=0):
    r = rng.random()
    if depth > 2 or r < 0.3:
        return rng.choice(['1', '-0', '0.5', '12e3', '-1.25E-2', 'true', 'false', 'null', '"a"', '"x\\"y"',
                           '"\\u0041"', '"tab\\tok"', '""'])
    if r < 0.65:
        items = [random_json_value(rng, depth + 1) for _ in range(rng.randint(0, 3))]
        return "[" + ", ".join(items) + "]"
    return random_json_object(rng, depth + 1)


def random_json_object(rng, depth=0):
    members = [f'"{rng.choice(VOCAB)}": {random_json_value(rng, depth)}' for _ in range(rng.randint(depth == 0, 3))]
    return "{" + rng.choice(["", " ", "\n"]).join([", ".join(members)]) + "}"


BREAKERS = [
    lambda s: s[:-1],                                   # truncated
    lambda s: s.replace(":", "", 1),                     # missing colon
    lambda s: s.replace('"', "'"),                       # single quotes
    lambda s: s[:-1] + ",}",                             # trailing comma
    lambda s: s + " x",                                  # trailing garbage
    lambda s: s.replace("1", "01", 1),                   # leading zero
    lambda s: s.replace("0.5", ".5", 1),                 # bare fraction
    lambda s: s.replace("true", "True", 1),              # bad literal
    lambda s: s.replace('"a"', '"a\tb"', 1),              # raw control char
    lambda s: s.replace('"a"', '"\\ud800"', 1),           # lone surrogate
    lambda s: s.replace("12e3", "12e", 1),               # empty exponent
    lambda s: "[" + s + "]",                             # not an object
    lambda s: "  " + s + "\n ",                          # whitespace only (valid)
]


def json_text(rng):
    s = random_json_object(rng)
    if rng.random() < 0.75:
        s = rng.choice(BREAKERS)(s)
    return s


def keywords(rng):
    return rng.sample(VOCAB, rng.randint(1, 3))


def spec_for(rng, family):
    if family == "LENGTH":
        lo = rng.choice([None, rng.randint(0, 20)])
        hi = rng.choice([None, rng.randint(0, 40)])
        if lo is None and hi is None:
            lo = rng.randint(1, 10)
        if lo is not None and hi is not None and lo > hi:
            lo, hi = hi, lo
        spec = {"family": "LENGTH"}
        if lo is not None:
            spec["min_words"] = lo
        if hi is not None:
            spec["max_words"] = hi
        return spec
    if family in ("INCLUSION", "EXCLUSION"):
        return {"family": family, "keywords": keywords(rng)}
    if family == "FORMAT":
        return {"family": "FORMAT", "format": rng.choice(["JSON_OBJECT", "BULLET_LIST", "LOWERCASE"])}
    return {"family": "STRUCTURE", "unit": rng.choice(["SECTION", "BULLET", "PARAGRAPH"]),
            "count": rng.randint(0, 4), "exact": rng.random() < 0.5}


def response_for(rng, specs):
    fam = specs[0]["family"]
    if fam == "FORMAT" and specs[0]["format"] == "JSON_OBJECT":
        return json_text(rng)
    if fam in ("FORMAT", "STRUCTURE"):
        return random_lines(rng)
    return random_text(rng)


def generate(seed, per_family):
    rng = random.Random(seed)
    for family in ("FORMAT", "LENGTH", "INCLUSION", "EXCLUSION", "STRUCTURE"):
        for i in range(per_family):
            specs = [spec_for(rng, family) for _ in range(rng.randint(1, 3))]
            if rng.random() < 0.3:
                specs.append(spec_for(rng, rng.choice(["LENGTH", "INCLUSION", "EXCLUSION"])))
            for k, s in enumerate(specs):
                s["hard"] = rng.random() < 0.3
                s["id"] = f"c{k}"
            text = response_for(rng, specs)
            yield {"case": f"{family.lower()}-{i:03d}", "family": family, "response": text, "constraints": specs,
                   "expected": [check(text, s) for s in specs]}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="cmd", required=True)
    g = sub.add_parser("generate")
    g.add_argument("--seed", type=int, default=2024)
    g.add_argument("--per-family", type=int, default=100)
    c = sub.add_parser("check")
    c.add_argument("file")
    args = ap.parse_args()

    if args.cmd == "generate":
        for case in generate(args.seed, args.per_family):
            sys.stdout.write(json.dumps(case, sort_keys=True) + "\n")
        return 0
    bad = 0
    with open(args.file) as f:
        for line in f:
            case = json.loads(line)
            got = [check(case["response"], s) for s in case["constraints"]]
            if got != case["expected"]:
                bad += 1
                print(f"{case['case']}: expected {case['expected']}, oracle says {got}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
