#!/usr/bin/env python3
"""Window-count enumerator: walks every token position of every record.

Counts windows per dataset by placing starts at 0, stride, 2*stride, ... until
the last token is covered, scanning one token at a time rather than using a
closed form. Text records are counted as whitespace-delimited words.

  windows.py MANIFEST [MANIFEST ...]
  windows.py --split TOKENS WINDOW STRIDE
"""

import json
import sys
from pathlib import Path

WS = " \t\n\r\v\f"


def word_count(text):
    n, inside = 0, False
    for ch in text:
        if ch in WS:
            inside = False
        elif not inside:
            n, inside = n + 1, True
    return n


def split(tokens, window, stride):
    spans, start = [], 0
    while True:
        length = 0
        pos = start
        while pos < tokens and length < window:
            pos += 1
            length += 1
        spans.append([start, length])
        if pos >= tokens:
            return spans
        start += stride


def count(manifest_path):
    manifest_path = Path(manifest_path)
    m = json.loads(manifest_path.read_text())
    window = m.get("window_length", 4096)
    stride = m.get("stride", window)
    out = {}
    for d in m["datasets"]:
        n = 0
        for line in (manifest_path.parent / d["source"]).read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            tokens = word_count(rec["text"]) if "text" in rec else rec["token_count"]
            n += len(split(tokens, window, stride))
        out[d["id"]] = n
    return out


def main():
    if len(sys.argv) == 5 and sys.argv[1] == "--split":
        print(json.dumps(split(*map(int, sys.argv[2:]))))
        return
    result = {Path(p).parent.name: count(p) for p in sys.argv[1:]}
    print(json.dumps(result, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
