#!/usr/bin/env python3
# Copyright 2026 The GKD Authors
# SPDX-License-Identifier: Apache-2.0
"""Convert the classic Cora release (cora.content, cora.cites) to nodes.tsv/edges.tsv.

Paper ids are remapped to dense ids in file order; labels are numbered by
sorted class name. Cora ships bag-of-words vectors but no raw text, so the
text column holds a placeholder title.
"""

import argparse
import pathlib
import sys


def convert(content: pathlib.Path, cites: pathlib.Path, out_dir: pathlib.Path) -> tuple[int, int]:
    rows = [line.split() for line in content.read_text().splitlines() if line.strip()]
    ids = {paper: i for i, (paper, *_rest) in enumerate(rows)}
    classes = sorted({r[-1] for r in rows})
    label = {name: i for i, name in enumerate(classes)}
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "nodes.tsv", "w") as f:
        for r in rows:
            text = f"paper {r[0]}"
            f.write(f"{ids[r[0]]}\t{label[r[-1]]}\t{text}\t{','.join(r[1:-1])}\n")
    edges = 0
    with open(out_dir / "edges.tsv", "w") as f:
        for line in cites.read_text().splitlines():
            parts = line.split()
            if len(parts) != 2:
                continue
            a, b = parts
            if a in ids and b in ids:
                f.write(f"{ids[a]}\t{ids[b]}\n")
                edges += 1
    (out_dir / "classes.txt").write_text("\n".join(classes) + "\n")
    return len(rows), edges


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("content", type=pathlib.Path)
    p.add_argument("cites", type=pathlib.Path)
    p.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/cora"))
    a = p.parse_args()
    n, e = convert(a.content, a.cites, a.out)
    print(f"{n} nodes, {e} edge records -> {a.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
