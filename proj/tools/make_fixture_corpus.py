#!/usr/bin/env python3
#
# Project SmiEdit - Copyright 2026 The SmiEdit Authors.
# SPDX-License-Identifier: Apache-2.0
#
"""Generates the deterministic fixture corpus under tests/data/.

Molecules are assembled from ring systems, linkers and terminal groups so the
corpus looks drug-like without depending on an external toolkit. Ring-closure
digits are allocated lowest-free-first, the same convention the SMILES writer
uses, so most lines are fixed points of parse -> write.
"""

import argparse
import random

# (atoms, substitutable positions). Atoms are single SMILES atom tokens.
RINGS = [
    (["c", "c", "c", "c", "c", "c"], [1, 2, 3, 4, 5]),
    (["c", "c", "c", "c", "c", "c"], [1, 2, 3, 4, 5]),
    (["c", "c", "c", "c", "c", "c"], [1, 2, 3, 4, 5]),
    (["c", "c", "c", "n", "c", "c"], [1, 2, 4, 5]),
    (["c", "c", "n", "c", "n", "c"], [1, 3, 5]),
    (["c", "c", "c", "s", "c"], [1, 2, 4]),
    (["c", "c", "c", "o", "c"], [1, 2, 4]),
    (["c", "c", "c", "[nH]", "c"], [1, 2, 4]),
    (["C", "C", "C", "C", "C", "C"], [1, 2, 3, 4, 5]),
    (["C", "C", "C", "C", "C"], [1, 2, 3, 4]),
    (["C", "C", "C", "N", "C", "C"], [1, 2, 3, 4, 5]),
    (["C", "C", "O", "C", "C", "N"], [1, 3, 4, 5]),
    (["C", "C", "N", "C", "C", "N"], [1, 2, 3, 4, 5]),
    (["C", "C", "C"], [1, 2]),
    (["C", "C", "C", "O", "C"], [1, 2, 4]),
]

TERMINALS = [
    "O", "O", "O", "C(=O)O", "C(=O)O", "N", "N", "Cl", "F", "Br", "C", "C",
    "CC", "OC", "C(F)(F)F", "C#N", "C(=O)N", "S(=O)(=O)N", "N(C)C",
    "[N+](=O)[O-]", "CO", "CCO", "C(C)C", "OCC", "C(=O)OC", "NC(C)=O", "CN",
    "I", "SC", "C(=O)C", "CCN", "CC(=O)O",
]

LINKERS = [
    "", "C", "CC", "O", "N", "C(=O)N", "NC(=O)", "CCN", "OC", "S(=O)(=O)N",
    "C(=O)", "NC(=O)N", "CCO", "COC", "C=C", "CCC", "NC", "CN(C)",
]

HEADS = ["", "", "", "C", "CC", "CC(=O)N", "OC", "NC", "CCO", "CN", "O"]

NAMED = [
    "CC(=O)Nc1ccc(O)cc1",
    "COc1ccc(Cl)cc1C(=O)NCCc2ccc(S(=O)(=O)NC(=O)NC3CCCCC3)cc2",
    "CC(=O)Oc1ccccc1C(=O)O",
    "CC(C)Cc1ccc(C(C)C(=O)O)cc1",
    "Cn1cnc2c1c(=O)n(C)c(=O)n2C",
    "CN1CCCC1c1cccnc1",
    "Oc1ccccc1",
    "CCO",
    "c1ccccc1",
    "NCC(=O)O",
    "c1ccc2ccccc2c1",
    "NCCc1ccc(O)c(O)c1",
    "OC(=O)c1ccccc1O",
    "NCCc1c[nH]c2ccc(O)cc12",
]


class Writer:
    def __init__(self):
        self.free = list(range(1, 10))

    def take_digit(self):
        d = min(self.free)
        self.free.remove(d)
        return d

    def release(self, d):
        self.free.append(d)


def render_ring(rng, w, depth):
    atoms, positions = rng.choice(RINGS)
    n = len(atoms)
    positions = list(positions)
    rng.shuffle(positions)
    exit_pos = None
    if depth < 2 and rng.random() < 0.45:
        exit_pos = positions.pop()
    n_subs = rng.choice([0, 1, 1, 2, 2, 3])
    subs = {}
    for p in positions[:n_subs]:
        subs[p] = rng.choice(TERMINALS)
    digit = w.take_digit()
    out = [atoms[0] + str(digit)]
    tail = None
    for i in range(1, n):
        piece = atoms[i]
        if i == n - 1:
            w.release(digit)
            piece += str(digit)
        branches = []
        if i in subs:
            branches.append(subs[i])
        if i == exit_pos:
            rest = rng.choice(LINKERS) + render_ring(rng, w, depth + 1)
            branches.append(rest)
        if i == n - 1 and branches:
            # The writer emits the last child of the final ring atom inline.
            tail = branches.pop()
        for b in branches:
            piece += "(" + b + ")"
        out.append(piece)
    s = "".join(out)
    if tail is not None:
        s += tail
    return s


def molecule(rng):
    w = Writer()
    return rng.choice(HEADS) + render_ring(rng, w, 0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=20240117)
    ap.add_argument("--out", default="tests/data/fixture_corpus.txt")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    seen = set()
    lines = []
    for s in NAMED:
        seen.add(s)
        lines.append(s)
    while len(lines) < args.count:
        s = molecule(rng)
        if len(s) > 90 or s in seen:
            continue
        seen.add(s)
        lines.append(s)
    # Named molecules go first, but keep a shuffled body so the held-out
    # tail is representative.
    body = lines[len(NAMED):]
    rng.shuffle(body)
    with open(args.out, "w") as f:
        f.write("# Fixture corpus: one SMILES per line.\n")
        for s in lines[:len(NAMED)] + body:
            f.write(s + "\n")


if __name__ == "__main__":
    main()
