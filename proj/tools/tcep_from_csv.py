#!/usr/bin/env python3
"""Convert the single-CSV Tuebingen layout (SampleID,A,B with
space-separated samples per cell) into one pairNNNN.txt per pair plus a
pairmeta.txt that `kdm tcep` can read.

    tcep_from_csv.py Tuebingen_pairs.csv Tuebingen_targets.csv OUTDIR

Targets of 1 mean A causes B, -1 the reverse. Every pair gets weight 1
since the CSV carries no weights.
"""
import csv
import os
import re
import sys


def main(argv):
    if len(argv) != 4:
        sys.stderr.write(__doc__)
        return 2
    pairs_csv, targets_csv, out = argv[1:]
    os.makedirs(out, exist_ok=True)
    csv.field_size_limit(1 << 30)

    targets = {}
    with open(targets_csv, newline="") as f:
        for row in csv.DictReader(f):
            targets[row["SampleID"]] = float(row["Target"])

    meta = []
    with open(pairs_csv, newline="") as f:
        for row in csv.DictReader(f):
            sid = row["SampleID"]
            num = int(re.sub(r"\D", "", sid))
            a = row["A"].split()
            b = row["B"].split()
            if len(a) != len(b):
                raise SystemExit(f"{sid}: column lengths differ ({len(a)} vs {len(b)})")
            with open(os.path.join(out, f"pair{num:04d}.txt"), "w") as g:
                for u, v in zip(a, b):
                    g.write(f"{u} {v}\n")
            t = targets.get(sid, 1.0)
            if t >= 0:
                meta.append(f"{num:04d} 1 1 2 2 1")
            else:
                meta.append(f"{num:04d} 2 2 1 1 1")

    with open(os.path.join(out, "pairmeta.txt"), "w") as g:
        g.write("\n".join(meta) + "\n")
    print(f"wrote {len(meta)} pairs to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
