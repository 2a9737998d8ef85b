"""Couplings where a two-photon pole is lifted, for a range of qubit splittings.

For each delta and pole index n, scans g for sign changes of the chain term
at x = n and writes (delta, n, g, E) rows; E is the pole energy, where an
even-plus and an even-minus level (odd sectors for odd n) cross.
"""
import argparse
import csv

import numpy as np

from rabi_spectra.model import two_photon_pole_energy
from rabi_spectra.roots import exceptional_couplings


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.25, 0.5, 0.75, 1.0, 1.5])
    ap.add_argument("--nmax", type=int, default=6)
    ap.add_argument("--gstep", type=float, default=0.005)
    ap.add_argument("--out", default="exceptional_locus.csv")
    args = ap.parse_args()

    grid = np.arange(args.gstep, 0.5 - args.gstep / 2, args.gstep)
    rows = []
    for delta in args.deltas:
        for n in range(2, args.nmax + 1):
            for g in exceptional_couplings(delta, n, grid):
                rows.append((delta, n, g, float(two_photon_pole_energy(g, n))))
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["delta", "n", "g", "energy"])
        for r in rows:
            w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    print(f"{len(rows)} exceptional points -> {args.out}")


if __name__ == "__main__":
    main()
