"""Level spacing of the two-photon model as g approaches 1/2.

For a small qubit splitting the lowest even-sector spacing should shrink like
sqrt(1 - 4 g^2); prints the spacing, that factor and their ratio.
"""
import argparse
import math

from rabi_spectra import Sector, TwoPhotonParams, find_spectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--couplings", type=float, nargs="+", default=[0.3, 0.35, 0.4, 0.45, 0.47, 0.49, 0.495])
    args = ap.parse_args()

    print(f"{'g':>7} {'spacing':>12} {'sqrt(1-4g^2)':>13} {'ratio':>8}")
    for g in args.couplings:
        roots = find_spectrum(TwoPhotonParams(g, args.delta), (-1.0, 3.0))
        levels = [r.energy for r in roots if r.sector == Sector.EVEN_MINUS]
        spacing = levels[1] - levels[0]
        w = math.sqrt(1 - 4 * g * g)
        print(f"{g:7.3f} {spacing:12.8f} {w:13.8f} {spacing / w:8.4f}")


if __name__ == "__main__":
    main()
