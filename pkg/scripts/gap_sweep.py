#!/usr/bin/env python3
"""Gap sizes of the two-mode example family at a few parameter points, printed as a table.

    python3 scripts/gap_sweep.py [--nmax 21]

Compares the Galerkin gap with the basic-equation gap and the closed-form
leading term of |beta^+| + |beta^-| at z = 0.
"""
import argparse

from dirac_gaps.asymptotics import closed_form_beta
from dirac_gaps.basic_equation import solve
from dirac_gaps.galerkin import default_K, spectrum
from dirac_gaps.potentials import example_c15

POINTS = [(0.1, 0.1, 0.1, 0.1), (0.2, 0.1, 0.2, 0.1), (0.3, 0.2j, -0.25, 0.15)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nmax", type=int, default=21)
    args = ap.parse_args()
    print("a,b,A,B,n,gamma_galerkin,gamma_basic,closed_form_sum")
    for a, b, A, B in POINTS:
        v = example_c15(a, b, A, B)
        loc = spectrum(v, "per-", default_K(v, args.nmax), nmax=args.nmax, N=4)
        for n in range(5, args.nmax + 1, 2):
            plus, minus = closed_form_beta(n, a, b, A, B)
            lead = abs(plus.to_complex()) + abs(minus.to_complex())
            g = solve(n, v, count_roots=False).gamma
            print(f"{a},{b},{A},{B},{n},{loc.triples[n].gamma:.6e},{g:.6e},{lead:.6e}")


if __name__ == "__main__":
    main()
