"""Bracket lower <= E_n(f*) <= upper over a doubling range of n.

    python3 demos/bracket_sweep.py [psi] [omega] [beta]
"""

import sys

from psibeta import approx_report
from psibeta.shapes import parse_omega, parse_psi


def main(argv):
    psi = parse_psi(argv[0] if argv else "power:r=2")
    omega = parse_omega(argv[1] if len(argv) > 1 else "omega-power:alpha=0.5")
    beta = float(argv[2]) if len(argv) > 2 else 1.0
    print(f"psi = {psi.spec}, omega = {omega.spec}, beta = {beta:g}")
    print(f"{'n':>4} {'lower':>12} {'E_n(f*)':>12} {'upper':>12} {'E_n/scale':>10}  flags")
    for n in (4, 8, 16, 32):
        r = approx_report(psi, omega, beta, n)
        print(f"{n:>4} {r.lower:12.6e} {r.witness_best:12.6e} {r.upper:12.6e} {r.witness_best / r.remainder_scale:10.6f}  {';'.join(r.flags)}")


if __name__ == "__main__":
    main(sys.argv[1:])
