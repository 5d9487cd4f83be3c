"""Sample the extremal witness and show the alternation of its remainder.

    python3 demos/witness_profile.py [out.csv]
"""

import sys

from psibeta.extremal import ExtremalSpec, alternation_count, alternation_value, dvp_lower_bound, export_witness_csv
from psibeta.shapes import parse_omega, parse_psi

spec = ExtremalSpec(4, parse_omega("omega-loginv:alpha=1"), parse_psi("logpower:gamma=2"), 1.0)
out = sys.argv[1] if len(sys.argv) > 1 else "witness_n4.csv"
export_witness_csv(spec, out, N=512)
print(f"wrote {out}")
for i in range(2 * spec.n):
    print(f"  remainder at {i} pi/{spec.n}: {alternation_value(spec, i):+.10f}")
print(f"sign alternations: {alternation_count(spec)} (expected {2 * spec.n})")
print(f"de la Vallee Poussin lower bound: {dvp_lower_bound(spec):.10f}")
