"""Main term against its closed-form asymptote for psi = ln^-2(t+1), omega = ln^-1(1/t+1).

    python3 demos/example1_ratio.py
"""

from psibeta import example1_asymptote, main_term
from psibeta.shapes import parse_omega, parse_psi

psi, omega = parse_psi("logpower:gamma=2"), parse_omega("omega-loginv:alpha=1")
print(f"{'n':>8} {'I(n)':>14} {'asymptote':>14} {'ratio':>16}")
for e in (2, 4, 6, 8, 12, 20, 40, 100):
    n = 10.0**e
    I, A = main_term(psi, omega, 1.0, n), example1_asymptote(2, 1, 1.0, n)
    print(f"{'1e%d' % e:>8} {I:14.8e} {A:14.8e} {I / A:16.12f}")
