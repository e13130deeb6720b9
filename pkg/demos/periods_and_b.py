"""Periods, the point b and the G1 hodographs at K = 0.5.

Writes hodograph_alpha.csv and hodograph_beta.csv next to this script.
"""

from pathlib import Path

from latticewedge.basis import algorithm1, g_functions, hodograph_csv, solve_b_ode, windings
from latticewedge.surface import Surface

here = Path(__file__).parent
S = Surface(0.5)
P = S.periods(4096)
print(f"T_alpha = {P.T_alpha:.10f}")
print(f"T_beta  = {P.T_beta:.10f}")

seed = solve_b_ode(S, P, steps=100)
print(f"Euler seed     b' = {seed.b:.4f} on sheet {seed.sheet}, Upsilon = {seed.ups:.4f}")
bp = algorithm1(S, P)
print(f"Newton refined b  = {bp.b:.15f} on sheet {bp.sheet}")

wa, wb = windings(S, bp)
print(f"winding of G1: {wa} around sigma_alpha, {wb} around sigma_beta")

g1, _ = g_functions(S, bp)
for name, c in (("alpha", S.sigma_alpha()), ("beta", S.sigma_beta())):
    (here / f"hodograph_{name}.csv").write_text(hodograph_csv(g1(c.affix, c.ups)))
