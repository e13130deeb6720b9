"""Sommerfeld field against the truncated direct solve for growing N."""

import math

from latticewedge import oracle
from latticewedge.basis import build_basis
from latticewedge.field import field_grid
from latticewedge.lattice import incident_params
from latticewedge.transformant import Transformant

K = 0.5 + 0.05j
T = Transformant(build_basis(K), incident_params(K, math.pi / 4))
analytic = field_grid(T, 90, 8192)
for N in (100, 120, 160, 200, 240):
    ref = oracle.direct_solve(oracle.TruncatedProblem(K, T.inc, N))
    # same comparison square |m|, |n| <= 90 for every N
    disc = oracle.compare(analytic, ref.scattered, N - 90)
    print(f"N = {N:3d}: discrepancy {disc:.3e}  ({ref.seconds:.2f} s, residual {ref.residual:.1e})")
