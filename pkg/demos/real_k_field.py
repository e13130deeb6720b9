"""Total and scattered field for real K = 0.5 at 45 degrees incidence.

Writes graymaps of Re(u) and Re(u_sc) and prints how the part of the field
not explained by incident and reflected plane waves decays along a few rays.
"""

import math
from pathlib import Path

import numpy as np

from latticewedge.basis import build_basis
from latticewedge.field import field_grid, heatmap_pgm
from latticewedge.lattice import incident_params
from latticewedge.transformant import Transformant

here = Path(__file__).parent
K, extent = 0.5, 40
T = Transformant(build_basis(K), incident_params(K, math.pi / 4))
res = field_grid(T, extent, 50_000)
print(res.diagnostics)

mask = res.total.mask()
(here / "total_re.pgm").write_text(heatmap_pgm(res.total.values.real, mask))
(here / "scattered_re.pgm").write_text(heatmap_pgm(res.scattered.values.real, mask))

x, y = T.inc.x, T.inc.y


def plane_waves(m, n):
    u = x**m * y**n
    if n < 0 and m > -n:
        u -= x**m * y**(-n)
    if m < 0 and n > -m:
        u -= x**(-m) * y**n
    return u


for ray in [(-1, -1), (-2, -1), (3, -1), (1, -3)]:
    r, d = [], []
    for t in range(3, extent):
        m, n = ray[0] * t, ray[1] * t
        if max(abs(m), abs(n)) > extent:
            break
        r.append(math.hypot(m, n))
        d.append(abs(res.total[m, n] - plane_waves(m, n)))
    slope = np.polyfit(np.log(r), np.log(d), 1)[0]
    print(f"ray {ray}: remainder ~ r^{slope:.2f}")
