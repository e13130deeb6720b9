"""Sommerfeld integrals over contours on the sixfold cover.

The total field is ``u(m, n) = sum over contour nodes of x**m y**n A dx / Upsilon``.
Two families of contours are built:

* the defining circles around ``x = 0`` and ``x = infinity`` on selected
  sheets (``Gamma2`` for ``m <= 0`` and ``Gamma3`` for ``n <= 0``), and
* deformed contours that keep ``|x**m y**n|`` bounded in their region:
  loops hugging the outer slit (``|y| = 1`` there, ``|x| > 1``) for
  ``m <= 0`` and unit circles (``|y| > 1`` on the even sheets) for
  ``n <= 0``, each plus the incident wave picked up from the pole at
  ``x_in``.

Sheet bookkeeping (labels 1..6, odd labels are the ``|y| < 1`` level):

    Gamma2 ~ Z2 + Z3 - I3 - I2
    Gamma3 ~ Z2 + Z3 - I3 - I4
    m <= 0:  u = u_in + O4 - O2
    n <= 0:  u = u_in - U4 + U2

with ``Zj``/``Ij`` small/large ccw circles on sheet ``j``, ``Oj`` a ccw
loop around the outer slit and ``Uj`` the ccw unit circle.  The two
Gamma forms differ only by the level-2 infinities, which carry no
residue when ``m, n <= 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisError
from .lattice import LatticeField, plane_wave_field, power_table, residual_grid
from .surface import LiftedContour, PointR, PointR3, apply_pi_prime
from .transformant import Transformant

INDENT_RADIUS = 1e-3
REAL_K_TOL = 1e-12
DEFAULT_NODES = 50_000
TEST_NODES = 4096
FIELD_TOL = 1e-5


class FieldError(RuntimeError):
    pass


@dataclass(frozen=True)
class ContourPart:
    """One closed lifted loop; ``kind`` is 'trapezoid' or 'panel'."""

    name: str
    contour: LiftedContour
    kind: str = "trapezoid"

    @property
    def start(self) -> PointR3:
        return self.contour.extra["start"]

    def reversed(self) -> "ContourPart":
        c = self.contour
        x, u = c.affix[::-1], c.ups[::-1]
        extra = {k: (v[::-1] if isinstance(v, np.ndarray) else v) for k, v in c.extra.items()}
        if "orientation" in extra:
            extra["orientation"] = -extra["orientation"]
        rc = LiftedContour(x, u, c.sheet[::-1], -c.weights[::-1], c.closed, extra)
        return ContourPart(self.name + "~", rc, self.kind)


@dataclass(frozen=True)
class SommerfeldContour:
    label: str
    parts: tuple

    def __add__(self, other: "SommerfeldContour") -> "SommerfeldContour":
        return SommerfeldContour(f"{self.label}+{other.label}", self.parts + other.parts)


# -- contour construction -------------------------------------------------------


def _lift(trans: Transformant, x, w, sheet: int, name: str, kind: str = "trapezoid") -> ContourPart:
    S = trans.surface
    x = np.asarray(x, dtype=complex)
    start = PointR3(complex(x[0]), sheet)
    c = S.continue_along(x, PointR(x[0], start.level), weights=w, closed=True)
    try:
        lifted = trans.basis.lift(c, start)
    except BasisError as exc:
        hint = " (real K passes close to the slits and needs at least 8192 nodes)" if is_real_k(trans) else ""
        raise FieldError(f"{name}: {exc}; raise the node count{hint}") from exc
    u, f = lifted.ups, lifted.extra["F1"]
    # a loop must return to its starting branch of Upsilon and F1
    if abs(u[-1] - u[0]) > abs(u[-1] + u[0]):
        raise FieldError(f"{name}: Upsilon does not close around the loop")
    r = f[0] / f[-1]
    if abs(r - 1) > 0.5:
        raise FieldError(f"{name}: F1 does not close around the loop")
    lifted.extra["start"] = start
    lifted.extra["y"] = S.y_from(x, u)
    lifted.extra["A"] = trans.values(x, u, f, lifted.extra["F2"])
    return ContourPart(name, lifted, kind)


def circle_part(trans: Transformant, center: complex, radius: float, sheet: int,
                nodes: int, name: str, ccw: bool = True) -> ContourPart:
    th = 2 * math.pi * np.arange(nodes) / nodes
    x = center + radius * np.exp(1j * th)
    w = 1j * radius * np.exp(1j * th) * (2 * math.pi / nodes)
    part = _lift(trans, x, w, sheet, name)
    part.contour.extra.update(center=center, radius=radius, orientation=1,
                              theta_index=np.arange(nodes))
    return part if ccw else part.reversed()


def _singular_affixes(trans: Transformant) -> list[complex]:
    S = trans.surface
    return [*S.bp.as_tuple(), trans.poles.x1.affix, trans.poles.x3.affix]


def is_real_k(trans: Transformant) -> bool:
    return abs(trans.surface.K.imag) < REAL_K_TOL


def unit_loop(trans: Transformant, sheet: int, nodes: int, name: str,
              indent: float = INDENT_RADIUS) -> ContourPart:
    """Ccw unit circle; for real K the circle is pushed off the slits.

    With ``Im K -> +0`` the inner slit and ``x_in`` sit just inside the
    circle for ``Im x > 0`` and the outer slit and ``1/x_in`` just outside
    for ``Im x < 0``, so ``r = 1 + c sin(theta)`` keeps the limiting side.
    The loop starts at ``x = -1``, away from the point where the slits touch.
    """
    th = math.pi + 2 * math.pi * np.arange(nodes) / nodes
    if is_real_k(trans):
        on = [z for z in _singular_affixes(trans) if abs(abs(z) - 1) < 1e-9]
        sines = [abs(math.sin(cmath.phase(z))) for z in on if abs(math.sin(cmath.phase(z))) > 1e-9]
        c = indent / min(sines) if sines else 0.0
    else:
        c = 0.0
        d = min(abs(abs(z) - 1) for z in _singular_affixes(trans))
        if d < indent * 1e-3:
            raise FieldError("a pole or branch point lies on the unit circle")
    r = 1 + c * np.sin(th)
    dr = c * np.cos(th)
    x = r * np.exp(1j * th)
    w = (dr + 1j * r) * np.exp(1j * th) * (2 * math.pi / nodes)
    return _lift(trans, x, w, sheet, name)


def _joukowski_radius(s: complex) -> float:
    """``rho`` with ``s = 2 cos(theta - i rho)``; level sets are ellipses around [-2, 2]."""
    z = s / 2 + cmath.sqrt(s / 2 - 1) * cmath.sqrt(s / 2 + 1)
    return abs(math.log(abs(z)))


def outer_slit_loop(trans: Transformant, sheet: int, nodes: int, name: str,
                    indent: float = INDENT_RADIUS) -> ContourPart:
    """Ccw loop around the outer slit on ``sheet``.

    For complex K the loop is the outer preimage of the ellipse
    ``s = 2 cos(theta - i rho)``, on which ``|y| = exp(rho)``.  ``rho`` is
    half the ellipse parameter of the critical value ``s(1) = K^2 - 2``
    where the inner and outer preimages would merge.  For real K the
    slits touch at ``x = 1`` and a panel polygon in ``log x`` is used.
    """
    S = trans.surface
    if is_real_k(trans):
        return _outer_loop_real(trans, sheet, nodes, name, indent)
    k2 = S.K * S.K
    rho = 0.5 * min(_joukowski_radius(k2 - 2), _joukowski_radius(k2 - 6))
    th = 2 * math.pi * np.arange(nodes) / nodes
    z = th - 1j * rho
    s = 2 * np.cos(z)
    ds = -2 * np.sin(z)
    wv = s - k2 + 4
    r = np.sqrt(wv * wv - 4)
    x = np.where(np.abs(wv + r) >= np.abs(wv - r), (wv + r) / 2, (wv - r) / 2)
    dx = ds / (1 - 1 / x**2)
    w = dx * (2 * math.pi / nodes)
    # s runs ccw and x ~ s near the outer slit, so the loop is ccw already
    return _lift(trans, x, w, sheet, name)


def _gl_polygon(vertices, panels: int):
    """Gauss-Legendre nodes and weights along a closed polygon."""
    v = np.asarray(vertices, dtype=complex)
    edges = np.roll(v, -1) - v
    lengths = np.abs(edges)
    t, wt = np.polynomial.legendre.leggauss(8)
    t, wt = (t + 1) / 2, wt / 2
    xs, ws = [], []
    for a, e, L in zip(v, edges, lengths):
        n = max(1, int(round(panels * L / lengths.sum())))
        for k in range(n):
            xs.append(a + e * (k + t) / n)
            ws.append(e * wt / n)
    return np.concatenate(xs), np.concatenate(ws)


def _outer_loop_real(trans: Transformant, sheet: int, nodes: int, name: str, indent: float) -> ContourPart:
    # In xi = log x the outer slit is an L: the ray [0, log eta12] and the
    # segment from 0 to i arg(eta11).  The inner slit is the mirror image,
    # touching at xi = 0, which the loop crosses on the diagonal.
    S = trans.surface
    a = math.log(abs(S.bp.eta12))
    b = -cmath.phase(S.bp.eta11)
    if b <= 0 or abs(abs(S.bp.eta11) - 1) > 1e-9:
        raise FieldError("real-K outer slit does not have the expected shape")
    d = indent
    V = [a + d, a + d + 1j * d, d + 1j * d, 0, -d - 1j * d, -d - 1j * (b + d),
         d - 1j * (b + d), d - 1j * d, a + d - 1j * d]
    xi, wxi = _gl_polygon(V, max(8, nodes // 8))
    x = np.exp(xi)
    return _lift(trans, x, x * wxi, sheet, name, kind="panel")


def pole_loop(trans: Transformant, nodes: int = 512) -> ContourPart:
    """Clockwise circle around the incident pole on sheet 3."""
    p = trans.poles.x1
    return circle_part(trans, p.affix, trans.residue_radius(p.affix), p.sheet, nodes, "lam3", ccw=False)


def pi_prime_image(trans: Transformant, part: ContourPart, name: str) -> ContourPart:
    """Loop ``x -> 1/x`` traced from the image of the start point; lifted afresh."""
    c = part.contour
    x = 1 / c.affix
    w = -c.weights / c.affix**2
    start = apply_pi_prime(part.start, trans.basis.gluing)
    return _lift(trans, x, w, start.sheet, name, part.kind)


def _zero_radius(trans: Transformant) -> float:
    inner, outer = trans.surface.cut_curves(4001)
    obstacles = [*_singular_affixes(trans), trans.basis.bpoint.b]
    lo = min(float(np.min(np.abs(inner))), min(abs(z) for z in obstacles))
    return 0.9 * lo


def _infinity_radius(trans: Transformant) -> float:
    inner, outer = trans.surface.cut_curves(4001)
    obstacles = [*_singular_affixes(trans), trans.basis.bpoint.b]
    hi = max(float(np.max(np.abs(outer))), max(abs(z) for z in obstacles))
    return hi / 0.9


def build_gamma(trans: Transformant, nodes: int = TEST_NODES) -> tuple[SommerfeldContour, SommerfeldContour]:
    """Circles around ``x = 0`` and ``x = infinity`` forming ``Gamma2`` and ``Gamma3``."""
    if nodes < 1024:
        raise FieldError("at least 1024 nodes per circle are required")
    r0, r1 = _zero_radius(trans), _infinity_radius(trans)
    z2 = circle_part(trans, 0j, r0, 2, nodes, "zero@2")
    z3 = circle_part(trans, 0j, r0, 3, nodes, "zero@3")
    i3 = circle_part(trans, 0j, r1, 3, nodes, "inf@3", ccw=False)
    i2 = circle_part(trans, 0j, r1, 2, nodes, "inf@2", ccw=False)
    i4 = circle_part(trans, 0j, r1, 4, nodes, "inf@4", ccw=False)
    return (SommerfeldContour("Gamma2", (i2, z2, z3, i3)),
            SommerfeldContour("Gamma3", (z2, z3, i3, i4)))


@dataclass(frozen=True)
class Lambdas:
    lam1: ContourPart
    lam2: ContourPart
    lam3: ContourPart
    lam4: ContourPart
    lam5: ContourPart
    lam6: ContourPart
    lam7: ContourPart
    lam8: ContourPart

    @property
    def lam12(self) -> SommerfeldContour:
        return SommerfeldContour("Lam12", (self.lam1, self.lam2))

    @property
    def lam45(self) -> SommerfeldContour:
        return SommerfeldContour("Lam45", (self.lam4, self.lam5))

    @property
    def lam3c(self) -> SommerfeldContour:
        return SommerfeldContour("Lam3", (self.lam3,))


def build_lambdas(trans: Transformant, nodes: int = TEST_NODES, indent: float = INDENT_RADIUS,
                  boundary_checks: bool = True) -> Lambdas:
    lam1 = outer_slit_loop(trans, 4, nodes, "lam1", indent)
    lam2 = outer_slit_loop(trans, 2, nodes, "lam2", indent).reversed()
    lam4 = unit_loop(trans, 4, nodes, "lam4", indent).reversed()
    lam5 = unit_loop(trans, 2, nodes, "lam5", indent)
    lam3 = pole_loop(trans)
    if boundary_checks:
        lam6 = unit_loop(trans, 3, nodes, "lam6", indent).reversed()
        lam8 = pi_prime_image(trans, lam1, "lam8")
    else:
        lam6 = lam8 = lam4
    return Lambdas(lam1, lam2, lam3, lam4, lam5, lam6, lam1, lam8)


# -- quadrature ---------------------------------------------------------------------


def _density(part: ContourPart, stride: int = 1) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    c = part.contour
    dens = c.extra["A"] * c.weights / c.ups
    if stride > 1:
        dens = dens[::stride] * stride
        return c.affix[::stride], c.extra["y"][::stride], dens
    return c.affix, c.extra["y"], dens


def integrate_grid(contour: SommerfeldContour, ms, ns, stride: int = 1) -> np.ndarray:
    """Matrix ``out[i, j] = integral at (ms[j], ns[i])``."""
    ms, ns = np.asarray(ms), np.asarray(ns)
    out = np.zeros((len(ns), len(ms)), dtype=complex)
    for part in contour.parts:
        x, y, d = _density(part, stride)
        X = power_table(x, ms)
        Y = power_table(y, ns)
        out += Y @ (X * d[None, :]).T
    return out


def integrate_part(part: ContourPart, m: int, n: int) -> complex:
    return complex(integrate_grid(SommerfeldContour(part.name, (part,)), [m], [n])[0, 0])


def sommerfeld_field(trans: Transformant, contour: SommerfeldContour, m: int, n: int,
                     tol: float = FIELD_TOL) -> complex:
    """Integral over ``contour`` at one node, with a node-halving ratio test."""
    full = complex(integrate_grid(contour, [m], [n])[0, 0])
    if all(p.kind == "trapezoid" and len(p.contour) % 2 == 0 for p in contour.parts):
        half = complex(integrate_grid(contour, [m], [n], stride=2)[0, 0])
        if abs(full - half) > max(tol, 1e-3 * abs(full)):
            raise FieldError(f"quadrature at ({m}, {n}) not converged: halving changes it by {abs(full - half):.2e}")
    return full


# -- fields -------------------------------------------------------------------------


@dataclass
class FieldResult:
    total: LatticeField
    incident: LatticeField
    scattered: LatticeField
    diagnostics: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        lines = ["m,n,re_total,im_total,re_incident,im_incident,re_scattered,im_scattered"]
        e = self.total.extent
        mask = self.total.mask()
        for n in range(-e, e + 1):
            for m in range(-e, e + 1):
                if not mask[n + e, m + e]:
                    continue
                t, i, s = self.total[m, n], self.incident[m, n], self.scattered[m, n]
                lines.append(f"{m},{n},{t.real:.17g},{t.imag:.17g},{i.real:.17g},{i.imag:.17g},"
                             f"{s.real:.17g},{s.imag:.17g}")
        return "\n".join(lines) + "\n"


def lambda_forms(trans: Transformant, lams: Lambdas, extent: int) -> tuple[np.ndarray, np.ndarray]:
    """``u`` from the ``m <= 0`` form on columns ``m <= 0`` and from the ``n <= 0`` form on rows ``n <= 0``."""
    k = np.arange(-extent, extent + 1)
    neg = np.arange(-extent, 1)
    inc = plane_wave_field(trans.inc.params, extent).values
    inc_full = np.outer(power_table(np.array([trans.inc.y]), k)[:, 0],
                        power_table(np.array([trans.inc.x]), k)[:, 0])
    u_left = inc_full[:, : extent + 1] + integrate_grid(lams.lam12, neg, k)
    u_low = inc_full[: extent + 1, :] + integrate_grid(lams.lam45, k, neg)
    del inc
    return u_left, u_low


def field_grid(trans: Transformant, extent: int, nodes: int = DEFAULT_NODES,
               indent: float = INDENT_RADIUS) -> FieldResult:
    """Total, incident and scattered field on ``[-extent, extent]^2``."""
    if extent < 1:
        raise FieldError("extent must be positive")
    lams = build_lambdas(trans, nodes, indent, boundary_checks=False)
    u_left, u_low = lambda_forms(trans, lams, extent)
    e = extent
    total = LatticeField.zeros(e)
    v = total.values
    v[:, : e + 1] = u_left
    v[: e + 1, :] = u_low
    overlap = u_left[: e + 1, :] - u_low[:, : e + 1]
    v[: e + 1, : e + 1] = 0.5 * (u_left[: e + 1, :] + u_low[:, : e + 1])
    v[~total.mask()] = 0
    incident = plane_wave_field(trans.inc.params, e)
    scattered = total - incident
    bmask = total.boundary_mask()
    res = residual_grid(total, trans.surface.K)
    diag = {
        "boundary_max": float(np.max(np.abs(v[bmask]))),
        "stencil_max": float(np.max(np.abs(res))),
        "overlap_max": float(np.max(np.abs(overlap))),
        "nodes": nodes,
        "real_k": is_real_k(trans),
    }
    return FieldResult(total, incident, scattered, diag)


def gamma_pairs(extent: int) -> tuple[list, list]:
    """Nodes where ``Gamma2`` (``m <= 0``) and ``Gamma3`` (``n <= 0``) apply."""
    k = range(-extent, extent + 1)
    neg = range(-extent, 1)
    return [(m, n) for m in neg for n in k], [(m, n) for m in k for n in neg]


def gamma_forms(trans: Transformant, gammas, pairs2, pairs3, precise: bool = True) -> tuple[dict, dict]:
    """``u2`` on ``pairs2`` and ``u3`` on ``pairs3`` from the circle contours.

    Each distinct circle is quadrated once.  With ``precise`` the sums run
    in extended precision, which the cancellation between circles needs
    once ``|m| + |n|`` exceeds about ten.
    """
    g2, g3 = gammas
    need: dict = {}
    parts: dict = {}
    for contour, pairs in ((g2, pairs2), (g3, pairs3)):
        for part in contour.parts:
            parts[part.name] = part
            need.setdefault(part.name, set()).update(pairs)
    def total(sums, contour, pairs):
        # the circles cancel each other, so add them before rounding
        return {mn: complex(sum(sums[p.name][mn] for p in contour.parts)) for mn in pairs}

    if precise:
        from .extended import PreciseTransformant

        P = PreciseTransformant(trans)
        with P.context():
            sums = {name: P.power_sums(part, need[name]) for name, part in parts.items()}
            return total(sums, g2, pairs2), total(sums, g3, pairs3)
    sums = {}
    for name, part in parts.items():
        pairs = sorted(need[name])
        ms = sorted({m for m, _ in pairs})
        ns = sorted({n for _, n in pairs})
        grid = integrate_grid(SommerfeldContour(name, (part,)), ms, ns)
        mi = {m: j for j, m in enumerate(ms)}
        ni = {n: i for i, n in enumerate(ns)}
        sums[name] = {(m, n): complex(grid[ni[n], mi[m]]) for m, n in pairs}
    return total(sums, g2, pairs2), total(sums, g3, pairs3)


def heatmap_pgm(values: np.ndarray, mask: np.ndarray | None = None, levels: int = 255) -> str:
    """Plain graymap of a real array, min-max scaled; row 0 is the top (largest n)."""
    a = np.asarray(values, dtype=float)[::-1]
    lo, hi = float(np.min(a)), float(np.max(a))
    scale = levels / (hi - lo) if hi > lo else 0.0
    g = np.rint((a - lo) * scale).astype(int)
    if mask is not None:
        g = np.where(np.asarray(mask)[::-1], g, 0)
    rows = [" ".join(str(int(t)) for t in row) for row in g]
    return f"P2\n{a.shape[1]} {a.shape[0]}\n{levels}\n" + "\n".join(rows) + "\n"
