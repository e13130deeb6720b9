"""The special point ``b`` and the cube-root basis functions.

``G1`` is the elliptic function with a triple pole at ``eta21`` and a triple
zero at the point ``b`` with Abel coordinate ``T_beta / 3``; ``G2`` is its
mirror with the zero moved to the other sheet.  Their cube roots ``F1`` and
``F2`` live on the sixfold cover.  Branches of ``F1`` are fixed by the
principal cube root at ``x = 2i`` on sheet 1 with label 1, continued inside
the plane cut along the two slits.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .surface import (CoverGluing, LiftedContour, Periods, PointR, PointR3,
                      Surface, SurfaceError, label)

OMEGA = cmath.exp(2j * math.pi / 3)
ANCHOR = 2j
WIND_FLOOR = 1e-12


class BasisError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# the quartic for b


@dataclass(frozen=True)
class QuarticCoeffs:
    h0: complex
    h1: complex
    h2: complex
    h3: complex
    h4: complex

    def as_array(self) -> np.ndarray:
        """Coefficients from the constant term upward."""
        return np.array([self.h0, self.h1, self.h2, self.h3, self.h4], dtype=complex)

    def __call__(self, b):
        return self.h0 + b * (self.h1 + b * (self.h2 + b * (self.h3 + b * self.h4)))

    def derivative(self, b):
        return self.h1 + b * (2 * self.h2 + b * (3 * self.h3 + b * 4 * self.h4))

    def roots(self) -> np.ndarray:
        return np.roots(self.as_array()[::-1])

    def scale(self) -> float:
        return float(np.max(np.abs(self.as_array())))


def quartic_coeffs(surface: Surface) -> QuarticCoeffs:
    a = surface.bp.eta21
    e = surface.bp.eta12
    h = QuarticCoeffs(
        h0=a + 3 * e - a * a * e + a * e * e,
        h1=-4 * (1 + 2 * a * e + e * e),
        h2=6 * (a + e + a * a * e + a * e * e),
        h3=-4 * a * (a + 2 * e + a * e * e),
        h4=a - e + 3 * a * a * e + a * e * e,
    )
    if abs(h.h4) < 1e-14:
        raise BasisError("leading coefficient of the quartic vanishes")
    return h


# ---------------------------------------------------------------------------
# the point b


@dataclass(frozen=True)
class BPoint:
    b: complex
    sheet: int
    ups: complex
    ups_dot: complex
    ups_ddot: complex

    @property
    def point(self) -> PointR:
        return PointR(self.b, self.sheet)

    def existence_residual(self, eta: complex) -> complex:
        d = eta - self.b
        return self.ups / d**2 + self.ups_dot / d + self.ups_ddot / 2


def make_bpoint(surface: Surface, b: complex, sheet: int) -> BPoint:
    ups = surface.upsilon(PointR(b, sheet))
    d1, d2 = surface.upsilon_derivs(b, ups)
    return BPoint(complex(b), sheet, ups, complex(d1), complex(d2))


@dataclass(frozen=True)
class BSeed:
    b: complex
    sheet: int
    ups: complex


def solve_b_ode(surface: Surface, periods: Periods, steps: int = 100,
                method: str = "euler") -> BSeed:
    """Coarse ``b`` from the inverse Abel map at ``T_beta / 3``."""
    res = surface.psi(periods.T_beta / 3, steps=steps, method=method)
    return BSeed(res.point.affix, res.point.sheet, res.ups_estimate)


@dataclass(frozen=True)
class NewtonResult:
    b: complex
    iterations: int


def refine_b_newton(seed: complex, coeffs: QuarticCoeffs, max_iter: int = 50) -> NewtonResult:
    roots = coeffs.roots()
    gaps = [abs(r1 - r2) for i, r1 in enumerate(roots) for r2 in roots[i + 1:]]
    basin = 0.1 * min(gaps)
    tol = 1e-14 * coeffs.scale()
    b = complex(seed)
    for it in range(1, max_iter + 1):
        step = coeffs(b) / coeffs.derivative(b)
        b -= step
        if abs(step) <= 4e-16 * max(1.0, abs(b)) or abs(coeffs(b)) < tol * 1e-2:
            break
    else:
        raise BasisError("Newton iteration for b did not converge")
    if abs(b - seed) > basin and abs(coeffs(seed)) > tol:
        nearest = min(roots, key=lambda r: abs(r - seed))
        if abs(nearest - b) > 1e-8:
            raise BasisError("Newton iteration jumped to a different root of the quartic")
    if abs(coeffs(b)) > 1e-12 * max(1.0, coeffs.scale()):
        raise BasisError("Newton iteration for b stalled")
    return NewtonResult(b, it)


def algorithm1(surface: Surface, periods: Periods | None = None, steps: int = 100,
               method: str = "euler") -> BPoint:
    periods = periods or surface.periods()
    seed = solve_b_ode(surface, periods, steps, method)
    b = refine_b_newton(seed.b, quartic_coeffs(surface)).b
    sheet = int(surface.sheet_of(np.array([b]), np.array([seed.ups]))[0])
    return make_bpoint(surface, b, sheet)


# ---------------------------------------------------------------------------
# M-functions


@dataclass(frozen=True)
class MFunction:
    """Elliptic function given by a rational expression in ``x`` and ``Upsilon``."""

    kind: str
    params: tuple
    residual: complex = 0j

    def __call__(self, x, ups):
        return _M_EVAL[self.kind](self.params, x, ups)


def _eval_simple(p, x, ups):
    b1, b2, u1, u2, c = p
    return ups / ((x - b1) * (x - b2)) + u1 / ((x - b1) * (b1 - b2)) + u2 / ((x - b2) * (b2 - b1)) + c


def _eval_double(p, x, ups):
    b, ub, ubd, c = p
    return ups / (x - b) ** 2 + ub / (x - b) ** 2 + ubd / (x - b) + c


def _eval_branch(p, x, ups):
    eta, a = p
    return (x - a) / (x - eta)


_M_EVAL = {"simple": _eval_simple, "double": _eval_double, "branch": _eval_branch}


def m_simple(surface: Surface, b1: PointR, b2: PointR, a1: PointR, a2: PointR) -> MFunction:
    """Simple poles at ``b1``, ``b2``, zero at ``a1``; the residual measures
    how far ``a2`` is from being the second zero."""
    pts = [b1.affix, b2.affix, a1.affix, a2.affix]
    if len({complex(p) for p in pts}) < 4:
        raise BasisError("m_simple needs four distinct affixes")
    u1, u2 = surface.upsilon(b1), surface.upsilon(b2)
    ua1, ua2 = surface.upsilon(a1), surface.upsilon(a2)
    base = (b1.affix, b2.affix, u1, u2, 0j)

    def partial(a, ua):
        return _eval_simple(base, a, ua)

    c = -partial(a1.affix, ua1)
    residual = partial(a2.affix, ua2) - partial(a1.affix, ua1)
    return MFunction("simple", (b1.affix, b2.affix, u1, u2, c), residual)


def m_double(surface: Surface, b: PointR, a1: PointR, a2: PointR) -> MFunction:
    """Double pole at ``b``, zero at ``a1``; residual for ``a2``."""
    if a1.affix in (b.affix, a2.affix) or a2.affix == b.affix:
        raise BasisError("m_double needs distinct affixes")
    ub = surface.upsilon(b)
    ubd, _ = surface.upsilon_derivs(b.affix, ub)
    base = (b.affix, ub, ubd, 0j)
    c = -_eval_double(base, a1.affix, surface.upsilon(a1))
    residual = _eval_double(base, a2.affix, surface.upsilon(a2)) + c
    return MFunction("double", (b.affix, ub, ubd, c), residual)


def m_branch(eta: complex, a: complex) -> MFunction:
    """Double pole at the branch point ``eta`` and a double zero at affix ``a``."""
    if a == eta:
        raise BasisError("zero and pole coincide")
    return MFunction("branch", (eta, a))


def m_double_at_b(bp: BPoint) -> MFunction:
    """Double pole at ``b``, zeros at ``eta21`` and at the mirror of ``b``."""
    return MFunction("double", (bp.b, bp.ups, bp.ups_dot, bp.ups_ddot / 2))


# ---------------------------------------------------------------------------
# G1, G2


def g_functions(surface: Surface, bp: BPoint):
    """Return evaluators ``G1(x, ups)`` and ``G2(x, ups)``."""
    eta = surface.bp.eta21
    mb = m_branch(eta, bp.b)
    md = m_double_at_b(bp)

    def g1(x, ups):
        return mb(x, ups) / md(x, ups)

    def g2(x, ups):
        return mb(x, ups) / md(x, -ups)

    return g1, g2


def winding_number(values, closed: bool = True) -> int:
    """Total change of ``arg`` along sampled values, in turns."""
    v = np.asarray(values, dtype=complex)
    if np.min(np.abs(v)) <= WIND_FLOOR * max(1.0, float(np.max(np.abs(v)))):
        raise BasisError("function vanishes on the contour")
    seq = np.concatenate([v, v[:1]]) if closed else v
    d = np.angle(seq[1:] / seq[:-1])
    if np.max(np.abs(d)) > math.pi * 0.9:
        raise BasisError("argument step too large; refine the contour")
    total = d.sum() / (2 * math.pi)
    n = round(total)
    if closed and abs(total - n) > 1e-6:
        raise BasisError("winding is not an integer")
    return int(n)


def windings(surface: Surface, bp: BPoint, nodes: int = 4096) -> tuple[int, int]:
    """Windings of ``G1`` along sigma_alpha and sigma_beta."""
    g1, _ = g_functions(surface, bp)
    ca = surface.sigma_alpha(nodes)
    cb = surface.sigma_beta(nodes)
    return winding_number(g1(ca.affix, ca.ups)), winding_number(g1(cb.affix, cb.ups))


@dataclass(frozen=True)
class Candidate:
    bpoint: BPoint
    wind_alpha: int
    wind_beta: int

    @property
    def passes(self) -> bool:
        return self.wind_beta % 3 == 0 and self.wind_alpha % 3 == 1


def algorithm2_candidates(surface: Surface, nodes: int = 4096) -> list[Candidate]:
    coeffs = quartic_coeffs(surface)
    out = []
    for r in coeffs.roots():
        r = refine_b_newton(r, coeffs).b
        for sheet in (1, 2):
            bp = make_bpoint(surface, r, sheet)
            wa, wb = windings(surface, bp, nodes)
            out.append(Candidate(bp, wa, wb))
    return out


def algorithm2(surface: Surface, nodes: int = 4096) -> BPoint:
    good = [c for c in algorithm2_candidates(surface, nodes) if c.passes]
    if len(good) != 1:
        raise BasisError(f"{len(good)} candidates pass the winding test, expected 1")
    return good[0].bpoint


def hodograph_csv(values) -> str:
    lines = ["k,re_G,im_G"]
    lines += [f"{k},{v.real!r},{v.imag!r}" for k, v in enumerate(np.asarray(values))]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# cube-root branches on the sixfold cover


def continue_cube_root(x, g, f_start, max_depth: int = 12):
    """Cube root of ``g(x)`` continued along the polyline through ``x``.

    Intervals whose argument step exceeds ``pi/3`` are bisected.  Returns
    the refined samples and root values.
    """
    x = np.asarray(x, dtype=complex)
    gv = g(x)
    for _ in range(max_depth):
        d = np.angle(gv[1:] / gv[:-1])
        bad = np.abs(d) > math.pi / 3
        if not np.any(bad):
            break
        idx = np.nonzero(bad)[0]
        mid = (x[idx] + x[idx + 1]) / 2
        x = np.insert(x, idx + 1, mid)
        gv = np.insert(gv, idx + 1, g(mid))
    else:
        raise BasisError("cube-root continuation did not resolve; path too close to a pole or zero")
    if np.any(np.abs(gv) == 0) or not np.all(np.isfinite(gv)):
        raise BasisError("path runs through a zero or pole")
    d = np.angle(gv[1:] / gv[:-1])
    phase = np.concatenate([[0.0], np.cumsum(d)])
    root0 = cube_root_near(gv[0], f_start)
    f = np.abs(gv) ** (1 / 3) * np.exp(1j * (np.angle(root0) + phase / 3))
    return x, f


def cube_root_near(g: complex, ref: complex) -> complex:
    r = complex(g) ** (1 / 3) if g != 0 else 0j
    cands = [r, r * OMEGA, r * OMEGA**2]
    return min(cands, key=lambda c: abs(c - ref))


class Basis:
    """``F1`` and ``F2`` on the sixfold cover for a fixed surface and ``b``.

    ``f1(x)`` is the branch of ``G1**(1/3)`` on sheet 1, continued inside
    the plane cut along both slits from the principal root at ``x = 2i``.
    On label ``(1, k)`` the basis function is ``w**k f1`` with ``w`` the
    primitive cube root of unity.  On level 2 the values are fixed by the
    product rule ``F1 F2 = (x - b) / (c (x - eta21))`` together with
    ``F2 = F1 o Pi``.
    """

    def __init__(self, surface: Surface, bpoint: BPoint, step: float = 0.02):
        self.surface = surface
        self.bpoint = bpoint
        self.step = step
        self.g1, self.g2 = g_functions(surface, bpoint)
        self.cube_norm = complex(bpoint.ups_ddot**2 / 4 - 1) ** (1 / 3)
        self._build_skeleton()
        self.gluing = self._find_gluing()

    # -- rational part of the product ------------------------------------------

    def product(self, x):
        """``F1 * F2`` at any point over ``x``."""
        return (x - self.bpoint.b) / (self.cube_norm * (x - self.surface.bp.eta21))

    def _g1_sheet1(self, x):
        x = np.asarray(x, dtype=complex)
        return self.g1(x, self.surface.upsilon1(x))

    # -- skeleton of the cut plane ---------------------------------------------

    def _build_skeleton(self):
        S = self.surface
        inner, outer = S.cut_curves(801)
        self.r_small = 0.5 * float(np.min(np.abs(inner)))
        self.r_big = max(4.0, 2.0 * float(np.max(np.abs(outer))))
        g = self._g1_sheet1
        f0 = complex(g(np.array([ANCHOR]))[0]) ** (1 / 3)
        ray = S.densify([ANCHOR, 1j * self.r_big], self.step)
        _, f_ray = continue_cube_root(ray, g, f0)
        n_big = max(720, int(2 * math.pi * self.r_big / self.step))
        th = math.pi / 2 + 2 * math.pi * np.arange(n_big + 1) / n_big
        big = self.r_big * np.exp(1j * th)
        big_x, big_f = continue_cube_root(big, g, f_ray[-1])
        if abs(big_f[-1] - big_f[0]) > 1e-8 * abs(big_f[0]):
            raise BasisError("cube root is not single-valued on the outer ring")
        i_neg = int(np.argmin(np.abs(big_x + self.r_big)))
        axis = S.densify([big_x[i_neg], -self.r_small + 0j], self.step)
        _, f_axis = continue_cube_root(axis, g, big_f[i_neg])
        n_small = 720
        th = math.pi + 2 * math.pi * np.arange(n_small + 1) / n_small
        small = self.r_small * np.exp(1j * th)
        small_x, small_f = continue_cube_root(small, g, f_axis[-1])
        if abs(small_f[-1] - small_f[0]) > 1e-8 * abs(small_f[0]):
            raise BasisError("cube root is not single-valued on the inner ring")
        self._hubs_x = np.concatenate([big_x[:-1], small_x[:-1]])
        self._hubs_f = np.concatenate([big_f[:-1], small_f[:-1]])
        # a polar net of secondary hubs for targets hidden behind a slit
        self._net: list[tuple[complex, complex]] = []

    def _hub_candidates(self, x: complex):
        ang = cmath.phase(x)
        order = []
        for k in range(33):
            da = (k + 1) // 2 * (math.pi / 16) * (1 if k % 2 else -1)
            for r in (self.r_big, self.r_small):
                order.append(r * cmath.exp(1j * (ang + da)))
        if abs(x) > 1:
            order.sort(key=lambda h: (abs(h) < 1,))
        else:
            order.sort(key=lambda h: (abs(h) > 1,))
        return order

    def _nearest_hub(self, target: complex) -> tuple[complex, complex]:
        i = int(np.argmin(np.abs(self._hubs_x - target)))
        return complex(self._hubs_x[i]), complex(self._hubs_f[i])

    def _route(self, x: complex) -> tuple[complex, complex]:
        """A hub reachable from ``x`` by one straight slit-free segment."""
        S = self.surface
        for h in self._hub_candidates(x):
            hx, hf = self._nearest_hub(h)
            if not S.segment_crosses_cut(hx, x):
                return hx, hf
        for nx, nf in self._net_points():
            if not S.segment_crosses_cut(nx, x):
                return nx, nf
        raise BasisError(f"no slit-free route to x={x}")

    def _net_points(self):
        if not self._net:
            S = self.surface
            radii = np.geomspace(self.r_small * 1.5, self.r_big / 1.5, 12)
            for r in radii:
                for a in np.linspace(-math.pi, math.pi, 48, endpoint=False):
                    p = complex(r * cmath.exp(1j * a))
                    if S.on_cut(p, 1e-6):
                        continue
                    for h in self._hub_candidates(p):
                        hx, hf = self._nearest_hub(h)
                        if not S.segment_crosses_cut(hx, p):
                            path = S.densify([hx, p], self.step)
                            _, f = continue_cube_root(path, self._g1_sheet1, hf)
                            self._net.append((p, complex(f[-1])))
                            break
        return self._net

    # -- point values ------------------------------------------------------------

    def _side_point(self, x: complex) -> complex:
        """Off-slit affix on the side whose sheet-1 values extend those at ``x``."""
        S = self.surface
        if not S.on_cut(x, 1e-9):
            return x
        sp = 1 - 1 / x**2
        n = 1j * sp.conjugate() / abs(sp)
        u = complex(S.upsilon1(x))
        delta = 1e-7 * max(1.0, abs(x))
        for side in (n, -n):
            p = x + delta * side
            if abs(complex(S.upsilon1(p)) - u) < 1e-4 * max(1.0, abs(u)):
                return p
        raise BasisError(f"cannot resolve the side of the slit at x={x}")

    def _segment(self, a: complex, b: complex) -> np.ndarray:
        """Samples from ``a`` to ``b``; spacing grows with ``|x|`` beyond the outer ring."""
        if abs(b) <= 2 * self.r_big:
            return self.surface.densify([a, b], self.step)
        radii = np.geomspace(abs(a), abs(b), int(math.ceil(math.log(abs(b) / abs(a)) / 0.01)) + 2)
        t = (radii - abs(a)) / (abs(b) - abs(a))
        return a + (b - a) * t

    def f1(self, x: complex) -> complex:
        """Sheet-1 reference branch of ``G1**(1/3)``."""
        x = complex(x)
        if x == 0 or x == self.surface.bp.eta21:
            raise BasisError("f1 is evaluated at finite points away from eta21 and 0")
        p = self._side_point(x)
        hx, hf = self._route(p)
        path = self._segment(hx, p)
        _, f = continue_cube_root(path, self._g1_sheet1, hf)
        val = complex(f[-1])
        if p != x:
            val = cube_root_near(complex(self._g1_sheet1(np.array([x]))[0]), val)
        return val

    def f2(self, x: complex) -> complex:
        """Level-2 reference branch, pinned by the product rule."""
        return OMEGA * self.product(x) / self.f1(x)

    def F1(self, p: PointR3) -> complex:
        base = self.f1(p.affix) if p.level == 1 else self.f2(p.affix)
        return OMEGA ** p.branch * base

    def F2(self, p: PointR3) -> complex:
        return self.F1(PointR3(p.affix, 7 - p.sheet))

    def G1_at(self, p: PointR | PointR3) -> complex:
        u = self.surface.upsilon(p)
        return complex(self.g1(p.affix, u))

    # -- gluing across the slits ---------------------------------------------------

    def _find_gluing(self) -> CoverGluing:
        S = self.surface
        inner, outer = S.cut_curves(801)
        shifts = []
        for curve in (inner, outer):
            votes = set()
            for t in (0.35, 0.5, 0.65):
                x = complex(curve[int(t * (len(curve) - 1))])
                sp = 1 - 1 / x**2
                n = 1j * sp.conjugate() / abs(sp)
                delta = 1e-6 * max(1.0, abs(x))
                xa, xb = x + delta * n, x - delta * n
                for pa, pb in ((xa, xb), (xb, xa)):
                    ratio = self.f2(pa) / self.f1(pb)
                    g = round(cmath.phase(ratio) / (2 * math.pi / 3)) % 3
                    if abs(ratio - OMEGA**g) > 1e-3:
                        raise BasisError("gluing ratio is not a cube root of unity")
                    votes.add(g)
            if len(votes) != 1:
                raise BasisError("inconsistent gluing across a slit")
            shifts.append(votes.pop())
        return CoverGluing(inner=shifts[0], outer=shifts[1])

    # -- continuation on the cover -------------------------------------------------

    def lift(self, contour: LiftedContour, start: PointR3) -> LiftedContour:
        """Attach continuous ``F1`` values to a contour starting at ``start``.

        Labels along the contour follow from the ratio of the continued
        value to the reference branches; only the start label is needed for
        integrals, so per-node labels are not computed here.
        """
        x, ups = contour.affix, contour.ups
        if abs(x[0] - start.affix) > 1e-12 * max(1.0, abs(x[0])):
            raise SurfaceError("contour must start at the lifted point's affix")
        g = self.g1(x, ups)
        d = np.angle(g[1:] / g[:-1])
        if np.max(np.abs(d)) > math.pi / 3:
            raise BasisError("contour too coarse for cube-root continuation")
        f0 = self.F1(start)
        phase = np.concatenate([[0.0], np.cumsum(d)])
        root0 = cube_root_near(g[0], f0)
        f = np.abs(g) ** (1 / 3) * np.exp(1j * (np.angle(root0) + phase / 3))
        out = LiftedContour(x, ups, contour.sheet, contour.weights, contour.closed, dict(contour.extra))
        out.extra["F1"] = f
        out.extra["F2"] = self.product(x) / f
        return out

    def label_of(self, x: complex, level: int, f1_value: complex) -> int:
        """Label of the point over ``(x, level)`` where ``F1`` takes ``f1_value``."""
        base = self.f1(x) if level == 1 else self.f2(x)
        k = round(cmath.phase(f1_value / base) / (2 * math.pi / 3)) % 3
        if abs(f1_value - OMEGA**k * base) > 1e-6 * max(1.0, abs(base)):
            raise BasisError("value is not a branch of F1 at this point")
        return label(level, k)


def build_basis(K: complex, algorithm: int = 1) -> Basis:
    S = Surface(K)
    bp = algorithm1(S) if algorithm == 1 else algorithm2(S)
    return Basis(S, bp)
