"""The dispersion surface of the lattice and its threefold cover.

For fixed K the dispersion relation is a quadratic in ``y`` whose two roots
satisfy ``y_+ y_- = 1``.  The Riemann surface of ``y(x)`` has two sheets
glued along the curves where ``|y| = 1``; sheet 1 carries the small root.
The irrationality

    Upsilon(x) = x (y_small - y_big) = sqrt(prod (x - eta))

has simple zeros at the four branch points and double poles at the two
infinities.

The sixfold surface used for the transformant is an unbranched threefold
cover of the dispersion surface.  A point of it is stored as an affix plus a
label 1..6.  Odd labels lie over sheet 1, even labels over sheet 2; the deck
map ``Lambda`` cycles 1->3->5 and 2->4->6 and the involution ``Pi`` sends
``j`` to ``7 - j``.  How the labels are glued across the cuts is decided by
the cube-root function built in :mod:`latticewedge.basis`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import LIMIT_EPS, check_wavenumber

CUT_TOL = 1e-12
TIE_TOL = 1e-10


class SurfaceError(ValueError):
    pass


class StepTooLarge(SurfaceError):
    """Continuation step could not be disambiguated."""


# ---------------------------------------------------------------------------
# points and label algebra


@dataclass(frozen=True)
class PointR:
    affix: complex
    sheet: int

    def __post_init__(self):
        if self.sheet not in (1, 2):
            raise SurfaceError(f"sheet on R must be 1 or 2, got {self.sheet}")


@dataclass(frozen=True)
class PointR3:
    affix: complex
    sheet: int

    def __post_init__(self):
        if self.sheet not in range(1, 7):
            raise SurfaceError(f"sheet on R3 must be in 1..6, got {self.sheet}")

    @property
    def level(self) -> int:
        """Sheet of the dispersion surface below this point."""
        return 1 if self.sheet % 2 else 2

    @property
    def branch(self) -> int:
        """Cube-root index 0, 1, 2 within the level."""
        return (self.sheet - 1) // 2


def label(level: int, branch: int) -> int:
    return 2 * (branch % 3) + (1 if level == 1 else 2)


def project_31(p: PointR3) -> PointR:
    return PointR(p.affix, p.level)


def project_10(p: PointR | PointR3) -> complex:
    return p.affix


def apply_lambda(p: PointR3) -> PointR3:
    return PointR3(p.affix, label(p.level, p.branch + 1))


def apply_pi(p):
    if isinstance(p, PointR):
        return PointR(p.affix, 3 - p.sheet)
    return PointR3(p.affix, 7 - p.sheet)


@dataclass(frozen=True)
class CoverGluing:
    """Branch shifts met when crossing each cut from level 2 to level 1.

    Crossing the inner cut (the one ending at ``eta21``) from the point with
    label ``(2, k)`` lands on ``(1, k + inner)``; likewise for the outer cut.
    """

    inner: int
    outer: int


def apply_pi_prime(p: PointR3, gluing: CoverGluing) -> PointR3:
    """The map ``x -> 1/x`` that fixes ``y``, lifted to the cover.

    It is normalised to send label 2 near ``x = 1`` to label 2.  Because it
    swaps the two cuts and reverses homology, on level 2 it acts as
    ``k -> -k`` and on level 1 as ``k -> outer - (k - inner)``.
    """
    if p.affix == 0 or cmath.isinf(p.affix):
        raise SurfaceError("pi_prime is applied to finite nonzero affixes only")
    if p.level == 2:
        k = -p.branch
    else:
        k = gluing.outer - (p.branch - gluing.inner)
    return PointR3(1 / p.affix, label(p.level, k))


# ---------------------------------------------------------------------------
# branch points


@dataclass(frozen=True)
class BranchPoints:
    eta11: complex
    eta12: complex
    eta21: complex
    eta22: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.eta11, self.eta12, self.eta21, self.eta22)

    def min_separation(self) -> float:
        pts = self.as_tuple()
        return min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])


def branch_points(K: complex) -> BranchPoints:
    K = check_wavenumber(K)
    d1 = K * K - 2
    r1 = cmath.sqrt(4 - d1 * d1)
    d2 = K * K - 6
    r2 = cmath.sqrt(d2 * d2 - 4)
    bp = BranchPoints(eta11=-d1 / 2 - 1j * r1 / 2, eta21=-d1 / 2 + 1j * r1 / 2,
                      eta12=-d2 / 2 + r2 / 2, eta22=-d2 / 2 - r2 / 2)
    if bp.min_separation() < 1e-8:
        raise SurfaceError(f"branch points coincide for K={K}")
    return bp


# ---------------------------------------------------------------------------
# lifted contours


@dataclass
class LiftedContour:
    """Discretised path on the dispersion surface with tracked ``Upsilon``.

    ``weights`` are quadrature weights for ``integral f dx``: the parameter
    derivative times the step for closed uniform contours, trapezoid
    differences otherwise.
    """

    affix: np.ndarray
    ups: np.ndarray
    sheet: np.ndarray
    weights: np.ndarray
    closed: bool = False
    extra: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.affix)

    def reversed(self) -> "LiftedContour":
        w = -self.weights[::-1]
        return LiftedContour(self.affix[::-1].copy(), self.ups[::-1].copy(),
                             self.sheet[::-1].copy(), w.copy(), self.closed,
                             {k: v[::-1].copy() for k, v in self.extra.items()})

    def to_csv(self) -> str:
        lines = ["k,re_x,im_x,sheet,re_upsilon,im_upsilon"]
        for k, (x, s, u) in enumerate(zip(self.affix, self.sheet, self.ups)):
            lines.append(f"{k},{x.real!r},{x.imag!r},{int(s)},{u.real!r},{u.imag!r}")
        return "\n".join(lines) + "\n"


def polyline_weights(x: np.ndarray) -> np.ndarray:
    """Trapezoid weights for an open path through the samples ``x``."""
    w = np.zeros_like(x, dtype=complex)
    dx = np.diff(x)
    w[:-1] += dx / 2
    w[1:] += dx / 2
    return w


def track_signs(values: np.ndarray, start: complex | None = None) -> np.ndarray:
    """Flip signs of a sampled square root so that it varies continuously.

    Raises :class:`StepTooLarge` when a step is ambiguous.
    """
    v = np.asarray(values, dtype=complex)
    if len(v) == 0:
        return v
    same = np.abs(v[1:] - v[:-1])
    flip = np.abs(v[1:] + v[:-1])
    bad = np.abs(same - flip) < 0.25 * np.maximum(same, flip)
    if np.any(bad & (np.maximum(same, flip) > 1e-12)):
        raise StepTooLarge("square-root continuation step is ambiguous; refine the path")
    parity = np.concatenate([[0], np.cumsum(same > flip)]) % 2
    out = np.where(parity == 1, -v, v)
    if start is not None and abs(out[0] - start) > abs(out[0] + start):
        out = -out
    return out


# ---------------------------------------------------------------------------
# the surface


class Surface:
    """Dispersion surface for one wavenumber."""

    def __init__(self, K: complex):
        self.K = check_wavenumber(K)
        self.k2 = self.K * self.K
        self.bp = branch_points(self.K)
        self._limit_k2 = (self.K + 1j * LIMIT_EPS) ** 2

    # -- pointwise quantities ------------------------------------------------

    def s_of(self, x):
        return self.k2 - 4 + x + 1 / x

    def poly(self, x):
        return (x * x + (self.k2 - 2) * x + 1) * (x * x + (self.k2 - 6) * x + 1)

    def poly_derivs(self, x):
        a = x * x + (self.k2 - 2) * x + 1
        b = x * x + (self.k2 - 6) * x + 1
        da = 2 * x + self.k2 - 2
        db = 2 * x + self.k2 - 6
        return a * b, da * b + a * db, 2 * b + 2 * da * db + 2 * a

    @staticmethod
    def _big_root(s):
        # root of y^2 + s y + 1 = 0 with the larger modulus
        r = np.sqrt(s * s - 4 + 0j)
        q1 = (-s - r) / 2
        q2 = (-s + r) / 2
        return np.where(np.abs(q1) >= np.abs(q2), q1, q2)

    def _sheet1_sign(self, x, s, big):
        """+1 where the small-root branch must be kept as is, else -1 at ties."""
        small = 1 / big
        tie = np.abs(np.abs(big) - np.abs(small)) < TIE_TOL * np.maximum(1.0, np.abs(big))
        if not np.any(tie):
            return np.ones(np.shape(x))
        # on a cut: take the side selected by the limit Im K -> +0
        xs = np.asarray(x)[tie]
        s_eps = self._limit_k2 - 4 + xs + 1 / xs
        big_eps = self._big_root(s_eps)
        ups_eps = xs * (1 / big_eps - big_eps)
        ups_now = xs * (small[tie] - big[tie])
        sign = np.ones(np.shape(x))
        sign[tie] = np.where(np.abs(ups_now - ups_eps) <= np.abs(ups_now + ups_eps), 1.0, -1.0)
        return sign

    def upsilon1(self, x):
        """Sheet-1 value of Upsilon at finite nonzero affixes (vectorised)."""
        x = np.asarray(x, dtype=complex)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        s = self.s_of(x)
        big = self._big_root(s)
        ups = x * (1 / big - big)
        ups = ups * self._sheet1_sign(x, s, big)
        return ups[0] if scalar else ups

    def upsilon_at(self, x, level):
        u = self.upsilon1(x)
        return u if level == 1 else -u

    def upsilon(self, p: PointR | PointR3) -> complex:
        if cmath.isinf(p.affix):
            raise SurfaceError("Upsilon has a double pole at infinity")
        level = p.sheet if isinstance(p, PointR) else p.level
        if p.affix == 0:
            return complex(1.0 if level == 1 else -1.0) * self._ups_at_zero()
        return complex(self.upsilon_at(p.affix, level))

    def _ups_at_zero(self) -> complex:
        # limit x -> 0 on sheet 1, approached along the negative real axis
        return complex(self.upsilon1(-1e-12 + 0j) / abs(self.upsilon1(-1e-12 + 0j)))

    def y_from(self, x, ups):
        return -self.s_of(x) / 2 + ups / (2 * x)

    def y_of(self, p: PointR | PointR3) -> complex:
        level = p.sheet if isinstance(p, PointR) else p.level
        if cmath.isinf(p.affix):
            if level == 1:
                return 0j
            raise SurfaceError("y has a pole at the sheet-2 infinity")
        if p.affix == 0:
            if level == 1:
                return 0j
            raise SurfaceError("y has a pole at the sheet-2 zero")
        s = self.s_of(p.affix)
        big = complex(self._big_root(np.array([s]))[0])
        ups1 = complex(self.upsilon1(p.affix))
        y1 = complex(self.y_from(p.affix, ups1))
        # guard against cancellation near 0 and infinity
        if abs(abs(y1) - abs(1 / big)) > 1e-8 * max(1.0, abs(y1)):
            y1 = complex(self.y_from(p.affix, ups1))
        else:
            y1 = 1 / big if abs(1 / big - y1) <= abs(big - y1) else big
        return y1 if level == 1 else 1 / y1

    def upsilon_derivs(self, x: complex, ups: complex) -> tuple[complex, complex]:
        """First and second x-derivatives of Upsilon from ``Upsilon^2 = P``."""
        _, p1, p2 = self.poly_derivs(x)
        d1 = p1 / (2 * ups)
        d2 = (p2 / 2 - d1 * d1) / ups
        return d1, d2

    def sheet_of(self, x, ups):
        """Sheet label (1 or 2) of a tracked Upsilon value at affix ``x``."""
        u1 = self.upsilon1(x)
        return np.where(np.abs(ups - u1) <= np.abs(ups + u1), 1, 2)

    def on_cut(self, x: complex, tol: float = CUT_TOL) -> bool:
        s = self.s_of(complex(x))
        return abs(s.imag) <= tol * max(1.0, abs(s)) and -2 - tol <= s.real <= 2 + tol

    # -- cut geometry ----------------------------------------------------------

    def cut_curves(self, samples: int = 2001) -> tuple[np.ndarray, np.ndarray]:
        """Inner and outer cut as sampled curves ``{x : s(x) in [-2, 2]}``."""
        t = np.linspace(-2, 2, samples)
        w = t - (self.k2 - 4)
        r = np.sqrt(w * w - 4 + 0j)
        a = (w + r) / 2
        b = (w - r) / 2
        inner = np.where(np.abs(a) <= np.abs(b), a, b)
        outer = 1 / inner
        return inner, outer

    def segment_crosses_cut(self, p: complex, q: complex) -> bool:
        """Whether the straight segment ``[p, q]`` meets a cut."""
        d = q - p
        a, b = p.imag, d.imag
        A, B, C = abs(p) ** 2, 2 * (p.real * d.real + p.imag * d.imag), abs(d) ** 2
        kap = self.k2.imag
        coeffs = [b * C, a * C + b * B + kap * C, a * B + b * (A - 1) + kap * B, a * (A - 1) + kap * A]
        scale = max(abs(c) for c in coeffs)
        if scale < 1e-300:
            return True
        coeffs = [c / scale for c in coeffs]
        while coeffs and abs(coeffs[0]) < 1e-13:
            coeffs = coeffs[1:]
        if not coeffs:
            return True
        if len(coeffs) == 1:
            return False
        for t in np.roots(coeffs):
            if abs(t.imag) > 1e-9 or not -1e-12 <= t.real <= 1 + 1e-12:
                continue
            x = p + t.real * d
            if x == 0:
                continue
            if -2 <= self.s_of(x).real <= 2:
                return True
        return False

    # -- continuation ----------------------------------------------------------

    def continue_along(self, path, start: PointR, weights=None, closed: bool = False,
                       clearance: float = 1e-3) -> LiftedContour:
        """Continue ``Upsilon`` from ``start`` along sampled affixes ``path``.

        The path is used as given; consecutive samples must be close enough
        for the sign choice to be unambiguous.
        """
        x = np.asarray(path, dtype=complex)
        if abs(x[0] - start.affix) > 1e-12 * max(1.0, abs(start.affix)):
            raise SurfaceError("path must begin at the start point's affix")
        dist = np.min(np.abs(x[:, None] - np.array(self.bp.as_tuple())[None, :]))
        scale = max(1.0, float(np.max(np.abs(x))))
        if dist < clearance * scale * 1e-3 and not closed:
            raise SurfaceError("path passes through a branch point")
        u1 = self.upsilon1(x)
        u_start = self.upsilon(start)
        ups = track_signs(u1, u_start)
        sheet = self.sheet_of(x, ups)
        if weights is None:
            weights = polyline_weights(x)
        return LiftedContour(x, ups, sheet, np.asarray(weights, dtype=complex), closed)

    def densify(self, vertices, step: float = 0.01) -> np.ndarray:
        pts = [complex(vertices[0])]
        for a, b in zip(vertices[:-1], vertices[1:]):
            n = max(1, int(math.ceil(abs(b - a) / step)))
            seg = a + (b - a) * np.arange(1, n + 1) / n
            pts.extend(seg.tolist())
        return np.array(pts, dtype=complex)

    # -- contours for the two basic cycles -------------------------------------

    def sigma_beta(self, nodes: int = 4096, bulge: float = 0.3) -> LiftedContour:
        """Loop homotopic to the unit circle on sheet 1, negative direction.

        The radius ``1 + bulge*sin(theta)`` keeps ``eta21`` inside and
        ``eta11`` outside, which for real K is the ``Im K -> +0`` limit.
        """
        th = math.pi - 2 * math.pi * np.arange(nodes) / nodes
        rho = 1 + bulge * np.sin(th)
        e = np.exp(1j * th)
        x = rho * e
        dxdth = (bulge * np.cos(th) + 1j * rho) * e
        w = dxdth * (-2 * math.pi / nodes)
        inside = [self.bp.eta21, self.bp.eta22]
        outside = [self.bp.eta11, self.bp.eta12]
        self._check_enclosure(x, inside, outside)
        c = self.continue_along(x, PointR(x[0], 1), weights=w, closed=True)
        return c

    def sigma_alpha(self, nodes: int = 4096) -> LiftedContour:
        """Loop around ``eta11`` and ``eta21``, running down past ``x = 1`` on sheet 1."""
        e11, e21 = self.bp.eta11, self.bp.eta21
        c = (e11 + e21) / 2
        L = abs(e21 - e11)
        u = (e21 - e11) / L
        a = 0.65 * L
        w_minor = 0.15 * L
        th = math.pi / 2 + 2 * math.pi * np.arange(nodes) / nodes
        x = c + u * (a * np.cos(th)) - 1j * u * (w_minor * np.sin(th))
        dxdth = u * (-a * np.sin(th)) - 1j * u * (w_minor * np.cos(th))
        w = dxdth * (2 * math.pi / nodes)
        self._check_enclosure(x, [e11, e21], [self.bp.eta12, self.bp.eta22])
        return self.continue_along(x, PointR(x[0], 1), weights=w, closed=True)

    @staticmethod
    def _winding(poly: np.ndarray, z: complex) -> int:
        d = np.angle(np.roll(poly, -1) - z) - np.angle(poly - z)
        d = (d + np.pi) % (2 * np.pi) - np.pi
        return int(round(d.sum() / (2 * np.pi)))

    def _check_enclosure(self, x, inside, outside):
        for z in inside:
            if self._winding(x, z) == 0:
                raise SurfaceError("cycle contour fails to enclose a branch point it must enclose")
        for z in outside:
            if self._winding(x, z) != 0:
                raise SurfaceError("cycle contour encloses a branch point it must avoid")

    # -- Abelian integral --------------------------------------------------------

    @staticmethod
    def abelian_integral(contour: LiftedContour) -> complex:
        if len(contour) < 2:
            return 0j
        return complex(np.sum(contour.weights / contour.ups))

    def periods(self, nodes: int = 4096) -> "Periods":
        tb = self.abelian_integral(self.sigma_beta(nodes))
        ta = self.abelian_integral(self.sigma_alpha(nodes))
        return Periods(T_alpha=ta, T_beta=tb)

    def abel_map(self, p: PointR, nodes: int = 64) -> complex:
        """``integral from eta21 to p of dx/Upsilon`` along a straight path in
        the local variable ``tau = sqrt(x - eta21)``."""
        e21 = self.bp.eta21
        if abs(p.affix - e21) < 1e-15:
            return 0j
        tau_end = cmath.sqrt(p.affix - e21)
        g, gw = np.polynomial.legendre.leggauss(nodes)
        # fine enough sampling for the sign tracking, then Gauss nodes on top
        ts = np.linspace(0, 1, 4 * nodes + 1)
        t_all = np.concatenate([ts, (g + 1) / 2])
        order = np.argsort(t_all, kind="stable")
        tau = t_all[order] * tau_end
        q = self._q_of_tau(tau)
        sq = track_signs(np.sqrt(q + 0j))
        # integrand 2/sqrt(Q) in tau; fix the end so that it matches p's sheet
        ups_end = tau[-1] * sq[-1]
        want = self.upsilon(p)
        sign = 1.0 if abs(ups_end - want) <= abs(ups_end + want) else -1.0
        inv_pos = np.empty_like(order)
        inv_pos[order] = np.arange(len(order))
        sq_gauss = sq[inv_pos[len(ts):]]
        val = np.sum(gw / 2 * 2 / sq_gauss) * tau_end
        return complex(sign * val)

    def _q_of_tau(self, tau):
        e11, e12, e21, e22 = self.bp.eta11, self.bp.eta12, self.bp.eta21, self.bp.eta22
        t2 = tau * tau + e21
        return (t2 - e11) * (t2 - e12) * (t2 - e22)

    # -- inverse Abel map ---------------------------------------------------------

    def psi(self, chi: complex, steps: int = 400, method: str = "rk4") -> "PsiResult":
        """Solve ``dx/dchi = Upsilon(x)`` from ``eta21`` along ``[0, chi]``.

        ``method="euler"`` integrates the local-variable equation with forward
        Euler throughout and reports the integrator's own slope estimate of
        ``Upsilon`` at the end.  ``method="rk4"`` uses the local variable
        near the start and hands over to the ``x`` equation once
        ``|x - eta21|`` exceeds a tenth of the smallest branch-point gap.
        """
        e21 = self.bp.eta21
        h = chi / steps
        handoff = 0.1 * self.bp.min_separation()

        def g(t, prev):
            v = 0.5 * cmath.sqrt(complex(self._q_of_tau(t)))
            if prev is not None and abs(v - prev) > abs(v + prev):
                v = -v
            return v

        t = 0j
        prev = None
        if method == "euler":
            for _ in range(steps):
                v = g(t, prev)
                prev = v
                t = t + h * v
            x = t * t + e21
            ups_est = 2 * t * prev
            return self._psi_result(x, ups_est, ups_est)
        if method != "rk4":
            raise ValueError(f"unknown method {method!r}")

        i = 0
        while i < steps and abs(t) ** 2 < handoff:
            k1 = g(t, prev)
            prev = k1
            k2 = g(t + h / 2 * k1, prev)
            k3 = g(t + h / 2 * k2, prev)
            k4 = g(t + h * k3, prev)
            t = t + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            i += 1
        x = t * t + e21
        ups = 2 * t * g(t, prev)
        if abs(t) == 0:
            return self._psi_result(x, ups, ups)

        def f(xv, uprev):
            u = cmath.sqrt(complex(self.poly(xv)))
            return u if abs(u - uprev) <= abs(u + uprev) else -u

        while i < steps:
            k1 = f(x, ups)
            k2 = f(x + h / 2 * k1, k1)
            k3 = f(x + h / 2 * k2, k2)
            k4 = f(x + h * k3, k3)
            x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            ups = f(x, k4)
            i += 1
        return self._psi_result(x, ups, ups)

    def _psi_result(self, x, ups_track, ups_report):
        sheet = int(self.sheet_of(np.array([x]), np.array([ups_track]))[0])
        return PsiResult(point=PointR(complex(x), sheet), ups_estimate=complex(ups_report))

    # -- torus coordinates ---------------------------------------------------------

    def torus_coords(self, chi: complex, periods: "Periods") -> "TorusCoords":
        ta, tb = periods.T_alpha, periods.T_beta
        m = np.array([[ta.real, tb.real], [ta.imag, tb.imag]])
        if abs(np.linalg.det(m)) < 1e-14:
            raise SurfaceError("degenerate period lattice")
        ab = np.linalg.solve(m, np.array([chi.real, chi.imag])) * 2 * math.pi
        alpha, beta = (float(v) % (2 * math.pi) for v in ab)
        # fold values within rounding of 2*pi back to 0
        alpha = 0.0 if abs(alpha - 2 * math.pi) < 1e-9 else alpha
        beta = 0.0 if abs(beta - 2 * math.pi) < 1e-9 else beta
        return TorusCoords(alpha, beta)

    def torus_coords_of(self, p: PointR, periods: "Periods") -> "TorusCoords":
        return self.torus_coords(self.abel_map(p), periods)


@dataclass(frozen=True)
class Periods:
    T_alpha: complex
    T_beta: complex

    def nondegenerate(self) -> bool:
        return abs((self.T_alpha / self.T_beta).imag) > 1e-10

    def lattice_distance(self, value: complex, span: int = 3) -> float:
        best = math.inf
        for j in range(-span, span + 1):
            for l in range(-span, span + 1):
                best = min(best, abs(value - j * self.T_alpha - l * self.T_beta))
        return best


@dataclass(frozen=True)
class TorusCoords:
    alpha: float
    beta: float


@dataclass(frozen=True)
class PsiResult:
    point: PointR
    ups_estimate: complex
