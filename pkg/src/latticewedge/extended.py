"""Extended-precision quadrature for the circle contours around 0 and infinity.

On those circles the summands ``x**m y**n A dx / Upsilon`` reach 1e45 at
``|m|, |n| ~ 30`` while the total is O(1), so double precision loses every
digit.  Here each node is re-evaluated with multiprecision arithmetic.
The branch of every square and cube root is the one nearest to the
double-precision value already continued along the contour, and all
parameters are promoted exactly from their double values.
"""

from __future__ import annotations

import gmpy2
import numpy as np
from gmpy2 import mpc


PRECISION_BITS = 256


def _c(z) -> mpc:
    return mpc(complex(z))


def _cube_turns() -> list:
    """The three cube roots of unity at the working precision."""
    w = mpc(-1, gmpy2.sqrt(3)) / 2
    return [mpc(1), w, w * w]


def _nearest(root: mpc, ref: complex, turns) -> mpc:
    best, err = root, None
    for t in turns:
        cand = root * t
        e = abs(complex(cand) - ref)
        if err is None or e < err:
            best, err = cand, e
    return best


class PreciseParams:
    """Every constant entering ``A``, recomputed in extended precision.

    Rounded constants would leave ``G1`` with zero/pole pairs a rounding
    error apart instead of exact triple points; weighted by ``|x**m y**n|``
    those pairs are visible at large ``|m|, |n|``.  So the chain branch
    points -> b -> Upsilon derivatives -> cube norm -> poles -> s is
    rebuilt, each step seeded by the double-precision value.
    """

    def __init__(self, trans, bits: int):
        T = trans
        S, bp, basis = T.surface, T.basis.bpoint, T.basis
        self.bits = bits
        K = _c(S.K)
        self.k2 = k2 = K * K
        d1, d2 = k2 - 2, k2 - 6
        r1 = gmpy2.sqrt(4 - d1 * d1)
        self.eta21 = eta = min([-d1 / 2 + mpc(0, 1) * r1 / 2, -d1 / 2 - mpc(0, 1) * r1 / 2],
                               key=lambda z: abs(complex(z) - S.bp.eta21))
        r2 = gmpy2.sqrt(d2 * d2 - 4)
        cands = [-d2 / 2 + r2 / 2, -d2 / 2 - r2 / 2]
        e12 = min(cands, key=lambda z: abs(complex(z) - S.bp.eta12))
        h = _quartic(eta, e12)
        b = _c(bp.b)
        tiny = gmpy2.mpfr(2) ** (-bits + 8)
        for _ in range(60):
            step = _horner(h, b) / _horner(_deriv(h), b)
            b -= step
            if abs(step) < tiny:
                break
        else:
            raise ArithmeticError("extended Newton for b did not converge")
        self.b = b
        self.ups_b = u = self.ups_at(b, bp.ups)
        p0, p1, p2 = self.poly_derivs(b)
        self.ups_dot = ud = p1 / (2 * u)
        self.ups_ddot = udd = (p2 / 2 - ud * ud) / u
        third = gmpy2.mpfr(1) / 3
        turns = _cube_turns()
        self.cube_norm = _nearest((udd * udd / 4 - 1) ** third, basis.cube_norm, turns)
        self.xin = self._incident(T)
        self.xo = 1 / self.xin
        self.Y1 = self.ups_at(self.xin, T.poles.Y1)
        self.Y3 = self.ups_at(self.xo, T.poles.Y3)
        pole_x = [self.xin, self.xin, self.xo, self.xo]
        pole_u = [self.Y1, -self.Y1, self.Y3, -self.Y3]
        F1 = {k: _nearest(self.g1(x, uu) ** third, T.pole_F["F1"][k], turns)
              for k, x, uu in zip(range(1, 5), pole_x, pole_u)}
        F2 = {k: self.product(pole_x[k - 1]) / F1[k] for k in F1}
        self.s = self._sparams(T, F1, F2)

    def poly_derivs(self, x):
        k2 = self.k2
        a = x * x + (k2 - 2) * x + 1
        c = x * x + (k2 - 6) * x + 1
        da, dc = 2 * x + k2 - 2, 2 * x + k2 - 6
        return a * c, da * c + a * dc, 2 * c + 2 * da * dc + 2 * a

    def ups_at(self, x, ref: complex):
        return _nearest(gmpy2.sqrt(self.poly_derivs(x)[0]), complex(ref), [mpc(1), mpc(-1)])

    def g1(self, x, u):
        db = x - self.b
        return ((x - self.b) / (x - self.eta21)) / (
            u / (db * db) + self.ups_b / (db * db) + self.ups_dot / db + self.ups_ddot / 2)

    def product(self, x):
        return (x - self.b) / (self.cube_norm * (x - self.eta21))

    def _incident(self, T):
        inc = T.inc
        x, y = _c(inc.x), _c(inc.y)
        t = gmpy2.tan(gmpy2.mpfr(inc.phi_in))
        tiny = gmpy2.mpfr(2) ** (-self.bits + 8)
        for _ in range(60):
            f1 = x + 1 / x + y + 1 / y + self.k2 - 4
            f2 = (y - 1 / y) - t * (x - 1 / x)
            j11, j12 = 1 - 1 / (x * x), 1 - 1 / (y * y)
            j21, j22 = -t * (1 + 1 / (x * x)), 1 + 1 / (y * y)
            det = j11 * j22 - j12 * j21
            dx = (f1 * j22 - f2 * j12) / det
            dy = (j11 * f2 - j21 * f1) / det
            x, y = x - dx, y - dy
            if abs(dx) + abs(dy) < tiny:
                break
        else:
            raise ArithmeticError("extended Newton for the incident wave did not converge")
        return x

    def _sparams(self, T, F1, F2):
        pi = gmpy2.const_pi()
        i = mpc(0, 1)
        b, eta, xin, xo, Y1, Y3 = self.b, self.eta21, self.xin, self.xo, self.Y1, self.Y3
        Z = i * self.cube_norm / (12 * pi)
        s = [mpc(0)] * 12
        s[0] = _c(T.sparams.s[0])
        s[1] = i * Y1 / (6 * pi)
        s[2] = i * Y3 / (6 * pi)
        s[4] = Z * Y1 / (xin - b) * (F2[1] + F2[2])
        s[6] = Z * (1 / (b - eta) + 1 / (xin - b)) * (F2[1] - F2[2])
        s[8] = Z * Y1 / (xin - b) * (F1[1] + F1[2])
        s[10] = Z * (1 / (b - eta) + 1 / (xin - b)) * (F1[1] - F1[2])
        s[5] = Z * Y3 / (xo - b) * (F2[3] + F2[4])
        s[7] = Z * (1 / (b - eta) + 1 / (xo - b)) * (F2[3] - F2[4])
        s[9] = Z * Y3 / (xo - b) * (F1[3] + F1[4])
        s[11] = Z * (1 / (b - eta) + 1 / (xo - b)) * (F1[3] - F1[4])
        return s


def _quartic(a, e):
    return [a + 3 * e - a * a * e + a * e * e,
            -4 * (1 + 2 * a * e + e * e),
            6 * (a + e + a * a * e + a * e * e),
            -4 * a * (a + 2 * e + a * e * e),
            a - e + 3 * a * a * e + a * e * e]


def _deriv(h):
    return [k * c for k, c in enumerate(h)][1:]


def _horner(h, z):
    acc = mpc(0)
    for c in reversed(h):
        acc = acc * z + c
    return acc


class PreciseTransformant:
    """Node values of ``A`` and ``y`` in extended precision."""

    def __init__(self, trans, bits: int = PRECISION_BITS):
        self.trans = trans
        self.bits = bits
        with self.context():
            self.params = PreciseParams(trans, bits)

    def _nodes(self, part):
        """``x``, ``dx`` for a circle part, rebuilt from its exact parametrisation."""
        c = part.contour
        n = len(c)
        center, radius, orient = c.extra["center"], c.extra["radius"], c.extra["orientation"]
        two_pi = 2 * gmpy2.const_pi()
        xs, ws = [], []
        r = gmpy2.mpfr(radius)
        for idx in c.extra["theta_index"]:
            th = two_pi * int(idx) / n
            e = mpc(gmpy2.cos(th), gmpy2.sin(th))
            xs.append(_c(center) + r * e)
            ws.append(orient * mpc(0, 1) * r * e * two_pi / n)
        return xs, ws

    def densities(self, part):
        """``(x, y, A dx / Upsilon)`` at every node of a circle part."""
        P = self.params
        s = P.s
        with self.context():
            b, eta, ub = P.b, P.eta21, P.ups_b
            xin, xo = P.xin, P.xo
            cube_turns = _cube_turns()
            third = gmpy2.mpfr(1) / 3
            xs, ws = self._nodes(part)
            ups_ref = part.contour.ups
            f1_ref = part.contour.extra["F1"]
            out_y, out_d = [], []
            for k, (x, w) in enumerate(zip(xs, ws)):
                u = P.ups_at(x, ups_ref[k])
                y = -(P.k2 - 4 + x + 1 / x) / 2 + u / (2 * x)
                f1 = _nearest(P.g1(x, u) ** third, complex(f1_ref[k]), cube_turns)
                f2 = P.product(x) / f1
                di, do, dbi = 1 / (x - xin), 1 / (x - xo), 1 / (x - b)
                q0 = s[1] * di + s[2] * do + s[0] + (s[3] * di - s[3] * do) * u
                q1 = ((x - eta) * (s[4] * di + s[5] * do - (s[6] + s[7]) * ub * dbi)
                      + (b - eta) * (s[6] * di + s[7] * do - (s[6] + s[7]) * dbi) * u)
                q2 = ((x - eta) * (s[8] * di + s[9] * do + (s[10] + s[11]) * ub * dbi)
                      + (b - eta) * (s[10] * di + s[11] * do - (s[10] + s[11]) * dbi) * u)
                a = q0 + q1 * f1 + q2 * f2
                out_y.append(y)
                out_d.append(a * w / u)
        return xs, out_y, out_d

    def power_sums(self, part, pairs) -> dict:
        """``{(m, n): sum_k d_k x_k**m y_k**n}`` for every requested pair."""
        xs, ys, ds = self.densities(part)
        pairs = sorted(set((int(m), int(n)) for m, n in pairs))
        with self.context():
            X = _power_rows(xs, [m for m, _ in pairs])
            Y = _power_rows(ys, [n for _, n in pairs])
            D = np.array(ds, dtype=object)
            rows = {n: D * Y[n] for n in {n for _, n in pairs}}
            return {(m, n): np.dot(rows[n], X[m]) for m, n in pairs}

    def context(self):
        return gmpy2.context(gmpy2.get_context(), precision=self.bits,
                             real_prec=self.bits, imag_prec=self.bits)


def _power_rows(z, exponents) -> dict:
    """Object arrays ``z**e`` for each ``e`` between 0 and the extremes needed."""
    z = np.array(z, dtype=object)
    lo, hi = min(min(exponents), 0), max(max(exponents), 0)
    rows = {0: np.array([mpc(1)] * len(z), dtype=object)}
    for e in range(1, hi + 1):
        rows[e] = rows[e - 1] * z
    if lo < 0:
        inv = np.array([1 / v for v in z], dtype=object)
        for e in range(-1, lo - 1, -1):
            rows[e] = rows[e + 1] * inv
    return rows
