"""Sommerfeld transformant on the sixfold cover.

``A = q0 + q1 F1 + q2 F2`` where each ``q_j = q_j'(x) + q_j''(x) Upsilon``
is built from rational functions with simple poles at ``x_in``,
``1/x_in`` and ``b``.  The twelve scalar parameters are fixed by the
residues of ``A dx / Upsilon`` at the four incident/reflected poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import OMEGA, Basis
from .lattice import IncidentWave
from .surface import PointR, PointR3, apply_lambda, apply_pi

COLLISION_TOL = 1e-8
POLE_GUARD = 1e-10


class TransformantError(ValueError):
    pass


@dataclass(frozen=True)
class PoleSet:
    x1: PointR3
    x2: PointR3
    x3: PointR3
    x4: PointR3
    Y1: complex
    Y3: complex

    @property
    def points(self) -> tuple[PointR3, PointR3, PointR3, PointR3]:
        return (self.x1, self.x2, self.x3, self.x4)

    @property
    def ups(self) -> tuple[complex, complex, complex, complex]:
        return (self.Y1, -self.Y1, self.Y3, -self.Y3)


def pole_set(basis: Basis, inc: IncidentWave) -> PoleSet:
    S = basis.surface
    xin = inc.x
    bad = [basis.bpoint.b, 0j, *S.bp.as_tuple()]
    for z in (xin, 1 / xin):
        if min(abs(z - w) for w in bad) < COLLISION_TOL:
            raise TransformantError("incident wave collides with b or a branch point")
    if abs(xin - 1 / xin) < COLLISION_TOL:
        raise TransformantError("x_in and 1/x_in coincide")
    p = PoleSet(PointR3(xin, 3), PointR3(xin, 4), PointR3(1 / xin, 6), PointR3(1 / xin, 1),
                Y1=S.upsilon(PointR3(xin, 3)), Y3=S.upsilon(PointR3(1 / xin, 6)))
    y = [S.y_of(q) for q in p.points]
    want = [inc.y, 1 / inc.y, 1 / inc.y, inc.y]
    if max(abs(a - b) for a, b in zip(y, want)) > 1e-8 * max(1.0, abs(inc.y)):
        raise TransformantError("pole sheets do not reproduce the incident wave numbers")
    return p


@dataclass(frozen=True)
class SParams:
    s: tuple
    Z: complex
    relation_residuals: tuple = field(default=())

    def __getitem__(self, k: int) -> complex:
        return self.s[k]


def s_params(poles: PoleSet, basis: Basis, s0: complex = 0j) -> tuple[SParams, dict]:
    """Closed-form parameters, checked against the eight linear relations."""
    S = basis.surface
    b = basis.bpoint.b
    eta = S.bp.eta21
    xin = poles.x1.affix
    xo = poles.x3.affix
    F1v = {k: basis.F1(p) for k, p in enumerate(poles.points, start=1)}
    F2v = {k: basis.F2(p) for k, p in enumerate(poles.points, start=1)}
    Y1, Y3 = poles.Y1, poles.Y3
    Z = 1j * basis.cube_norm / (12 * math.pi)
    s = [0j] * 12
    s[0] = s0
    s[1] = 1j * Y1 / (6 * math.pi)
    s[2] = 1j * Y3 / (6 * math.pi)
    s[3] = 0j
    s[4] = Z * Y1 / (xin - b) * (F2v[1] + F2v[2])
    s[6] = Z * (1 / (b - eta) + 1 / (xin - b)) * (F2v[1] - F2v[2])
    s[8] = Z * Y1 / (xin - b) * (F1v[1] + F1v[2])
    s[10] = Z * (1 / (b - eta) + 1 / (xin - b)) * (F1v[1] - F1v[2])
    s[5] = Z * Y3 / (xo - b) * (F2v[3] + F2v[4])
    s[7] = Z * (1 / (b - eta) + 1 / (xo - b)) * (F2v[3] - F2v[4])
    s[9] = Z * Y3 / (xo - b) * (F1v[3] + F1v[4])
    s[11] = Z * (1 / (b - eta) + 1 / (xo - b)) * (F1v[3] - F1v[4])

    rhs1 = 1j * Y1 / (6 * math.pi)
    rhs3 = 1j * Y3 / (6 * math.pi)
    be = b - eta
    rel = [
        (xin - eta) * s[4] * F1v[1] + be * s[6] * Y1 * F1v[1] - rhs1,
        (xin - eta) * s[4] * F1v[2] - be * s[6] * Y1 * F1v[2] - rhs1,
        (xin - eta) * s[8] * F2v[1] + be * s[10] * Y1 * F2v[1] - rhs1,
        (xin - eta) * s[8] * F2v[2] - be * s[10] * Y1 * F2v[2] - rhs1,
        (xo - eta) * s[5] * F1v[3] + be * s[7] * Y3 * F1v[3] - rhs3,
        (xo - eta) * s[5] * F1v[4] - be * s[7] * Y3 * F1v[4] - rhs3,
        (xo - eta) * s[9] * F2v[3] + be * s[11] * Y3 * F2v[3] - rhs3,
        (xo - eta) * s[9] * F2v[4] - be * s[11] * Y3 * F2v[4] - rhs3,
    ]
    scale = max(abs(rhs1), abs(rhs3))
    rel = tuple(complex(r) / scale for r in rel)
    if max(abs(r) for r in rel) > 1e-8:
        raise TransformantError("closed-form parameters violate the residue relations")
    return SParams(tuple(s), Z, rel), {"F1": F1v, "F2": F2v}


class Transformant:
    """Evaluator of ``A`` for one surface, basis and incident wave."""

    def __init__(self, basis: Basis, inc: IncidentWave, s0: complex = 0j):
        self.basis = basis
        self.surface = basis.surface
        self.inc = inc
        self.poles = pole_set(basis, inc)
        self.sparams, self.pole_F = s_params(self.poles, basis, s0)

    # -- rational coefficients -------------------------------------------------

    def q_parts(self, x):
        """``(q0', q0'', q1', q1'', q2', q2'')`` at affixes ``x``."""
        s = self.sparams.s
        b = self.basis.bpoint.b
        ub = self.basis.bpoint.ups
        eta = self.surface.bp.eta21
        xin = self.poles.x1.affix
        xo = self.poles.x3.affix
        x = np.asarray(x, dtype=complex)
        di, do, db = 1 / (x - xin), 1 / (x - xo), 1 / (x - b)
        q0a = s[1] * di + s[2] * do + s[0]
        q0b = s[3] * di - s[3] * do
        q1a = (x - eta) * (s[4] * di + s[5] * do - (s[6] + s[7]) * ub * db)
        q1b = (b - eta) * (s[6] * di + s[7] * do - (s[6] + s[7]) * db)
        q2a = (x - eta) * (s[8] * di + s[9] * do + (s[10] + s[11]) * ub * db)
        q2b = (b - eta) * (s[10] * di + s[11] * do - (s[10] + s[11]) * db)
        return q0a, q0b, q1a, q1b, q2a, q2b

    def q_coeffs(self, p: PointR):
        self._guard(p.affix)
        ups = self.surface.upsilon(p)
        q0a, q0b, q1a, q1b, q2a, q2b = self.q_parts(p.affix)
        return complex(q0a + q0b * ups), complex(q1a + q1b * ups), complex(q2a + q2b * ups)

    def _guard(self, x: complex):
        for z in (self.poles.x1.affix, self.poles.x3.affix, self.basis.bpoint.b):
            if abs(x - z) < POLE_GUARD * max(1.0, abs(z)):
                raise TransformantError("evaluation too close to a pole of the coefficients")

    # -- A ---------------------------------------------------------------------

    def values(self, x, ups, f1, f2):
        """``A`` from sampled affix, ``Upsilon``, ``F1`` and ``F2``."""
        q0a, q0b, q1a, q1b, q2a, q2b = self.q_parts(x)
        return (q0a + q0b * ups) + (q1a + q1b * ups) * f1 + (q2a + q2b * ups) * f2

    def A(self, p: PointR3) -> complex:
        self._guard(p.affix)
        ups = self.surface.upsilon(p)
        f1 = self.basis.F1(p)
        f2 = self.basis.product(p.affix) / f1
        return complex(self.values(p.affix, ups, f1, f2))

    def lambda_components(self, p: PointR3) -> tuple[complex, complex, complex]:
        a = [self.A(p), self.A(apply_lambda(p)), self.A(apply_lambda(apply_lambda(p)))]
        a0 = (a[0] + a[1] + a[2]) / 3
        a1 = (a[0] + a[1] / OMEGA + a[2] / OMEGA**2) / 3
        a2 = (a[0] + a[1] * OMEGA + a[2] * OMEGA**2) / 3
        return a0, a1, a2

    def symmetry_defect(self, p: PointR3) -> float:
        return abs(self.A(apply_pi(p)) - self.A(p))

    # -- residues ---------------------------------------------------------------

    def residue_radius(self, x: complex) -> float:
        S = self.surface
        inner, outer = S.cut_curves(4001)
        obstacles = [*S.bp.as_tuple(), self.basis.bpoint.b, self.poles.x1.affix, self.poles.x3.affix]
        # a point lying on a slit (real K) only has to avoid the other obstacles
        cuts = [float(np.min(np.abs(c - x))) for c in (inner, outer)]
        d = min([abs(x - z) for z in obstacles if abs(x - z) > 1e-14]
                + [c for c in cuts if c > 1e-9])
        return 1e-3 * d

    def loop_integral(self, center: PointR3, radius: float, nodes: int = 512) -> complex:
        """``integral of A dx / Upsilon`` over a small ccw circle on ``center``'s sheet."""
        th = 2 * math.pi * np.arange(nodes) / nodes
        x = center.affix + radius * np.exp(1j * th)
        w = 1j * radius * np.exp(1j * th) * (2 * math.pi / nodes)
        start = PointR3(complex(x[0]), center.sheet)
        c = self.surface.continue_along(x, PointR(x[0], center.level), weights=w, closed=True)
        lifted = self.basis.lift(c, start)
        vals = self.values(x, c.ups, lifted.extra["F1"], lifted.extra["F2"])
        return complex(np.sum(vals * w / c.ups))

    def residue_check(self, index: int, nodes: int = 512) -> complex:
        p = self.poles.points[index - 1]
        return self.loop_integral(p, self.residue_radius(p.affix), nodes)

    # -- snapshot -------------------------------------------------------------------

    def snapshot(self, periods) -> dict:
        bp = self.basis.bpoint
        out = {
            "K": self.surface.K,
            "T_alpha": periods.T_alpha,
            "T_beta": periods.T_beta,
            "b": bp.b,
            "sheet_b": bp.sheet,
            "ups_b": bp.ups,
            "Z": self.sparams.Z,
            "Y1": self.poles.Y1,
            "Y3": self.poles.Y3,
        }
        for k, v in enumerate(self.sparams.s):
            out[f"s{k}"] = v
        return out
