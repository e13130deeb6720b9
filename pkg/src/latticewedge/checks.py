"""Named invariant checks over the whole pipeline.

Each check returns a :class:`Check` with the measured value and the bound
it is held to.  Identities that degenerate for real ``K`` (poles on the
unit circle, slits touching at ``x = 1``) run at ``K + 0.01i``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import field as fld
from .basis import (OMEGA, Basis, algorithm1, algorithm2_candidates, make_bpoint, quartic_coeffs,
                    refine_b_newton, solve_b_ode, windings)
from .lattice import dispersion, incident_params
from .surface import PointR, PointR3, Surface, apply_lambda, apply_pi, apply_pi_prime
from .transformant import Transformant

ABSORPTION = 1e-2


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    bound: float
    passed: bool

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.value:.3e} (bound {self.bound:.1e})"


def _below(name: str, value: float, bound: float) -> Check:
    value = float(value)
    return Check(name, value, bound, bool(value < bound))


def _equal(name: str, got: int, want: int) -> Check:
    return Check(name, float(abs(got - want)), 0.5, got == want)


def sample_points(surface: Surface, count: int, seed: int = 7) -> list[complex]:
    """Random affixes in ``0.2 < |x| < 4`` away from the slits and branch points."""
    rng = np.random.default_rng(seed)
    out = []
    inner, outer = surface.cut_curves(2001)
    cuts = np.concatenate([inner, outer])
    while len(out) < count:
        x = complex(np.exp(rng.uniform(math.log(0.2), math.log(4.0))) * cmath.exp(2j * math.pi * rng.uniform()))
        if np.min(np.abs(cuts - x)) > 0.02:
            out.append(x)
    return out


# -- surface -------------------------------------------------------------------------


def surface_checks(S: Surface, nodes: int = 4096) -> list[Check]:
    bp = S.bp
    out = [
        _below("eta11*eta21 = 1", abs(bp.eta11 * bp.eta21 - 1), 1e-12),
        _below("eta12*eta22 = 1", abs(bp.eta12 * bp.eta22 - 1), 1e-12),
    ]
    ys = [S.y_from(e, 0j) for e in bp.as_tuple()]
    out.append(_below("y = +1 at eta11, eta21", max(abs(ys[0] - 1), abs(ys[2] - 1)), 1e-10))
    out.append(_below("y = -1 at eta12, eta22", max(abs(ys[1] + 1), abs(ys[3] + 1)), 1e-10))
    xs = sample_points(S, 50)
    out.append(_below("Upsilon changes sign between sheets",
                      max(abs(S.upsilon(PointR(x, 1)) + S.upsilon(PointR(x, 2))) for x in xs), 1e-14))
    out.append(_below("y(sheet 1) y(sheet 2) = 1",
                      max(abs(S.y_of(PointR(x, 1)) * S.y_of(PointR(x, 2)) - 1) for x in xs), 1e-12))
    out.append(_below("|y| <= 1 on sheet 1", max(abs(S.y_of(PointR(x, 1))) for x in xs) - 1, 1e-10))
    e = bp.eta21
    r = 0.5 * min(abs(e - z) for z in bp.as_tuple() if z != e)
    th = 2 * math.pi * np.arange(1025) / 1024
    loop = S.continue_along(e + r * np.exp(1j * th), PointR(e + r, 1))
    out.append(_equal("loop around eta21 swaps sheets", int(S.sheet_of(loop.affix[-1:], loop.ups[-1:])[0]), 2))
    P = S.periods(nodes)
    P2 = S.periods(2 * nodes)
    out.append(_below("T_beta stable under node doubling", abs(P2.T_beta - P.T_beta), 1e-8))
    out.append(Check("period lattice non-degenerate", abs((P.T_alpha / P.T_beta).imag), 1e-10, P.nondegenerate()))
    ring = 1.5 * max(abs(z) for z in bp.as_tuple())
    circle = S.continue_along(ring * np.exp(1j * 2 * math.pi * np.arange(nodes) / nodes), PointR(ring, 1),
                              weights=1j * ring * np.exp(1j * 2 * math.pi * np.arange(nodes) / nodes)
                              * 2 * math.pi / nodes, closed=True)
    out.append(_below("closed integral lies on the period lattice",
                      P.lattice_distance(S.abelian_integral(circle)), 1e-6))
    end = S.psi(P.T_beta, steps=400)
    out.append(_below("psi(T_beta) returns to eta21", abs(end.point.affix - bp.eta21), 1e-3))
    x0 = xs[0]
    u0 = S.upsilon(PointR(x0, 1))
    d1, d2 = S.upsilon_derivs(x0, u0)
    h = 1e-4
    up, um = S.upsilon(PointR(x0 + h, 1)), S.upsilon(PointR(x0 - h, 1))
    fd1, fd2 = (up - um) / (2 * h), (up - 2 * u0 + um) / h**2
    out.append(_below("Upsilon derivatives match finite differences",
                      max(abs(fd1 - d1) / abs(d1), abs(fd2 - d2) / abs(d2)), 1e-5))
    return out


# -- basis ---------------------------------------------------------------------------


def basis_checks(basis: Basis, nodes: int = 4096) -> list[Check]:
    S, bp = basis.surface, basis.bpoint
    coeffs = quartic_coeffs(S)
    out = [
        _below("quartic residual at b", abs(coeffs(bp.b)) / coeffs.scale(), 1e-12),
        _below("existence condition at b", abs(bp.existence_residual(S.bp.eta21)), 1e-10),
    ]
    P = S.periods(nodes)
    seed = solve_b_ode(S, P)
    newton = refine_b_newton(seed.b, coeffs)
    out.append(_below("Newton iterations from the ODE seed", newton.iterations, 8.5))
    chi = S.abel_map(bp.point)
    out.append(_below("Abel condition chi(b) = T_beta/3",
                      min(P.lattice_distance(chi - P.T_beta / 3), P.lattice_distance(-chi - P.T_beta / 3)), 1e-6))
    wa, wb = windings(S, bp, nodes)
    out.append(_equal("winding of G1 on sigma_alpha mod 3", wa % 3, 1))
    out.append(_equal("winding of G1 on sigma_beta mod 3", wb % 3, 0))
    cands = algorithm2_candidates(S, nodes)
    good = [c for c in cands if c.passes]
    out.append(_equal("candidates passing the winding tests", len(good), 1))
    if good:
        g = good[0].bpoint
        same = abs(g.b - bp.b) if g.sheet == bp.sheet else math.inf
        out.append(_below("algorithms 1 and 2 agree", same, 1e-12))
    rng = np.random.default_rng(11)
    pts = [PointR3(x, int(rng.integers(1, 7))) for x in sample_points(S, 100, seed=3)]
    cube = max(abs(basis.F1(p) ** 3 - basis.G1_at(p)) / abs(basis.G1_at(p)) for p in pts)
    out.append(_below("F1**3 = G1", cube, 1e-12))
    lam = max(abs(basis.F1(apply_lambda(p)) / basis.F1(p) - OMEGA) for p in pts[:30])
    out.append(_below("F1(Lambda x) = w F1(x)", lam, 1e-8))
    prod = max(abs(basis.F1(p) * basis.F2(p) / basis.product(p.affix) - 1) for p in pts[:30])
    out.append(_below("F1 F2 product identity", prod, 1e-10))
    return out


# -- transformant --------------------------------------------------------------------


def transformant_checks(trans: Transformant) -> list[Check]:
    S = trans.surface
    out = []
    want = [-1, 1, -1, 1]
    for j in range(1, 5):
        out.append(_below(f"residue at pole {j}", abs(trans.residue_check(j) - want[j - 1]), 1e-6))
    out.append(_below("linear relations of the s-parameters",
                      max(abs(r) for r in trans.sparams.relation_residuals), 1e-10))
    ys = [S.y_of(p) for p in trans.poles.points]
    yi = trans.inc.y
    out.append(_below("pole y values", max(abs(ys[0] - yi), abs(ys[3] - yi),
                                           abs(ys[1] - 1 / yi), abs(ys[2] - 1 / yi)), 1e-10))
    rng = np.random.default_rng(5)
    pts = [PointR3(x, int(rng.integers(1, 7))) for x in sample_points(S, 50, seed=9)]
    out.append(_below("A(Pi x) = A(x)", max(trans.symmetry_defect(p) for p in pts), 1e-9))
    big = [abs(trans.A(PointR3(1e6 + 0j, j))) for j in range(1, 7)]
    out.append(_below("A finite at affix 1e6 on all sheets", max(big), 1e6))
    eq = 0.0
    for p in pts[:20]:
        a0, a1, a2 = trans.lambda_components(p)
        b0, b1, b2 = trans.lambda_components(apply_lambda(p))
        eq = max(eq, abs(b0 - a0), abs(b1 - OMEGA * a1), abs(b2 - a2 / OMEGA))
    out.append(_below("Lambda components are equivariant", eq, 1e-9))
    return out


# -- field ---------------------------------------------------------------------------


def field_checks(trans: Transformant, extent: int = 10, nodes: int = 8192) -> list[Check]:
    res = fld.field_grid(trans, extent, nodes)
    d = res.diagnostics
    out = [
        _below("boundary values vanish", d["boundary_max"], fld.FIELD_TOL),
        _below("stencil residual", d["stencil_max"], fld.FIELD_TOL),
        _below("m <= 0 and n <= 0 forms agree on the overlap", d["overlap_max"], 2 * fld.FIELD_TOL),
    ]
    lams = fld.build_lambdas(trans, nodes, boundary_checks=True)
    inc = trans.inc
    lam3 = max(abs(fld.integrate_part(lams.lam3, m, n) - inc.value(m, n)) for m, n in ((-3, 2), (0, 0), (-1, -4)))
    out.append(_below("lambda3 reproduces the incident wave", lam3, fld.FIELD_TOL))
    bnd = max(abs(fld.integrate_part(lams.lam4, m, 0) + fld.integrate_part(lams.lam6, m, 0)) for m in range(0, 6))
    out.append(_below("lambda4 + lambda6 vanish on the boundary row", bnd, fld.FIELD_TOL))
    col = max(abs(fld.integrate_part(lams.lam7, 0, n) + fld.integrate_part(lams.lam8, 0, n)) for n in range(0, 6))
    out.append(_below("lambda7 + lambda8 vanish on the boundary column", col, fld.FIELD_TOL))
    gammas = fld.build_gamma(trans, max(1024, fld.TEST_NODES))
    p2, p3 = fld.gamma_pairs(extent)
    u2, u3 = fld.gamma_forms(trans, gammas, p2, p3)
    cons = max(abs(u2[mn] - u3[mn]) for mn in p2 if mn[1] <= 0)
    out.append(_below("u2 = u3 on the third quadrant", cons, 2 * fld.FIELD_TOL))
    tot = res.total
    gl = max(max(abs(u2[mn] - tot[mn]) for mn in p2), max(abs(u3[mn] - tot[mn]) for mn in p3))
    out.append(_below("Gamma and lambda representations agree", gl, 2 * fld.FIELD_TOL))
    return out


def run_all(K: complex, phi_in: float = math.pi / 4, nodes: int = 4096, extent: int = 10,
            algorithm: int = 1) -> list[Check]:
    """Every invariant at ``K``; transformant and field checks at ``K + 0.01i`` if ``K`` is real."""
    S = Surface(K)
    out = surface_checks(S, nodes)
    basis = Basis(S, algorithm1(S) if algorithm == 1 else _alg2(S, nodes))
    out += basis_checks(basis, nodes)
    Kc = K if K.imag > 0 else K + ABSORPTION * 1j
    if Kc != K:
        S = Surface(Kc)
        basis = Basis(S, algorithm1(S))
    trans = Transformant(basis, incident_params(Kc, phi_in))
    out.append(_below("incident wave satisfies the dispersion relation",
                      abs(dispersion(trans.inc.x, trans.inc.y, Kc)), 1e-12))
    out += transformant_checks(trans)
    out += field_checks(trans, extent, max(nodes, 8192))
    return out


def _alg2(S: Surface, nodes: int):
    from .basis import algorithm2

    return algorithm2(S, nodes)
