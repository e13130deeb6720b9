import math

import numpy as np
import pytest

from latticewedge.basis import (OMEGA, BasisError, algorithm1, algorithm2, g_functions, hodograph_csv, m_branch,
                                m_double, m_double_at_b, m_simple, make_bpoint, quartic_coeffs,
                                refine_b_newton, solve_b_ode, winding_number, windings)
from latticewedge.surface import PointR, PointR3, Surface, apply_lambda, apply_pi

B_PRINTED = 0.295390040273516 + 0.186354378894278j


def test_quartic_residual_at_printed_b(surface):
    c = quartic_coeffs(surface)
    assert abs(c(B_PRINTED)) / c.scale() < 1e-10


def test_euler_seed_and_newton(surface, periods):
    seed = solve_b_ode(surface, periods, steps=100, method="euler")
    assert abs(seed.b - (0.2917 + 0.1858j)) < 1e-2
    assert abs(seed.ups - (-0.2437 + 0.7958j)) < 1e-2
    assert seed.sheet == 2
    res = refine_b_newton(seed.b, quartic_coeffs(surface))
    assert abs(res.b - B_PRINTED) < 1e-12
    assert res.iterations <= 8


def test_rk4_seed_is_accurate(surface, periods):
    seed = solve_b_ode(surface, periods, steps=1000, method="rk4")
    assert abs(seed.b - B_PRINTED) < 1e-6


def test_newton_fixed_point_and_basin(surface):
    c = quartic_coeffs(surface)
    exact = refine_b_newton(B_PRINTED, c)
    assert exact.iterations == 1 and abs(exact.b - B_PRINTED) < 1e-13
    assert abs(refine_b_newton(B_PRINTED + 1e-3, c).b - exact.b) < 1e-13


def test_abel_condition_of_seed(surface, periods):
    seed = solve_b_ode(surface, periods, steps=1000, method="rk4")
    chi = surface.abel_map(PointR(seed.b, seed.sheet))
    assert periods.lattice_distance(chi - periods.T_beta / 3) < 1e-5


def test_algorithms_agree_at_half(surface, basis):
    other = algorithm2(surface)
    assert abs(other.b - basis.bpoint.b) < 1e-12
    assert other.sheet == basis.bpoint.sheet == 2


def test_b_approaches_one_as_k_shrinks():
    dist = [abs(algorithm1(Surface(K)).b - 1) for K in (0.1, 0.05, 0.02)]
    assert dist[0] > dist[1] > dist[2]


def test_winding_number_of_linear_map():
    th = 2 * math.pi * np.arange(512) / 512
    loop = 1 + 0.5 * np.exp(1j * th)
    assert winding_number(loop - 1.2) == 1
    assert winding_number(loop - 3) == 0


def test_winding_number_rejects_zero_on_contour():
    with pytest.raises(BasisError):
        winding_number(np.array([1, 0, -1, 1j]))


def test_windings_at_half(surface, basis):
    wa, wb = windings(surface, basis.bpoint)
    assert wb == 0
    assert wa % 3 == 1


def test_m_simple_zero_and_generic_residual(surface):
    pts = [PointR(0.3 + 1.1j, 1), PointR(-1.2 + 0.4j, 2), PointR(2.1 - 0.7j, 1), PointR(-0.4 - 1.6j, 2)]
    M = m_simple(surface, *pts)
    a1 = pts[2]
    assert abs(M(a1.affix, surface.upsilon(a1))) < 1e-12
    assert abs(M.residual) > 1e-3


def test_m_simple_has_no_pole_at_mirror(surface):
    b1, b2 = PointR(0.3 + 1.1j, 1), PointR(-1.2 + 0.4j, 2)
    M = m_simple(surface, b1, b2, PointR(2.1 - 0.7j, 1), PointR(-0.4 - 1.6j, 2))
    r = 1e-3
    th = 2 * math.pi * np.arange(256) / 256
    x = b1.affix + r * np.exp(1j * th)
    mirror = apply_pi(b1)
    u = surface.continue_along(np.append(x, x[0]), PointR(x[0], mirror.sheet)).ups[:-1]
    res = np.sum(M(x, u) * 1j * r * np.exp(1j * th)) * 2 * math.pi / 256
    assert abs(res) < 1e-10


def test_m_double_zero(surface):
    b, a1, a2 = PointR(0.5 + 1.5j, 1), PointR(-1 + 0.5j, 2), PointR(2 - 1j, 1)
    M = m_double(surface, b, a1, a2)
    assert abs(M(a1.affix, surface.upsilon(a1))) < 1e-12
    mirror = apply_pi(b)
    near = [abs(M(b.affix + r, surface.upsilon(PointR(b.affix + r, mirror.sheet)))) for r in (1e-2, 1e-3, 1e-4)]
    assert max(near) < 10 * min(near) + 10


def test_m_branch_is_sheet_independent(surface):
    M = m_branch(surface.bp.eta21, 0.2 + 0.1j)
    assert M(0.2 + 0.1j, 0) == 0
    x = 1.3 - 0.4j
    assert M(x, surface.upsilon(PointR(x, 1))) == M(x, surface.upsilon(PointR(x, 2)))


def test_m_double_at_b_zeros(surface, basis):
    bp = basis.bpoint
    M = m_double_at_b(bp)
    assert abs(M(surface.bp.eta21, 0j)) < 1e-10
    # simple zero at the mirror of b: linear decay towards it
    near = [abs(M(bp.b + r, surface.upsilon(PointR(bp.b + r, 3 - bp.sheet)))) for r in (1e-2, 1e-3)]
    assert 0.05 < near[1] / near[0] < 0.2
    lim = [abs((r ** 2) * M(bp.b + r, surface.upsilon(PointR(bp.b + r, bp.sheet)))) for r in (1e-3, 1e-4)]
    assert lim[1] > 0 and abs(lim[0] - lim[1]) / lim[1] < 1e-2


def test_g1_triple_zero_at_b(surface, basis):
    g1, _ = g_functions(surface, basis.bpoint)
    bp = basis.bpoint
    vals = [abs(g1(bp.b + r, surface.upsilon(PointR(bp.b + r, bp.sheet)))) for r in (1e-2, 1e-3)]
    assert 500 < vals[0] / vals[1] < 2000


def test_cube_and_lambda_and_product(surface, basis):
    rng = np.random.default_rng(0)
    for x in (0.6 + 1.4j, -1.7 + 0.3j, 2.4 - 1.9j):
        p = PointR3(x, int(rng.integers(1, 7)))
        f = basis.F1(p)
        assert abs(f ** 3 - basis.G1_at(p)) < 1e-12 * abs(f) ** 3
        assert abs(basis.F1(apply_lambda(p)) - OMEGA * f) < 1e-8 * abs(f)
        assert basis.F1(apply_pi(p)) == basis.F2(p)
        assert abs(f * basis.F2(p) / basis.product(x) - 1) < 1e-10


def test_hodograph_csv(surface, basis):
    g1, _ = g_functions(surface, basis.bpoint)
    c = surface.sigma_beta(256)
    text = hodograph_csv(g1(c.affix, c.ups))
    lines = text.strip().splitlines()
    assert len(lines) == 257 and lines[0].count(",") == 2


def test_newton_gives_up_after_too_few_steps(surface):
    with pytest.raises(BasisError):
        refine_b_newton(0.1 + 0.1j, quartic_coeffs(surface), max_iter=1)


def test_only_windings_pick_the_sheet(surface, basis):
    # the existence condition is odd in Upsilon, so both sheets satisfy it
    bp = basis.bpoint
    other = make_bpoint(surface, bp.b, 3 - bp.sheet)
    assert abs(other.existence_residual(surface.bp.eta21)) < 1e-10
    wa, wb = windings(surface, other)
    assert not (wb % 3 == 0 and wa % 3 == 1)
