import math

import numpy as np
import pytest

from latticewedge.lattice import dispersion
from latticewedge.surface import (CoverGluing, PointR, PointR3, Surface, SurfaceError, apply_lambda, apply_pi,
                                  apply_pi_prime, branch_points, project_10, project_31)

T_BETA_PRINTED = -1.6219 + 2.4884j


def test_branch_point_values_at_half():
    bp = branch_points(0.5)
    assert abs(bp.eta11 - (0.875 - 0.48412j)) < 1e-5
    assert abs(bp.eta21 - (0.875 + 0.48412j)) < 1e-5
    assert abs(bp.eta22 - 0.17952) < 1e-5
    assert abs(bp.eta12 - 5.57048) < 1e-5
    assert abs(bp.eta12 * bp.eta22 - 1) < 1e-12


@pytest.mark.parametrize("K", [0.3, 0.8 + 0.2j, 1.7])
def test_branch_points_pair_up(K):
    bp = branch_points(K)
    assert abs(bp.eta11 * bp.eta21 - 1) < 1e-12
    for e, y in ((bp.eta11, 1), (bp.eta21, 1), (bp.eta12, -1), (bp.eta22, -1)):
        assert abs(dispersion(e, y, K)) < 1e-12


def test_upsilon_vanishes_at_branch_point(surface):
    e = surface.bp.eta21
    assert abs(surface.upsilon(PointR(e, 1))) < 1e-7
    assert abs(surface.upsilon(PointR(e, 2))) < 1e-7


def test_upsilon_at_one():
    assert abs(Surface(0.5).upsilon(PointR(1, 1)) - 0.9682j) < 1e-4
    assert abs(Surface(0.5 + 0.1j).upsilon(PointR(1, 1)) - (-0.1810 + 0.9722j)) < 1e-4


def test_y_values(surface):
    S = Surface(0.5 + 0.1j)
    y = S.y_of(PointR(1, 1))
    assert abs(y - (0.7895 + 0.4361j)) < 1e-4 and abs(y) < 1
    for e in (surface.bp.eta12, surface.bp.eta22):
        assert abs(surface.y_from(e, 0j) + 1) < 1e-10
    assert abs(surface.y_of(PointR(1e8, 1))) < 1e-6


def test_y_solves_dispersion(surface):
    for x in (0.3 + 2j, -1.5 + 0.2j, 3 - 3j):
        for sheet in (1, 2):
            y = surface.y_of(PointR(x, sheet))
            assert abs(dispersion(x, y, surface.K)) < 1e-12
    assert abs(surface.y_of(PointR(2j, 1))) < 1


def test_on_cut(surface):
    assert surface.on_cut(1)
    assert not surface.on_cut(2j)
    assert surface.on_cut(surface.bp.eta21)


def test_projections():
    x = 0.4 + 0.7j
    assert project_31(PointR3(x, 3)) == PointR(x, 1)
    assert project_31(PointR3(x, 4)) == PointR(x, 2)
    assert project_10(PointR(x, 2)) == x


def test_sheet_validation():
    with pytest.raises(SurfaceError):
        PointR(1j, 3)
    with pytest.raises(SurfaceError):
        PointR3(1j, 7)


def test_desk_maps():
    x = 0.4 + 0.7j
    assert apply_lambda(PointR3(x, 5)) == PointR3(x, 1)
    assert apply_pi(PointR3(x, 3)) == PointR3(x, 4)
    assert apply_pi(PointR(x, 1)) == PointR(x, 2)
    for j in range(1, 7):
        p = PointR3(x, j)
        assert apply_lambda(apply_lambda(apply_lambda(p))) == p
        assert apply_pi(apply_pi(p)) == p


def test_pi_prime_fixes_label_two_and_y(surface):
    g = CoverGluing(inner=1, outer=0)
    assert apply_pi_prime(PointR3(1.01 + 0.01j, 2), g).sheet == 2
    for j in range(1, 7):
        p = PointR3(0.3 + 1.9j, j)
        q = apply_pi_prime(p, g)
        assert abs(surface.y_of(q) - surface.y_of(p)) < 1e-12
        back = apply_pi_prime(q, g)
        assert back.sheet == p.sheet and abs(back.affix - p.affix) < 1e-15


def test_upsilon_symmetries(surface):
    x = -0.6 + 1.3j
    for j in range(1, 7):
        p = PointR3(x, j)
        assert surface.upsilon(apply_lambda(p)) == surface.upsilon(p)
        assert surface.upsilon(apply_pi(p)) == -surface.upsilon(p)


def _circle(c, r, n=2049):
    return c + r * np.exp(2j * math.pi * np.arange(n) / (n - 1))


def test_continuation_without_branch_point(surface):
    x0 = 2.5 + 2.5j
    c = surface.continue_along(_circle(x0 - 0.3, 0.3), PointR(x0, 1))
    assert c.sheet[-1] == 1 and abs(c.ups[-1] - c.ups[0]) < 1e-12


def test_continuation_around_branch_point(surface):
    e = surface.bp.eta21
    c = surface.continue_along(_circle(e, 0.1), PointR(e + 0.1, 1))
    assert c.sheet[-1] == 2
    assert abs(c.ups[-1] + c.ups[0]) < 1e-10


def test_continuation_around_infinity(surface):
    c = surface.continue_along(_circle(0, 20), PointR(20, 1))
    assert c.sheet[-1] == 1


def test_reversed_path_returns(surface):
    path = surface.densify([2j, 1.2 + 1.2j, 3], 0.01)
    c = surface.continue_along(path, PointR(2j, 1))
    back = surface.continue_along(path[::-1], PointR(path[-1], int(c.sheet[-1])))
    assert abs(back.ups[-1] - c.ups[0]) < 1e-14


def test_abelian_integral_of_point_and_backtrack(surface):
    one = surface.continue_along(np.array([2j]), PointR(2j, 1))
    assert surface.abelian_integral(one) == 0
    path = surface.densify([2j, 1.5 + 1j], 0.01)
    c = surface.continue_along(path, PointR(2j, 1))
    assert abs(surface.abelian_integral(c) + surface.abelian_integral(c.reversed())) < 1e-12


def test_periods_at_half(surface, periods):
    assert abs(periods.T_beta - T_BETA_PRINTED) < 1e-3
    assert abs(surface.periods(8192).T_beta - periods.T_beta) < 1e-8
    assert periods.nondegenerate()


def test_psi_start_and_b_seed(surface, periods):
    assert surface.psi(0j).point.affix == surface.bp.eta21
    end = surface.psi(periods.T_beta, steps=400)
    assert abs(end.point.affix - surface.bp.eta21) < 1e-3
    third = surface.psi(periods.T_beta / 3, steps=100, method="euler")
    assert abs(third.point.affix - (0.2917 + 0.1858j)) < 1e-2
    assert third.point.sheet == 2


def test_torus_coordinates(surface, periods):
    tc = surface.torus_coords(0j, periods)
    assert (tc.alpha, tc.beta) == (0.0, 0.0)
    tc = surface.torus_coords(periods.T_beta, periods)
    assert (tc.alpha, tc.beta) == (0.0, 0.0)
    tc = surface.torus_coords(periods.T_alpha / 2, periods)
    assert abs(tc.alpha - math.pi) < 1e-9 and tc.beta < 1e-9
