import math

import numpy as np
import pytest

from latticewedge.lattice import (LatticeError, LatticeField, WaveParams, check_wavenumber, dispersion,
                                  helmholtz_residual, incident_params, plane_wave, plane_wave_field,
                                  residual_grid)


def test_dispersion_vanishes_at_unit_factors_for_small_k():
    assert abs(dispersion(1, 1, 1e-9)) < 1e-15


def test_dispersion_rejects_zero_factor():
    with pytest.raises(LatticeError):
        dispersion(0, 1, 0.5)


def test_plane_wave_origin_and_arithmetic():
    p = WaveParams(0.5, 0.5)
    assert plane_wave(p, 0, 0) == 1
    assert plane_wave(p, 2, 1) == pytest.approx(0.125)


def test_lossy_incident_decays_along_m():
    inc = incident_params(0.5 + 0.1j, math.pi / 4)
    assert abs(inc.x) < 1
    assert abs(plane_wave(inc.params, 100, 0)) < abs(plane_wave(inc.params, 50, 0)) < 1


def test_incident_closed_form_value():
    inc = incident_params(0.5, math.pi / 4)
    assert abs(inc.x - (0.9375 + 0.3480j)) < 1e-4
    assert inc.x == inc.y


def test_incident_generic_path_matches_closed_form():
    a = incident_params(0.5, math.pi / 4)
    b = incident_params(0.5, math.pi / 4, generic=True)
    assert abs(a.x - b.x) < 1e-10 and abs(a.y - b.y) < 1e-10


@pytest.mark.parametrize("phi", [0.2, 0.6, 1.1, 1.4])
def test_incident_satisfies_dispersion(phi):
    K = 0.7 + 0.03j
    inc = incident_params(K, phi)
    assert abs(dispersion(inc.x, inc.y, K)) < 1e-12
    assert abs(inc.x) <= 1 and abs(inc.y) <= 1


@pytest.mark.parametrize("bad", [-0.5, 0.0, 0.5 - 0.1j])
def test_wavenumber_validation(bad):
    with pytest.raises(LatticeError):
        check_wavenumber(bad)


def test_incident_angle_validation():
    with pytest.raises(LatticeError):
        incident_params(0.5, 0.0)


def test_plane_wave_has_zero_stencil_residual():
    K = 0.5 + 0.1j
    inc = incident_params(K, 0.9)
    f = plane_wave_field(inc.params, 8)
    f.values[:] = np.outer(inc.y ** np.arange(-8, 9), inc.x ** np.arange(-8, 9))
    assert abs(helmholtz_residual(f, -2, 3, K)) < 1e-12
    assert abs(helmholtz_residual(f, 0, 0, K)) < 1e-12


def test_zero_field_residual():
    f = LatticeField.zeros(5)
    assert helmholtz_residual(f, -1, -1, 0.5) == 0
    assert np.all(residual_grid(f, 0.5) == 0)


def test_field_masks():
    f = LatticeField.zeros(3)
    assert not f.mask()[3 + 1, 3 + 1]
    assert f.boundary_mask()[3, 3 + 2] and f.boundary_mask()[3 + 2, 3]
    assert f.interior_mask().sum() > 0
    assert not (f.interior_mask() & f.boundary_mask()).any()


def test_field_indexing_and_restrict():
    f = LatticeField.zeros(4)
    f[-2, 1] = 3 + 1j
    assert f[-2, 1] == 3 + 1j
    assert f.restrict(2)[-2, 1] == 3 + 1j
    with pytest.raises(IndexError):
        f[5, 0]
