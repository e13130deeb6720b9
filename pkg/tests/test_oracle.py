import dataclasses
import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from latticewedge import oracle
from latticewedge.basis import Basis, algorithm1
from latticewedge.field import field_grid
from latticewedge.lattice import LatticeField, incident_params, plane_wave_field, residual_grid
from latticewedge.surface import Surface
from latticewedge.transformant import Transformant

K = 0.5 + 0.05j


@pytest.fixture(scope="module")
def inc():
    return incident_params(K, math.pi / 4)


@pytest.fixture(scope="module")
def lossy_trans(inc):
    S = Surface(K)
    return Transformant(Basis(S, algorithm1(S)), inc)


def test_zero_data_gives_zero_field(inc):
    prob = oracle.TruncatedProblem(K, inc, 24)
    size = 2 * 24 + 1
    A, b, _ = oracle._assemble(prob, np.zeros((size, size), dtype=complex))
    assert not b.any()
    assert not spla.spsolve(A.tocsc(), b).any()


def test_solution_obeys_stencil_and_boundary(inc):
    res = oracle.direct_solve(oracle.TruncatedProblem(K, inc, 40))
    total = res.scattered + plane_wave_field(inc.params, 40)
    assert np.max(np.abs(total.values[total.boundary_mask()])) == 0
    assert np.max(np.abs(residual_grid(total, K))) < 1e-10
    assert res.residual < oracle.RESIDUAL_TOL


def test_truncation_converges(inc):
    fields = [oracle.direct_solve(oracle.TruncatedProblem(K, inc, N)).scattered.restrict(10) for N in (40, 80, 160)]
    d1 = np.max(np.abs((fields[1] - fields[0]).values))
    d2 = np.max(np.abs((fields[2] - fields[1]).values))
    assert d2 < 0.1 * d1


@pytest.mark.parametrize("k,n", [(0.5 + 0.001j, 40), (0.5, 40), (K, 10)])
def test_problem_validation(inc, k, n):
    with pytest.raises(oracle.OracleError):
        oracle.TruncatedProblem(k, inc, n)


def test_compare_with_itself_and_empty_region(inc):
    res = oracle.direct_solve(oracle.TruncatedProblem(K, inc, 30))
    wrapped = type("R", (), {"scattered": res.scattered})()
    assert oracle.compare(wrapped, res.scattered, 5) == 0
    with pytest.raises(oracle.OracleError):
        oracle.compare(wrapped, res.scattered, 30)


def _corrupt(trans, inc):
    bad = Transformant(trans.basis, inc)
    s = list(bad.sparams.s)
    s[4] *= 1.01
    bad.sparams = dataclasses.replace(bad.sparams, s=tuple(s))
    return bad


def test_corrupted_parameter_is_detected(lossy_trans, inc):
    good_field = field_grid(lossy_trans, 90, 8192)
    bad_field = field_grid(_corrupt(lossy_trans, inc), 90, 8192)
    # at the headline size the corrupted field fails the 1e-3 threshold
    ref = oracle.direct_solve(oracle.TruncatedProblem(K, inc, 120)).scattered
    assert oracle.compare(good_field, ref, 30) < 1e-3 < oracle.compare(bad_field, ref, 30)
    # against a reference whose own truncation error is negligible the gap is large
    ref = oracle.direct_solve(oracle.TruncatedProblem(K, inc, 240)).scattered
    good, bad = oracle.compare(good_field, ref, 150), oracle.compare(bad_field, ref, 150)
    assert bad > 10 * good
