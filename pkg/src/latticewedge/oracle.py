"""Brute-force reference: the wedge problem on a truncated lattice.

The scattered field solves the homogeneous five-point equation on every
domain node, equals ``-u_in`` on the Dirichlet rays, and is set to zero
on the square rim ``max(|m|, |n|) = N``.  With ``Im K > 0`` the true
scattered field decays exponentially, so the rim only perturbs it by an
amount that shrinks geometrically with ``N``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .lattice import IncidentWave, LatticeField, check_wavenumber, plane_wave_field

IM_K_MIN = 1e-2
MIN_TRUNCATION = 20
RESIDUAL_TOL = 1e-10


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True)
class TruncatedProblem:
    K: complex
    inc: IncidentWave
    N: int

    def __post_init__(self):
        K = check_wavenumber(self.K)
        if K.imag < IM_K_MIN:
            raise OracleError(f"the truncated solve needs Im K >= {IM_K_MIN}, got {K.imag}")
        if self.N < MIN_TRUNCATION:
            raise OracleError(f"truncation N must be at least {MIN_TRUNCATION}")

    def unknown_mask(self) -> np.ndarray:
        """Domain nodes off the Dirichlet rays and strictly inside the rim."""
        f = LatticeField.zeros(self.N)
        return f.mask() & ~f.boundary_mask() & f.interior_mask()


@dataclass
class OracleResult:
    scattered: LatticeField
    residual: float
    seconds: float

    @property
    def unknowns(self) -> int:
        return int(np.count_nonzero(self.scattered.values))


def _assemble(prob: TruncatedProblem, rhs_field: np.ndarray):
    """Matrix over the unknown nodes and the right-hand side from known values."""
    free = prob.unknown_mask()
    index = -np.ones(free.shape, dtype=np.int64)
    index[free] = np.arange(np.count_nonzero(free))
    rows, cols = np.nonzero(free)
    size = len(rows)
    diag = prob.K * prob.K - 4
    I, J, V = [np.arange(size)], [np.arange(size)], [np.full(size, diag, dtype=complex)]
    b = np.zeros(size, dtype=complex)
    for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nr, nc = rows + dr, cols + dc
        nb = index[nr, nc]
        inside = nb >= 0
        I.append(np.flatnonzero(inside))
        J.append(nb[inside])
        V.append(np.ones(np.count_nonzero(inside), dtype=complex))
        # known neighbours (Dirichlet rays, rim) move to the right-hand side
        b[~inside] -= rhs_field[nr[~inside], nc[~inside]]
    A = sp.csr_matrix((np.concatenate(V), (np.concatenate(I), np.concatenate(J))), shape=(size, size))
    return A, b, free


def direct_solve(prob: TruncatedProblem) -> OracleResult:
    """Scattered field on the truncated wedge domain by a sparse LU solve."""
    t0 = time.perf_counter()
    N = prob.N
    known = LatticeField.zeros(N)
    bmask = known.boundary_mask()
    known.values[bmask] = -plane_wave_field(prob.inc.params, N).values[bmask]
    A, b, free = _assemble(prob, known.values)
    try:
        sol = spla.spsolve(A.tocsc(), b)
    except RuntimeError as exc:
        raise OracleError(f"sparse solve failed: {exc}") from exc
    if not np.all(np.isfinite(sol)):
        raise OracleError("sparse solve returned non-finite values")
    res = float(np.max(np.abs(A @ sol - b))) if len(b) else 0.0
    if res > RESIDUAL_TOL:
        raise OracleError(f"linear-system residual {res:.2e} exceeds {RESIDUAL_TOL:.0e}")
    out = known
    out.values[free] = sol
    return OracleResult(out, res, time.perf_counter() - t0)


def compare(analytic, reference: LatticeField, margin: int) -> float:
    """Max-norm relative discrepancy of the scattered fields.

    The comparison runs over ``max(|m|, |n|) <= reference.extent - margin``
    intersected with the analytic grid; the error is scaled by the largest
    reference value there.
    """
    e = min(reference.extent - margin, analytic.scattered.extent)
    if e < 1:
        raise OracleError("empty comparison region")
    a = analytic.scattered.restrict(e)
    r = reference.restrict(e)
    mask = a.mask()
    scale = float(np.max(np.abs(r.values[mask])))
    if scale == 0:
        return float(np.max(np.abs(a.values[mask])))
    return float(np.max(np.abs(a.values[mask] - r.values[mask]))) / scale
