"""Square-lattice Helmholtz primitives.

The discrete Helmholtz operator on the integer lattice is

    u(m, n-1) + u(m, n+1) + u(m-1, n) + u(m+1, n) + (K^2 - 4) u(m, n),

and a plane wave ``x**m * y**n`` solves it when the dispersion function
``x + 1/x + y + 1/y + K^2 - 4`` vanishes.  The scattering domain is the
complement of the closed first quadrant: nodes with ``m < 0`` or ``n < 0``,
plus the two Dirichlet rays ``m = 0, n >= 0`` and ``n = 0, m >= 0``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

DISPERSION_TOL = 1e-12
ANGLE_TOL = 1e-12

# Tiny absorption used to resolve real-K limits (Im K -> +0).
LIMIT_EPS = 1e-9


class LatticeError(ValueError):
    """Raised for invalid lattice inputs."""


def check_wavenumber(K: complex) -> complex:
    K = complex(K)
    if not K.real > 0:
        raise LatticeError(f"Re K must be positive, got {K}")
    if K.imag < 0:
        raise LatticeError(f"Im K must be non-negative, got {K}")
    return K


def dispersion(x: complex, y: complex, K: complex) -> complex:
    """Dispersion function; zero for admissible plane waves."""
    if x == 0 or y == 0 or cmath.isinf(x) or cmath.isinf(y):
        raise LatticeError("dispersion is undefined at x or y equal to 0 or infinity")
    return x + 1 / x + y + 1 / y + K * K - 4


def int_power(z: complex, p: int) -> complex:
    """``z**p`` for integer ``p`` by binary exponentiation."""
    if p < 0:
        z = 1 / z
        p = -p
    result = 1 + 0j
    base = complex(z)
    while p:
        if p & 1:
            result *= base
        base *= base
        p >>= 1
    if cmath.isinf(result) or cmath.isnan(result):
        raise OverflowError("plane wave magnitude exceeds double range")
    return result


@dataclass(frozen=True)
class WaveParams:
    """Per-step phase factors of a plane wave ``x**m * y**n``."""

    x: complex
    y: complex


def plane_wave(params: WaveParams, m: int, n: int) -> complex:
    return int_power(params.x, m) * int_power(params.y, n)


def power_table(z: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """Rows ``z**e`` for each integer ``e`` in a contiguous range.

    Built by repeated multiplication outward from ``e = 0`` so that each row
    is exactly ``z`` (or ``1/z``) times its neighbour.
    """
    exponents = np.asarray(exponents)
    lo, hi = int(exponents.min()), int(exponents.max())
    z = np.asarray(z, dtype=complex)
    rows = {0: np.ones_like(z)}
    for e in range(1, max(hi, 0) + 1):
        rows[e] = rows[e - 1] * z
    if lo < 0:
        inv = 1 / z
        for e in range(-1, lo - 1, -1):
            rows[e] = rows[e + 1] * inv
    return np.stack([rows[int(e)] for e in exponents])


@dataclass(frozen=True)
class IncidentWave:
    params: WaveParams
    phi_in: float
    K: complex

    @property
    def x(self) -> complex:
        return self.params.x

    @property
    def y(self) -> complex:
        return self.params.y

    def value(self, m: int, n: int) -> complex:
        return plane_wave(self.params, m, n)


def propagation_angle(x: complex, y: complex) -> complex:
    """Complex angle ``arctan((y - 1/y) / (x - 1/x))``."""
    return complex(np.arctan((y - 1 / y) / (x - 1 / x)))


def _small_root(w: complex) -> complex:
    """Root of ``z**2 - w z + 1`` with the smaller modulus."""
    r = cmath.sqrt(w * w - 4)
    q = (w + r) / 2 if abs(w + r) >= abs(w - r) else (w - r) / 2
    return 1 / q


def _incident_candidates(K: complex, t: float) -> list[tuple[complex, complex]]:
    # With X = x + 1/x and Y = 4 - K^2 - X the angle relation squares to
    # (1 - t^2) X^2 - 2 c X + c^2 - 4 + 4 t^2 = 0, c = 4 - K^2.
    c = 4 - K * K
    a2, a1, a0 = 1 - t * t, -2 * c, c * c - 4 + 4 * t * t
    if abs(a2) < 1e-14:
        roots = [-a0 / a1]
    else:
        disc = cmath.sqrt(a1 * a1 - 4 * a2 * a0)
        roots = [(-a1 + disc) / (2 * a2), (-a1 - disc) / (2 * a2)]
    out = []
    for X in roots:
        x = _small_root(X)
        y = _small_root(c - X)
        out.append((x, y))
    return out


def _angle_mismatch(x: complex, y: complex, t: float) -> float:
    return abs((y - 1 / y) - t * (x - 1 / x))


def incident_params(K: complex, phi_in: float, generic: bool = False) -> IncidentWave:
    """Incident wave factors on the physical sheet for angle ``phi_in``.

    The closed form is used at ``phi_in = pi/4`` unless ``generic`` is set.
    Otherwise the angle relation is squared into a quadratic for
    ``x + 1/x``, the decaying branches are taken, and a 2x2 Newton polish
    removes rounding.  Real K is resolved as the limit ``Im K -> +0``.
    """
    K = check_wavenumber(K)
    if not 0 < phi_in < math.pi / 2:
        raise LatticeError("phi_in must lie strictly between 0 and pi/2")
    if not generic and abs(phi_in - math.pi / 4) < 1e-15:
        k2 = K * K
        x = (4 - k2 + 1j * K * cmath.sqrt(8 - k2)) / 4
        if abs(x) > 1 + 1e-12:
            x = (4 - k2 - 1j * K * cmath.sqrt(8 - k2)) / 4
        return IncidentWave(WaveParams(x, x), phi_in, K)

    t = math.tan(phi_in)
    K_sel = K if K.imag > 0 else K + 1j * LIMIT_EPS
    picks = [(x, y) for x, y in _incident_candidates(K_sel, t)]
    # at real K both roots sit on the unit circle, so the choice made just
    # above the axis is kept and Newton moves it onto the axis
    x, y = min(picks, key=lambda p: _angle_mismatch(p[0], p[1], t))
    k2 = K * K
    for _ in range(30):
        f1 = x + 1 / x + y + 1 / y + k2 - 4
        f2 = (y - 1 / y) - t * (x - 1 / x)
        j11, j12 = 1 - 1 / x**2, 1 - 1 / y**2
        j21, j22 = -t * (1 + 1 / x**2), 1 + 1 / y**2
        det = j11 * j22 - j12 * j21
        dx = (f1 * j22 - f2 * j12) / det
        dy = (j11 * f2 - j21 * f1) / det
        x, y = x - dx, y - dy
        if abs(dx) + abs(dy) < 1e-16:
            break
    if abs(dispersion(x, y, K)) > DISPERSION_TOL or _angle_mismatch(x, y, t) > ANGLE_TOL * max(1.0, t):
        raise LatticeError(f"incident wave solve failed for K={K}, phi_in={phi_in}")
    if max(abs(x), abs(y)) > 1 + 1e-12:
        # the pole of the transformant must sit on the |y| <= 1 level
        raise LatticeError(f"no incident wave with |x|, |y| <= 1 and real angle {phi_in} at K={K}")
    return IncidentWave(WaveParams(x, y), phi_in, K)


@dataclass
class LatticeField:
    """Dense grid over ``-extent <= m, n <= extent`` with the wedge mask.

    ``values[i, j]`` holds ``u(m, n)`` with ``n = i - extent`` and
    ``m = j - extent``.  Nodes with ``m > 0`` and ``n > 0`` lie inside the
    obstacle and are stored as zero.
    """

    extent: int
    values: np.ndarray

    @classmethod
    def zeros(cls, extent: int) -> "LatticeField":
        size = 2 * extent + 1
        return cls(extent, np.zeros((size, size), dtype=complex))

    @property
    def coords(self) -> np.ndarray:
        return np.arange(-self.extent, self.extent + 1)

    def mask(self) -> np.ndarray:
        """True on stored domain nodes (interior plus Dirichlet rays)."""
        m = self.coords[None, :]
        n = self.coords[:, None]
        return (m <= 0) | (n <= 0)

    def boundary_mask(self) -> np.ndarray:
        m = self.coords[None, :]
        n = self.coords[:, None]
        return ((m == 0) & (n >= 0)) | ((n == 0) & (m >= 0))

    def interior_mask(self) -> np.ndarray:
        """Domain nodes whose whole stencil lies in the stored grid."""
        m = self.coords[None, :]
        n = self.coords[:, None]
        inside = (m < 0) | (n < 0)
        rim = (np.abs(m) < self.extent) & (np.abs(n) < self.extent)
        return inside & rim

    def __getitem__(self, mn: tuple[int, int]) -> complex:
        m, n = mn
        if max(abs(m), abs(n)) > self.extent:
            raise IndexError(f"node ({m}, {n}) outside extent {self.extent}")
        return complex(self.values[n + self.extent, m + self.extent])

    def __setitem__(self, mn: tuple[int, int], value: complex) -> None:
        m, n = mn
        self.values[n + self.extent, m + self.extent] = value

    def __sub__(self, other: "LatticeField") -> "LatticeField":
        return LatticeField(self.extent, self.values - other.values)

    def __add__(self, other: "LatticeField") -> "LatticeField":
        return LatticeField(self.extent, self.values + other.values)

    def restrict(self, extent: int) -> "LatticeField":
        if extent > self.extent:
            raise IndexError("cannot restrict to a larger extent")
        d = self.extent - extent
        return LatticeField(extent, self.values[d:self.values.shape[0] - d, d:self.values.shape[1] - d].copy())


def helmholtz_residual(field: LatticeField, m: int, n: int, K: complex) -> complex:
    e = field.extent
    if max(abs(m), abs(n)) >= e:
        raise IndexError(f"stencil at ({m}, {n}) leaves extent {e}")
    return (field[m, n - 1] + field[m, n + 1] + field[m - 1, n] + field[m + 1, n]
            + (K * K - 4) * field[m, n])


def residual_grid(field: LatticeField, K: complex) -> np.ndarray:
    """Stencil residual on all interior nodes (zero elsewhere)."""
    v = field.values
    r = np.zeros_like(v)
    r[1:-1, 1:-1] = (v[:-2, 1:-1] + v[2:, 1:-1] + v[1:-1, :-2] + v[1:-1, 2:]
                     + (K * K - 4) * v[1:-1, 1:-1])
    return np.where(field.interior_mask(), r, 0)


def plane_wave_field(params: WaveParams, extent: int) -> LatticeField:
    k = np.arange(-extent, extent + 1)
    xm = power_table(np.array([params.x]), k)[:, 0]
    yn = power_table(np.array([params.y]), k)[:, 0]
    field = LatticeField(extent, yn[:, None] * xm[None, :])
    field.values[~field.mask()] = 0
    return field
