"""Scalar spectral functions attached to the reflection coefficient.

All quadratures run against a cubic interpolant of r on its sample grid;
r is identically zero outside the grid (reflection data decays).  The
log-singular pieces near z0 are handled by explicit subtraction so plain
adaptive quadrature converges.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .core import partition_spectrum
from .errors import QuadratureToleranceError

QUAD_OPTS = dict(limit=400, epsabs=1e-11, epsrel=1e-11)
QUAD_ABSERR_MAX = 1e-7


class ReflectionInterpolant:
    """Cubic interpolation of reflection samples, zero outside the grid."""

    def __init__(self, z_grid, r):
        z_grid = np.asarray(z_grid, dtype=float)
        r = np.asarray(r, dtype=complex)
        if z_grid.ndim != 1 or z_grid.size < 4:
            raise ValueError("need at least 4 reflection samples")
        order = np.argsort(z_grid)
        self._re = CubicSpline(z_grid[order], r[order].real)
        self._im = CubicSpline(z_grid[order], r[order].imag)
        self.support = (float(z_grid[order][0]), float(z_grid[order][-1]))

    @classmethod
    def from_data(cls, data):
        return cls(data.z_grid, data.r)

    def __call__(self, s):
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        lo, hi = self.support
        inside = (s >= lo) & (s <= hi)
        out = np.zeros(s.shape, dtype=complex)
        if np.any(inside):
            out[inside] = self._re(s[inside]) + 1j * self._im(s[inside])
        return complex(out[0]) if scalar else out

    def abs2(self, s):
        return np.abs(self(s)) ** 2

    def log1p_abs2(self, s):
        return np.log1p(self.abs2(s))

    def nu(self, s):
        return -self.log1p_abs2(s) / (2.0 * np.pi)

    def nu_prime(self, s, h=1e-6):
        return (self.nu(np.asarray(s) + h) - self.nu(np.asarray(s) - h)) / (2.0 * h)


def nu(s, r_interp: ReflectionInterpolant):
    """nu(s) = -(1/2 pi) log(1 + |r(s)|^2); zero outside the sample grid."""
    return r_interp.nu(s)


def _quad_complex(f, a, b, **opts):
    kw = {**QUAD_OPTS, **opts}
    re, re_err = quad(lambda s: f(s).real, a, b, **kw)
    im, im_err = quad(lambda s: f(s).imag, a, b, **kw)
    if max(re_err, im_err) > QUAD_ABSERR_MAX:
        raise QuadratureToleranceError(
            f"quadrature error {max(re_err, im_err):.2e} over [{a}, {b}]"
        )
    return re + 1j * im


def _quad_real(f, a, b, **opts):
    kw = {**QUAD_OPTS, **opts}
    val, err = quad(f, a, b, **kw)
    if err > QUAD_ABSERR_MAX:
        raise QuadratureToleranceError(f"quadrature error {err:.2e} over [{a}, {b}]")
    return val


def _delta_exponent(z, z0, r_interp) -> complex:
    """int_{-inf}^{z0} nu(s)/(s-z) ds for z off the cut."""
    lo, hi = r_interp.support
    upper = min(z0, hi)
    if upper <= lo:
        return 0.0 + 0j
    return _quad_complex(lambda s: complex(r_interp.nu(s)) / (s - z), lo, upper)


def blaschke_minus(z, sd_z, z0) -> complex:
    """prod over Re z_k < z0 of (z - conj z_k)/(z - z_k)."""
    minus, _ = partition_spectrum(sd_z, z0)
    out = 1.0 + 0j
    for k in minus:
        zk = complex(sd_z[k])
        out *= (z - np.conj(zk)) / (z - zk)
    return out


def T(z, sd_z, z0: float, r_interp: ReflectionInterpolant) -> complex:
    """T(z) = Blaschke_minus(z) * exp[i int nu(s)/(s-z) ds], z off (-inf, z0]."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= z0:
        raise ValueError("z lies on the branch cut; use T_boundary")
    return blaschke_minus(z, sd_z, z0) * np.exp(1j * _delta_exponent(z, z0, r_interp))


def _pv_exponent(z: float, z0: float, r_interp) -> float:
    """Principal value of int_{-inf}^{z0} nu(s)/(s-z) ds for real z < z0."""
    lo, hi = r_interp.support
    upper = min(z0, hi)
    if upper <= lo:
        return 0.0
    if z >= upper:
        # singularity beyond the support of nu: the integral is regular
        return _quad_real(lambda s: float(r_interp.nu(s)) / (s - z), lo, upper)
    d = min(1.0, 0.5 * (upper - z))
    nu_z = float(r_interp.nu(z))
    total = 0.0
    if lo < z - d:
        total += _quad_real(lambda s: float(r_interp.nu(s)) / (s - z), lo, z - d)
    # symmetric window: the nu(z)/(s-z) part vanishes as a principal value
    total += _quad_real(lambda s: (float(r_interp.nu(s)) - nu_z) / (s - z),
                        z - d, z + d, points=[z])
    total += _quad_real(lambda s: float(r_interp.nu(s)) / (s - z), z + d, upper)
    return total


def T_boundary(z: float, side: str, sd_z, z0: float,
               r_interp: ReflectionInterpolant, endpoint_tol: float = 1e-8) -> complex:
    """Boundary values T_plus / T_minus on the cut (-inf, z0].

    Plemelj gives exponent i PV -/+ pi nu(z) for the +/- side, which makes
    the jump T_plus/T_minus = e^{-2 pi nu(z)} = 1 + |r(z)|^2.
    """
    if side not in ("+", "-"):
        raise ValueError("side must be '+' or '-'")
    if z > z0 - endpoint_tol:
        raise ValueError(f"z = {z} too close to the endpoint z0 = {z0}")
    pv = _pv_exponent(z, z0, r_interp)
    half = -np.pi * float(r_interp.nu(z))
    if side == "-":
        half = -half
    return blaschke_minus(complex(z), sd_z, z0) * np.exp(1j * pv + half)


def beta_function(z, z0: float, r_interp: ReflectionInterpolant) -> complex:
    """beta(z, z0) = -nu(z0) log(z - z0 + 1) + int_{-inf}^{z0} (nu(s) - chi(s) nu(z0))/(s - z) ds.

    chi is the indicator of (z0 - 1, z0).  Valid for z off the cut and for
    z = z0 itself, where the subtraction makes the integrand integrable.
    The chi window can stick out of the sample support; those flat pieces
    integrate in closed (ratio-of-logs) form.
    """
    z = complex(z)
    lo, hi = r_interp.support
    upper = min(z0, hi)
    nu0 = float(r_interp.nu(z0))
    total = -nu0 * np.log(z - z0 + 1.0)

    # region s <= z0 - 1: integrand nu(s)/(s - z), supported on [lo, ...]
    plain_hi = min(z0 - 1.0, upper)
    if plain_hi > lo:
        total += _quad_complex(lambda s: complex(r_interp.nu(s)) / (s - z),
                               lo, plain_hi)

    # region (z0 - 1, z0): integrand (nu(s) - nu0)/(s - z)
    w_lo = z0 - 1.0
    seg_lo = max(w_lo, lo)
    seg_hi = min(z0, hi)
    if w_lo < lo and nu0 != 0.0:
        # flat piece below the support: nu = 0 there
        total += -nu0 * np.log((lo - z) / (w_lo - z))
    if seg_hi > seg_lo:
        if z == z0:
            total += _quad_real(
                lambda s: (float(r_interp.nu(s)) - nu0) / (s - z0), seg_lo, seg_hi)
        else:
            total += _quad_complex(
                lambda s: (complex(r_interp.nu(s)) - nu0) / (s - z), seg_lo, seg_hi)
    if z0 > hi and nu0 != 0.0:
        # flat piece above the support (only possible when nu0 = nu beyond hi)
        total += -nu0 * np.log((z0 - z) / (max(w_lo, hi) - z))
    return total


def beta_z0(z0: float, r_interp: ReflectionInterpolant) -> float:
    """beta(z0, z0); real by construction."""
    return float(beta_function(z0, z0, r_interp).real)


def T0_and_beta(z0: float, sd_z, r_interp: ReflectionInterpolant):
    """(T0(z0), beta(., z0) evaluator); |T0| = 1."""
    minus, _ = partition_spectrum(sd_z, z0)
    blas = 1.0 + 0j
    for k in minus:
        zk = complex(sd_z[k])
        blas *= (z0 - np.conj(zk)) / (z0 - zk)
    T0 = blas * np.exp(1j * beta_z0(z0, r_interp))
    return T0, (lambda z: beta_function(z, z0, r_interp))


def t_infinity_coefficient(sd_z, z0: float, r_interp: ReflectionInterpolant) -> complex:
    """Coefficient of 1/z in T at large z: i [2 sum_{Delta-} Im z_k - int nu ds]."""
    minus, _ = partition_spectrum(sd_z, z0)
    im_sum = sum(complex(sd_z[k]).imag for k in minus)
    lo, hi = r_interp.support
    upper = min(z0, hi)
    integral = 0.0
    if upper > lo:
        integral = _quad_real(lambda s: float(r_interp.nu(s)), lo, upper)
    return 1j * (2.0 * im_sum - integral)


def r0_local(z0: float, t: float, r_interp: ReflectionInterpolant, sd_z,
             gamma: float) -> complex:
    """Effective reflection constant of the local model at the phase point:
    r0 = r(z0) T0^{-2} e^{2 i nu(z0) log(2 sqrt(2t))} e^{-4 i t z0^2 - 2 i t gamma}."""
    if not t > 0:
        raise ValueError("t must be positive")
    r_val = complex(r_interp(z0))
    if r_val == 0:
        return 0.0 + 0j
    T0, _ = T0_and_beta(z0, sd_z, r_interp)
    nu0 = float(r_interp.nu(z0))
    phase = np.exp(2j * nu0 * np.log(2.0 * np.sqrt(2.0 * t))) \
        * np.exp(-4j * t * z0**2 - 2j * t * gamma)
    return r_val * T0 ** (-2) * phase


def stieltjes_log_integral(z0: float, r_interp: ReflectionInterpolant) -> float:
    """int_{-inf}^{z0} ln|s - z0| d nu(s), by quadrature against nu'.

    Equals -beta(z0, z0) by integration by parts; both routes are kept as
    mutual checks.
    """
    lo, hi = r_interp.support
    upper = min(z0, hi)
    if upper <= lo:
        return 0.0
    val, err = quad(lambda s: np.log(abs(s - z0)) * float(r_interp.nu_prime(s)),
                    lo, upper, limit=800, epsabs=1e-10, epsrel=1e-10)
    if err > 1e-6:
        raise QuadratureToleranceError(f"log-Stieltjes quadrature error {err:.2e}")
    return val
