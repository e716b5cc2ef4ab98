"""Explicit local model: parabolic cylinder functions and the 2x2 matrix built
from them.

The Weber function is the standard D_a normalization, satisfying
D_a'' + (a + 1/2 - z^2/4) D_a = 0.  A Maclaurin/Kummer series covers
|z| <= 6; beyond that an optimally truncated asymptotic expansion is used,
with the recessive companion series added on pi/4 < |arg z| <= 3pi/4 so the
expansion stays uniform up to the sector boundaries.

The matrix assembly cancels the e^{+/- i lam^2/4} exponentials against the
D-function growth analytically (pcf_scaled), so it stays finite at large
|lam| where the raw factors over/underflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SERIES_RADIUS = 6.0
ASYMP_TERMS = 30

# Lanczos coefficients, g = 607/128, 15 terms
_LANCZOS_G = 607.0 / 128.0
_LANCZOS_C = np.array([
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
])


def complex_gamma(z) -> complex:
    """Gamma function for complex argument (Lanczos approximation)."""
    z = complex(z)
    if z.real < 0.5:
        if z.imag == 0.0 and z.real == np.floor(z.real):
            raise ValueError(f"gamma pole at z = {z}")
        return np.pi / (np.sin(np.pi * z) * complex_gamma(1.0 - z))
    zm = z - 1.0
    acc = _LANCZOS_C[0]
    for k in range(1, len(_LANCZOS_C)):
        acc += _LANCZOS_C[k] / (zm + k)
    t = zm + _LANCZOS_G + 0.5
    return np.sqrt(2.0 * np.pi) * t ** (zm + 0.5) * np.exp(-t) * acc


def recip_gamma(z) -> complex:
    """1/Gamma(z); zero at the poles of Gamma."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == np.floor(z.real):
        return 0.0 + 0j
    return 1.0 / complex_gamma(z)


def _kummer(a, b, w, tol=1e-17, max_terms=600) -> complex:
    """Confluent hypergeometric 1F1(a; b; w) by direct series."""
    term = 1.0 + 0j
    total = term
    for k in range(max_terms):
        term *= (a + k) * w / ((b + k) * (k + 1.0))
        total += term
        if abs(term) < tol * max(1.0, abs(total)):
            break
    return total


def _asymp_sum_main(a, z) -> complex:
    """sum_k (-1)^k prod_{j<2k}(a-j) / (2^k k! z^{2k}), optimally truncated."""
    acc = 1.0 + 0j
    term = 1.0 + 0j
    smallest = 1.0
    z2 = z * z
    for k in range(1, ASYMP_TERMS + 1):
        term *= -(a - (2 * k - 2)) * (a - (2 * k - 1)) / (2.0 * k * z2)
        if abs(term) > smallest:
            break
        smallest = abs(term)
        acc += term
        if smallest < 1e-18 * abs(acc):
            break
    return acc


def _asymp_sum_second(a, z) -> complex:
    """sum_k prod_{j=1..2k}(a+j) / (2^k k! z^{2k}), optimally truncated."""
    acc = 1.0 + 0j
    term = 1.0 + 0j
    smallest = 1.0
    z2 = z * z
    for k in range(1, ASYMP_TERMS + 1):
        term *= (a + (2 * k - 1)) * (a + 2 * k) / (2.0 * k * z2)
        if abs(term) > smallest:
            break
        smallest = abs(term)
        acc += term
        if smallest < 1e-18 * abs(acc):
            break
    return acc


def pcf_scaled(a, z) -> complex:
    """e^{z^2/4} D_a(z): the Weber function with its Gaussian factor removed.

    This is the combination the matrix model needs; it stays polynomially
    bounded where D itself over- or underflows.
    """
    a = complex(a)
    z = complex(z)
    if abs(z) > 400.0:
        raise ValueError("|z| > 400 outside the supported range")
    if abs(z) <= SERIES_RADIUS:
        w = 0.5 * z * z
        pref = np.sqrt(np.pi) * 2.0 ** (0.5 * a)
        even = recip_gamma(0.5 * (1.0 - a)) * _kummer(-0.5 * a, 0.5, w)
        odd = recip_gamma(-0.5 * a) * np.sqrt(2.0) * z * _kummer(0.5 * (1.0 - a), 1.5, w)
        return pref * (even - odd)
    ang = np.angle(z)
    if abs(ang) > 0.75 * np.pi + 1e-12:
        raise ValueError(f"arg z = {ang:.3f} outside |arg z| <= 3pi/4")
    val = np.exp(a * np.log(z)) * _asymp_sum_main(a, z)
    if abs(ang) > 0.5 * np.pi:
        # companion switches on across the Stokes line arg z = pi/2, where it
        # enters exponentially small; by 3pi/4 it is O(1) relative
        sign = 1.0 if ang > 0 else -1.0
        half = 0.5 * z * z
        if half.real < 700.0:
            val += -(np.sqrt(2.0 * np.pi) * recip_gamma(-a)) \
                * np.exp(sign * 1j * np.pi * a) * np.exp(half) \
                * np.exp((-a - 1.0) * np.log(z)) * _asymp_sum_second(a, z)
    return val


def pcf(a, z) -> complex:
    """Weber parabolic cylinder function D_a(z) for complex a and z."""
    z = complex(z)
    return pcf_scaled(a, z) * np.exp(-0.25 * z * z)


@dataclass(frozen=True)
class PCParams:
    """Scattering constants of the local model at one effective reflection r0."""

    r0: complex
    nu: float
    beta12: complex
    beta21: complex


def pc_coefficients(r0) -> PCParams:
    """nu, beta12, beta21 from r0; beta21 * beta12 = nu holds exactly."""
    r0 = complex(r0)
    if r0 == 0:
        return PCParams(r0=0j, nu=0.0, beta12=0j, beta21=0j)
    nu_val = -np.log1p(abs(r0) ** 2) / (2.0 * np.pi)
    beta12 = np.sqrt(2.0 * np.pi) * np.exp(1j * np.pi / 4.0) \
        * np.exp(-np.pi * nu_val / 2.0) / (r0 * complex_gamma(-1j * nu_val))
    beta21 = nu_val / beta12
    return PCParams(r0=r0, nu=nu_val, beta12=beta12, beta21=beta21)


def _sector_of(lam: complex) -> int:
    ang = np.angle(lam)
    bounds = [(0.0, 0.25 * np.pi, 1), (0.25 * np.pi, 0.75 * np.pi, 2),
              (0.75 * np.pi, np.pi, 3), (-np.pi, -0.75 * np.pi, 4),
              (-0.75 * np.pi, -0.25 * np.pi, 5), (-0.25 * np.pi, 0.0, 6)]
    for lo, hi, sec in bounds:
        if lo < ang < hi:
            return sec
    raise ValueError(
        f"lambda = {lam} lies on a sector boundary; pass sector= explicitly"
    )


def _phi_scaled(lam: complex, params: PCParams, upper: bool) -> np.ndarray:
    """Phi with the e^{+/- i lam^2/4} column scalars already multiplied in.

    Column 1 carries e^{i lam^2/4} = e^{z^2/4} at z = e^{-3i pi/4} lam (upper)
    or z = e^{i pi/4} lam (lower); column 2 the mirror combination.  One
    prefactor of the printed first-row/second-column entry needs the opposite
    exponent sign (e^{+pi(nu - i)/4}) for the matrix to tend to the identity;
    the displayed asymptotics fix it unambiguously.
    """
    nu_val = params.nu
    b12, b21 = params.beta12, params.beta21
    ia = 1j * nu_val
    if upper:
        e1 = np.exp(-3j * np.pi / 4.0)   # column-1 argument rotation
        e2 = np.exp(-1j * np.pi / 4.0)   # column-2 argument rotation
        c11 = np.exp(-0.75 * np.pi * nu_val)
        c21 = 1j * b21 * np.exp(-0.75 * np.pi * (nu_val + 1j))
        c12 = -1j * b12 * np.exp(0.25 * np.pi * (nu_val - 1j))
        c22 = np.exp(0.25 * np.pi * nu_val)
    else:
        e1 = np.exp(1j * np.pi / 4.0)
        e2 = np.exp(3j * np.pi / 4.0)
        c11 = np.exp(0.25 * np.pi * nu_val)
        c21 = 1j * b21 * np.exp(0.25 * np.pi * (nu_val + 1j))
        c12 = -1j * b12 * np.exp(-0.75 * np.pi * (nu_val - 1j))
        c22 = np.exp(-0.75 * np.pi * nu_val)
    z1 = e1 * lam
    z2 = e2 * lam
    # z1^2 = i lam^2 and z2^2 = -i lam^2, so e^{z1^2/4} = e^{i lam^2/4} etc.
    return np.array([
        [c11 * pcf_scaled(ia, z1), c12 * pcf_scaled(-ia - 1.0, z2)],
        [c21 * pcf_scaled(ia - 1.0, z1), c22 * pcf_scaled(-ia, z2)],
    ])


def _sector_matrix_conjugated(sector: int, r0: complex, lam: complex) -> np.ndarray:
    """S^{-1} P S with S = diag(e^{i lam^2/4}, e^{-i lam^2/4}).

    The sectors are designed so the conjugated entry always carries a
    non-positive real exponent; underflow to zero is harmless.
    """
    denom = 1.0 + abs(r0) ** 2
    out = np.eye(2, dtype=complex)
    lam2 = lam * lam
    if sector == 1:
        out[1, 0] = -r0 * np.exp(0.5j * lam2)
    elif sector == 3:
        out[0, 1] = -np.conj(r0) / denom * np.exp(-0.5j * lam2)
    elif sector == 4:
        out[1, 0] = r0 / denom * np.exp(0.5j * lam2)
    elif sector == 6:
        out[0, 1] = np.conj(r0) * np.exp(-0.5j * lam2)
    return out


def Mpc(lam: complex, r0: complex, sector: int | None = None) -> np.ndarray:
    """Explicit local-model matrix M(lam, r0) = Phi P e^{i lam^2/4 sigma3} lam^{-i nu sigma3}.

    On the rays and the real axis the sector is ambiguous; pass sector=1..6
    to select the one-sided value (sectors 1-3 use the upper Phi branch).
    """
    lam = complex(lam)
    r0 = complex(r0)
    if r0 == 0:
        return np.eye(2, dtype=complex)
    params = pc_coefficients(r0)
    if sector is None:
        sector = _sector_of(lam)
    if sector not in (1, 2, 3, 4, 5, 6):
        raise ValueError("sector must be in 1..6")
    upper = sector in (1, 2, 3)
    phi_s = _phi_scaled(lam, params, upper)
    ps = _sector_matrix_conjugated(sector, r0, lam)
    ang = np.angle(lam)
    if not upper and lam.imag == 0.0 and lam.real < 0.0:
        ang = -np.pi  # branch of log approached from below the cut
    log_lam = np.log(abs(lam)) + 1j * ang
    lam_pow = np.exp(-1j * params.nu * log_lam)
    scal = np.array([[lam_pow, 0], [0, 1.0 / lam_pow]])
    return phi_s @ ps @ scal


def Vpc(lam: complex, r0: complex, ray: int) -> np.ndarray:
    """Jump matrix on ray j (arg lam = (2j-1) pi/4), scalar factors conjugated in."""
    r0 = complex(r0)
    nu_val = 0.0 if r0 == 0 else -np.log1p(abs(r0) ** 2) / (2.0 * np.pi)
    d2 = np.exp(2j * nu_val * np.log(lam)) * np.exp(-0.5j * lam * lam)
    denom = 1.0 + abs(r0) ** 2
    if ray == 1:
        return np.array([[1.0, 0], [r0 / d2, 1.0]])
    if ray == 2:
        return np.array([[1.0, np.conj(r0) / denom * d2], [0, 1.0]])
    if ray == 3:
        return np.array([[1.0, 0], [r0 / denom / d2, 1.0]])
    if ray == 4:
        return np.array([[1.0, np.conj(r0) * d2], [0, 1.0]])
    raise ValueError("ray must be 1..4")


def moment_matrix(params: PCParams) -> np.ndarray:
    """First moment: M = I + M1/(i lam) + O(lam^-2), M1 = [[0, b12], [-b21, 0]]."""
    return np.array([[0, params.beta12], [-params.beta21, 0]], dtype=complex)
