"""Shared domain types, grids, and phase-point kinematics.

Everything here is an immutable value type or a pure function; the other
modules build on these without adding state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePartitionError

SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


@dataclass(frozen=True)
class EquationParams:
    """Coefficients (alpha, beta, gamma) of the coupled system.

    Reductions are encoded by zeroing fields: alpha=gamma=0 gives the
    Kundu-Eckhaus-type coupling, beta=0 with v=-conj(u) the modified
    Landau-Lifshitz reduction, and alpha=beta=gamma=0 with v=-conj(u)
    the focusing NLS equation.
    """

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val}")


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform periodic grid; n_points a power of two for FFT work."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError("x_max must exceed x_min")
        n = self.n_points
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"n_points must be a power of two >= 8, got {n}")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n_points

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def x(self) -> np.ndarray:
        # periodic grid: x_max is the image of x_min and is not a node
        return self.x_min + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers matching numpy FFT ordering."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n_points, d=self.dx)


@dataclass(frozen=True)
class FieldState:
    """Sampled complex fields (u, v) on a grid at a single time."""

    grid: SpatialGrid
    t: float
    u: np.ndarray
    v: np.ndarray
    params: EquationParams = field(default_factory=EquationParams)

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex)
        v = np.asarray(self.v, dtype=complex)
        if u.shape != (self.grid.n_points,) or v.shape != (self.grid.n_points,):
            raise ValueError("u, v must be 1-d arrays matching the grid")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def is_self_adjoint_reduction(self, tol: float = 1e-8) -> bool:
        """True when v = -conj(u) pointwise within tol."""
        return bool(np.max(np.abs(self.v + np.conj(self.u))) < tol)


@dataclass(frozen=True)
class PhaseContext:
    """Stationary-phase data for one observation point (x, t)."""

    x: float
    t: float
    params: EquationParams = field(default_factory=EquationParams)

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")

    @property
    def z0(self) -> float:
        return phase_point(self.x, self.t, self.params)


@dataclass(frozen=True)
class ConeSpec:
    """Space-time cone x = x0 + v*t with x0 in [x1, x2], v in [v1, v2]."""

    x1: float
    x2: float
    v1: float
    v2: float

    def __post_init__(self):
        if not self.v1 < self.v2:
            raise ValueError("need v1 < v2")
        if not self.x1 < self.x2:
            raise ValueError("need x1 < x2")

    def contains(self, x: float, t: float) -> bool:
        return (self.x1 + self.v1 * t <= x <= self.x2 + self.v2 * t) if t >= 0 else (
            self.x2 + self.v2 * t <= x <= self.x1 + self.v1 * t
        )


def phase_point(x: float, t: float, params: EquationParams) -> float:
    """Stationary point z0 = -(x/t + alpha)/4 of the oscillatory phase."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return -(x / t + params.alpha) / 4.0


def theta(z, ctx: PhaseContext):
    """Phase theta(z) = 2 z^2 - 4 z0 z - gamma/2.

    Algebraically equal to 2 (z - z0)^2 - 2 z0^2 - gamma/2.
    """
    z = np.asarray(z, dtype=complex) if np.ndim(z) else complex(z)
    z0 = ctx.z0
    return 2.0 * z * z - 4.0 * z0 * z - 0.5 * ctx.params.gamma


def theta_discrete(z_k, x: float, t: float, params: EquationParams,
                   gamma_mode: str = "half"):
    """t * theta evaluated at a discrete eigenvalue, as it enters c_k e^{2 i t theta}.

    Returns t*theta(z_k) = 2 t z^2 + (x + alpha t) z - (gamma t)/2 for the
    default mode.  gamma_mode="full" uses -gamma t instead of -gamma t / 2
    (the alternative constant printed for the reflectionless problem); the
    one-soliton PDE residual selects "half".
    """
    z = np.asarray(z_k, dtype=complex) if np.ndim(z_k) else complex(z_k)
    base = 2.0 * t * z * z + (x + params.alpha * t) * z
    if gamma_mode == "half":
        return base - 0.5 * params.gamma * t
    if gamma_mode == "full":
        return base - params.gamma * t
    raise ValueError(f"unknown gamma_mode {gamma_mode!r}")


def partition_spectrum(z_values, z0: float, tol: float = 0.0):
    """Split eigenvalue indices by Re z_k < z0 vs Re z_k > z0.

    Returns (minus, plus) as tuples of indices.  A tie Re z_k = z0 is
    rejected; the caller must perturb the cone or the data.
    """
    minus, plus = [], []
    for k, z in enumerate(z_values):
        re = complex(z).real
        if abs(re - z0) <= tol:
            raise DegeneratePartitionError(
                f"Re z_{k} = {re} coincides with z0 = {z0}"
            )
        (minus if re < z0 else plus).append(k)
    return tuple(minus), tuple(plus)


def cone_interval(cone: ConeSpec) -> tuple[float, float]:
    """Spectral interval I = [-v2/2, -v1/2] attached to a cone."""
    return (-cone.v2 / 2.0, -cone.v1 / 2.0)


def select_in_interval(z_values, interval) -> tuple[int, ...]:
    """Indices of eigenvalues with Re z_k inside the closed interval."""
    a, b = interval
    return tuple(k for k, z in enumerate(z_values) if a <= complex(z).real <= b)


def interval_gap(interval, z_values, selected=None) -> float:
    """mu(I) = min over excluded eigenvalues of Im z_k * dist(Re z_k, I).

    Returns +inf when no eigenvalue lies outside the interval.
    """
    a, b = interval
    if selected is None:
        selected = select_in_interval(z_values, interval)
    kept = set(selected)
    best = np.inf
    for k, z in enumerate(z_values):
        if k in kept:
            continue
        z = complex(z)
        dist = max(a - z.real, z.real - b, 0.0)
        best = min(best, z.imag * dist)
    return float(best)
