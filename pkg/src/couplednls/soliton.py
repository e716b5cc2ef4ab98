"""Reflectionless Riemann-Hilbert solver: N-soliton fields and their data maps.

The partial-fraction ansatz turns the residue conditions into a linear system
for the pole coefficients.  Poles can individually carry lower- or upper-
triangular residue data (the triangularity split used by the outer model);
the plain N-soliton is the no-flip case.

Sign conventions worth recording: the reconstruction is
    u = 2i lim z M_12 * e^{+2i int Delta},   v = -2i lim z M_21 * e^{-2i int Delta},
which enforces v = -conj(u) in the self-adjoint reduction and makes
u*v = -4 |sum eta_k|^2 gauge-free and nonpositive.  The phase at a discrete
eigenvalue uses t*theta(z_k) = 2 t z^2 + (x + alpha t) z - gamma t / 2 by
default; the alternative -gamma t constant is kept behind gamma_mode="full"
(the one-soliton PDE residual selects "half").
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, simpson

from .core import EquationParams, FieldState, SpatialGrid, theta_discrete
from .errors import TruncationError


@dataclass(frozen=True)
class SolitonData:
    """Discrete scattering data driving the reflectionless problem."""

    entries: tuple[tuple[complex, complex], ...]

    def __post_init__(self):
        entries = tuple((complex(z), complex(c)) for z, c in self.entries)
        for z, c in entries:
            if z.imag <= 0:
                raise ValueError(f"eigenvalue {z} must have Im z > 0")
            if c == 0:
                raise ValueError("norming constants must be nonzero")
        for i, (a, _) in enumerate(entries):
            for b, _ in entries[i + 1:]:
                if abs(a - b) < 1e-12:
                    raise ValueError("eigenvalues must be pairwise distinct")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def z(self) -> np.ndarray:
        return np.array([z for z, _ in self.entries], dtype=complex)

    @property
    def c(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=complex)

    def to_json(self) -> str:
        return json.dumps({"entries": [{"z": [z.real, z.imag], "c": [c.real, c.imag]}
                                       for z, c in self.entries]})

    @classmethod
    def from_json(cls, text: str) -> "SolitonData":
        payload = json.loads(text)
        return cls(entries=tuple((complex(*e["z"]), complex(*e["c"]))
                                 for e in payload["entries"]))

    def save(self, path: str | Path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "SolitonData":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class RhpSolution:
    """Solved pole coefficients of the reflectionless matrix at one (x, t).

    For an unflipped pole k the pair (a_k, b_k) is (zeta_k, eta_k); for a
    flipped pole it is the analogous pair attached to the second column.
    """

    z: np.ndarray
    flipped: tuple[int, ...]
    a: np.ndarray
    b: np.ndarray
    condition: float

    def evaluate(self, zz: complex) -> np.ndarray:
        """The 2x2 matrix M(zz) away from the poles."""
        z, zb = self.z, np.conj(self.z)
        flip = np.zeros(len(z), dtype=bool)
        if self.flipped:
            flip[list(self.flipped)] = True
        keep = ~flip
        m = np.eye(2, dtype=complex)
        m[0, 0] += np.sum(self.a[keep] / (zz - z[keep]))
        m[0, 0] += np.sum(np.conj(self.b[flip]) / (zz - zb[flip]))
        m[0, 1] += np.sum(-np.conj(self.b[keep]) / (zz - zb[keep]))
        m[0, 1] += np.sum(self.a[flip] / (zz - z[flip]))
        m[1, 0] += np.sum(self.b[keep] / (zz - z[keep]))
        m[1, 0] += np.sum(-np.conj(self.a[flip]) / (zz - zb[flip]))
        m[1, 1] += np.sum(np.conj(self.a[keep]) / (zz - zb[keep]))
        m[1, 1] += np.sum(self.b[flip] / (zz - z[flip]))
        return m

    @property
    def u_bare(self) -> complex:
        flip = np.zeros(len(self.z), dtype=bool)
        if self.flipped:
            flip[list(self.flipped)] = True
        lim = np.sum(self.a[flip]) - np.sum(np.conj(self.b[~flip]))
        return 2j * lim

    @property
    def v_bare(self) -> complex:
        return -np.conj(self.u_bare)


@dataclass(frozen=True)
class ReflectionlessSolution:
    """Assembled N-soliton value at a point, with gauge factor applied."""

    x: float
    t: float
    zeta: np.ndarray
    eta: np.ndarray
    u_sol: complex
    v_sol: complex
    gauge_phase: float
    u_bare: complex
    v_bare: complex
    condition: float


def _blaschke(z, poles) -> complex:
    out = 1.0 + 0j
    for p in poles:
        out *= (z - p) / (z - np.conj(p))
    return out


def _split_coefficients(sd: SolitonData, x, t, params, flipped, gamma_mode):
    """Residue prefactors gamma_k for the chosen triangularity split."""
    z = sd.z
    c = sd.c
    n = sd.n
    tth = theta_discrete(z, x, t, params, gamma_mode=gamma_mode)
    phase = np.exp(2j * tth)
    flip_set = frozenset(flipped)
    gam = np.empty(n, dtype=complex)
    flip_poles = [z[j] for j in sorted(flip_set)]
    for k in range(n):
        if k in flip_set:
            others = [p for p in flip_poles if p != z[k]]
            ds = _blaschke(z[k], others) / (z[k] - np.conj(z[k]))
            gam[k] = (1.0 / c[k]) / ds**2 / phase[k]
        else:
            s = _blaschke(z[k], flip_poles)
            gam[k] = c[k] * s**2 * phase[k]
    return gam


def solve_reflectionless(sd: SolitonData, x: float, t: float,
                         params: EquationParams,
                         flipped: tuple[int, ...] = (),
                         gamma_mode: str = "half") -> RhpSolution:
    """Solve the residue-condition linear system at one space-time point.

    The unknowns and their conjugates couple, so the complex system
    w = g + B w + C conj(w) is solved as a real block system.
    """
    n = sd.n
    if n == 0:
        return RhpSolution(z=np.empty(0, dtype=complex), flipped=(),
                           a=np.empty(0, dtype=complex),
                           b=np.empty(0, dtype=complex), condition=1.0)
    z = sd.z
    zb = np.conj(z)
    gam = _split_coefficients(sd, x, t, params, flipped, gamma_mode)
    flip = np.zeros(n, dtype=bool)
    if flipped:
        flip[list(flipped)] = True

    dim = 2 * n
    B = np.zeros((dim, dim), dtype=complex)
    C = np.zeros((dim, dim), dtype=complex)
    g = np.zeros(dim, dtype=complex)
    # unknown layout: w = [a_0..a_{n-1}, b_0..b_{n-1}]
    for k in range(n):
        ak, bk = k, n + k
        diff = z[k] - z
        diff[k] = 1.0  # diagonal never read (a pole is not its own neighbour)
        same = gam[k] / diff            # 1/(z_k - z_j), scaled
        cross = gam[k] / (z[k] - zb)    # 1/(z_k - conj z_j), scaled
        if not flip[k]:
            g[bk] = gam[k]
            for j in range(n):
                if flip[j]:
                    B[ak, j] = same[j]
                    B[bk, n + j] = same[j]
                else:
                    C[ak, n + j] = -cross[j]
                    C[bk, j] = cross[j]
        else:
            g[ak] = gam[k]
            for j in range(n):
                if flip[j]:
                    C[ak, n + j] = cross[j]
                    C[bk, j] = -cross[j]
                else:
                    B[ak, j] = same[j]
                    B[bk, n + j] = same[j]

    K = np.block([
        [np.eye(dim) - B.real - C.real, B.imag - C.imag],
        [-B.imag - C.imag, np.eye(dim) - B.real + C.real],
    ])
    rhs = np.concatenate([g.real, g.imag])
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(
            f"reflectionless linear system is singular (cond ~ inf): {exc}"
        ) from exc
    cond = float(np.linalg.cond(K))
    w = sol[:dim] + 1j * sol[dim:]
    return RhpSolution(z=z, flipped=tuple(sorted(flipped)), a=w[:n], b=w[n:],
                       condition=cond)


def residue_residual(sol: RhpSolution, sd: SolitonData, x, t, params,
                     gamma_mode: str = "half") -> float:
    """Max violation of the residue conditions by the assembled solution."""
    n = sd.n
    if n == 0:
        return 0.0
    gam = _split_coefficients(sd, x, t, params, sol.flipped, gamma_mode)
    flip = np.zeros(n, dtype=bool)
    if sol.flipped:
        flip[list(sol.flipped)] = True
    worst = 0.0
    for k in range(n):
        zk = sol.z[k]
        # regular part of M at z_k: this pole's own term excluded
        m = np.eye(2, dtype=complex)
        for j in range(n):
            zj, zbj = sol.z[j], np.conj(sol.z[j])
            aj, bj = sol.a[j], sol.b[j]
            if not flip[j]:
                if j != k:
                    m[0, 0] += aj / (zk - zj)
                    m[1, 0] += bj / (zk - zj)
                m[0, 1] += -np.conj(bj) / (zk - zbj)
                m[1, 1] += np.conj(aj) / (zk - zbj)
            else:
                if j != k:
                    m[0, 1] += aj / (zk - zj)
                    m[1, 1] += bj / (zk - zj)
                m[0, 0] += np.conj(bj) / (zk - zbj)
                m[1, 0] += -np.conj(aj) / (zk - zbj)
        if not flip[k]:
            res = np.array([[sol.a[k], 0.0], [sol.b[k], 0.0]])
            target = gam[k] * np.array([[m[0, 1], 0.0], [m[1, 1], 0.0]])
        else:
            res = np.array([[0.0, sol.a[k]], [0.0, sol.b[k]]])
            target = gam[k] * np.array([[0.0, m[0, 0]], [0.0, m[1, 0]]])
        worst = max(worst, float(np.max(np.abs(res - target))))
    return worst


def _bare_uv_product(sd, x, t, params, gamma_mode):
    sol = solve_reflectionless(sd, x, t, params, gamma_mode=gamma_mode)
    return -4.0 * abs(np.sum(sol.b)) ** 2  # u*v, gauge-free, <= 0


def gauge_phase(sd: SolitonData, x: float, t: float, params: EquationParams,
                gamma_mode: str = "half", n_quad: int = 1200) -> float:
    """int_{-inf}^{x} of -beta * u v ds for the reflectionless field.

    The one-soliton case uses the closed tanh antiderivative; larger N falls
    back to composite Simpson over the region where the field is supported.
    """
    beta = params.beta
    if beta == 0.0 or sd.n == 0:
        return 0.0
    if sd.n == 1:
        z1, c1 = sd.entries[0]
        xi, eta = z1.real, z1.imag
        omega = x + (4.0 * xi + params.alpha) * t \
            - np.log(abs(c1) / (2.0 * eta)) / (2.0 * eta)
        return 2.0 * beta * eta * (np.tanh(2.0 * eta * omega) + 1.0)
    # support window: every soliton peak plus decay margins
    margins = []
    for z1, c1 in sd.entries:
        xi, eta = z1.real, z1.imag
        peak = -(4.0 * xi + params.alpha) * t + np.log(abs(c1) / (2.0 * eta)) / (2.0 * eta)
        margins.append((peak - 40.0 / (2.0 * eta), peak + 40.0 / (2.0 * eta)))
    lo = min(m[0] for m in margins)
    if x <= lo:
        return 0.0
    xs = np.linspace(lo, x, n_quad + 1)
    vals = np.array([_bare_uv_product(sd, s, t, params, gamma_mode) for s in xs])
    return float(-beta * simpson(vals, x=xs))


def nsoliton(sd: SolitonData, x: float, t: float, params: EquationParams,
             gamma_mode: str = "half",
             gauge: float | None = None) -> ReflectionlessSolution:
    """N-soliton field value at (x, t) from the reflectionless problem.

    gauge overrides the quadrature of the gauge phase when the caller has a
    cheaper way to supply it (grid sweeps integrate it cumulatively).
    """
    sol = solve_reflectionless(sd, x, t, params, gamma_mode=gamma_mode)
    if gauge is None:
        gauge = gauge_phase(sd, x, t, params, gamma_mode=gamma_mode)
    u = sol.u_bare * np.exp(2j * gauge)
    v = sol.v_bare * np.exp(-2j * gauge)
    return ReflectionlessSolution(x=x, t=t, zeta=sol.a.copy(), eta=sol.b.copy(),
                                  u_sol=complex(u), v_sol=complex(v),
                                  gauge_phase=float(gauge),
                                  u_bare=complex(sol.u_bare),
                                  v_bare=complex(sol.v_bare),
                                  condition=sol.condition)


def nsoliton_grid(sd: SolitonData, grid: SpatialGrid, t: float,
                  params: EquationParams, gamma_mode: str = "half"):
    """Vectorized sweep over a grid; gauge phase by cumulative trapezoid."""
    xs = grid.x
    u_bare = np.empty(grid.n_points, dtype=complex)
    for i, x in enumerate(xs):
        sol = solve_reflectionless(sd, float(x), t, params, gamma_mode=gamma_mode)
        u_bare[i] = sol.u_bare
    v_bare = -np.conj(u_bare)
    if params.beta != 0.0 and sd.n > 0:
        uv = (u_bare * v_bare).real
        gauge = -params.beta * cumulative_trapezoid(uv, dx=grid.dx, initial=0.0)
    else:
        gauge = np.zeros(grid.n_points)
    u = u_bare * np.exp(2j * gauge)
    v = v_bare * np.exp(-2j * gauge)
    return u, v, gauge


def one_soliton(z1: complex, c1: complex, x: float, t: float,
                params: EquationParams, gamma_mode: str = "half"):
    """Closed-form single soliton (u, v) including phases and gauge factor.

    Peak modulus 2 eta travels along x = -(4 xi + alpha) t + log(|c1|/2eta)/2eta.
    """
    z1 = complex(z1)
    c1 = complex(c1)
    xi, eta = z1.real, z1.imag
    if eta <= 0:
        raise ValueError("need Im z1 > 0")
    omega = x + (4.0 * xi + params.alpha) * t \
        - np.log(abs(c1) / (2.0 * eta)) / (2.0 * eta)
    gamma_t = params.gamma * t if gamma_mode == "half" else 2.0 * params.gamma * t
    psi = (np.angle(c1) + 4.0 * (xi**2 - eta**2) * t
           + 2.0 * xi * (x + params.alpha * t) - gamma_t)
    amp = 2.0 * eta / np.cosh(2.0 * eta * omega)
    gauge = 0.0
    if params.beta != 0.0:
        gauge = 2.0 * params.beta * eta * (np.tanh(2.0 * eta * omega) + 1.0)
    u = amp * np.exp(-1j * (0.5 * np.pi + psi)) * np.exp(2j * gauge)
    v = amp * np.exp(1j * (psi - 0.5 * np.pi)) * np.exp(-2j * gauge)
    return u, v


def modified_constants(sd: SolitonData, z0: float, r_interp) -> SolitonData:
    """Outer-model constants c~_k = c_k exp[(i/pi) int_{-inf}^{z0} log(1+|r|^2)/(s-z_k) ds].

    r_interp must expose log1p_abs2(s) (vectorized) and a support interval;
    spectral.ReflectionInterpolant provides both.
    """
    lo, hi = r_interp.support
    upper = min(z0, hi)
    new = []
    for z_k, c_k in sd.entries:
        if upper <= lo:
            new.append((z_k, c_k))
            continue

        def f_re(s, zk=z_k):
            return (r_interp.log1p_abs2(s) / (s - zk)).real

        def f_im(s, zk=z_k):
            return (r_interp.log1p_abs2(s) / (s - zk)).imag

        re, _ = quad(f_re, lo, upper, limit=400, epsabs=1e-11, epsrel=1e-11)
        im, _ = quad(f_im, lo, upper, limit=400, epsabs=1e-11, epsrel=1e-11)
        integral = re + 1j * im
        new.append((z_k, c_k * np.exp(1j * integral / np.pi)))
    return SolitonData(entries=tuple(new))


def cone_constants(sd: SolitonData, interval, side: str = "all") -> SolitonData:
    """Restriction to eigenvalues with Re z_k in the interval.

    Dropped poles rotate the kept constants by squared Blaschke factors,
    c_k(I) = c_k prod ((z_k - z_j)/(z_k - conj z_j))^2.  side="all" multiplies
    over every dropped pole (the printed formula); "left"/"right" multiply
    only over dropped poles on that side, which is the combination the
    t -> +inf / -inf outer models actually produce.
    """
    a, b = interval
    kept = [(z, c) for z, c in sd.entries if a <= z.real <= b]
    if side == "all":
        dropped = [z for z, _ in sd.entries if not (a <= z.real <= b)]
    elif side == "left":
        dropped = [z for z, _ in sd.entries if z.real < a]
    elif side == "right":
        dropped = [z for z, _ in sd.entries if z.real > b]
    else:
        raise ValueError(f"unknown side {side!r}")
    out = []
    for z_k, c_k in kept:
        factor = _blaschke(z_k, dropped) ** 2
        out.append((z_k, c_k * factor))
    return SolitonData(entries=tuple(out))


def make_initial_data(sd: SolitonData, grid: SpatialGrid,
                      params: EquationParams | None = None,
                      gamma_mode: str = "half") -> FieldState:
    """FieldState at t = 0 sampled from the N-soliton formulas."""
    params = params or EquationParams()
    if sd.n == 0:
        zero = np.zeros(grid.n_points, dtype=complex)
        return FieldState(grid=grid, t=0.0, u=zero, v=zero.copy(), params=params)
    u, v, _ = nsoliton_grid(sd, grid, 0.0, params, gamma_mode=gamma_mode)
    edge = max(abs(u[0]), abs(u[-1]), abs(v[0]), abs(v[-1]))
    if edge > 1e-12:
        raise TruncationError(
            f"soliton tails not contained in the grid (edge value {edge:.2e})"
        )
    return FieldState(grid=grid, t=0.0, u=u, v=v, params=params)
