"""Direct scattering transform for the x-part of the Lax pair.

The gauge factor turns the x-equation into a Zakharov-Shabat system with
effective potentials (u e^{-2i I}, v e^{2i I}), I(x) = -beta int uv dy.  All
marching is done in the commutator-normalized form, whose analytic columns
stay bounded in their half-planes, so complex z needs no rescaling tricks.

Conventions: s11 is built from the C+-analytic columns, s11 = det(mu-_1 |
mu+_2), so that M+ = (mu-_1 / s11, mu+_2) is meromorphic in C+ and
r(z) = s21 / s11 on the real line.  Norming constants are stored in residue
normalization: the extracted c_k already contains the 1/s11'(z_k) factor, so
Res M+ = lim M+ [[0,0],[c_k e^{2 i t theta},0]] holds literally.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .core import FieldState, SpatialGrid
from .errors import (
    NonSimpleSpectrumError,
    NotAnEigenvalueError,
    SpectralSingularityError,
    SpectrumSearchError,
    TruncationError,
)

EDGE_HARD_TOL = 1e-6
EDGE_SOFT_TOL = 1e-12


@dataclass(frozen=True)
class JostSolution:
    """One normalized Jost column sampled on the grid nodes."""

    z: complex
    side: str            # "minus" (anchored at -inf) or "plus" (+inf)
    column: int          # 1 or 2
    grid: SpatialGrid
    values: np.ndarray   # shape (n_points, 2)


@dataclass(frozen=True)
class ScatteringData:
    """Reflection coefficient samples plus the discrete spectrum."""

    z_grid: np.ndarray
    r: np.ndarray
    discrete: tuple[tuple[complex, complex], ...] = field(default_factory=tuple)

    def __post_init__(self):
        z_grid = np.asarray(self.z_grid, dtype=float)
        r = np.asarray(self.r, dtype=complex)
        if z_grid.shape != r.shape:
            raise ValueError("z_grid and r must have matching shapes")
        object.__setattr__(self, "z_grid", z_grid)
        object.__setattr__(self, "r", r)
        zs = [complex(z) for z, _ in self.discrete]
        for z, c in self.discrete:
            if complex(z).imag <= 0:
                raise ValueError(f"discrete eigenvalue {z} must have Im z > 0")
            if c == 0:
                raise ValueError("norming constants must be nonzero")
        for i, a in enumerate(zs):
            for b in zs[i + 1:]:
                if abs(a - b) < 1e-12:
                    raise ValueError("discrete spectrum must be simple")

    @property
    def one_plus_abs_r2(self) -> np.ndarray:
        return 1.0 + np.abs(self.r) ** 2

    def to_json(self) -> str:
        payload = {
            "z_grid": self.z_grid.tolist(),
            "r": [[val.real, val.imag] for val in self.r],
            "discrete": [{"z": [complex(z).real, complex(z).imag],
                          "c": [complex(c).real, complex(c).imag]}
                         for z, c in self.discrete],
        }
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "ScatteringData":
        payload = json.loads(text)
        r = np.array([complex(a, b) for a, b in payload["r"]], dtype=complex)
        discrete = tuple(
            (complex(d["z"][0], d["z"][1]), complex(d["c"][0], d["c"][1]))
            for d in payload["discrete"]
        )
        return cls(z_grid=np.array(payload["z_grid"], dtype=float), r=r,
                   discrete=discrete)

    def save(self, path: str | Path):
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "ScatteringData":
        return cls.from_json(Path(path).read_text())


# --- potentials and marching -------------------------------------------------

def effective_potentials(state: FieldState) -> tuple[np.ndarray, np.ndarray]:
    """Gauge-transformed potentials entering the Zakharov-Shabat form."""
    beta = state.params.beta
    if beta == 0.0:
        return state.u.copy(), state.v.copy()
    uv = state.u * state.v
    gauge = -beta * cumulative_trapezoid(uv, dx=state.grid.dx, initial=0.0)
    return state.u * np.exp(-2j * gauge), state.v * np.exp(2j * gauge)


def check_edge_decay(state: FieldState):
    edge = max(abs(state.u[0]), abs(state.v[0]), abs(state.u[-1]), abs(state.v[-1]))
    if edge > EDGE_HARD_TOL:
        raise TruncationError(f"fields not decayed at grid edges: {edge:.3e}")
    if edge > EDGE_SOFT_TOL:
        warnings.warn(f"field edge values {edge:.3e} above 1e-12; "
                      "scattering data may lose accuracy", stacklevel=2)


def _upsample(f: np.ndarray, factor: int) -> np.ndarray:
    """Spectral (FFT zero-padding) interpolation onto a factor-times grid."""
    n = f.size
    m = factor * n
    F = np.fft.fft(f)
    Fp = np.zeros(m, dtype=complex)
    half = n // 2
    Fp[:half] = F[:half]
    Fp[-half:] = F[-half:]
    # split the Nyquist bin symmetrically
    Fp[half] = 0.5 * F[half]
    Fp[m - half] += 0.5 * F[half]
    return np.fft.ifft(Fp) * factor


def _mu_rhs(mu, z2i, ut, vt, col):
    """d mu = -i z [sigma3, mu] + U2 mu; mu is stacked (..., 2, k).

    col=None marches the full matrix, col=1 or 2 a single sliced column (the
    commutator acts differently on the two columns).
    """
    out = np.empty_like(mu)
    out[..., 0, :] = ut * mu[..., 1, :]
    out[..., 1, :] = vt * mu[..., 0, :] + z2i[..., None] * mu[..., 1, :]
    if col is None:
        out[..., 0, 1] -= z2i * mu[..., 0, 1]
        out[..., 1, 1] -= z2i * mu[..., 1, 1]
    elif col == 2:
        out[..., 0, 0] -= z2i * mu[..., 0, 0]
        out[..., 1, 0] -= z2i * mu[..., 1, 0]
    return out


def _march(z, uf, vf, dx, n, refine, forward=True, column=None, store=False):
    """RK4 march of the commutator-form system across the grid.

    z may be a scalar or 1-d array; uf, vf are the 2*refine-times upsampled
    effective potentials.  Returns the final 2x2 matrices (or columns), or the
    full history at the n*refine+1 march nodes when store=True.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    z2i = 2j * z
    steps = n * refine
    h = dx / refine
    m = uf.size

    mu = np.zeros(z.shape + (2, 2), dtype=complex)
    mu[..., 0, 0] = 1.0
    mu[..., 1, 1] = 1.0
    if column is not None:
        mu = mu[..., :, column - 1:column]

    if store:
        hist = np.empty((steps + 1,) + mu.shape, dtype=complex)
        hist[0] = mu

    sgn = 1.0 if forward else -1.0
    for j in range(steps):
        # each march step spans two cells of the doubly-fine sampling
        i0 = 2 * j if forward else 2 * (steps - j)
        imid = i0 + 1 if forward else i0 - 1
        i1 = i0 + 2 if forward else i0 - 2
        u0, v0 = uf[i0 % m], vf[i0 % m]
        um, vm = uf[imid % m], vf[imid % m]
        u1, v1 = uf[i1 % m], vf[i1 % m]
        k1 = _mu_rhs(mu, z2i, u0, v0, column)
        k2 = _mu_rhs(mu + sgn * 0.5 * h * k1, z2i, um, vm, column)
        k3 = _mu_rhs(mu + sgn * 0.5 * h * k2, z2i, um, vm, column)
        k4 = _mu_rhs(mu + sgn * h * k3, z2i, u1, v1, column)
        mu = mu + sgn * (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if store:
            hist[j + 1] = mu
    if store:
        return hist if forward else hist[::-1]
    return mu


class ScatteringProblem:
    """Caches the upsampled potentials of one initial state."""

    def __init__(self, state: FieldState, refine: int = 1):
        check_edge_decay(state)
        self.state = state
        self.refine = refine
        ut, vt = effective_potentials(state)
        self.uf = _upsample(ut, 2 * refine)
        self.vf = _upsample(vt, 2 * refine)
        self.grid = state.grid

    def _run(self, z, forward, column=None, store=False):
        return _march(z, self.uf, self.vf, self.grid.dx, self.grid.n_points,
                      self.refine, forward=forward, column=column, store=store)

    def s_matrix(self, z_real):
        """All four scattering coefficients on real z (vectorized)."""
        z = np.atleast_1d(np.asarray(z_real, dtype=complex))
        if np.max(np.abs(z.imag)) > 0:
            raise ValueError("s_matrix is defined on the real line")
        final = self._run(z, forward=True)
        x_max = self.grid.x_min + self.grid.length
        ph = np.exp(2j * z * x_max)
        s11 = final[..., 0, 0]
        s12 = final[..., 0, 1] * ph
        s21 = final[..., 1, 0] / ph
        s22 = final[..., 1, 1]
        return s11, s12, s21, s22

    def s11_upper(self, z):
        """s11 continued into C+ by marching the analytic column."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        if np.min(z.imag) < -1e-14:
            raise ValueError("analytic continuation of s11 lives in Im z >= 0")
        final = self._run(z, forward=True, column=1)
        return final[..., 0, 0]

    def s11_derivative(self, z, h=1e-6):
        z = complex(z)
        step = h * (1.0 + abs(z))
        plus, minus = self.s11_upper(np.array([z + step, z - step]))
        return (plus - minus) / (2.0 * step)


# --- spec-level operations ---------------------------------------------------

def jost(state: FieldState, z: complex, side: str, column: int | None = None,
         refine: int = 1):
    """Normalized Jost solution(s) of the x-part at spectral parameter z.

    For real z both columns are returned as a pair.  For complex z only the
    column that stays bounded in that half-plane may be requested.
    """
    if side not in ("minus", "plus"):
        raise ValueError("side must be 'minus' or 'plus'")
    prob = ScatteringProblem(state, refine=refine)
    zc = complex(z)
    if zc.imag != 0.0:
        analytic = {("minus", True): 1, ("plus", True): 2,
                    ("minus", False): 2, ("plus", False): 1}
        needed = analytic[(side, zc.imag > 0)]
        if column is None:
            column = needed
        if column != needed:
            raise ValueError(
                f"column {column} of mu_{side} is not analytic for Im z "
                f"{'>' if zc.imag > 0 else '<'} 0"
            )
    forward = side == "minus"
    hist = prob._run(zc, forward=forward, column=column, store=True)
    # march nodes: grid nodes plus the wrap point; keep the grid nodes
    n = state.grid.n_points
    take = slice(0, n * prob.refine + 1, prob.refine)
    vals = hist[take][:n, 0]
    if column is not None:
        sol = JostSolution(z=zc, side=side, column=column, grid=state.grid,
                           values=vals[:, :, 0])
        return sol
    col1 = JostSolution(z=zc, side=side, column=1, grid=state.grid,
                        values=vals[:, :, 0])
    col2 = JostSolution(z=zc, side=side, column=2, grid=state.grid,
                        values=vals[:, :, 1])
    return col1, col2


def scattering_coeffs(state: FieldState, z: float, refine: int = 1):
    """(s11, s21) at one real spectral point."""
    prob = ScatteringProblem(state, refine=refine)
    s11, _, s21, _ = prob.s_matrix(z)
    if abs(s11[0]) < 1e-10:
        raise SpectralSingularityError(f"|s11({z})| = {abs(s11[0]):.3e}")
    return complex(s11[0]), complex(s21[0])


def reflection_grid(state: FieldState, z_grid, refine: int = 1,
                    discrete=()) -> ScatteringData:
    """Reflection coefficient r = s21/s11 sampled on a real grid."""
    prob = ScatteringProblem(state, refine=refine)
    z_grid = np.asarray(z_grid, dtype=float)
    s11, _, s21, _ = prob.s_matrix(z_grid)
    bad = np.abs(s11) < 1e-10
    if np.any(bad):
        raise SpectralSingularityError(
            f"|s11| < 1e-10 at z = {z_grid[bad][:4]}"
        )
    return ScatteringData(z_grid=z_grid, r=s21 / s11, discrete=tuple(discrete))


def _winding_number(vals) -> int | None:
    """Winding of a closed sample loop; None when sampling is too coarse."""
    ratios = np.roll(vals, -1) / vals
    steps = np.angle(ratios)
    if np.max(np.abs(steps)) > 0.75 * np.pi:
        return None
    total = np.sum(steps) / (2.0 * np.pi)
    rounded = int(np.round(total))
    if abs(total - rounded) > 0.05:
        return None
    return rounded


def _box_samples(box, n_per_edge):
    re0, re1, im0, im1 = box
    top = np.linspace(re0, re1, n_per_edge, endpoint=False)
    right = np.linspace(im0, im1, n_per_edge, endpoint=False)
    pts = np.concatenate([
        top + 1j * im0,
        re1 + 1j * right,
        (re1 - (top - re0)) + 1j * im1,
        re0 + 1j * (im1 - (right - im0)),
    ])
    return pts


def _box_winding(prob, box, n_start=64, n_max=1024):
    n = n_start
    prev = None
    while n <= n_max:
        vals = prob.s11_upper(_box_samples(box, n))
        if np.min(np.abs(vals)) < 1e-9:
            # a zero (nearly) on the boundary: caller jitters the box
            return None
        w = _winding_number(vals)
        if w is not None and w == prev:
            return w
        prev = w
        n *= 2
    return prev


def _newton_root(prob, z_start, box, tol=1e-13, max_iter=60):
    z = complex(z_start)
    scale = max(1.0, abs(z))
    for _ in range(max_iter):
        s = complex(prob.s11_upper(z)[0])
        ds = prob.s11_derivative(z)
        if ds == 0:
            return None
        dz = s / ds
        z = z - dz
        if abs(dz) < tol * scale:
            break
    re0, re1, im0, im1 = box
    pad_r = 0.05 * (re1 - re0)
    pad_i = 0.05 * (im1 - im0)
    if not (re0 - pad_r <= z.real <= re1 + pad_r and im0 - pad_i <= z.imag <= im1 + pad_i):
        return None
    if abs(complex(prob.s11_upper(z)[0])) > 1e-7:
        return None
    return z


def find_discrete_spectrum(state: FieldState, search_box, refine: int = 1,
                           max_depth: int = 12) -> list[complex]:
    """All simple zeros of s11 inside a C+ rectangle.

    search_box = (re_min, re_max, im_min, im_max) with im_min > 0.  Zeros are
    located by argument-principle winding counts with recursive subdivision,
    then polished by Newton iteration on the analytically continued s11.
    """
    re0, re1, im0, im1 = (float(v) for v in search_box)
    if not (re0 < re1 and 0 < im0 < im1):
        raise ValueError("search box must satisfy re_min < re_max, 0 < im_min < im_max")
    prob = ScatteringProblem(state, refine=refine)

    total = _box_winding(prob, (re0, re1, im0, im1))
    if total is None:
        raise SpectrumSearchError("winding number failed to stabilize on the outer box")
    if total == 0:
        return []

    roots: list[complex] = []

    def recurse(box, expected, depth):
        b_re0, b_re1, b_im0, b_im1 = box
        if expected == 0:
            return
        if expected == 1:
            z = _newton_root(prob, complex(0.5 * (b_re0 + b_re1),
                                           0.5 * (b_im0 + b_im1)), box)
            if z is not None:
                roots.append(z)
                return
        if depth >= max_depth:
            raise SpectrumSearchError(f"subdivision depth exhausted in box {box}")
        # jittered cut avoids zeros sitting exactly on subdivision lines
        fr = 0.5 + 0.013 * ((depth % 3) - 1)
        cr = b_re0 + fr * (b_re1 - b_re0)
        ci = b_im0 + fr * (b_im1 - b_im0)
        found = 0
        for sub in ((b_re0, cr, b_im0, ci), (cr, b_re1, b_im0, ci),
                    (b_re0, cr, ci, b_im1), (cr, b_re1, ci, b_im1)):
            w = _box_winding(prob, sub)
            if w is None:
                raise SpectrumSearchError(f"winding undecidable on sub-box {sub}")
            found += w
            recurse(sub, w, depth + 1)
        if found != expected:
            raise SpectrumSearchError(
                f"winding counts disagree under subdivision: {found} != {expected}"
            )

    recurse((re0, re1, im0, im1), total, 0)

    # dedupe and cross-check against the winding total
    unique: list[complex] = []
    for z in roots:
        if all(abs(z - w) > 1e-8 * (1.0 + abs(z)) for w in unique):
            unique.append(z)
    if len(unique) != total:
        raise SpectrumSearchError(
            f"found {len(unique)} refined zeros but winding number is {total}"
        )
    for z in unique:
        if abs(prob.s11_derivative(z)) < 1e-8:
            raise NonSimpleSpectrumError(f"s11'({z}) is numerically zero")
    return sorted(unique, key=lambda z: (z.real, z.imag))


def norming_constant(state: FieldState, z_k: complex, refine: int = 1,
                     residual_tol: float = 1e-6) -> complex:
    """Residue-normalized norming constant at a verified simple zero of s11.

    The Jost-column proportionality mu-_1 = c e^{2 i z x} mu+_2 is fitted by
    least squares across the grid, then the s11'(z_k) factor is absorbed.
    """
    prob = ScatteringProblem(state, refine=refine)
    zc = complex(z_k)
    if zc.imag <= 0:
        raise ValueError("eigenvalues live in the upper half plane")
    n = state.grid.n_points
    take = slice(0, n * prob.refine + 1, prob.refine)
    left = prob._run(zc, forward=True, column=1, store=True)[take][:, 0, :, 0]
    right = prob._run(zc, forward=False, column=2, store=True)[take][:, 0, :, 0]
    x_nodes = np.append(state.grid.x, state.grid.x_min + state.grid.length)
    phase = np.exp(2j * zc * x_nodes)
    a = left.reshape(-1)
    b = (phase[:, None] * right).reshape(-1)
    denom = np.vdot(b, b)
    if denom == 0:
        raise NotAnEigenvalueError("decaying Jost column vanished identically")
    c_prop = np.vdot(b, a) / denom
    residual = np.linalg.norm(a - c_prop * b) / np.linalg.norm(a)
    if residual > residual_tol:
        raise NotAnEigenvalueError(
            f"Jost proportionality residual {residual:.3e} at z = {zc}"
        )
    ds = prob.s11_derivative(zc)
    if abs(ds) < 1e-10:
        raise NonSimpleSpectrumError(f"s11'({zc}) is numerically zero")
    return complex(c_prop / ds)


def full_scattering(state: FieldState, z_grid, search_box, refine: int = 1) -> ScatteringData:
    """Reflection grid plus discrete data in one pass."""
    zeros = find_discrete_spectrum(state, search_box, refine=refine)
    discrete = tuple((z, norming_constant(state, z, refine=refine)) for z in zeros)
    data = reflection_grid(state, z_grid, refine=refine)
    return ScatteringData(z_grid=data.z_grid, r=data.r, discrete=discrete)
