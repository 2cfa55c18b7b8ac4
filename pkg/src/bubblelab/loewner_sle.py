"""Chordal SLE_kappa(rho) driving processes and Loewner traces.

The curve is built by composing elementary slit maps, one per time step
("zipper").  Two slit families are available:

* ``"tilted"``: straight slit whose driving function is linear in sqrt(t)
  on the step, matched to the increment (dW, dt).  Its inverse map is
  H(u) = (u - x_l)^(1-a) (u - x_r)^a with explicit x_l, x_r, a.
* ``"vertical"``: vertical slit at the end-of-step driving value; every map
  is a square root, so forward and inverse maps are both closed form.

Every step adds exactly 2 dt to the half-plane capacity.
"""

from __future__ import annotations

import cmath
import math
import struct
import zlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numba as nb
import numpy as np

from .errors import BlowupError, ConfigError, DomainError, NonconvergenceError, SwallowedError
from .liouville_constants import LiouvilleParams

__all__ = [
    "Side",
    "ForceConfig",
    "DrivingPath",
    "TraceCurve",
    "uniform_grid",
    "geometric_grid",
    "simulate_driving",
    "trace",
    "rad_from_root",
    "forward_map",
    "inverse_map",
    "bessel_dimension",
    "AdaptiveRun",
    "adaptive_driving",
    "derive_seed",
    "dump_driving",
    "dump_curve",
    "load_archive",
]

MODES = ("tilted", "vertical")
_MODE_CODE = {"tilted": 0, "vertical": 1}


class Side(str, Enum):
    RIGHT = "right"      # seed+
    LEFT = "left"        # seed-
    INTERIOR = "interior"  # away from the seed


@dataclass(frozen=True)
class ForceConfig:
    positions: tuple = ()
    weights: tuple = ()
    side_tags: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(float(p) for p in self.positions))
        object.__setattr__(self, "weights", tuple(float(r) for r in self.weights))
        object.__setattr__(self, "side_tags", tuple(Side(s) for s in self.side_tags))
        if not (len(self.positions) == len(self.weights) == len(self.side_tags)):
            raise ConfigError("positions, weights and side_tags must have equal length")
        for side in (Side.RIGHT, Side.LEFT):
            tot = sum(r for r, s in zip(self.weights, self.side_tags) if s == side)
            if any(s == side for s in self.side_tags) and not tot > -2:
                raise ConfigError(f"sum of weights at seed {side.value} must exceed -2, got {tot}")

    @classmethod
    def single(cls, rho: float, side: Side = Side.RIGHT, position: Optional[float] = None,
               seed_pos: float = 0.0) -> "ForceConfig":
        pos = seed_pos if position is None else position
        return cls((pos,), (rho,), (side,))

    @property
    def n(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class DrivingPath:
    times: np.ndarray
    w_values: np.ndarray
    v_values: np.ndarray  # shape (len(times), n_force)
    kappa: float
    seed: int
    gamma: float = float("nan")

    def __post_init__(self):
        if self.times.ndim != 1 or self.times.shape != self.w_values.shape:
            raise DomainError("times and w_values must be 1-d arrays of equal length")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    def scaled(self, lam: float) -> "DrivingPath":
        """Driving lam W(t/lam^2): traces to the curve scaled by lam."""
        return DrivingPath(self.times * lam**2, self.w_values * lam, self.v_values * lam,
                           self.kappa, self.seed, self.gamma)

    def shifted(self, x: float) -> "DrivingPath":
        return DrivingPath(self.times, self.w_values + x, self.v_values + x, self.kappa, self.seed, self.gamma)

    def subsample(self, every: int) -> "DrivingPath":
        idx = np.arange(0, len(self.times), every)
        if idx[-1] != len(self.times) - 1:
            raise DomainError("grid length incompatible with subsampling factor")
        return DrivingPath(self.times[idx], self.w_values[idx], self.v_values[idx],
                           self.kappa, self.seed, self.gamma)


@dataclass(frozen=True)
class TraceCurve:
    """Curve points plus the elementary maps they came from."""

    points: np.ndarray
    dt: float
    half_plane_capacity: float
    times: np.ndarray = field(repr=False)
    w_values: np.ndarray = field(repr=False)
    point_index: np.ndarray = field(repr=False)
    mode: str = "tilted"

    @property
    def tip(self) -> complex:
        return complex(self.points[-1])

    @classmethod
    def empty(cls, seed_pos: float = 0.0) -> "TraceCurve":
        return cls(np.array([complex(seed_pos)]), 0.0, 0.0, np.array([0.0]), np.array([float(seed_pos)]),
                   np.array([0]), "vertical")


_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master: int, *keys) -> int:
    """Deterministic 32-bit seed from a master seed and keys (ints or strings).

    Keys are folded in order with splitmix64; strings enter through crc32.
    """
    x = _splitmix64(int(master) & _MASK64)
    for k in keys:
        if isinstance(k, str):
            k = zlib.crc32(k.encode())
        x = _splitmix64(x ^ (int(k) & _MASK64))
    return x & 0xFFFFFFFF


def uniform_grid(horizon: float, dt: float) -> np.ndarray:
    if not (dt > 0 and horizon > 0):
        raise DomainError("horizon and dt must be positive")
    n = int(math.ceil(horizon / dt - 1e-9))
    return np.linspace(0.0, horizon, n + 1)


def geometric_grid(horizon: float, rel: float, t_min: float) -> np.ndarray:
    """0 followed by t_min (1 + rel)^k, k = 0..n, with the last point >= horizon.

    Grids with the same (rel, t_min) share their prefix, so a longer horizon
    extends a path instead of changing it.
    """
    if not (0 < t_min < horizon and rel > 0):
        raise DomainError("need 0 < t_min < horizon and rel > 0")
    n = int(math.ceil(math.log(horizon / t_min) / math.log1p(rel) - 1e-12))
    return np.concatenate([[0.0], t_min * np.exp(np.arange(n + 1) * math.log1p(rel))])


def bessel_dimension(kappa: float, rho: float) -> float:
    return 1.0 + 2.0 * (rho + 2.0) / kappa


# ---------------------------------------------------------------------------
# driving kernels


@nb.njit(cache=True)
def _sq_bessel_step(y, d, h):
    # exact transition of a squared Bessel process of dimension d over time h:
    # h * noncentral chi-square(d, y/h), via the Poisson mixture of central ones
    k = np.random.poisson(0.5 * y / h) if y > 0 else 0
    return h * 2.0 * np.random.gamma(0.5 * d + k, 1.0)


@nb.njit(cache=True)
def _gap_step(zc, h, d, kappa, rho):
    if zc < 10.0 * math.sqrt(kappa * h):
        return math.sqrt(kappa * _sq_bessel_step(zc * zc / kappa, d, h))
    zn = zc + (rho + 2.0) / zc * h - math.sqrt(kappa * h) * np.random.standard_normal()
    if zn <= 0.0:
        zn = math.sqrt(kappa * _sq_bessel_step(zc * zc / kappa, d, h))
    return zn


@nb.njit(cache=True)
def _gap_path(times, z0, kappa, rho, seed):
    """Gap Z = |V - W| for one force point; Bessel exact steps near 0, Euler away."""
    np.random.seed(seed)
    n = times.shape[0]
    z = np.empty(n)
    vinc = np.empty(n)  # increments of |V| away from W
    z[0] = z0
    vinc[0] = 0.0
    d = 1.0 + 2.0 * (rho + 2.0) / kappa
    for k in range(1, n):
        h = times[k] - times[k - 1]
        zc = z[k - 1]
        zn = _gap_step(zc, h, d, kappa, rho)
        z[k] = zn
        vinc[k] = 2.0 * h / (0.5 * (zc + zn))
    return z, vinc


@nb.njit(cache=True)
def _single_force_path(times, z0, v0, sign, kappa, rho, seed):
    z, vinc = _gap_path(times, z0, kappa, rho, seed)
    v = v0 + sign * np.cumsum(vinc)
    return v - sign * z, v


@nb.njit(cache=True)
def _euler_path(times, w0, v0, rho, kappa, seed):
    np.random.seed(seed)
    n = times.shape[0]
    m = v0.shape[0]
    w = np.empty(n)
    v = np.empty((n, m))
    w[0] = w0
    v[0, :] = v0
    sk = math.sqrt(kappa)
    for k in range(1, n):
        h = times[k] - times[k - 1]
        drift = 0.0
        for j in range(m):
            g = w[k - 1] - v[k - 1, j]
            if g != 0.0:
                drift += rho[j] / g
        w[k] = w[k - 1] + drift * h + sk * math.sqrt(h) * np.random.standard_normal()
        for j in range(m):
            g = v[k - 1, j] - w[k - 1]
            if g == 0.0:
                v[k, j] = v[k - 1, j]
                continue
            v[k, j] = v[k - 1, j] + 2.0 * h / g
            # force points are pushed, never crossed
            if (v[k, j] - w[k]) * g <= 1e-300:
                return w, v, k
    return w, v, -1


def simulate_driving(params, rho_cfg: ForceConfig = ForceConfig(), seed_pos: float = 0.0,
                     horizon: float = 1.0, dt: float = 1e-4, rng_seed: int = 0,
                     times: Optional[np.ndarray] = None) -> DrivingPath:
    """Driving function of chordal SLE_kappa(rho) from seed_pos.

    ``params`` is a LiouvilleParams or a bare kappa.  A single force point is
    evolved through its gap process (Bessel of dimension 1 + 2(rho+2)/kappa);
    several force points use Euler-Maruyama on the full system.  ``times``
    overrides the uniform grid built from (horizon, dt).
    """
    kappa = params.kappa if isinstance(params, LiouvilleParams) else float(params)
    gamma = math.sqrt(kappa)
    if not kappa > 0:
        raise DomainError("kappa must be positive")
    if times is None:
        times = uniform_grid(horizon, dt)
    times = np.ascontiguousarray(times, dtype=float)
    if times[0] != 0.0:
        raise DomainError("time grid must start at 0")
    seed = int(rng_seed) & 0xFFFFFFFF
    n = times.shape[0]
    if rho_cfg.n == 0:
        w = _bm_path(times, seed) * math.sqrt(kappa) + seed_pos
        return DrivingPath(times, w, np.zeros((n, 0)), kappa, seed, gamma)
    if rho_cfg.n == 1:
        rho = rho_cfg.weights[0]
        side = rho_cfg.side_tags[0]
        v0 = rho_cfg.positions[0]
        if side == Side.RIGHT:
            sign = 1.0
        elif side == Side.LEFT:
            sign = -1.0
        else:
            sign = 1.0 if v0 >= seed_pos else -1.0
        z0 = abs(v0 - seed_pos)
        if side in (Side.RIGHT, Side.LEFT) and z0 != 0.0:
            raise ConfigError("seed-side force points must sit at the seed")
        if rho > -2:
            w, v = _single_force_path(times, z0, v0, sign, kappa, rho, seed)
            return DrivingPath(times, w, v[:, None], kappa, seed, gamma)
    # general case
    if any(s != Side.INTERIOR for s in rho_cfg.side_tags) and rho_cfg.n > 1:
        # offset seed-side points by a hair so their gaps start positive
        pos = [p + (1e-12 if s == Side.RIGHT else -1e-12 if s == Side.LEFT else 0.0)
               for p, s in zip(rho_cfg.positions, rho_cfg.side_tags)]
    else:
        pos = list(rho_cfg.positions)
    w, v, fail = _euler_path(times, float(seed_pos), np.array(pos, dtype=float),
                             np.array(rho_cfg.weights, dtype=float), kappa, seed)
    if fail >= 0:
        raise BlowupError(f"force point collided with the driving function at step {fail}")
    return DrivingPath(times, w, v, kappa, seed, gamma)


@nb.njit(cache=True)
def _bm_path(times, seed):
    np.random.seed(seed)
    n = times.shape[0]
    b = np.empty(n)
    b[0] = 0.0
    for k in range(1, n):
        b[k] = b[k - 1] + math.sqrt(times[k] - times[k - 1]) * np.random.standard_normal()
    return b


@nb.njit(cache=True)
def _grow(a, n):
    b = np.empty(2 * a.shape[0], dtype=a.dtype)
    b[:n] = a[:n]
    return b


@nb.njit(cache=True, nogil=True)
def _adaptive_kernel(kappa, rho, seed, t_min, rel, near, floor_rel, t_max, z0, max_steps):
    """Seed-side force point at 0+, vertical-slit flow of the points z0.

    Step sizes are previsible: h = min(rel t, near |g_t(z) - W_t|^2 over the
    watched points), at least floor_rel t.  The first step is t_min.
    Returns the grid, W, V, refined-step flags, and per point the final
    g_T(z) - W_T and log|g_T'(z)|.
    """
    np.random.seed(seed)
    d = 1.0 + 2.0 * (rho + 2.0) / kappa
    cap = 8192
    times = np.empty(cap)
    w = np.empty(cap)
    v = np.empty(cap)
    refined = np.zeros(cap, dtype=np.bool_)
    m = z0.shape[0]
    z = z0.copy()
    logd = np.zeros(m)
    # running products of |g'| factors, folded into logd before they leave range
    acc = np.ones(m)
    times[0] = 0.0
    w[0] = 0.0
    v[0] = 0.0
    gap = 0.0
    t = 0.0
    n = 1
    while t < t_max:
        if n >= max_steps:
            return times[:n], w[:n], v[:n], refined[:n], z - w[n - 1], logd + 0.5 * np.log(acc), False
        if t == 0.0:
            h = t_min
            ref = False
        else:
            h = rel * t
            ref = False
            for i in range(m):
                dz = z[i] - w[n - 1]
                hz = near * (dz.real * dz.real + dz.imag * dz.imag)
                if hz < h:
                    h = hz
                    ref = True
            if h < floor_rel * t:
                h = floor_rel * t
        zn = _gap_step(gap, h, d, kappa, rho)
        vn = v[n - 1] + 2.0 * h / (0.5 * (gap + zn))
        wn = vn - zn
        gap = zn
        for i in range(m):
            u = z[i] - wn
            zz = _vertical_fwd(z[i], wn, h)
            r = zz - wn
            acc[i] *= (u.real * u.real + u.imag * u.imag) / (r.real * r.real + r.imag * r.imag)
            if acc[i] < 1e-150 or acc[i] > 1e150:
                logd[i] += 0.5 * math.log(acc[i])
                acc[i] = 1.0
            z[i] = zz
        if n >= times.shape[0]:
            times = _grow(times, n)
            w = _grow(w, n)
            v = _grow(v, n)
            refined = _grow(refined, n)
        t = t + h
        times[n] = t
        w[n] = wn
        v[n] = vn
        refined[n] = ref
        n += 1
    return times[:n], w[:n], v[:n], refined[:n], z - w[n - 1], logd + 0.5 * np.log(acc), True


@dataclass(frozen=True)
class AdaptiveRun:
    driving: DrivingPath
    refined: np.ndarray
    offsets: np.ndarray   # g_T(z) - W_T for each watched point
    log_derivative: np.ndarray  # log |g_T'(z)|

    @property
    def angles(self) -> np.ndarray:
        return np.angle(self.offsets)

    @property
    def log_cr(self) -> np.ndarray:
        """log of 2 Im g_T(z)/|g_T'(z)|, the conformal radius of H minus the hull."""
        with np.errstate(divide="ignore"):
            return np.log(2.0 * self.offsets.imag) - self.log_derivative


def adaptive_driving(params, rho: float, rng_seed: int, watch: Sequence[complex] = (),
                     t_min: float = 1e-4, rel: float = 4e-3, t_max: float = 5.1e3,
                     near: float = 0.01, floor_rel: float = 1e-7, max_steps: int = 2_000_000) -> AdaptiveRun:
    """SLE_kappa(rho) from 0 with force point 0+, time grid refined near watched points.

    The grid is t_min, then geometric steps rel * t, shortened to
    near * |g_t(z) - W_t|^2 while a watched point z is close to the tip.
    Step sizes only depend on the past, so the increments keep their law.
    Runs with the same seed and watched points share their prefix when
    t_max grows.
    """
    kappa = params.kappa if isinstance(params, LiouvilleParams) else float(params)
    if not rho > -2:
        raise ConfigError("rho must exceed -2")
    z0 = np.ascontiguousarray(np.asarray(watch, dtype=complex).ravel())
    if np.any(z0.imag <= 0):
        raise DomainError("watched points must lie in the upper half-plane")
    seed = int(rng_seed) & 0xFFFFFFFF
    times, w, v, refined, off, logd, ok = _adaptive_kernel(kappa, float(rho), seed, t_min, rel, near,
                                                          floor_rel, t_max, z0, int(max_steps))
    if not ok:
        raise NonconvergenceError(f"adaptive grid exceeded {max_steps} steps")
    drv = DrivingPath(times.copy(), w.copy(), v.copy()[:, None], kappa, seed, math.sqrt(kappa))
    return AdaptiveRun(drv, refined.copy(), off, logd)


# ---------------------------------------------------------------------------
# slit maps


@nb.njit(cache=True)
def _clamp_up(z):
    if z.imag <= 0.0:
        return complex(z.real, 0.0)
    return z


@nb.njit(cache=True)
def _vertical_inv(w, c, h):
    # inverse of z -> c + sqrt((z - c)^2 + 4h), landing in the closed upper half-plane
    u = w - c
    r = cmath.sqrt(u * u - 4.0 * h)
    if r.imag < 0.0 or (r.imag == 0.0 and r.real * u.real < 0.0):
        r = -r
    return _clamp_up(c + r)


@nb.njit(cache=True)
def _vertical_fwd(z, c, h):
    u = z - c
    r = cmath.sqrt(u * u + 4.0 * h)
    if r.imag < 0.0 or (r.imag == 0.0 and r.real * u.real < 0.0):
        r = -r
    return c + r


@nb.njit(cache=True)
def _tilt_params(dw, h):
    c = dw / math.sqrt(h)
    a = 0.5 * (1.0 - c / math.sqrt(c * c + 16.0))
    sh = math.sqrt(h)
    xl = -2.0 * sh * math.sqrt(a / (1.0 - a))
    xr = 2.0 * sh * math.sqrt((1.0 - a) / a)
    return a, xl, xr


@nb.njit(cache=True)
def _tilt_h(u, a, xl, xr):
    p = _clamp_up(u - xl)
    q = _clamp_up(u - xr)
    # p^(1-a) q^a = p (q/p)^a; arg(q/p) stays in [0, pi]
    return p * cmath.exp(a * cmath.log(_clamp_up(q / p)))


@nb.njit(cache=True)
def _tilt_inv(w, w0, dw, h):
    a, xl, xr = _tilt_params(dw, h)
    return _clamp_up(w0 + _tilt_h(_clamp_up(w - w0), a, xl, xr))


@nb.njit(cache=True)
def _tilt_fwd(z, w0, dw, h):
    # solve H(u) = z - w0 by Newton from the vertical-slit guess
    a, xl, xr = _tilt_params(dw, h)
    t = z - w0
    r = cmath.sqrt(t * t + 4.0 * h)
    if r.imag < 0.0 or (r.imag == 0.0 and r.real * t.real < 0.0):
        r = -r
    u = r
    scale = abs(t) + math.sqrt(h)
    for _ in range(60):
        hv = _tilt_h(u, a, xl, xr)
        res = hv - t
        if abs(res) <= 4e-16 * scale:
            return w0 + u, True
        dh = hv * ((1.0 - a) / (u - xl) + a / (u - xr))
        step = res / dh
        un = u - step
        # stay in the upper half-plane
        k = 0
        while un.imag < 0.0 and k < 50:
            step *= 0.5
            un = u - step
            k += 1
        u = un
        if abs(step) <= 1e-15 * scale:
            return w0 + u, True
    return w0 + u, abs(_tilt_h(u, a, xl, xr) - t) <= 1e-12 * scale


@nb.njit(cache=True)
def _inverse_chain(w, k, times, wv, mode):
    """G_1^{-1} o ... o G_k^{-1} (w)."""
    z = w
    for j in range(k, 0, -1):
        h = times[j] - times[j - 1]
        if mode == 1:
            z = _vertical_inv(z, wv[j], h)
        else:
            z = _tilt_inv(z, wv[j - 1], wv[j] - wv[j - 1], h)
    return z


@nb.njit(cache=True, nogil=True)
def _trace_tips(idx, times, wv, mode):
    out = np.empty(idx.shape[0], dtype=np.complex128)
    for m in range(idx.shape[0]):
        k = idx[m]
        out[m] = _inverse_chain(complex(wv[k], 0.0), k, times, wv, mode)
    return out


@nb.njit(cache=True)
def _forward_chain(z, times, wv, mode, swallow_tol):
    for j in range(1, times.shape[0]):
        h = times[j] - times[j - 1]
        if mode == 1:
            z = _vertical_fwd(z, wv[j], h)
        else:
            z, ok = _tilt_fwd(z, wv[j - 1], wv[j] - wv[j - 1], h)
            if not ok:
                return z, j, 2
        if z.imag <= swallow_tol * math.sqrt(h) and abs(z.real - wv[j]) <= 4.0 * math.sqrt(h) + 1e-300:
            return z, j, 1
    return z, -1, 0


def _tip_indices(n_steps: int, max_points: Optional[int], dense=None) -> np.ndarray:
    """Evenly spaced step indices, plus up to max_points of the ``dense`` ones."""
    if max_points is None or n_steps + 1 <= max_points:
        return np.arange(n_steps + 1)
    idx = np.round(np.linspace(0, n_steps, max_points)).astype(np.int64)
    if dense is not None:
        extra = np.flatnonzero(dense)
        if extra.size > max_points:
            extra = extra[np.round(np.linspace(0, extra.size - 1, max_points)).astype(np.int64)]
        idx = np.concatenate([idx, extra])
    return np.unique(idx)


def trace(driving: DrivingPath, mode: str = "tilted", max_points: Optional[int] = None,
          dense=None) -> TraceCurve:
    """Curve tips by backward composition of the elementary slit maps.

    Cost is O(N * P) for N steps and P returned points; ``max_points`` caps P
    by returning tips on an evenly spaced subset of step indices, plus (up to
    another max_points) the steps flagged in the boolean array ``dense``.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}")
    times = np.ascontiguousarray(driving.times, dtype=float)
    wv = np.ascontiguousarray(driving.w_values, dtype=float)
    n = times.shape[0] - 1
    idx = _tip_indices(n, max_points, dense)
    pts = _trace_tips(idx, times, wv, _MODE_CODE[mode])
    steps = np.diff(times)
    dt = float(np.max(steps)) if n else 0.0
    # each elementary map contributes exactly 2 h
    hcap = float(2.0 * np.sum(steps))
    return TraceCurve(pts, dt, hcap, times, wv, idx, mode)


def rad_from_root(curve: TraceCurve, root: float) -> float:
    return float(np.max(np.abs(np.asarray(curve.points) - root)))


def forward_map(curve: TraceCurve, z: complex, swallow_tol: float = 1e-9) -> complex:
    """g_T(z): the composition G_N o ... o G_1 applied to z."""
    z = complex(z)
    if z.imag < 0:
        raise DomainError("z must lie in the closed upper half-plane")
    if len(curve.times) < 2:
        return z
    out, step, flag = _forward_chain(z, curve.times, curve.w_values, _MODE_CODE[curve.mode], swallow_tol)
    if flag == 1:
        raise SwallowedError(f"{z} is swallowed at step {step}")
    if flag == 2:
        raise NonconvergenceError(f"slit map inversion did not converge at step {step}")
    return out


def inverse_map(curve: TraceCurve, w: complex) -> complex:
    """g_T^{-1}(w) for w in the closed upper half-plane."""
    n = len(curve.times) - 1
    return complex(_inverse_chain(complex(w), n, curve.times, curve.w_values, _MODE_CODE[curve.mode]))


# ---------------------------------------------------------------------------
# binary archives: header then little-endian float64 payload

_MAGIC = b"BLSLE\x00\x00\x01"
_VERSION = 1
_HEADER = struct.Struct("<8sIIdddQQ")  # magic, version, kind, gamma, kappa, dt, N, ncols
_KIND_DRIVING, _KIND_CURVE = 1, 2


def dump_driving(path, driving: DrivingPath) -> None:
    n = len(driving.times)
    cols = np.column_stack([driving.times, driving.w_values, driving.v_values])
    dt = float(np.max(np.diff(driving.times))) if n > 1 else 0.0
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, _VERSION, _KIND_DRIVING, driving.gamma, driving.kappa, dt, n, cols.shape[1]))
        f.write(struct.pack("<Q", driving.seed))
        f.write(cols.astype("<f8").tobytes())


def dump_curve(path, curve: TraceCurve, gamma: float = float("nan"), kappa: float = float("nan")) -> None:
    n = len(curve.points)
    cols = np.column_stack([curve.points.real, curve.points.imag, curve.point_index.astype(float)])
    drv = np.column_stack([curve.times, curve.w_values])
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, _VERSION, _KIND_CURVE, gamma, kappa, curve.dt, n, cols.shape[1]))
        f.write(struct.pack("<Q8sQ", len(curve.times), curve.mode.encode().ljust(8, b"\x00"), 0))
        f.write(cols.astype("<f8").tobytes())
        f.write(drv.astype("<f8").tobytes())


def load_archive(path):
    """Read a file written by dump_driving or dump_curve."""
    with open(path, "rb") as f:
        raw = f.read()
    magic, version, kind, gamma, kappa, dt, n, ncols = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC:
        raise DomainError("not a bubblelab SLE archive")
    if version != _VERSION:
        raise DomainError(f"unsupported archive version {version}")
    off = _HEADER.size
    if kind == _KIND_DRIVING:
        (seed,) = struct.unpack_from("<Q", raw, off)
        off += 8
        cols = np.frombuffer(raw, "<f8", n * ncols, off).reshape(n, ncols).astype(float)
        return DrivingPath(cols[:, 0].copy(), cols[:, 1].copy(), cols[:, 2:].copy(), kappa, int(seed), gamma)
    if kind == _KIND_CURVE:
        m, mode, _ = struct.unpack_from("<Q8sQ", raw, off)
        off += 24
        cols = np.frombuffer(raw, "<f8", n * ncols, off).reshape(n, ncols)
        off += 8 * n * ncols
        drv = np.frombuffer(raw, "<f8", m * 2, off).reshape(m, 2)
        times = drv[:, 0].copy()
        return TraceCurve(cols[:, 0] + 1j * cols[:, 1], dt, float(2 * (times[-1] - times[0])), times,
                          drv[:, 1].copy(), cols[:, 2].astype(np.int64), mode.rstrip(b"\x00").decode())
    raise DomainError(f"unknown archive kind {kind}")
