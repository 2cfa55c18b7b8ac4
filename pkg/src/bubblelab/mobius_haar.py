"""Mobius automorphisms of the upper half-plane and Haar sampling.

Haar measure on conf(H) is sampled through the decomposition a∘n∘k with
a: z -> t z (density dt/t), n: z -> z + s (Lebesgue) and k a rotation about i
(uniform angle).  Haar measure is infinite, so draws are restricted to a
box of (t, s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import integrate, stats

from .errors import BoundaryAmbiguous, ConfigError, DomainError
from .liouville_constants import LiouvilleParams

__all__ = [
    "MobiusMap",
    "HaarWindow",
    "mobius_fixing",
    "rotation_about_i",
    "haar_sample",
    "haar_sample_points",
    "surround_weight",
    "surround_exponent",
    "point_in_polygon",
    "joint_density_cell_mass",
    "HaarChi2Result",
    "haar_chi2_check",
]

SeedLike = Union[int, np.random.Generator, None]


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b)/(c z + d) with real coefficients and ad - bc = 1."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if not det > 0:
            raise DomainError(f"determinant must be positive, got {det}")
        if det != 1.0:
            s = 1.0 / math.sqrt(det)
            object.__setattr__(self, "a", self.a * s)
            object.__setattr__(self, "b", self.b * s)
            object.__setattr__(self, "c", self.c * s)
            object.__setattr__(self, "d", self.d * s)

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1.0, 0.0, 0.0, 1.0)

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def __call__(self, z):
        return (self.a * z + self.b) / (self.c * z + self.d)

    def derivative(self, z):
        # det = 1 so f'(z) = 1/(cz+d)^2
        return 1.0 / (self.c * z + self.d) ** 2

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self ∘ other."""
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    __matmul__ = compose

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def allclose(self, other: "MobiusMap", tol: float = 1e-12) -> bool:
        # a matrix and its negative give the same map
        m, o = self.matrix(), other.matrix()
        return bool(np.max(np.abs(m - o)) < tol or np.max(np.abs(m + o)) < tol)


def mobius_fixing(p: float, q: complex) -> MobiusMap:
    """The map f with f(0) = p and f(i) = q.

    Built as translation by p after z -> A z/(C z + 1), A = |q-p|^2/Im q,
    C = Re(q-p)/Im q.
    """
    q = complex(q)
    p = float(p)
    if not (q.imag > 0 and math.isfinite(q.imag) and math.isfinite(q.real)):
        raise DomainError(f"q must lie in the open upper half-plane, got {q}")
    if not math.isfinite(p):
        raise DomainError("p must be a finite real")
    u = q - p
    x, y = u.real, u.imag
    A = (x * x + y * y) / y
    C = x / y
    # [[1, p], [0, 1]] @ [[A, 0], [C, 1]]
    f = MobiusMap(A + p * C, p, C, 1.0)
    d0 = f.derivative(0.0).real
    di = abs(f.derivative(1j))
    if abs(di - y) > 1e-12 * max(1.0, y) or abs(d0 - abs(u) ** 2 / y) > 1e-12 * max(1.0, d0):
        raise ArithmeticError("derivative identities failed; input is badly conditioned")
    return f


def rotation_about_i(u: float) -> MobiusMap:
    c, s = math.cos(u), math.sin(u)
    return MobiusMap(c, s, -s, c)


@dataclass(frozen=True)
class HaarWindow:
    t_lo: float = 0.1
    t_hi: float = 10.0
    s_max: float = 10.0

    def __post_init__(self):
        if not (0 < self.t_lo < self.t_hi < math.inf):
            raise ConfigError(f"empty or invalid t window [{self.t_lo}, {self.t_hi}]")
        if not (0 < self.s_max < math.inf):
            raise ConfigError(f"empty or invalid s window, s_max={self.s_max}")


def _haar_params(rng: np.random.Generator, n: int, window: HaarWindow):
    t = np.exp(rng.uniform(math.log(window.t_lo), math.log(window.t_hi), n))
    s = rng.uniform(-window.s_max, window.s_max, n)
    u = rng.uniform(-math.pi / 2, math.pi / 2, n)
    return t, s, u


def haar_sample(rng: SeedLike = None, window: HaarWindow = HaarWindow()) -> MobiusMap:
    """One draw a∘n∘k from Haar measure restricted to the window."""
    rng = np.random.default_rng(rng)
    t, s, u = (float(v[0]) for v in _haar_params(rng, 1, window))
    a = MobiusMap(math.sqrt(t), 0.0, 0.0, 1.0 / math.sqrt(t))
    n = MobiusMap(1.0, s, 0.0, 1.0)
    return a @ n @ rotation_about_i(u)


def haar_sample_points(rng: SeedLike, n: int, window: HaarWindow = HaarWindow()):
    """(f(0), f(i)) for n Haar draws, vectorized.

    f(z) = t (k_u(z) + s), so f(i) = t (s + i) and f(0) = t (tan u + s).
    """
    rng = np.random.default_rng(rng)
    t, s, u = _haar_params(rng, int(n), window)
    return t * (np.tan(u) + s), t * (s + 1j)


def surround_exponent(kappa: float, w: float) -> float:
    """alpha = (rho+2)(2 rho + 8 - kappa)/(2 kappa) with rho = W - 2."""
    rho = w - 2.0
    return (rho + 2.0) * (2.0 * rho + 8.0 - kappa) / (2.0 * kappa)


def surround_weight(params: LiouvilleParams, w: float, p: float, q: complex) -> float:
    """Relative weight of bubbles rooted at p that surround q."""
    q = complex(q)
    if not q.imag > 0:
        raise DomainError(f"q must lie in the open upper half-plane, got {q}")
    k = params.kappa
    e_abs = w - 2.0 * w * (w + 2.0) / k
    e_im = -w / 2.0 + w * (w + 2.0) / k
    return abs(q - p) ** e_abs * q.imag**e_im


def _segment_distance(x, y, px, py):
    """Distance from each polygon segment (x[j], y[j]) -> (x[j+1], y[j+1]) to (px, py)."""
    ax, ay = x[:-1], y[:-1]
    dx, dy = x[1:] - ax, y[1:] - ay
    L2 = dx * dx + dy * dy
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.where(L2 > 0, ((px - ax) * dx + (py - ay) * dy) / L2, 0.0)
    h = np.clip(h, 0.0, 1.0)
    return np.hypot(ax + h * dx - px, ay + h * dy - py)


def point_in_polygon(polyline, q: complex, rel_tol: float = 1e-9) -> bool:
    """Winding-number containment test for a closed polyline.

    The polyline is a sequence of complex vertices; it is closed automatically
    if the last vertex differs from the first.  Raises BoundaryAmbiguous if q
    is within rel_tol * diameter of the curve.
    """
    z = np.asarray(polyline, dtype=complex).ravel()
    if z.size < 3:
        raise DomainError("polygon needs at least 3 vertices")
    if z[0] != z[-1]:
        z = np.append(z, z[0])
    q = complex(q)
    x, y = z.real, z.imag
    diam = max(np.ptp(x), np.ptp(y))
    if np.min(_segment_distance(x, y, q.real, q.imag)) <= rel_tol * diam:
        raise BoundaryAmbiguous(f"{q} lies within tolerance of the polygon")
    # Sunday's winding number: count signed upward/downward crossings left of q
    y0, y1 = y[:-1], y[1:]
    cross = (x[1:] - x[:-1]) * (q.imag - y0) - (q.real - x[:-1]) * (y1 - y0)
    up = (y0 <= q.imag) & (y1 > q.imag) & (cross > 0)
    down = (y0 > q.imag) & (y1 <= q.imag) & (cross < 0)
    return int(np.sum(up) - np.sum(down)) != 0


def _F(v):
    # antiderivative of atan
    return v * np.arctan(v) - 0.5 * np.log1p(v * v)


def joint_density_cell_mass(p_lo, p_hi, x_lo, x_hi, y_lo, y_hi) -> float:
    """Integral of 1/(Im q |p - q|^2) over a box in (p, Re q, Im q).

    The p and Re q integrals are done in closed form, Im q by quadrature.
    """
    def g(y):
        # int dx int dp 1/((p-x)^2 + y^2) = -y [F((p-x)/y)] summed over corners
        tot = (_F((p_hi - x_lo) / y) - _F((p_hi - x_hi) / y)
               - _F((p_lo - x_lo) / y) + _F((p_lo - x_hi) / y))
        return tot / y  # 1/Im q, 1/y from the p integral, y from the x integral

    val = integrate.quad(g, y_lo, y_hi, epsabs=0, epsrel=1e-12, limit=200)[0]
    return float(val)


@dataclass(frozen=True)
class HaarChi2Result:
    chi2: float
    dof: int
    p_value: float
    n_in_region: int
    n_draws: int

    @property
    def passed(self) -> bool:
        return self.p_value > 0.01


def haar_chi2_check(rng: SeedLike, n: int, window: HaarWindow = HaarWindow(),
                    p_range=(-3.0, 3.0), x_range=(-2.0, 2.0), y_range=(0.5, 2.0),
                    bins: int = 5) -> HaarChi2Result:
    """Pearson chi-square of the (f(0), f(i)) histogram against the joint density.

    Counts are taken on a bins^3 grid inside the sampling window and compared to
    the density conditioned on the grid region.
    """
    if not (y_range[0] >= window.t_lo and y_range[1] <= window.t_hi
            and max(abs(x_range[0]), abs(x_range[1])) <= window.s_max * y_range[0]):
        raise ConfigError("histogram region must lie inside the sampling window")
    rng = np.random.default_rng(rng)
    pe = np.linspace(*p_range, bins + 1)
    xe = np.linspace(*x_range, bins + 1)
    ye = np.geomspace(*y_range, bins + 1)
    counts = np.zeros((bins,) * 3)
    chunk = 1 << 18
    done = 0
    while done < n:
        m = min(chunk, n - done)
        f0, fi = haar_sample_points(rng, m, window)
        h, _ = np.histogramdd(np.column_stack([f0, fi.real, fi.imag]), bins=(pe, xe, ye))
        counts += h
        done += m
    mass = np.array([[[joint_density_cell_mass(pe[i], pe[i + 1], xe[j], xe[j + 1], ye[k], ye[k + 1])
                       for k in range(bins)] for j in range(bins)] for i in range(bins)])
    total = counts.sum()
    expected = total * mass / mass.sum()
    chi2 = float(np.sum((counts - expected) ** 2 / expected))
    dof = counts.size - 1
    return HaarChi2Result(chi2, dof, float(stats.chi2.sf(chi2, dof)), int(total), int(n))
