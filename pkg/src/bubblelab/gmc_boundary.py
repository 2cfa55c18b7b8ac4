"""Boundary Gaussian multiplicative chaos on [-L, L].

The field is the restriction to R of the free-boundary GFF on H normalized to
have mean zero on the unit semicircle,

    G_H(x, y) = 2 log(1/|x - y|) + 2 log|x|_+ + 2 log|y|_+ ,

sampled as cell averages on a grid of intervals.  Cell averages of G_H have
closed forms, so the covariance matrix is exact and the draw is an exact
Gaussian vector via a dense Cholesky factor.  The chaos mass against a
deterministic weight w is

    sum_i exp((gamma/2) h_i - (gamma^2/8) Var h_i) w(x_i) dx_i ,

whose mean is sum_i w(x_i) dx_i for every gamma.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np
from scipy import integrate, linalg

from .conformal_radius import MCEstimate
from .errors import DomainError, FactorizationError, MomentBlowupError, QuadratureError
from .special_functions import QuadratureConfig

__all__ = [
    "BoundaryField",
    "GMCMeasureSpec",
    "GMCMoment",
    "cell_edges",
    "cell_covariance",
    "kernel_g_h",
    "sample_boundary_field",
    "iter_field_batches",
    "gmc_total_mass",
    "gmc_masses",
    "moment_estimate",
    "first_moment_tail",
    "second_moment_oracle",
    "second_moment_tail",
    "discrete_second_moment",
    "write_gmc_csv",
]

MAX_GRID = 4096
MAX_JITTER = 1e-10
DEFAULT_L = 50.0
DEFAULT_GRID = 1024
ORACLE_CFG = QuadratureConfig(abs_tol=1e-12, rel_tol=1e-9, max_subdivisions=400)


def kernel_g_h(x, y):
    """Pointwise G_H on the real line (infinite on the diagonal)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return (-2.0 * np.log(np.abs(x - y)) + 2.0 * np.log(np.maximum(np.abs(x), 1.0))
                + 2.0 * np.log(np.maximum(np.abs(y), 1.0)))


def cell_edges(n_grid: int, L: float) -> np.ndarray:
    if not (isinstance(n_grid, (int, np.integer)) and 1 <= n_grid <= MAX_GRID):
        raise DomainError(f"n_grid must be an integer in [1, {MAX_GRID}], got {n_grid}")
    if not (L >= 10 and math.isfinite(L)):
        raise DomainError(f"L must be at least 10, got {L}")
    return np.linspace(-L, L, int(n_grid) + 1)


def _phi(u):
    # phi'' = log|u|, phi(0) = 0
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    nz = u != 0
    out[nz] = 0.5 * u[nz] ** 2 * np.log(np.abs(u[nz])) - 0.75 * u[nz] ** 2
    return out


def _mean_log_plus(a, b):
    """(1/(b-a)) int_a^b log max(|x|, 1) dx, vectorized."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)

    def J(u):
        # int_1^u log x dx for u >= 1
        return u * np.log(u) - u + 1.0

    pos = np.where(b > 1, J(np.maximum(b, 1)) - J(np.maximum(np.maximum(a, 1), 1)), 0.0)
    neg = np.where(-a > 1, J(np.maximum(-a, 1)) - J(np.maximum(np.maximum(-b, 1), 1)), 0.0)
    return (pos + neg) / (b - a)


def cell_covariance(edges: np.ndarray) -> np.ndarray:
    """Exact cell-averaged G_H for the intervals [edges[i], edges[i+1]]."""
    e = np.asarray(edges, dtype=float)
    a, b = e[:-1], e[1:]
    A, C = a[:, None], a[None, :]
    B, D = b[:, None], b[None, :]
    # int_a^b int_c^d log|x - y| dy dx
    ll = _phi(B - C) - _phi(A - C) - _phi(B - D) + _phi(A - D)
    ll /= (b - a)[:, None] * (b - a)[None, :]
    lp = _mean_log_plus(a, b)
    cov = -2.0 * ll + 2.0 * lp[:, None] + 2.0 * lp[None, :]
    return 0.5 * (cov + cov.T)


@functools.lru_cache(maxsize=8)
def _factor(n_grid: int, L: float):
    edges = cell_edges(n_grid, L)
    cov = cell_covariance(edges)
    for jitter in (0.0, 1e-14, 1e-12, MAX_JITTER):
        try:
            chol = linalg.cholesky(cov + jitter * np.eye(n_grid), lower=True, check_finite=False)
        except linalg.LinAlgError:
            continue
        chol.setflags(write=False)
        return edges, np.diag(cov).copy(), chol, jitter
    raise FactorizationError(f"covariance not positive definite with jitter {MAX_JITTER}")


@dataclass(frozen=True)
class BoundaryField:
    grid: np.ndarray            # cell midpoints
    values: np.ndarray          # cell averages of h
    domain_half_width: float
    seed: int
    widths: np.ndarray
    variances: np.ndarray

    @property
    def n(self) -> int:
        return self.grid.size


def _field_arrays(n_grid, L):
    edges, var, chol, _ = _factor(int(n_grid), float(L))
    return 0.5 * (edges[1:] + edges[:-1]), np.diff(edges), var, chol


def sample_boundary_field(n_grid: int, L: float = DEFAULT_L, rng_seed: int = 0) -> BoundaryField:
    mid, width, var, chol = _field_arrays(n_grid, L)
    rng = np.random.default_rng(rng_seed)
    vals = chol @ rng.standard_normal(mid.size)
    return BoundaryField(mid, vals, float(L), int(rng_seed), width, var)


def iter_field_batches(n_grid: int, L: float, n_samples: int, rng_seed: int = 0,
                       batch: int = 2048) -> Iterator[np.ndarray]:
    """Rows of cell-averaged fields, in batches; same stream for any batch size."""
    _, _, _, chol = _field_arrays(n_grid, L)
    rng = np.random.default_rng(rng_seed)
    done = 0
    while done < n_samples:
        m = min(batch, n_samples - done)
        # row-major draws so a batch boundary does not change the stream
        z = rng.standard_normal((m, chol.shape[0]))
        yield z @ chol.T
        done += m


@dataclass(frozen=True)
class GMCMeasureSpec:
    """Weight |x|_+^e1 |x - i|^e2; defaults to e1 = gamma alpha - 2, e2 = -gamma alpha."""

    gamma: float
    alpha: float
    weight_exponents: Optional[tuple] = None

    def __post_init__(self):
        if not 0 < self.gamma < 2:
            raise DomainError(f"gamma must lie in (0, 2), got {self.gamma}")
        if self.weight_exponents is None:
            ga = self.gamma * self.alpha
            object.__setattr__(self, "weight_exponents", (ga - 2.0, -ga))
        e1, e2 = self.weight_exponents
        if not e1 + e2 < -1:
            raise DomainError("weight is not integrable at infinity")

    @property
    def Q(self) -> float:
        return 2.0 / self.gamma + self.gamma / 2.0

    def u0_exponent(self) -> float:
        """(2/gamma)(Q - alpha)."""
        return (2.0 / self.gamma) * (self.Q - self.alpha)

    def weight(self, x):
        e1, e2 = self.weight_exponents
        x = np.asarray(x, dtype=float)
        return np.maximum(np.abs(x), 1.0) ** e1 * np.hypot(x, 1.0) ** e2


def gmc_total_mass(field: BoundaryField, spec: GMCMeasureSpec) -> float:
    g = spec.gamma
    dens = np.exp(0.5 * g * field.values - g * g / 8.0 * field.variances)
    return float(np.sum(dens * spec.weight(field.grid) * field.widths))


def gmc_masses(spec: GMCMeasureSpec, n_samples: int, n_grid: int = DEFAULT_GRID, L: float = DEFAULT_L,
               rng_seed: int = 0) -> np.ndarray:
    """Total masses of n_samples independent fields."""
    mid, width, var, _ = _field_arrays(n_grid, L)
    g = spec.gamma
    wdx = spec.weight(mid) * width * np.exp(-g * g / 8.0 * var)
    out = np.empty(int(n_samples))
    k = 0
    for h in iter_field_batches(n_grid, L, int(n_samples), rng_seed):
        out[k:k + h.shape[0]] = np.exp(0.5 * g * h) @ wdx
        k += h.shape[0]
    return out


def first_moment_tail(spec: GMCMeasureSpec, L: float) -> float:
    """int_{|x| > L} w(x) dx."""
    f = lambda x: float(spec.weight(x))
    val, err = integrate.quad(f, L, math.inf, epsabs=1e-14, epsrel=1e-12, limit=200)
    if not err < 1e-8 * max(1.0, abs(val)) + 1e-12:
        raise QuadratureError("tail quadrature did not converge")
    return 2.0 * val


@dataclass(frozen=True)
class GMCMoment:
    estimate: MCEstimate
    p: float
    tail_bound: float   # mass outside [-L, L] in the first-moment sense, int_{|x|>L} w

    @property
    def value(self) -> float:
        return self.estimate.value

    @property
    def std_error(self) -> float:
        return self.estimate.std_error


def moment_estimate(spec: GMCMeasureSpec, p: float, n_samples: int, rng_seed: int = 0,
                    n_grid: int = DEFAULT_GRID, L: float = DEFAULT_L, n_boot: int = 500) -> GMCMoment:
    """Empirical E[mass^p] with a bootstrap standard error."""
    g = spec.gamma
    if p >= 4.0 / (g * g):
        raise MomentBlowupError(f"p={p} >= 4/gamma^2 = {4 / g / g}: moment is infinite")
    tail = first_moment_tail(spec, L)
    if p == 0:
        return GMCMoment(MCEstimate(1.0, 0.0, max(int(n_samples), 1), rng_seed), 0.0, tail)
    m = gmc_masses(spec, n_samples, n_grid, L, rng_seed) ** p
    rng = np.random.default_rng([int(rng_seed) & 0xFFFFFFFF, 1])
    n = m.size
    boots = np.array([m[rng.integers(0, n, n)].mean() for _ in range(n_boot)])
    return GMCMoment(MCEstimate(float(m.mean()), float(boots.std(ddof=1)), n, rng_seed), float(p), tail)


def discrete_second_moment(spec: GMCMeasureSpec, n_grid: int = DEFAULT_GRID, L: float = DEFAULT_L) -> float:
    """Exact E[mass^2] of the discretized measure: sum_ij w_i w_j dx_i dx_j e^{(gamma^2/4) C_ij}."""
    edges = cell_edges(n_grid, L)
    cov = cell_covariance(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    wdx = spec.weight(mid) * np.diff(edges)
    return float(wdx @ np.exp(spec.gamma**2 / 4.0 * cov) @ wdx)


def _check_oracle(spec):
    if not spec.gamma < math.sqrt(2.0):
        raise DomainError("second moment oracle needs gamma < sqrt(2)")


def _inner(spec, x, lo, hi, m, cfg):
    """int_lo^hi w(y) e^{(g^2/4) G_H(x,y)} dy with y = x +- s^m (Duffy-type)."""
    g = spec.gamma
    e = g * g / 2.0
    lpx = max(abs(x), 1.0) ** e
    tot = 0.0
    for sgn, umax in ((1.0, hi - x), (-1.0, x - lo)):
        if umax <= 0:
            continue
        smax = umax ** (1.0 / m) if math.isfinite(umax) else math.inf

        def f(s, sgn=sgn):
            y = x + sgn * s**m
            # |x-y|^{-e} dy = m s^{m-1-m e} ds = m ds since m(1-e) = 1
            return m * float(spec.weight(y)) * lpx * max(abs(y), 1.0) ** e

        pts = [abs(b - x) ** (1.0 / m) for b in (-1.0, 0.0, 1.0) if sgn * (b - x) > 0]
        pts = [p for p in pts if 0 < p < smax]
        if math.isfinite(smax):
            val, err = integrate.quad(f, 0.0, smax, points=pts or None, limit=cfg.max_subdivisions,
                                      epsabs=0.0, epsrel=cfg.rel_tol)
        else:
            # finite part up to the last breakpoint, then the semi-infinite tail
            cut = max(pts + [1.0])
            v1, e1 = integrate.quad(f, 0.0, cut, points=pts or None, limit=cfg.max_subdivisions,
                                    epsabs=0.0, epsrel=cfg.rel_tol)
            v2, e2 = integrate.quad(f, cut, math.inf, limit=cfg.max_subdivisions, epsabs=0.0,
                                    epsrel=cfg.rel_tol)
            val, err = v1 + v2, e1 + e2
        if not err <= 1e4 * cfg.rel_tol * abs(val) + cfg.abs_tol:
            raise QuadratureError(f"inner quadrature failed at x={x}")
        tot += val
    return tot


def _outer(spec, lo, hi, cfg):
    m = 1.0 / (1.0 - spec.gamma**2 / 2.0)

    def f(x):
        return float(spec.weight(x)) * _inner(spec, x, lo, hi, m, cfg)

    knots = [lo] + [k for k in (-1.0, 0.0, 1.0) if lo < k < hi] + [hi]
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        val, err = integrate.quad(f, a, b, limit=cfg.max_subdivisions, epsabs=0.0, epsrel=cfg.rel_tol * 10)
        if not err <= 1e4 * cfg.rel_tol * abs(val) + cfg.abs_tol:
            raise QuadratureError(f"outer quadrature failed on [{a}, {b}]")
        total += val
    return total


def _pair_integrand(spec, x, y):
    return float(spec.weight(x) * spec.weight(y) * np.exp(spec.gamma**2 / 4.0 * kernel_g_h(x, y)))


def second_moment_oracle(spec: GMCMeasureSpec, L: float = DEFAULT_L, cfg: QuadratureConfig = ORACLE_CFG) -> float:
    """int int_{[-L, L]^2} w(x) w(y) exp((gamma^2/4) G_H(x, y)) dx dy.

    The inner variable is y = x +- s^m with m = 1/(1 - gamma^2/2), which turns
    |x - y|^{-gamma^2/2} dy into m ds.  L may be math.inf.
    """
    _check_oracle(spec)
    if not L > 0:
        raise DomainError("L must be positive")
    for x, y in ((0.3, -2.0), (1.7, 0.2), (-0.9, 5.0)):
        a, b = _pair_integrand(spec, x, y), _pair_integrand(spec, y, x)
        assert abs(a - b) <= 1e-12 * abs(a), "integrand is not symmetric"
    return _outer(spec, -L, L, cfg)


def second_moment_tail(spec: GMCMeasureSpec, L: float = DEFAULT_L, cfg: QuadratureConfig = ORACLE_CFG) -> float:
    """Part of the full-line second moment coming from outside [-L, L]^2."""
    return second_moment_oracle(spec, math.inf, cfg) - second_moment_oracle(spec, L, cfg)


def write_gmc_csv(path, rows: Sequence[dict]) -> None:
    cols = ["gamma", "alpha", "p", "mc_value", "mc_se", "oracle_value", "closed_form_value", "tail_bound"]
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(cols)
        for r in rows:
            wr.writerow([repr(float(r.get(c, math.nan))) for c in cols])
