"""Conformal radius by walk-on-spheres and the moment pipeline.

For a bounded simply connected domain D and z in D,
log Rad(D, z) = E_z[log |B_exit - z|], the harmonic measure average of the
log distance.  Walks stop once they are within ``shell`` of the boundary and
report the nearest boundary point as the exit.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numba as nb
import numpy as np

from .errors import BiasError, ClearanceError, DomainError, NonconvergenceError
from .liouville_constants import LiouvilleParams, scaling_dimension
from .mobius_haar import point_in_polygon

__all__ = [
    "MCEstimate",
    "RadiusSample",
    "wos_log_radius",
    "psi_prime_abs",
    "moment_exponent",
    "moment_pipeline",
    "write_moment_csv",
    "polygon_distance",
    "adaptive_shell",
]

DEFAULT_SHELL_FRAC = 1e-4
DEFAULT_STEP_BUDGET = 100000


@dataclass(frozen=True)
class MCEstimate:
    value: float
    std_error: float
    n: int
    seed: int = 0

    def __post_init__(self):
        if not self.std_error >= 0:
            raise DomainError("std_error must be nonnegative")
        if self.n < 1:
            raise DomainError("n must be at least 1")

    def z_score(self, target: float) -> float:
        if self.std_error == 0:
            return 0.0 if self.value == target else math.copysign(math.inf, self.value - target)
        return (self.value - target) / self.std_error


@dataclass(frozen=True)
class RadiusSample:
    log_radius_mean: float
    log_radius_se: float
    inner_walks: int
    bubble_seed: int = 0

    def __post_init__(self):
        if self.inner_walks < 64:
            raise DomainError("inner_walks must be at least 64")
        if not math.isfinite(self.log_radius_se):
            raise DomainError("log_radius_se must be finite")


@nb.njit(cache=True)
def _nearest(x, y, px, py):
    best = np.inf
    bx = 0.0
    by = 0.0
    for j in range(x.shape[0] - 1):
        ax, ay = x[j], y[j]
        dx, dy = x[j + 1] - ax, y[j + 1] - ay
        L2 = dx * dx + dy * dy
        h = 0.0
        if L2 > 0.0:
            h = ((px - ax) * dx + (py - ay) * dy) / L2
            if h < 0.0:
                h = 0.0
            elif h > 1.0:
                h = 1.0
        cx = ax + h * dx - px
        cy = ay + h * dy - py
        d2 = cx * cx + cy * cy
        if d2 < best:
            best = d2
            bx = ax + h * dx
            by = ay + h * dy
    return math.sqrt(best), bx, by


@nb.njit(cache=True, nogil=True)
def _wos_kernel(x, y, cx, cy, n_walks, shell, budget, seed):
    np.random.seed(seed)
    out = np.empty(n_walks)
    for k in range(n_walks):
        px, py = cx, cy
        steps = 0
        while True:
            d, bx, by = _nearest(x, y, px, py)
            if d < shell:
                out[k] = 0.5 * math.log((bx - cx) ** 2 + (by - cy) ** 2)
                break
            th = 2.0 * math.pi * np.random.random()
            px += d * math.cos(th)
            py += d * math.sin(th)
            steps += 1
            if steps > budget:
                return out, k
    return out, -1


def _closed(polygon) -> np.ndarray:
    z = np.asarray(polygon, dtype=complex).ravel()
    if z.size < 3:
        raise DomainError("polygon needs at least 3 vertices")
    if z[0] != z[-1]:
        z = np.append(z, z[0])
    return z


def polygon_distance(polygon, point: complex) -> float:
    z = _closed(polygon)
    p = complex(point)
    return float(_nearest(np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag), p.real, p.imag)[0])


def wos_log_radius(polygon, center: complex, n_walks: int = 256, shell: Optional[float] = None,
                   rng_seed: int = 0, step_budget: int = DEFAULT_STEP_BUDGET) -> RadiusSample:
    """Mean and standard error of log|exit - center| over n_walks walks."""
    z = _closed(polygon)
    c = complex(center)
    x = np.ascontiguousarray(z.real)
    y = np.ascontiguousarray(z.imag)
    if shell is None:
        shell = DEFAULT_SHELL_FRAC * max(np.ptp(x), np.ptp(y))
    if not shell > 0:
        raise DomainError("shell must be positive")
    d0 = _nearest(x, y, c.real, c.imag)[0]
    if d0 <= 10.0 * shell or not point_in_polygon(z, c):
        raise ClearanceError(f"center {c} needs clearance > 10 * shell inside the polygon (distance {d0:.3g})")
    vals, fail = _wos_kernel(x, y, c.real, c.imag, int(n_walks), float(shell), int(step_budget),
                             int(rng_seed) & 0xFFFFFFFF)
    if fail >= 0:
        raise NonconvergenceError(f"walk {fail} exceeded the step budget {step_budget}")
    mean = float(np.sum(vals) / n_walks)
    se = float(np.std(vals, ddof=1) / math.sqrt(n_walks))
    return RadiusSample(mean, se, int(n_walks), int(rng_seed))


def adaptive_shell(polygon, center: complex, frac: float = DEFAULT_SHELL_FRAC, clearance_frac: float = 0.01) -> float:
    """Default shell, shrunk to clearance_frac * distance(center, polygon) when the center is close."""
    z = _closed(polygon)
    diam = max(np.ptp(z.real), np.ptp(z.imag))
    return min(frac * diam, clearance_frac * polygon_distance(z, center))


def psi_prime_abs(radius: float) -> float:
    """|psi'(i)| from Rad(D, i) = 2 |psi'(i)|."""
    if not radius > 0:
        raise DomainError("radius must be positive")
    return radius / 2.0


def moment_exponent(params: LiouvilleParams, alpha: float) -> float:
    if alpha == params.gamma:
        # 2 Delta_gamma = 2 exactly; avoid rounding in Q
        return 0.0
    return 2.0 * scaling_dimension(params, alpha) - 2.0


def moment_pipeline(params: LiouvilleParams, alpha_list: Sequence[float], samples: Sequence[RadiusSample],
                    rng_seed: int = 0, q_scale: float = 1.0, n_boot: int = 1000,
                    bias_limit: float = 0.1) -> list:
    """E[(Rad/2)^p], p = 2 Delta_alpha - 2, for each alpha.

    Radii are divided by q_scale (conditioning point q_scale * i mapped to i).
    Each bubble contributes exp(p (m - log 2q) - p^2 s^2/2), which removes the
    lognormal bias of exponentiating a noisy mean; the outer error is a
    nonparametric bootstrap over bubbles.
    """
    if len(samples) == 0:
        raise DomainError("samples must be nonempty")
    m = np.array([s.log_radius_mean for s in samples]) - math.log(2.0 * q_scale)
    s2 = np.array([s.log_radius_se for s in samples]) ** 2
    rng = np.random.default_rng(rng_seed)
    n = len(samples)
    boot_idx = rng.integers(0, n, size=(n_boot, n)) if n_boot > 0 else None
    out = []
    for alpha in alpha_list:
        p = moment_exponent(params, alpha)
        if p == 0.0:
            out.append(MCEstimate(1.0, 0.0, n, rng_seed))
            continue
        if np.max(p * p * s2) > bias_limit:
            raise BiasError(f"p^2 s^2 = {np.max(p * p * s2):.3g} exceeds {bias_limit} at alpha={alpha}")
        vals = np.exp(p * m - 0.5 * p * p * s2)
        est = float(np.mean(vals))
        if boot_idx is not None:
            se = float(np.std(vals[boot_idx].mean(axis=1), ddof=1))
        else:
            se = float(np.std(vals, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        out.append(MCEstimate(est, se, n, rng_seed))
    return out


def write_moment_csv(path, params: LiouvilleParams, alpha_list: Sequence[float], estimates: Sequence[MCEstimate],
                     exact_values: Sequence[float]) -> None:
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["alpha", "p", "mc_value", "mc_se", "exact_value", "z_score"])
        for a, e, x in zip(alpha_list, estimates, exact_values):
            wr.writerow([repr(float(a)), repr(moment_exponent(params, a)), repr(e.value), repr(e.std_error),
                         repr(float(x)), repr(e.z_score(x))])
