"""Rooted SLE_kappa(rho) bubbles at finite epsilon.

A chordal SLE_kappa(rho) from 0 to infinity with force point 0+ is pushed to
(H; eps -> 0) by M(z) = eps/(1 - z), so M(0) = eps, M(inf) = 0, and the loop
is closed along [0, eps].  A point q is surrounded when it lies inside that
closed loop.

The chordal run uses a geometric capacity grid t_k = t_min (1+dt)^k (``dt``
is a relative step) and vertical slit maps.  Before tracing, the images of
the query points are flowed through the same maps; the sign of
Re(g_T(z) - W_T) tells which side of the curve z ends up on, which lets
attempts that clearly miss q skip the O(N P) trace.  The polygon test on the
traced loop is the final verdict.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np

from .conformal_radius import MCEstimate
from .errors import (BoundaryAmbiguous, DegenerateError, DomainError, ExhaustedError,
                     OrientationError, TailError)
from .liouville_constants import LiouvilleParams
from .loewner_sle import AdaptiveRun, TraceCurve, adaptive_driving, derive_seed, dump_curve, trace
from .mobius_haar import MobiusMap, point_in_polygon

__all__ = [
    "BubbleGrid",
    "BubbleSample",
    "bubble_map",
    "sample_bubble",
    "probe_points",
    "condition_surrounds",
    "iter_surrounding",
    "try_attempt",
    "collect_surrounding",
    "acceptance_counts",
    "surround_ratio_experiment",
    "ratio_from_indicators",
    "write_archive",
]


@dataclass(frozen=True)
class BubbleGrid:
    """Discretization of the pre-Mobius chordal run.

    ``dt`` is the relative capacity step (step = dt * t); steps shrink to
    near * |g_t(z) - W_t|^2 while a watched point z is close to the tip.
    ``tail_frac``: the image of the curve beyond the last traced point must
    fit in a disk of diameter tail_frac * eps around 0.  The horizon is
    extended by factors of 4 (same path prefix) up to ``max_extend`` times.
    """

    dt: float = 4e-3
    t_min: float = 1e-4
    t_max: float = 5.1e3
    near: float = 0.01
    max_points: int = 3000
    tail_frac: float = 0.02
    max_extend: int = 3
    prefilter_margin: float = 0.25 * math.pi

    def __post_init__(self):
        if not (self.dt > 0 and 0 < self.t_min < self.t_max and self.max_points >= 16 and self.near > 0):
            raise DomainError("invalid bubble grid")

    def run(self, kappa: float, rho: float, seed: int, watch, horizon: Optional[float] = None) -> AdaptiveRun:
        return adaptive_driving(kappa, rho, seed, watch, t_min=self.t_min, rel=self.dt,
                                t_max=self.t_max if horizon is None else horizon, near=self.near)


DEFAULT_GRID = BubbleGrid()


def bubble_map(epsilon: float) -> MobiusMap:
    """M(z) = eps/(1 - z)."""
    return MobiusMap(0.0, epsilon, -1.0, 1.0)


@dataclass
class BubbleSample:
    points: np.ndarray          # loop from eps to (near) 0
    epsilon: float
    rho: float
    kappa: float
    seed: int
    enclosed_polygon: np.ndarray
    chordal: TraceCurve = field(repr=False)
    tail_bound: float = 0.0
    surrounds: dict = field(default_factory=dict)
    attempts: int = 1

    def contains(self, q: complex) -> bool:
        q = complex(q)
        if q not in self.surrounds:
            self.surrounds[q] = point_in_polygon(self.enclosed_polygon, q)
        return self.surrounds[q]

    @property
    def rad(self) -> float:
        """Largest distance from the root 0 along the loop."""
        return float(np.max(np.abs(self.points)))


def _tail_bound(eps: float, tip: complex) -> float:
    # diameter of M({|z| > R}) for R = |tip|; the disk |w| < eps R/(R^2-1) roughly
    R = abs(tip)
    if R <= 1.0:
        return math.inf
    return 2.0 * eps * R / (R * R - 1.0)


def _kappa(params) -> float:
    return params.kappa if isinstance(params, LiouvilleParams) else float(params)


def _check_inputs(kappa: float, rho: float, epsilon: float):
    if not 0 < kappa < 4:
        raise DomainError(f"kappa must lie in (0, 4), got {kappa}")
    if not rho > -2:
        raise DomainError(f"rho must exceed -2, got {rho}")
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")


def _chordal(epsilon: float, qs) -> np.ndarray:
    qs = np.asarray(qs, dtype=complex).ravel()
    if np.any(qs.imag <= 0):
        raise DomainError("query points must be interior")
    return 1.0 - epsilon / qs


def sample_bubble(params, rho: float, epsilon: float, rng_seed: int = 0,
                  grid: BubbleGrid = DEFAULT_GRID, watch: Sequence[complex] = ()) -> BubbleSample:
    """One bubble; the chordal time grid is refined near the points in ``watch``."""
    kappa = _kappa(params)
    _check_inputs(kappa, rho, epsilon)
    M = bubble_map(epsilon)
    # the force point 0+ must land on the eps+ side
    if not M(1e-9) > epsilon:
        raise OrientationError("force point image is not to the right of eps")
    z0 = _chordal(epsilon, watch)
    horizon = grid.t_max
    for _ in range(grid.max_extend + 1):
        run = grid.run(kappa, rho, rng_seed, z0, horizon)
        curve = trace(run.driving, mode="vertical", max_points=grid.max_points, dense=run.refined)
        bound = _tail_bound(epsilon, curve.tip)
        if bound <= grid.tail_frac * epsilon:
            break
        horizon *= 4.0
    else:
        raise TailError(f"tail image diameter {bound:.3g} exceeds {grid.tail_frac} * eps")
    pts = M(curve.points)
    # the closing segment runs 0 -> eps along the real line
    poly = np.concatenate([pts, [0.0]])
    return BubbleSample(pts, epsilon, rho, kappa, int(rng_seed), poly, curve, bound)


def probe_points(params, rho: float, epsilon: float, qs: Sequence[complex], rng_seed: int,
                 grid: BubbleGrid = DEFAULT_GRID):
    """Flow M^{-1}(q) through the chain of the attempt with this seed.

    Returns (angle, radius): angle of g_T(z) - W_T in (0, pi), close to pi
    when z ends up left of the curve (q surrounded), and the conformal radius
    of the current domain at q, 2 Im g_T(z)/|g_T'(z)| pushed forward by M.
    The run watches exactly the points qs, so it matches
    ``sample_bubble(..., watch=qs)`` up to t_max.
    """
    kappa = _kappa(params)
    qs = np.asarray(qs, dtype=complex).ravel()
    run = grid.run(kappa, float(rho), rng_seed, _chordal(epsilon, qs))
    # |M'(z0)| = eps/|1 - z0|^2 = |q|^2/eps
    rad = np.exp(run.log_cr) * np.abs(qs) ** 2 / epsilon
    return run.angles, rad


def _attempt_seed(rng_seed: int, attempt: int) -> int:
    return derive_seed(rng_seed, "bubble", attempt)


def _ordered_map(fn, items, threads: int):
    """map in input order; the result does not depend on ``threads``."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def try_attempt(params, rho: float, epsilon: float, q: complex, rng_seed: int, attempt: int,
                grid: BubbleGrid = DEFAULT_GRID) -> Optional[BubbleSample]:
    """The bubble of attempt ``attempt`` if it surrounds q, else None.

    The flow prefilter skips attempts whose image of q ends up clearly to the
    right of the curve; the polygon test decides the rest.  A point within
    tolerance of the polygon counts as not surrounded.
    """
    kappa = _kappa(params)
    seed = _attempt_seed(rng_seed, attempt)
    ang, _ = probe_points(kappa, rho, epsilon, [q], seed, grid)
    if ang[0] < 0.5 * math.pi - grid.prefilter_margin:
        return None
    s = sample_bubble(kappa, rho, epsilon, seed, grid, watch=[q])
    try:
        ok = s.contains(q)
    except BoundaryAmbiguous:
        ok = False
    if not ok:
        return None
    s.attempts = attempt + 1
    return s


def iter_surrounding(params, rho: float, epsilon: float, q: complex, rng_seed: int = 0,
                     max_attempts: int = 10**7, grid: BubbleGrid = DEFAULT_GRID,
                     start: int = 0, threads: int = 1, block: int = 64) -> Iterator[BubbleSample]:
    """Accepted bubbles in attempt order; each carries its attempt index + 1 in ``attempts``.

    With threads > 1, attempts are evaluated in blocks of block * threads and
    yielded in attempt order, so the sequence is the same for any thread count.
    """
    kappa = _kappa(params)
    _check_inputs(kappa, rho, epsilon)
    q = complex(q)
    if not q.imag > 0:
        raise DomainError("q must be interior")
    accepted = 0
    stop = start + max_attempts
    step = block * threads if threads > 1 else 1
    a = start
    while a < stop:
        idx = range(a, min(a + step, stop))
        res = _ordered_map(lambda k: try_attempt(kappa, rho, epsilon, q, rng_seed, k, grid), idx, threads)
        for s in res:
            if s is not None:
                accepted += 1
                yield s
        a = idx.stop
    raise ExhaustedError(f"no further surrounding bubble within {max_attempts} attempts",
                         attempts=max_attempts, accepted=accepted)


def collect_surrounding(params, rho: float, epsilon: float, q: complex, n: int, rng_seed: int = 0,
                        max_attempts: int = 10**7, grid: BubbleGrid = DEFAULT_GRID,
                        threads: int = 1) -> list:
    """The first n surrounding bubbles in attempt order."""
    out = []
    for s in iter_surrounding(params, rho, epsilon, q, rng_seed, max_attempts, grid, threads=threads):
        out.append(s)
        if len(out) == n:
            break
    return out


def condition_surrounds(params, rho: float, epsilon: float, q: complex, rng_seed: int = 0,
                        max_attempts: int = 100000, grid: BubbleGrid = DEFAULT_GRID) -> BubbleSample:
    """First bubble (in attempt order) whose loop surrounds q."""
    s = next(iter_surrounding(params, rho, epsilon, q, rng_seed, max_attempts, grid))
    assert s.contains(q)
    return s


def _classify(kappa, rho, epsilon, qs, seed, grid):
    """Surround verdicts for all qs on one attempt."""
    ang, _ = probe_points(kappa, rho, epsilon, qs, seed, grid)
    thresh = 0.5 * math.pi - grid.prefilter_margin
    out = np.zeros(len(qs), dtype=bool)
    if np.all(ang < thresh):
        return out
    s = sample_bubble(kappa, rho, epsilon, seed, grid, watch=qs)
    for i, q in enumerate(qs):
        if ang[i] >= thresh:
            try:
                out[i] = s.contains(q)
            except BoundaryAmbiguous:
                out[i] = False
    return out


def acceptance_counts(params, rho: float, epsilon: float, qs: Sequence[complex], n_attempts: int,
                      rng_seed: int = 0, grid: BubbleGrid = DEFAULT_GRID, threads: int = 1) -> np.ndarray:
    """Boolean matrix (n_attempts, len(qs)) of surround verdicts on shared bubbles."""
    kappa = _kappa(params)
    _check_inputs(kappa, rho, epsilon)
    qs = [complex(q) for q in qs]
    if any(q.imag <= 0 for q in qs):
        raise DomainError("query points must be interior")
    rows = _ordered_map(lambda a: _classify(kappa, rho, epsilon, qs, _attempt_seed(rng_seed, a), grid),
                        range(int(n_attempts)), threads)
    return np.array(rows, dtype=bool).reshape(int(n_attempts), len(qs))


def ratio_from_indicators(x: np.ndarray, y: np.ndarray, seed: int = 0) -> MCEstimate:
    """mean(x)/mean(y) with a delta-method standard error (shared samples)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    my = y.mean()
    if my == 0:
        raise DegenerateError("denominator count is zero")
    r = x.mean() / my
    if np.array_equal(x, y):
        return MCEstimate(1.0, 0.0, n, seed)
    cov = np.cov(np.vstack([x, y]), ddof=1) if n > 1 else np.zeros((2, 2))
    var = (cov[0, 0] - 2 * r * cov[0, 1] + r * r * cov[1, 1]) / (n * my * my)
    return MCEstimate(float(r), float(math.sqrt(max(var, 0.0))), n, seed)


def surround_ratio_experiment(params, rho: float, epsilon: float, q1: complex, q2: complex,
                              n_samples: int, rng_seed: int = 0,
                              grid: BubbleGrid = DEFAULT_GRID, threads: int = 1) -> MCEstimate:
    """P[surround q1]/P[surround q2] from the same n_samples bubbles."""
    counts = acceptance_counts(params, rho, epsilon, [q1, q2], n_samples, rng_seed, grid, threads)
    return ratio_from_indicators(counts[:, 0], counts[:, 1], rng_seed)


def write_archive(sample: BubbleSample, path_prefix, gamma: float = float("nan")) -> tuple:
    """Binary curve dump plus a JSON sidecar; returns the two paths."""
    prefix = Path(path_prefix)
    bin_path = prefix.with_suffix(".bin")
    json_path = prefix.with_suffix(".json")
    dump_curve(bin_path, sample.chordal, gamma=gamma, kappa=sample.kappa)
    meta = {
        "epsilon": sample.epsilon,
        "rho": sample.rho,
        "kappa": sample.kappa,
        "seed": sample.seed,
        "accepted": bool(any(sample.surrounds.values())),
        "containment": [{"q": [q.real, q.imag], "inside": bool(v)} for q, v in sample.surrounds.items()],
        "tail_bound": sample.tail_bound,
        "attempts": sample.attempts,
    }
    json_path.write_text(json.dumps(meta, indent=2, sort_keys=True))
    return bin_path, json_path
