"""End-to-end experiments shared by the CLI and the acceptance suite.

Every random stream is derived from one master seed with
``derive_seed(master, tag, index)``, so a result can be regenerated from the
seed and the experiment parameters alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .bubble_sampler import DEFAULT_GRID, BubbleGrid, acceptance_counts, iter_surrounding, ratio_from_indicators
from .conformal_radius import (MCEstimate, RadiusSample, adaptive_shell, moment_exponent, moment_pipeline,
                               wos_log_radius)
from .gmc_boundary import (GMCMeasureSpec, first_moment_tail, moment_estimate, second_moment_oracle,
                           second_moment_tail)
from .liouville_constants import (LiouvilleParams, cr_moment_general, cr_moment_general_direct, cr_moment_w2,
                                  cr_moment_w2_corrected, u0_bar)
from .loewner_sle import derive_seed
from .mobius_haar import HaarChi2Result, HaarWindow, haar_chi2_check, surround_weight

__all__ = [
    "CRMomentResult",
    "radius_samples",
    "cr_moment_experiment",
    "cr_exact_values",
    "SurroundResult",
    "surround_experiment",
    "GMCRow",
    "gmc_experiment",
    "constants_table",
    "haar_experiment",
]


def _rho(w: float) -> float:
    return w - 2.0


def cr_exact_values(params: LiouvilleParams, w: float, alphas: Sequence[float]):
    """(closed-form value, corrected value or None) per alpha.

    For w = 2 the closed form is the Gamma-ratio formula and the corrected
    value the Gamma(2a/g - 1) variant; for thin w the closed form is the
    structure-constant ratio.
    """
    if w == 2.0:
        return [cr_moment_w2(params, a) for a in alphas], [cr_moment_w2_corrected(params, a) for a in alphas]
    return [cr_moment_general(params, a, w) for a in alphas], None


def radius_samples(params: LiouvilleParams, w: float, epsilon: float, q: complex, n: int,
                   inner_walks: int = 256, rng_seed: int = 0, grid: BubbleGrid = DEFAULT_GRID,
                   threads: int = 1, max_attempts: int = 10**7):
    """Log conformal radii at q of the first n bubbles surrounding q.

    The shell of each walk is the default 1e-4 * diameter, shrunk to 1% of
    the clearance of q when the loop passes close to q.
    Returns (samples, attempts).
    """
    out = []
    attempts = 0
    if n <= 0:
        return out, attempts
    it = iter_surrounding(params, _rho(w), epsilon, q, rng_seed, max_attempts, grid, threads=threads)
    for b in it:
        poly = b.enclosed_polygon
        shell = adaptive_shell(poly, q)
        out.append(wos_log_radius(poly, q, inner_walks, shell, derive_seed(rng_seed, "wos", len(out))))
        attempts = b.attempts
        if len(out) == n:
            break
    return out, attempts


@dataclass
class CRMomentResult:
    gamma: float
    w: float
    epsilon: float
    q: complex
    alphas: list
    exponents: list
    estimates: list
    exact: list
    corrected: Optional[list]
    n_accepted: int
    attempts: int
    samples: list = field(repr=False, default_factory=list)

    @property
    def acceptance_rate(self) -> float:
        return self.n_accepted / self.attempts if self.attempts else 0.0

    def rows(self) -> list:
        out = []
        for i, a in enumerate(self.alphas):
            e = self.estimates[i]
            row = {"epsilon": self.epsilon, "alpha": a, "p": self.exponents[i], "mc_value": e.value,
                   "mc_se": e.std_error, "exact_value": self.exact[i], "z_score": e.z_score(self.exact[i])}
            if self.corrected is not None:
                row["corrected_value"] = self.corrected[i]
                row["corrected_z_score"] = e.z_score(self.corrected[i])
            out.append(row)
        return out


def cr_moment_experiment(gamma: float, w: float, epsilon: float, alphas: Sequence[float], n_samples: int,
                         q_imag: float = 0.3, inner_walks: int = 256, rng_seed: int = 0,
                         grid: BubbleGrid = DEFAULT_GRID, threads: int = 1, n_boot: int = 1000,
                         samples: Optional[Sequence[RadiusSample]] = None) -> CRMomentResult:
    """MC E[(Rad/2)^{2 Delta_alpha - 2}] for bubbles rooted at 0 surrounding q_imag * i.

    Radii are rescaled by 1/q_imag, which maps the conditioning point to i.
    """
    params = LiouvilleParams(gamma)
    q = complex(0.0, q_imag)
    attempts = 0
    if samples is None:
        samples, attempts = radius_samples(params, w, epsilon, q, n_samples, inner_walks, rng_seed, grid, threads)
    ests = moment_pipeline(params, alphas, samples, derive_seed(rng_seed, "bootstrap", 0), q_scale=q_imag,
                           n_boot=n_boot)
    exact, corrected = cr_exact_values(params, w, alphas)
    return CRMomentResult(gamma, w, epsilon, q, list(alphas), [moment_exponent(params, a) for a in alphas],
                          ests, exact, corrected, len(samples), attempts, list(samples))


@dataclass
class SurroundResult:
    estimate: MCEstimate
    target: float
    q1: complex
    q2: complex
    epsilon: float
    hits: tuple

    @property
    def z_score(self) -> float:
        return self.estimate.z_score(self.target)


def surround_experiment(gamma: float, w: float, epsilon: float, s: float, n_samples: int, rng_seed: int = 0,
                        grid: BubbleGrid = DEFAULT_GRID, threads: int = 1) -> SurroundResult:
    """P[surround 2 s i]/P[surround s i] on shared bubbles, against the surround weight ratio."""
    params = LiouvilleParams(gamma)
    q1, q2 = complex(0, 2 * s), complex(0, s)
    counts = acceptance_counts(params, _rho(w), epsilon, [q1, q2], n_samples, rng_seed, grid, threads)
    est = ratio_from_indicators(counts[:, 0], counts[:, 1], rng_seed)
    target = surround_weight(params, w, 0.0, q1) / surround_weight(params, w, 0.0, q2)
    return SurroundResult(est, target, q1, q2, epsilon, (int(counts[:, 0].sum()), int(counts[:, 1].sum())))


@dataclass
class GMCRow:
    gamma: float
    alpha: float
    p: float
    mc_value: float
    mc_se: float
    oracle_value: float
    closed_form_value: float
    tail_bound: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def gmc_experiment(gamma: float, alpha: float, ps: Sequence[float], n_samples: int, rng_seed: int = 0,
                   n_grid: int = 1024, L: float = 50.0) -> list:
    """E[mass^p] for each p with the available oracles.

    oracle_value: int_{-L}^{L} w for p = 1, the double-quadrature second
    moment on [-L, L]^2 for p = 2, NaN otherwise.  closed_form_value:
    u0_bar(alpha) when p = (2/gamma)(Q - alpha), NaN otherwise.  tail_bound:
    the part of the full-line moment outside [-L, L] (p = 1, 2).
    """
    spec = GMCMeasureSpec(gamma, alpha)
    params = LiouvilleParams(gamma)
    rows = []
    for k, p in enumerate(ps):
        m = moment_estimate(spec, p, n_samples, derive_seed(rng_seed, "gmc", k), n_grid, L)
        oracle, tail = math.nan, math.nan
        if p == 1:
            tail = first_moment_tail(spec, L)
            oracle = integrate.quad(lambda x: float(spec.weight(x)), -L, L, points=[-1.0, 0.0, 1.0],
                                    limit=400, epsabs=0, epsrel=1e-12)[0]
        elif p == 2 and gamma < math.sqrt(2.0):
            oracle = second_moment_oracle(spec, L)
            tail = second_moment_tail(spec, L)
        closed = math.nan
        if abs(p - spec.u0_exponent()) < 1e-12 and alpha > gamma / 2:
            closed = u0_bar(params, alpha)
        rows.append(GMCRow(gamma, alpha, float(p), m.value, m.std_error, oracle, closed, tail))
    return rows


def constants_table(gamma: float, w: float, alphas: Sequence[float]) -> list:
    """Closed-form moment table over an alpha grid (w = 2 or thin w)."""
    params = LiouvilleParams(gamma)
    exact, corrected = cr_exact_values(params, w, alphas)
    rows = []
    for i, a in enumerate(alphas):
        row = {"alpha": a, "p": moment_exponent(params, a), "value": exact[i]}
        if corrected is not None:
            row["corrected_value"] = corrected[i]
        else:
            row["direct_value"] = 1.0 if a == gamma else cr_moment_general_direct(params, a, w)
        rows.append(row)
    return rows


def haar_experiment(n_draws: int, rng_seed: int = 0, window: HaarWindow = HaarWindow()) -> HaarChi2Result:
    return haar_chi2_check(np.random.default_rng(derive_seed(rng_seed, "haar", 0)), n_draws, window)
