"""Closed-form constants of boundary Liouville theory.

Everything here is a pure function of a :class:`LiouvilleParams` and real
arguments.  Quantities built from products of Gamma-type factors are
assembled in the log domain and exponentiated once at the end.
"""

from __future__ import annotations

import cmath
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import PoleError, QuadratureError, RangeError, RealityError
from .special_functions import (
    DEFAULT_CFG,
    QuadratureConfig,
    log_double_sine,
    log_gamma,
    log_gamma_b,
)

__all__ = [
    "LiouvilleParams",
    "InsertionSpec",
    "CosmologicalPair",
    "beta_of_weight",
    "weight_of_beta",
    "scaling_dimension",
    "reflection_bar",
    "reflection",
    "structure_g_bar",
    "u_fzz",
    "fzz_s",
    "u0_bar",
    "disk2_joint_density",
    "thin_disk_laplace",
    "lf_length_density",
    "lf_laplace",
    "cr_moment_w2",
    "cr_moment_w2_from_structure",
    "cr_moment_w2_corrected",
    "cr_renormalized",
    "cr_moment_general",
    "cr_moment_general_direct",
    "reflection_integral",
    "seiberg_check",
    "bulk_boundary_assemble",
]

_REALITY_TOL = 1e-8


@dataclass(frozen=True)
class LiouvilleParams:
    """Coupling triple. Only ``gamma`` is free; Q and kappa are derived."""

    gamma: float
    q_coef: float = field(init=False)
    kappa: float = field(init=False)

    def __post_init__(self):
        g = float(self.gamma)
        if not (0.0 < g < 2.0):
            raise RangeError(f"gamma must lie in (0, 2), got {g}")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "q_coef", 2.0 / g + g / 2.0)
        object.__setattr__(self, "kappa", g * g)

    @classmethod
    def from_kappa(cls, kappa: float) -> "LiouvilleParams":
        return cls(math.sqrt(kappa))

    @property
    def Q(self) -> float:
        return self.q_coef


def beta_of_weight(params: LiouvilleParams, w: float) -> float:
    """beta_W = gamma + (2 - W)/gamma."""
    return params.gamma + (2.0 - w) / params.gamma


def weight_of_beta(params: LiouvilleParams, beta: float) -> float:
    return params.gamma * (params.gamma - beta) + 2.0


def scaling_dimension(params: LiouvilleParams, alpha: float) -> float:
    return 0.5 * alpha * (params.q_coef - 0.5 * alpha)


@dataclass(frozen=True)
class InsertionSpec:
    alpha: float
    beta: float
    disk_weight: float
    dim: float

    @classmethod
    def from_weight(cls, params: LiouvilleParams, w: float, alpha: float) -> "InsertionSpec":
        return cls(alpha, beta_of_weight(params, w), w, scaling_dimension(params, alpha))


@dataclass(frozen=True)
class CosmologicalPair:
    """Boundary cosmological constants and their sigma parameters.

    ``sigma_j = Q/2 - i log(mu_j)/(pi gamma)``.  A zero mu is represented by
    ``Q/2 + i*inf``, the limit of that expression.
    """

    mu1: float
    mu2: float
    sigma1: complex
    sigma2: complex

    @classmethod
    def from_mus(cls, params: LiouvilleParams, mu1: float, mu2: float) -> "CosmologicalPair":
        mu1, mu2 = float(mu1), float(mu2)
        if mu1 < 0 or mu2 < 0 or not (math.isfinite(mu1) and math.isfinite(mu2)):
            raise RangeError("cosmological constants must be finite and nonnegative")
        if mu1 == 0 and mu2 == 0:
            raise RangeError("mu1 and mu2 cannot both vanish")
        return cls(mu1, mu2, _sigma(params, mu1), _sigma(params, mu2))


def _sigma(params: LiouvilleParams, mu: float) -> complex:
    if mu == 0:
        return complex(params.q_coef / 2, math.inf)
    return complex(params.q_coef / 2, -math.log(mu) / (math.pi * params.gamma))


def _as_pair(params, cosm) -> CosmologicalPair:
    if isinstance(cosm, CosmologicalPair):
        return cosm
    return CosmologicalPair.from_mus(params, *cosm)


def _lgamma(x: float) -> float:
    """log|Gamma(x)|, raising PoleError at the poles."""
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma pole at {x}")
    return float(special.gammaln(x))


def _gamma_sign(x: float) -> float:
    return float(special.gammasgn(x))


# ---------------------------------------------------------------------------
# reflection coefficient


@functools.lru_cache(maxsize=4096)
def _log_rbar_static(gamma: float, beta: float, cfg: QuadratureConfig) -> complex:
    """mu-independent part of log Rbar."""
    p = LiouvilleParams(gamma)
    Q = p.q_coef
    b = gamma / 2
    e = (2 / gamma) * (Q - beta)
    if beta == Q:
        raise PoleError("Rbar has a pole at beta = Q")
    pref = ((e - 0.5) * math.log(2 * math.pi)
            + ((gamma / 2) * (Q - beta) - 0.5) * math.log(2 / gamma)
            - cmath.log(Q - beta)
            - e * _lgamma(1 - gamma**2 / 4))
    return pref + log_gamma_b(beta - gamma / 2, b, cfg) - log_gamma_b(Q - beta, b, cfg)


def _log_rbar(params: LiouvilleParams, beta: float, mu1: float, mu2: float,
              cfg: QuadratureConfig) -> complex:
    g, Q = params.gamma, params.q_coef
    b = g / 2
    base = _log_rbar_static(g, float(beta), cfg)
    if mu1 == 0 or mu2 == 0:
        # One-sided limit: the double sine pair grows like
        # exp(pi |y| (beta - Q)) and cancels the phase exactly.
        mu = mu1 if mu2 == 0 else mu2
        return base + (2 / g) * (Q - beta) * math.log(mu)
    y = (math.log(mu1) - math.log(mu2)) / (math.pi * g)  # sigma2 - sigma1 = i y
    s1 = Q / 2 - 1j * math.log(mu1) / (math.pi * g)
    s2 = Q / 2 - 1j * math.log(mu2) / (math.pi * g)
    phase = 1j * math.pi * (s1 + s2 - Q) * (Q - beta)
    return (base + phase
            - log_double_sine(beta / 2 + 1j * y, b, cfg)
            - log_double_sine(beta / 2 - 1j * y, b, cfg))


def _real_exp(lv: complex, what: str) -> float:
    val = cmath.exp(lv)
    if abs(val.imag) >= _REALITY_TOL * abs(val):
        raise RealityError(f"{what}: imaginary part {val.imag:.3g} vs value {val.real:.3g}")
    return val.real


def reflection_bar(params: LiouvilleParams, beta: float, cosm, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """Rbar(beta, mu1, mu2).  ``cosm`` is a CosmologicalPair or a (mu1, mu2) tuple."""
    c = _as_pair(params, cosm)
    return _real_exp(_log_rbar(params, beta, c.mu1, c.mu2, cfg), "reflection_bar")


def reflection(params: LiouvilleParams, beta: float, cosm, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """R = -Gamma(1 - (2/gamma)(Q - beta)) Rbar."""
    x = 1 - (2 / params.gamma) * (params.q_coef - beta)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"Gamma pole at {x}")
    return -float(special.gamma(x)) * reflection_bar(params, beta, cosm, cfg)


def thin_disk_laplace(params: LiouvilleParams, w: float, mu1: float, mu2: float,
                      cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """Laplace transform of left/right lengths of a thin weight-w disk."""
    if not (0 < w < params.kappa / 2):
        raise RangeError(f"thin regime needs 0 < w < gamma^2/2, got {w}")
    beta = beta_of_weight(params, w)
    val = -params.gamma / (2 * (beta - params.q_coef)) * reflection(params, beta, (mu1, mu2), cfg)
    if not val > 0:
        raise RealityError(f"thin-disk Laplace transform is not positive: {val}")
    return val


# ---------------------------------------------------------------------------
# bulk-boundary structure constant


def _check_g_range(params, alpha, beta, continuation):
    Q, g = params.q_coef, params.gamma
    ok = beta < Q and g / 2 - alpha < beta / 2 < alpha
    if not ok and not continuation:
        raise RangeError(f"structure constant outside its range at alpha={alpha}, beta={beta}")


def _log_g_bar(params: LiouvilleParams, alpha: float, beta: float, cfg) -> complex:
    g, Q = params.gamma, params.q_coef
    b = g / 2
    e = (2 / g) * (Q - alpha - beta / 2)
    base = (g / 2) * (beta / 2 - alpha) * math.log(2) + math.log(2 * math.pi) - _lgamma(1 - g * g / 4)
    lq = log_gamma_b(Q - beta / 2, b, cfg)
    num = (log_gamma(g * alpha / 2 + g * beta / 4 - g * g / 4)
           + log_gamma_b(alpha - beta / 2, b, cfg)
           + log_gamma_b(alpha + beta / 2, b, cfg)
           + 2 * lq)
    den = lq + 2 * log_gamma_b(alpha, b, cfg) + log_gamma_b(Q, b, cfg)
    return e * base + num - den


def structure_g_bar(params: LiouvilleParams, alpha: float, beta: float,
                    cfg: QuadratureConfig = DEFAULT_CFG, continuation: bool = False) -> float:
    """Gbar(alpha, beta), the mu = 0 bulk-boundary constant."""
    _check_g_range(params, alpha, beta, continuation)
    return _real_exp(_log_g_bar(params, alpha, beta, cfg), "structure_g_bar")


# ---------------------------------------------------------------------------
# one-point bulk constants


def fzz_s(params: LiouvilleParams, mu: float, mu_b: float) -> complex:
    """Solve cos(pi gamma s / 2) = (mu_b / sqrt(mu)) sqrt(sin(pi gamma^2 / 4)).

    Returns s in [0, 1/gamma] when the right side is at most 1, otherwise a
    purely imaginary s with nonnegative imaginary part.
    """
    g = params.gamma
    c = mu_b / math.sqrt(mu) * math.sqrt(math.sin(math.pi * g * g / 4))
    if c <= 1.0:
        return complex(2 / (math.pi * g) * math.acos(c), 0.0)
    return complex(0.0, 2 / (math.pi * g) * math.acosh(c))


def u_fzz(params: LiouvilleParams, alpha: float, mu: float, mu_b: float) -> float:
    g, Q = params.gamma, params.q_coef
    if not (2 / g < alpha < Q):
        raise RangeError(f"u_fzz needs 2/gamma < alpha < Q, got {alpha}")
    if not (mu > 0 and mu_b >= 0):
        raise RangeError("u_fzz needs mu > 0 and mu_b >= 0")
    s = fzz_s(params, mu, mu_b)
    # cos of a real or purely imaginary argument is real
    trig = math.cos((alpha - Q) * math.pi * s.real) if s.imag == 0 else math.cosh((alpha - Q) * math.pi * s.imag)
    inner = (math.pi * mu / 2 ** (g * alpha)) * math.gamma(g * g / 4) / math.gamma(1 - g * g / 4)
    x2 = 2 * alpha / g - 4 / (g * g) - 1
    lg = (math.log(4 / g) - alpha**2 / 2 * math.log(2) + (Q - alpha) / g * math.log(inner)
          + _lgamma(g * alpha / 2 - g * g / 4) + _lgamma(x2))
    return _gamma_sign(x2) * math.exp(lg) * trig


def u0_bar(params: LiouvilleParams, alpha: float) -> float:
    g, Q = params.gamma, params.q_coef
    if not alpha > g / 2:
        raise RangeError(f"u0_bar needs alpha > gamma/2, got {alpha}")
    e = (2 / g) * (Q - alpha)
    base = -g * alpha / 2 * math.log(2) + math.log(2 * math.pi) - _lgamma(1 - g * g / 4)
    return math.exp(e * base + _lgamma(g * alpha / 2 - g * g / 4))


# ---------------------------------------------------------------------------
# boundary length laws


def disk2_joint_density(params: LiouvilleParams, l: float, r: float) -> float:
    """Joint density of left/right lengths of the weight-2 disk."""
    g = params.gamma
    if not (l > 0 and r > 0):
        raise RangeError("lengths must be positive")
    a = 4 / (g * g)
    lg = ((a - 1) * math.log(2 * math.pi) - math.log(1 - g * g / 4)
          - a * _lgamma(1 - g * g / 4) - (a + 1) * math.log(l + r))
    return math.exp(lg)


def _lf_prefactor(params, alpha, beta, q) -> float:
    q = complex(q)
    if not q.imag > 0:
        raise RangeError("q must lie in the upper half-plane")
    db = scaling_dimension(params, beta)
    da = scaling_dimension(params, alpha)
    return abs(q) ** (-2 * db) * q.imag ** (db - 2 * da) * 2 ** (-alpha**2 / 2) * (2 / params.gamma)


def lf_length_density(params: LiouvilleParams, alpha: float, beta: float, q, l: float,
                      cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """Density in the boundary length l of the one-bulk one-boundary field."""
    _check_g_range(params, alpha, beta, False)
    if not l > 0:
        raise RangeError("length must be positive")
    g, Q = params.gamma, params.q_coef
    expo = (2 / g) * (beta / 2 + alpha - Q) - 1
    return _lf_prefactor(params, alpha, beta, q) * l**expo * structure_g_bar(params, alpha, beta, cfg)


def lf_laplace(params: LiouvilleParams, alpha: float, beta: float, q, mu: float,
               cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    g, Q = params.gamma, params.q_coef
    if not (beta < Q and Q - alpha < beta / 2 < alpha):
        raise RangeError(f"lf_laplace outside its range at alpha={alpha}, beta={beta}")
    if not mu > 0:
        raise RangeError("mu must be positive")
    x = (2 / g) * (beta / 2 + alpha - Q)
    return (_lf_prefactor(params, alpha, beta, q) * structure_g_bar(params, alpha, beta, cfg)
            * mu ** (-x) * math.gamma(x))


# ---------------------------------------------------------------------------
# conformal-radius moments


def _check_w2(params, alpha):
    g, Q = params.gamma, params.q_coef
    if not (g / 2 < alpha < Q + 2 / g):
        raise RangeError(f"alpha={alpha} outside (gamma/2, Q + 2/gamma)")


def cr_moment_w2(params: LiouvilleParams, alpha: float) -> float:
    """Gamma(2a/g) Gamma(8/k - 2a/g + 1) / Gamma(8/k - 1)."""
    _check_w2(params, alpha)
    k = params.kappa
    x = 2 * alpha / params.gamma
    return math.exp(_lgamma(x) + _lgamma(8 / k - x + 1) - _lgamma(8 / k - 1))


def cr_moment_w2_corrected(params: LiouvilleParams, alpha: float) -> float:
    """Gamma(2a/g - 1) Gamma(8/k - 2a/g + 1) / Gamma(8/k - 1).

    The ratio CR_2(alpha)/CR_2(gamma) obtained by evaluating the structure
    constants and the weight-2 length law; see
    :func:`cr_moment_w2_from_structure` for the same quantity computed from
    double gamma functions.  Same alpha range as :func:`cr_moment_w2`.
    """
    _check_w2(params, alpha)
    g, k = params.gamma, params.kappa
    x = 2 * alpha / g
    return math.exp(_lgamma(x - 1) + _lgamma(8 / k - x + 1) - _lgamma(8 / k - 1))


def _log_cr2(params, alpha, cfg) -> float:
    g, Q, k = params.gamma, params.q_coef, params.kappa
    lg = (_log_g_bar(params, alpha, g, cfg) - _log_g_bar(params, alpha, g - 4 / g, cfg)).real
    x = 2 * alpha / g
    # Beta integral of r^{2a/g} against the weight-2 length law
    lb = _lgamma(x - 4 / k) + _lgamma(8 / k - x + 1) - _lgamma(4 / k + 1)
    return lg + lb


def cr_moment_w2_from_structure(params: LiouvilleParams, alpha: float,
                                cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """CR_2(alpha)/CR_2(gamma) with the structure constants evaluated numerically.

    Needs max(gamma/2, 2/gamma) < alpha < Q + 2/gamma, where both structure
    constants are in range.
    """
    g, Q = params.gamma, params.q_coef
    if not (max(g / 2, 2 / g) < alpha < Q + 2 / g):
        raise RangeError(f"alpha={alpha} outside (max(gamma/2, 2/gamma), Q + 2/gamma)")
    return math.exp(_log_cr2(params, alpha, cfg) - _log_cr2(params, g, cfg))


def _cr_range(params, alpha, w, continuation):
    g, Q = params.gamma, params.q_coef
    if not (0 < w < params.kappa / 2):
        raise RangeError(f"w={w} is not in the thin regime (0, gamma^2/2)")
    b2 = g - 2 * w / g
    upper = Q + g / 2
    lower = Q - b2 / 2
    if lower < alpha < upper:
        return
    if continuation and g / 2 < alpha < upper:
        x = (2 / g) * (alpha - (w + 2) / g)
        # the Gamma factor continues with positive sign on (-2n-2, -2n-1)
        if x > 0 or (math.floor(x) % 2 == 0 and x != math.floor(x)):
            return
        raise RangeError(f"alpha={alpha}: continued Gamma argument {x} not in an admissible interval")
    raise RangeError(f"alpha={alpha} outside ({lower}, {upper})")


@functools.lru_cache(maxsize=200_000)
def _refl_line(gamma: float, beta: float, mu1: float, cfg: QuadratureConfig) -> float:
    """F(mu1) = R(beta; mu1, 1), memoized since the integrals reuse nodes."""
    return reflection(LiouvilleParams(gamma), beta, (mu1, 1.0), cfg)


def _d_refl_line(gamma, beta, mu1, cfg, rel=1e-2):
    """dF/dmu1 by central differences with relative step and one Richardson step."""
    h = rel * mu1

    def cd(hh):
        return (_refl_line(gamma, beta, mu1 + hh, cfg) - _refl_line(gamma, beta, mu1 - hh, cfg)) / (2 * hh)

    return (4 * cd(h / 2) - cd(h)) / 3


def _series_exponents(kappa: float) -> tuple:
    """Exponents of the expansion of F at 0 beyond the constant term.

    Integer powers plus the non-analytic powers 4/kappa and 4/kappa + 1; a
    non-integer power within 0.02 of an integer one is dropped.
    """
    exps = [1.0, 2.0, 3.0]
    for e in (4 / kappa, 4 / kappa + 1):
        if e < 4.0 and min(abs(e - k) for k in exps) > 0.02:
            exps.append(e)
    return tuple(sorted(exps))


@functools.lru_cache(maxsize=256)
def _refl_series(gamma: float, beta: float, cfg: QuadratureConfig, lo: float, hi: float,
                 n: int) -> tuple:
    """Expansion F(nu) ~ F0 + sum_p c_p nu^p at nu = 0 as ((0, F0), (p, c_p), ...).

    F0 is the one-sided closed form; the c_p come from a least-squares fit
    of F - F0 on n geometric nodes in [lo, hi].
    """
    f0 = _refl_line(gamma, beta, 0.0, cfg)
    exps = _series_exponents(gamma * gamma)
    nodes = np.geomspace(lo, hi, n)
    vals = np.array([(_refl_line(gamma, beta, float(v), cfg) - f0) / v for v in nodes])
    A = np.column_stack([nodes ** (p - 1) for p in exps])
    coef = np.linalg.lstsq(A, vals, rcond=None)[0]
    return ((0.0, f0),) + tuple((p, float(c)) for p, c in zip(exps, coef))


def _check_mellin_poles(a, e0, terms):
    for p, _ in terms:
        if abs(a + e0 - p) < 1e-9 or abs(a + p) < 1e-9:
            raise PoleError(f"reflection integral continuation has a pole at exponent {p}")


def _quad(f, lo, hi, cfg, what):
    val, err, info = integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=max(cfg.rel_tol, 1e-10),
                                    limit=int(cfg.max_subdivisions), full_output=1)[:3]
    if not math.isfinite(val) or err > 1e-8 * max(abs(val), 1e-6):
        raise QuadratureError(f"{what}: err {err:.3g} on value {val:.6g}")
    return val


_SERIES_CUT = 1e-2


@functools.lru_cache(maxsize=256)
def _reflection_integral_split(gamma: float, w: float, a: float, cfg: QuadratureConfig) -> float:
    """int_0^inf mu^a F'(mu) dmu, split at mu = 1 with mu -> 1/u on the tail.

    Homogeneity and mu1 <-> mu2 symmetry give F(1/u) = u^{-e0} F(u) with
    e0 = (2/gamma)(Q - beta), so the tail becomes an integral over (0, 1) of
    F itself.  The F0 and F1 terms of the Taylor series at 0 are integrated
    in closed form, which continues the integral analytically in a whenever
    the plain integral diverges at infinity.  Below mu = 1e-2 the series is
    used in place of the finite differences, which lose accuracy there.
    """
    params = LiouvilleParams(gamma)
    beta = beta_of_weight(params, w)
    e0 = (2 / gamma) * (params.q_coef - beta)
    terms = _refl_series(gamma, beta, cfg, 1e-4, 2e-2, 25)
    _check_mellin_poles(a, e0, terms)
    f0, f1 = terms[0][1], terms[1][1]
    c = _SERIES_CUT

    # (0, 1)
    head = sum(p * cp * c ** (a + p) / (a + p) for p, cp in terms[1:])
    head += _quad(lambda m: m**a * _d_refl_line(gamma, beta, m, cfg), c, 1.0, cfg,
                  "reflection integral on (0, 1)")

    # (1, inf) after the fold
    def g(v):
        G = _refl_line(gamma, beta, v, cfg) - f0 - f1 * v
        dG = _d_refl_line(gamma, beta, v, cfg) - f1
        return e0 * v ** (-a - e0 - 1) * G - v ** (-a - e0) * dG

    tail = sum((e0 - p) * cp * c ** (p - a - e0) / (p - a - e0) for p, cp in terms[2:])
    tail += _quad(g, c, 1.0, cfg, "reflection integral on (1, inf)")
    tail += e0 * f0 / (-a - e0) + (e0 - 1) * f1 / (1 - a - e0)
    return head + tail


def reflection_integral(params: LiouvilleParams, alpha: float, w: float,
                        cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """I(alpha, W) = int_0^inf mu1^{(2/g)(Q-alpha)} dR(beta_W; mu1, 1)/dmu1 dmu1.

    Converges as an ordinary integral for alpha > (W+2)/gamma; below that the
    value is the analytic continuation in alpha.
    """
    a = (2 / params.gamma) * (params.q_coef - alpha)
    if not a > -1:
        raise RangeError("mu1 power must exceed -1")
    return _reflection_integral_split(params.gamma, float(w), float(a), cfg)


def cr_renormalized(params: LiouvilleParams, alpha: float, w: float,
                    cfg: QuadratureConfig = DEFAULT_CFG, continuation: bool = False) -> float:
    """Renormalized conformal-radius moment CR(alpha, W) for a thin weight W."""
    _cr_range(params, alpha, w, continuation)
    g, Q = params.gamma, params.q_coef
    b2 = g - 2 * w / g
    lg = (_log_g_bar(params, alpha, g, cfg) - _log_g_bar(params, alpha, b2, cfg)).real
    x1 = (2 / g) * (Q - alpha) + 1
    x2 = (2 / g) * (alpha - (w + 2) / g)
    integral = reflection_integral(params, alpha, w, cfg)
    den = b2 * _gamma_sign(x1) * _gamma_sign(x2)
    return math.exp(lg - _lgamma(x1) - _lgamma(x2)) * g * integral / den


def cr_moment_general(params: LiouvilleParams, alpha: float, w: float,
                      cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """CR(alpha, W)/CR(gamma, W)."""
    if alpha == params.gamma:
        return 1.0
    _cr_range(params, alpha, w, False)
    return (cr_renormalized(params, alpha, w, cfg)
            / cr_renormalized(params, params.gamma, w, cfg, continuation=True))


@functools.lru_cache(maxsize=256)
def _reflection_integral_log(gamma: float, w: float, a: float, cfg: QuadratureConfig) -> float:
    """Same integral in s = log mu1 on [log c, -log c] with a five-point stencil in s.

    Outside that window F is replaced by its expansions at 0 and at infinity
    (the latter from homogeneity), integrated in closed form.  The series is
    fitted on its own node set.
    """
    params = LiouvilleParams(gamma)
    beta = beta_of_weight(params, w)
    e0 = (2 / gamma) * (params.q_coef - beta)
    terms = _refl_series(gamma, beta, cfg, 2e-4, 1e-2, 17)
    _check_mellin_poles(a, e0, terms)
    c = 5e-3
    M = 1 / c
    h = 1e-2

    def dF_ds(s):
        r = [_refl_line(gamma, beta, math.exp(s + k * h), cfg) for k in (-2, -1, 1, 2)]
        return (r[0] - 8 * r[1] + 8 * r[2] - r[3]) / (12 * h)

    mid = _quad(lambda s: math.exp(a * s) * dF_ds(s), math.log(c), math.log(M), cfg, "log-variable integral")
    left = sum(p * cp * c ** (a + p) / (a + p) for p, cp in terms[1:])
    right = sum(-(e0 - p) * cp * M ** (a + e0 - p) / (a + e0 - p) for p, cp in terms)
    return left + mid + right


def cr_moment_general_direct(params: LiouvilleParams, alpha: float, w: float,
                             cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """The same moment assembled as one expression in the four structure constants.

    Independent of :func:`cr_moment_general`: the reflection integral is done
    in log-variable form with a different derivative stencil, and the
    structure constants enter as a product of four factors.
    """
    _cr_range(params, alpha, w, False)
    g, Q = params.gamma, params.q_coef
    b2 = g - 2 * w / g
    lg = (_log_g_bar(params, alpha, g, cfg) - _log_g_bar(params, alpha, b2, cfg)
          + _log_g_bar(params, g, b2, cfg) - _log_g_bar(params, g, g, cfg)).real
    ia = _reflection_integral_log(g, float(w), (2 / g) * (Q - alpha), cfg)
    ig = _reflection_integral_log(g, float(w), (2 / g) * (Q - g), cfg)
    xs = [(2 / g) * (Q - alpha) + 1, (2 / g) * (alpha - (w + 2) / g)]
    ys = [(2 / g) * (Q - g) + 1, (2 / g) * (g - (w + 2) / g)]
    sign = 1.0
    lgam = 0.0
    for x in xs:
        sign *= _gamma_sign(x)
        lgam -= _lgamma(x)
    for y in ys:
        sign *= _gamma_sign(y)
        lgam += _lgamma(y)
    return sign * math.exp(lg + lgam) * ia / ig


# ---------------------------------------------------------------------------
# Seiberg bounds and the bulk-boundary assembly


def seiberg_check(params: LiouvilleParams, alpha: float, beta: float) -> bool:
    Q = params.q_coef
    return alpha < Q and beta < Q and alpha + beta / 2 > Q


def bulk_boundary_assemble(params: LiouvilleParams, alpha: float, w: float, mu: float, mu_b: float,
                           disk_expectation: float, cfg: QuadratureConfig = DEFAULT_CFG,
                           cr_value: float | None = None) -> float:
    """Bulk-boundary correlator from a caller-supplied thin-disk expectation.

    ``disk_expectation`` is the weight-W disk average of
    exp(-mu_b R - mu A) K_nu(L sqrt(mu / sin(pi gamma^2/4))) with
    nu = (2/gamma)(Q - alpha).  ``cr_value`` may be passed to reuse a
    precomputed CR(alpha, W).
    """
    g, Q = params.gamma, params.q_coef
    b2 = g - 2 * w / g
    if not (0 < b2 < g):
        raise RangeError(f"w={w} is not thin")
    if not (Q - b2 / 2 < alpha < Q):
        raise RangeError(f"alpha={alpha} outside ({Q - b2 / 2}, {Q})")
    if not (mu > 0 and mu_b > 0):
        raise RangeError("mu and mu_b must be positive")
    if disk_expectation < 0:
        raise RangeError("disk_expectation must be nonnegative")
    assert seiberg_check(params, alpha, b2)
    if disk_expectation == 0:
        return 0.0
    cr = cr_renormalized(params, alpha, w, cfg) if cr_value is None else cr_value
    nu = (2 / g) * (Q - alpha)
    k = math.sqrt(mu / math.sin(math.pi * g * g / 4))
    return ((2 / g) * 2 ** (-alpha**2 / 2) * u0_bar(params, alpha) * 2 / math.gamma(nu)
            * (0.5 * k) ** nu * disk_expectation / cr)
