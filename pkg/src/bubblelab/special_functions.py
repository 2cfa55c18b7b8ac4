"""Log-gamma, Barnes double gamma, double sine and modified Bessel K.

Complex arguments and results use the builtin ``complex`` type.  Real inputs
are accepted anywhere a complex argument is expected.
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import DomainError, PoleError, QuadratureError

__all__ = [
    "QuadratureConfig",
    "DEFAULT_CFG",
    "log_gamma",
    "log_gamma_b",
    "double_sine",
    "log_double_sine",
    "bessel_k",
]

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_POLE_RADIUS = 1e-12
# Below this t the integrand is replaced by its Taylor polynomial.
_SERIES_CUT = 1e-3
# Arguments with smaller real part are moved right by shifts before
# integrating; the integral converges too slowly near Re z = 0.
_SHIFT_FLOOR = 0.1


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for the adaptive Gauss-Kronrod routines."""

    abs_tol: float = 1e-13
    rel_tol: float = 1e-12
    max_subdivisions: int = 2048

    def __post_init__(self):
        if not (self.abs_tol > 0 and math.isfinite(self.abs_tol)):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 16:
            raise DomainError("max_subdivisions must be an integer >= 16")


DEFAULT_CFG = QuadratureConfig()


def _as_complex(z) -> complex:
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z}")
    return z


def _check_finite(val: complex, what: str) -> complex:
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise OverflowError(f"{what} overflowed")
    return val


def log_gamma(z) -> complex:
    """Principal branch of log Gamma(z)."""
    z = _as_complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real):
        raise PoleError(f"Gamma has a pole at {z.real}")
    val = complex(special.loggamma(z))
    return _check_finite(val, "log_gamma")


def _real_log_gamma(x: float) -> float:
    """log|Gamma(x)| for real x, raising at the poles."""
    if x <= 0.0 and x == math.floor(x):
        raise PoleError(f"Gamma has a pole at {x}")
    return float(special.gammaln(x))


# ---------------------------------------------------------------------------
# double gamma


def _check_pole(z: complex, b: float) -> None:
    """Raise PoleError if z is within the pole radius of -n*b - m/b."""
    if abs(z.imag) > _POLE_RADIUS or z.real > _POLE_RADIUS:
        return
    binv = 1.0 / b
    x = -z.real
    n_max = int(math.floor((x + _POLE_RADIUS) / b))
    for n in range(n_max + 1):
        m = round((x - n * b) * b)
        if m < 0:
            continue
        if abs(z - complex(-n * b - m * binv, 0.0)) < _POLE_RADIUS:
            raise PoleError(f"Gamma_b pole at n={n}, m={m}")


def _series_coeffs(a: complex, b: float):
    b2, b4 = b * b, b**4
    a2 = a * a
    f0 = -a * (4 * a2 * b2 - 12 * a * b2 - b4 - 1) / (24 * b2)
    f1 = a2 * (2 * a2 * b2 - b4 - 12 * b2 - 1) / (48 * b2)
    f2 = -a * (48 * a2 * a2 * b4 - 40 * a2 * b**6 - 40 * a2 * b2
               - 480 * a * b4 + 7 * b**8 + 10 * b4 + 7) / (5760 * b4)
    return f0, f1, f2


def _integrand(t: float, z: complex, c: float, b: float) -> complex:
    a = z - c
    num = cmath.exp(-c * t) * _expm1c(-a * t)
    den = math.expm1(-b * t) * math.expm1(-t / b)
    return (num / den - 0.5 * a * a * math.exp(-t) + a / t) / t


def _expm1c(w: complex) -> complex:
    if w.imag == 0.0:
        return complex(math.expm1(w.real))
    # expm1 for complex argument without cancellation in the real part
    er = math.expm1(w.real)
    s, co = math.sin(w.imag), math.cos(w.imag)
    # e^x cos y - 1 = expm1(x) cos y - 2 sin^2(y/2)
    re = er * co - 2.0 * math.sin(0.5 * w.imag) ** 2
    im = (er + 1.0) * s
    return complex(re, im)


def _quad_complex(f, lo, hi, cfg: QuadratureConfig, what: str) -> complex:
    parts = []
    for comp in (lambda t: f(t).real, lambda t: f(t).imag):
        val, err, info = integrate.quad(
            comp, lo, hi, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
            limit=int(cfg.max_subdivisions), full_output=1)[:3]
        if err > max(cfg.abs_tol, cfg.rel_tol * abs(val)) * 10 and info["last"] >= cfg.max_subdivisions:
            raise QuadratureError(f"{what}: tolerance not met (err={err:.3g})")
        if not math.isfinite(val):
            raise QuadratureError(f"{what}: non-finite result")
        parts.append(val)
    return complex(parts[0], parts[1])


def _log_gamma_b_integral(z: complex, b: float, cfg: QuadratureConfig) -> complex:
    c = 0.5 * (b + 1.0 / b)
    a = z - c
    if a == 0:
        return 0j
    d = _SERIES_CUT
    f0, f1, f2 = _series_coeffs(a, b)
    head = f0 * d + f1 * d * d / 2.0 + f2 * d**3 / 3.0
    # Decay rate of the slowest exponential in the integrand.
    rate = min(z.real, c, 1.0)
    scale = max(1.0, abs(a) ** 2)
    T = (math.log(scale / cfg.abs_tol) + 5.0) / rate
    T = max(T, 10.0)
    f = lambda t: _integrand(t, z, c, b)
    # Split the range so oscillations from Im z stay resolved.
    knots = [d, 1.0]
    x = 1.0
    while x < T:
        x = min(2.0 * x, T)
        knots.append(x)
    body = 0j
    for lo, hi in zip(knots[:-1], knots[1:]):
        body += _quad_complex(f, lo, hi, cfg, "log_gamma_b")
    tail = a / T
    return head + body + tail


def _log_shift_factor(z: complex, s: float) -> complex:
    """log of Gamma_b(z)/Gamma_b(z+s), s one of b, 1/b."""
    return log_gamma(s * z) - _LOG_SQRT_2PI + (-s * z + 0.5) * math.log(s)


def log_gamma_b(z, b: float, cfg: QuadratureConfig = DEFAULT_CFG) -> complex:
    """log Gamma_b(z) for b > 0.

    For arguments with small or negative real part the first shift equation
    is applied repeatedly (always with step b) until the real part clears a
    fixed floor; the integral representation is used from there.
    """
    z = _as_complex(z)
    b = float(b)
    if not b > 0:
        raise DomainError("b must be positive")
    _check_pole(z, b)
    acc = 0j
    while z.real < _SHIFT_FLOOR:
        acc += _log_shift_factor(z, b)
        z = z + b
    return _check_finite(acc + _log_gamma_b_integral(z, b, cfg), "log_gamma_b")


def log_double_sine(z, b: float, cfg: QuadratureConfig = DEFAULT_CFG) -> complex:
    z = _as_complex(z)
    qh = b + 1.0 / b
    return log_gamma_b(z, b, cfg) - log_gamma_b(qh - z, b, cfg)


def double_sine(z, b: float, cfg: QuadratureConfig = DEFAULT_CFG) -> complex:
    """S_b(z) = Gamma_b(z) / Gamma_b(b + 1/b - z)."""
    lv = log_double_sine(z, b, cfg)
    if lv.real > 700:
        raise OverflowError("double_sine overflows double range")
    return cmath.exp(lv)


# ---------------------------------------------------------------------------
# modified Bessel function of the second kind


def _bessel_tail_bound(nu: float, x: float, T: float) -> float:
    """Bound on the e^x-scaled integral over (T, inf)."""
    slope = x * math.sinh(T) - nu
    if slope <= 0:
        return math.inf
    expo = -x * (math.cosh(T) - 1.0) + nu * T
    if expo < -745:
        return 0.0
    return math.exp(expo) / slope


def bessel_k(nu: float, x: float, cfg: QuadratureConfig = DEFAULT_CFG) -> float:
    """K_nu(x) as the integral of exp(-x cosh t) cosh(nu t) over t > 0.

    The integrand is scaled by e^x during quadrature; the truncation point T
    is the first point of a 1/4 grid where the scaled tail bound falls below
    a tenth of abs_tol.
    """
    x = float(x)
    nu = abs(float(nu))
    if not (x > 0 and math.isfinite(x)):
        raise DomainError(f"bessel_k needs x > 0, got {x}")
    T = 0.25
    while _bessel_tail_bound(nu, x, T) > 0.1 * cfg.abs_tol:
        T += 0.25
        if T > 200:
            raise QuadratureError("bessel_k: truncation point not found")

    def f(t):
        return math.exp(-x * (math.cosh(t) - 1.0) + nu * t) * 0.5 * (1.0 + math.exp(-2.0 * nu * t))

    val, err, info = integrate.quad(
        f, 0.0, T, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol,
        limit=int(cfg.max_subdivisions), full_output=1)[:3]
    if info["last"] >= cfg.max_subdivisions and err > cfg.abs_tol + cfg.rel_tol * abs(val):
        raise QuadratureError(f"bessel_k: tolerance not met (err={err:.3g})")
    out = val * math.exp(-x)
    if not (out > 0 and math.isfinite(out)):
        if val > 0 and x > 700:
            return 0.0
        raise QuadratureError("bessel_k: non-finite result")
    return out
