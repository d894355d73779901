"""Numerical primitives shared by the analytic modules.

Complex values are plain Python/numpy complex numbers. Functions that take
an argument ``z`` broadcast over numpy arrays and return a scalar when given
a scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy import integrate, optimize

SERIES_SWITCH = 25.0
# e**12 ~ 1.6e5: loss of digits tolerated in the power series before the
# integral representation takes over.
_MAX_SERIES_CANCELLATION = 12.0
_LOG_MAX = math.log(np.finfo(float).max)


class ConvergenceError(RuntimeError):
    """An iterative routine exhausted its refinement budget."""


class NoCrossingError(ValueError):
    """The function never reached the requested level inside the search range."""


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 30

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise ValueError("at least one of abs_tol/rel_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")

    def met(self, delta, scale) -> bool:
        return abs(delta) <= max(self.abs_tol, self.rel_tol * abs(scale))


DEFAULT_TOL = Tolerance()


def _series(z):
    # sum_k (z^2/4)^k / (k!)^2
    q = z * z / 4.0
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, 200):
        term = term * q / (k * k)
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return total


def _integral(z, n=96):
    # I0(z) = (1/pi) int_0^pi exp(z cos t) dt; midpoint rule on the even
    # periodic integrand converges geometrically and avoids series cancellation.
    t = (np.arange(n) + 0.5) * (np.pi / n)
    return np.exp(np.multiply.outer(z, np.cos(t))).mean(axis=-1)


def _asymptotic_log(z):
    """log I0(z) for Re z >= 0, |z| large, including the exp(-z) branch."""
    s1 = np.ones_like(z)
    s2 = np.ones_like(z)
    term = np.ones_like(z)
    for k in range(1, 60):
        term = term * (2 * k - 1) ** 2 / (8.0 * k * z)
        s1 = s1 + term
        s2 = s2 + (-1) ** k * term
        if np.all(np.abs(term) <= 1e-17):
            break
    sign = np.where(z.imag >= 0, 1.0, -1.0)
    # I0(z) ~ e^z/sqrt(2 pi z) [s1 + i sign e^{-2z} s2]
    tail = 1j * sign * np.exp(-2.0 * z) * s2
    return z - 0.5 * np.log(2 * np.pi * z) + np.log(s1 + tail)


def _log_i0(z):
    z = np.asarray(z, dtype=complex)
    # I0 is even; keep the branch with Re z >= 0.
    z = np.where(z.real < 0, -z, z)
    out = np.empty(z.shape, dtype=complex)
    mag = np.abs(z)
    big = mag >= SERIES_SWITCH
    clean = ~big & (mag - z.real <= _MAX_SERIES_CANCELLATION)
    rough = ~big & ~clean
    if big.any():
        out[big] = _asymptotic_log(z[big])
    with np.errstate(divide="ignore"):
        if clean.any():
            out[clean] = np.log(_series(z[clean]))
        if rough.any():
            out[rough] = np.log(_integral(z[rough]))
    real_axis = z.imag == 0
    out[real_axis] = out[real_axis].real
    return out


def _unwrap(value, like):
    if np.ndim(like) == 0:
        return value[()]
    return value


def log_bessel_i0(z):
    """Natural log of I0(z), finite for arbitrarily large real parts."""
    return _unwrap(_log_i0(z), z)


def bessel_i0(z):
    """Modified Bessel function of the first kind, order zero, complex argument.

    Power series below ``|z| = 25``, asymptotic expansion above. Raises
    ``OverflowError`` when ``exp(|Re z|)`` does not fit in a double; use
    :func:`bessel_i0_ratio` in that regime.
    """
    zz = np.asarray(z, dtype=complex)
    if np.any(np.abs(zz.real) > _LOG_MAX):
        raise OverflowError("I0 overflows for |Re z| > %.1f; use bessel_i0_ratio" % _LOG_MAX)
    logv = _log_i0(zz)
    with np.errstate(over="ignore"):
        val = np.exp(logv)
    if not np.all(np.isfinite(val[np.isfinite(logv)])):
        raise OverflowError("I0(z) is not representable in double precision")
    return _unwrap(val, z)


def bessel_i0_ratio(z, k):
    """I0(z) / I0(k) evaluated in the log domain (no intermediate overflow)."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("k must be positive")
    lz = _log_i0(z)
    lk = _log_i0(k).real
    with np.errstate(under="ignore"):
        val = np.exp(lz - lk)
    if np.ndim(z) == 0 and k.ndim == 0:
        return val[()]
    return val


def von_mises_pdf(alpha, mu, kappa):
    alpha = np.asarray(alpha, dtype=float)
    logc = np.log(2 * np.pi) + log_bessel_i0(kappa).real
    return np.exp(kappa * np.cos(alpha - mu) - logc)


def integrate_periodic(f: Callable, tol: Tolerance = DEFAULT_TOL, n0: int = 64):
    """Integrate a 2*pi-periodic function over [-pi, pi].

    Trapezoidal rule with point doubling; exponentially convergent for
    smooth periodic integrands. ``f`` must accept a numpy array of angles.
    """
    n = n0
    prev = None
    for _ in range(tol.max_iter):
        a = -np.pi + (2 * np.pi / n) * np.arange(n)
        est = complex(np.sum(f(a)) * (2 * np.pi / n))
        if prev is not None and tol.met(est - prev, est):
            return est if est.imag != 0 else est.real
        prev = est
        n *= 2
    raise ConvergenceError(f"periodic quadrature did not converge after {tol.max_iter} doublings")


def find_first_crossing(
    f: Callable,
    level: float,
    tau_max: float,
    tol: Tolerance = DEFAULT_TOL,
    n_scan: int = 4096,
) -> float:
    """Smallest tau in (0, tau_max] with f(tau) == level, given f(0) > level.

    Scans a uniform grid for the first sample at or below ``level`` and then
    refines inside that bracket, so a later, deeper crossing never shadows an
    earlier one. ``f`` must accept a numpy array.
    """
    if tau_max <= 0:
        raise ValueError("tau_max must be positive")
    grid = np.linspace(0.0, tau_max, n_scan + 1)
    vals = np.asarray(f(grid), dtype=float) - level
    if vals[0] <= 0:
        if vals[0] == 0:
            return 0.0
        raise ValueError("f(0) must exceed the crossing level")
    below = np.flatnonzero(vals <= 0)
    if below.size == 0:
        raise NoCrossingError(f"f stays above {level} on (0, {tau_max}]")
    i = below[0]
    if vals[i] == 0:
        return float(grid[i])

    def g(t):
        return float(np.asarray(f(np.array([t])), dtype=float)[0]) - level

    xtol = max(tol.abs_tol * tau_max, 1e-300)
    return optimize.brentq(g, grid[i - 1], grid[i], xtol=xtol, rtol=max(tol.rel_tol, 4 * np.finfo(float).eps),
                           maxiter=max(100, tol.max_iter))


def gaussian_expectation(
    f: Callable,
    m: float,
    s: float,
    tol: Tolerance = DEFAULT_TOL,
    lower: float | None = None,
    breakpoints=(),
) -> float:
    """E[f(X)] for X ~ N(m, s^2), optionally truncated to X >= lower.

    Untruncated: Gauss-Hermite with doubling node count until two successive
    estimates agree. Truncated (or with known kinks in ``breakpoints``):
    adaptive quadrature on the renormalised density.
    """
    if s < 0:
        raise ValueError("standard deviation must be non-negative")
    if s == 0:
        if lower is not None and m < lower:
            raise ValueError("degenerate distribution lies below the truncation point")
        return float(f(np.array([m]))[0])
    if lower is None and not breakpoints:
        n = 16
        prev = None
        for _ in range(tol.max_iter):
            x, w = hermgauss(n)
            est = float(np.sum(w * np.asarray(f(m + math.sqrt(2.0) * s * x), dtype=float)) / math.sqrt(math.pi))
            if prev is not None and tol.met(est - prev, est):
                return est
            prev = est
            n *= 2
            if n > 512:
                break
        raise ConvergenceError("Gauss-Hermite expectation did not converge")

    lo = m - 12 * s if lower is None else max(lower, m - 12 * s)
    hi = m + 12 * s
    if lo >= hi:
        raise ValueError("truncation point lies beyond the bulk of the distribution")
    norm = math.sqrt(2 * math.pi) * s

    def dens(x):
        return math.exp(-0.5 * ((x - m) / s) ** 2) / norm

    def integrand(x):
        return float(np.asarray(f(np.array([x])), dtype=float)[0]) * dens(x)

    pts = sorted(p for p in breakpoints if lo < p < hi)
    kw = dict(epsabs=tol.abs_tol, epsrel=max(tol.rel_tol, 1e-12), limit=200)
    num, _ = integrate.quad(integrand, lo, hi, points=pts or None, **kw)
    mass, _ = integrate.quad(dens, lo, hi, **kw)
    return num / mass
