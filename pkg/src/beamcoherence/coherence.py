"""Channel coherence time (numeric and closed forms) and beam coherence time."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .correlation import correlation_fn
from .mathcore import DEFAULT_TOL, NoCrossingError, Tolerance, find_first_crossing, gaussian_expectation
from .scenario import Beam, Scenario, SpatialLobeModel


class InvalidRegimeError(ValueError):
    """A closed-form approximation is outside the parameter range where it is defined."""


@dataclass(frozen=True)
class CoherenceSpec:
    threshold_R: float = 0.5
    threshold_zeta: float = 0.5
    tau_max: float | None = None

    def __post_init__(self):
        for name in ("threshold_R", "threshold_zeta"):
            v = getattr(self, name)
            if not 0 < v <= 1:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.tau_max is not None and self.tau_max <= 0:
            raise ValueError("tau_max must be positive")


def _check_threshold(x, name="R"):
    if not 0 < x <= 1:
        raise ValueError(f"{name} must lie in (0, 1]")


def tc_numeric(
    corr: Callable,
    R: float = 0.5,
    tau_max: float = 1.0,
    tol: Tolerance = DEFAULT_TOL,
    max_expand: int = 12,
) -> float:
    """First lag where |corr(tau)| falls to R.

    The search window doubles (up to ``max_expand`` times) when no crossing
    lies inside ``tau_max``; the window already scanned contains no crossing,
    so the first one found in the wider window is still the first overall.
    """
    _check_threshold(R)
    if R == 1:
        return 0.0

    def mag(t):
        return np.abs(corr(t))

    window = tau_max
    for _ in range(max_expand + 1):
        try:
            return find_first_crossing(mag, R, window, tol)
        except NoCrossingError:
            window *= 2
    raise NoCrossingError(f"|R_h| stays above {R} up to tau = {window / 2:g} s")


def channel_coherence_time(sc: Scenario, beam: Beam, R: float = 0.5, kind: str = "exact",
                           spec: CoherenceSpec | None = None) -> float:
    """Numeric coherence time with the default window 100 / f_D."""
    tau_max = spec.tau_max if spec and spec.tau_max else 100.0 / sc.doppler
    return tc_numeric(correlation_fn(sc, beam, kind), R, tau_max)


def tc_no_pointing(sc: Scenario, beam: Beam, R: float = 0.5) -> float:
    """Small pointing angle, no pointing error: inversely proportional to theta^2."""
    _check_threshold(R)
    return math.sqrt(R**-4 - 1) / (2 * math.pi * sc.doppler * beam.beamwidth**2)


def tc_small_mu(sc: Scenario, beam: Beam, R: float = 0.5) -> float:
    """Small pointing angle with pointing error (valid roughly for theta > sqrt(mu_r))."""
    _check_threshold(R)
    th = beam.beamwidth
    drift = sc.doppler * math.sin(sc.pointing) / sc.dr_lambda
    den = (2 * math.pi * sc.doppler) ** 2 * th**4 + drift**2 / (2 * th**2 * R**4)
    if den <= 0:
        raise InvalidRegimeError("non-positive denominator")
    return math.sqrt((R**-4 - 1) / den)


def tc_general_mu(sc: Scenario, beam: Beam, R: float = 0.5) -> float:
    """Quadratic-in-tau approximation for pointing angles that are not small.

    Raises :class:`InvalidRegimeError` where the denominator is not positive
    (wide beams at small pointing angles).
    """
    _check_threshold(R)
    if R == 1:
        return 0.0
    k = beam.concentration
    u = k + math.log(R)
    if u <= 0:
        raise InvalidRegimeError("k_r + log R must be positive")
    w = 2 * math.pi * sc.doppler
    a = k * sc.doppler**2 * math.sin(sc.pointing) ** 2 / (8 * sc.dr_lambda**2)
    den = (4 * u - 2 * k**2 / u) * a + w**2 - (w * k * math.cos(sc.pointing)) ** 2 / u**2
    if den <= 0:
        raise InvalidRegimeError(
            f"denominator {den:.3g} <= 0 at theta={math.degrees(beam.beamwidth):.3g} deg, "
            f"mu_r={math.degrees(sc.pointing):.3g} deg"
        )
    return math.sqrt((k**2 - u**2) / den)


def tc_worst_case(sc: Scenario, beam: Beam, R: float = 0.5) -> float:
    """Perpendicular-pointing coherence time; scales like 1/theta for narrow beams."""
    _check_threshold(R)
    th = beam.beamwidth
    u = 1 + th**2 * math.log(R)
    if u <= 0:
        raise InvalidRegimeError("1 + theta^2 log R must be positive")
    drift = sc.doppler * math.sin(sc.pointing) / sc.dr_lambda
    den = 0.25 * u * drift**2 + (2 * math.pi * sc.doppler) ** 2 * th**4
    return math.sqrt((1 - u * u) / den)


def _arccos_checked(arg, what):
    if not -1 <= arg <= 1:
        raise InvalidRegimeError(f"{what}: arccos argument {arg:.4g} outside [-1, 1]")
    return math.acos(arg)


def tc_los(sc: Scenario, beam: Beam, R: float = 0.5) -> float:
    """LOS-only coherence time: the pointing error alone decorrelates the channel."""
    _check_threshold(R)
    ang = _arccos_checked(2 * beam.beamwidth**2 * math.log(R) + 1, "tc_los")
    return sc.d_lambda / (sc.doppler * math.sin(sc.alpha_los)) * ang


def tb_los(sc: Scenario, beam: Beam, zeta: float = 0.5) -> float:
    """LOS beam coherence time: power drops to ``zeta`` of the aligned peak."""
    _check_threshold(zeta, "zeta")
    ang = _arccos_checked(beam.beamwidth**2 * math.log(zeta) + 1, "tb_los")
    return sc.d_lambda / (sc.doppler * math.sin(sc.pointing)) * ang


def tb_nlos_given_beta(sc: Scenario, beam: Beam, beta, zeta: float = 0.5):
    """NLOS beam coherence time for spatial-lobe width ``beta`` (vectorised over beta).

    The arccos argument is clamped to [-1, 1]; very wide lobes saturate at
    pi, the largest possible pointing change.
    """
    _check_threshold(zeta, "zeta")
    beta = np.asarray(beta, dtype=float)
    arg = np.clip((beta**2 + beam.beamwidth**2) * math.log(zeta) + 1, -1.0, 1.0)
    out = sc.dr_lambda / (sc.doppler * math.sin(sc.pointing)) * np.arccos(arg)
    return out[()] if out.ndim == 0 else out


def tb_nlos_mean(sc: Scenario, beam: Beam, lobes: SpatialLobeModel | None = None, zeta: float = 0.5,
                 tol: Tolerance = DEFAULT_TOL) -> float:
    """Beam coherence time averaged over the truncated Gaussian lobe width."""
    lobes = lobes or SpatialLobeModel()

    def f(beta):
        return tb_nlos_given_beta(sc, beam, beta, zeta)

    if lobes.std == 0:
        return float(f(lobes.mean))
    kinks = []
    if zeta < 1:
        # clamp engages where (beta^2 + theta^2) |log zeta| = 2
        b2 = 2 / -math.log(zeta) - beam.beamwidth**2
        if b2 > 0:
            kinks.append(math.sqrt(b2))
    return gaussian_expectation(f, lobes.mean, lobes.std, tol, lower=lobes.min_width, breakpoints=kinks)
