"""Temporal correlation R_h(tau) = E[h(t) h*(t + tau)] of the received channel.

All functions broadcast over ``tau`` (seconds) and return complex values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mathcore import DEFAULT_TOL, Tolerance, bessel_i0_ratio, integrate_periodic, von_mises_pdf
from .scenario import Beam, Scenario, pointing_error_los, pointing_error_nlos


@dataclass(frozen=True)
class CorrelationSample:
    lag: float
    value: complex


def _bessel_argument(kr, mu, doppler_phase):
    # sqrt(x^2 + y^2) with x = kr cos(mu) - j*phase, y = kr sin(mu)
    x = kr * np.cos(mu) - 1j * doppler_phase
    y = kr * np.sin(mu)
    return np.sqrt(x * x + y * y)


def _finish(value, tau):
    return value[()] if np.ndim(tau) == 0 else value


def corr_nlos_exact(sc: Scenario, beam: Beam, tau):
    """NLOS correlation with the beam centre drifting by the pointing error.

    The product of the two shifted von Mises patterns is again von Mises with
    concentration k cos(dmu/2) centred at mu + dmu/2, which makes the angular
    integral a single Bessel function.
    """
    tau = np.asarray(tau, dtype=float)
    kr = beam.concentration
    dmu = pointing_error_nlos(sc, tau)
    k_half = kr * np.cos(dmu / 2)
    mu_half = sc.pointing + dmu / 2
    z = _bessel_argument(k_half, mu_half, 2 * np.pi * sc.doppler * tau)
    return _finish(np.asarray(bessel_i0_ratio(z, kr), dtype=complex), tau)


def corr_nlos_approx(sc: Scenario, beam: Beam, tau):
    """Large-k approximation: pointing loss factored out of the Doppler term."""
    tau = np.asarray(tau, dtype=float)
    kr = beam.concentration
    drift = sc.doppler * tau * math.sin(sc.pointing) / sc.dr_lambda
    pointing_loss = np.exp(-kr * drift**2 / 8)
    z = _bessel_argument(kr, sc.pointing, 2 * np.pi * sc.doppler * tau)
    return _finish(pointing_loss * np.asarray(bessel_i0_ratio(z, kr), dtype=complex), tau)


def corr_los(sc: Scenario, beam: Beam, tau):
    """LOS correlation, beam aligned with the LOS path at tau = 0.

    Uses the stationary form: the t-dependent phase term is dropped, valid
    while the LOS pointing error stays small.
    """
    tau = np.asarray(tau, dtype=float)
    kr = beam.concentration
    dmu = pointing_error_los(sc, tau)
    mag = np.exp(0.5 * kr * (np.cos(dmu) - 1))
    phase = np.exp(-2j * np.pi * sc.doppler * tau * math.cos(sc.alpha_los))
    return _finish(mag * phase, tau)


def corr_combined(sc: Scenario, beam: Beam, tau, nlos: str = "exact"):
    """Rician mix K/(K+1) R_LOS + 1/(K+1) R_NLOS."""
    if nlos == "exact":
        r_nlos = corr_nlos_exact(sc, beam, tau)
    elif nlos == "approx":
        r_nlos = corr_nlos_approx(sc, beam, tau)
    else:
        raise ValueError(f"unknown NLOS form {nlos!r}")
    K = sc.rician_k
    if math.isinf(K):
        return corr_los(sc, beam, tau)
    if K == 0:
        return r_nlos
    return K / (K + 1) * corr_los(sc, beam, tau) + r_nlos / (K + 1)


def corr_nlos_quadrature(sc: Scenario, beam: Beam, tau: float, tol: Tolerance = DEFAULT_TOL) -> complex:
    """Reference NLOS correlation by direct angular integration.

    Integrates sqrt(P(a|mu) P(a|mu + dmu)) exp(-j 2 pi f_D tau cos a) over the
    circle without using the Bessel closed form.
    """
    kr = beam.concentration
    dmu = float(pointing_error_nlos(sc, tau))
    w = 2 * np.pi * sc.doppler * tau

    def integrand(a):
        p0 = von_mises_pdf(a, sc.pointing, kr)
        p1 = von_mises_pdf(a, sc.pointing + dmu, kr)
        return np.sqrt(p0 * p1) * np.exp(-1j * w * np.cos(a))

    return complex(integrate_periodic(integrand, tol))


CORRELATIONS = {
    "exact": corr_nlos_exact,
    "approx": corr_nlos_approx,
    "los": corr_los,
    "combined": corr_combined,
}


def correlation_fn(sc: Scenario, beam: Beam, kind: str = "exact"):
    """Bind scenario and beam, returning ``tau -> R_h(tau)``."""
    try:
        fn = CORRELATIONS[kind]
    except KeyError:
        raise ValueError(f"unknown correlation kind {kind!r}") from None
    return lambda tau: fn(sc, beam, tau)
