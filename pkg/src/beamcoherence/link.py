"""Estimation-aware mutual-information lower bound for a pilot-aided link.

The channel is a unit-variance Gauss-Markov process sampled every pilot
spacing ``nu`` symbols, tracked by a Kalman filter. Rates are in nats per
symbol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .mathcore import log_bessel_i0
from .scenario import Beam

DEFAULT_NU_GRID = tuple(2**i for i in range(1, 11))


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class LinkConfig:
    snr_data: float = 1.0
    snr_pilot: float = 1.0
    pilot_spacing: int = 64
    symbol_time: float = 1e-7  # 1 / coherence bandwidth

    def __post_init__(self):
        if self.snr_data < 0 or self.snr_pilot < 0:
            raise ValueError("SNRs must be non-negative")
        if int(self.pilot_spacing) != self.pilot_spacing or self.pilot_spacing < 2:
            raise ValueError("pilot spacing must be an integer >= 2")
        if self.symbol_time <= 0:
            raise ValueError("symbol time must be positive")

    @classmethod
    def from_bandwidth(cls, coherence_bw: float, **kw) -> "LinkConfig":
        return cls(symbol_time=1.0 / coherence_bw, **kw)

    def with_(self, **changes) -> "LinkConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class EstimationState:
    psi: float

    @property
    def known_part_variance(self) -> float:
        return 1.0 - self.psi


def antenna_gain(beam: Beam) -> float:
    """Peak gain of the von Mises pattern relative to an omnidirectional antenna."""
    k = beam.concentration
    return math.exp(k - float(log_bessel_i0(k).real))


def ar_parameters(corr: Callable, link: LinkConfig) -> tuple[complex, float]:
    """AR(1) coefficient and innovation variance across one pilot interval."""
    alpha = complex(corr(link.pilot_spacing * link.symbol_time))
    return alpha, max(0.0, 1.0 - abs(alpha) ** 2)


def kalman_error_sequence(alpha, sigma_xi2: float, pilot_snr_eff: float, L: int) -> np.ndarray:
    """Error variance at the first ``L`` pilots; |alpha|^2 drives the prediction step."""
    a2 = abs(alpha) ** 2
    out = np.empty(L)
    if math.isinf(pilot_snr_eff):
        out[:] = 0.0
        return out
    psi = 1.0 / (1.0 / (1.0 + sigma_xi2) + pilot_snr_eff)
    for i in range(L):
        out[i] = psi
        pred = a2 * psi + sigma_xi2
        psi = pred / (1.0 + pilot_snr_eff * pred) if pred > 0 else 0.0
    return out


def psi_steady(corr_at_nuT, pilot_snr_eff) -> float:
    """Steady-state Kalman error variance.

    Positive root of s a psi^2 + (1 + s sigma^2 - a) psi - sigma^2 = 0 with
    a = |R_h(nu T)|^2, sigma^2 = 1 - a, s the effective pilot SNR; written in
    the cancellation-free form 2 sigma^2 / (B + sqrt(B^2 + 4 s a sigma^2)).
    """
    a = min(abs(corr_at_nuT) ** 2, 1.0)
    sig2 = 1.0 - a
    s = pilot_snr_eff
    if sig2 == 0 or math.isinf(s):
        return 0.0
    b = 1.0 + s * sig2 - a
    return 2.0 * sig2 / (b + math.sqrt(b * b + 4.0 * s * a * sig2))


def estimation_error_at(psi: float, offset: int, corr: Callable, T: float) -> float:
    """Total error variance ``offset`` symbols after the last pilot."""
    return psi + 1.0 - abs(complex(corr(offset * T))) ** 2


def _frame_power(corr: Callable, link: LinkConfig) -> np.ndarray:
    i = np.arange(2, link.pilot_spacing + 1)
    return np.abs(np.asarray(corr(i * link.symbol_time))) ** 2


def _bound(r2: np.ndarray, psi: float, snr_eff: float, nu: int) -> float:
    num = (r2 - psi) * snr_eff
    den = (psi + 1.0 - r2) * snr_eff + 1.0
    return float(np.sum(np.log1p(num / den)) / nu)


def mi_lower_bound(beam: Beam, link: LinkConfig, corr: Callable, gain: float | None = None) -> float:
    """Per-symbol lower bound on mutual information with pilot-based estimation.

    Summands with |R_h(iT)|^2 < psi are negative and are kept as is.
    """
    g = antenna_gain(beam) if gain is None else gain
    alpha, _ = ar_parameters(corr, link)
    psi = psi_steady(alpha, link.snr_pilot * g)
    return _bound(_frame_power(corr, link), psi, link.snr_data * g, link.pilot_spacing)


def mi_lower_bound_high_snr(beam: Beam, link: LinkConfig, corr: Callable) -> float:
    """Interference-limited form of the bound for large SNR * gain."""
    g = antenna_gain(beam)
    alpha, _ = ar_parameters(corr, link)
    psi = psi_steady(alpha, link.snr_pilot * g)
    r2 = _frame_power(corr, link)
    return float(np.sum(np.log1p((r2 - psi) / (psi + 1.0 - r2))) / link.pilot_spacing)


def optimal_pilot_spacing(beam: Beam, link: LinkConfig, corr: Callable,
                          nu_grid: Sequence[int] = DEFAULT_NU_GRID) -> int:
    """Grid argmax of the bound over the pilot spacing; ties go to the larger spacing."""
    if not len(nu_grid):
        raise ValueError("empty pilot-spacing grid")
    best_nu, best = None, -math.inf
    for nu in nu_grid:
        val = mi_lower_bound(beam, link.with_(pilot_spacing=int(nu)), corr)
        if val >= best:
            best_nu, best = int(nu), val
    return best_nu
