"""Short- versus long-term beam realignment on a two-path Rayleigh channel.

Short-term realignment sweeps every channel coherence time and always rides
the stronger path; long-term realignment sweeps every beam coherence time and
keeps whichever path won the sweep while the fading decorrelates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate

from . import coherence
from .correlation import correlation_fn
from .link import LinkConfig, _frame_power, antenna_gain, ar_parameters
from .scenario import Beam, Scenario, SpatialLobeModel

# SNR expectations integrate up to CAP_FACTOR * mean; the exponential tail
# beyond carries weight exp(-CAP_FACTOR).
CAP_FACTOR = 40.0


class InvalidCodebookError(ValueError):
    pass


@dataclass(frozen=True)
class RealignConfig:
    delta: float = 2.0  # path-loss ratio, linear
    zeta: float = 0.5
    codebook_levels: int | None = None  # None: fewest-measurement level count
    coverage: float = math.pi
    train_time: float = 1e-6
    mean_snr_path1: float = 1.0
    coherence_R: float = 0.5
    tc_method: str = "worst_case"
    coupled_pilot: bool = True  # pilots fade with the data path

    def __post_init__(self):
        if self.delta < 1:
            raise ValueError("path-loss ratio must be >= 1")
        if not 0 < self.zeta <= 1:
            raise ValueError("zeta must lie in (0, 1]")
        if self.codebook_levels is not None and self.codebook_levels < 1:
            raise ValueError("codebook levels must be positive")
        if self.coverage <= 0 or self.train_time < 0 or self.mean_snr_path1 <= 0:
            raise ValueError("invalid codebook geometry or SNR")
        if self.tc_method not in ("worst_case", "numeric", "general"):
            raise ValueError(f"unknown tc_method {self.tc_method!r}")

    @property
    def mean_snr_path2(self) -> float:
        return self.mean_snr_path1 / self.delta

    def with_(self, **changes) -> "RealignConfig":
        return replace(self, **changes)


def selection_probs(delta: float) -> tuple[float, float]:
    """Probability that the sweep picks path 1 / path 2 under unit-mean exponential fading."""
    if delta < 1:
        raise ValueError("path-loss ratio must be >= 1")
    if math.isinf(delta):
        return 1.0, 0.0
    return delta / (1 + delta), 1 / (1 + delta)


def snr_pdf_short(gamma, g1bar: float, g2bar: float):
    """Density of max(P1, P2) / Pn for independent exponential path powers."""
    gamma = np.asarray(gamma, dtype=float)
    r1, r2 = 1 / g1bar, 1 / g2bar
    out = r1 * np.exp(-r1 * gamma) + r2 * np.exp(-r2 * gamma) - (r1 + r2) * np.exp(-(r1 + r2) * gamma)
    out = np.where(gamma < 0, 0.0, out)
    return out[()] if out.ndim == 0 else out


def snr_cdf_short(gamma, g1bar: float, g2bar: float):
    gamma = np.maximum(np.asarray(gamma, dtype=float), 0.0)
    out = -np.expm1(-gamma / g1bar) * -np.expm1(-gamma / g2bar)
    return out[()] if out.ndim == 0 else out


def snr_pdf_long(gamma, gibar: float):
    """Exponential SNR density of the path chosen at sweep time."""
    gamma = np.asarray(gamma, dtype=float)
    out = np.where(gamma < 0, 0.0, np.exp(-gamma / gibar) / gibar)
    return out[()] if out.ndim == 0 else out


def beams_per_level(theta: float, coverage: float, levels: int) -> float:
    return (coverage / theta) ** (1.0 / levels)


def optimal_levels(theta: float, coverage: float) -> int:
    """Level count with the smallest sweep time subject to at least two beams per level."""
    ratio = coverage / theta
    if ratio < 2:
        raise InvalidCodebookError("coverage must be at least twice the beamwidth")
    max_levels = int(math.floor(math.log(ratio) / math.log(2) + 1e-12))
    return min(range(1, max_levels + 1), key=lambda l: l * ratio ** (2.0 / l))


def sweep_overhead(theta: float, cfg: RealignConfig) -> float:
    """Hierarchical exhaustive sweep time: levels * L^2 measurements of ``train_time``.

    An explicit level count is taken as given; only the automatic choice
    enforces at least two beams per level.
    """
    if theta > cfg.coverage * (1 + 1e-12):
        raise InvalidCodebookError("beamwidth exceeds the coverage")
    levels = cfg.codebook_levels or optimal_levels(theta, cfg.coverage)
    return levels * beams_per_level(theta, cfg.coverage, levels) ** 2 * cfg.train_time


def temporal_efficiency(coherence_time: float, overhead: float) -> float:
    """Fraction of a realignment interval left for data; zero if the sweep does not fit."""
    if coherence_time <= 0:
        raise ValueError("coherence time must be positive")
    return max(0.0, 1.0 - overhead / coherence_time)


def bound_vs_snr(beam: Beam, link: LinkConfig, corr: Callable, coupled_pilot: bool = True) -> Callable:
    """Return ``gamma -> I_low`` with ``gamma`` replacing the data SNR (vectorised).

    With ``coupled_pilot`` the pilot SNR follows ``gamma`` as well, so the
    Kalman error is recomputed for every fading state; otherwise the pilot SNR
    stays at ``link.snr_pilot``.
    """
    g = antenna_gain(beam)
    alpha, _ = ar_parameters(corr, link)
    a = min(abs(alpha) ** 2, 1.0)
    sig2 = 1.0 - a
    r2 = _frame_power(corr, link)[:, None]
    nu = link.pilot_spacing

    def psi_of(s):
        b = 1.0 + s * sig2 - a
        return 2.0 * sig2 / (b + np.sqrt(b * b + 4.0 * s * a * sig2))

    def f(gamma):
        gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
        s_pilot = gamma * g if coupled_pilot else np.full_like(gamma, link.snr_pilot * g)
        psi = psi_of(s_pilot) if sig2 > 0 else np.zeros_like(gamma)
        snr = gamma * g
        num = (r2 - psi) * snr
        den = (psi + 1.0 - r2) * snr + 1.0
        return np.log1p(num / den).sum(axis=0) / nu

    return f


def expect_over(pdf: Callable, f: Callable, scale: float) -> float:
    """Integral of f * pdf over [0, CAP_FACTOR * scale] by adaptive quadrature."""
    cap = CAP_FACTOR * scale

    def integrand(g):
        return float(f(g)[0]) * float(pdf(g))

    # split near the density's bulk so quad resolves the scale
    pts = [scale * x for x in (0.1, 1.0, 5.0) if scale * x < cap]
    val, _ = integrate.quad(integrand, 0.0, cap, points=pts, limit=200, epsabs=1e-11, epsrel=1e-9)
    return val


def expected_bound_short(f: Callable, cfg: RealignConfig) -> float:
    g1, g2 = cfg.mean_snr_path1, cfg.mean_snr_path2
    return expect_over(lambda g: snr_pdf_short(g, g1, g2), f, max(g1, g2))


def expected_bound_long(f: Callable, cfg: RealignConfig) -> float:
    p1, p2 = selection_probs(cfg.delta)
    g1, g2 = cfg.mean_snr_path1, cfg.mean_snr_path2
    out = p1 * expect_over(lambda g: snr_pdf_long(g, g1), f, g1)
    if p2 > 0:
        out += p2 * expect_over(lambda g: snr_pdf_long(g, g2), f, g2)
    return out


def short_term_coherence(sc: Scenario, beam: Beam, cfg: RealignConfig) -> float:
    if cfg.tc_method == "worst_case":
        return coherence.tc_worst_case(sc, beam, cfg.coherence_R)
    if cfg.tc_method == "general":
        return coherence.tc_general_mu(sc, beam, cfg.coherence_R)
    return coherence.channel_coherence_time(sc, beam, cfg.coherence_R)


@dataclass(frozen=True)
class RealignResult:
    theta: float
    policy: str
    coherence_time: float
    overhead: float
    efficiency: float
    mean_bound: float

    @property
    def spectral_efficiency(self) -> float:
        return self.efficiency * self.mean_bound


def evaluate_policy(policy: str, theta: float, sc: Scenario, link: LinkConfig, cfg: RealignConfig,
                    lobes: SpatialLobeModel | None = None, corr: Callable | None = None) -> RealignResult:
    beam = Beam(theta)
    corr = corr or correlation_fn(sc, beam, "exact")
    f = bound_vs_snr(beam, link, corr, cfg.coupled_pilot)
    overhead = sweep_overhead(theta, cfg)
    if policy == "short":
        tc = short_term_coherence(sc, beam, cfg)
        mean = expected_bound_short(f, cfg)
    elif policy == "long":
        tc = coherence.tb_nlos_mean(sc, beam, lobes, cfg.zeta)
        mean = expected_bound_long(f, cfg)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return RealignResult(theta, policy, tc, overhead, temporal_efficiency(tc, overhead), mean)


def spectral_efficiency(policy: str, theta: float, sc: Scenario, link: LinkConfig, cfg: RealignConfig,
                        lobes: SpatialLobeModel | None = None, corr: Callable | None = None) -> float:
    """Temporal efficiency times the expected bound under the policy's SNR law (nats/symbol)."""
    return evaluate_policy(policy, theta, sc, link, cfg, lobes, corr).spectral_efficiency
