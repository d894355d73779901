"""Sum-of-sinusoids Monte Carlo simulator for the NLOS channel.

Arrival angles sit on a fixed uniform grid over (-pi, pi]; each realisation
draws only the per-path phases. Because the grid is shared, an ensemble of
traces is one matrix product ``A @ exp(j phi)`` where ``A[n, k]`` holds the
amplitude and Doppler rotation of path ``k`` at sample ``n``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .correlation import CorrelationSample
from .mathcore import von_mises_pdf
from .scenario import Beam, Scenario, pointing_error_nlos

# rows of the path matrix built per block; bounds peak memory
_BLOCK_ROWS = 256


@dataclass(frozen=True)
class ChannelTrace:
    dt: float
    samples: np.ndarray
    seed: int
    scale: float = 1.0  # raw RMS divided out by the unit-power normalisation

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        if len(self.samples) == 0:
            raise ValueError("empty trace")

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.samples))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re", "im"])
            for t, h in zip(self.times, self.samples):
                w.writerow([f"{t:.9g}", f"{h.real:.9g}", f"{h.imag:.9g}"])


def trace_seeds(master_seed: int, n: int) -> list[int]:
    """Per-trace seeds split from a master seed; independent of batching order."""
    children = np.random.SeedSequence(master_seed).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def _angle_grid(n_sinusoids: int) -> np.ndarray:
    return -np.pi + 2 * np.pi * (np.arange(n_sinusoids) + 1) / n_sinusoids


def _phases(seeds: Sequence[int], n_sinusoids: int) -> np.ndarray:
    out = np.empty((n_sinusoids, len(seeds)), dtype=complex)
    for j, s in enumerate(seeds):
        phi = np.random.default_rng(s).uniform(0.0, 2 * np.pi, n_sinusoids)
        out[:, j] = np.exp(1j * phi)
    return out


def _synthesize(sc: Scenario, beam: Beam, n_sinusoids: int, n_samples: int, dt: float,
                seeds: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    if n_sinusoids < 100:
        raise ValueError("need at least 100 sinusoids")
    alpha = _angle_grid(n_sinusoids)
    weight = 2 * np.pi / n_sinusoids
    kr = beam.concentration
    cos_a = np.cos(alpha)
    phasors = _phases(seeds, n_sinusoids)
    out = np.empty((n_samples, len(seeds)), dtype=complex)
    for start in range(0, n_samples, _BLOCK_ROWS):
        t = dt * np.arange(start, min(start + _BLOCK_ROWS, n_samples))
        # fixed beam, moving receiver: the beam centre drifts by the pointing error
        centre = sc.pointing + pointing_error_nlos(sc, t)
        amp = np.sqrt(von_mises_pdf(alpha[None, :], centre[:, None], kr) * weight)
        rot = np.exp(2j * np.pi * sc.doppler * np.outer(t, cos_a))
        out[start : start + len(t)] = (amp * rot) @ phasors
    rms = np.sqrt(np.mean(np.abs(out) ** 2, axis=0))
    return out / rms, rms


def _n_samples(duration: float, dt: float) -> int:
    n = duration / dt
    if abs(n - round(n)) > 1e-6 * max(1.0, n):
        raise ValueError("duration must be an integer number of time steps")
    return int(round(n))


def simulate_nlos(sc: Scenario, beam: Beam, n_sinusoids: int, duration: float, dt: float,
                  seed: int) -> ChannelTrace:
    """One realisation of the NLOS channel, sampled every ``dt`` for ``duration`` seconds."""
    n = _n_samples(duration, dt)
    h, rms = _synthesize(sc, beam, n_sinusoids, n, dt, [seed])
    return ChannelTrace(dt, h[:, 0], seed, float(rms[0]))


def simulate_ensemble(sc: Scenario, beam: Beam, n_sinusoids: int, duration: float, dt: float,
                      master_seed: int, n_traces: int) -> list[ChannelTrace]:
    """``n_traces`` independent realisations with seeds split from ``master_seed``."""
    n = _n_samples(duration, dt)
    seeds = trace_seeds(master_seed, n_traces)
    h, rms = _synthesize(sc, beam, n_sinusoids, n, dt, seeds)
    return [ChannelTrace(dt, h[:, j].copy(), s, float(rms[j])) for j, s in enumerate(seeds)]


def empirical_correlation(traces: Iterable[ChannelTrace], lags: Sequence[float]) -> list[CorrelationSample]:
    """Average of h[n] conj(h[n + m]) over time origins and traces, normalised at lag 0.

    Traces are pooled on their raw scale: averaging traces that were each
    normalised to unit power would weight weak realisations up and bias the
    estimate when traces are short compared with the coherence time.
    """
    traces = list(traces)
    if not traces:
        raise ValueError("no traces")
    dt = traces[0].dt
    if any(not math.isclose(t.dt, dt, rel_tol=1e-12) for t in traces):
        raise ValueError("traces must share the sampling interval")
    steps = []
    for lag in lags:
        m = lag / dt
        if abs(m - round(m)) > 1e-6 * max(1.0, m):
            raise ValueError(f"lag {lag} is not a multiple of dt")
        steps.append(int(round(m)))
    n_min = min(len(t.samples) for t in traces)
    if max(steps) >= n_min:
        raise ValueError("lag exceeds trace length")
    H = np.stack([t.scale * t.samples[:n_min] for t in traces], axis=1)
    acc = []
    for m in [0] + steps:
        acc.append(np.mean(H[: n_min - m] * np.conj(H[m:])))
    r0 = acc[0]
    return [CorrelationSample(lag, complex(v / r0)) for lag, v in zip(lags, acc[1:])]
