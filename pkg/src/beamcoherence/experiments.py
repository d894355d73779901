"""Figure experiments: parameter sets, sweeps and deterministic CSV output.

Each experiment returns a :class:`Table`; :func:`write_csv` renders it with a
``#``-prefixed manifest of every resolved parameter followed by a header row.
Multi-panel figures are written in long format with the panel parameter as
the leading column.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__, coherence, link, mcsim, realign
from .coherence import InvalidRegimeError
from .correlation import corr_combined, corr_nlos_approx, corr_nlos_exact, correlation_fn
from .scenario import (
    Beam,
    ConfigError,
    Scenario,
    SpatialLobeModel,
    lobes_from_config,
    parse_config,
    scenario_from_config,
)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(text)


def _int(text: str) -> int:
    return int(text.strip())


def _tc_method(text: str) -> str:
    return text.strip()


EXPERIMENT_KEYS = {
    "R": (float, lambda x: 0 < x <= 1),
    "zeta": (float, lambda x: 0 < x <= 1),
    "snr_db": (float, math.isfinite),
    "pilot_snr_db": (float, math.isfinite),
    "coherence_bw_mhz": (float, lambda x: x > 0),
    "pilot_spacing": (_int, lambda x: x >= 2),
    "train_time_us": (float, lambda x: x >= 0),
    "coverage_deg": (float, lambda x: 0 < x <= 360),
    "codebook_levels": (_int, lambda x: x >= 1),
    "coupled_pilot": (_bool, lambda x: True),
    "tc_method": (_tc_method, lambda x: x in ("worst_case", "numeric", "general")),
    "n_sinusoids": (_int, lambda x: x >= 100),
    "n_seeds": (_int, lambda x: x >= 1),
    "theta_deg": (float, lambda x: 0 < x < 180),
}


def load_config(text: str) -> dict:
    return parse_config(text, EXPERIMENT_KEYS)


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    manifest: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "none"
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    for key in sorted(table.manifest):
        buf.write(f"# {key} = {_fmt(table.manifest[key])}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_csv(table: Table, path) -> None:
    with open(path, "w", newline="\n", encoding="ascii") as fh:
        fh.write(render_csv(table))


def _scenario_manifest(sc: Scenario) -> dict:
    return {
        "speed_mps": sc.speed,
        "carrier_ghz": sc.carrier / 1e9,
        "distance_m": sc.distance,
        "scatter_radius_m": sc.scatter_radius,
        "rician_k": sc.rician_k,
        "doppler_hz": sc.doppler,
        "dr_lambda": sc.dr_lambda,
        "d_lambda": sc.d_lambda,
    }


def _panels(cfg: dict, key: str, default: tuple) -> tuple:
    return (cfg[key],) if key in cfg else default


def _deg_grid(lo: float, hi: float, step: float) -> np.ndarray:
    return np.round(np.arange(lo, hi + step / 2, step), 10)


def _nan_on_invalid(fn: Callable, *args) -> float:
    try:
        return fn(*args)
    except InvalidRegimeError:
        return math.nan


# ---------------------------------------------------------------- experiments


def fig3(cfg: dict, seed: int) -> Table:
    """Exact, approximate and simulated NLOS correlation magnitude against f_D tau."""
    sc0 = scenario_from_config(cfg, Scenario(scatter_radius=0.5))
    beam = Beam.from_concentration(50.0) if "theta_deg" not in cfg else Beam.from_degrees(cfg["theta_deg"])
    n_sin = cfg.get("n_sinusoids", 10000)
    n_seeds = cfg.get("n_seeds", 200)
    steps = np.arange(0, 51)
    out = Table(["mu_deg", "fD_tau", "exact_abs", "approx_abs", "sim_abs"])
    for mu in _panels(cfg, "pointing_deg", (10.0, 80.0)):
        sc = sc0.with_(pointing=math.radians(mu))
        dt = 0.01 / sc.doppler
        tau = steps * dt
        traces = mcsim.simulate_ensemble(sc, beam, n_sin, 200 * dt, dt, seed, n_seeds)
        sim = [1.0] + [abs(s.value) for s in mcsim.empirical_correlation(traces, tau[1:])]
        ex = np.abs(corr_nlos_exact(sc, beam, tau))
        ap = np.abs(corr_nlos_approx(sc, beam, tau))
        for i, m in enumerate(steps):
            out.rows.append((mu, m * 0.01, ex[i], ap[i], sim[i]))
    out.manifest.update(_scenario_manifest(sc0), k_r=beam.concentration, n_sinusoids=n_sin, n_seeds=n_seeds,
                        trace_samples=200, fD_dt=0.01)
    return out


def fig4(cfg: dict, seed: int) -> Table:
    """Rician correlation magnitude against lag for K in 0..2."""
    sc0 = scenario_from_config(cfg, Scenario(scatter_radius=5.0))
    beam = Beam.from_concentration(50.0) if "theta_deg" not in cfg else Beam.from_degrees(cfg["theta_deg"])
    tau = np.arange(0, 201) * 1e-4
    ks = np.round(np.arange(0, 11) * 0.2, 10) if "rician_k" not in cfg else (cfg["rician_k"],)
    out = Table(["mu_deg", "K", "tau_ms", "abs_R"])
    for mu in _panels(cfg, "pointing_deg", (10.0, 80.0)):
        for K in ks:
            sc = sc0.with_(pointing=math.radians(mu), los_angle=None, rician_k=K)
            r = np.abs(corr_combined(sc, beam, tau))
            out.rows.extend((mu, K, t * 1e3, v) for t, v in zip(tau, r))
    out.manifest.update(_scenario_manifest(sc0), k_r=beam.concentration, los_equals_pointing=True)
    return out


def fig5(cfg: dict, seed: int) -> Table:
    """Small-pointing-angle coherence time: numeric against both closed forms."""
    R = cfg.get("R", 0.5)
    sc0 = scenario_from_config(cfg, Scenario(scatter_radius=0.5))
    out = Table(["mu_deg", "theta_deg", "Tc_numeric_ms", "Tc_small_mu_ms", "Tc_no_pointing_ms"])
    for mu in _panels(cfg, "pointing_deg", (1.0, 5.0)):
        sc = sc0.with_(pointing=math.radians(mu))
        for th in _deg_grid(1, 30, 0.5):
            beam = Beam.from_degrees(th)
            out.rows.append((
                mu, th,
                1e3 * coherence.channel_coherence_time(sc, beam, R),
                1e3 * _nan_on_invalid(coherence.tc_small_mu, sc, beam, R),
                1e3 * coherence.tc_no_pointing(sc, beam, R),
            ))
    out.manifest.update(_scenario_manifest(sc0), R=R)
    return out


def fig6(cfg: dict, seed: int) -> Table:
    """General-pointing-angle coherence time: numeric against the closed form."""
    R = cfg.get("R", 0.5)
    sc0 = scenario_from_config(cfg, Scenario(scatter_radius=0.5))
    out = Table(["mu_deg", "theta_deg", "Tc_numeric_ms", "Tc_general_ms", "Tc_worst_case_ms"])
    for mu in _panels(cfg, "pointing_deg", (30.0, 45.0, 60.0, 90.0)):
        sc = sc0.with_(pointing=math.radians(mu))
        for th in _deg_grid(1, 60, 0.5):
            beam = Beam.from_degrees(th)
            out.rows.append((
                mu, th,
                1e3 * coherence.channel_coherence_time(sc, beam, R),
                1e3 * _nan_on_invalid(coherence.tc_general_mu, sc, beam, R),
                1e3 * _nan_on_invalid(coherence.tc_worst_case, sc, beam, R),
            ))
    out.manifest.update(_scenario_manifest(sc0), R=R)
    return out


def fig7(cfg: dict, seed: int) -> Table:
    """Beam coherence time, LOS and lobe-averaged NLOS, for pointing angles 10 and 80 degrees."""
    zeta = cfg.get("zeta", 0.5)
    sc0 = scenario_from_config(cfg, Scenario(scatter_radius=5.0))
    lobes = lobes_from_config(cfg, SpatialLobeModel())
    out = Table(["theta_deg", "TB_los_mu10", "TB_los_mu80", "TB_nlos_mu10", "TB_nlos_mu80"])
    s10 = sc0.with_(pointing=math.radians(10))
    s80 = sc0.with_(pointing=math.radians(80))
    for th in _deg_grid(1, 30, 0.5):
        beam = Beam.from_degrees(th)
        out.rows.append((
            th,
            coherence.tb_los(s10, beam, zeta),
            coherence.tb_los(s80, beam, zeta),
            coherence.tb_nlos_mean(s10, beam, lobes, zeta),
            coherence.tb_nlos_mean(s80, beam, lobes, zeta),
        ))
    out.manifest.update(_scenario_manifest(sc0), zeta=zeta, lobe_mean_deg=math.degrees(lobes.mean),
                        lobe_std_deg=math.degrees(lobes.std), lobe_min_deg=math.degrees(lobes.min_width),
                        units="s")
    return out


def _link_from_config(cfg: dict, bc_mhz: float, nu: int = 64) -> link.LinkConfig:
    snr = float(link.db_to_linear(cfg.get("snr_db", 0.0)))
    pilot = float(link.db_to_linear(cfg.get("pilot_snr_db", cfg.get("snr_db", 0.0))))
    return link.LinkConfig.from_bandwidth(bc_mhz * 1e6, snr_data=snr, snr_pilot=pilot,
                                          pilot_spacing=cfg.get("pilot_spacing", nu))


def fig8(cfg: dict, seed: int) -> Table:
    """Mutual-information bound against pilot spacing, by coherence bandwidth and pointing angle."""
    sc0 = scenario_from_config(cfg, Scenario(scatter_radius=0.5))
    beam = Beam.from_degrees(cfg.get("theta_deg", 10.0))
    cases = [(bc, 0.0) for bc in (5.0, 10.0, 20.0, 40.0)] + [(10.0, mu) for mu in (10.0, 45.0, 80.0)]
    if "coherence_bw_mhz" in cfg or "pointing_deg" in cfg:
        cases = [(cfg.get("coherence_bw_mhz", 10.0), cfg.get("pointing_deg", 0.0))]
    out = Table(["bc_mhz", "mu_deg", "nu", "I_low"])
    for bc, mu in cases:
        sc = sc0.with_(pointing=math.radians(mu))
        corr = correlation_fn(sc, beam, "exact")
        for nu in link.DEFAULT_NU_GRID:
            lc = _link_from_config(cfg, bc).with_(pilot_spacing=nu)
            out.rows.append((bc, mu, nu, link.mi_lower_bound(beam, lc, corr)))
    out.manifest.update(_scenario_manifest(sc0), theta_deg=math.degrees(beam.beamwidth),
                        snr_db=cfg.get("snr_db", 0.0), pilot_snr_db=cfg.get("pilot_snr_db", cfg.get("snr_db", 0.0)))
    return out


def realign_config(cfg: dict, delta_db: float) -> realign.RealignConfig:
    return realign.RealignConfig(
        delta=float(link.db_to_linear(delta_db)),
        zeta=cfg.get("zeta", 0.5),
        codebook_levels=cfg.get("codebook_levels"),
        coverage=math.radians(cfg.get("coverage_deg", 180.0)),
        train_time=cfg.get("train_time_us", 1.0) * 1e-6,
        mean_snr_path1=float(link.db_to_linear(cfg.get("snr_db", 0.0))),
        coherence_R=cfg.get("R", 0.5),
        tc_method=cfg.get("tc_method", "worst_case"),
        coupled_pilot=cfg.get("coupled_pilot", True),
    )


def fig9(cfg: dict, seed: int) -> Table:
    """Spectral efficiency of short- and long-term realignment against beamwidth."""
    sc = scenario_from_config(cfg, Scenario(scatter_radius=0.5, pointing=math.radians(90)))
    lobes = lobes_from_config(cfg, SpatialLobeModel())
    lc = _link_from_config(cfg, cfg.get("coherence_bw_mhz", 10.0))
    out = Table(["delta_db", "theta_deg", "C_short", "C_long", "eta_short", "eta_long"])
    for delta_db in (3.0, 10.0):
        rc = realign_config(cfg, delta_db)
        for th in _deg_grid(2, 30, 1):
            theta = math.radians(th)
            beam = Beam(theta)
            corr = correlation_fn(sc, beam, "exact")
            s = realign.evaluate_policy("short", theta, sc, lc, rc, lobes, corr)
            l = realign.evaluate_policy("long", theta, sc, lc, rc, lobes, corr)
            out.rows.append((delta_db, th, s.spectral_efficiency, l.spectral_efficiency, s.efficiency, l.efficiency))
    rc = realign_config(cfg, 3.0)
    out.manifest.update(
        _scenario_manifest(sc), pointing_deg=math.degrees(sc.pointing), coherence_bw_mhz=1e-6 / lc.symbol_time,
        pilot_spacing=lc.pilot_spacing, snr_db=cfg.get("snr_db", 0.0), coverage_deg=math.degrees(rc.coverage),
        train_time_us=rc.train_time * 1e6, codebook_levels=rc.codebook_levels or "optimal", R=rc.coherence_R,
        zeta=rc.zeta, tc_method=rc.tc_method, coupled_pilot=rc.coupled_pilot,
        lobe_std_deg=math.degrees(lobes.std), units="nats/symbol",
    )
    return out


def custom(cfg: dict, seed: int) -> Table:
    """Coherence summary of the configured scenario across beamwidths."""
    R = cfg.get("R", 0.5)
    zeta = cfg.get("zeta", 0.5)
    sc = scenario_from_config(cfg, Scenario())
    lobes = lobes_from_config(cfg, SpatialLobeModel())
    kind = "combined" if sc.rician_k > 0 else "exact"
    out = Table(["theta_deg", "Tc_numeric_ms", "TB_nlos_s", "gain_db"])
    for th in _deg_grid(1, 30, 1):
        beam = Beam.from_degrees(th)
        tb = coherence.tb_nlos_mean(sc, beam, lobes, zeta) if math.sin(sc.pointing) != 0 else math.inf
        out.rows.append((
            th,
            1e3 * coherence.channel_coherence_time(sc, beam, R, kind),
            tb,
            float(link.linear_to_db(link.antenna_gain(beam))),
        ))
    out.manifest.update(_scenario_manifest(sc), pointing_deg=math.degrees(sc.pointing), R=R, zeta=zeta,
                        correlation=kind)
    return out


EXPERIMENTS: dict[str, Callable[[dict, int], Table]] = {
    "fig3": fig3,
    "fig4": fig4,
    "fig5": fig5,
    "fig6": fig6,
    "fig7": fig7,
    "fig8": fig8,
    "fig9": fig9,
    "custom": custom,
}


def run_experiment(name: str, cfg: dict | None = None, seed: int = 0) -> Table:
    try:
        fn = EXPERIMENTS[name]
    except KeyError:
        raise ValueError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}") from None
    cfg = cfg or {}
    table = fn(cfg, seed)
    table.manifest.update(experiment=name, seed=seed, version=__version__)
    for k, v in cfg.items():
        table.manifest.setdefault(f"config.{k}", v)
    return table


__all__ = ["ConfigError", "EXPERIMENTS", "Table", "load_config", "render_csv", "run_experiment", "write_csv"]
