"""Acceptance suite: one test per criterion, tolerances fixed up front.

Run with ``pytest tests/test_acceptance.py -v -s`` to also see the measured
figures behind each verdict.
"""

import math
import time

import numpy as np
from scipy import integrate
from scipy.signal import find_peaks

from beamcoherence import cli, coherence, link, mcsim, realign
from beamcoherence.correlation import corr_combined, corr_nlos_approx, corr_nlos_exact, corr_nlos_quadrature, correlation_fn
from beamcoherence.experiments import run_experiment
from beamcoherence.scenario import Beam, Scenario, SpatialLobeModel

TOL_QUADRATURE = 1e-8
TOL_APPROX = 0.02
TOL_MC = 0.05
BUDGET_MC_S = 120.0
TOL_SMALL_MU = 0.15
TOL_GENERAL_MU = 0.10
TOL_WORST_CASE = 0.02
MIN_TB_TC_RATIO = 10.0
TOL_KALMAN = 1e-10
BUDGET_REALIGN_S = 60.0
OSC_PROMINENCE = 0.01  # smaller dips are numerical ripple, not oscillation


def report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} | {detail}")


def test_criterion_1_correlation_triple_agreement():
    beam = Beam.from_concentration(50.0)
    start = time.perf_counter()
    worst = {"quad": 0.0, "approx": 0.0, "mc": 0.0}
    for mu in (10, 80):
        sc = Scenario(pointing=math.radians(mu), scatter_radius=0.5)
        dt = 0.01 / sc.doppler
        tau = dt * np.arange(51)
        exact = corr_nlos_exact(sc, beam, tau)
        quad = np.array([corr_nlos_quadrature(sc, beam, t) for t in tau])
        worst["quad"] = max(worst["quad"], np.max(np.abs(exact - quad)))
        worst["approx"] = max(worst["approx"], np.max(np.abs(corr_nlos_approx(sc, beam, tau) - exact)))
        traces = mcsim.simulate_ensemble(sc, beam, 10000, 200 * dt, dt, 2024 + mu, 200)
        sim = np.array([s.value for s in mcsim.empirical_correlation(traces, tau[1:])])
        worst["mc"] = max(worst["mc"], np.max(np.abs(sim - exact[1:])))
    elapsed = time.perf_counter() - start
    ok = (worst["quad"] <= TOL_QUADRATURE and worst["approx"] <= TOL_APPROX and worst["mc"] <= TOL_MC
          and elapsed <= BUDGET_MC_S)
    report(1, ok, f"quad {worst['quad']:.1e}, approx {worst['approx']:.4f}, mc {worst['mc']:.4f}, {elapsed:.1f} s")
    assert worst["quad"] <= TOL_QUADRATURE
    assert worst["approx"] <= TOL_APPROX
    assert worst["mc"] <= TOL_MC
    assert elapsed <= BUDGET_MC_S


def _fig4_curves(mu):
    beam = Beam.from_concentration(50.0)
    sc = Scenario(pointing=math.radians(mu), scatter_radius=5.0, distance=50.0)
    tau = np.arange(0, 201) * 1e-4
    ks = np.arange(11) * 0.2
    return tau, ks, np.array([np.abs(corr_combined(sc.with_(rician_k=k), beam, tau)) for k in ks])


def _has_oscillation(tau, r):
    below = np.flatnonzero(r <= 0.3)
    stop = below[0] if below.size else len(r)
    minima, _ = find_peaks(-r[:stop], prominence=OSC_PROMINENCE)
    return minima.size >= 1


def test_criterion_2_rician_monotonicity_and_oscillation():
    drops = {}
    osc = {}
    for mu in (10, 80):
        tau, ks, curves = _fig4_curves(mu)
        d = np.diff(curves, axis=0)
        bad = np.flatnonzero((d < -1e-12).any(axis=0))
        drops[mu] = (float(-d.min()), len(bad), len(tau))
        osc[mu] = _has_oscillation(tau, curves[5])  # K = 1
    monotone = all(v[1] == 0 for v in drops.values())
    ok = monotone and osc[10] and not osc[80]
    report(2, ok, f"grid points where |R| drops as K grows: mu10 {drops[10][1]}/{drops[10][2]} "
                  f"(max drop {drops[10][0]:.3f}), mu80 {drops[80][1]}/{drops[80][2]}; "
                  f"oscillation mu10={osc[10]}, mu80={osc[80]}")
    assert osc[10] and not osc[80], "oscillation signature"
    assert monotone, f"|R| not non-decreasing in K: {drops}"


def test_criterion_3_coherence_time_approximations():
    errs = {}
    sc = Scenario(pointing=math.radians(1), scatter_radius=0.5)
    lo = math.degrees(math.sqrt(math.radians(1)))
    errs["small_mu1"] = max(
        abs(coherence.tc_small_mu(sc, b) / coherence.channel_coherence_time(sc, b) - 1)
        for b in map(Beam.from_degrees, np.linspace(lo, 30, 46))
    )
    for mu in (30, 45, 60, 90):
        sc = Scenario(pointing=math.radians(mu), scatter_radius=0.5)
        errs[f"general_mu{mu}"] = max(
            abs(coherence.tc_general_mu(sc, b) / coherence.channel_coherence_time(sc, b) - 1)
            for b in map(Beam.from_degrees, np.arange(2, mu / 2 + 1e-9, 0.5))
        )
    sc = Scenario(pointing=math.pi / 2, scatter_radius=0.5)
    errs["worst_case_mu90"] = max(
        abs(coherence.tc_general_mu(sc, b) / coherence.tc_worst_case(sc, b) - 1)
        for b in map(Beam.from_concentration, np.geomspace(25, 1e5, 40))
    )
    limits = {k: TOL_SMALL_MU if k.startswith("small") else TOL_WORST_CASE if k.startswith("worst") else TOL_GENERAL_MU
              for k in errs}
    failed = [k for k in errs if errs[k] > limits[k]]
    report(3, not failed, ", ".join(f"{k} {v:.3f}/{limits[k]}" for k, v in errs.items()))
    assert not failed, f"exceeded: {failed}"


def test_criterion_4_nonzero_optimal_beamwidth():
    peaks = {}
    for mu in (1, 5):
        sc = Scenario(pointing=math.radians(mu), scatter_radius=0.5)
        ths = np.arange(1.0, 30.0 + 1e-9, 0.25)
        tc = np.array([coherence.channel_coherence_time(sc, Beam.from_degrees(t)) for t in ths])
        i = int(np.argmax(tc))
        peaks[mu] = (ths[i], 0 < i < len(ths) - 1 and tc[i] > tc[0] and tc[i] > tc[-1])
    ok = all(v[1] for v in peaks.values())
    report(4, ok, ", ".join(f"mu{m}: argmax {v[0]:.2f} deg" for m, v in peaks.items()))
    assert ok


def test_criterion_5_beam_vs_channel_coherence():
    sc = Scenario(pointing=math.radians(80), scatter_radius=5.0)
    beam = Beam.from_degrees(10)
    ratio = coherence.tb_nlos_mean(sc, beam, SpatialLobeModel(), 0.5) / coherence.channel_coherence_time(sc, beam, 0.5)
    report(5, ratio >= MIN_TB_TC_RATIO, f"T_B / T_c = {ratio:.1f}")
    assert ratio >= MIN_TB_TC_RATIO


def test_criterion_6_kalman_consistency():
    rng = np.random.default_rng(606)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(100):
        alpha = rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        s = float(link.db_to_linear(rng.uniform(-10, 30)))
        sig2 = 1 - abs(alpha) ** 2
        seq = link.kalman_error_sequence(alpha, sig2, s, 4000)
        assert abs(seq[-1] - seq[-2]) <= 1e-15, "recursion not converged"
        worst = max(worst, abs(link.psi_steady(alpha, s) - seq[-1]))
    elapsed = time.perf_counter() - start
    report(6, worst <= TOL_KALMAN, f"max |psi_steady - recursion| {worst:.1e}, {elapsed:.2f} s")
    assert worst <= TOL_KALMAN


def test_criterion_7_optimal_pilot_spacing():
    beam = Beam.from_degrees(10)
    corr0 = correlation_fn(Scenario(pointing=0.0), beam)
    corr80 = correlation_fn(Scenario(pointing=math.radians(80)), beam)
    grid = link.DEFAULT_NU_GRID  # 2, 4, 8, ..., 1024

    def best(corr, bc):
        return link.optimal_pilot_spacing(beam, link.LinkConfig.from_bandwidth(bc * 1e6), corr, grid)

    nu10 = best(corr0, 10)
    by_bc = [best(corr0, bc) for bc in (5, 10, 20, 40)]
    nu80 = best(corr80, 10)
    ok = nu10 in (32, 64, 128) and all(np.diff(by_bc) >= 0) and nu10 >= nu80
    report(7, ok, f"nu*(10 MHz, mu0) = {nu10}, over B_c 5/10/20/40 MHz: {by_bc}, mu80: {nu80}")
    assert nu10 in (32, 64, 128)
    assert all(np.diff(by_bc) >= 0)
    assert nu10 >= nu80


def test_criterion_8_realignment_conclusion():
    start = time.perf_counter()
    table = run_experiment("fig9", {}, 0)
    elapsed = time.perf_counter() - start
    delta = table.column("delta_db")
    gap = table.column("C_long") - table.column("C_short")
    theta = table.column("theta_deg")
    losers = {d: theta[(delta == d) & (gap < 0)].tolist() for d in (3.0, 10.0)}
    mean_gap = {d: float(gap[delta == d].mean()) for d in (3.0, 10.0)}
    ok = not losers[3.0] and not losers[10.0] and mean_gap[10.0] > mean_gap[3.0] and elapsed <= BUDGET_REALIGN_S
    report(8, ok, f"theta where C_short > C_long: 3 dB {losers[3.0]}, 10 dB {losers[10.0]}; "
                  f"mean gap 3 dB {mean_gap[3.0]:.3f}, 10 dB {mean_gap[10.0]:.3f}; {elapsed:.1f} s")
    assert elapsed <= BUDGET_REALIGN_S
    assert mean_gap[10.0] > mean_gap[3.0]
    assert not losers[3.0] and not losers[10.0], "long-term realignment does not dominate"


def _sig3(x):
    return float(f"{x:.3g}")


def test_criterion_9_closed_form_micro_oracles(capsys):
    rng = np.random.default_rng(9)
    n = 10_000_000
    g1, g2 = rng.exponential(size=n), rng.exponential(size=n)
    p_hat = float(np.mean(g1 >= g2 / 2.0))
    se = math.sqrt(p_hat * (1 - p_hat) / n)
    p1, p2 = realign.selection_probs(2.0)
    probs_ok = abs(p_hat - p1) <= 3 * se and abs((1 - p_hat) - p2) <= 3 * se

    gam = np.linspace(0, 30, 3001)
    cdf_num = integrate.cumulative_trapezoid(realign.snr_pdf_short(np.linspace(0, 30, 300001), 1.0, 0.5),
                                             dx=1e-4, initial=0.0)[::100]
    cdf_gap = float(np.max(np.abs(realign.snr_cdf_short(gam, 1.0, 0.5)
                                  - (1 - np.exp(-gam)) * (1 - np.exp(-gam / 0.5)))))
    quad_gap = float(np.max(np.abs(cdf_num - realign.snr_cdf_short(gam, 1.0, 0.5))))

    outputs = {}
    for key, args in {
        "tc": ["calc", "coherence", "--theta-deg", "10", "--R", "0.5", "--no-pointing"],
        "gain": ["calc", "gain", "--theta-deg", "10"],
        "tb": ["calc", "beam-coherence", "--mode", "los", "--theta-rad", "0.1", "--mu-deg", "10", "--zeta", "0.5"],
    }.items():
        capsys.readouterr()
        assert cli.main(args) == 0
        outputs[key] = capsys.readouterr().out.split()
    calc_ok = (
        outputs["tc"][1] == "ms" and _sig3(float(outputs["tc"][0])) == 3.37
        and outputs["gain"][1] == "dB" and _sig3(float(outputs["gain"][0])) == 11.6
        and outputs["tb"][1] == "s" and _sig3(float(outputs["tb"][0])) == 1.13
    )
    ok = probs_ok and cdf_gap <= 1e-10 and quad_gap <= 1e-8 and calc_ok
    with capsys.disabled():
        report(9, ok, f"p1 MC {p_hat:.5f} +/- {se:.1e}, CDF identity {cdf_gap:.1e}, pdf->CDF {quad_gap:.1e}, "
                      f"calc {' '.join(outputs['tc'])} / {' '.join(outputs['gain'])} / {' '.join(outputs['tb'])}")
    assert probs_ok
    assert cdf_gap <= 1e-10 and quad_gap <= 1e-8
    assert calc_ok
