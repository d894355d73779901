"""Command-line entry point: figure experiments and one-off calculators."""

from __future__ import annotations

import argparse
import math
import sys

from . import coherence, link
from .correlation import correlation_fn
from .experiments import EXPERIMENTS, load_config, run_experiment, write_csv
from .scenario import Beam, ConfigError, Scenario


def _beam(args) -> Beam:
    if args.theta_rad is not None:
        return Beam(args.theta_rad)
    return Beam.from_degrees(args.theta_deg)


def _scenario(args) -> Scenario:
    radius = math.inf if getattr(args, "no_pointing", False) else args.scatter_radius
    return Scenario(
        speed=args.speed,
        carrier=args.carrier_ghz * 1e9,
        distance=args.distance,
        scatter_radius=radius,
        pointing=math.radians(args.mu_deg),
    )


def _fmt_time(t: float) -> str:
    if t < 1.0:
        return f"{t * 1e3:.4g} ms"
    return f"{t:.4g} s"


def _calc_coherence(args) -> str:
    sc, beam = _scenario(args), _beam(args)
    if args.mode == "los":
        sc = sc.with_(distance=args.distance)
        return _fmt_time(coherence.tc_los(sc, beam, args.R))
    if args.method == "closed":
        if args.no_pointing:
            t = coherence.tc_no_pointing(sc, beam, args.R)
        elif abs(sc.pointing) >= math.radians(20):
            t = coherence.tc_general_mu(sc, beam, args.R)
        else:
            t = coherence.tc_small_mu(sc, beam, args.R)
    else:
        t = coherence.channel_coherence_time(sc, beam, args.R)
    return _fmt_time(t)


def _calc_beam_coherence(args) -> str:
    sc, beam = _scenario(args), _beam(args)
    if math.sin(sc.pointing) == 0:
        return "inf s"
    if args.mode == "los":
        return _fmt_time(coherence.tb_los(sc, beam, args.zeta))
    return _fmt_time(coherence.tb_nlos_mean(sc, beam, zeta=args.zeta))


def _calc_gain(args) -> str:
    return f"{float(link.linear_to_db(link.antenna_gain(_beam(args)))):.3g} dB"


def _calc_mi(args) -> str:
    sc, beam = _scenario(args), _beam(args)
    lc = link.LinkConfig.from_bandwidth(
        args.bc_mhz * 1e6,
        snr_data=float(link.db_to_linear(args.snr_db)),
        snr_pilot=float(link.db_to_linear(args.snr_db)),
        pilot_spacing=args.nu,
    )
    return f"{link.mi_lower_bound(beam, lc, correlation_fn(sc, beam)):.4g} nats/symbol"


CALCULATORS = {
    "coherence": _calc_coherence,
    "beam-coherence": _calc_beam_coherence,
    "gain": _calc_gain,
    "mi-bound": _calc_mi,
}


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"{text} is not in (0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="beamcoherence", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a figure experiment and write CSV")
    run.add_argument("--experiment", required=True, choices=sorted(EXPERIMENTS))
    run.add_argument("--config", help="key=value configuration file")
    run.add_argument("--out", required=True, help="output CSV path")
    run.add_argument("--seed", type=int, default=0)

    calc = sub.add_parser("calc", help="evaluate a single quantity")
    calc.add_argument("quantity", choices=sorted(CALCULATORS))
    width = calc.add_mutually_exclusive_group()
    width.add_argument("--theta-deg", type=_positive, default=10.0, help="beamwidth in degrees")
    width.add_argument("--theta-rad", type=_positive, default=None, help="beamwidth in radians")
    calc.add_argument("--mu-deg", type=float, default=0.0, help="pointing angle in degrees")
    calc.add_argument("--R", type=_unit_interval, default=0.5, help="correlation threshold")
    calc.add_argument("--zeta", type=_unit_interval, default=0.5, help="beam power threshold")
    calc.add_argument("--mode", choices=("nlos", "los"), default="nlos")
    calc.add_argument("--method", choices=("numeric", "closed"), default=None,
                      help="coherence time method (default: closed with --no-pointing, else numeric)")
    calc.add_argument("--no-pointing", action="store_true", help="ignore the pointing error")
    calc.add_argument("--speed", type=_positive, default=30.0, help="m/s")
    calc.add_argument("--carrier-ghz", type=_positive, default=60.0)
    calc.add_argument("--distance", type=_positive, default=50.0, help="LOS distance in m")
    calc.add_argument("--scatter-radius", type=_positive, default=0.5, help="m")
    calc.add_argument("--bc-mhz", type=_positive, default=10.0, help="coherence bandwidth")
    calc.add_argument("--snr-db", type=float, default=0.0)
    calc.add_argument("--nu", type=int, default=64, help="pilot spacing")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cfg = {}
            if args.config:
                with open(args.config, encoding="utf-8") as fh:
                    cfg = load_config(fh.read())
            table = run_experiment(args.experiment, cfg, args.seed)
            write_csv(table, args.out)
            print(f"wrote {len(table.rows)} rows to {args.out}")
        else:
            if args.method is None:
                args.method = "closed" if args.no_pointing else "numeric"
            if args.nu < 2:
                parser.error("--nu must be at least 2")
            print(CALCULATORS[args.quantity](args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
