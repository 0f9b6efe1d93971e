"""Command-line entry point ``tpc``.

Exit codes: 0 success, 2 configuration error, 3 runtime decode failure,
4 non-convergence where convergence was required.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .channel import RngStream
from .chase import EmptyList
from .de import ConfigurationError, InvalidBracket
from .gmi import EmptySampleSet, LabeledSampleSet, PostProcParams, gmi_estimate, optimize_theta
from .product import DimensionMismatch, encode_product
from .sim import (
    CalibrationFailed,
    ConfigError,
    SimConfig,
    calibrate,
    density_evolution,
    emit_plot_data,
    read_report_csv,
    simulate_ber,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_NOT_CONVERGED = 4

log = logging.getLogger("tpc")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int, help="master seed (overrides config)")
    p.add_argument("--workers", type=int, help="worker processes (overrides config)")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
    p.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tpc", description="Product codes under Chase-Pyndiah decoding")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="encode a k x k message (random if no input)")
    _common(p)
    p.add_argument("--input", help="text file of k rows of k bits")

    p = sub.add_parser("simulate-ber", help="BER simulation; writes ber.csv")
    _common(p)

    p = sub.add_parser("calibrate", help="fit per-half-iteration (gamma, delta) schedules")
    _common(p)

    p = sub.add_parser("density-evolution", help="Monte-Carlo DE threshold search")
    _common(p)

    p = sub.add_parser("gmi-estimate", help="GMI and theta* of a (w, l_ch, alt_flag) sample file")
    p.add_argument("samples", help="CSV with columns w, l_ch, alt_flag, or .npz with arrays w, l_ch, alt")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("-v", "--verbose", action="count", default=0)

    p = sub.add_parser("emit-plot-data", help="merge BER CSV reports into long-format plot data")
    p.add_argument("reports", nargs="+")
    p.add_argument("--out", default="plot_data.csv")
    p.add_argument("-v", "--verbose", action="count", default=0)

    p = sub.add_parser("config", help="configuration utilities")
    csub = p.add_subparsers(dest="config_command", required=True)
    show = csub.add_parser("show", help="print the effective configuration")
    _common(show)
    return ap


def load_config(args) -> SimConfig:
    cfg = SimConfig.load(args.config) if args.config else SimConfig()
    cfg = cfg.with_overrides(args.set)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.out = args.out
    return cfg.validate()


def _read_samples(path: str) -> LabeledSampleSet:
    if path.endswith(".npz"):
        z = np.load(path)
        return LabeledSampleSet(z["w"], z["l_ch"], z["alt"])
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if rows and not {"w", "l_ch", "alt_flag"} <= set(rows[0]):
        raise ConfigError("sample CSV needs columns w, l_ch, alt_flag")
    w = np.array([float(r["w"]) for r in rows])
    l = np.array([float(r["l_ch"]) for r in rows])
    a = np.array([r["alt_flag"].strip().lower() in ("1", "true", "t", "yes") for r in rows])
    return LabeledSampleSet(w, l, a)


def _cmd_encode(args) -> int:
    cfg = load_config(args)
    pc = cfg.product_code()
    if args.input:
        text = Path(args.input).read_text().split()
        msg = np.array([list(tok) for tok in text], dtype=np.uint8)
    else:
        msg = RngStream(cfg.seed, (0xE1,)).generator().integers(0, 2, (pc.k, pc.k), dtype=np.uint8)
    for row in encode_product(pc, msg):
        print("".join(map(str, row)))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = load_config(args)
    rep = simulate_ber(cfg)
    out = Path(cfg.out)
    rep.write_csv(out / "ber.csv")
    for snr, sched in rep.schedules.items():
        sched.save(out / f"schedule_{cfg.decoder}_{snr:.3f}dB.json")
    for r in rep.rows:
        print(f"{r.ebn0_db:.3f} dB  frames={r.frames}  bit_errors={r.bit_errors}  BER={r.ber:.4e}")
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    cfg = load_config(args)
    for snr, cal in calibrate(cfg).items():
        print(f"# {snr:.3f} dB, {cal.pilot_frames} pilot frames")
        for e in cal.report():
            print(f"{e['l']:3d}  gamma={e['gamma']:.3f}  delta={e['delta']:.3f}  gmi={e['gmi']:.5f}")
    return EXIT_OK


def _cmd_de(args) -> int:
    cfg = load_config(args)
    res = density_evolution(cfg)
    print(json.dumps({"ebn0_star_db": res.ebn0_star_db, "bracket": list(res.bracket)}))
    return EXIT_OK


def _cmd_gmi(args) -> int:
    samples = _read_samples(args.samples)
    fit = optimize_theta(samples)
    g = gmi_estimate(samples, PostProcParams(args.gamma, args.delta))
    print(json.dumps({
        "samples": len(samples),
        "gmi": g,
        "gamma_star": fit.theta.gamma,
        "delta_star": fit.theta.delta,
        "gmi_star": fit.gmi,
        "degenerate": fit.degenerate,
    }))
    return EXIT_OK


def _cmd_plot(args) -> int:
    rows = emit_plot_data([read_report_csv(p) for p in args.reports], args.out)
    print(f"wrote {len(rows)} rows to {args.out}")
    return EXIT_OK


def _cmd_config(args) -> int:
    print(json.dumps(load_config(args).to_json(), indent=2))
    return EXIT_OK


COMMANDS = {
    "encode": _cmd_encode,
    "simulate-ber": _cmd_simulate,
    "calibrate": _cmd_calibrate,
    "density-evolution": _cmd_de,
    "gmi-estimate": _cmd_gmi,
    "emit-plot-data": _cmd_plot,
    "config": _cmd_config,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DimensionMismatch, EmptySampleSet, OSError) as e:
        log.error("%s", e)
        return EXIT_CONFIG
    except (EmptyList, ConfigurationError, CalibrationFailed) as e:
        log.error("%s", e)
        return EXIT_RUNTIME
    except InvalidBracket as e:
        log.error("%s", e)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
