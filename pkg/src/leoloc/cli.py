"""Command-line front door: simulate, frontend, localize, evaluate, sweep.

Every failure raised by the library carries a stable category string; the
CLI prints it as ``error [category] message`` on stderr and exits nonzero,
so callers can branch on the category without parsing prose.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from dataclasses import replace

from . import io as lio
from .aoa import ArrayGeometry
from .errors import LeolocError
from .geodesy import SPEED_OF_LIGHT, GeodeticPosition
from .montecarlo import Scenario, evaluate, generate_passes
from .pipeline import (CalibrationOffsets, GroundStation, LocalizeConfig,
                       calibrate, localize)
from .ranging import HeightGrid
from .signalproc import (DEFAULT_OVERLAP, DEFAULT_WINDOW, detect_and_track,
                         stft)


def _cmd_simulate(args) -> int:
    sc = lio.load_scenario(args.scenario)
    if args.passes is not None:
        sc = replace(sc, n_passes=args.passes)
    os.makedirs(args.outdir, exist_ok=True)
    gs = sc.ground_station()
    n_written = 0
    for gp in generate_passes(sc):
        if gp.index < 0:
            pass_path = os.path.join(args.outdir, "cal_pass.txt")
            truth_path = os.path.join(args.outdir, "cal_truth.txt")
        else:
            pass_path = os.path.join(args.outdir,
                                     f"pass_{gp.index:04d}.txt")
            truth_path = os.path.join(args.outdir,
                                      f"truth_{gp.index:04d}.txt")
        lio.write_pass_file(pass_path, gp.obs, gs)
        lio.write_truth_file(truth_path, gp.truth, gp.spec)
        n_written += 1
        print(f"{pass_path}  h={gp.params['height']/1e3:.0f}km "
              f"peak_el={math.degrees(gp.truth.peak_elevation):.1f}deg "
              f"n={gp.obs.n_valid}/{len(gp.obs)}")
    print(f"wrote {n_written} passes to {args.outdir}")
    return 0


def _cmd_frontend(args) -> int:
    cap = lio.read_iq_file(args.capture)
    specs = [stft(cap.channels[c], cap.sample_rate, args.window,
                  args.overlap, t0=cap.t0) for c in range(cap.n_channels)]
    if len(specs) != 3:
        print(f"error [file-format] capture has {len(specs)} channels, "
              "need 3", file=sys.stderr)
        return 2
    obs = detect_and_track(specs[0], specs[1], specs[2])
    lam = SPEED_OF_LIGHT / cap.fc
    gs = GroundStation(
        GeodeticPosition(math.radians(args.lat), math.radians(args.lon),
                         args.alt),
        ArrayGeometry.from_half_wavelengths(args.k, lam,
                                            yaw=math.radians(args.yaw)))
    lio.write_pass_file(args.output, obs, gs)
    print(f"{args.output}  frames={len(obs)} valid={obs.n_valid}")
    return 0


def _cmd_localize(args) -> int:
    obs, gs, _fc = lio.read_pass_file(args.passfile)
    if (args.cal_pass is None) != (args.cal_truth is None):
        print("error [config] --cal-pass and --cal-truth go together",
              file=sys.stderr)
        return 2
    cal = CalibrationOffsets.zero()
    if args.cal_pass is not None:
        cal_obs, cal_gs, _ = lio.read_pass_file(args.cal_pass)
        cal_truth, _ = lio.read_truth_file(args.cal_truth)
        cal = calibrate(cal_truth, cal_obs, cal_gs)
    cfg = LocalizeConfig(
        min_elevation=math.radians(args.mask_deg),
        height_grid=HeightGrid(lo=args.grid_lo_km * 1e3,
                               hi=args.grid_hi_km * 1e3,
                               step=args.grid_step_km * 1e3))
    res = localize(obs, gs, cal, cfg)
    lio.write_result_file(args.output, res)
    d = res.diagnostics
    print(f"{args.output}  winner={res.winner} h*={res.h_star/1e3:.0f}km "
          f"candidates={d.n_candidates}->{d.n_after_elevation}"
          f"->{d.n_after_timing}->{d.n_ranged}")
    return 0


def _report_out(report, args) -> None:
    text = report.render_text()
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as f:
            f.write(text)
        print(f"wrote {args.output}")
    if args.csv is not None:
        with open(args.csv, "w") as f:
            f.write(report.render_csv())
        print(f"wrote {args.csv}")


def _cmd_evaluate(args) -> int:
    sc = lio.load_scenario(args.scenario)
    if args.passes is not None:
        sc = replace(sc, n_passes=args.passes)
    _report_out(evaluate(sc), args)
    return 0


def _cmd_sweep(args) -> int:
    sc = replace(lio.load_scenario(args.scenario), mode="sweep")
    if args.passes is not None:
        sc = replace(sc, n_passes=args.passes)
    _report_out(evaluate(sc), args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="leoloc",
        description="Passive 3D localization of LEO transmitters with a "
                    "three-antenna sparse L-array")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate",
                       help="scenario -> per-pass observable + truth files")
    s.add_argument("scenario", help="scenario YAML file")
    s.add_argument("-o", "--outdir", required=True, help="output directory")
    s.add_argument("--passes", type=int, default=None,
                   help="override scenario n_passes")
    s.set_defaults(func=_cmd_simulate)

    s = sub.add_parser("frontend",
                       help="three-channel IQ capture -> pass file")
    s.add_argument("capture", help="IQ capture file")
    s.add_argument("-o", "--output", required=True, help="pass file to write")
    s.add_argument("--lat", type=float, required=True,
                   help="station latitude [deg]")
    s.add_argument("--lon", type=float, required=True,
                   help="station longitude [deg]")
    s.add_argument("--alt", type=float, default=0.0,
                   help="station altitude [m] (default 0)")
    s.add_argument("--yaw", type=float, default=0.0,
                   help="array heading east of north [deg] (default 0)")
    s.add_argument("--k", type=int, required=True,
                   help="antenna spacing in half-wavelengths")
    s.add_argument("--window", type=float, default=DEFAULT_WINDOW,
                   help=f"STFT window [s] (default {DEFAULT_WINDOW})")
    s.add_argument("--overlap", type=float, default=DEFAULT_OVERLAP,
                   help=f"STFT overlap fraction (default {DEFAULT_OVERLAP})")
    s.set_defaults(func=_cmd_frontend)

    s = sub.add_parser("localize", help="pass file -> result file")
    s.add_argument("passfile", help="pass observation file")
    s.add_argument("-o", "--output", required=True,
                   help="result file to write")
    s.add_argument("--cal-pass", default=None,
                   help="pass file of the known calibration satellite")
    s.add_argument("--cal-truth", default=None,
                   help="truth file of the known calibration satellite")
    s.add_argument("--mask-deg", type=float, default=30.0,
                   help="elevation mask [deg] (default 30)")
    s.add_argument("--grid-lo-km", type=float, default=300.0,
                   help="height grid lower bound [km] (default 300)")
    s.add_argument("--grid-hi-km", type=float, default=2000.0,
                   help="height grid upper bound [km] (default 2000)")
    s.add_argument("--grid-step-km", type=float, default=2.0,
                   help="height grid step [km] (default 2)")
    s.set_defaults(func=_cmd_localize)

    s = sub.add_parser("evaluate",
                       help="scenario -> percentile report (mode from file)")
    s.add_argument("scenario", help="scenario YAML file")
    s.add_argument("-o", "--output", default=None,
                   help="report file (default: stdout)")
    s.add_argument("--csv", default=None, help="also write per-pass CSV")
    s.add_argument("--passes", type=int, default=None,
                   help="override scenario n_passes")
    s.set_defaults(func=_cmd_evaluate)

    s = sub.add_parser("sweep",
                       help="scenario -> per-k report (forces sweep mode)")
    s.add_argument("scenario", help="scenario YAML file")
    s.add_argument("-o", "--output", default=None,
                   help="report file (default: stdout)")
    s.add_argument("--csv", default=None, help="also write per-pass CSV")
    s.add_argument("--passes", type=int, default=None,
                   help="override scenario n_passes")
    s.set_defaults(func=_cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LeolocError as e:
        print(f"error [{e.category}] {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error [io] {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
