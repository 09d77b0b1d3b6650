"""Command-line front end.

Subcommands write CSV/JSON artifacts into a run directory together with a
``manifest.json``; ``optimize`` and ``simulate`` also print their JSON result
to stdout. Exit codes: 0 ok, 2 usage error, 3 numeric infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from . import __version__
from .constellation import PamConstellation, ShapedQam, is_power_of_two
from .gain import GainCurve, matched_gain_curve, uniform_mi_2d
from .infotheory import awgn_capacity, eb_n0_db, per_2d_to
from .mcsim import SimConfig, simulate
from .mismatch import CANDIDATE_STEP_DB, build_gain_map, quantize_pmfs, snr_grid
from .shaping import optimize_shaping

log = logging.getLogger("mbshape")

OUTDIR_ENV = "MBSHAPE_OUTDIR"
CSV_SCHEMA = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3


@dataclass
class RunManifest:
    command: str
    parameters: dict
    tool_version: str = __version__
    csv_schema: int = CSV_SCHEMA
    seed: int | None = None
    outputs: list[str] = field(default_factory=list)
    wall_time_s: float = 0.0

    def write(self, run_dir: Path) -> Path:
        path = run_dir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")
        return path


def _num(v: float) -> str:
    """Round-trip float formatting for CSV cells."""
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return repr(float(v))


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for r in rows:
            w.writerow([_num(v) for v in r])


def write_gain_curve(curve: GainCurve, path: Path) -> None:
    _write_csv(path, ["snr_db", "gain_db"], curve.rows())


def _qam_order(text: str) -> int:
    try:
        m = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not is_power_of_two(m):
        raise argparse.ArgumentTypeError(f"PAM size must be a power of two >= 2, got {m}")
    return m


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"value must be finite, got {text!r}")
    return v


def _positive(text: str) -> float:
    v = _finite(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"value must be > 0, got {text!r}")
    return v


def _count(text: str) -> int:
    try:
        n = int(float(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"need at least 1, got {n}")
    return n


def _thresholds(text: str) -> list[float]:
    return [_positive(t) for t in text.split(",") if t.strip()]


def _run_dir(args, tag: str) -> Path:
    if args.out is not None:
        d = Path(args.out)
    else:
        base = Path(os.environ.get(OUTDIR_ENV, "mbshape-runs"))
        d = base / f"{tag}-{datetime.now():%Y%m%d-%H%M%S}"
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_optimize(args) -> int:
    sol = optimize_shaping(args.m, args.snr)
    out = sol.to_dict()
    if sol.nu == 0.0 and np.ptp(sol.constellation.levels**2) == 0:
        out["note"] = "single-modulus constellation: shaping has no effect, PMF is uniform"
    text = json.dumps(out, indent=2)
    print(text)
    if args.out is not None:
        t0 = time.perf_counter()
        d = _run_dir(args, "optimize")
        (d / "solution.json").write_text(text + "\n")
        man = RunManifest("optimize", {"m": args.m, "snr_db": args.snr}, outputs=["solution.json"])
        man.wall_time_s = time.perf_counter() - t0
        man.write(d)
    return EXIT_OK


def curves_rows(m: int, grid: np.ndarray, per: str):
    uniform = uniform_mi_2d(m, grid)
    for s, u in zip(grid, uniform):
        shaped = optimize_shaping(m, float(s)).mi_bits_per_2d
        yield (
            float(s),
            per_2d_to(float(u), per),
            per_2d_to(shaped, per),
            per_2d_to(awgn_capacity(float(s)), per),
            eb_n0_db(float(s), float(u)),
            eb_n0_db(float(s), shaped),
        )


def cmd_curves(args) -> int:
    t0 = time.perf_counter()
    grid = snr_grid(args.lo, args.hi, args.step)
    d = _run_dir(args, f"curves-m{args.m}")
    header = ["snr_db", "mi_uniform", "mi_shaped", "capacity", "eb_n0_uniform_db", "eb_n0_shaped_db"]
    _write_csv(d / "curves.csv", header, curves_rows(args.m, grid, args.per))
    man = RunManifest(
        "curves",
        {"m": args.m, "lo_db": args.lo, "hi_db": args.hi, "step_db": args.step, "per": args.per},
        outputs=["curves.csv"],
    )
    man.wall_time_s = time.perf_counter() - t0
    man.write(d)
    print(d / "curves.csv")
    return EXIT_OK


def cmd_gains(args) -> int:
    t0 = time.perf_counter()
    grid = snr_grid(args.lo, args.hi, args.step)
    d = _run_dir(args, "gains")
    outputs = []
    for m in args.m:
        curve = matched_gain_curve(m, grid)
        name = f"gain_m{m}.csv"
        write_gain_curve(curve, d / name)
        outputs.append(name)
        s, g = curve.peak()
        print(f"m={m}: peak gain {g:.4f} dB at {s:g} dB")
    man = RunManifest(
        "gains",
        {"m": args.m, "lo_db": args.lo, "hi_db": args.hi, "step_db": args.step},
        outputs=outputs,
    )
    man.wall_time_s = time.perf_counter() - t0
    man.write(d)
    return EXIT_OK


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    grid = snr_grid(args.lo, args.hi, args.step)
    log.info("sweeping %d x %d grid for m=%d with %d workers", len(grid), len(grid), args.m, args.workers)
    gmap = build_gain_map(args.m, args.lo, args.hi, args.step, workers=args.workers)
    d = _run_dir(args, f"sweep-m{args.m}")
    gmap.write_matrix_csv(d / "penalty_matrix.csv")
    gmap.write_long_csv(d / "penalty_long.csv")
    write_gain_curve(GainCurve(gmap.grid_db, gmap.matched_gain_db), d / "matched_gain.csv")
    outputs = ["penalty_matrix.csv", "penalty_long.csv", "matched_gain.csv"]
    for th in args.thresholds:
        table = quantize_pmfs(gmap, th, args.candidate_step)
        name = f"table_{th:g}dB.json"
        (d / name).write_text(table.to_json() + "\n")
        outputs.append(name)
        print(f"threshold {th:g} dB: {len(table)} PMFs")
        for e in table.entries:
            print(f"  {e.channel_snr_lo_db:g}-{e.channel_snr_hi_db:g} dB <- shaping {e.shaping_snr_db:g} dB")
    man = RunManifest(
        "sweep",
        {
            "m": args.m,
            "lo_db": args.lo,
            "hi_db": args.hi,
            "step_db": args.step,
            "thresholds_db": args.thresholds,
            "candidate_step_db": args.candidate_step,
            "workers": args.workers,
        },
        outputs=outputs,
    )
    man.wall_time_s = time.perf_counter() - t0
    man.write(d)
    print(d)
    return EXIT_OK


def _load_config(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def cmd_simulate(args) -> int:
    params = {}
    if args.config is not None:
        params.update(_load_config(args.config))
    for key in ("m", "snr", "n", "seed", "shaping_snr", "uniform", "estimated_variance"):
        v = getattr(args, key)
        if v is not None and v is not False:
            params[key] = v
    missing = [k for k in ("m", "snr") if k not in params]
    if missing:
        print(f"simulate: missing required parameter(s): {', '.join(missing)}", file=sys.stderr)
        return EXIT_USAGE
    m = params["m"]
    n = params.get("n", 10**6)
    if isinstance(n, float) and n.is_integer():
        n = int(n)
    if not is_power_of_two(m) or not isinstance(n, int) or n < 1:
        print("simulate: m must be a power of two >= 2 and n >= 1", file=sys.stderr)
        return EXIT_USAGE
    snr = float(params["snr"])
    seed = int(params.get("seed", 0))
    if params.get("uniform"):
        pam = PamConstellation.uniform(m)
    else:
        pam = optimize_shaping(m, float(params.get("shaping_snr", snr))).constellation
    t0 = time.perf_counter()
    cfg = SimConfig(n, snr, seed, ShapedQam(pam), bool(params.get("estimated_variance", False)))
    report = simulate(cfg)
    text = report.to_json()
    print(text)
    if args.out is not None:
        d = _run_dir(args, "simulate")
        (d / "report.json").write_text(text + "\n")
        man = RunManifest("simulate", params, seed=seed, outputs=["report.json"])
        man.wall_time_s = time.perf_counter() - t0
        man.write(d)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mbshape", description="Maxwell-Boltzmann shaped QAM toolkit")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def out_flag(sp, help_text="run directory (default: $%s/<command>-<time>)" % OUTDIR_ENV):
        sp.add_argument("--out", default=None, help=help_text)

    sp = sub.add_parser("optimize", help="optimal MB PMF for one shaping SNR")
    sp.add_argument("--m", type=_qam_order, required=True, help="PAM size per quadrature (QAM order is m**2)")
    sp.add_argument("--snr", type=_finite, required=True, help="shaping SNR Es/N0 in dB")
    out_flag(sp, "also write solution.json and a manifest here")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("curves", help="MI, capacity and Eb/N0 versus SNR")
    sp.add_argument("--m", type=_qam_order, required=True)
    sp.add_argument("--lo", type=_finite, default=5.0)
    sp.add_argument("--hi", type=_finite, default=25.0)
    sp.add_argument("--step", type=_positive, default=0.1)
    sp.add_argument("--per", choices=["dp", "2d", "1d"], default="dp", help="rate unit for MI/capacity columns")
    out_flag(sp)
    sp.set_defaults(func=cmd_curves)

    sp = sub.add_parser("gains", help="matched sensitivity-gain curves")
    sp.add_argument("--m", type=lambda t: [_qam_order(x) for x in t.split(",")], default=[4, 8])
    sp.add_argument("--lo", type=_finite, default=5.0)
    sp.add_argument("--hi", type=_finite, default=25.0)
    sp.add_argument("--step", type=_positive, default=0.1)
    out_flag(sp)
    sp.set_defaults(func=cmd_gains)

    sp = sub.add_parser("sweep", help="mismatch penalty map and PMF lookup tables")
    sp.add_argument("--m", type=_qam_order, required=True)
    sp.add_argument("--lo", type=_finite, default=5.0)
    sp.add_argument("--hi", type=_finite, default=25.0)
    sp.add_argument("--step", type=_positive, default=0.1)
    sp.add_argument("--thresholds", type=_thresholds, default=[0.1, 0.2, 0.3])
    sp.add_argument(
        "--candidate-step",
        type=_positive,
        default=CANDIDATE_STEP_DB,
        help="resolution of table shaping SNRs in dB (falls back to the full grid if that needs fewer PMFs)",
    )
    sp.add_argument("--workers", type=_count, default=os.cpu_count() or 1)
    out_flag(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="Monte-Carlo AIR estimate")
    sp.add_argument("--config", default=None, help="JSON file with any of the flag names as keys")
    sp.add_argument("--m", type=_qam_order, default=None)
    sp.add_argument("--snr", type=_finite, default=None, help="channel SNR in dB")
    sp.add_argument("--n", type=_count, default=None, help="number of symbols (default 1e6)")
    sp.add_argument("--seed", type=int, default=None)
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--shaping-snr", type=_finite, default=None, help="optimize the PMF here (default: channel SNR)")
    group.add_argument("--uniform", action="store_true", default=None)
    sp.add_argument("--estimated-variance", action="store_true", default=None, help="decode with measured noise power")
    out_flag(sp)
    sp.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ValueError as e:
        print(f"{parser.prog} {args.command}: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
