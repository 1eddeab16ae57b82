"""continuum-cap: capacity sweeps for a single disk cell.

Every sweep is over the edge SNR, the total received power at the cell edge
divided by the receiver noise there. It is not the per-user SINR, which also
counts the power of other layers as interference. Capacities are written in
the normalized form I0 * U_T (bits per channel use).

Exit codes: 0 success, 2 configuration or argument error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import CellConfig, ConfigError, load_config
from .numerics import OutOfRangeError, QuadratureSpec
from .output import CapacityCurve, csv_text, plot, write_table
from .partition import bounded_capacity, downlink_allocation, make_partition, time_sharing_capacity
from .rates import eta_to_bits
from .scbc import disk_min_power_closed, max_sum_rate, min_power, min_power_ode, uniform_capacity
from .scenario import UniformDensity, tabulate_ccdf
from .scmac import DUALITY_TOL, uplink_allocation, verify_duality

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

DEFAULT_SNR_DB = "-10:40:51"
DEFAULT_ETA = "0:5:51"


class UsageError(ConfigError):
    pass


def _grid(spec: str, flag: str) -> np.ndarray:
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"{flag} expects start:stop:count, got {spec!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"{flag} expects start:stop:count, got {spec!r}") from exc
    if not start < stop:
        raise UsageError(f"{flag}: start must be < stop, got {spec!r}")
    if count < 2:
        raise UsageError(f"{flag}: count must be >= 2, got {count}")
    return np.linspace(start, stop, count)


def _subsets(spec: str) -> list[int]:
    try:
        ks = [int(s) for s in spec.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"--subsets expects comma-separated integers, got {spec!r}") from exc
    if not ks or any(k < 1 for k in ks):
        raise UsageError(f"--subsets values must be >= 1, got {spec!r}")
    return ks


class _Run:
    """Shared state of one invocation: the cell, tolerances and the SNR grid."""

    def __init__(self, cfg: CellConfig, args):
        self.cfg = cfg
        self.args = args
        self.spec = QuadratureSpec(rel_tol=args.tol) if args.tol else QuadratureSpec()
        self.nu_edge = cfg.scenario.nu_edge
        self.factor = cfg.rate_factor
        self.dist = cfg.user_distribution()

    def subsets(self, default: str) -> list[int]:
        ks = _subsets(self.args.subsets or default)
        if self.args.method == "dyadic" and any(k & (k - 1) for k in ks):
            raise UsageError(f"--method dyadic needs power-of-two subset counts, got {ks}")
        return ks

    def snr_db(self) -> np.ndarray:
        return _grid(self.args.snr_db or DEFAULT_SNR_DB, "--snr-db")

    def metadata(self, command: str, **extra) -> dict:
        meta = {
            "tool": f"continuum-cap {__version__}",
            "command": command,
            "scenario": self.cfg.echo(),
            "noise_distribution": self.dist.kind,
            "tolerances": (
                f"quad_rel={self.spec.rel_tol:.3g} quad_abs={self.spec.abs_tol:.3g} "
                "bisect_eta_abs=1e-10 bisect_power_rel=1e-9"
            ),
            "capacity_unit": f"I0*U_T bits per {self.cfg.channel} channel use",
            "edge_snr": "total received power at the cell edge over noise (not the per-user SINR)",
        }
        meta.update(extra)
        return meta

    def exact(self, snr: float) -> float:
        return self.factor * uniform_capacity(self.dist, snr, 1.0, self.spec).i0

    def timesharing(self, snr: float) -> float:
        return self.factor * time_sharing_capacity(self.dist, snr, 1.0, self.spec)


def cmd_uniform_capacity(run: _Run) -> CapacityCurve:
    if run.args.snr_db:
        snrs = [10 ** (d / 10) for d in run.snr_db()]
    else:
        snrs = [run.cfg.scenario.edge_snr]
    cap, eta, power = [], [], []
    for g in snrs:
        res = uniform_capacity(run.dist, g, 1.0, run.spec)
        cap.append(run.factor * res.i0)
        eta.append(res.eta_s)
        power.append(g * run.nu_edge)
    db = [10 * math.log10(g) if g > 0 else -math.inf for g in snrs]
    return CapacityCurve("snr_db", db, {"power": power, "capacity": cap, "eta_s": eta},
                         run.metadata("uniform-capacity"))


def cmd_min_power(run: _Run) -> CapacityCurve:
    etas = _grid(run.args.eta or DEFAULT_ETA, "--eta")
    if etas[0] < 0:
        raise UsageError("--eta values must be >= 0")
    series = {"capacity": [], "min_power": [], "min_power_ode": []}
    closed = isinstance(run.cfg.scenario.density, UniformDensity)
    if closed:
        series["closed_form"] = []
    alpha = run.cfg.scenario.pathloss.alpha
    for e in etas:
        series["capacity"].append(run.factor * eta_to_bits(e))
        series["min_power"].append(run.nu_edge * min_power(run.dist, e, run.spec))
        series["min_power_ode"].append(run.nu_edge * min_power_ode(run.dist, e))
        if closed:
            series["closed_form"].append(disk_min_power_closed(alpha, run.nu_edge, e))
    return CapacityCurve("eta_s", etas, series, run.metadata("min-power"))


def cmd_bounds(run: _Run) -> CapacityCurve:
    ks = run.subsets("3,10,25")
    db = run.snr_db()
    series: dict[str, list] = {"exact": []}
    for k in ks:
        series[f"worst_K{k}"] = []
        series[f"best_K{k}"] = []
    series["timesharing"] = []
    for d in db:
        g = 10 ** (d / 10)
        series["exact"].append(run.exact(g))
        for k in ks:
            for side in ("worst", "best"):
                value = bounded_capacity(run.dist, g, 1.0, k, side, run.args.method)
                series[f"{side}_K{k}"].append(run.factor * value)
        series["timesharing"].append(run.timesharing(g))
    k0 = _dominance_start(ks, series)
    return CapacityCurve("snr_db", db, series, run.metadata(
        "bounds", partition=run.args.method,
        timesharing_below_worst_from_K=str(k0) if k0 is not None else "none"))


def _dominance_start(ks: Sequence[int], series: dict) -> Optional[int]:
    """Smallest K from which every larger listed K beats time sharing everywhere."""
    ts = np.asarray(series["timesharing"])
    start = None
    for k in sorted(ks, reverse=True):
        if np.all(ts <= np.asarray(series[f"worst_K{k}"])):
            start = k
        else:
            break
    return start


def cmd_region(run: _Run) -> CapacityCurve:
    dist = run.cfg.traffic_distribution()
    db = run.snr_db()
    rho, power = [], []
    for d in db:
        g = 10 ** (d / 10)
        rho.append(run.factor * max_sum_rate(dist, g, run.spec))
        power.append(g * run.nu_edge)
    shape = "user density" if run.cfg.traffic is None else "configured traffic"
    return CapacityCurve("snr_db", db, {"power": power, "max_sum_rate": rho},
                         run.metadata("region", traffic_shape=shape))


def cmd_baseline(run: _Run) -> CapacityCurve:
    db = run.snr_db()
    exact, ts, gain = [], [], []
    for d in db:
        g = 10 ** (d / 10)
        c0, cts = run.exact(g), run.timesharing(g)
        exact.append(c0)
        ts.append(cts)
        gain.append(100.0 * (c0 / cts - 1.0))
    return CapacityCurve("snr_db", db, {"exact": exact, "timesharing": ts, "gain_pct": gain},
                         run.metadata("baseline"))


def cmd_uplink(run: _Run) -> CapacityCurve:
    ks = run.subsets("16")
    db = run.snr_db()
    series: dict[str, list] = {"exact": []}
    for k in ks:
        series[f"uplink_worst_K{k}"] = []
    series["timesharing"] = []
    series["gain_pct"] = []
    for d in db:
        g = 10 ** (d / 10)
        c0, cts = run.exact(g), run.timesharing(g)
        series["exact"].append(c0)
        for k in ks:
            value = bounded_capacity(run.dist, g, 1.0, k, "worst", run.args.method, direction="uplink")
            series[f"uplink_worst_K{k}"].append(run.factor * value)
        series["timesharing"].append(cts)
        series["gain_pct"].append(100.0 * (c0 / cts - 1.0))
    extra = {}
    if run.args.duality_check or run.args.layers:
        eta = _operating_eta(run, db)
        extra["operating_eta_s"] = f"{eta:.12g}"
        if run.args.duality_check:
            worst = _duality_report(run, ks, eta)
            extra["duality_max_gap"] = f"{worst:.3g}"
        if run.args.layers:
            _layer_tables(run, ks[0], eta)
    return CapacityCurve("snr_db", db, series, run.metadata("uplink", partition=run.args.method, **extra))


def _operating_eta(run: _Run, db) -> float:
    """Uniform-capacity efficiency at the configured power, or the top of the sweep if that is zero."""
    g = run.cfg.scenario.edge_snr
    if g <= 0:
        g = 10 ** (db[-1] / 10)
    return uniform_capacity(run.dist, g, 1.0, run.spec).eta_s


def _duality_report(run: _Run, ks, eta: float) -> float:
    rows = []
    worst = 0.0
    for k in ks:
        part = make_partition(run.dist, k, eta_to_bits(eta), run.args.method)
        rep = verify_duality(part)
        rows.append([k, rep.downlink_total * run.nu_edge, rep.uplink_total * run.nu_edge, rep.relative_gap])
        worst = max(worst, rep.relative_gap)
    path = run.args.report or _sibling(run.args.out, "_duality.csv")
    write_table(path, ["k", "downlink_total", "uplink_total", "gap"], rows,
                [f"tool: continuum-cap {__version__}", f"eta_s: {eta:.12g}", f"tolerance: {DUALITY_TOL:g}"])
    if worst > DUALITY_TOL:
        raise ArithmeticError(f"duality check failed: max relative gap {worst:.3g} > {DUALITY_TOL:g}")
    return worst


def _layer_tables(run: _Run, k: int, eta: float) -> None:
    part = make_partition(run.dist, k, eta_to_bits(eta), run.args.method)
    down = downlink_allocation(part, "worst")
    up = uplink_allocation(part, "worst")
    header = ["layer", "nu_lo", "nu_hi", "rate", "power", "cumulative"]
    scale = run.nu_edge
    for name, powers in (("downlink", down.layer_powers), ("uplink", up.layer_powers)):
        cum = np.cumsum(powers)
        rows = [
            [i, lo * scale, hi * scale, r, p * scale, c * scale]
            for i, ((lo, hi, r), p, c) in enumerate(zip(part.intervals, powers, cum))
        ]
        write_table(f"{run.args.layers}_{name}.csv", header, rows,
                    [f"tool: continuum-cap {__version__}", f"direction: {name}", "side: worst", f"K: {k}"])


def cmd_ccdf(run: _Run) -> CapacityCurve:
    n = run.args.points
    nu = np.concatenate([[0.0], np.geomspace(1e-6, 1.0, n - 1)])
    table = tabulate_ccdf(run.dist, nu)
    return CapacityCurve("nu", table[:, 0] * run.nu_edge, {"G": table[:, 1]}, run.metadata("ccdf"))


def _sibling(out: Optional[str], suffix: str) -> str:
    if not out:
        return "duality" + suffix
    p = Path(out)
    return str(p.with_name(p.stem + suffix))


COMMANDS = {
    "uniform-capacity": cmd_uniform_capacity,
    "min-power": cmd_min_power,
    "bounds": cmd_bounds,
    "region": cmd_region,
    "uplink": cmd_uplink,
    "baseline": cmd_baseline,
    "ccdf": cmd_ccdf,
}

_Y_LABELS = {
    "uniform-capacity": "I0*U_T (bits/channel use)",
    "bounds": "I0*U_T (bits/channel use)",
    "baseline": "I0*U_T (bits/channel use)",
    "uplink": "I0*U_T (bits/channel use)",
    "region": "max sum rate (bits/channel use)",
    "min-power": "power",
    "ccdf": "G(nu)",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="continuum-cap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"continuum-cap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="scenario TOML file")
        p.add_argument("--out", help="CSV output path (stdout if omitted)")
        p.add_argument("--svg", help="also write an SVG plot here")
        p.add_argument("--snr-db", help="edge SNR sweep start:stop:count in dB")
        p.add_argument("--subsets", help="comma-separated subset counts K")
        p.add_argument("--tol", type=float, help="relative quadrature tolerance")
        p.add_argument("--method", choices=("quantile", "dyadic"), default="quantile",
                       help="how K subsets are cut (default: equal-rate quantiles)")
        if name == "min-power":
            p.add_argument("--eta", help="spectral efficiency grid start:stop:count in nats")
        if name == "uplink":
            p.add_argument("--duality-check", action="store_true",
                           help="write a downlink/uplink sum-power report; fail if the gap exceeds 1e-9")
            p.add_argument("--report", help="duality report path (default: <out>_duality.csv)")
            p.add_argument("--layers", help="write per-layer tables to <prefix>_{downlink,uplink}.csv")
        if name == "ccdf":
            p.add_argument("--points", type=int, default=257, help="number of tabulated noise values")
    return parser


def _glue_ranges(argv: Sequence[str]) -> list[str]:
    # "--snr-db -10:40:51" would otherwise read the range as an option
    out: list[str] = []
    it = iter(argv)
    for arg in it:
        if arg in ("--snr-db", "--eta"):
            value = next(it, None)
            out.append(arg if value is None else f"{arg}={value}")
        else:
            out.append(arg)
    return out


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    args = build_parser().parse_args(_glue_ranges(argv))
    try:
        if args.tol is not None and not args.tol > 0:
            raise UsageError(f"--tol must be > 0, got {args.tol}")
        cfg = load_config(args.config)
        run = _Run(cfg, args)
        curve = COMMANDS[args.command](run)
    except ConfigError as exc:
        print(f"continuum-cap: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, OutOfRangeError) as exc:
        print(f"continuum-cap: numerical failure in {args.command}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = csv_text(curve)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(
            plot(curve, title=f"continuum-cap {args.command}", y_label=_Y_LABELS[args.command],
                 x_label="edge SNR (dB)" if curve.x_name == "snr_db" else curve.x_name),
            encoding="utf-8",
        )
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
