"""Command-line front end.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import astuple, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import emission, geometry, protocol, readout
from .config import RunConfig, load_config
from .dynamics import FIG4_COLUMNS, fig4_sweep
from .errors import ConfigError, NumericalError
from .states import SingleQubitState

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# output helpers

def _cell(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def format_csv(columns: Sequence[str], rows: Iterable[tuple], cfg: RunConfig, extra: dict | None = None) -> str:
    meta = cfg.to_dict()
    if extra:
        meta["run"] = extra
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(v) for v in r])
    return buf.getvalue()


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def read_csv(path: str | Path) -> tuple[dict, list[dict[str, float]]]:
    """Parse a CSV written by this tool back into ``(config, rows)``."""
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
        if not first.startswith("# config: "):
            raise ValueError("missing config header line")
        meta = json.loads(first[len("# config: "):])
        rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(fh)]
    return meta, rows


def _emit(args, text: str) -> None:
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_geometry(args, cfg: RunConfig) -> int:
    report = {}
    for name in ("equation", "figure"):
        geo = geometry.derive_geometry(cfg.trap.with_convention(name))
        report[name] = geo.as_dict()
        print(f"[{name} convention]")
        for k, v in geo.as_dict().items():
            print(f"  {k:18s} {v:.6g}")
    if args.json:
        write_atomic(args.json, json.dumps({"config": cfg.to_dict(), "geometry": report},
                                           indent=2) + "\n")
    return EXIT_OK


def _densities(cfg: RunConfig) -> list[float]:
    s = cfg.sweep
    return readout.density_grid(s.n_min, s.n_max, s.n_points, s.log)


def cmd_fig3(args, cfg: RunConfig) -> int:
    rows = readout.fig3_sweep(cfg.trap_for("figure"), cfg.detection, _densities(cfg))
    _emit(args, format_csv(readout.FIG3_COLUMNS, map(astuple, rows), cfg))
    return EXIT_OK


def cmd_fig4(args, cfg: RunConfig) -> int:
    s = cfg.sweep
    grid = np.geomspace(s.delta_min, s.delta_max, s.delta_points)
    rows = fig4_sweep(cfg.pulse.build(), grid)
    _emit(args, format_csv(FIG4_COLUMNS, map(astuple, rows), cfg))
    return EXIT_OK


def cmd_fig6(args, cfg: RunConfig) -> int:
    rows = geometry.fig6_sweep(cfg.trap_for("figure"), _densities(cfg))
    _emit(args, format_csv(geometry.FIG6_COLUMNS, map(astuple, rows), cfg))
    return EXIT_OK


def parse_amplitudes(text: str) -> tuple[complex, complex]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"--input needs two comma-separated amplitudes, got {text!r}")
    try:
        return tuple(complex(p.strip().replace(" ", "").replace("i", "j")) for p in parts)
    except ValueError:
        raise UsageError(f"cannot parse amplitudes {text!r}") from None


def build_channel(cfg: RunConfig) -> protocol.ChannelSpec:
    conv = "figure" if cfg.preset == "fig6" else "equation"
    trap = cfg.trap_for(conv)
    c = cfg.channel
    chan = protocol.channel_from_physics(trap, cfg.pulse.build(), t_loss=c.t_loss,
                                         tau=cfg.pulse.tau, cnot_time=c.cnot_time)
    overrides = {k: getattr(c, k) for k in ("p_c", "p_1", "transfer_fidelity")
                 if getattr(c, k) is not None}
    if c.t2 is not None:
        overrides["t2_collective"] = c.t2
    return replace(chan, **overrides)


def cmd_transmit(args, cfg: RunConfig) -> int:
    c_a, c_b = parse_amplitudes(args.input)
    norm = abs(c_a) ** 2 + abs(c_b) ** 2
    if norm == 0:
        raise UsageError("amplitudes must not both be zero")
    if abs(norm - 1.0) > 1e-6:
        print(f"warning: |c_a|^2+|c_b|^2 = {norm:.6g}; renormalizing", file=sys.stderr)
    qubit = SingleQubitState.normalized(c_a, c_b)
    if args.ideal:
        gates = [protocol.GateSpec()] * 3
        chan = protocol.ChannelSpec.ideal()
    else:
        gates = [cfg.gate.build()] * 3
        chan = build_channel(cfg)
    result = protocol.run_transmission(qubit, gates, chan, include_disentangle=not args.bell)
    text = result.to_json(indent=2) + "\n"
    if args.json:
        write_atomic(args.json, text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_oracle(args, cfg: RunConfig) -> int:
    n_list = cfg.sweep.n_list
    if args.n_list is not None:
        try:
            n_list = tuple(int(t) for t in args.n_list.split(",") if t.strip())
        except ValueError:
            raise UsageError(f"--n-list must be comma-separated integers, got {args.n_list!r}") from None
    if not n_list:
        raise UsageError("--n-list is empty")
    trap = cfg.trap_for("equation")
    rows = []
    for n in n_list:
        print(f"oracle: N = {n} ({cfg.sweep.n_seeds} clouds)", file=sys.stderr)
        rows.extend(emission.oracle_vs_formula_sweep(trap, [n], seed=args.seed,
                                                     n_seeds=cfg.sweep.n_seeds))
    text = format_csv(emission.ORACLE_COLUMNS, map(astuple, rows), cfg, {"seed": args.seed})
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_measure_time(args, cfg: RunConfig) -> int:
    target = cfg.sweep.target_error if args.target_error is None else args.target_error
    if not 0 < target < 0.5:
        raise UsageError("--target-error must lie in (0, 0.5)")
    geo = geometry.derive_geometry(cfg.trap_for("figure"))
    t1 = readout.measurement_time_for_error(cfg.detection, target)
    tN = readout.measurement_time_for_error(cfg.detection, target, C=geo.C)
    print(f"target error        {target:.3g}")
    print(f"single atom time    {t1 * 1e6:.4g} us")
    print(f"collective time     {tN * 1e6:.4g} us  (C = {geo.C:.4g})")
    print(f"ratio               {t1 / tN:.4g}")
    return EXIT_OK


COMMANDS = {
    "geometry": cmd_geometry,
    "fig3": cmd_fig3,
    "fig4": cmd_fig4,
    "fig6": cmd_fig6,
    "transmit": cmd_transmit,
    "oracle": cmd_oracle,
    "measure-time": cmd_measure_time,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS,
                        help="INI or JSON configuration file")
    common.add_argument("--config-format", choices=("ini", "json"), default=argparse.SUPPRESS)
    common.add_argument("--preset", choices=("fig3", "fig6"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="collective-qubit", parents=[common],
                                description="Single-atom / collective-qubit interface models.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("geometry", parents=[common], help="derived cloud and optics quantities")
    g.add_argument("--json", metavar="PATH")
    for name, desc in (("fig3", "count rates vs density"),
                       ("fig4", "absorption failure vs detuning"),
                       ("fig6", "incoherent emission vs density")):
        s = sub.add_parser(name, parents=[common], help=desc)
        s.add_argument("--out", metavar="PATH", help="CSV output (default stdout)")
    t = sub.add_parser("transmit", parents=[common], help="run the transmission sequence")
    t.add_argument("--input", default="1,0", help='amplitudes "c_a,c_b" (complex allowed)')
    t.add_argument("--bell", action="store_true", help="skip the disentangling gate")
    t.add_argument("--ideal", action="store_true", help="switch every error source off")
    t.add_argument("--json", metavar="PATH")
    o = sub.add_parser("oracle", parents=[common], help="sampled emission vs C/(1+C)")
    o.add_argument("--n-list", help="comma-separated atom numbers")
    o.add_argument("--out", metavar="PATH")
    m = sub.add_parser("measure-time", parents=[common], help="readout time for a target error")
    m.add_argument("--target-error", type=float)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("config_format", None), ("preset", "fig3"),
                          ("seed", 0)):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        cfg = load_config(args.config, args.config_format, args.preset)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, UsageError) as exc:
        print(f"collective-qubit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"collective-qubit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"collective-qubit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
