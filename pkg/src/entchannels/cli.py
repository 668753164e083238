"""Command-line front end.

Sweeps are written as CSV, single runs as a JSON report::

    entchannels capacity --power 0.5 1 2 --m-max 8
    entchannels swap --m 2 --bits 10
    entchannels decohere --m 2 --bits 10 --p 1 --trials 100000 --seed 7

Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
from typing import IO, Sequence

from . import capacity, energetics, protocols
from .capacity import CapacityPoint

SCHEMA_VERSION = "1"
COMMANDS = ("swap", "capacity", "chain", "spinwave", "decohere", "mlcheck")
DEFAULT_POWERS = (0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0)

REPORT_TYPES = {
    "swap": protocols.TransferReport,
    "chain": protocols.ChainReport,
    "spinwave": protocols.SpinWaveCurve,
    "decohere": protocols.DecoherenceReport,
    "mlcheck": energetics.MLCheckReport,
}


class UsageError(Exception):
    pass


def fmt_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    return format(float(x), ".16e")


def emit_capacity_csv(points: Sequence[CapacityPoint], sink: IO[str]) -> None:
    lines = ["mode,m,power,hbar,rate"]
    for p in sorted(points, key=CapacityPoint.sort_key):
        lines.append(f"{p.mode},{p.m},{fmt_float(p.power)},{fmt_float(p.hbar)},{fmt_float(p.rate)}")
    sink.write("\n".join(lines) + "\n")


def emit_curve_csv(curve: protocols.SpinWaveCurve, sink: IO[str]) -> None:
    lines = ["time,fidelity"]
    lines += [f"{fmt_float(t)},{fmt_float(f)}" for t, f in zip(curve.times, curve.fidelities)]
    sink.write("\n".join(lines) + "\n")


def _plain(value):
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        return None
    return value


def report_document(report, command: str | None = None, config: dict | None = None) -> dict:
    if command is None:
        command = next(k for k, cls in REPORT_TYPES.items() if isinstance(report, cls))
    results = {f.name: _plain(getattr(report, f.name)) for f in dataclasses.fields(report)}
    config = dict(config or {})
    config.setdefault("seed", getattr(report, "seed", 0))
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": results,
    }


def emit_report_json(report, sink: IO[str], command: str | None = None,
                     config: dict | None = None) -> None:
    """Write one report as a JSON object with keys schema_version, command, config, results."""
    doc = report_document(report, command, config)
    sink.write(json.dumps(doc, indent=2, allow_nan=False) + "\n")


def load_report(text: str):
    """Inverse of :func:`emit_report_json`; returns (command, config, report)."""
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema version {doc.get('schema_version')!r}")
    cls = REPORT_TYPES[doc["command"]]
    fields = {}
    for name, value in doc["results"].items():
        fields[name] = tuple(value) if isinstance(value, list) else value
    if cls is energetics.MLCheckReport and fields["min_margin"] is None:
        fields["min_margin"] = math.inf
    return doc["command"], doc["config"], cls(**fields)


def _bits(text: str) -> tuple[int, ...]:
    if not text or set(text) - {"0", "1"}:
        raise argparse.ArgumentTypeError(f"bits must be a string of 0s and 1s, got {text!r}")
    return tuple(int(c) for c in text)


def _positive(kind):
    def convert(text):
        value = kind(text)
        if not value > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    convert.__name__ = kind.__name__
    return convert


def _probability(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entchannels",
        description="Simulate power-limited entangled and unentangled qubit channels.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name, help_text, formats=("json",)):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--hbar", type=_positive(float), default=1.0,
                       help="reduced action constant [action units] (default 1, natural units)")
        p.add_argument("--seed", type=int, default=0, help="random seed [integer] (default 0)")
        p.add_argument("--output", "--output-path", dest="output", default=None,
                       help="write output to this file [path] (default: standard output)")
        p.add_argument("--output-format", choices=formats, default=formats[0],
                       help=f"output format (default {formats[0]})")
        return p

    p = command("swap", "Transfer a bit string with the block swap (or M pair swaps).")
    p.add_argument("--m", type=_positive(int), default=1, help="qubits per side [count] (default 1)")
    p.add_argument("--dt", type=_positive(float), default=None,
                   help="transfer window [time] (default 1, or set by --power)")
    p.add_argument("--power", type=_positive(float), default=None,
                   help="power budget [energy/time]; picks the window from the capacity law")
    p.add_argument("--bits", type=_bits, default=None,
                   help="message b as a 0/1 string of length m (default all ones)")
    p.add_argument("--mode", choices=("entangled", "unentangled"), default="entangled",
                   help="block swap or independent pair swaps (default entangled)")
    p.add_argument("--time-samples", type=_positive(int), default=101,
                   help="energy samples across the window [count] (default 101)")

    p = command("capacity", "Rate-versus-power sweep for every channel mode.",
                formats=("csv", "json"))
    p.add_argument("--power", type=_positive(float), nargs="+", default=list(DEFAULT_POWERS),
                   help="power grid [energy/time] (default 0.125 ... 8, doubling)")
    p.add_argument("--m-max", type=_positive(int), default=8,
                   help="largest channel count [count]; sweeps m = 1..m-max (default 8)")

    p = command("chain", "Relay one bit down a chain A1 B1 ... An Bn by repeated swaps.")
    p.add_argument("--sites", type=_positive(int), default=3,
                   help="number n of A/B site pairs [count] (default 3, at most 7)")
    p.add_argument("--bit", type=int, choices=(0, 1), default=1, help="bit to send (default 1)")
    p.add_argument("--dt", type=_positive(float), default=1.0, help="bit period [time] (default 1)")

    p = command("spinwave", "Arrival curve of a bit under an always-on swap chain.",
                formats=("csv", "json"))
    p.add_argument("--sites", type=_positive(int), default=4,
                   help="chain length [count] (default 4, range 2..10)")
    p.add_argument("--bit", type=int, choices=(0, 1), default=1, help="bit to send (default 1)")
    p.add_argument("--dt", type=_positive(float), default=1.0,
                   help="two-site swap time [time]; coupling is pi*hbar/(2 dt) (default 1)")
    p.add_argument("--t-max", type=_positive(float), default=None,
                   help="end of the time grid [time] (default sites * dt)")
    p.add_argument("--grid", type=_positive(int), default=401,
                   help="number of time points [count] (default 401)")

    p = command("decohere", "Retransmission protocol with midpoint dephasing.")
    p.add_argument("--m", type=_positive(int), default=2, help="qubits per side [count] (default 2)")
    p.add_argument("--bits", type=_bits, default=None,
                   help="nonzero message b of length m (default 10...0)")
    p.add_argument("--p", type=_probability, default=1.0,
                   help="dephasing probability per attempt [probability] (default 1)")
    p.add_argument("--trials", type=_positive(int), default=10_000,
                   help="independent messages to deliver [count] (default 10000)")
    p.add_argument("--dt", type=_positive(float), default=1.0, help="transfer window [time] (default 1)")
    p.add_argument("--workers", type=_positive(int), default=1,
                   help="worker threads [count]; output does not depend on it (default 1)")

    p = command("mlcheck", "Check orthogonality times against the Margolus-Levitin bound.")
    p.add_argument("--trials", type=_positive(int), default=1000,
                   help="random Hamiltonians to test [count] (default 1000)")
    p.add_argument("--m", type=_positive(int), default=4,
                   help="largest swap register size for the saturation check [count] (default 4)")
    p.add_argument("--grid", type=_positive(int), default=1000,
                   help="time grid points for the orthogonality search [count] (default 1000)")
    return parser


def parse_args(argv: Sequence[str]) -> argparse.Namespace:
    """Parse and validate; exits with code 2 on usage errors."""
    parser = build_parser()
    args = parser.parse_args(list(argv))
    try:
        _validate(args)
    except UsageError as exc:
        parser.error(str(exc))
    return args


def _validate(args) -> None:
    if args.command in ("swap", "decohere"):
        if args.bits is None:
            args.bits = (1,) * args.m if args.command == "swap" else (1,) + (0,) * (args.m - 1)
        if len(args.bits) != args.m:
            raise UsageError(f"--bits: bits length must equal m ({len(args.bits)} != {args.m})")
        if 2 * args.m > protocols.MAX_QUBITS:
            raise UsageError(f"--m: at most {protocols.MAX_QUBITS // 2} qubits per side")
    if args.command == "swap":
        if args.power is not None and args.dt is not None:
            raise UsageError("--power: give either --power or --dt, not both")
        if args.time_samples < 3:
            raise UsageError("--time-samples: need at least 3 samples")
    if args.command == "decohere" and not any(args.bits):
        raise UsageError("--bits: the all-zero message is reserved for 'nothing received'")
    if args.command == "chain" and 2 * args.sites > protocols.MAX_QUBITS:
        raise UsageError(f"--sites: at most {protocols.MAX_QUBITS // 2} sites")
    if args.command == "spinwave":
        if not 2 <= args.sites <= 10:
            raise UsageError("--sites: spin-wave chains need 2..10 sites")
        if args.grid < 2:
            raise UsageError("--grid: need at least 2 points")
    if args.command == "mlcheck":
        if args.grid < 100:
            raise UsageError("--grid: need at least 100 points")
        if 2 * args.m > protocols.MAX_QUBITS:
            raise UsageError(f"--m: at most {protocols.MAX_QUBITS // 2} qubits per side")


def _saturation(m_max: int, grid: int, hbar: float) -> list[dict]:
    from .operators import BlockSwap, SwapHamiltonian
    from .statevec import RegisterLayout, basis_state

    rows = []
    for m in range(1, m_max + 1):
        h = SwapHamiltonian(BlockSwap(RegisterLayout.contiguous(m)), 1.0, hbar)
        psi = basis_state((1,) * m + (0,) * m)
        tau = energetics.orthogonality_time(psi, h, hbar, 2.0, grid)
        bound = energetics.ml_bound(energetics.expectation_energy(psi, h), 0.0, hbar)
        rows.append({"m": m, "orthogonality_time": tau, "ml_bound": bound,
                     "relative_error": abs(tau - bound) / bound})
    return rows


def run(args, out: IO[str]) -> None:
    cmd = args.command
    config = {k: _plain(v) for k, v in sorted(vars(args).items())
              if k not in ("command", "output", "output_format", "workers")}
    if cmd == "capacity":
        points = capacity.capacity_sweep(args.power, range(1, args.m_max + 1), args.hbar)
        if args.output_format == "csv":
            emit_capacity_csv(points, out)
        else:
            doc = {"schema_version": SCHEMA_VERSION, "command": cmd, "config": config,
                   "results": [dataclasses.asdict(p) for p in points]}
            out.write(json.dumps(doc, indent=2) + "\n")
        return
    if cmd == "swap":
        if args.power is not None:
            cfg = protocols.ChannelConfig.for_power(args.m, args.power, args.hbar)
        else:
            cfg = protocols.ChannelConfig(args.m, args.dt or 1.0, args.hbar)
        config["dt"] = cfg.delta_t
        runner = (protocols.run_entangled_transfer if args.mode == "entangled"
                  else protocols.run_unentangled_transfer)
        report = runner(args.bits, cfg, args.time_samples)
    elif cmd == "chain":
        report = protocols.run_chain_relay(args.bit, args.sites,
                                           protocols.ChannelConfig(1, args.dt, args.hbar))
    elif cmd == "spinwave":
        report = protocols.run_spin_wave(args.bit, args.sites,
                                         protocols.ChannelConfig(1, args.dt, args.hbar),
                                         args.t_max, args.grid)
        if args.output_format == "csv":
            emit_curve_csv(report, out)
            return
    elif cmd == "decohere":
        report = protocols.run_decoherence_trials(
            args.bits, protocols.ChannelConfig(args.m, args.dt, args.hbar),
            args.p, args.trials, args.seed, args.workers)
    elif cmd == "mlcheck":
        report = energetics.ml_universality_check(args.trials, 3, args.seed, args.grid, args.hbar)
        report = dataclasses.replace(
            report, saturation=tuple(_saturation(args.m, args.grid, args.hbar)))
    else:  # pragma: no cover - argparse restricts the choices
        raise UsageError(f"unknown command {cmd}")
    emit_report_json(report, out, cmd, config)


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(sys.argv[1:] if argv is None else argv)
    buffer = io.StringIO()
    try:
        run(args, buffer)
    except (ValueError, UsageError) as exc:
        print(f"entchannels {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"entchannels {args.command}: error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.output is None:
            sys.stdout.write(buffer.getvalue())
            sys.stdout.flush()
        else:
            with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(buffer.getvalue())
    except OSError as exc:
        print(f"entchannels {args.command}: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
