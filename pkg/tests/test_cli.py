import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from entchannels import cli
from entchannels.capacity import CapacityPoint, capacity_single
from entchannels.protocols import ChannelConfig, run_chain_relay, run_decoherence_trials, run_entangled_transfer

FIXTURES = Path(__file__).parent / "fixtures"

COMMAND_LINES = {
    "swap": ["swap", "--m", "2", "--bits", "10"],
    "capacity": ["capacity", "--power", "0.5", "1", "--m-max", "4"],
    "chain": ["chain", "--sites", "4"],
    "spinwave": ["spinwave", "--sites", "3", "--grid", "21"],
    "decohere": ["decohere", "--m", "2", "--bits", "11", "--p", "0.5", "--trials", "2000", "--seed", "4"],
    "mlcheck": ["mlcheck", "--trials", "40", "--m", "2", "--seed", "3"],
}


def run_cli(args):
    return subprocess.run([sys.executable, "-m", "entchannels", *args],
                          capture_output=True, text=True)


def test_parse_capacity_defaults():
    args = cli.parse_args(["capacity", "--power", "1.0", "--m-max", "8"])
    assert args.command == "capacity"
    assert args.power == [1.0] and args.m_max == 8
    assert args.hbar == 1.0 and args.seed == 0
    assert args.output is None and args.output_format == "csv"


def test_parse_swap():
    args = cli.parse_args(["swap", "--m", "2", "--dt", "1.0", "--bits", "10"])
    assert args.command == "swap" and args.bits == (1, 0) and args.dt == 1.0


def test_parse_swap_defaults_bits():
    assert cli.parse_args(["swap", "--m", "3"]).bits == (1, 1, 1)
    assert cli.parse_args(["decohere", "--m", "3"]).bits == (1, 0, 0)


@pytest.mark.parametrize("argv,flag", [
    (["swap", "--m", "2", "--bits", "101"], "bits length must equal m"),
    (["swap", "--bits", "1x"], "--bits"),
    (["swap", "--frobnicate", "3"], "--frobnicate"),
    (["swap", "--dt", "1", "--power", "1"], "--power"),
    (["decohere", "--m", "2", "--bits", "00"], "--bits"),
    (["decohere", "--p", "1.5"], "--p"),
    (["chain", "--sites", "9"], "--sites"),
    (["spinwave", "--sites", "11"], "--sites"),
    (["mlcheck", "--grid", "50"], "--grid"),
    (["capacity", "--power", "-1"], "--power"),
])
def test_usage_errors_exit_2(argv, flag, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.parse_args(argv)
    assert exc.value.code == 2
    assert flag in capsys.readouterr().err


def test_capacity_csv_row_format():
    buf = io.StringIO()
    cli.emit_capacity_csv([CapacityPoint(math.pi / 4, 1, "single", capacity_single(math.pi / 4), 1.0)], buf)
    header, row, end = buf.getvalue().split("\n")
    assert header == "mode,m,power,hbar,rate" and end == ""
    mode, m, power, hbar, rate = row.split(",")
    assert (mode, m) == ("single", "1")
    assert power.startswith("7.85398") and power.endswith("e-01")
    assert float(power) == math.pi / 4 and float(hbar) == 1.0
    assert abs(float(rate) - 1.0) < 1e-15
    assert len(power.split("e")[0].replace(".", "")) == 17


def test_capacity_csv_empty_and_sorted():
    buf = io.StringIO()
    cli.emit_capacity_csv([], buf)
    assert buf.getvalue() == "mode,m,power,hbar,rate\n"
    pts = [CapacityPoint(2.0, 3, "entangled", 1.0), CapacityPoint(1.0, 1, "single", 1.0),
           CapacityPoint(1.0, 3, "entangled", 1.0)]
    buf = io.StringIO()
    cli.emit_capacity_csv(pts, buf)
    rows = buf.getvalue().splitlines()[1:]
    assert [r.split(",")[0] for r in rows] == ["single", "entangled", "entangled"]
    assert float(rows[1].split(",")[2]) == 1.0


def test_float_format_round_trips():
    for x in (math.pi, 1 / 3, 1e-300, 6.02214076e23, 0.1):
        assert float(cli.fmt_float(x)) == x


def test_report_json_structure_and_round_trip():
    report = run_entangled_transfer([1], ChannelConfig(m=1))
    buf = io.StringIO()
    cli.emit_report_json(report, buf, "swap", {"m": 1, "dt": 1.0})
    doc = json.loads(buf.getvalue())
    assert list(doc) == ["schema_version", "command", "config", "results"]
    assert doc["schema_version"] == "1" and doc["config"]["seed"] == 0
    assert doc["results"]["mean_energy"] == pytest.approx(1.5707963, abs=1e-7)
    command, config, back = cli.load_report(buf.getvalue())
    assert command == "swap" and back == report


@pytest.mark.parametrize("report", [
    run_chain_relay(1, 3, ChannelConfig()),
    run_decoherence_trials([1, 0], ChannelConfig(m=2), 1.0, 500, seed=6),
])
def test_other_reports_round_trip(report):
    buf = io.StringIO()
    cli.emit_report_json(report, buf)
    command, config, back = cli.load_report(buf.getvalue())
    assert back == report
    if command == "decohere":
        assert json.loads(buf.getvalue())["results"]["corrupted_count"] == 0
        assert config["seed"] == 6


@pytest.mark.parametrize("command", sorted(COMMAND_LINES))
def test_each_command_exits_0_and_is_deterministic(command):
    first = run_cli(COMMAND_LINES[command])
    second = run_cli(COMMAND_LINES[command])
    assert first.returncode == 0, first.stderr
    assert first.stdout == second.stdout
    assert first.stdout.endswith("\n")


@pytest.mark.parametrize("command", sorted(COMMAND_LINES))
def test_each_command_exit_codes(command, tmp_path):
    assert run_cli([command, "--no-such-flag"]).returncode == 2
    bad = run_cli([*COMMAND_LINES[command], "--output", str(tmp_path / "missing" / "out.txt")])
    assert bad.returncode == 1
    assert "cannot write output" in bad.stderr


@pytest.mark.parametrize("command", sorted(COMMAND_LINES))
def test_help_lists_flags_with_units(command):
    out = run_cli([command, "--help"])
    assert out.returncode == 0
    assert "--hbar" in out.stdout and "--seed" in out.stdout and "--output" in out.stdout
    assert "[" in out.stdout  # units in brackets


def test_output_file_matches_stdout(tmp_path):
    target = tmp_path / "swap.json"
    assert cli.main([*COMMAND_LINES["swap"], "--output", str(target)]) == 0
    assert target.read_text() == run_cli(COMMAND_LINES["swap"]).stdout


def test_decohere_output_independent_of_workers():
    base = run_cli(COMMAND_LINES["decohere"]).stdout
    assert run_cli([*COMMAND_LINES["decohere"], "--workers", "3"]).stdout == base


def test_decohere_report_via_cli():
    doc = json.loads(run_cli(["decohere", "--m", "2", "--bits", "10", "--trials", "4000",
                              "--seed", "1"]).stdout)
    assert doc["results"]["corrupted_count"] == 0
    assert doc["config"]["seed"] == 1


def test_swap_with_power_budget():
    doc = json.loads(run_cli(["swap", "--m", "1", "--bits", "1", "--power", "0.7853981633974483"]).stdout)
    # at P = pi/4 one bit per unit time; a 1 costs twice the average
    assert doc["config"]["dt"] == pytest.approx(1.0, rel=1e-14)
    assert doc["results"]["power"] == pytest.approx(math.pi / 2, rel=1e-14)


def test_spinwave_csv():
    out = run_cli(["spinwave", "--sites", "2", "--grid", "3", "--t-max", "2", "--output-format", "csv"])
    lines = out.stdout.splitlines()
    assert lines[0] == "time,fidelity"
    assert float(lines[2].split(",")[1]) == pytest.approx(1.0, abs=1e-12)


def test_capacity_golden_fixture():
    out = run_cli(["capacity"])
    assert out.returncode == 0
    assert out.stdout == (FIXTURES / "capacity_golden.csv").read_text()
