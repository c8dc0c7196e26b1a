from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from dynsamp.cli import main

GEO = """
name: geo
spectrum: {generator: geometric, ratio: 0.5, N: 8}
grid: {kind: uniform, step: 0.5}
noise_sigma: 0.01
trials: 5
seed: 1
"""


@pytest.fixture
def scenario(tmp_path):
    p = tmp_path / "geo.yaml"
    p.write_text(GEO)
    return p


@pytest.mark.parametrize("command", ["analyze", "equivalence", "discretize", "conditions", "reconstruct"])
def test_commands_succeed(command, scenario, tmp_path, capsysbinary):
    out = tmp_path / f"{command}.json"
    assert main([command, str(scenario), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["command"] == command and data["schema_version"] == 1


def test_csv_to_stdout_with_sweep(scenario, capsysbinary):
    assert main(["analyze", str(scenario), "--format", "csv", "--sweep", "4", "8", "12"]) == 0
    lines = capsysbinary.readouterr().out.decode().splitlines()
    assert len(lines) == 4 and lines[0].startswith("N,lower")


def test_seed_override_is_recorded(scenario, capsysbinary):
    assert main(["reconstruct", str(scenario), "--seed", "42"]) == 0
    data = json.loads(capsysbinary.readouterr().out)
    assert data["seed"] == 42 and data["scenario"]["seed"] == 42


def test_byte_identical_runs(scenario, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["analyze", str(scenario), "--out", str(a)])
    main(["analyze", str(scenario), "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("spectrum: {explicit: [-1, 0]}\n")
    assert main(["analyze", str(bad)]) == 2
    assert "Re(lambda) > 0" in capsys.readouterr().err
    assert main(["analyze", str(tmp_path / "missing.yaml")]) == 2
    small = tmp_path / "small.yaml"
    small.write_text("spectrum: {explicit: [1, 2, 3]}\ngrid: {kind: finite, points: [0]}\n")
    assert main(["reconstruct", str(small)]) == 3


def test_console_entry_point(scenario):
    proc = subprocess.run([sys.executable, "-m", "dynsamp.cli", "conditions", str(scenario), "--format", "csv"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("N,lower,upper")


@pytest.mark.parametrize("path", sorted((Path(__file__).parents[1] / "scenarios").glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_scenarios_analyze_cleanly(path, capsys):
    assert main(["analyze", str(path)]) == 0
    assert json.loads(capsys.readouterr().out)["errors"] == []
