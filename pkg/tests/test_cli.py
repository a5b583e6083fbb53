import csv
import json
import math
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from dicke_dispersive import cli
from dicke_dispersive.errors import ConfigError


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=float)
    return {name: body[:, i] for i, name in enumerate(header)}


def run(argv, capsys=None):
    code = cli.main(argv)
    out = capsys.readouterr() if capsys else None
    return code, out


def test_parse_number():
    assert cli.parse_number("sqrt(3)+0.03") == pytest.approx(math.sqrt(3) + 0.03)
    assert cli.parse_number("2*pi/4") == pytest.approx(math.pi / 2)
    assert cli.parse_number("-exp(0)") == -1.0
    for bad in ("__import__('os')", "a", "1 if 1 else 2", "sqrt", "[1]", "2**3**99"):
        with pytest.raises((ConfigError, ValueError)):
            cli.parse_number(bad)


def test_parse_init():
    assert cli.parse_init("x:0,0") == ("x", Fraction(0), 0)
    assert cli.parse_init("z:-1/2,3") == ("z", Fraction(-1, 2), 3)
    for bad in ("y:0,0", "x:0", "x:a,1", "x:0,-1"):
        with pytest.raises(ConfigError):
            cli.parse_init(bad)


def test_coeffs_stdout(capsys):
    code, out = run(["coeffs", "--n", "0", "--m", "1", "--beta", "1"], capsys)
    assert code == 0
    lines = out.out.strip().splitlines()
    assert lines[0] == "n,m,beta,omega"
    assert lines[1] == "0,1,1,0.60653065971263342"


def test_coeffs_to_directory(tmp_path, capsys):
    code, _ = run(["coeffs", "--n", "0", "1", "--m", "0", "2", "--beta", "sqrt(2)", "--out", str(tmp_path)], capsys)
    assert code == 0
    data = read_csv(tmp_path / "coeffs.csv")
    assert len(data["n"]) == 4
    manifest = json.loads((tmp_path / "coeffs.manifest.json").read_text())
    assert manifest["command"] == "coeffs" and manifest["outputs"] == ["coeffs.csv"]
    assert run(["coeffs", "--n", "-1", "--m", "0", "--beta", "1"], capsys)[0] == cli.EXIT_CONFIG


def test_chains_stdout_and_files(tmp_path, capsys):
    code, out = run(["chains", "--J", "2", "--k", "1", "--n-base", "0"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert [v["n"] for v in data["nodes"]] == [4, 1, 0, 1, 4]
    code, _ = run(["chains", "--J", "3/2", "--off-resonant", "--n-max", "4", "--out", str(tmp_path)], capsys)
    assert code == 0
    graph = json.loads((tmp_path / "chains_J3-2_off.json").read_text())
    assert len(graph["edges"]) == 5
    assert (tmp_path / "chains_J3-2_off.dot").read_text().startswith("graph")
    assert (tmp_path / "chains_J3-2_off.manifest.json").exists()
    assert run(["chains", "--J", "2", "--off-resonant", "--n-base", "0"], capsys)[0] == cli.EXIT_CONFIG
    assert run(["chains", "--J", "2", "--k", "1", "--n-base", "0", "--n-max", "2"], capsys)[0] == cli.EXIT_NUMERIC


def test_presets_listing(capsys):
    code, out = run(["presets"], capsys)
    assert code == 0
    names = [line.split()[0] for line in out.out.strip().splitlines()]
    for name in ("fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4a", "fig4b", "fig5a", "fig5b", "fig5c", "fig5d"):
        assert name in names


def test_every_preset_expands():
    presets = cli.load_presets()
    for name in presets.sections():
        runs = cli.expand_runs(dict(presets[name]), name)
        assert runs and all(r.label.startswith(name) for r in runs)
    fig4b = cli.expand_runs(dict(presets["fig4b"]), "fig4b")
    assert len(fig4b) == 4
    assert {r.label for r in fig4b} >= {"fig4b_J1_w0-0", "fig4b_J2_w0-0.01"}


def test_simulate_columns_manifest_and_reproducibility(tmp_path, capsys):
    argv = ["simulate", "--J", "1", "--g", "1", "--omega0", "0.05", "--cycles", "3", "--effective"]
    assert run(argv + ["--out", str(tmp_path / "a")], capsys)[0] == 0
    assert run(argv + ["--out", str(tmp_path / "b")], capsys)[0] == 0
    first = (tmp_path / "a" / "run.csv").read_bytes()
    assert first == (tmp_path / "b" / "run.csv").read_bytes()
    data = read_csv(tmp_path / "a" / "run.csv")
    for col in ("t", "P", "photon_cdf_0", "photon_cdf_1", "photon_cdf_2", "Jz", "P_eff", "Jz_eff"):
        assert col in data
    assert len(data["t"]) == 3 * 16 + 1
    assert data["P"][0] == pytest.approx(1.0)
    assert np.all(np.diff(np.stack([data["photon_cdf_0"], data["photon_cdf_1"], data["photon_cdf_2"]]), axis=0) >= -1e-15)
    manifest = json.loads((tmp_path / "a" / "run.manifest.json").read_text())
    assert manifest["status"] == "ok"
    assert manifest["config"]["J"] == "1" and manifest["config"]["g"] == 1.0
    assert manifest["diagnostics"]["edge_population"] < 1e-8
    assert manifest["version"]


def test_zero_splitting_is_frozen(tmp_path, capsys):
    argv = ["compare", "--J", "2", "--g", "1", "--omega0", "0", "--cycles", "4", "--out", str(tmp_path)]
    assert run(argv, capsys)[0] == 0
    data = read_csv(tmp_path / "run.csv")
    np.testing.assert_allclose(data["P_exact"], 1.0, atol=1e-12)
    np.testing.assert_allclose(data["P_effective"], 1.0, atol=1e-12)
    assert data["running_max_diff"][-1] < 1e-12


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "runs.ini"
    cfg.write_text("[small]\nJ = 1\ng2 = 1\nomega0 = 0.2\ncycles = 2\n[other]\nJ = 2\ng = 0.3\nomega0 = 0.1\ncycles = 1\n")
    out = tmp_path / "out"
    assert run(["simulate", "--config", str(cfg), "--omega0", "0.1", "--out", str(out)], capsys)[0] == 0
    manifest = json.loads((out / "small.manifest.json").read_text())
    assert manifest["config"]["omega0"] == 0.1 and manifest["config"]["g"] == 1.0
    assert run(["simulate", "--config", str(cfg), "--section", "other", "--g2J", "0.02", "--out", str(out)], capsys)[0] == 0
    manifest = json.loads((out / "other.manifest.json").read_text())
    assert manifest["config"]["g"] == pytest.approx(0.1)
    assert run(["simulate", "--config", str(cfg), "--section", "nope", "--out", str(out)], capsys)[0] == cli.EXIT_CONFIG
    assert run(["simulate", "--config", str(tmp_path / "missing.ini"), "--out", str(out)], capsys)[0] == cli.EXIT_CONFIG


def test_list_expansion(tmp_path, capsys):
    argv = ["simulate", "--J", "1,3/2", "--g", "0.2", "--omega0", "0.01,0.02", "--cycles", "1", "--label", "grid",
            "--out", str(tmp_path)]
    assert run(argv, capsys)[0] == 0
    names = sorted(p.name for p in tmp_path.glob("*.csv"))
    assert names == ["grid_J1_w0-0.01.csv", "grid_J1_w0-0.02.csv", "grid_J3-2_w0-0.01.csv", "grid_J3-2_w0-0.02.csv"]
    # x:0,0 is moved to m = 1/2 for half-integer J
    data = read_csv(tmp_path / "grid_J3-2_w0-0.01.csv")
    assert data["P"][0] == pytest.approx(1.0)


def test_config_errors(tmp_path, capsys):
    base = ["simulate", "--out", str(tmp_path)]
    cases = [
        ["--J", "1", "--omega0", "0.1", "--cycles", "1"],  # no coupling
        ["--J", "1", "--g", "1", "--cycles", "1"],  # no omega0
        ["--J", "1/3", "--g", "1", "--omega0", "0.1", "--cycles", "1"],
        ["--J", "1", "--g", "-1", "--omega0", "0.1", "--cycles", "1"],
        ["--J", "1", "--g", "import os", "--omega0", "0.1", "--cycles", "1"],
        ["--J", "1", "--g", "1", "--omega0", "0.1", "--cycles", "1", "--init", "x:3/2,0"],
        ["--J", "1", "--g", "1", "--omega0", "0.1", "--cycles", "1", "--init", "z:2,0"],
        ["--preset", "fig9z"],
    ]
    for extra in cases:
        assert run(base + extra, capsys)[0] == cli.EXIT_CONFIG, extra


def test_cutoff_failure_exit_code(tmp_path, capsys):
    argv = ["simulate", "--J", "2", "--g", "2", "--omega0", "0.1", "--cycles", "1", "--n-max", "5", "--out", str(tmp_path)]
    code, out = run(argv, capsys)
    assert code == cli.EXIT_NUMERIC
    assert "--n-max" in out.err


def test_contract_failure_is_recorded(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "EDGE_POPULATION_TOL", 0.0)
    argv = ["simulate", "--J", "1", "--g", "1", "--omega0", "0.1", "--cycles", "1", "--out", str(tmp_path)]
    code, out = run(argv, capsys)
    assert code == cli.EXIT_NUMERIC
    assert "FAILED" in out.out
    manifest = json.loads((tmp_path / "run.manifest.json").read_text())
    assert manifest["status"] == "failed"
    assert manifest["diagnostics"]["contract_failures"]


def test_interaction_frame_matches_lab(tmp_path, capsys):
    common = ["simulate", "--J", "1", "--g", "1.2", "--omega0", "0.1", "--cycles", "2", "--out", str(tmp_path)]
    assert run(common + ["--label", "lab"], capsys)[0] == 0
    assert run(common + ["--label", "h2", "--frame", "interaction_h2"], capsys)[0] == 0
    lab, h2 = read_csv(tmp_path / "lab.csv"), read_csv(tmp_path / "h2.csv")
    for col in ("P", "photon_cdf_1", "Jz"):
        np.testing.assert_allclose(h2[col], lab[col], atol=2e-5)
    diag = json.loads((tmp_path / "h2.manifest.json").read_text())["diagnostics"]
    assert diag["method"] == "cf4-lanczos" and diag["halving_change"] < 1e-6


def test_small_scan(tmp_path, capsys):
    argv = ["scan", "--k", "1", "--g-min", "0.95", "--g-max", "1.05", "--points", "3", "--omega0", "0.05",
            "--threads", "2", "--out", str(tmp_path)]
    assert run(argv, capsys)[0] == 0
    data = read_csv(tmp_path / "scan_J1_k1.csv")
    assert list(data) == ["g", "pmin_num", "pmin_ana", "freq_num", "freq_ana"]
    assert data["pmin_ana"][1] == 0.0
    assert data["pmin_num"][1] < data["pmin_num"][0]
    assert run(argv[:-2] + ["--points", "0", "--out", str(tmp_path)], capsys)[0] == cli.EXIT_CONFIG


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "dicke_dispersive", "coeffs", "--n", "0", "--m", "0", "--beta", "0"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.splitlines()[1] == "0,0,0,1"
    proc = subprocess.run([sys.executable, "-m", "dicke_dispersive", "simulate", "--frame", "moon"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
