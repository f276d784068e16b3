import csv
import io
import shutil
from pathlib import Path

import numpy as np
import pytest

from jpa_selfenergy.cli import format_csv, main

CONFIG_DIR = Path(__file__).parent.parent / "configs"
SERIES = ["--set", "circuit.variant=series_lc", "--set", "circuit.zs_over_z0=2",
          "--set", "circuit.cc_over_cs=10", "--set", "circuit.lc_over_ls=0.4"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    rows = list(csv.reader(io.StringIO(text, newline="")))
    return rows[0], np.array(rows[1:], dtype=float)


class TestFormat:
    def test_crlf_and_full_precision(self):
        text = format_csv(["a", "b"], [(1 / 3, True)])
        assert text == "a,b\r\n0.33333333333333331,1\r\n"

    def test_repeated_runs_identical(self, capsys):
        a = run(capsys, "selfenergy", *SERIES, "--grid", "0.5:1.5:21")[1]
        b = run(capsys, "selfenergy", *SERIES, "--grid", "0.5:1.5:21")[1]
        assert a == b and a.count("\r\n") == 22


class TestCommands:
    def test_selfenergy_oracle_agrees(self, capsys):
        code, exact, _ = run(capsys, "selfenergy", *SERIES, "--grid", "0.3:2:35")
        code2, oracle, _ = run(capsys, "selfenergy", *SERIES, "--grid", "0.3:2:35", "--oracle")
        assert code == code2 == 0
        header, a = table(exact)
        _, b = table(oracle)
        assert header == ["omega/omega_s", "re_sigma/omega_s", "im_sigma/omega_s"]
        np.testing.assert_allclose(a, b, atol=1e-6)

    def test_selfenergy_anchor_row(self, capsys):
        _, out, _ = run(capsys, "selfenergy", *SERIES, "--grid", "0.5:1.5:3")
        _, data = table(out)
        np.testing.assert_allclose(data[1], [1.0, -0.3551395437, -0.3378378378], atol=1e-9)

    def test_modes_columns(self, capsys):
        code, out, _ = run(capsys, "modes", *SERIES, "--grid", "0.5:2:4")
        header, data = table(out)
        assert code == 0
        assert header == ["k*v/omega_s", "phi_k", "u_k(0)", "f_k/sqrt(omega_s*v)"]
        assert data.shape == (4, 4)

    def test_gain_above_threshold_warns(self, capsys):
        code, out, err = run(capsys, "gain", *SERIES, "--r", "1.2", "--grid=-0.2:0.2:5")
        assert code == 0
        assert "threshold" in err
        header, data = table(out)
        assert header[-1] == "unstable"
        assert np.all(data[:, -1] == 1)

    def test_threshold_reports_lobes(self, capsys):
        code, out, err = run(capsys, "threshold", *SERIES, "--grid=-0.1:0.1:5")
        assert code == 0
        assert "threshold lobes: 1" in err
        assert out.splitlines()[0].startswith("delta_p/omega_s,epsilon_th/omega_s,epsilon_th_markov/omega_s,mechanism")

    def test_sweep_writes_files(self, capsys, tmp_path):
        csv_path, svg_path = tmp_path / "s.csv", tmp_path / "s.svg"
        code, out, err = run(
            capsys, "sweep", *SERIES, "--param", "lc", "--range", "0.5:1.5:3",
            "--out", str(csv_path), "--svg", str(svg_path),
        )
        assert code == 0 and out == ""
        assert csv_path.read_bytes().count(b"\r\n") == 4
        assert svg_path.read_text().startswith("<svg")


class TestExitCodes:
    def test_no_command(self, capsys):
        assert run(capsys)[0] == 2

    def test_mixed_form(self, capsys):
        code, _, err = run(capsys, "selfenergy", *SERIES, "--set", "circuit.cs=1e-12")
        assert code == 2 and "one form" in err

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "selfenergy", str(tmp_path / "none.cfg"))[0] == 2

    def test_computation_error(self, capsys):
        code, _, err = run(
            capsys, "selfenergy", "--variant", "capacitive", "--set", "circuit.zs_over_z0=1",
            "--set", "circuit.cc_over_cs=1", "--mode", "res",
        )
        assert code == 1 and "computation error" in err

    def test_verify_pass(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "1")
        assert code == 0
        assert out.splitlines()[-1] == "1/1 checks passed"

    def test_verify_fail(self, capsys):
        code, out, _ = run(capsys, "verify", "--only", "10")
        assert code == 3
        assert out.startswith("[FAIL] 10")


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.cfg")), ids=lambda p: p.stem)
def test_shipped_config_runs(path, tmp_path, monkeypatch, capsys):
    shutil.copy(path, tmp_path)
    monkeypatch.chdir(tmp_path)
    code, _, _ = run(capsys, "run", path.name)
    assert code == 0
    assert (tmp_path / f"{path.stem}.csv").stat().st_size > 0
    assert (tmp_path / f"{path.stem}.svg").read_text().rstrip().endswith("</svg>")
