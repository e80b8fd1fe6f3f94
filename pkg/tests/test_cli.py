import io
import shutil
import subprocess

import pytest

from zakfd.cli import main, number, read_config
from zakfd.harness import CSV_COLUMNS

SMALL = ["--domain=-40,40"]


def call(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def test_number_parsing():
    assert number("1/16") == 0.0625
    assert number(" 2.5e-3 ") == 0.0025


def test_soliton_bench():
    code, out = call("soliton-bench")
    assert code == 0
    err = float(out.split()[0].split("=")[1])
    assert err <= 1e-4


def test_run_writes_fields(tmp_path):
    path = tmp_path / "fields.csv"
    code, out = call("run", "--case", "case-II", "--epsilon", "1/4", "--h", "0.2", "--tau", "1e-3",
                     "--T", "0.01", *SMALL, "--out", str(path))
    assert code == 0
    assert "steps=10" in out
    lines = path.read_text().splitlines()
    assert lines[0] == "x,re_E,im_E,F,N"
    assert len(lines) == 1 + 401


def test_sweep_csv_and_table(tmp_path):
    path = tmp_path / "sweep.csv"
    code, out = call("sweep", "--sweep", "spatial", "--epsilon", "1,1/4", "--h", "0.4,0.2",
                     "--tau", "1e-3", "--T", "0.02", *SMALL, "--out", str(path), "--table")
    assert code == 0
    rows = path.read_text().splitlines()
    assert rows[0] == ",".join(CSV_COLUMNS)
    assert len(rows) == 5
    assert out.count("rate") == 4


def test_sweep_without_outputs_prints_csv():
    code, out = call("sweep", "--sweep", "temporal", "--epsilon", "1/2", "--h", "0.2",
                     "--tau", "0.01,0.005", "--T", "0.02", *SMALL)
    assert code == 0
    assert out.splitlines()[0] == ",".join(CSV_COLUMNS)


def test_limit_check_command():
    code, out = call("limit-check", "--epsilon", "1/4,1/8", "--h", "0.2", "--T", "0.05", *SMALL)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "epsilon,difference,ratio"
    assert lines[1].endswith(",-")


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# small run\ncase = case-I\nepsilon = 1/2\nh = 0.2\ntau = 1e-3\nT = 0.004\n"
                   "domain = -40,40\nfp_tol = 1e-11\ntable = false\n")
    code, out = call("--config", str(cfg), "run")
    assert code == 0 and "case=case-I eps=0.5" in out and "steps=4" in out
    code, out = call("--config", str(cfg), "run", "--epsilon", "1/4")
    assert code == 0 and "eps=0.25" in out


def test_config_parsing(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("table = yes\nworkers = 2\n")
    assert read_config(cfg) == ["--table", "--workers=2"]


@pytest.mark.parametrize("argv", [
    ["run", "--epsilon", "2", "--T", "0.01", *SMALL],
    ["run", "--h", "0.3", "--T", "0.01", *SMALL],
    ["run", "--epsilon", "1,1/2", *SMALL],
    ["run", "--case", "case-V"],
    ["sweep", "--sweep", "spatial", "--h", "0.2,0.15"],
    ["limit-check", "--epsilon", "1/2,1/4"],
    ["frobnicate"],
    [],
])
def test_configuration_errors_exit_2(argv, capsys):
    code, _ = call(*argv)
    assert code == 2


def test_bad_config_line_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no equals sign here\n")
    assert call("--config", str(cfg), "run")[0] == 2


def test_solver_failure_exits_3():
    code, _ = call("run", "--epsilon", "1/4", "--h", "0.1", "--tau", "1e-3", "--T", "0.05",
                   "--fp-tol", "1e-30", *SMALL)
    assert code == 3


def test_io_errors_exit_4(tmp_path):
    missing = tmp_path / "nope" / "out.csv"
    code, _ = call("run", "--h", "0.2", "--T", "0.002", *SMALL, "--out", str(missing))
    assert code == 4
    code, _ = call("sweep", "--epsilon", "1", "--h", "0.4,0.2", "--tau", "1e-3", "--T", "0.002",
                   *SMALL, "--out", str(missing))
    assert code == 4
    assert call("--config", str(tmp_path / "absent.cfg"), "run")[0] == 4


def test_seed_check():
    code, out = call("--seed-check")
    assert code == 0
    assert out.count("PASS") == 5 and "FAIL" not in out


@pytest.mark.skipif(shutil.which("zakfd") is None, reason="console script not installed")
def test_console_script_help():
    done = subprocess.run(["zakfd", "--help"], capture_output=True, text=True)
    assert done.returncode == 0
    for cmd in ("run", "sweep", "limit-check", "soliton-bench"):
        assert cmd in done.stdout
