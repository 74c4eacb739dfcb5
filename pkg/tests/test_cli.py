import io
import json
import subprocess
import sys

import pytest

from hopf_dirac import cli
from hopf_dirac.config import parse_config


def write_config(tmp_path, body, name="run.ini"):
    path = tmp_path / name
    path.write_text(body, encoding="utf-8")
    return str(path)


SPECTRUM = """[run] command=spectrum
[field] kind=constant g0=3.0
[discretization] N_theta=256 doublings=1
[window] energy_max=1.0
"""


def test_spectrum_to_file_is_reproducible(tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    cfg = write_config(tmp_path, SPECTRUM)
    assert cli.main(["--config", cfg, "--override", f"output.path={out1}"]) == 0
    assert cli.main(["--config", cfg, "--override", f"output.path={out2}"]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    assert "0.000000000000,1,0,,S,+" in out1.read_text().splitlines()


def test_spectrum_json_to_stdout(tmp_path, capsys):
    cfg = write_config(tmp_path, SPECTRUM + "[output] format=json\n")
    assert cli.main(["--config", cfg]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["kernel_dim"] == 1


@pytest.mark.parametrize("extra, override", [
    ("[window] energy_max=-1\n", []),
    ("[window] colour=1\n", []),
    ("", ["window.energy_max=0"]),
    ("@@@\n", []),
])
def test_config_errors_exit_2(tmp_path, capsys, extra, override):
    body = SPECTRUM.replace("[window] energy_max=1.0\n", "") + extra
    args = ["--config", write_config(tmp_path, body)]
    for item in override:
        args += ["--override", item]
    assert cli.main(args) == 2
    assert "config error" in capsys.readouterr().err


def test_non_utf8_config_exits_2(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_bytes(b"[run] command=spectrum\xff\n")
    assert cli.main(["--config", str(path)]) == 2


def test_io_errors_exit_4(tmp_path, capsys):
    assert cli.main(["--config", str(tmp_path / "missing.ini")]) == 4
    cfg = write_config(tmp_path, SPECTRUM)
    assert cli.main(["--config", cfg, "--override", f"output.path={tmp_path / 'no' / 'dir.csv'}"]) == 4


def test_transfer_outside_odd_constant_field_exits_2(tmp_path):
    cfg = write_config(tmp_path, "[run] command=transfer\n[field] kind=constant g0=4\n")
    assert cli.main(["--config", cfg]) == 2


def test_verify_passes_and_prints_table(tmp_path, capsys):
    cfg = write_config(tmp_path, "[run] command=verify\n[field] kind=constant g0=3\n")
    assert cli.main(["--config", cfg]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].split() == ["check", "residual", "tolerance", "status"]
    assert "FAIL" not in out
    assert out.splitlines()[-1].endswith("checks passed")


def test_injected_sign_error_is_caught():
    cfg = parse_config("[run] command=verify\n[field] kind=constant g0=3\n")
    stream = io.StringIO()
    assert cli.verify_command(cfg, stream, sign_errors=["fiber_form_identity"]) == 1
    rows = {line.split()[0]: line for line in stream.getvalue().splitlines()[1:-1]}
    assert rows["fiber_form_identity"].split()[3] == "FAIL"
    assert "failed: fiber_form_identity" in stream.getvalue()
    others = [name for name, line in rows.items() if name != "fiber_form_identity" and "FAIL" in line]
    assert others == []


def test_zeromodes_command(tmp_path):
    out = tmp_path / "zm.csv"
    cfg = write_config(tmp_path, "[run] command=zeromodes\n[field] kind=constant g0=6\n"
                                 f"[zeromodes] k=0 samples=11\n[output] path={out}\n")
    assert cli.main(["--config", cfg]) == 0
    rows = out.read_text().splitlines()
    assert rows[0].startswith("mode,sector,theta")
    assert len(rows) == 1 + 3 * 11  # total flux 3 gives three modes


def test_transfer_command_json(tmp_path, capsys):
    cfg = write_config(tmp_path, "[run] command=transfer\n[field] kind=constant g0=3\n[transfer] radial=5\n"
                                 "[output] format=json\n")
    assert cli.main(["--config", cfg]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["summary"]["modes"] == 1
    assert data["summary"]["norm_stability"] <= 1e-3
    assert len(data["modes"][0]) == len(data["points"])


def test_console_script_entry(tmp_path):
    cfg = write_config(tmp_path, SPECTRUM)
    proc = subprocess.run([sys.executable, "-m", "hopf_dirac.cli", "--config", cfg],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.startswith("value,multiplicity,k,lambda,branch,spin\n")


def test_missing_config_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
