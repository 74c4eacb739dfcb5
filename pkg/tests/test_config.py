import pytest

from hopf_dirac.config import load_config, parse_config
from hopf_dirac.errors import ParseError, ValidationError

MINIMAL = """
[run] command=spectrum
[field] kind=constant g0=3.0
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.command == "spectrum"
    assert cfg.field.is_constant and cfg.field.g0 == 3.0
    assert (cfg.n_theta, cfg.doublings, cfg.stencil) == (2048, 2, "regular")
    assert cfg.energy_max == 5.0 and cfg.output_format == "csv" and cfg.output_path is None
    assert cfg.seed == 0


def test_multiline_sections_and_comments():
    cfg = parse_config("""
# leading comment
[run]
command = verify   ; trailing comment
seed=7
[field]
kind=constant
g0=5
[window] energy_max=2.5
""")
    assert cfg.command == "verify" and cfg.seed == 7 and cfg.energy_max == 2.5 and cfg.field.g0 == 5.0


def test_missing_command_is_rejected():
    with pytest.raises(ValidationError, match="command"):
        parse_config("[field] kind=constant g0=3")


def test_negative_energy_window_is_rejected_with_line():
    with pytest.raises(ValidationError, match=r"line 4: energy_max must be positive"):
        parse_config(MINIMAL + "[window] energy_max=-1\n")


def test_unsorted_theta_nodes_name_the_pair():
    text = "[run] command=spectrum\n[field] kind=sampled theta_nodes=0,1.0,0.5,3.14159 values=1,1,1,1\n"
    with pytest.raises(ValidationError, match=r"line 2: .*\(1\.0, 0\.5\)"):
        parse_config(text)


@pytest.mark.parametrize("text, pattern", [
    (MINIMAL + "[window] energy_min=1\n", r"line 4: unknown key 'energy_min'"),
    (MINIMAL + "[colour] a=1\n", r"line 4: unknown section"),
    (MINIMAL + "[run] seed=1 seed=2\n", r"duplicate key 'seed'"),
    (MINIMAL + "[discretization] N_theta=8\n", r"N_theta must be >= 16"),
    (MINIMAL + "[discretization] stencil=spline\n", r"stencil must be one of"),
    (MINIMAL + "[output] format=xml\n", r"format must be csv or json"),
    (MINIMAL + "[window] energy_max=abc\n", r"line 4: .*expects float"),
    ("[run] command=fly\n[field] kind=constant g0=1\n", r"command must be one of"),
    ("[run] command=spectrum\n[field] kind=constant\n", r"needs g0"),
])
def test_validation_errors(text, pattern):
    with pytest.raises(ValidationError, match=pattern):
        parse_config(text)


@pytest.mark.parametrize("text", ["g0=1\n", "[run] command\n", "[run\n", "[run] command='open\n"])
def test_parse_errors(text):
    with pytest.raises(ParseError, match="line 1"):
        parse_config(text)


def test_overrides_replace_and_report_origin():
    cfg = parse_config(MINIMAL, ["window.energy_max=1.5", "g0=5", "discretization.N_theta=64"])
    assert cfg.energy_max == 1.5 and cfg.field.g0 == 5.0 and cfg.n_theta == 64
    with pytest.raises(ValidationError, match=r"^override: energy_max"):
        parse_config(MINIMAL, ["energy_max=0"])
    with pytest.raises(ValidationError, match="unknown key"):
        parse_config(MINIMAL, ["window.colour=1"])
    with pytest.raises(ValidationError, match="not key=value"):
        parse_config(MINIMAL, ["energy_max"])


def test_with_command_switches_mode():
    cfg = parse_config(MINIMAL).with_command("verify")
    assert cfg.command == "verify"
    with pytest.raises(ValidationError):
        cfg.with_command("fly")


def test_sampled_field_from_table(tmp_path):
    (tmp_path / "field.csv").write_text("# theta,value\n0,1\n1.5,2\n3.141592653589793,1\n", encoding="utf-8")
    (tmp_path / "run.ini").write_text("[run] command=spectrum\n[field] kind=sampled table=field.csv\n",
                                      encoding="utf-8")
    cfg = load_config(tmp_path / "run.ini")
    assert not cfg.field.is_constant
    assert cfg.field.total_flux() > 0


def test_bad_table_reports_line(tmp_path):
    (tmp_path / "field.csv").write_text("0,1,2\n1,2,3\n", encoding="utf-8")
    (tmp_path / "run.ini").write_text("[run] command=spectrum\n[field] kind=sampled\ntable=field.csv\n",
                                      encoding="utf-8")
    with pytest.raises(ValidationError, match="line 3: table .* two columns"):
        load_config(tmp_path / "run.ini")


def test_inline_nodes_give_sampled_profile():
    cfg = parse_config("[run] command=spectrum\n[field] kind=sampled\n"
                       "theta_nodes = \"0, 1.5, 3.141592653589793\"\nvalues = \"2 2 2\"\n")
    assert cfg.field.total_flux() == pytest.approx(1.0, abs=1e-9)
