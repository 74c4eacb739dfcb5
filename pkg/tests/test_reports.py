import io
import math

import numpy as np
import pytest

from hopf_dirac.reports import (CheckOutcome, SPECTRUM_COLUMNS, dumps_json, format_fixed, format_sci,
                                load_spectrum_json, render_spectrum, spectrum_csv, spectrum_json,
                                verification_table, write_text)
from hopf_dirac.spectrum3d import assemble_spectrum
from hopf_dirac.sphere_bundle import FieldProfile


@pytest.fixture(scope="module")
def report_g3():
    return assemble_spectrum(FieldProfile.constant(3.0), 1.0, 256, doublings=1)


def test_number_formatting():
    assert format_fixed(0.0) == "0.000000000000"
    assert format_fixed(-1e-15) == "0.000000000000"
    assert format_fixed(-1.5) == "-1.500000000000"
    assert format_sci(-0.0) == "0.00000000000e+00"
    assert format_sci(1234.5) == "1.23450000000e+03"


def test_spectrum_csv_carries_zero_line(report_g3):
    text = spectrum_csv(report_g3)
    lines = text.split("\n")
    assert lines[0] == ",".join(SPECTRUM_COLUMNS)
    assert "0.000000000000,1,0,,S,+" in lines
    assert text.endswith("\n") and not text.endswith("\n\n")
    for row in lines[1:-1]:
        fields = row.split(",")
        assert len(fields) == len(SPECTRUM_COLUMNS)
        assert len(fields[0].split(".")[1]) == 12


def test_empty_window_gives_header_only():
    report = assemble_spectrum(FieldProfile.constant(0.0), 0.4, 128, doublings=0)
    assert spectrum_csv(report) == ",".join(SPECTRUM_COLUMNS) + "\n"


def test_json_round_trip(report_g3):
    text = spectrum_json(report_g3)
    again = load_spectrum_json(text)
    assert spectrum_json(again) == text
    assert again.kernel_dim == report_g3.kernel_dim
    assert text.endswith("}\n")


def test_render_rejects_unknown_format(report_g3):
    assert render_spectrum(report_g3, "csv") == spectrum_csv(report_g3)
    with pytest.raises(ValueError):
        render_spectrum(report_g3, "xml")


def test_json_converts_numpy_types():
    text = dumps_json({"b": np.float64(1.5), "a": (np.int64(2), np.bool_(True)), "c": np.arange(2)})
    assert text == '{\n  "a": [\n    2,\n    true\n  ],\n  "b": 1.5,\n  "c": [\n    0,\n    1\n  ]\n}\n'


def test_write_text_is_byte_exact(tmp_path):
    target = tmp_path / "out.csv"
    write_text("a,b\n1,2\n", str(target))
    assert target.read_bytes() == b"a,b\n1,2\n"
    stream = io.StringIO()
    write_text("x\n", None, stream)
    assert stream.getvalue() == "x\n"


def test_verification_table_marks_failures():
    outcomes = [CheckOutcome("alpha", 1e-15, 1e-12), CheckOutcome("beta", 1e-3, 1e-8),
                CheckOutcome("gamma", math.nan, 1.0, "raised ValueError")]
    table = verification_table(outcomes)
    rows = table.splitlines()
    assert rows[0].split() == ["check", "residual", "tolerance", "status"]
    assert rows[1].split()[-1] == "PASS"
    assert rows[2].split()[-1] == "FAIL" and "1.000e-03" in rows[2] and "1.000e-08" in rows[2]
    assert "FAIL" in rows[3] and "raised ValueError" in rows[3]
    assert rows[-1] == "1/3 checks passed; failed: beta, gamma"
