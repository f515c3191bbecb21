import io
import json
import os

import numpy as np
import pandas as pd
import pytest

from cli import attach_negative_values, main

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "fixtures")


def fixture(name):
    return os.path.join(FIXTURES_DIR, name)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_unknown_subcommand(capsys):
    code, captured = run(capsys, "eigen", fixture("periodic.json"))
    assert code == 1
    assert "unknown subcommand" in captured.err


def test_fan_of_dirac_weight(capsys):
    code, captured = run(capsys, "fan", fixture("periodic.json"))
    assert code == 0
    data = json.loads(captured.out)
    assert len(data["sectors"]) == 2


def test_classify_periodic(capsys):
    code, captured = run(capsys, "classify", fixture("periodic.json"))
    assert code == 0
    data = json.loads(captured.out)
    assert data["regularity"]["regular"]
    assert data["completeness"]["status"] == "certified_complete"
    assert data["completeness"]["rule"] == "two_by_two_minors"


def test_classify_csv_summary(capsys):
    code, captured = run(capsys, "classify", fixture("degenerate.json"), "--format", "csv")
    assert code == 0
    frame = pd.read_csv(io.StringIO(captured.out)).set_index("field")
    assert frame.loc["degenerate", "value"] == "true"


def test_spectrum_csv(capsys):
    code, captured = run(capsys, "spectrum", fixture("dirichlet.json"), "--region", "-0.5,6.5,-1,1",
                         "--format", "csv")
    assert code == 0
    frame = pd.read_csv(io.StringIO(captured.out))
    assert list(frame.columns) == ["re", "im", "multiplicity"]
    assert frame["re"].to_numpy() == pytest.approx([0.0, np.pi, 2.0 * np.pi], abs=1e-6)


def test_spectrum_requires_region(capsys):
    code, captured = run(capsys, "spectrum", fixture("dirichlet.json"))
    assert code == 2
    assert "--region" in captured.err


def test_bad_json_is_a_validation_error(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"B": [1, -1],\n "C": }')
    code, captured = run(capsys, "classify", str(path))
    assert code == 2
    assert "line 2" in captured.err


def test_bad_option_value_is_a_usage_error(capsys):
    code, _ = run(capsys, "classify", fixture("periodic.json"), "--format", "xml")
    assert code == 2


def test_green_values(capsys):
    code, captured = run(capsys, "green", fixture("dirichlet.json"), "--lambda", "1+1j", "--at", "0.3,0.6",
                         "--at", "0.6,0.3")
    assert code == 0
    data = json.loads(captured.out)
    assert data["pairs"] == [[0.3, 0.6], [0.6, 0.3]]
    assert len(data["values"]) == 2


def test_gauge_output(capsys):
    code, captured = run(capsys, "gauge", fixture("reflection.json"))
    assert code == 0
    data = json.loads(captured.out)
    assert set(data) == {"system", "gauge"}
    assert data["system"]["kind"] == "dirac_system"


def test_timoshenko_conditions(capsys):
    code, captured = run(capsys, "timoshenko", fixture("ln3_beam.json"), "--conditions")
    assert code == 0
    data = json.loads(captured.out)
    assert data["conditions"]["complete_minimal"] == "complete_minimal"
    assert data["reduction"]["b1"] == pytest.approx(2.0)


def test_timoshenko_rejects_system_document(capsys):
    code, _ = run(capsys, "timoshenko", fixture("periodic.json"))
    assert code == 2


def test_emitted_dirac_system_can_be_classified(capsys, tmp_path):
    out = str(tmp_path / "reduced.json")
    code, _ = run(capsys, "timoshenko", fixture("ln3_beam.json"), "--emit-dirac", "--out", out)
    assert code == 0
    code, captured = run(capsys, "classify", out)
    assert code == 0
    data = json.loads(captured.out)
    assert data["completeness"]["rule"] == "four_by_four_pattern"


def test_negative_option_values_are_attached():
    argv = ["spectrum", "doc.json", "--region", "-0.5,6.5,-1,1", "--lambda", "-1+2j", "--grid", "64"]
    assert attach_negative_values(argv) == ["spectrum", "doc.json", "--region=-0.5,6.5,-1,1", "--lambda=-1+2j",
                                            "--grid", "64"]


def test_green_accepts_negative_lambda(capsys):
    code, captured = run(capsys, "green", fixture("dirichlet.json"), "--lambda", "-1-1j", "--at", "0.3,0.6")
    assert code == 0
    data = json.loads(captured.out)
    assert data["lambda"] == {"re": -1.0, "im": -1.0}


def test_detscan_along_ray_with_negative_angle(capsys):
    code, captured = run(capsys, "detscan", fixture("periodic.json"), "--ray", "-1.5707963,10,40", "--points", "4")
    assert code == 0
    assert len(json.loads(captured.out)["rows"]) == 4
