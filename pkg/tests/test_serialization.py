import io
import json

import numpy as np
import pytest

from pgmpbm import ensemble as E
from pgmpbm import measurement as M
from pgmpbm import serialization as S
from pgmpbm.analysis import CSV_COLUMNS, report


def test_ensemble_round_trip(tmp_path):
    e = E.random_ensemble(4, 11)
    path = tmp_path / "e.json"
    S.dump_ensemble(e, path)
    back = S.load_ensemble(path)
    np.testing.assert_array_equal(back.states, e.states)
    np.testing.assert_array_equal(back.probs, e.probs)
    data = json.loads(path.read_text())
    assert data["dim"] == 2 and len(data["states"]) == 4
    assert np.array(data["states"]).shape == (4, 2, 2, 2)


def test_povm_round_trip():
    g = M.pgm(E.trine())
    back = S.povm_from_json(json.loads(json.dumps(S.povm_to_json(g))), 2)
    np.testing.assert_array_equal(back.elements, g.elements)


@pytest.mark.parametrize(
    "mutate, match",
    [
        (lambda d: d.pop("probs"), "missing field 'probs'"),
        (lambda d: d.update(probs="half"), "field 'probs'"),
        (lambda d: d.update(dim=0), "field 'dim'"),
        (lambda d: d["states"][1].pop(), r"field 'states\[1\]'"),
        (lambda d: d.update(probs=[0.5, 0.5]), "field 'states'"),
    ],
)
def test_format_errors_name_field(mutate, match):
    d = S.ensemble_to_json(E.trine())
    mutate(d)
    with pytest.raises(S.FormatError, match=match):
        S.ensemble_from_json(d)


def test_invalid_ensemble_reports_invariants():
    d = S.ensemble_to_json(E.trine())
    d["probs"] = [0.5, 0.5, 0.5]
    with pytest.raises(E.EnsembleError, match="sum to 1.5"):
        S.ensemble_from_json(d)


def test_json_syntax_error_has_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n "dim": 2,\n "probs": [0.5 0.5]\n}')
    with pytest.raises(S.FormatError, match="line 3"):
        S.load_ensemble(path)


def test_report_writer():
    buf = io.StringIO()
    w = S.ReportWriter(buf, ("gamma",))
    w.write(report(E.trine()), 0.25)
    with pytest.raises(ValueError):
        w.write(report(E.trine()))
    w.comment("done")
    lines = buf.getvalue().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS) + ["gamma"]
    assert lines[1].split(",")[-1] == "0.25"
    assert lines[2] == "# done"
