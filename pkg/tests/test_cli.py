import json

import numpy as np
import pytest

from gamma_models.cli import RunConfig, TupleDocument, main
from gamma_models.errors import ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture
def scalar_doc(tmp_path, capsys):
    path = tmp_path / "s.json"
    code = main(["gen", "scalar", "--n", "2", "--z", "0.5,0.5", "-o", str(path)])
    assert code == 0
    return path


def test_gen_scalar(scalar_doc):
    doc = json.loads(scalar_doc.read_text())
    assert doc["n"] == 2 and doc["dim"] == 1
    assert doc["matrices"][0]["entries"] == [[1.0, 0.0]]
    assert doc["matrices"][1]["entries"] == [[0.25, 0.0]]


def test_certify(scalar_doc, capsys):
    code, out = run(capsys, "certify", str(scalar_doc))
    assert code == 0 and out["label"] == "contraction"


def test_dilate_then_certify(scalar_doc, tmp_path, capsys):
    model = tmp_path / "m.json"
    code, out = run(capsys, "dilate", "--kind", "schaffer", str(scalar_doc), str(model))
    assert code == 0 and out["kind"] == "schaffer"
    code, cert = run(capsys, "certify", str(model))
    assert code == 0 and cert["label"] in ("isometry", "pure_isometry")


def test_verify_and_factorize(scalar_doc, tmp_path, capsys):
    model = tmp_path / "d.json"
    assert main(["dilate", "--kind", "douglas", str(scalar_doc), str(model), "-o", str(tmp_path / "x")]) == 0
    code, rep = run(capsys, "verify", str(model), str(scalar_doc))
    assert code == 0 and rep["worst"] <= 1e-7
    code, fx = run(capsys, "factorize", str(scalar_doc))
    assert code == 0 and fx["report"]["isometry"] <= 1e-8


def test_fundamental_canonical_report(scalar_doc, capsys):
    code, out = run(capsys, "fundamental", str(scalar_doc))
    assert code == 0 and out["ops"][0]["entries"][0][0] == pytest.approx(0.8)
    code, out = run(capsys, "canonical", str(scalar_doc))
    assert code == 0 and out["rank"] == 0
    code, out = run(capsys, "report", str(scalar_doc))
    assert code == 0 and out["class"] == "contraction"
    assert all(m.get("passed") for m in out["models"].values())


def test_wold(tmp_path, capsys):
    path = tmp_path / "p.json"
    assert main(["--degree", "6", "--grid", "13", "gen", "direct_sum", "--n", "2", "--r", "1", "--dim", "2",
                 "-o", str(path)]) == 0
    code, out = run(capsys, "wold", str(path))
    assert code == 0 and out["shift_mult"] == 1 and out["unitary_part"]["dim"] == 2


def test_errors_are_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 2, "dim": 1, "matrices": [{"dim": 1, "entries": [[3.0, 0]]},
                                                                {"dim": 1, "entries": [[1.0, 0]]}]}))
    code, out = run(capsys, "certify", str(bad))
    assert code == 2 and out["error"]["code"] == "SPECTRUM_OUTSIDE_DOMAIN"
    code, out = run(capsys, "--degree", "40", "certify", str(bad))
    assert code == 2 and out["error"]["code"] == "CONFIG_ERROR"


def test_budget_exceeded_exit_code(scalar_doc, tmp_path, capsys):
    # a tampered model document no longer dilates the tuple
    model = tmp_path / "m.json"
    main(["dilate", "--kind", "schaffer", str(scalar_doc), str(model), "-o", str(tmp_path / "x")])
    doc = json.loads(model.read_text())
    doc["matrices"][1]["entries"][0][0] += 1e-3
    model.write_text(json.dumps(doc))
    code, rep = run(capsys, "verify", str(model), str(scalar_doc))
    assert code == 1 and rep["worst"] >= 1e-4


def test_run_config_validation():
    RunConfig().validate()
    with pytest.raises(ConfigError):
        RunConfig(degree=32, grid=64).validate()
    with pytest.raises(ConfigError):
        RunConfig(tol=0).validate()


def test_tuple_document_roundtrip():
    from gamma_models.generators import scalar_tuple

    T = scalar_tuple([0.1 + 0.2j, -0.3])
    doc = TupleDocument.from_json(json.loads(json.dumps(TupleDocument.from_tuple(T).to_json())))
    T2 = doc.to_tuple()
    assert all(np.array_equal(a, b) for a, b in zip(T, T2))
    with pytest.raises(ConfigError):
        TupleDocument.from_json({"n": 3, "dim": 1, "matrices": []})
