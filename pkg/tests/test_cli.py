import io

import pytest

from soilcast.cli import main


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out)
    return code, out.getvalue()


@pytest.fixture(scope="module")
def soil_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "soil.csv"
    code, text = run("synth", "--n", 120, "--seed", 42, "--out", path)
    assert code == 0 and "120 instances" in text
    return path


def test_synth_train_predict(soil_csv, tmp_path):
    model = tmp_path / "m.model"
    code, text = run("train", "--algo", "j48", "--data", soil_csv, "--out", model)
    assert code == 0 and "J48" in text
    rows = soil_csv.read_text().splitlines()[:4]
    inp = tmp_path / "rows.csv"
    inp.write_text("\n".join(rows) + "\n")
    code, text = run("predict", "--model", model, "--input", inp)
    lines = text.splitlines()
    assert code == 0 and len(lines) == 4
    assert lines[0].startswith("predicted,P(very low)")
    for line in lines[1:]:
        probs = [float(v) for v in line.split(",")[-6:]]
        assert abs(sum(probs) - 1) < 1e-5


def test_predict_without_class_column_and_with_missing(soil_csv, tmp_path):
    model = tmp_path / "m.model"
    run("train", "--algo", "cart", "--data", soil_csv, "--out", model)
    inp = tmp_path / "rows.csv"
    inp.write_text("Ph,EC,OC,P,K,Fe,Zn,Mn,Cu\n7.0,?,0.8,25,300,6,0.9,9,1.8\n")
    code, text = run("predict", "--model", model, "--input", inp)
    assert code == 0 and len(text.splitlines()) == 2


def test_predict_schema_violations(soil_csv, tmp_path, capsys):
    model = tmp_path / "m.model"
    run("train", "--data", soil_csv, "--out", model)
    inp = tmp_path / "bad.csv"
    inp.write_text("Ph,EC,OC,P,K,Fe,Zn,Mn\n7,1,1,1,1,1,1,1\n")
    assert run("predict", "--model", model, "--input", inp)[0] == 2
    assert "'Cu'" in capsys.readouterr().err
    inp.write_text("Ph,EC,OC,P,K,Fe,Zn,Mn,Cu,extra\n7,1,1,1,1,1,1,1,1,1\n")
    assert run("predict", "--model", model, "--input", inp)[0] == 2
    assert "'extra'" in capsys.readouterr().err
    inp.write_text("Ph,EC,OC,P,K,Fe,Zn,Mn,Cu\n7,1,high,1,1,1,1,1,1\n")
    assert run("predict", "--model", model, "--input", inp)[0] == 2
    assert "'OC'" in capsys.readouterr().err


def test_compare_table(soil_csv):
    code, text = run("compare", "--data", soil_csv, "--algos", "j48,cart,majority", "--cv", 5, "--seed", 1)
    assert code == 0
    assert "Correctly Classified Instances" in text and "SimpleCart" in text and "ZeroR" in text


def test_eval_and_boost_reports(soil_csv, tmp_path):
    out = tmp_path / "r.json"
    code, text = run("eval", "--data", soil_csv, "--algo", "j48", "--select", "cfs", "--cv", 5, "--out", out)
    assert code == 0 and "CFS+J48" in text and "Correctly identified instances" in text
    assert '"accuracy_percent"' in out.read_text()
    code, text = run("boost", "--base", "j48", "--select", "cfs", "--iterations", 3, "--data", soil_csv,
                     "--cv", 5, "--seed", 1)
    assert code == 0 and "CFS+AdaBoostM1(J48)" in text


def test_select_lists_subset(soil_csv):
    code, text = run("select", "--data", soil_csv)
    assert code == 0 and "selected" in text and "merit" in text


def test_usage_and_data_errors(soil_csv, tmp_path, capsys):
    assert run("compare", "--data", soil_csv, "--bogus")[0] == 1
    assert "usage" in capsys.readouterr().err
    assert run("frobnicate")[0] == 1
    assert run("compare", "--data", soil_csv, "--algos", "j48,svm")[0] == 1
    assert run("eval", "--data", tmp_path / "missing.csv")[0] == 2
    bad = tmp_path / "bad.model"
    bad.write_text("{")
    inp = tmp_path / "x.csv"
    inp.write_text("Ph\n1\n")
    assert run("predict", "--model", bad, "--input", inp)[0] == 2
    assert "byte" in capsys.readouterr().err


def test_seed_environment_fallback(soil_csv, monkeypatch):
    monkeypatch.setenv("SOILCAST_SEED", "3")
    env = run("eval", "--data", soil_csv, "--cv", 5)[1]
    explicit = run("eval", "--data", soil_csv, "--cv", 5, "--seed", 3)[1]
    assert env == explicit and "seed 3" in env
    monkeypatch.setenv("SOILCAST_SEED", "abc")
    assert run("eval", "--data", soil_csv, "--cv", 5)[0] == 1


def test_synth_with_noise_keeps_label_last(tmp_path):
    from soilcast.dataset import load_csv

    path = tmp_path / "noisy.csv"
    assert run("synth", "--n", 60, "--noise-attrs", 2, "--out", path)[0] == 0
    d = load_csv(path)
    assert d.names[-3:] == ["noise0", "noise1", "label"]
    assert d.n_classes == 6
