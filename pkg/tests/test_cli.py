import math

import numpy as np
import pytest

from splinewoe.cli import main, parse_grid
from splinewoe.data import Schema, load_csv, write_csv
from splinewoe.model import PipelineModel
from splinewoe.synthetic import fraud_data, fraud_schema, to_dataset

GRID = ["--grid-cat", "exp:-10:2:5", "--grid-uc", "exp:-10:2:5", "--grid-c", "exp:-10:2:5"]


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    sch = fraud_schema("swoe")
    cols, y, _ = fraud_data(11)
    write_csv(to_dataset(cols, y, sch), d / "train.csv")
    (d / "schema.txt").write_text(sch.to_text())
    assert main(["fit", "--data", str(d / "train.csv"), "--schema", str(d / "schema.txt"),
                 "--out", str(d / "m.json"), "--trace", str(d / "trace"), *GRID]) == 0
    return d


def test_parse_grid():
    assert parse_grid("0.5,1,2") == (0.5, 1.0, 2.0)
    g = parse_grid("exp:-10:2:13")
    assert len(g) == 13 and g[0] == pytest.approx(math.exp(-10)) and g[3] == pytest.approx(math.exp(-7))
    for bad in ("", "a,b", "exp:1:2", "-1", "exp:0:1:0", "nan"):
        with pytest.raises(Exception):
            parse_grid(bad)


def test_fit_outputs(files):
    model = PipelineModel.load(files / "m.json")
    assert model.names[:2] == ["(Intercept)", "age"]
    assert sorted(p.name for p in (files / "trace").iterdir()) == ["trace_lambda_continuous.tsv"]
    head = (files / "trace" / "trace_lambda_continuous.tsv").read_text().splitlines()[0]
    assert head.startswith("lambda_uc\tlambda_c\t")


def test_predict_reproduces_in_sample(files, tmp_path):
    assert main(["predict", "--model", str(files / "m.json"), "--data", str(files / "train.csv"),
                 "--out", str(tmp_path / "p.tsv")]) == 0
    lines = (tmp_path / "p.tsv").read_text().splitlines()
    assert lines[0] == "probability"
    p = np.array([float(v) for v in lines[1:]])
    model = PipelineModel.load(files / "m.json")
    ds = load_csv(files / "train.csv", model.schema)
    np.testing.assert_array_equal(p, model.predict(ds))


def test_transform_header_and_values(files, tmp_path):
    out = tmp_path / "t.tsv"
    assert main(["transform", "--model", str(files / "m.json"), "--data",
                 str(files / "train.csv"), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    model = PipelineModel.load(files / "m.json")
    assert lines[0].split("\t") == model.names
    X = np.array([[float(v) for v in line.split("\t")] for line in lines[1:]])
    np.testing.assert_array_equal(X, model.transform(load_csv(files / "train.csv", model.schema)))


def test_predict_without_response_column(files, tmp_path):
    text = (files / "train.csv").read_text().splitlines()
    head = text[0].split(",")
    j = head.index("y")
    rows = [",".join(c for i, c in enumerate(line.split(",")) if i != j) for line in text[:21]]
    (tmp_path / "score.csv").write_text("\n".join(rows) + "\n")
    assert main(["predict", "--model", str(files / "m.json"), "--data", str(tmp_path / "score.csv"),
                 "--out", str(tmp_path / "p.tsv")]) == 0
    assert len((tmp_path / "p.tsv").read_text().splitlines()) == 21


def test_evaluate_perfect_model(tmp_path, capsys):
    rng = np.random.default_rng(0)
    x = rng.normal(size=200)
    y = (x > 0).astype(int)
    sch = Schema.parse("y response\nx continuous_linear\n")
    write_csv(to_dataset({"x": x}, y, sch), tmp_path / "d.csv")
    (tmp_path / "s.txt").write_text(sch.to_text())
    assert main(["fit", "--data", str(tmp_path / "d.csv"), "--schema", str(tmp_path / "s.txt"),
                 "--out", str(tmp_path / "m.json")]) == 0
    capsys.readouterr()
    assert main(["evaluate", "--model", str(tmp_path / "m.json"), "--data",
                 str(tmp_path / "d.csv")]) == 0
    head, row = capsys.readouterr().out.splitlines()
    rec = dict(zip(head.split("\t"), row.split("\t")))
    assert float(rec["auc"]) == 1.0 and float(rec["h"]) == 1.0


def test_cv_deterministic(files, tmp_path):
    args = ["cv", "--data", str(files / "train.csv"), "--schema", str(files / "schema.txt"),
            "--folds", "3", "--seed", "7", *GRID]
    assert main([*args, "--out", str(tmp_path / "a.tsv")]) == 0
    assert main([*args, "--out", str(tmp_path / "b.tsv")]) == 0
    a = (tmp_path / "a.tsv").read_bytes()
    assert a == (tmp_path / "b.tsv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0].startswith("fold\tauc\twbrier\th")
    assert [line.split("\t")[0] for line in lines[1:]] == ["1", "2", "3", "mean"]
    assert all(len(line.split("\t")) == len(lines[0].split("\t")) for line in lines)


def test_export_plot_and_coef(files, tmp_path, capsys):
    assert main(["export-plot", "--model", str(files / "m.json"), "--out",
                 str(tmp_path / "plots"), "--points", "30"]) == 0
    names = sorted(p.name for p in (tmp_path / "plots").iterdir())
    model = PipelineModel.load(files / "m.json")
    expected = sorted([f"smooth_{c}.tsv" for c in model.smooths] +
                      [f"woe_{c}.tsv" for c in model.woe_maps])
    assert names == expected
    assert len((tmp_path / "plots" / "smooth_amount.tsv").read_text().splitlines()) == 31
    assert main(["coef", "--model", str(files / "m.json")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "name\testimate\tse\tz\tp"
    assert [line.split("\t")[0] for line in lines[1:]] == model.names


def test_exit_codes(files, tmp_path, capsys):
    assert main([]) == 2
    assert main(["fit", "--data", "x.csv"]) == 2
    assert main(["fit", "--data", "x", "--schema", "s", "--out", "o", "--grid-cat", "a"]) == 2
    assert main(["coef", "--model", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "bad_schema.txt").write_text("y response\nx nonsense\n")
    assert main(["fit", "--data", str(files / "train.csv"), "--schema",
                 str(tmp_path / "bad_schema.txt"), "--out", str(tmp_path / "m.json")]) == 1
    err = capsys.readouterr().err
    assert "error" in err and "nonsense" in err
    (tmp_path / "bad.json").write_text("{}")
    assert main(["coef", "--model", str(tmp_path / "bad.json")]) == 1


def test_unseen_policy_error(files, tmp_path, capsys):
    text = (files / "train.csv").read_text().splitlines()
    head = text[0].split(",")
    j = head.index("country")
    cells = text[1].split(",")
    cells[j] = "NEW"
    (tmp_path / "u.csv").write_text("\n".join([text[0], ",".join(cells)]) + "\n")
    base = ["predict", "--model", str(files / "m.json"), "--data", str(tmp_path / "u.csv"),
            "--out", str(tmp_path / "p.tsv")]
    assert main(base) == 0
    assert main([*base, "--unseen-policy", "error"]) == 1
    assert "NEW" in capsys.readouterr().err
