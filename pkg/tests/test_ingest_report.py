import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from analogical_inference.boolean import BooleanModel
from analogical_inference.core import FiniteMeasure
from analogical_inference.errors import DomainError, InputError, OutputError, UsageError
from analogical_inference.ingest import detect_delimiter, load_dataset, load_points, write_dataset
from analogical_inference.regression import LabeledDataset
from analogical_inference.report import table_rows, to_document, to_plain, write_report


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_dataset(tmp_path):
    path = write(tmp_path / "train.csv", "x1,x2,y\n1,1,2.449\n2,1,3.464\n1,2,3.873\n")
    dataset = load_dataset(path)
    assert dataset.n == 2
    assert len(dataset) == 3
    assert dataset.columns == ("x1", "x2")
    np.testing.assert_allclose(dataset.measure.weights, [1 / 3] * 3)
    assert dataset.labels[2] == 3.873


def test_load_dataset_with_weights(tmp_path):
    path = write(tmp_path / "train.csv", "height,weight,y\n1,0.25,1\n2,0.75,2\n")
    dataset = load_dataset(path, weight_column="weight")
    assert dataset.columns == ("height",)
    np.testing.assert_array_equal(dataset.measure.weights, [0.25, 0.75])
    unweighted = load_dataset(path, weight_column=None)
    assert unweighted.columns == ("height", "weight")


def test_delimiters_are_detected(tmp_path):
    assert detect_delimiter("a\tb\ty") == "\t"
    assert detect_delimiter("a;b;y") == ";"
    assert detect_delimiter("y") == ","
    path = write(tmp_path / "train.tsv", "x1\tx2\ty\n1\t2\t3\n")
    assert load_dataset(path).points.tolist() == [[1.0, 2.0]]


def test_input_errors(tmp_path):
    with pytest.raises(InputError):
        load_dataset(tmp_path / "missing.csv")
    with pytest.raises(InputError):
        load_dataset(write(tmp_path / "empty.csv", ""))
    with pytest.raises(InputError):
        load_dataset(write(tmp_path / "nolabel.csv", "x1,x2\n1,2\n"))
    with pytest.raises(InputError) as info:
        load_dataset(write(tmp_path / "text.csv", "x1,y\n1,2\nabc,3\n"))
    assert info.value.line == 3
    assert info.value.column == "x1"


def test_rows_longer_than_the_header_are_rejected(tmp_path):
    with pytest.raises(InputError) as info:
        load_dataset(write(tmp_path / "wide.csv", "x1,y\n1,2,3\n4,5,6\n"))
    assert info.value.line == 2
    with pytest.raises(InputError) as info:
        load_dataset(write(tmp_path / "ragged.csv", "x1,y\n1,2\n3,4,5\n"))
    assert info.value.line == 3


def test_domain_errors_name_the_row(tmp_path):
    with pytest.raises(DomainError, match="row 2"):
        load_dataset(write(tmp_path / "neg.csv", "x1,y\n1,2\n1,-3\n"))
    with pytest.raises(DomainError, match="missing"):
        load_dataset(write(tmp_path / "hole.csv", "x1,y\n1,\n"))
    with pytest.raises(DomainError):
        load_dataset(write(tmp_path / "nan.csv", "x1,y\nnan,1\n"))
    with pytest.raises(DomainError):
        load_dataset(write(tmp_path / "weights.csv", "x1,weight,y\n1,0.5,1\n2,0.6,1\n"))


def test_load_points_ignores_labels(tmp_path):
    points, columns = load_points(write(tmp_path / "query.csv", "x1,x2,y\n2,2,0\n3,1,0\n"))
    assert columns == ["x1", "x2"]
    assert points.tolist() == [[2.0, 2.0], [3.0, 1.0]]


def test_write_dataset_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    points = rng.uniform(0.0, 10.0, size=(20, 3))
    labels = rng.uniform(0.0, 5.0, size=20)
    weights = rng.dirichlet(np.ones(20))
    weights[-1] = 1.0 - math.fsum(weights[:-1])
    dataset = LabeledDataset(points, labels, FiniteMeasure(points, weights), ("u", "v", "w"), "target")
    path = tmp_path / "round.csv"
    write_dataset(dataset, path, weight_column="weight")
    loaded = load_dataset(path, label_column="target")
    np.testing.assert_array_equal(loaded.points, dataset.points)
    np.testing.assert_array_equal(loaded.labels, dataset.labels)
    np.testing.assert_array_equal(loaded.measure.weights, dataset.measure.weights)
    assert loaded.columns == ("u", "v", "w")


@dataclass
class Sample:
    name: str
    value: Fraction
    model: BooleanModel
    wall_time: float

    @property
    def doubled(self) -> Fraction:
        return 2 * self.value


def test_to_plain():
    doc = to_plain(Sample("s", Fraction(1, 3), BooleanModel.KLEIN, 1.5))
    assert doc["value"] == {"num": 1, "den": 3, "decimal": 1 / 3}
    assert doc["model"] == "klein"
    assert doc["doubled"]["num"] == 2
    assert to_plain(np.int64(3)) == 3
    assert to_plain(np.array([1.0, 2.0])) == [1.0, 2.0]
    assert to_plain(float("inf")) is None
    assert to_plain({"ratio": np.float64("nan")}) == {"ratio": None}
    with pytest.raises(UsageError):
        to_plain(object())


def test_documents_keep_timing_apart():
    doc = to_document([Sample("s", Fraction(1, 2), BooleanModel.MINIMAL, 2.5)], command="demo")
    assert doc["command"] == "demo"
    assert doc["timing"] == {"0.wall_time": 2.5}
    assert "wall_time" not in doc["report"][0]
    with pytest.raises(UsageError):
        to_document([])


def test_table_rows_flatten_rationals():
    rows = table_rows([Sample("s", Fraction(1, 4), BooleanModel.MINIMAL, 0.1)])
    assert rows[0]["value"] == 0.25
    assert rows[0]["value.num"] == 1 and rows[0]["value.den"] == 4
    assert "wall_time" not in rows[0]
    assert table_rows({"rows": [{"a": 1}, {"a": 2}], "covered": 2}) == [{"a": 1}, {"a": 2}]


def test_write_report(tmp_path, capsys):
    report = {"value": Fraction(3, 4), "rows": [{"x": 1.0}]}
    write_report(report, tmp_path / "r.json", "json", "demo")
    doc = json.loads((tmp_path / "r.json").read_text())
    assert doc["report"]["value"]["den"] == 4
    write_report(report, tmp_path / "r.csv", "csv")
    assert pd.read_csv(tmp_path / "r.csv")["x"].tolist() == [1.0]
    write_report({"ratio": float("inf")}, tmp_path / "inf.json")
    assert json.loads((tmp_path / "inf.json").read_text())["report"]["ratio"] is None
    write_report(report)
    assert '"command": null' in capsys.readouterr().out
    with pytest.raises(UsageError):
        write_report(report, fmt="xml")
    with pytest.raises(OutputError):
        write_report(report, tmp_path / "missing" / "r.json")
