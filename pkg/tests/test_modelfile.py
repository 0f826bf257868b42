import json

import pytest

from statgeo.model import ExpressionModel, LinearModel, SubsystemModel, SuperIdealModel
from statgeo.modelfile import ModelFileError, dump_model, load_model, parse_model


@pytest.mark.parametrize(
    "doc, cls",
    [
        ({"type": "super-ideal", "n": 3}, SuperIdealModel),
        ({"type": "linear", "a": [[1, 0], [0, 1], [1, 1]], "b": [0, 0, 1]}, LinearModel),
        ({"type": "expressions", "n": 2, "expressions": ["x1 + e*x2", "x2^2"], "constants": {"e": 0.1}},
         ExpressionModel),
        ({"type": "subsystems", "q": [2, 2], "c": [1, 1], "gamma": "x1*x2", "epsilon": 0.1}, SubsystemModel),
    ],
)
def test_valid_documents_round_trip(doc, cls, tmp_path):
    model = parse_model(doc)
    assert isinstance(model, cls)
    path = tmp_path / "m.json"
    path.write_text(dump_model(model))
    assert load_model(path).describe() == model.describe()


@pytest.mark.parametrize(
    "doc, where",
    [
        ([], "$"),
        ({"type": "cubic"}, "$.type"),
        ({"type": "super-ideal"}, "$.n"),
        ({"type": "super-ideal", "n": 2, "extra": 1}, "$.extra"),
        ({"type": "super-ideal", "n": True}, "$.n"),
        ({"type": "linear", "a": [[1, 0], [0, "x"]]}, "$.a[1][1]"),
        ({"type": "linear", "a": [[1, 0], [0]]}, "$.a[1]"),
        ({"type": "linear", "a": [[1, 0]], "n": 3}, "$.n"),
        ({"type": "linear", "a": [[1, 0]], "b": [0, 1]}, "$.b"),
        ({"type": "expressions", "n": 2, "expressions": ["x1 +"]}, "$.expressions[0]"),
        ({"type": "expressions", "n": 1, "expressions": ["x1", "x2"]}, "$.expressions[1]"),
        ({"type": "expressions", "n": 1, "expressions": ["e*x1"], "constants": {"e": "big"}}, "$.constants.e"),
        ({"type": "subsystems", "q": [2, 0], "c": [1, 1], "gamma": "x1"}, "$.q[1]"),
        ({"type": "subsystems", "q": [2, 2], "c": [1], "gamma": "x1"}, "$.c"),
        ({"type": "subsystems", "q": [2, 2], "c": [1, 1], "gamma": "x3"}, "$.gamma"),
    ],
)
def test_errors_name_the_location(doc, where):
    with pytest.raises(ModelFileError) as info:
        parse_model(doc)
    assert info.value.path == where


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(ModelFileError):
        load_model(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{\"type\": ")
    with pytest.raises(ModelFileError) as info:
        load_model(bad)
    assert "line 1" in str(info.value)


def test_dump_is_canonical():
    text = dump_model(SuperIdealModel(2))
    assert json.loads(text) == {"type": "super-ideal", "n": 2}
