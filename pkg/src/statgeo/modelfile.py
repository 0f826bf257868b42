"""JSON model files.

Schema (one object)::

    {"type": "expressions", "n": 3, "expressions": ["x1 + x2", ...], "constants": {"e": 0.1}}
    {"type": "linear", "n": 2, "a": [[1, 0], [0, 1]], "b": [0, 0]}
    {"type": "super-ideal", "n": 3}
    {"type": "subsystems", "P": 2, "q": [2, 2], "c": [1, 1], "gamma": "x1*x2", "epsilon": 0.1}

Only the fields of the declared type are accepted.  Errors name the
offending location as a JSON path, e.g. ``$.a[1][0]``.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Mapping, Union

from .errors import ExpressionError, ModelError
from .model import ExpressionModel, LinearModel, Model, SubsystemModel, SuperIdealModel

__all__ = ["ModelFileError", "load_model", "parse_model", "dump_model"]


class ModelFileError(ModelError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


_FIELDS = {
    "expressions": ({"type", "n", "expressions"}, {"constants"}),
    "linear": ({"type", "a"}, {"n", "b"}),
    "super-ideal": ({"type", "n"}, set()),
    "subsystems": ({"type", "q", "c", "gamma"}, {"n", "P", "epsilon"}),
}


def _int(doc, key, path, minimum=1):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ModelFileError(f"{path}.{key}", f"expected an integer, got {json.dumps(v)}")
    if v < minimum:
        raise ModelFileError(f"{path}.{key}", f"must be >= {minimum}")
    return v


def _num(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ModelFileError(path, f"expected a finite number, got {json.dumps(v)}")
    return float(v)


def _list(v, path, length=None):
    if not isinstance(v, list):
        raise ModelFileError(path, f"expected an array, got {type(v).__name__}")
    if length is not None and len(v) != length:
        raise ModelFileError(path, f"expected {length} entries, got {len(v)}")
    if not v:
        raise ModelFileError(path, "must not be empty")
    return v


def parse_model(doc: Any) -> Model:
    """Validate a decoded JSON document and build the model."""
    if not isinstance(doc, Mapping):
        raise ModelFileError("$", "model file must be a JSON object")
    kind = doc.get("type")
    if kind not in _FIELDS:
        raise ModelFileError("$.type", f"expected one of {sorted(_FIELDS)}, got {json.dumps(kind)}")
    required, optional = _FIELDS[kind]
    for key in sorted(required - set(doc)):
        raise ModelFileError(f"$.{key}", "missing required field")
    for key in sorted(set(doc) - required - optional):
        raise ModelFileError(f"$.{key}", f"unexpected field for type {kind!r}")

    if kind == "super-ideal":
        return SuperIdealModel(_int(doc, "n", "$"))

    if kind == "expressions":
        n = _int(doc, "n", "$")
        sources = _list(doc["expressions"], "$.expressions")
        for i, s in enumerate(sources):
            if not isinstance(s, str):
                raise ModelFileError(f"$.expressions[{i}]", "expected a string")
        consts = doc.get("constants", {})
        if not isinstance(consts, Mapping):
            raise ModelFileError("$.constants", "expected an object")
        consts = {k: _num(v, f"$.constants.{k}") for k, v in consts.items()}
        for i, s in enumerate(sources):
            try:
                ExpressionModel((s,), n, consts)
            except ExpressionError as exc:
                raise ModelFileError(f"$.expressions[{i}]", str(exc)) from None
        return ExpressionModel(tuple(sources), n, consts)

    if kind == "linear":
        rows = _list(doc["a"], "$.a")
        width = None
        a = []
        for i, row in enumerate(rows):
            row = _list(row, f"$.a[{i}]", width)
            width = len(row)
            a.append([_num(v, f"$.a[{i}][{j}]") for j, v in enumerate(row)])
        if "n" in doc and _int(doc, "n", "$") != width:
            raise ModelFileError("$.n", f"n = {doc['n']} but rows of a have {width} entries")
        b = None
        if "b" in doc:
            b = [_num(v, f"$.b[{i}]") for i, v in enumerate(_list(doc["b"], "$.b", len(a)))]
        return LinearModel(a, b)

    q = _list(doc["q"], "$.q")
    for i, v in enumerate(q):
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise ModelFileError(f"$.q[{i}]", "expected a positive integer")
    if "P" in doc and _int(doc, "P", "$") != len(q):
        raise ModelFileError("$.P", f"P = {doc['P']} but q has {len(q)} entries")
    if "n" in doc and _int(doc, "n", "$") != sum(q):
        raise ModelFileError("$.n", f"n = {doc['n']} but sum(q) = {sum(q)}")
    c = [_num(v, f"$.c[{i}]") for i, v in enumerate(_list(doc["c"], "$.c", len(q)))]
    if not isinstance(doc["gamma"], str):
        raise ModelFileError("$.gamma", "expected a string")
    eps = _num(doc["epsilon"], "$.epsilon") if "epsilon" in doc else 0.0
    try:
        return SubsystemModel(tuple(q), tuple(c), doc["gamma"], eps)
    except ExpressionError as exc:
        raise ModelFileError("$.gamma", str(exc)) from None
    except ModelError as exc:
        raise ModelFileError("$", str(exc)) from None


def load_model(path: Union[str, Path]) -> Model:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelFileError("$", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError("$", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_model(doc)


def dump_model(model: Model) -> str:
    return json.dumps(model.describe(), sort_keys=True, indent=2)
