from __future__ import annotations

import json
import math

import numpy as np
import pytest

from dglab.errors import ConfigurationError
from dglab.fields import GridSpec, build_coefficients, build_field
from dglab.io import (
    dumps_coefficients,
    dumps_csv,
    dumps_json,
    dumps_field,
    jsonable,
    loads_coefficients,
    loads_field,
    read_field,
    write_field,
)


@pytest.mark.parametrize("d, h", [(1, 1 / 16), (2, 1 / 4)])
def test_field_round_trip(tmp_path, d, h):
    spec = GridSpec.uniform(d, h)
    u = build_field(spec, "smooth_bump")
    write_field(tmp_path / "u.dglab", u)
    back = read_field(tmp_path / "u.dglab")
    assert back.spec == spec
    assert np.array_equal(back.values, u.values)
    assert loads_field(dumps_field(u)).values.tobytes() == u.values.tobytes()


def test_coefficient_round_trip():
    spec = GridSpec.uniform(1, 1 / 8)
    c = build_coefficients(spec, "checkerboard", "random", lam=1, Lam=2, seed=5)
    back = loads_coefficients(dumps_coefficients(c))
    assert np.array_equal(back.A, c.A) and np.array_equal(back.B, c.B) and np.array_equal(back.g, c.g)
    assert (back.lam, back.Lam, back.q) == (c.lam, c.Lam, c.q)


def test_truncated_payload_rejected():
    text = dumps_field(build_field(GridSpec.uniform(1, 1 / 8), "constant", c=1.0))
    head, payload = text.split("\n", 1)
    with pytest.raises(ConfigurationError):
        loads_field(head + "\n" + payload[: len(payload) // 2])


def test_wrong_version_rejected():
    text = dumps_field(build_field(GridSpec.uniform(1, 1 / 8), "constant"))
    head, payload = text.split("\n", 1)
    h = json.loads(head)
    h["version"] = 99
    with pytest.raises(ConfigurationError):
        loads_field(json.dumps(h) + "\n" + payload)


def test_json_is_strict_and_stable():
    doc = {"b": math.inf, "a": np.float64(0.5), "c": [np.int64(3), (1, 2)], "n": math.nan}
    text = dumps_json(doc)
    parsed = json.loads(text)
    assert list(parsed) == ["a", "b", "c", "n"]
    assert parsed["a"] == 0.5 and parsed["c"] == [3, [1, 2]]
    assert "Infinity" not in text and "NaN" not in text
    assert dumps_json(doc) == text
    assert jsonable(np.arange(3)) == [0, 1, 2]


def test_csv_shape():
    text = dumps_csv(["a", "b"], [[1, 0.5], [2, None]])
    assert text.splitlines()[0] == "a,b"
    assert len(text.splitlines()) == 3
