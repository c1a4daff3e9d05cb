from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import SCENARIOS
from eigenform import formats
from eigenform.errors import ParseError
from eigenform.model import CircularMotion, RigidFormation, SystemShape

cfloat = st.floats(allow_nan=False, allow_infinity=False, width=64)


@settings(max_examples=60)
@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_matrix_json_roundtrip_bit_identical(r, c, data):
    vals = data.draw(st.lists(st.tuples(cfloat, cfloat), min_size=r * c, max_size=r * c))
    M = np.array([complex(a, b) for a, b in vals]).reshape(r, c)
    back = formats.decode_matrix(json.loads(formats.dumps(formats.encode_matrix(M))), "M")
    assert back.tobytes() == M.tobytes()


def test_complex_decoding():
    assert formats.decode_complex(2) == 2
    assert formats.decode_complex([1, -2]) == 1 - 2j
    with pytest.raises(ParseError, match="x: "):
        formats.decode_complex("1+2j", "x")
    assert np.array_equal(formats.decode_matrix([[1, [0, 1]], [2, 3]], "M"), [[1, 1j], [2, 3]])


def test_malformed_json_position(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"system": {\n  "agents": [1, 2,\n}')
    with pytest.raises(ParseError, match=r"line 3, column 1"):
        formats.load_json(p)


def test_parse_system_forms():
    s = formats.parse_system({"agents": [{"a": 1, "b": 2}, {"a": 0, "b": -1}]})
    assert s.shape is SystemShape.DIAGONAL_BOTH and np.array_equal(np.diag(s.B), [2, -1])
    tall = formats.parse_system({"A": [[1, 0], [1, 2]], "B": [1, 0]})
    assert tall.shape is SystemShape.GENERAL_A_TALL_B and tall.B.shape == (2, 1)
    with pytest.raises(ParseError, match=r"system.agents\[1\].b"):
        formats.parse_system({"agents": [{"a": 1, "b": 2}, {"a": 0, "b": "x"}]})
    with pytest.raises(ParseError, match="missing 'B'"):
        formats.parse_system({"A": [[1]]})


def test_spec_roundtrip():
    spec = formats.parse_spec({"eigenvalues": [0, [-1, 1], [-1, -1]],
                               "eigenvectors": [[1, 1, 1], [1, [0, 1], [0, -1]], [1, 0, 0]]})
    back = formats.parse_spec(json.loads(formats.dumps(formats.encode_spec(spec))))
    assert np.array_equal(back.V, spec.V) and np.array_equal(back.eigenvalues, spec.eigenvalues)


def test_spec_shape_error():
    with pytest.raises(ParseError, match="spec.eigenvectors"):
        formats.parse_spec({"eigenvalues": [0, -1], "eigenvectors": [[1, 1]]})


def test_generators_one_based():
    sc = formats.parse_scenario_obj({
        "system": {"agents": [{"a": 0, "b": 1}] * 4},
        "generator": {"type": "rigid", "f": [0, 1, [0, 1], 2], "d": 3, "leaders": [1, 2]},
        "constraints": [[3, 4]],
    })
    spec, kind, leaders = formats.resolve_spec(sc)
    assert isinstance(kind, RigidFormation) and kind.d == 3
    assert leaders == (0, 1) and sc.constraints == [(2, 3)]
    sc = formats.load_scenario(SCENARIOS / "encircling.json")
    _, kind, _ = formats.resolve_spec(sc)
    assert isinstance(kind, CircularMotion) and kind.b == 1


def test_scenario_errors_name_field():
    with pytest.raises(ParseError, match=r"constraints\[0\]"):
        formats.parse_scenario_obj({"system": {"agents": [{"a": 0, "b": 1}] * 2},
                                    "generator": {"type": "cyclic", "f": [1, 2]},
                                    "constraints": [[1, 9]]})
    with pytest.raises(ParseError, match="generator"):
        formats.parse_scenario_obj({"system": {"agents": [{"a": 0, "b": 1}] * 2},
                                    "generator": {"type": "hexagon"}})


def test_every_scenario_parses():
    for path in sorted(SCENARIOS.glob("*.json")):
        sc = formats.load_scenario(path)
        assert sc.system.n >= 2, path


def test_trajectory_csv_roundtrip():
    rng = np.random.default_rng(0)
    t = np.linspace(0, 1, 7)
    X = rng.standard_normal((7, 3)) + 1j * rng.standard_normal((7, 3))
    err = rng.random(7)
    text = formats.trajectory_csv(t, X, err)
    assert text.splitlines()[0] == "t,x1_re,x1_im,x2_re,x2_im,x3_re,x3_im,err"
    t2, X2, e2 = formats.read_trajectory_csv(text)
    assert np.array_equal(t2, t) and np.array_equal(X2, X) and np.array_equal(e2, err)


def test_svg_canvas_and_transform():
    X = np.array([[0, 1 + 1j], [2 + 2j, -1]])
    svg = formats.trajectory_svg(X, "demo")
    assert 'width="800"' in svg and 'height="800"' in svg
    assert "data-scale" in svg and svg.count("<polyline") == 2
    tf = formats.plot_transform(X)
    xs = [tf(z) for z in X.ravel()]
    assert all(40 - 1e-9 <= x <= 760 + 1e-9 and 40 - 1e-9 <= y <= 760 + 1e-9 for x, y in xs)
