import json
import math

import numpy as np

from cohfluct.coupling import marginal_w
from cohfluct import fixtures as fx
from cohfluct.report import dumps, fmt_float, write_csv, write_distribution


def test_float_format_round_trips():
    for x in (0.1, 1 / 3, math.pi, 1e-300, -2.5e17):
        assert float(fmt_float(x)) == x
    assert fmt_float(0.1) == "0.10000000000000001"


def test_dumps_is_valid_json_and_maps_nonfinite_to_null():
    obj = {"a": [1, 2.5, float("nan")], "b": {"c": np.float64(0.25), "d": np.bool_(True)},
           "e": np.arange(3), "f": None, "g": float("inf"), "h": {}, "i": []}
    text = dumps(obj)
    back = json.loads(text)
    assert back["a"] == [1, 2.5, None] and back["g"] is None
    assert back["b"] == {"c": 0.25, "d": True} and back["e"] == [0, 1, 2]
    assert dumps(obj) == text


def test_csv_writers(tmp_path):
    path = write_distribution(tmp_path / "p.csv", marginal_w(fx.breathing()))
    lines = path.read_text().splitlines()
    assert lines[0] == "f,w_nats,probability"
    assert lines[1].startswith("-1,-0.69314718055994529,0.6666666666666666")
    path = write_csv(tmp_path / "x.csv", ["a", "b"], [[1, float("nan")]])
    assert path.read_text() == "a,b\n1,\n"
