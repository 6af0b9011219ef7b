import json
import math

import pytest
from hypothesis import given, strategies as st

from unigen.cli import main
from unigen.report import (KINDS, SCHEMA_VERSION, Report, render_structured, with_mask)


def rep(kind="eval", payload=None, **kw):
    return Report(kind, "EML", payload if payload is not None else {"verdict": "pass"}, 42, 1e-9, **kw)


def test_top_level_keys():
    doc = json.loads(render_structured(rep()))
    assert set(doc) == {"schema_version", "kind", "family", "seed", "tolerance", "tool_version",
                        "payload"}
    assert doc["schema_version"] == SCHEMA_VERSION


def test_timestamp_excluded():
    a = rep(timestamp="2020-01-01T00:00:00")
    b = rep(timestamp="2030-01-01T00:00:00")
    assert render_structured(a) == render_structured(b)


def test_sorted_keys_and_floats():
    text = render_structured(rep(payload={"b": 0.1, "a": 1.0 / 3.0, "c": [math.nan, -math.inf]}))
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert "0.33333333333333331" in text
    assert "0.10000000000000001" in text
    assert '[null, "-inf"]' in text


def test_invalid_with_mask():
    d = with_mask([1.0, math.nan])
    assert d == {"values": [1.0, math.nan], "valid": [True, False]}
    text = render_structured(rep(payload={"point": d}))
    doc = json.loads(text)
    assert doc["payload"]["point"]["values"] == [1.0, None]
    assert doc["payload"]["point"]["valid"] == [True, False]


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_floats_round_trip(x):
    doc = json.loads(render_structured(rep(payload={"v": x})))
    assert doc["payload"]["v"] == x


@given(st.dictionaries(st.text(min_size=1, max_size=5),
                       st.one_of(st.integers(), st.floats(), st.text(max_size=5), st.booleans(),
                                 st.none()), max_size=6))
def test_canonical_and_valid_json(payload):
    a = render_structured(rep(payload=payload))
    assert a == render_structured(rep(payload=dict(reversed(list(payload.items())))))
    json.loads(a)


def test_unknown_kind():
    with pytest.raises(ValueError):
        Report("plot", "EML", {}, 0, 1e-9)
    assert "search" in KINDS


def _cli_text(argv, capsys):
    main(argv)
    return capsys.readouterr().out


def test_axioms_text(capsys):
    out = _cli_text(["axioms", "EML"], capsys)
    assert "anti-associativity: PASS" in out


def test_chain_text(capsys):
    out = _cli_text(["derive", "EML"], capsys)
    for k in range(1, 7):
        assert f"step {k} " in out
    assert "S z S S z x c" in out
    step3 = out[out.index("step 3"):out.index("step 4")]
    assert "size: 7" in step3


def test_search_text(capsys):
    out = _cli_text(["search", "EML", "--target", "ln", "--max-size", "7"], capsys)
    assert "minimal size 7, 2 witness(es)" in out


def test_structured_forms(capsys):
    for argv in (["axioms", "EML"], ["derive", "EML"], ["search", "EML", "--target", "ln"]):
        doc = json.loads(_cli_text(argv + ["--output", "structured"], capsys))
        assert doc["payload"]["verdict"] == "pass"
