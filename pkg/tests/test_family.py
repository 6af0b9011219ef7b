import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from unigen.axioms import check_axioms
from unigen.family import (ConjugationInvalid, Interval, UnknownFamily, builtin_families,
                           conjugated_family, eval_S, load_config, make_conjugated,
                           validate_family)

FAMS = builtin_families()
NAMES = ["EML", "EDL", "LEXP", "COS", "COS2", "ACOT", "TANH", "INVOL"]


def test_registry_contents():
    assert list(FAMS) == NAMES


@pytest.mark.parametrize("name,f,g,M,e,c,lo,hi", [
    ("EML", "exp", "ln", "sub", 0.0, 1.0, 0.1, 3.0),
    ("EDL", "exp", "ln", "div", 1.0, math.e, 0.1, 3.0),
    ("COS", "cos", "arccos", "sub", 0.0, 1.0, 0.1, 1.4),
    ("COS2", "2cos", "arccos_half", "sub", 0.0, 2.0, 0.1, 1.4),
    ("ACOT", "arccot", "cot", "sub", 0.0, math.pi / 2, 0.2, 1.3),
    ("TANH", "tanh", "artanh", "sub", 0.0, 0.0, -0.9, 0.9),
    ("INVOL", "invol", "invol", "sub", 0.0, 0.0, -0.9, 2.0),
])
def test_builtin_definitions(name, f, g, M, e, c, lo, hi):
    fam = FAMS[name]
    assert (fam.f.name, fam.g.name, fam.M.name) == (f, g, M)
    assert fam.e == e and fam.c == pytest.approx(c, rel=1e-15)
    assert (fam.sample_domain.lo, fam.sample_domain.hi) == (lo, hi)


def test_lexp_definition():
    fam = FAMS["LEXP"]
    assert (fam.f.name, fam.g.name, fam.e, fam.c, fam.extended) == ("ln", "exp", 0.0, -math.inf, True)


def test_constants():
    assert FAMS["EML"].c == 1
    assert FAMS["ACOT"].c == pytest.approx(math.pi / 2)
    assert FAMS["EDL"].c == pytest.approx(2.718281828459045, rel=1e-15)


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        FAMS["NOPE"]


def test_eval_S_examples():
    assert eval_S(FAMS["EML"], 0.0, 1.0) == 1.0
    assert math.isnan(eval_S(FAMS["EML"], 0.5, 0.0))
    assert eval_S(FAMS["LEXP"], 1.0, -math.inf) == 0.0


def test_extended_whitelist_only():
    lexp = FAMS["LEXP"]
    # ln(0) = -inf; finite - (-inf) = +inf
    assert lexp.f(0.0, True) == -math.inf
    assert lexp.g(-math.inf, True) == 0.0
    assert FAMS["EML"].M(1.0, -math.inf, True) == math.inf
    # anything else involving infinities stays Invalid
    assert math.isnan(FAMS["EML"].M(math.inf, 1.0, True))
    assert math.isnan(FAMS["EML"].M(-math.inf, -math.inf, True))
    assert math.isnan(lexp.f(0.0))  # not without the flag


@pytest.mark.parametrize("name", NAMES)
def test_families_validate(name):
    assert validate_family(FAMS[name]) == []


@pytest.mark.parametrize("name", NAMES)
def test_inverse_round_trip(name):
    fam = FAMS[name]
    d = fam.sample_domain
    x = np.random.default_rng(3).uniform(d.lo, d.hi, 64)
    x = x[d.contains(x)]
    assert x.size >= 32
    back = fam.g(fam.f(x, fam.extended), fam.extended)
    assert np.all(np.abs(back - x) <= 1e-9 * (1 + np.abs(x)))


@pytest.mark.parametrize("name", [n for n in NAMES if n != "LEXP"])
def test_g_of_c_is_e(name):
    fam = FAMS[name]
    assert abs(fam.g(fam.c) - fam.e) <= 1e-9


def test_lexp_g_of_c_limit():
    assert FAMS["LEXP"].g(-math.inf, True) == 0.0


def test_invol_self_inverse_with_seam():
    f = FAMS["INVOL"].f
    x = np.concatenate([np.linspace(-0.89, 1.99, 200), [0.0, 1e-12, -1e-12, 5e-324]])
    assert np.max(np.abs(f(f(x)) - x)) <= 1e-9
    assert math.isnan(f(-1.0)) and math.isnan(f(-1.5))


def test_domain_guards():
    assert math.isnan(FAMS["COS"].g(1.5))
    assert math.isnan(FAMS["COS"].f(-0.1))  # outside the invertible branch
    assert math.isnan(FAMS["ACOT"].g(0.0))
    assert math.isnan(FAMS["TANH"].g(1.0))


def test_conjugated_ln_is_division():
    M = make_conjugated("ln", None, None)
    assert M.neutral == 1.0
    assert M(6.0, 3.0) == pytest.approx(2.0)


def test_conjugated_square():
    M = make_conjugated("square", None, None)
    assert M.neutral == 0.0
    assert M(5.0, 3.0) == pytest.approx(4.0)
    assert math.isnan(M(3.0, 5.0))


def test_conjugated_identity():
    M = make_conjugated("identity", None, None)
    assert M.neutral == 0.0 and M(5.0, 3.0) == 2.0


def test_conjugation_invalid():
    with pytest.raises(ConjugationInvalid):
        make_conjugated(np.square, np.sqrt, Interval(-2.0, 2.0))


@pytest.mark.parametrize("phi,dom", [("ln", (0.1, 10.0)), ("square", (0.0, 5.0)),
                                     ("identity", (-3.0, 3.0))])
def test_conjugates_satisfy_axioms(phi, dom):
    M = make_conjugated(phi, None, None)
    reports = check_axioms(M, M.neutral, dom, 64, 42, 1e-9)
    assert [r.verdict for r in reports] == ["pass", "pass", "pass"]


@given(st.floats(0.2, 5.0), st.floats(0.2, 5.0))
def test_conjugated_division_property(a, b):
    M = make_conjugated("ln", None, None)
    assert M(a, b) == pytest.approx(a / b, rel=1e-12)


def test_user_config(tmp_path):
    p = tmp_path / "fams.json"
    p.write_text(json.dumps({"families": [
        {"name": "DIVX", "phi": "ln", "domain_lo": 0.2, "domain_hi": 4.0}]}))
    reg = load_config(p, FAMS)
    fam = reg["DIVX"]
    assert fam.M.name.startswith("conj")
    assert validate_family(fam) == []
    with pytest.raises(ValueError):
        load_config(p, reg)  # duplicate name


def test_conjugated_family_constant():
    fam = conjugated_family("Q", "ln", 0.2, 4.0)
    assert fam.e == 1.0 and fam.c == pytest.approx(math.e)
