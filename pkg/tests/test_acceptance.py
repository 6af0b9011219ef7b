"""One test per acceptance criterion, each at its stated tolerance and time limit.

A summary line per criterion is printed at the end of the pytest run.
"""

import contextlib
import io
import os
import time

import numpy as np

from fixture_cases import cases
from oracles import catalan
from unigen.axioms import (boxplus_from_M, check_abelian_group, check_axioms, check_roundtrip,
                           iota_from_M)
from unigen.cli import main
from unigen.derive import (IDENTITIES, Steps, build_chain, ternary_B,
                           verify_identity, verify_transport)
from unigen.family import builtin_families, eval_S, make_conjugated
from unigen.report import Report, render_structured
from unigen.search import enumerate_trees, find_target, search_minimal

FAMS = builtin_families()
TOL = 1e-9
FIXTURES = os.path.join(os.path.dirname(__file__), "data", "fixtures")


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def verdicts(reports):
    return [r.verdict for r in reports]


def test_criterion_1_axiom_suite():
    with Timer() as t:
        cases_ = [
            ("subtraction", np.subtract, 0.0, (-5.0, 5.0)),
            ("division", np.divide, 1.0, (0.1, 10.0)),
            ("sqrt(x^2-y^2)", make_conjugated("square", None, None), 0.0, (0.0, 5.0)),
            ("TANH induced", Steps(FAMS["TANH"]).f4, 0.0, FAMS["TANH"].sample_domain),
            ("ACOT induced", Steps(FAMS["ACOT"]).f4, 0.0, FAMS["ACOT"].sample_domain),
        ]
        results = {name: check_axioms(M, e, dom, 64, 42, TOL) for name, M, e, dom in cases_}
        add = check_axioms(np.add, 0.0, (0.1, 5.0), 64, 42, TOL)
        lin = check_axioms(lambda x, y: x - 2 * y, 0.0, (0.1, 5.0), 64, 42, TOL)
    for name, reps in results.items():
        assert verdicts(reps) == ["pass"] * 3, name
        assert all(r.samples_tested >= 64 for r in reps), name
    assert "fail" in verdicts(add) and "fail" in verdicts(lin)
    for reps in (add, lin):
        bad = [r for r in reps if r.verdict == "fail"]
        assert all(r.worst_witness is not None for r in bad)
    assert t.elapsed < 1.0


def test_criterion_2_group_correspondence():
    with Timer() as t:
        for M, e, dom in ((np.subtract, 0.0, (-5.0, 5.0)), (np.divide, 1.0, (0.1, 10.0))):
            grp = check_abelian_group(boxplus_from_M(M, e), iota_from_M(M, e), e, dom, 64, 42, TOL)
            assert verdicts(grp) == ["pass"] * 4
            rt = check_roundtrip(M, e, dom, 32, 42, TOL)
            assert rt.verdict == "pass" and rt.samples_tested == 32 and rt.max_abs_error <= TOL
    assert t.elapsed < 1.0


def test_criterion_3_derivation_chain():
    failures = []
    with Timer() as t:
        for name, fam in FAMS.items():
            ch = build_chain(fam, n=64, seed=42, tol=TOL, min_samples=32)
            if ch[3].size != 7 or ch[3].polish != "S z S S z x c":
                failures.append(f"{name}: step 3 size {ch[3].size}")
            for s in ch.steps:
                if s.verdict != "pass" or s.result.samples_tested < 32:
                    failures.append(f"{name} step {s.k}: {s.verdict} "
                                    f"({s.result.samples_tested} valid points)")
        assert FAMS["EML"].extended is False
    assert t.elapsed < 5.0
    assert not failures, "; ".join(failures)


def test_criterion_4_identity_registry():
    with Timer() as t:
        checks = [verify_identity(FAMS[IDENTITIES[i].family], i, tol=TOL) for i in
                  ("eml.mul", "eml.pow", "cos.half_pi", "cos.sine_shift", "cos.product_law",
                   "cos.chebyshev", "cot.reciprocal", "cot.addition", "invol.self_inverse",
                   "invol.product", "invol.quotient")]
    bad = [(c.id, c.verdict, c.max_abs_error) for c in checks if c.verdict != "pass"]
    assert not bad
    half = next(c for c in checks if c.id == "cos.half_pi")
    assert half.max_abs_error <= 1e-12
    assert t.elapsed < 2.0


def test_criterion_5_transport_checks():
    expected = {"EML": "x*y", "COS": "2*x*y", "COS2": "x*y", "ACOT": "(x+y)/(1-x*y)",
                "TANH": "(x+y)/(1+x*y)"}
    failures = []
    with Timer() as t:
        for name, law in expected.items():
            fam = FAMS[name]
            assert fam.transport.law == law
            v = verify_transport(fam, tol=TOL)
            if v.verdict != "pass":
                failures.append(f"{name}: {v.verdict} ({v.samples_tested} valid points)")
        # the laws themselves on (-0.5, 0.5)^2 for ACOT and TANH
        for name in ("ACOT", "TANH"):
            fam = FAMS[name]
            assert (fam.transport.domain.lo, fam.transport.domain.hi) == (-0.5, 0.5)
    assert t.elapsed < 1.0
    assert not failures, "; ".join(failures)


def _structured(result, family):
    return render_structured(Report("search", family.name, result.to_dict(), 42, TOL))


def test_criterion_6_search_regression():
    eml = FAMS["EML"]
    with Timer() as t:
        exp = search_minimal(eml, find_target(eml, "exp"), max_size=9)
        ln = search_minimal(eml, find_target(eml, "ln"), max_size=9)
        ln5 = search_minimal(eml, find_target(eml, "ln"), max_size=5)
        counts = {}
        for tree in enumerate_trees(("x", "c"), 7):
            n = len(tree_tokens(tree))
            counts[n] = counts.get(n, 0) + 1
        serial = search_minimal(eml, find_target(eml, "neg"), max_size=9, workers=1)
        parallel = search_minimal(eml, find_target(eml, "neg"), max_size=9, workers=4)
        ln_par = search_minimal(eml, find_target(eml, "ln"), max_size=9, workers=4)
    assert exp.minimal_size == 3 and "S x c" in exp.witnesses
    assert not ln5.found
    assert ln.minimal_size == 7 and "S x S S x x c" in ln.witnesses
    assert [counts[n] for n in (1, 3, 5, 7)] == [catalan(m) * 2 ** (m + 1) for m in range(4)]
    assert [counts[n] for n in (1, 3, 5, 7)] == [2, 4, 16, 80]
    assert _structured(serial, eml) == _structured(parallel, eml)
    assert _structured(ln, eml) == _structured(ln_par, eml)
    assert t.elapsed < 60.0


def tree_tokens(tree):
    from unigen.expr import tokens
    return list(tokens(tree))


def test_criterion_7_ternary_combinator():
    eml = lambda x, y: eval_S(FAMS["EML"], x, y)
    edl = lambda x, y: eval_S(FAMS["EDL"], x, y)
    B = ternary_B(eml, edl)
    rng = np.random.default_rng(42)
    with Timer() as t:
        tested = 0
        while tested < 32:
            x, z = rng.uniform(0.1, 3.0, 2)
            if abs(x - z) <= 1e-6:
                continue
            s1, s2 = eml(x, z), edl(x, z)
            assert B(x, x, z) == s1
            got = B(x, z, z)
            assert (np.isnan(got) and np.isnan(s2)) or got == s2
            tested += 1
    assert t.elapsed < 1.0


def test_criterion_8_determinism():
    for name, argv in sorted(cases().items()):
        outs = []
        for _ in range(2):
            buf = io.StringIO()
            with contextlib.redirect_stdout(buf):
                main(argv)
            outs.append(buf.getvalue())
        assert outs[0] == outs[1], name
        with open(os.path.join(FIXTURES, f"{name}.json"), encoding="utf-8") as fh:
            assert outs[0] == fh.read(), name
