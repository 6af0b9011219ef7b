"""The six-step derivation chain, addition-law transport and identity checks.

Starting from ``S`` and the constant ``c`` (with ``g(c) = e``):

    f1(x)    = S(x, c)                 -> f(x)
    f2(x, y) = S(x, f1(y))             -> f(x) - y
    f3(x)    = f2(z, S(z, x))          -> g(x)        (tree ``S z S S z x c``)
    f4(x, y) = S(f3(x), f1(y))         -> x - y
    f5(x)    = f4(f4(w, x), w)         -> inv(x)
    f6(x, y) = f4(x, f5(y))            -> x + y

where ``-``/``+``/``inv`` are the family's M, group law and inverse, and
``z``, ``w`` are free auxiliaries (the result must not depend on them).
Each step exists both as a closure over earlier steps and as a fully
inlined S-tree; the two evaluate identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._sampling import CheckResult, compare
from .expr import CONST, Op, Tree, Var, evaluate, print_polish, size, substitute
from .family import DEFAULT_TOL, OperatorFamily

CHAIN_N = 64
CHAIN_MIN_SAMPLES = 32
IDENTITY_MIN_SAMPLES = 16


class ChainBroken(RuntimeError):
    def __init__(self, step: int, witness):
        super().__init__(f"derivation step {step} failed verification at {witness}")
        self.step = step
        self.witness = witness


class NoAdditionFormula(LookupError):
    pass


class UnknownIdentity(KeyError):
    pass


# -- trees --------------------------------------------------------------------

X, Y, Z, W = Var("x"), Var("y"), Var("z"), Var("w")


def _chain_trees() -> dict[int, Tree]:
    t1 = Op(X, CONST)
    t2 = Op(X, Op(Y, CONST))
    t3 = Op(Z, Op(Op(Z, X), CONST))
    t4 = Op(substitute(t3, {}), Op(Y, CONST))
    t5 = substitute(t4, {"x": substitute(t4, {"x": W, "y": X}), "y": W})
    t6 = substitute(t4, {"y": substitute(t5, {"x": Y})})
    return {1: t1, 2: t2, 3: t3, 4: t4, 5: t5, 6: t6}


CHAIN_TREES = _chain_trees()

STEP_INFO = {
    1: ("f", "S(x, c) = f(x) - g(c) = f(x)", 1),
    2: ("f(x) - y", "S(x, f(y)) = f(x) - y", 2),
    3: ("g", "f2(z, S(z, x)) = f(z) - (f(z) - g(x)) = g(x)", 1),
    4: ("x - y", "S(g(x), f(y)) = x - y", 2),
    5: ("inv", "(w - x) - w = e - x = inv(x)", 1),
    6: ("x + y", "x - inv(y) = x + y", 2),
}


# -- chain ----------------------------------------------------------------------

class Steps:
    """Closures f1..f6 for one family and fixed auxiliaries."""

    def __init__(self, family: OperatorFamily, z: Optional[float] = None, w: Optional[float] = None):
        self.family = family
        self.z = family.aux_z if z is None else z
        self.w = family.aux_w if w is None else w
        self.c = family.leaf_constant()

    def S(self, x, y):
        return self.family.S(x, y)

    def f1(self, x):
        return self.S(x, self.c)

    def f2(self, x, y):
        return self.S(x, self.f1(y))

    def f3(self, x, z=None):
        z = self.z if z is None else z
        return self.f2(z, self.S(z, x))

    def f4(self, x, y):
        return self.S(self.f3(x), self.f1(y))

    def f5(self, x):
        return self.f4(self.f4(self.w, x), self.w)

    def f6(self, x, y):
        return self.f4(x, self.f5(y))

    def step(self, k: int) -> Callable:
        return getattr(self, f"f{k}")

    def reference(self, k: int) -> Callable:
        fam = self.family
        ext = fam.extended
        return {
            1: lambda x: fam.f(x, ext),
            2: lambda x, y: fam.M(fam.f(x, ext), y, ext),
            3: lambda x: fam.g(x, ext),
            4: lambda x, y: fam.M(x, y, ext),
            5: lambda x: fam.iota(x),
            6: lambda x, y: fam.boxplus(x, y),
        }[k]

    def tree_env(self, **args):
        return {"z": self.z, "w": self.w, **args}


@dataclass
class ChainStep:
    k: int
    name: str
    statement: str
    arity: int
    tree: Tree
    evaluator: Callable
    reference: Callable
    result: Optional[CheckResult] = None
    verdict: str = "unchecked"

    @property
    def polish(self) -> str:
        return print_polish(self.tree)

    @property
    def size(self) -> int:
        return size(self.tree)

    def to_dict(self):
        r = self.result
        return {
            "step": self.k,
            "name": self.name,
            "statement": self.statement,
            "arity": self.arity,
            "polish": self.polish,
            "size": self.size,
            "pure_tree": self.k in (1, 2, 3),
            "samples_tested": r.samples_tested if r else 0,
            "skipped": r.skipped if r else 0,
            "max_abs_error": r.max_abs_error if r else None,
            "max_scaled_error": r.max_scaled_error if r else None,
            "worst_witness": list(r.worst_witness) if r and r.worst_witness else None,
            "verdict": self.verdict,
        }


@dataclass
class DerivationChain:
    family: str
    aux_z: float
    aux_w: float
    steps: list[ChainStep] = field(default_factory=list)
    closures: Optional[Steps] = None

    def __getitem__(self, k: int) -> ChainStep:
        return self.steps[k - 1]

    @property
    def verdict(self) -> str:
        vs = {s.verdict for s in self.steps}
        if "fail" in vs:
            return "fail"
        if "inconclusive" in vs or "unchecked" in vs:
            return "inconclusive"
        return "pass"

    def to_dict(self):
        return {"aux_z": self.aux_z, "aux_w": self.aux_w, "verdict": self.verdict,
                "steps": [s.to_dict() for s in self.steps]}


def build_chain(family: OperatorFamily, n: int = CHAIN_N, seed: int = 42, tol: float = DEFAULT_TOL,
                min_samples: int = CHAIN_MIN_SAMPLES, verify: bool = True,
                strict: bool = False, z: Optional[float] = None,
                w: Optional[float] = None) -> DerivationChain:
    """Construct f1..f6 for ``family`` and verify each against its reference.

    Verification samples the family's domain until ``n`` points where both
    sides are valid are found (bounded); fewer than ``min_samples`` gives an
    inconclusive step.  With ``strict`` a failing step raises ``ChainBroken``.
    """
    closures = Steps(family, z, w)
    chain = DerivationChain(family.name, closures.z, closures.w, closures=closures)
    for k in range(1, 7):
        name, statement, arity = STEP_INFO[k]
        step = ChainStep(k, name, statement, arity, CHAIN_TREES[k], closures.step(k),
                         closures.reference(k))
        if verify:
            step.result = compare(step.evaluator, step.reference, family.sample_domain, arity,
                                  n, seed + k)
            step.verdict = step.result.verdict(tol, min_samples, scaled=True)
            if strict and step.verdict == "fail":
                raise ChainBroken(k, step.result.worst_witness)
        chain.steps.append(step)
    return chain


def evaluate_step_tree(chain: DerivationChain, k: int, family: OperatorFamily, *args):
    """Evaluate the inlined tree of step ``k`` (same numbers as the closure)."""
    names = ("x", "y")[: len(args)]
    env = chain.closures.tree_env(**dict(zip(names, args)))
    return evaluate(chain[k].tree, family, env)


@dataclass(frozen=True)
class Verdict:
    verdict: str
    samples_tested: int
    skipped: int
    max_abs_error: float
    worst_witness: Optional[tuple]

    def to_dict(self):
        return {"verdict": self.verdict, "samples_tested": self.samples_tested,
                "skipped": self.skipped, "max_abs_error": self.max_abs_error,
                "worst_witness": list(self.worst_witness) if self.worst_witness else None}


def chain_z_independence(family: OperatorFamily, chain: Optional[DerivationChain] = None,
                         z_values=None, n: int = 32, seed: int = 42, tol: float = DEFAULT_TOL,
                         min_samples: int = 1) -> Verdict:
    """Step 3 must not depend on its auxiliary ``z``.

    Samples ``x`` where every ``z`` choice is valid and compares each against
    the first choice.
    """
    z_values = list(family.z_values if z_values is None else z_values)
    closures = chain.closures if chain is not None else Steps(family)
    if len(z_values) < 2:
        return Verdict("pass", 0, 0, 0.0, None)
    first = z_values[0]

    def spread(x):
        base = closures.f3(x, first)
        worst = np.zeros_like(base)
        for zv in z_values[1:]:
            other = closures.f3(x, zv)
            worst = np.maximum(worst, np.abs(other - base) / (1.0 + np.abs(base)))
        return worst

    res = compare(spread, lambda x: np.zeros_like(x), family.sample_domain, 1, n, seed)
    verdict = res.verdict(tol, min_samples, scaled=False)
    return Verdict(verdict, res.samples_tested, res.skipped, res.max_abs_error, res.worst_witness)


# -- transport ---------------------------------------------------------------

def build_transport(family: OperatorFamily, chain: Optional[DerivationChain] = None) -> Callable:
    """``F(x, y)`` assembled from chain steps, per the family's transport kind.

    group:    f(g(x) + g(y))
    product:  f(g(x) + g(y)) + f(g(x) - g(y))           (cosine product law)
    tangent:  g(f(x) - (c - f(y)))  = tan(arctan x + arctan y)
    """
    tr = family.transport
    if tr is None:
        raise NoAdditionFormula(family.name)
    s = chain.closures if chain is not None else Steps(family)
    c = s.c
    if tr.kind == "group":
        return lambda x, y: s.f1(s.f6(s.f3(x), s.f3(y)))
    if tr.kind == "product":
        def product(x, y):
            a, b = s.f3(x), s.f3(y)
            return s.f6(s.f1(s.f6(a, b)), s.f1(s.f4(a, b)))
        return product
    if tr.kind == "tangent":
        return lambda x, y: s.f3(s.f4(s.f1(x), s.f4(c, s.f1(y))))
    raise NoAdditionFormula(f"{family.name}: unknown transport kind {tr.kind!r}")


def verify_transport(family: OperatorFamily, chain: Optional[DerivationChain] = None,
                     n: int = 64, seed: int = 42, tol: float = DEFAULT_TOL,
                     min_samples: int = IDENTITY_MIN_SAMPLES) -> Verdict:
    F = build_transport(family, chain)
    res = compare(F, family.transport.reference, family.transport.domain, 2, n, seed)
    return Verdict(res.verdict(tol, min_samples, scaled=True), res.samples_tested, res.skipped,
                   res.max_abs_error, res.worst_witness)


# -- identities ------------------------------------------------------------------

@dataclass(frozen=True)
class Identity:
    id: str
    family: str
    statement: str
    arity: int
    lhs: Callable  # (family, *args) -> array
    rhs: Callable
    domain: object = None  # None -> family sample domain
    extra_points: tuple = ()


@dataclass(frozen=True)
class IdentityCheck:
    id: str
    family: str
    statement: str
    samples: int
    skipped: int
    max_abs_error: float
    verdict: str
    worst_witness: Optional[tuple] = None

    def to_dict(self):
        return {"id": self.id, "family": self.family, "statement": self.statement,
                "samples": self.samples, "skipped": self.skipped,
                "max_abs_error": self.max_abs_error, "verdict": self.verdict,
                "worst_witness": list(self.worst_witness) if self.worst_witness else None}


def _mul(fam, a, b):
    return fam.f(fam.boxplus(fam.g(a), fam.g(b)))


def _tan(fam, u):
    # tan(u) = cot(pi/2 - u)
    return fam.g(fam.M(fam.c, u))


def _chebyshev(n: int, x):
    t_prev, t = np.ones_like(x), x
    if n == 0:
        return t_prev
    for _ in range(n - 1):
        t_prev, t = t, 2.0 * x * t - t_prev
    return t


def _fold_plus(fam, a, n: int):
    acc = a
    for _ in range(n - 1):
        acc = fam.boxplus(acc, a)
    return acc


def _chebyshev_identity(n: int) -> Identity:
    return Identity(
        f"cos.chebyshev.{n}", "COS", f"cos({n} z) = T_{n}(cos z)", 1,
        lambda fam, x: fam.f(_fold_plus(fam, fam.g(x), n)),
        lambda fam, x: _chebyshev(n, x),
        domain=(-1.0, 1.0))


def identity_registry() -> dict[str, Identity]:
    ids = [
        Identity("eml.mul", "EML", "exp(ln x + ln y) = x y", 2,
                 lambda fam, x, y: _mul(fam, x, y), lambda fam, x, y: x * y),
        Identity("eml.pow", "EML", "exp(y ln x) = x^y", 2,
                 lambda fam, x, y: fam.f(_mul(fam, y, fam.g(x))), lambda fam, x, y: x ** y),
        Identity("cos.half_pi", "COS", "arccos(0) = pi/2", 0,
                 lambda fam: fam.g(fam.e), lambda fam: np.float64(math.pi / 2)),
        Identity("cos.sine_shift", "COS", "cos(pi/2 - x) = sin(x)", 1,
                 lambda fam, x: fam.f(fam.M(fam.g(fam.e), x)), lambda fam, x: np.sin(x)),
        Identity("cos.product_law", "COS", "cos(a+b) + cos(a-b) = 2 cos(a) cos(b)", 2,
                 lambda fam, a, b: fam.boxplus(fam.f(fam.boxplus(a, b)), fam.f(fam.M(a, b))),
                 lambda fam, a, b: 2.0 * np.cos(a) * np.cos(b)),
        Identity("cos.chebyshev", "COS", "cos(n z) = T_n(cos z), n = 2..5", 1, None, None),
        Identity("cot.reciprocal", "ACOT", "1/x = cot(arctan x)", 1,
                 lambda fam, x: fam.g(fam.M(fam.c, fam.f(x))), lambda fam, x: 1.0 / x),
        Identity("cot.addition", "ACOT", "tan(a+b) = (tan a + tan b)/(1 - tan a tan b)", 2,
                 lambda fam, a, b: _tan(fam, fam.boxplus(a, b)),
                 lambda fam, a, b: (np.tan(a) + np.tan(b)) / (1.0 - np.tan(a) * np.tan(b)),
                 domain=(-0.7, 0.7)),
        Identity("invol.self_inverse", "INVOL", "f(f(x)) = x", 1,
                 lambda fam, x: fam.f(fam.f(x)), lambda fam, x: x,
                 extra_points=((0.0,), (1e-12,), (-1e-12,), (5e-324,))),
        Identity("invol.product", "INVOL", "t s = f(f(s) + f(t)) - t - s on (-1, 0)^2", 2,
                 lambda fam, s, t: fam.M(fam.M(fam.f(fam.boxplus(fam.f(s), fam.f(t))), t), s),
                 lambda fam, s, t: t * s, domain=(-0.99, -0.01)),
        Identity("invol.quotient", "INVOL", "f(f(s + t) - f(t)) = s/(t + 1)", 2,
                 lambda fam, s, t: fam.f(fam.M(fam.f(fam.boxplus(s, t)), fam.f(t))),
                 lambda fam, s, t: s / (t + 1.0), domain=(-0.99, -0.01)),
    ]
    return {i.id: i for i in ids}


IDENTITIES = identity_registry()


def identities_for(family: OperatorFamily) -> list[str]:
    return [i for i in family.identities if i in IDENTITIES]


def verify_identity(family: OperatorFamily, id: str, n: int = 64, seed: int = 42,
                    tol: float = DEFAULT_TOL, min_samples: int = IDENTITY_MIN_SAMPLES) -> IdentityCheck:
    if id not in IDENTITIES:
        raise UnknownIdentity(id)
    ident = IDENTITIES[id]
    if ident.family != family.name:
        raise UnknownIdentity(f"{id} is not registered for {family.name}")
    if id == "cos.chebyshev":
        parts = [verify_identity_obj(family, _chebyshev_identity(k), n, seed + k, tol, min_samples)
                 for k in range(2, 6)]
        worst = max(parts, key=lambda p: p.max_abs_error)
        verdicts = {p.verdict for p in parts}
        verdict = "fail" if "fail" in verdicts else "inconclusive" if "inconclusive" in verdicts else "pass"
        return IdentityCheck(id, family.name, ident.statement, min(p.samples for p in parts),
                             sum(p.skipped for p in parts), worst.max_abs_error, verdict,
                             worst.worst_witness)
    return verify_identity_obj(family, ident, n, seed, tol, min_samples)


def verify_identity_obj(family, ident: Identity, n, seed, tol, min_samples) -> IdentityCheck:
    if ident.arity == 0:
        lhs = float(ident.lhs(family))
        rhs = float(ident.rhs(family))
        ok = math.isfinite(lhs) and math.isfinite(rhs)
        err = abs(lhs - rhs) if ok else math.nan
        # a constant identity is held to 1e-12 absolute (or tighter tol)
        limit = min(tol, 1e-12)
        verdict = "inconclusive" if not ok else ("pass" if err <= limit else "fail")
        return IdentityCheck(ident.id, family.name, ident.statement, int(ok), int(not ok),
                             err, verdict, ())
    domain = family.sample_domain if ident.domain is None else ident.domain
    with np.errstate(all="ignore"):
        res = compare(lambda *a: ident.lhs(family, *a), lambda *a: ident.rhs(family, *a),
                      domain, ident.arity, n, seed, extra_points=ident.extra_points)
    return IdentityCheck(ident.id, family.name, ident.statement, res.samples_tested, res.skipped,
                         res.max_abs_error, res.verdict(tol, min_samples, scaled=True),
                         res.worst_witness)


# -- ternary combinator ---------------------------------------------------------

def ternary_B(S1: Callable, S2: Callable) -> Callable:
    """``B(x, y, z) = (y-z)/(x-z) S1(x, z) + (x-y)/(x-z) S2(x, z)``.

    A term whose coefficient is exactly zero is dropped, so ``B(x, x, z)``
    is exactly ``S1(x, z)`` even where ``S2`` is Invalid.  ``x == z`` is
    degenerate and gives Invalid.
    """
    def B(x, y, z):
        x, y, z = (np.asarray(v, dtype=float) for v in (x, y, z))
        with np.errstate(all="ignore"):
            d = x - z
            a = (y - z) / d
            b = (x - y) / d
            t1 = np.where(a == 0, 0.0, a * np.asarray(S1(x, z), dtype=float))
            t2 = np.where(b == 0, 0.0, b * np.asarray(S2(x, z), dtype=float))
            out = np.where(d == 0, np.nan, t1 + t2)
        return float(out) if out.ndim == 0 else out
    return B
