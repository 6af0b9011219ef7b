"""Operator families ``S(x, y) = M(f(x), g(y))`` with ``g`` the inverse of ``f``.

Every primitive is domain guarded: an argument outside the admissible
domain (for ``f`` that is the branch on which it is invertible) yields NaN,
which is how Invalid is represented throughout the package.  NaN propagates,
so one bad intermediate invalidates the whole tree.

With ``extended=True`` a family additionally admits the three rules

    exp(-inf) = 0,   ln(0) = -inf,   a - (-inf) = +inf   (a finite)

and nothing else involving infinities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Optional

import numpy as np

INVALID = math.nan
DEFAULT_TOL = 1e-9


class ConjugationInvalid(ValueError):
    pass


class UnknownFamily(KeyError):
    pass


def is_invalid(v) -> bool:
    return bool(np.isnan(v))


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    lo_closed: bool = True
    hi_closed: bool = True

    def contains(self, x):
        x = np.asarray(x, dtype=float)
        lo_ok = x >= self.lo if self.lo_closed else x > self.lo
        hi_ok = x <= self.hi if self.hi_closed else x < self.hi
        return lo_ok & hi_ok

    def __str__(self):
        return f"{'[' if self.lo_closed else '('}{self.lo:g}, {self.hi:g}{']' if self.hi_closed else ')'}"


REALS = Interval(-math.inf, math.inf, False, False)
POSITIVE = Interval(0.0, math.inf, False, False)
NONNEGATIVE = Interval(0.0, math.inf, True, False)


class Unary:
    """A guarded elementwise function.

    ``specials`` are (input, output) pairs honoured only in extended mode.
    """

    def __init__(self, name: str, fn: Callable, domain: Interval = REALS, specials=()):
        self.name = name
        self.fn = fn
        self.domain = domain
        self.specials = tuple(specials)

    def __call__(self, x, extended: bool = False):
        x = np.asarray(x, dtype=float)
        ok = np.isfinite(x) & self.domain.contains(x)
        with np.errstate(all="ignore"):
            out = np.asarray(self.fn(np.where(ok, x, self._probe())), dtype=float)
        out = np.where(ok & np.isfinite(out), out, np.nan)
        if extended:
            for arg, value in self.specials:
                out = np.where(x == arg, value, out)
        return out

    def _probe(self):
        # an in-domain stand-in for masked arguments, keeps the ufunc quiet
        lo, hi = self.domain.lo, self.domain.hi
        if math.isinf(lo) and math.isinf(hi):
            return 0.0
        if math.isinf(hi):
            return lo + 1.0
        if math.isinf(lo):
            return hi - 1.0
        return 0.5 * (lo + hi)

    def __repr__(self):
        return f"Unary({self.name})"


class Binary:
    """A guarded elementwise binary operation (the family's M)."""

    def __init__(self, name: str, fn: Callable, valid: Optional[Callable] = None,
                 minus_neg_inf: bool = False):
        self.name = name
        self.fn = fn
        self.valid = valid
        # the a - (-inf) = +inf rule; only meaningful for subtraction
        self.minus_neg_inf = minus_neg_inf

    def __call__(self, a, b, extended: bool = False):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        ok = np.isfinite(a) & np.isfinite(b)
        if self.valid is not None:
            with np.errstate(all="ignore"):
                ok = ok & self.valid(a, b)
        with np.errstate(all="ignore"):
            out = np.asarray(self.fn(np.where(ok, a, 1.0), np.where(ok, b, 1.0)), dtype=float)
        out = np.where(ok & np.isfinite(out), out, np.nan)
        if extended and self.minus_neg_inf:
            out = np.where(np.isfinite(a) & (b == -math.inf), math.inf, out)
        return out

    def __repr__(self):
        return f"Binary({self.name})"


# -- primitive catalogue ----------------------------------------------------

EXP = Unary("exp", np.exp, REALS, specials=[(-math.inf, 0.0)])
LN = Unary("ln", np.log, POSITIVE, specials=[(0.0, -math.inf)])
COS = Unary("cos", np.cos, Interval(0.0, math.pi))
ARCCOS = Unary("arccos", np.arccos, Interval(-1.0, 1.0))
COS2 = Unary("2cos", lambda x: 2.0 * np.cos(x), Interval(0.0, math.pi))
ARCCOS_HALF = Unary("arccos_half", lambda u: np.arccos(0.5 * u), Interval(-2.0, 2.0))
# arccot: R -> (0, pi), arccot(x) = pi/2 - arctan(x); cot(y) = tan(pi/2 - y) keeps
# cot(arccot(x)) == x up to rounding and cot(pi/2) == 0 exactly
ARCCOT = Unary("arccot", lambda x: 0.5 * np.pi - np.arctan(x), REALS)
COT = Unary("cot", lambda y: np.tan(0.5 * np.pi - y), Interval(0.0, math.pi, False, False))
TANH = Unary("tanh", np.tanh, REALS)
ARTANH = Unary("artanh", np.arctanh, Interval(-1.0, 1.0, False, False))


def _invol(x):
    return np.where(x >= 0, np.expm1(-x), -np.log1p(x))


INVOL = Unary("invol", _invol, Interval(-1.0, math.inf, False, False))

SUB = Binary("sub", np.subtract, minus_neg_inf=True)
DIV = Binary("div", np.divide, valid=lambda a, b: b != 0)
ADD = Binary("add", np.add)
MUL = Binary("mul", np.multiply)


@dataclass(frozen=True)
class Transport:
    """How a family turns its group law into a new binary operation.

    ``kind`` selects the composition of chain steps (see ``derive``),
    ``reference`` is the expected law, ``domain`` the sampling box.
    """

    kind: str
    law: str
    reference: Callable
    domain: Interval


@dataclass(frozen=True)
class OperatorFamily:
    name: str
    f: Unary
    g: Unary
    M: Binary
    e: float
    c: float
    sample_domain: Interval
    extended: bool = False
    # auxiliary values for the free variables of the derivation chain
    aux_z: float = 1.0
    aux_w: float = 1.0
    z_values: tuple = ()
    transport: Optional[Transport] = None
    identities: tuple = ()
    description: str = ""

    def leaf_constant(self):
        if math.isinf(self.c) and not self.extended:
            return INVALID
        return self.c

    def S(self, x, y):
        return self.M(self.f(x, self.extended), self.g(y, self.extended), self.extended)

    def iota(self, a):
        return self.M(self.e, a, self.extended)

    def boxplus(self, a, b):
        return self.M(a, self.M(self.e, b, self.extended), self.extended)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "f": self.f.name,
            "g": self.g.name,
            "M": self.M.name,
            "e": self.e,
            "c": self.c,
            "sample_domain": str(self.sample_domain),
            "extended": self.extended,
            "transport": self.transport.law if self.transport else None,
            "identities": list(self.identities),
        }


def eval_S(family: OperatorFamily, x, y):
    """``M(f(x), g(y))`` with the family's guards; scalars in, float out."""
    out = family.S(x, y)
    return float(out) if np.ndim(out) == 0 else out


# -- conjugation of subtraction ---------------------------------------------

PHI_CATALOGUE: dict[str, tuple[Unary, Unary, Interval]] = {
    "ln": (LN, EXP, POSITIVE),
    "square": (Unary("square", np.square, NONNEGATIVE), Unary("sqrt", np.sqrt, NONNEGATIVE), NONNEGATIVE),
    "identity": (Unary("id", lambda x: x), Unary("id", lambda x: x), REALS),
    "exp": (EXP, LN, REALS),
}


class ConjugatedOp(Binary):
    def __init__(self, name, phi: Unary, phi_inv: Unary):
        self.phi = phi
        self.phi_inv = phi_inv
        super().__init__(name, None)
        self.neutral = float(phi_inv(0.0, extended=True))
        # an infinite neutral element (phi = exp) needs the extended rules
        self._ext = math.isinf(self.neutral)

    def __call__(self, a, b, extended: bool = False):
        ext = extended or self._ext
        return self.phi_inv(SUB(self.phi(a, ext), self.phi(b, ext), ext), ext)


def make_conjugated(phi, phi_inv, base_domain: Interval, n: int = 64, seed: int = 0,
                    tol: float = DEFAULT_TOL, name: Optional[str] = None) -> ConjugatedOp:
    """``M(u, w) = phi_inv(phi(u) - phi(w))``; its neutral element is ``phi_inv(0)``.

    ``phi``/``phi_inv`` may be catalogue names or ``Unary`` objects.  The
    round trip ``phi_inv(phi(u)) == u`` is sampled on ``base_domain`` first.
    """
    if isinstance(phi, str):
        phi_name = phi
        phi, phi_inv, default = PHI_CATALOGUE[phi]
        base_domain = base_domain or default
    else:
        phi_name = getattr(phi, "name", "phi")
        phi = phi if isinstance(phi, Unary) else Unary(phi_name, phi)
        phi_inv = phi_inv if isinstance(phi_inv, Unary) else Unary(phi_name + "^-1", phi_inv)
    lo = max(base_domain.lo, -50.0)
    hi = min(base_domain.hi, 50.0)
    u = np.random.default_rng(seed).uniform(lo, hi, n)
    u = u[base_domain.contains(u)]
    back = phi_inv(phi(u))
    err = np.abs(back - u) / (1.0 + np.abs(u))
    if u.size == 0 or not np.all(np.isfinite(back)) or np.max(err) > tol:
        bad = int(np.nanargmax(np.where(np.isfinite(err), err, np.inf))) if u.size else 0
        raise ConjugationInvalid(
            f"phi_inv(phi(u)) != u on {base_domain}" + (f", e.g. u={u[bad]!r}" if u.size else ""))
    return ConjugatedOp(name or f"conj[{phi_name}]", phi, phi_inv)


# -- registry ---------------------------------------------------------------

def _velocity(x, y):
    return (x + y) / (1.0 + x * y)


def _tan_law(x, y):
    return (x + y) / (1.0 - x * y)


def _builtin() -> dict[str, OperatorFamily]:
    half_pi = 0.5 * math.pi
    fams = [
        OperatorFamily(
            "EML", EXP, LN, SUB, e=0.0, c=1.0, sample_domain=Interval(0.1, 3.0),
            aux_z=1.0, aux_w=3.0, z_values=(0.5, 1.0, 2.0),
            transport=Transport("group", "x*y", np.multiply, Interval(0.1, 3.0)),
            identities=("eml.mul", "eml.pow"),
            description="exp(x) - ln(y)"),
        OperatorFamily(
            "EDL", EXP, LN, DIV, e=1.0, c=math.e, sample_domain=Interval(0.1, 3.0),
            aux_z=1.0, aux_w=2.0, z_values=(0.5, 1.0, 2.0),
            description="exp(x) / ln(y)"),
        OperatorFamily(
            "LEXP", LN, EXP, SUB, e=0.0, c=-math.inf, sample_domain=Interval(0.1, 2.0),
            extended=True, aux_z=1e4, aux_w=1.0, z_values=(1e4, 1e5, 1e6),
            description="ln(x) - exp(y)"),
        OperatorFamily(
            "COS", COS, ARCCOS, SUB, e=0.0, c=1.0, sample_domain=Interval(0.1, 1.4),
            aux_z=0.1, aux_w=1.0, z_values=(0.1, 0.2, 0.3),
            transport=Transport("product", "2*x*y", lambda x, y: 2.0 * x * y, Interval(0.1, 1.0)),
            identities=("cos.half_pi", "cos.sine_shift", "cos.product_law", "cos.chebyshev"),
            description="cos(x) - arccos(y)"),
        OperatorFamily(
            "COS2", COS2, ARCCOS_HALF, SUB, e=0.0, c=2.0, sample_domain=Interval(0.1, 1.4),
            aux_z=0.1, aux_w=1.4, z_values=(0.1, 0.3, 0.5),
            transport=Transport("product", "x*y", np.multiply, Interval(0.1, 1.4)),
            description="2cos(x) - arccos(y/2)"),
        OperatorFamily(
            "ACOT", ARCCOT, COT, SUB, e=0.0, c=half_pi, sample_domain=Interval(0.2, 1.3),
            aux_z=0.7, aux_w=1.5, z_values=(0.3, 0.7, 1.1),
            transport=Transport("tangent", "(x+y)/(1-x*y)", _tan_law, Interval(-0.5, 0.5, False, False)),
            identities=("cot.reciprocal", "cot.addition"),
            description="arccot(x) - cot(y)"),
        OperatorFamily(
            "TANH", TANH, ARTANH, SUB, e=0.0, c=0.0, sample_domain=Interval(-0.9, 0.9),
            aux_z=0.3, aux_w=0.0, z_values=(-0.5, 0.3, 0.8),
            transport=Transport("group", "(x+y)/(1+x*y)", _velocity, Interval(-0.5, 0.5, False, False)),
            description="tanh(x) - artanh(y)"),
        OperatorFamily(
            "INVOL", INVOL, INVOL, SUB, e=0.0, c=0.0, sample_domain=Interval(-0.9, 2.0, False, False),
            aux_z=-0.9, aux_w=1.2, z_values=(-0.9, -0.5, 0.0),
            transport=Transport("group", "x*y+x+y", lambda t, s: t * s + t + s,
                                Interval(-0.95, -0.05)),
            identities=("invol.self_inverse", "invol.product", "invol.quotient"),
            description="f(x) - f(y), f = f^-1 piecewise"),
    ]
    return {fam.name: fam for fam in fams}


_BUILTIN = _builtin()


class FamilyRegistry(Mapping):
    """Name -> family map; built-ins plus user conjugated families."""

    def __init__(self, families: Mapping[str, OperatorFamily]):
        self._families = dict(families)

    def __getitem__(self, name):
        try:
            return self._families[name]
        except KeyError:
            raise UnknownFamily(name) from None

    def __iter__(self):
        return iter(self._families)

    def __len__(self):
        return len(self._families)

    def with_family(self, fam: OperatorFamily) -> "FamilyRegistry":
        if fam.name in self._families:
            raise ValueError(f"family {fam.name!r} already registered")
        return FamilyRegistry({**self._families, fam.name: fam})


def builtin_families() -> FamilyRegistry:
    return FamilyRegistry(_BUILTIN)


CORE_CATALOGUE: dict[str, tuple[Unary, Unary]] = {
    "exp": (EXP, LN),
    "ln": (LN, EXP),
    "tanh": (TANH, ARTANH),
    "arccot": (ARCCOT, COT),
}


def conjugated_family(name: str, phi: str, domain_lo: float, domain_hi: float,
                      core: str = "exp") -> OperatorFamily:
    """A family whose M is the phi-conjugate of subtraction.

    The seed constant is derived from ``g(c) = e``, i.e. ``c = f(e)``.
    """
    if phi not in PHI_CATALOGUE:
        raise ValueError(f"unknown phi {phi!r}; choose from {sorted(PHI_CATALOGUE)}")
    if core not in CORE_CATALOGUE:
        raise ValueError(f"unknown core {core!r}; choose from {sorted(CORE_CATALOGUE)}")
    if not domain_lo < domain_hi:
        raise ValueError("domain_lo must be below domain_hi")
    M = make_conjugated(phi, None, None, name=f"conj[{phi}]")
    f, g = CORE_CATALOGUE[core]
    e = M.neutral
    c = float(f(e, extended=True))
    extended = math.isinf(e) or math.isinf(c)
    mid = 0.5 * (domain_lo + domain_hi)
    return OperatorFamily(name, f, g, M, e=e, c=c, sample_domain=Interval(domain_lo, domain_hi),
                          extended=extended, aux_z=mid, aux_w=domain_hi,
                          z_values=(domain_lo, mid, domain_hi),
                          description=f"M = phi^-1(phi(u) - phi(w)), phi = {phi}, f = {core}")


def load_config(path, registry: Optional[FamilyRegistry] = None) -> FamilyRegistry:
    """Add user families from a JSON config.

    The file holds either one object or a list (or ``{"families": [...]}``)
    with keys ``name``, ``phi``, ``domain_lo``, ``domain_hi`` and optionally
    ``core``.
    """
    registry = registry or builtin_families()
    with open(path) as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("families", [data])
    for entry in data:
        missing = {"name", "phi", "domain_lo", "domain_hi"} - set(entry)
        if missing:
            raise ValueError(f"config entry missing keys: {sorted(missing)}")
        fam = conjugated_family(entry["name"], entry["phi"], float(entry["domain_lo"]),
                                float(entry["domain_hi"]), entry.get("core", "exp"))
        registry = registry.with_family(fam)
    return registry


def validate_family(family: OperatorFamily, n: int = 64, seed: int = 0,
                    tol: float = DEFAULT_TOL) -> list[str]:
    """Problems found with ``family`` (empty list when it is sound).

    Checks ``g(c) = e`` (as a limit when ``c`` is infinite), the round trips
    ``g(f(x)) = x`` and ``f(g(f(x))) = f(x)`` on the sample domain, and the
    neutral element ``M(x, e) = x``.
    """
    problems = []
    gc = float(family.g(family.c, extended=True))
    if math.isinf(family.c):
        if not family.extended:
            problems.append("infinite constant requires extended arithmetic")
        if gc != family.e:
            problems.append(f"lim g(c) = {gc!r} != e = {family.e!r}")
    elif not abs(gc - family.e) <= tol * (1.0 + abs(family.e)):
        problems.append(f"g(c) = {gc!r} != e = {family.e!r}")
    dom = family.sample_domain
    x = np.random.default_rng(seed).uniform(dom.lo, dom.hi, n)
    x = x[dom.contains(x)]
    fx = family.f(x)
    checks = {
        "g(f(x)) = x": (family.g(fx), x),
        "f(g(f(x))) = f(x)": (family.f(family.g(fx)), fx),
        "M(x, e) = x": (family.M(x, family.e, family.extended), x),
    }
    for label, (got, want) in checks.items():
        err = np.abs(got - want) / (1.0 + np.abs(want))
        if not np.all(np.isfinite(err)) or np.max(err) > tol:
            problems.append(f"{label} fails on the sample domain")
    return problems


def with_domain(family: OperatorFamily, lo: float, hi: float) -> OperatorFamily:
    return replace(family, sample_domain=Interval(lo, hi))
