"""Independent scalar reference implementations used to freeze test values.

Nothing here imports the package: every function uses the ``math`` module
directly so that tests compare two unrelated code paths.
"""

import math

NAN = float("nan")


def _safe(fn, *args):
    try:
        v = fn(*args)
    except (ValueError, ZeroDivisionError, OverflowError):
        return NAN
    return v if math.isfinite(v) else NAN


def acot(x):
    return math.pi / 2 - math.atan(x)


def cot(y):
    if not 0 < y < math.pi:
        return NAN
    return math.cos(y) / math.sin(y)


def invol(x):
    if x >= 0:
        return math.exp(-x) - 1
    if x > -1:
        return -math.log(x + 1)
    return NAN


# family name -> (f, g, M, c)
FAMILIES = {
    "EML": (math.exp, math.log, lambda a, b: a - b, 1.0),
    "EDL": (math.exp, math.log, lambda a, b: a / b, math.e),
    "COS": (lambda x: math.cos(x) if 0 <= x <= math.pi else NAN,
            math.acos, lambda a, b: a - b, 1.0),
    "COS2": (lambda x: 2 * math.cos(x) if 0 <= x <= math.pi else NAN,
             lambda u: math.acos(u / 2), lambda a, b: a - b, 2.0),
    "ACOT": (acot, cot, lambda a, b: a - b, math.pi / 2),
    "TANH": (math.tanh, math.atanh, lambda a, b: a - b, 0.0),
    "INVOL": (invol, invol, lambda a, b: a - b, 0.0),
}


def S(family, x, y):
    f, g, M, _ = FAMILIES[family]
    if math.isnan(x) or math.isnan(y):
        return NAN
    a = _safe(f, x)
    b = _safe(g, y)
    if math.isnan(a) or math.isnan(b):
        return NAN
    return _safe(M, a, b)


def eval_polish(family, text, env):
    """Recursive-descent evaluation of a Polish string (separate from the package parser)."""
    toks = text.split()
    pos = 0
    c = FAMILIES[family][3]

    def rec():
        nonlocal pos
        t = toks[pos]
        pos += 1
        if t == "S":
            left = rec()
            right = rec()
            return S(family, left, right)
        if t == "c":
            return c
        return env[t]

    v = rec()
    assert pos == len(toks)
    return v


def all_trees(leaves, size):
    """Every Polish string with exactly ``size`` tokens, by naive recursion."""
    if size == 1:
        return list(leaves)
    out = []
    for ls in range(1, size - 1, 2):
        for a in all_trees(leaves, ls):
            for b in all_trees(leaves, size - 1 - ls):
                out.append(f"S {a} {b}")
    return out


def polish_key(text, leaves):
    order = {"S": 0, **{n: i + 1 for i, n in enumerate(leaves)}}
    return [order[t] for t in text.split()]


def catalan(n):
    # recurrence, not the closed form
    c = [1]
    for m in range(1, n + 1):
        c.append(sum(c[i] * c[m - 1 - i] for i in range(m)))
    return c[n]


def chebyshev(n, x):
    t0, t1 = 1.0, x
    if n == 0:
        return t0
    for _ in range(n - 1):
        t0, t1 = t1, 2 * x * t1 - t0
    return t1
