"""Expression trees over the single binary operator ``S``.

A tree is built from three node kinds: ``Op(left, right)`` (one application
of the family operator), ``Var(name)`` and ``Const`` (the family constant).
Trees are serialized in Polish (prefix) notation, which is also the measure
of their size: ``S z S S z x c`` has 7 tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

import numpy as np

OP_TOKEN = "S"
CONST_TOKEN = "c"
_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ParseError(ValueError):
    """Base class for Polish-notation syntax errors."""


class TruncatedInput(ParseError):
    pass


class TrailingTokens(ParseError):
    pass


class BadToken(ParseError):
    pass


class UnboundVariable(KeyError):
    pass


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not _IDENT.match(self.name) or self.name in (OP_TOKEN, CONST_TOKEN):
            raise BadToken(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class Const:
    pass


@dataclass(frozen=True)
class Op:
    left: "Tree"
    right: "Tree"


Tree = Union[Op, Var, Const]

CONST = Const()


def tokens(tree: Tree) -> Iterator[str]:
    """Preorder token stream of ``tree`` (iterative, so deep trees are fine)."""
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Op):
            yield OP_TOKEN
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Var):
            yield node.name
        else:
            yield CONST_TOKEN


def print_polish(tree: Tree) -> str:
    return " ".join(tokens(tree))


def parse_polish(text: str) -> Tree:
    """Parse a whitespace-separated prefix token stream into a tree.

    ``S`` is the operator, ``c`` the family constant, anything else that is
    an identifier is a variable.
    """
    toks = text.split()
    if not toks:
        raise TruncatedInput("empty input")
    pos = 0

    # Explicit stack of partially built Op nodes: [left or None].
    pending: list[list] = []
    result = None
    while True:
        if pos >= len(toks):
            raise TruncatedInput(f"input ends after {pos} tokens, tree incomplete")
        tok = toks[pos]
        pos += 1
        if tok == OP_TOKEN:
            pending.append([None])
            continue
        if tok == CONST_TOKEN:
            node: Tree = CONST
        elif _IDENT.match(tok):
            node = Var(tok)
        else:
            raise BadToken(f"bad token {tok!r} at position {pos - 1}")
        # close finished Op nodes
        while pending:
            slot = pending[-1]
            if slot[0] is None:
                slot[0] = node
                break
            pending.pop()
            node = Op(slot[0], node)
        else:
            result = node
        if result is not None:
            break
    if pos != len(toks):
        raise TrailingTokens(f"{len(toks) - pos} token(s) after complete tree: {' '.join(toks[pos:])!r}")
    return result


def size(tree: Tree) -> int:
    return sum(1 for _ in tokens(tree))


def n_ops(tree: Tree) -> int:
    return sum(1 for t in tokens(tree) if t == OP_TOKEN)


def n_leaves(tree: Tree) -> int:
    return sum(1 for t in tokens(tree) if t != OP_TOKEN)


def variables(tree: Tree) -> set[str]:
    return {t for t in tokens(tree) if t not in (OP_TOKEN, CONST_TOKEN)}


def substitute(tree: Tree, mapping: Mapping[str, Tree]) -> Tree:
    """Replace variables by trees (simultaneously)."""
    if isinstance(tree, Op):
        return Op(substitute(tree.left, mapping), substitute(tree.right, mapping))
    if isinstance(tree, Var):
        return mapping.get(tree.name, tree)
    return tree


def to_infix(tree: Tree) -> str:
    """Pretty-print as nested ``S(a, b)``; display only, never parsed."""
    if isinstance(tree, Op):
        return f"S({to_infix(tree.left)}, {to_infix(tree.right)})"
    if isinstance(tree, Var):
        return tree.name
    return CONST_TOKEN


def evaluate(tree: Tree, family, env: Mapping[str, object]):
    """Evaluate bottom-up: ``Op(a, b)`` -> ``family.S(eval a, eval b)``.

    ``env`` values may be floats or numpy arrays (evaluated elementwise).
    Invalid results are NaN.  Returns a float when every input is scalar.
    """
    scalar = all(np.ndim(v) == 0 for v in env.values())
    cache: dict[int, np.ndarray] = {}

    def walk(node):
        if isinstance(node, Var):
            try:
                return np.asarray(env[node.name], dtype=float)
            except KeyError:
                raise UnboundVariable(node.name) from None
        if isinstance(node, Const):
            return np.asarray(family.leaf_constant(), dtype=float)
        key = id(node)
        if key not in cache:
            cache[key] = family.S(walk(node.left), walk(node.right))
        return cache[key]

    out = walk(tree)
    return float(out) if scalar else out
