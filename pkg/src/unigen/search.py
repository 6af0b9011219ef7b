"""Exhaustive search for the smallest S-trees representing a target function.

Trees are generated by increasing size (1, 3, 5, ... tokens).  Within a size
the order is lexicographic on Polish tokens with ``S`` first and the leaves
in their declared order, e.g. for leaves ``(x, c)``::

    x, c, S x x, S x c, S c x, S c c, S x S x x, ...

Search is bottom-up: every candidate of size n is ``S(L, R)`` with L, R
representatives of smaller sizes.  Candidates are fingerprinted and
deduplicated (the lexicographically least tree of each class is kept),
which keeps the frontier small.  Once a size matches, that whole stratum is
rescanned without deduplication so that all minimal witnesses are listed,
and each witness is confirmed at a second, independent seed.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from .expr import CONST, OP_TOKEN, Op, Tree, Var, evaluate, print_polish, tokens
from .family import OperatorFamily
from .fingerprint import (DEFAULT_K, DEFAULT_TOL, _close, _digest, equal,
                          fingerprint_of, sample_points)

MAX_SIZE_GUARD = 13
BLOCK = 2048
SECOND_SEED_OFFSET = 7919

LEAVES = {1: ("x", "c"), 2: ("x", "y", "c")}


class BudgetExceeded(RuntimeError):
    def __init__(self, reason: str, partial: "SearchResult"):
        super().__init__(reason)
        self.partial = partial


class UnknownTarget(KeyError):
    pass


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def stratum_count(n_leaves: int, size: int) -> int:
    """Number of trees with ``size`` tokens over ``n_leaves`` leaf symbols."""
    m = (size - 1) // 2
    return catalan(m) * n_leaves ** (m + 1)


def _leaf(name: str) -> Tree:
    return CONST if name == "c" else Var(name)


def _rank(leaves: Sequence[str]):
    order = {OP_TOKEN: 0, **{name: i + 1 for i, name in enumerate(leaves)}}
    return lambda tree: tuple(order[t] for t in tokens(tree))


def enumerate_trees(leaves: Sequence[str], max_size: int) -> Iterator[Tree]:
    """Every tree with at most ``max_size`` tokens, once, in canonical order."""
    if max_size < 1 or max_size % 2 == 0:
        raise ValueError("max_size must be odd and >= 1")
    strata: dict[int, list[tuple[tuple, Tree]]] = {}
    key = _rank(leaves)
    for n in range(1, max_size + 1, 2):
        if n == 1:
            layer = [(key(t), t) for t in map(_leaf, leaves)]
        else:
            layer = []
            for ls in range(1, n - 1, 2):
                for kl, left in strata[ls]:
                    for kr, right in strata[n - 1 - ls]:
                        layer.append(((0,) + kl + kr, Op(left, right)))
            layer.sort(key=lambda p: p[0])
        strata[n] = layer
        for _, tree in layer:
            yield tree


# -- targets --------------------------------------------------------------------

@dataclass(frozen=True)
class TargetSpec:
    name: str
    arity: int
    reference: Callable
    family: str
    description: str = ""
    aliases: tuple = ()


def register_targets(family: OperatorFamily) -> list[TargetSpec]:
    fam = family
    ext = fam.extended
    out = [TargetSpec(fam.f.name, 1, lambda x: fam.f(x, ext), fam.name, "f", ("f",))]
    if fam.g.name != fam.f.name:
        out.append(TargetSpec(fam.g.name, 1, lambda x: fam.g(x, ext), fam.name, "g = f^-1", ("g",)))
    division = fam.M.name == "div"
    out += [
        TargetSpec("recip" if division else "neg", 1, fam.iota, fam.name, "inverse e (-) x", ("inv",)),
        TargetSpec(fam.M.name, 2, lambda x, y: fam.M(x, y, ext), fam.name, "x (-) y", ("minus",)),
        TargetSpec("mul" if division else "add", 2, fam.boxplus, fam.name, "x (+) y", ("plus",)),
    ]
    if fam.transport is not None:
        law_name = {"x*y": "mul", "(x+y)/(1+x*y)": "velocity", "(x+y)/(1-x*y)": "tan_law",
                    "2*x*y": "double_product", "x*y+x+y": "twisted_product"}.get(
                        fam.transport.law, "law")
        out.append(TargetSpec(law_name, 2, fam.transport.reference, fam.name, fam.transport.law))
    # first definition of a name wins
    seen, uniq = set(), []
    for t in out:
        if t.name not in seen:
            seen.add(t.name)
            uniq.append(t)
    return uniq


def find_target(family: OperatorFamily, name: str) -> TargetSpec:
    for t in register_targets(family):
        if name == t.name or name in t.aliases:
            return t
    raise UnknownTarget(f"{name!r} is not a target of {family.name}; "
                        f"known: {[t.name for t in register_targets(family)]}")


# -- result ---------------------------------------------------------------------

@dataclass
class SearchResult:
    target: str
    family: str
    arity: int
    leaves: tuple
    max_size: int
    seed: int
    k: int
    found: bool = False
    minimal_size: Optional[int] = None
    witnesses: list[str] = field(default_factory=list)
    rejected_witnesses: list[str] = field(default_factory=list)
    trees_enumerated: int = 0
    distinct_fingerprints: int = 0
    strata: list[dict] = field(default_factory=list)
    complete: bool = True
    elapsed: float = 0.0

    def to_dict(self):
        # elapsed is deliberately left out: structured output must be reproducible
        return {
            "target": self.target,
            "arity": self.arity,
            "leaves": list(self.leaves),
            "max_size": self.max_size,
            "k": self.k,
            "found": self.found,
            "complete": self.complete,
            "minimal_size": self.minimal_size,
            "witness_count": len(self.witnesses),
            "witnesses": list(self.witnesses),
            "rejected_witnesses": list(self.rejected_witnesses),
            "trees_enumerated": self.trees_enumerated,
            "distinct_fingerprints": self.distinct_fingerprints,
            "strata": list(self.strata),
        }


# -- engine ---------------------------------------------------------------------

@dataclass
class _Layer:
    keys: list
    trees: list
    values: np.ndarray  # (N, k)


def _leaf_layer(leaves, points, family, key) -> _Layer:
    trees = [_leaf(n) for n in leaves]
    cols = {f"{'xy'[i]}": points[:, i] for i in range(points.shape[1])}
    vals = []
    for t in trees:
        if isinstance(t, Var):
            vals.append(cols[t.name].astype(float))
        else:
            vals.append(np.full(points.shape[0], float(family.leaf_constant())))
    return _Layer([key(t) for t in trees], trees, np.array(vals).reshape(len(trees), -1))


def _pairs(layers: dict[int, _Layer], n: int):
    """Candidate (key, left layer, left idx, right layer, right idx) sorted canonically."""
    out = []
    for ls in range(1, n - 1, 2):
        L, R = layers.get(ls), layers.get(n - 1 - ls)
        if L is None or R is None:
            continue
        for i, kl in enumerate(L.keys):
            for j, kr in enumerate(R.keys):
                out.append(((0,) + kl + kr, ls, i, n - 1 - ls, j))
    out.sort(key=lambda p: p[0])
    return out


def _compute(family, layers, pairs, workers: int) -> np.ndarray:
    """Values of S(L, R) for every pair; fixed blocks so results never depend on workers."""
    if not pairs:
        return np.empty((0, 0))
    k = next(iter(layers.values())).values.shape[1]
    left = np.empty((len(pairs), k))
    right = np.empty((len(pairs), k))
    for row, (_, ls, i, rs, j) in enumerate(pairs):
        left[row] = layers[ls].values[i]
        right[row] = layers[rs].values[j]
    out = np.empty_like(left)
    blocks = [(s, min(s + BLOCK, len(pairs))) for s in range(0, len(pairs), BLOCK)]

    def run(block):
        s, t = block
        out[s:t] = family.S(left[s:t], right[s:t])

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            # stride partition: worker w gets blocks w, w+K, w+2K, ...
            for w in range(workers):
                list(pool.map(run, blocks[w::workers]))
    else:
        for b in blocks:
            run(b)
    return out


def _match_rows(values: np.ndarray, target: np.ndarray, tol: float) -> np.ndarray:
    tmask = ~np.isnan(target)
    masks = ~np.isnan(values)
    same_mask = np.all(masks == tmask, axis=1)
    close = np.all(_close(np.where(tmask, values, 0.0), np.where(tmask, target, 0.0), tol)
                   | ~tmask, axis=1)
    quorum = np.count_nonzero(tmask) >= values.shape[1] / 2
    return same_mask & close & quorum


def _viable(values: np.ndarray, tmask: np.ndarray) -> np.ndarray:
    # Invalid propagates, so a subtree must be valid wherever the target is
    return np.all(~np.isnan(values[:, tmask]), axis=1)


def search_minimal(family: OperatorFamily, target: TargetSpec, max_size: int = 9,
                   k: int = DEFAULT_K, seed: int = 42, workers: int = 1,
                   tol: float = DEFAULT_TOL, max_trees: Optional[int] = None,
                   time_limit: Optional[float] = None, allow_large: bool = False) -> SearchResult:
    """Find all minimal-size trees whose fingerprint equals the target's.

    Raises ``BudgetExceeded`` (carrying the partial result) when ``max_trees``
    candidates or ``time_limit`` seconds are exceeded.
    """
    if max_size < 1 or max_size % 2 == 0:
        raise ValueError("max_size must be odd and >= 1")
    if max_size > MAX_SIZE_GUARD and not allow_large:
        raise ValueError(f"max_size {max_size} exceeds the guard {MAX_SIZE_GUARD}; pass allow_large")
    start = time.perf_counter()
    leaves = LEAVES[target.arity]
    key = _rank(leaves)
    points = sample_points(family, target.arity, k, seed)
    tfp = fingerprint_of(target.reference, family, target.arity, k, seed, points=points)
    tvals, tmask = tfp.values, tfp.mask
    result = SearchResult(target.name, family.name, target.arity, leaves, max_size, seed, k)

    def check_budget():
        result.elapsed = time.perf_counter() - start
        if max_trees is not None and result.trees_enumerated > max_trees:
            result.complete = False
            raise BudgetExceeded(f"tree budget {max_trees} exceeded", result)
        if time_limit is not None and result.elapsed > time_limit:
            result.complete = False
            raise BudgetExceeded(f"time budget {time_limit}s exceeded", result)

    reps: dict[int, _Layer] = {}
    buckets: dict[int, list[np.ndarray]] = {}
    for n in range(1, max_size + 1, 2):
        if n == 1:
            cand = _leaf_layer(leaves, points, family, key)
            ckeys, ctrees, cvals = cand.keys, cand.trees, cand.values
        else:
            pairs = _pairs(reps, n)
            cvals = _compute(family, reps, pairs, workers)
            ckeys = [p[0] for p in pairs]
            ctrees = [Op(reps[p[1]].trees[p[2]], reps[p[3]].trees[p[4]]) for p in pairs]
        result.trees_enumerated += len(ctrees)
        matched = _match_rows(cvals, tvals, tol) if len(ctrees) else np.zeros(0, bool)
        viable = _viable(cvals, tmask) if len(ctrees) else np.zeros(0, bool)
        keep = []
        for row in range(len(ctrees)):
            if not viable[row]:
                continue
            v = cvals[row]
            h = _digest(v)
            bucket = buckets.setdefault(h, [])
            if any(np.array_equal(~np.isnan(v), ~np.isnan(o)) and
                   np.all(_close(v[~np.isnan(v)], o[~np.isnan(o)], tol)) for o in bucket):
                continue
            bucket.append(v)
            keep.append(row)
        reps[n] = _Layer([ckeys[r] for r in keep], [ctrees[r] for r in keep],
                         cvals[keep] if keep else np.empty((0, k)))
        result.distinct_fingerprints += len(keep)
        result.strata.append({"size": n, "candidates": len(ctrees), "new_classes": len(keep),
                              "matches": int(np.count_nonzero(matched))})
        check_budget()
        if matched.any():
            witnesses, rejected = _witness_scan(family, target, leaves, n, points, tvals, tol,
                                                seed, k, workers)
            result.rejected_witnesses = rejected
            if witnesses:
                result.found = True
                result.minimal_size = n
                result.witnesses = witnesses
                break
    result.elapsed = time.perf_counter() - start
    return result


def _witness_scan(family, target, leaves, n, points, tvals, tol, seed, k, workers):
    """All trees of exactly ``n`` tokens matching the target (no dedup)."""
    key = _rank(leaves)
    tmask = ~np.isnan(tvals)
    full: dict[int, _Layer] = {}
    for m in range(1, n + 1, 2):
        if m == 1:
            layer = _leaf_layer(leaves, points, family, key)
        else:
            pairs = _pairs(full, m)
            vals = _compute(family, full, pairs, workers)
            layer = _Layer([p[0] for p in pairs],
                           [Op(full[p[1]].trees[p[2]], full[p[3]].trees[p[4]]) for p in pairs],
                           vals if pairs else np.empty((0, k)))
        if m < n:
            ok = _viable(layer.values, tmask) if layer.trees else np.zeros(0, bool)
            idx = np.flatnonzero(ok)
            layer = _Layer([layer.keys[i] for i in idx], [layer.trees[i] for i in idx],
                           layer.values[idx])
        full[m] = layer
    top = full[n]
    hits = np.flatnonzero(_match_rows(top.values, tvals, tol)) if top.trees else []
    confirmed, rejected = [], []
    seed2 = seed + SECOND_SEED_OFFSET
    pts2 = sample_points(family, target.arity, k, seed2)
    ref2 = fingerprint_of(target.reference, family, target.arity, k, seed2, points=pts2)
    names = ("x", "y")[: target.arity]
    for i in hits:
        tree = top.trees[i]
        fp2 = fingerprint_of(lambda *cols: evaluate(tree, family, dict(zip(names, cols))),
                             family, target.arity, k, seed2, points=pts2)
        (confirmed if equal(fp2, ref2, tol) == "same" else rejected).append(print_polish(tree))
    return confirmed, rejected
