"""Numerical function identity: values at fixed generic sample points.

Two candidate functions are treated as the same when they agree (within a
relative tolerance) at every mutually valid probe point and are valid at
exactly the same points.  This is a heuristic stand-in for symbolic
identity proofs; with generic points it is reliable for small trees.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .family import OperatorFamily

DEFAULT_K = 16
DEFAULT_TOL = 1e-9
ABS_FLOOR = 1e-12
GRID = 1e-6
_GENERIC = 1e-6


class MismatchedBasis(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Fingerprint:
    family: str
    arity: int
    seed: int
    points: np.ndarray  # shape (k, arity)
    values: np.ndarray  # shape (k,), NaN = Invalid

    @property
    def k(self) -> int:
        return int(self.values.shape[0])

    @property
    def mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def valid_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def basis(self):
        return (self.family, self.arity, self.seed, self.k)


def sample_points(family: OperatorFamily, arity: int, k: int = DEFAULT_K, seed: int = 42) -> np.ndarray:
    """``k`` generic points from ``sample_domain ** arity`` (rows of a (k, arity) array).

    Candidates closer than 1e-6 to ``e``, ``c`` or to another coordinate of
    the same point are rejected, so accidental identities are unlikely.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    dom = family.sample_domain
    rng = np.random.default_rng([seed, arity, k])
    special = [v for v in (family.e, family.c) if np.isfinite(v)]
    rows: list[np.ndarray] = []
    while len(rows) < k:
        cand = rng.uniform(dom.lo, dom.hi, arity)
        if not np.all(dom.contains(cand)):
            continue
        if any(np.any(np.abs(cand - s) <= _GENERIC) for s in special):
            continue
        if arity > 1 and np.min(np.abs(cand[:, None] - cand[None, :])[~np.eye(arity, dtype=bool)]) <= _GENERIC:
            continue
        rows.append(cand)
    return np.array(rows, dtype=float).reshape(k, arity)


def fingerprint_of(evaluator: Callable, family: OperatorFamily, arity: int, k: int = DEFAULT_K,
                   seed: int = 42, points: np.ndarray | None = None) -> Fingerprint:
    """Evaluate ``evaluator(*columns)`` at the sample points.

    ``evaluator`` receives one array per coordinate and must work
    elementwise (every evaluator in this package does).
    """
    pts = sample_points(family, arity, k, seed) if points is None else points
    with np.errstate(all="ignore"):
        vals = np.asarray(evaluator(*pts.T), dtype=float)
    vals = np.broadcast_to(vals, (pts.shape[0],)).copy()
    return Fingerprint(family.name, arity, seed, pts, vals)


def _close(a: np.ndarray, b: np.ndarray, tol: float) -> np.ndarray:
    both_inf = np.isinf(a) & np.isinf(b) & (np.sign(a) == np.sign(b))
    with np.errstate(invalid="ignore"):
        diff = np.abs(a - b)
        bound = np.maximum(tol * (1.0 + np.maximum(np.abs(a), np.abs(b))), ABS_FLOOR)
        finite = np.isfinite(a) & np.isfinite(b)
        return both_inf | (finite & (diff <= bound))


def equal(a: Fingerprint, b: Fingerprint, tol: float = DEFAULT_TOL) -> str:
    """``"same"``, ``"different"`` or ``"inconclusive"``."""
    if a.basis() != b.basis():
        raise MismatchedBasis(f"{a.basis()} vs {b.basis()}")
    ma, mb = a.mask, b.mask
    if not np.array_equal(ma, mb):
        return "different"
    both = ma & mb
    if not np.all(_close(a.values[both], b.values[both], tol)):
        return "different"
    if np.count_nonzero(both) >= a.k / 2:
        return "same"
    return "inconclusive"


def same_class(a: Fingerprint, b: Fingerprint, tol: float = DEFAULT_TOL) -> bool:
    """Dedup predicate: identical masks and agreement, without the quorum."""
    return bool(np.array_equal(a.mask, b.mask)
                and np.all(_close(a.values[a.mask], b.values[b.mask], tol)))


def quantized_hash(fp: Fingerprint) -> int:
    """64-bit digest of the values on a 1e-6 grid plus the validity mask.

    A pre-filter only: equal digests still go through ``equal``, and two
    fingerprints straddling a grid line may hash apart.
    """
    return _digest(fp.values)


def _digest(values: np.ndarray) -> int:
    mask = ~np.isnan(values)
    with np.errstate(invalid="ignore", over="ignore"):
        q = np.where(mask & np.isfinite(values), np.round(values / GRID), 0.0)
    # clip so huge values still map to distinct, well-defined integers
    q = np.clip(q, -2.0 ** 62, 2.0 ** 62).astype(np.int64)
    inf_sign = np.where(np.isinf(values), np.sign(values), 0).astype(np.int8)
    h = hashlib.blake2b(digest_size=8)
    h.update(q.tobytes())
    h.update(mask.astype(np.uint8).tobytes())
    h.update(inf_sign.tobytes())
    return int.from_bytes(h.digest(), "little")
