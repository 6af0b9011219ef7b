"""Seeded sampling shared by the checkers.

Checks over partial operations (``sqrt(x^2 - y^2)``, chain steps that only
hold on part of a domain) keep drawing batches until ``n`` usable samples
are collected or ``max_factor * n`` draws were spent.  Everything is driven
by one ``numpy.random.Generator`` so results are reproducible per seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


@dataclass
class CheckResult:
    samples_tested: int
    skipped: int
    max_abs_error: float
    max_scaled_error: float
    worst_witness: tuple | None

    def verdict(self, tol: float, min_samples: int, scaled: bool) -> str:
        if self.samples_tested < min_samples:
            return "inconclusive"
        err = self.max_scaled_error if scaled else self.max_abs_error
        return "pass" if err <= tol else "fail"


def box(domains, arity: int):
    """Normalize a domain spec into ``arity`` (lo, hi) pairs."""
    if hasattr(domains, "lo") or (len(domains) == 2 and np.isscalar(domains[0])):
        domains = [domains] * arity
    out = []
    for d in domains:
        if hasattr(d, "lo"):
            out.append((float(d.lo), float(d.hi)))
        else:
            out.append((float(d[0]), float(d[1])))
    return out


def compare(lhs: Callable, rhs: Callable, domains, arity: int, n: int, seed: int,
            accept: Callable | None = None, max_factor: int = 32,
            extra_points: Sequence[tuple] = (), scaled: bool = True) -> CheckResult:
    """Sample points, evaluate both sides, and collect the error statistics.

    ``lhs``/``rhs`` take ``arity`` arrays.  Points where either side is not
    finite are skipped and counted; ``accept`` filters points before they
    are evaluated (they are neither tested nor counted as skipped).
    Witness ties go to the lowest sample index.
    """
    rng = np.random.default_rng(seed)
    bounds = box(domains, arity)
    cols: list[list[np.ndarray]] = [[] for _ in range(arity)]
    got_l, got_r = [], []
    valid_total, skipped, drawn = 0, 0, 0

    def consume(pts):
        nonlocal valid_total, skipped
        if accept is not None and pts[0].size:
            keep = np.asarray(accept(*pts), dtype=bool)
            pts = [p[keep] for p in pts]
        if not pts[0].size:
            return
        a = np.broadcast_to(np.asarray(lhs(*pts), dtype=float), pts[0].shape)
        b = np.broadcast_to(np.asarray(rhs(*pts), dtype=float), pts[0].shape)
        ok = np.isfinite(a) & np.isfinite(b)
        skipped += int(np.count_nonzero(~ok))
        valid_total += int(np.count_nonzero(ok))
        for i in range(arity):
            cols[i].append(pts[i][ok])
        got_l.append(a[ok])
        got_r.append(b[ok])

    limit = n + len(extra_points)
    if extra_points:
        extra = np.asarray(extra_points, dtype=float).reshape(-1, arity)
        consume([extra[:, i] for i in range(arity)])
    while valid_total < limit and drawn < max_factor * n:
        batch = n if drawn == 0 else 4 * n
        pts = [rng.uniform(lo, hi, batch) for lo, hi in bounds]
        drawn += batch
        consume(pts)

    if valid_total == 0:
        return CheckResult(0, skipped, 0.0, 0.0, None)
    a = np.concatenate(got_l)
    b = np.concatenate(got_r)
    pts = [np.concatenate(c) for c in cols]
    # keep exactly the first n usable samples (plus explicit extras)
    a, b, pts = a[:limit], b[:limit], [p[:limit] for p in pts]
    abs_err = np.abs(a - b)
    scaled_err = abs_err / (1.0 + np.abs(b))
    # argmax returns the first maximal index, i.e. the lowest sample on ties
    worst = int(np.argmax(scaled_err if scaled else abs_err))
    return CheckResult(
        samples_tested=int(a.size),
        skipped=skipped,
        max_abs_error=float(np.max(abs_err)),
        max_scaled_error=float(np.max(scaled_err)),
        worst_witness=tuple(float(p[worst]) for p in pts),
    )
