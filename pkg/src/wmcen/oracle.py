"""Brute-force reference minimizers for certifying the solver on tiny problems.

Nothing here calls into :mod:`wmcen.solver` or :mod:`wmcen.objective`; the
objective is re-evaluated from its definition over explicit (i, j) loops so
that agreement with the solver is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import ClusterState, Hyperparams, ValidationError

MAX_GRID_POINTS = 10**7


@dataclass(frozen=True)
class GridSpec:
    lower: float | np.ndarray
    upper: float | np.ndarray
    step: float

    def __post_init__(self):
        if not self.step > 0:
            raise ValidationError("grid step must be positive")
        if np.any(np.asarray(self.lower) >= np.asarray(self.upper)):
            raise ValidationError("grid lower bound must be below the upper bound")

    def axes(self, dim):
        lo = np.broadcast_to(np.asarray(self.lower, dtype=float), (dim,))
        hi = np.broadcast_to(np.asarray(self.upper, dtype=float), (dim,))
        return [np.arange(lo[i], hi[i] + 0.5 * self.step, self.step) for i in range(dim)]

    def size(self, dim):
        return int(np.prod([a.size for a in self.axes(dim)], dtype=float))


def _l_dagger_batch(r, g, x, thetas, p, q, hp, cs):
    """Objective for a batch of flattened coefficient matrices (rows of thetas,
    column-major: theta[:, s*p:(s+1)*p] is beta_s)."""
    total = np.zeros(thetas.shape[0])
    for s in range(q):
        beta = thetas[:, s * p:(s + 1) * p]                 # N x p
        for o in range(r.shape[0]):
            total += np.abs(g[o, s] - beta @ r[o])
        a = np.abs(beta)
        total += hp.lam * np.sum(a - hp.epsilon * np.log(1.0 + a / hp.epsilon), axis=1)
        if hp.gamma > 0:
            ell = int(np.flatnonzero(np.asarray(cs.u)[s])[0])
            dv = beta - np.asarray(cs.v)[:, ell]
            fitted = dv @ np.asarray(x).T                      # N x n
            total += 0.5 * hp.gamma * np.sum(fitted ** 2, axis=1)
    return total


def grid_minimize_l_dagger(ps, x, hp: Hyperparams, cs_fixed: ClusterState, grid: GridSpec,
                           refine=0, chunk=200_000):
    """Exhaustive grid minimum of the objective with clusters held fixed.

    ``refine`` > 0 re-grids a box of +-2 steps around the incumbent at a ten
    times finer step, that many times (valid because the objective is convex
    in the coefficients for fixed clusters).

    Returns ``(b, value)`` with ``b`` of shape p x q.
    """
    r = np.asarray(ps.r, dtype=float)
    g = np.asarray(ps.g, dtype=float)
    p, q = r.shape[1], g.shape[1]
    dim = p * q
    if grid.size(dim) > MAX_GRID_POINTS:
        raise ValidationError(
            f"grid has {grid.size(dim)} points, more than the {MAX_GRID_POINTS} guard")

    def search(spec):
        axes = spec.axes(dim)
        shape = tuple(a.size for a in axes)
        total = int(np.prod(shape))
        best_val, best_theta = np.inf, None
        for start in range(0, total, chunk):
            coords = np.unravel_index(np.arange(start, min(start + chunk, total)), shape)
            block = np.column_stack([axes[i][coords[i]] for i in range(dim)])
            vals = _l_dagger_batch(r, g, x, block, p, q, hp, cs_fixed)
            i = int(np.argmin(vals))
            if vals[i] < best_val:
                best_val, best_theta = vals[i], block[i]
        return best_theta, best_val

    theta, val = search(grid)
    step = grid.step
    for _ in range(refine):
        lo = theta - 2 * step
        hi = theta + 2 * step
        step = step / 10.0
        cand, cval = search(GridSpec(lo, hi, step))
        if cval <= val:
            theta, val = cand, cval
    return theta.reshape(q, p).T.copy(), float(val)


def exhaustive_cluster_check(x, b, v_candidates, max_cells=20):
    """Per-response nearest centroid by enumerating every full assignment.

    Enumerates all k**q assignments, picks the one with the smallest total
    within-cluster distance, resolving ties by the lexicographically smallest
    label vector (lowest cluster index first).
    """
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    v = np.asarray(v_candidates, dtype=float)
    q, k = b.shape[1], v.shape[1]
    if q * k > max_cells:
        raise ValidationError(f"q*k = {q * k} exceeds the enumeration guard {max_cells}")
    cost = np.empty((q, k))
    for s in range(q):
        for ell in range(k):
            diff = x @ b[:, s] - x @ v[:, ell]
            cost[s, ell] = float(diff @ diff)
    best, best_val = None, np.inf
    for labels in itertools.product(range(k), repeat=q):
        val = sum(cost[s, labels[s]] for s in range(q))
        # per-row independence means the lexicographic first minimum is also
        # the row-wise lowest-index tie winner
        if val < best_val:
            best, best_val = labels, val
    u = np.zeros((q, k), dtype=np.int8)
    u[np.arange(q), best] = 1
    return u
