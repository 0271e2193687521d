"""MM solver for the rank-based multivariate cluster elastic net.

Each pass re-expands the objective into a quadratic majorizer at the current
coefficients (pair weights ``w`` and lasso curvatures ``psi``), then updates
the coefficient columns one at a time in Gauss-Seidel order. Cluster
memberships and centroids are refreshed k-means style between passes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .core import (ClusterState, Dataset, FitResult, Hyperparams, SolverConfig,
                   SolverError, ValidationError)
from .objective import objective_l_dagger
from .pairwise import PairwiseSystem, build_pairwise

log = logging.getLogger(__name__)

# slack allowed on objective increases caused by rounding or the weight clamp
DESCENT_SLACK = 1e-10


@dataclass
class MMState:
    b: np.ndarray          # p x q, updated in place during a sweep
    w: np.ndarray          # m x q pair weights
    psi_diag: np.ndarray   # p x q diagonal of Psi_s per column
    clusters: ClusterState
    objective: float = np.nan


def update_weights(ps: PairwiseSystem, b, cfg: SolverConfig = SolverConfig()):
    a = np.abs(ps.residual_differences(b))
    return 0.5 / np.maximum(a, cfg.weight_clamp_delta)


def update_psi(b, epsilon):
    return 1.0 / np.sqrt(2.0 * (np.abs(np.asarray(b, dtype=float)) + epsilon))


def _solve_spd(a, rhs, cfg, d):
    try:
        return cho_solve(cho_factor(a, lower=True, check_finite=False), rhs,
                         check_finite=False)
    except (LinAlgError, ValueError):
        pass
    jitter = max(cfg.ridge_jitter, np.finfo(float).eps) * max(np.trace(a) / a.shape[0], 1.0)
    log.debug("block %d: system not positive definite, retrying with jitter %g", d, jitter)
    try:
        return cho_solve(cho_factor(a + jitter * np.eye(a.shape[0]), lower=True), rhs)
    except (LinAlgError, ValueError) as exc:
        raise SolverError(f"linear system for response {d} is singular") from exc


def update_beta_block(d, ps: PairwiseSystem, x, state: MMState, hp: Hyperparams,
                      cfg: SolverConfig = SolverConfig(), xtx=None):
    """Minimize the majorizer over column ``d`` with all other columns fixed.

    The cluster term enters with the centroid of ``d``'s cluster profiled
    out, so ``d`` is pulled toward the mean of its co-members only.
    """
    r = ps.r
    if xtx is None:
        x = np.asarray(x, dtype=float)
        xtx = x.T @ x
    wd = state.w[:, d]
    lhs = 2.0 * (r.T * wd) @ r
    lhs[np.diag_indices_from(lhs)] += 2.0 * hp.lam * state.psi_diag[:, d] ** 2
    rhs = 2.0 * r.T @ (wd * ps.g[:, d])

    if hp.gamma > 0:
        labels = state.clusters.labels
        ell = labels[d]
        size = state.clusters.counts[ell]
        if size > 1:
            lhs += hp.gamma * (1.0 - 1.0 / size) * xtx
            others = (labels == ell)
            others[d] = False
            rhs += (hp.gamma / size) * xtx @ state.b[:, others].sum(axis=1)
    return _solve_spd(lhs, rhs, cfg, d)


def _distances(x, b, v):
    xb = x @ b
    xv = x @ v
    diff = xb[:, :, None] - xv[:, None, :]
    return np.einsum("nqk,nqk->qk", diff, diff)


def nearest_centroid(x, b, v):
    """Index of the closest centroid for each response, lowest index on ties."""
    dist = _distances(np.asarray(x, dtype=float), np.asarray(b, dtype=float),
                      np.asarray(v, dtype=float))
    return np.argmin(dist, axis=1)


def update_clusters(x, b, clusters: ClusterState) -> ClusterState:
    """Assign each response to the nearest centroid in the X beta metric.

    Ties go to the lowest cluster index. A cluster left empty receives the
    response farthest from its own centroid among clusters with spare members.
    """
    dist = _distances(np.asarray(x, dtype=float), np.asarray(b, dtype=float), clusters.v)
    labels = np.argmin(dist, axis=1)
    k = clusters.k
    counts = np.bincount(labels, minlength=k)
    while np.any(counts == 0):
        empty = int(np.flatnonzero(counts == 0)[0])
        own = dist[np.arange(labels.size), labels]
        own = np.where(counts[labels] > 1, own, -np.inf)
        s = int(np.argmax(own))
        counts[labels[s]] -= 1
        labels[s] = empty
        counts[empty] += 1
    return ClusterState.from_labels(labels, clusters.v)


def update_centroids(b, clusters: ClusterState) -> ClusterState:
    b = np.asarray(b, dtype=float)
    if np.any(clusters.counts == 0):
        raise SolverError("empty cluster reached the centroid update")
    v = (b @ clusters.u) / clusters.counts
    return ClusterState(clusters.u, v)


def kmeans_init(x, b, k, seed=0, restarts=10, max_iter=100) -> ClusterState:
    """Lloyd's algorithm on the fitted profiles X beta_s, best of ``restarts``."""
    x = np.asarray(x, dtype=float)
    b = np.asarray(b, dtype=float)
    q = b.shape[1]
    if k > q:
        raise ValidationError(f"k = {k} exceeds q = {q}")
    if k == 1:
        return update_centroids(b, ClusterState(np.ones((q, 1), dtype=np.int8),
                                                np.zeros((b.shape[0], 1))))
    rng = np.random.default_rng(seed)
    best, best_cost = None, np.inf
    for _ in range(restarts):
        start = rng.choice(q, size=k, replace=False)
        cs = ClusterState.from_labels(np.arange(q) % k, b[:, start])
        labels = None
        for _ in range(max_iter):
            cs = update_clusters(x, b, cs)
            if labels is not None and np.array_equal(labels, cs.labels):
                break
            labels = cs.labels
            cs = update_centroids(b, cs)
        cs = update_centroids(b, cs)
        cost = _distances(x, b, cs.v)[np.arange(q), cs.labels].sum()
        if cost < best_cost - 1e-12:
            best, best_cost = cs, cost
    return best


def ridge_init(x, y):
    """Per-response ridge start with penalty 0.1 * trace(X'X) / p."""
    xtx = x.T @ x
    p = xtx.shape[0]
    alpha = 0.1 * np.trace(xtx) / p
    if alpha <= 0:
        alpha = 1.0
    return np.linalg.solve(xtx + alpha * np.eye(p), x.T @ y)


@lru_cache(maxsize=16)
def _triu(p):
    return np.triu_indices(p)


def pair_outer_products(ps):
    """Upper triangles of r_o r_o' as m rows, so the q weighted Gram matrices
    come from one product."""
    r = ps.r
    iu, ju = _triu(r.shape[1])
    return r[:, iu] * r[:, ju]


def _sweep(ps, x, xtx, b, clusters, hp, cfg, rr=None):
    """One Gauss-Seidel pass over all columns.

    Same arithmetic as calling :func:`update_beta_block` for s = 0..q-1, but the
    column systems are assembled in one batch since only the cluster
    right-hand side couples them.
    """
    q = b.shape[1]
    w = update_weights(ps, b, cfg)
    curv = 2.0 * hp.lam / (2.0 * (np.abs(b) + hp.epsilon))
    rt = ps.r.T
    p = b.shape[0]
    if rr is None:
        rr = pair_outer_products(ps)
    iu, ju = _triu(p)
    tri = 2.0 * (w.T @ rr)
    lhs = np.empty((q, p, p))                                        # q x p x p
    lhs[:, iu, ju] = tri
    lhs[:, ju, iu] = tri
    idx = np.arange(p)
    lhs[:, idx, idx] += curv.T
    rhs = 2.0 * (rt @ (w * ps.g))                                    # p x q
    b = b.copy()
    if hp.gamma > 0:
        labels = clusters.labels
        counts = clusters.counts
        size = counts[labels]
        coupled = size > 1
        lhs += (hp.gamma * np.where(coupled, 1.0 - 1.0 / size, 0.0))[:, None, None] * xtx
    else:
        coupled = np.zeros(q, dtype=bool)
    try:
        if not coupled.any():
            return np.linalg.solve(lhs, rhs.T[:, :, None])[:, :, 0].T
        # solve every column against [rhs_s | X'X] at once; the Gauss-Seidel
        # pass below then only combines the solved pieces
        stacked = np.concatenate([rhs.T[:, :, None], np.broadcast_to(xtx, (q, p, p))], axis=2)
        solved = np.linalg.solve(lhs, stacked)
    except np.linalg.LinAlgError:
        solved = None
    sums = b @ clusters.u                       # running member sums per cluster
    for s in range(q):
        if not coupled[s]:
            b[:, s] = solved[s, :, 0] if solved is not None else _solve_spd(lhs[s], rhs[:, s], cfg, s)
            continue
        ell = labels[s]
        cross = (hp.gamma / counts[ell]) * (sums[:, ell] - b[:, s])
        if solved is not None:
            new = solved[s, :, 0] + solved[s, :, 1:] @ cross
        else:
            new = _solve_spd(lhs[s], rhs[:, s] + xtx @ cross, cfg, s)
        sums[:, ell] += new - b[:, s]
        b[:, s] = new
    return b


def fit(d: Dataset, hp: Hyperparams, cfg: SolverConfig = SolverConfig(),
        b_init=None) -> FitResult:
    """Fit the model by nested MM / k-means loops.

    The inner loop repeats coefficient sweeps until the objective drops by less
    than ``cfg.tol``; the cluster loop then alternates membership and centroid
    updates the same way, and the outer loop stops once a full round gains
    less than ``cfg.tol``. Centroids are kept at the member means of the
    current coefficients throughout.
    """
    hp.check_against(d.q)
    x_center = d.x.mean(axis=0)
    xc = d.x - x_center
    yc = d.y - d.y.mean(axis=0)
    ps = build_pairwise(Dataset(xc, yc))
    xtx = xc.T @ xc
    rr = pair_outer_products(ps)

    b = ridge_init(xc, yc) if b_init is None else np.array(b_init, dtype=float)
    cs = kmeans_init(xc, b, hp.k, seed=cfg.seed, restarts=cfg.kmeans_restarts)

    def objective(b, cs):
        return objective_l_dagger(ps, xc, b, cs, hp).total

    obj = objective(b, cs)
    trace = [obj]
    inner_total = 0
    rejected = 0
    converged = False
    outer = 0
    inner_hit_cap = False
    for outer in range(1, cfg.max_outer_iters + 1):
        start = obj
        inner_hit_cap = True
        for _ in range(cfg.max_inner_iters):
            b_new = _sweep(ps, xc, xtx, b, cs, hp, cfg, rr)
            cs_new = update_centroids(b_new, cs)
            obj_new = objective(b_new, cs_new)
            if obj_new > obj + DESCENT_SLACK:
                rejected += 1
                inner_hit_cap = False
                break
            gain = obj - obj_new
            b, cs, obj = b_new, cs_new, obj_new
            trace.append(obj)
            inner_total += 1
            if gain < cfg.tol:
                inner_hit_cap = False
                break

        for _ in range(cfg.max_inner_iters):
            cs_new = update_centroids(b, update_clusters(xc, b, cs))
            obj_new = objective(b, cs_new)
            if obj_new > obj + DESCENT_SLACK:
                break
            gain = obj - obj_new
            if np.array_equal(cs_new.labels, cs.labels) and gain <= 0:
                break
            cs, obj = cs_new, obj_new
            trace.append(obj)
            if gain < cfg.tol:
                break

        if start - obj < cfg.tol:
            converged = not inner_hit_cap
            break

    intercepts = np.median(d.y - d.x @ b, axis=0)
    return FitResult(b=b, clusters=cs, objective_trace=np.array(trace),
                     inner_iters=inner_total, outer_iters=outer, converged=converged,
                     intercepts=intercepts, hyperparams=hp, x_center=x_center,
                     rejected_sweeps=rejected)


def predict(b, intercepts, x_new):
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim == 1:
        x_new = x_new[:, None]
    intercepts = np.asarray(intercepts, dtype=float).ravel()
    if x_new.shape[1] != b.shape[0]:
        raise ValidationError(
            f"dimension mismatch: x has {x_new.shape[1]} columns, model expects {b.shape[0]}")
    if intercepts.size != b.shape[1]:
        raise ValidationError("one intercept per response is required")
    return x_new @ b + intercepts
