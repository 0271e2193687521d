"""Scalar objective pieces: rank dispersion, smoothed lasso, k-means coupling,
the full penalized objective and its quadratic majorizer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .core import ClusterState, Hyperparams, SolverConfig, ValidationError
from .pairwise import PairwiseSystem

SQRT12 = np.sqrt(12.0)


@dataclass(frozen=True)
class ObjectiveBreakdown:
    loss: float
    penalty_l1: float
    penalty_cluster: float

    @property
    def total(self):
        return self.loss + self.penalty_l1 + self.penalty_cluster


def _coef(b, p=None, q=None):
    b = np.asarray(b, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    if (p is not None and b.shape[0] != p) or (q is not None and b.shape[1] != q):
        raise ValidationError(f"coefficient matrix has shape {b.shape}, expected {(p, q)}")
    return b


def wilcoxon_dispersion(ps: PairwiseSystem, b) -> float:
    """Sum over responses and pairs of |g_os - r_o . beta_s|."""
    return float(np.abs(ps.residual_differences(b)).sum())


def pairwise_dispersion(residuals) -> float:
    """Sum over i < j of |e_i - e_j| for a single residual vector."""
    e = np.asarray(residuals, dtype=float).ravel()
    i, j = np.triu_indices(e.size, k=1)
    return float(np.abs(e[i] - e[j]).sum())


def jaeckel_dispersion(residuals) -> float:
    """Rank form sqrt(12) * sum_i (R(e_i)/(n+1) - 1/2) e_i, average ranks on ties.

    Proportional to :func:`pairwise_dispersion`, with factor 2(n+1)/sqrt(12).
    """
    e = np.asarray(residuals, dtype=float).ravel()
    n = e.size
    if n < 2:
        raise ValidationError(f"need at least 2 residuals, got {n}")
    scores = rankdata(e) / (n + 1) - 0.5
    return float(SQRT12 * np.dot(scores, e))


def perturbed_l1(b, lam, epsilon) -> float:
    if not lam > 0 or not epsilon > 0:
        raise ValidationError("lambda and epsilon must be positive")
    a = np.abs(np.asarray(b, dtype=float))
    return float(lam * np.sum(a - epsilon * np.log1p(a / epsilon)))


def cluster_penalty(x, b, cs: ClusterState, gamma) -> float:
    """(gamma/2) sum_s sum_l u_sl ||X beta_s - X v_l||^2."""
    x = np.asarray(x, dtype=float)
    b = _coef(b, p=x.shape[1], q=cs.q)
    if cs.v.shape[0] != x.shape[1]:
        raise ValidationError("centroid dimension does not match x")
    if gamma == 0:
        return 0.0
    diff = x @ (b - cs.v[:, cs.labels])
    return float(0.5 * gamma * np.sum(diff * diff))


def objective_l_dagger(ps: PairwiseSystem, x, b, cs: ClusterState,
                       hp: Hyperparams) -> ObjectiveBreakdown:
    b = _coef(b, p=ps.r.shape[1], q=ps.g.shape[1])
    return ObjectiveBreakdown(
        loss=wilcoxon_dispersion(ps, b),
        penalty_l1=perturbed_l1(b, hp.lam, hp.epsilon),
        penalty_cluster=cluster_penalty(x, b, cs, hp.gamma),
    )


def majorizer_m(ps: PairwiseSystem, x, b, b_anchor, cs: ClusterState,
                hp: Hyperparams, cfg: SolverConfig = SolverConfig()) -> float:
    """Quadratic surrogate of the objective expanded at ``b_anchor``.

    The absolute pair terms are replaced by w * a^2 + c/2 with
    c = max(|a_anchor|, delta) and w = 1/(2c); each smoothed-lasso term by its
    tangent parabola in beta. The cluster term is kept exactly. The surrogate
    dominates the objective everywhere and touches it at the anchor whenever
    no anchor residual difference is below the clamp.
    """
    p, q = ps.r.shape[1], ps.g.shape[1]
    b = _coef(b, p, q)
    b0 = _coef(b_anchor, p, q)

    c = np.maximum(np.abs(ps.residual_differences(b0)), cfg.weight_clamp_delta)
    a = ps.residual_differences(b)
    loss_part = np.sum(a * a / (2.0 * c)) + 0.5 * np.sum(c)

    eps = hp.epsilon
    a0 = np.abs(b0)
    curv = 1.0 / (2.0 * (a0 + eps))           # entries of Psi^T Psi
    const = a0 - eps * np.log1p(a0 / eps) - a0 * a0 * curv
    pen_part = hp.lam * (np.sum(curv * b * b) + np.sum(const))

    return float(loss_part + pen_part + cluster_penalty(x, b, cs, hp.gamma))
