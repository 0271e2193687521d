"""Shared data model: datasets, hyperparameters, solver settings and fit results."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class WMCENError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(WMCENError, ValueError):
    pass


class SolverError(WMCENError, RuntimeError):
    pass


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _as_matrix(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2:
        raise ValidationError(f"{name} must be a 2-d matrix, got {a.ndim} dimensions")
    return a


def _check_finite(a, name):
    bad = np.argwhere(~np.isfinite(a))
    if bad.size:
        i, j = bad[0]
        raise ValidationError(f"{name} has a non-finite entry at row {i}, column {j}")


@dataclass(frozen=True)
class Dataset:
    """Covariates ``x`` (n x p) and responses ``y`` (n x q)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _as_matrix(self.x, "x")
        y = _as_matrix(self.y, "y")
        if x.shape[0] != y.shape[0]:
            raise ValidationError(
                f"dimension mismatch: x has {x.shape[0]} rows but y has {y.shape[0]} rows")
        if x.shape[0] < 2:
            raise ValidationError(f"need at least 2 samples, got {x.shape[0]}")
        if x.shape[1] < 1 or y.shape[1] < 1:
            raise ValidationError("x and y need at least one column each")
        _check_finite(x, "x")
        _check_finite(y, "y")
        object.__setattr__(self, "x", _frozen(x))
        object.__setattr__(self, "y", _frozen(y))

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def q(self):
        return self.y.shape[1]

    def subset(self, rows):
        return Dataset(self.x[rows], self.y[rows])


def validate_dataset(x, y):
    return Dataset(x, y)


@dataclass(frozen=True)
class Hyperparams:
    """Tuning parameters: L1 weight, cluster weight, cluster count and the
    perturbation ``epsilon`` of the smoothed lasso penalty."""

    lam: float
    gamma: float = 0.0
    k: int = 1
    epsilon: float = 1e-6

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValidationError(f"lambda must be positive, got {self.lam}")
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ValidationError(f"gamma must be non-negative, got {self.gamma}")
        if int(self.k) != self.k or self.k < 1:
            raise ValidationError(f"k must be an integer >= 1, got {self.k}")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "epsilon", float(self.epsilon))

    def check_against(self, q):
        if self.k > q:
            raise ValidationError(f"k = {self.k} exceeds the number of responses q = {q}")


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rules and numerical safeguards for the MM solver.

    ``tol`` is an absolute threshold on the decrease of the objective between
    successive passes. ``weight_clamp_delta`` floors |residual difference|
    before it is inverted into a weight, and ``ridge_jitter`` (relative to the
    mean diagonal) is added once when a block system fails to factor.
    """

    tol: float = 1e-6
    max_inner_iters: int = 500
    max_outer_iters: int = 100
    weight_clamp_delta: float = 1e-8
    ridge_jitter: float = 1e-10
    seed: int = 0
    kmeans_restarts: int = 10

    def __post_init__(self):
        if not self.tol > 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.max_inner_iters < 1 or self.max_outer_iters < 1:
            raise ValidationError("iteration caps must be >= 1")
        if not self.weight_clamp_delta > 0:
            raise ValidationError("weight_clamp_delta must be positive")
        if self.ridge_jitter < 0:
            raise ValidationError("ridge_jitter must be non-negative")
        if self.kmeans_restarts < 1:
            raise ValidationError("kmeans_restarts must be >= 1")


@dataclass(frozen=True)
class ClusterState:
    """Binary membership ``u`` (q x k), centroid coefficients ``v`` (p x k)
    and the per-cluster member counts."""

    u: np.ndarray
    v: np.ndarray
    counts: np.ndarray = field(default=None)

    def __post_init__(self):
        u = np.asarray(self.u)
        v = _as_matrix(self.v, "v")
        if u.ndim != 2:
            raise ValidationError("u must be a q x k matrix")
        if not np.all((u == 0) | (u == 1)):
            raise ValidationError("u must be binary")
        if not np.all(u.sum(axis=1) == 1):
            bad = int(np.flatnonzero(u.sum(axis=1) != 1)[0])
            raise ValidationError(f"row {bad} of u does not sum to 1")
        if v.shape[1] != u.shape[1]:
            raise ValidationError(
                f"v has {v.shape[1]} centroids but u has {u.shape[1]} clusters")
        _check_finite(v, "v")
        counts = u.sum(axis=0).astype(int)
        if self.counts is not None and not np.array_equal(np.asarray(self.counts), counts):
            raise ValidationError("counts disagree with the column sums of u")
        object.__setattr__(self, "u", _frozen(u, dtype=np.int8))
        object.__setattr__(self, "v", _frozen(v))
        object.__setattr__(self, "counts", _frozen(counts, dtype=int))

    @classmethod
    def from_labels(cls, labels, v):
        labels = np.asarray(labels, dtype=int)
        k = np.asarray(v).shape[1]
        u = np.zeros((labels.size, k), dtype=np.int8)
        u[np.arange(labels.size), labels] = 1
        return cls(u, v)

    @cached_property
    def labels(self):
        return _frozen(np.argmax(self.u, axis=1), dtype=int)

    @property
    def q(self):
        return self.u.shape[0]

    @property
    def k(self):
        return self.u.shape[1]


@dataclass(frozen=True)
class FitResult:
    """Output of :func:`wmcen.solver.fit`.

    ``b`` holds one coefficient column per response. ``objective_trace`` lists
    the objective after every accepted update, starting from the initial
    point. ``rejected_sweeps`` counts coefficient sweeps discarded because
    rounding made them raise the objective.
    """

    b: np.ndarray
    clusters: ClusterState
    objective_trace: np.ndarray
    inner_iters: int
    outer_iters: int
    converged: bool
    intercepts: np.ndarray = None
    hyperparams: Hyperparams = None
    x_center: np.ndarray = None
    rejected_sweeps: int = 0

    def __post_init__(self):
        b = _as_matrix(self.b, "b")
        _check_finite(b, "b")
        trace = np.asarray(self.objective_trace, dtype=float)
        if trace.size > 1 and np.any(np.diff(trace) > 1e-10):
            raise ValidationError("objective trace is not non-increasing")
        object.__setattr__(self, "b", _frozen(b))
        object.__setattr__(self, "objective_trace", _frozen(trace))
        if self.intercepts is None:
            object.__setattr__(self, "intercepts", _frozen(np.zeros(b.shape[1])))
        else:
            object.__setattr__(self, "intercepts", _frozen(self.intercepts))
        if self.x_center is not None:
            object.__setattr__(self, "x_center", _frozen(self.x_center))

    @property
    def objective(self):
        return float(self.objective_trace[-1])

    def predict(self, x_new):
        from .solver import predict
        return predict(self.b, self.intercepts, x_new)
