"""Synthetic multivariate regression studies with correlated covariates and
outlier-prone or heavy-tailed errors.

Each replication draws 50 training and 1000 test rows, tunes by k-fold CV on
the training rows, refits, and records the test median absolute prediction
error and the coefficient MSE.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, SolverConfig, ValidationError, WMCENError
from .metrics import median_ape, mse_beta
from .solver import fit, predict
from .tuning import TuningGrid, grid_search, lambda_max

log = logging.getLogger(__name__)

N_RESPONSES = 9
ERROR_KINDS = ("normal", "mixture", "t4", "cauchy")
DESIGN_P = (12, 100)
DESIGN_ETA = (0.25, 0.5, 0.75, 1.0)
DESIGN_XI = (0.02, 0.05, 0.10)


def parse_error_kind(kind):
    """Accept a name from ERROR_KINDS or the 1-based index used in reports."""
    if isinstance(kind, str) and kind.isdigit():
        kind = int(kind)
    if isinstance(kind, (int, np.integer)):
        if not 1 <= kind <= len(ERROR_KINDS):
            raise ValidationError(f"error index must be 1..{len(ERROR_KINDS)}, got {kind}")
        return ERROR_KINDS[kind - 1]
    if kind not in ERROR_KINDS:
        raise ValidationError(f"unknown error kind {kind!r}; expected one of {ERROR_KINDS}")
    return kind


@dataclass(frozen=True)
class SimulationSpec:
    p: int = 12
    eta: float = 0.25
    xi: float = 0.02
    error_kind: str = "normal"
    reps: int = 100
    seed: int = 0
    n_train: int = 50
    n_test: int = 1000
    off_design: bool = False   # permit factor levels outside the published design

    def __post_init__(self):
        object.__setattr__(self, "error_kind", parse_error_kind(self.error_kind))
        if self.p not in DESIGN_P:
            raise ValidationError(f"p must be one of {DESIGN_P}, got {self.p}")
        if not self.off_design:
            if not np.any(np.isclose(self.eta, DESIGN_ETA)):
                raise ValidationError(f"eta {self.eta} not in {DESIGN_ETA} (set off_design)")
            if not np.any(np.isclose(self.xi, DESIGN_XI)):
                raise ValidationError(f"xi {self.xi} not in {DESIGN_XI} (set off_design)")
            if self.n_train != 50 or self.n_test != 1000:
                raise ValidationError("sample sizes differ from 50/1000 (set off_design)")
        if self.reps < 1:
            raise ValidationError("reps must be >= 1")

    @property
    def error_index(self):
        return ERROR_KINDS.index(self.error_kind) + 1


def build_covariance(p):
    """Equicorrelated (0.7) 12 x 12 block, padded with an identity for p = 100."""
    if p not in DESIGN_P:
        raise ValidationError(f"p must be one of {DESIGN_P}, got {p}")
    block = np.full((12, 12), 0.7)
    np.fill_diagonal(block, 1.0)
    cov = np.eye(p)
    cov[:12, :12] = block
    return cov


def build_true_coefficients(p, eta, xi):
    """p x 9 block-diagonal truth: three blocks of K rows with columns
    (eta - xi, eta, eta + xi); K = 4 for p = 12 and 10 for p = 100."""
    if p not in DESIGN_P:
        raise ValidationError(f"p must be one of {DESIGN_P}, got {p}")
    K = 4 if p == 12 else 10
    b = np.zeros((p, N_RESPONSES))
    cols = np.array([eta - xi, eta, eta + xi])
    for blk in range(3):
        b[blk * K:(blk + 1) * K, blk * 3:(blk + 1) * 3] = cols
    return b


def sample_errors(kind, n, q, rng):
    kind = parse_error_kind(kind)
    if kind == "normal":
        return rng.standard_normal((n, q))
    if kind == "mixture":
        # 0.95 N(0, 1) + 0.05 N(0, 100): component drawn per entry, sd 10 for outliers
        z = rng.standard_normal((n, q))
        outlier = rng.random((n, q)) < 0.05
        return np.where(outlier, 10.0 * z, z)
    if kind == "t4":
        return np.sqrt(2.0) * rng.standard_t(4, size=(n, q))
    return rng.standard_cauchy((n, q))


def _draw(spec, b_true, chol, n, rng):
    x_rng, e_rng = rng.spawn(2)
    x = x_rng.standard_normal((n, spec.p)) @ chol.T
    y = x @ b_true + sample_errors(spec.error_kind, n, N_RESPONSES, e_rng)
    return Dataset(x, y)


def generate_dataset(spec: SimulationSpec, rng):
    """Draw (train, test, b_true); train and test use separate child streams."""
    b_true = build_true_coefficients(spec.p, spec.eta, spec.xi)
    chol = np.linalg.cholesky(build_covariance(spec.p))
    train_rng, test_rng = rng.spawn(2)
    train = _draw(spec, b_true, chol, spec.n_train, train_rng)
    test = _draw(spec, b_true, chol, spec.n_test, test_rng)
    return train, test, b_true


def relative_grid(lambda_factors, gamma_factors=(0.0,), ks=(1,), folds=5,
                  criterion="median-ape"):
    """Grid factory scaling both weights by ``lambda_max`` of the training data."""
    def make(d, seed):
        scale = lambda_max(d)
        return TuningGrid(tuple(scale * f for f in lambda_factors),
                          tuple(scale * f for f in gamma_factors),
                          tuple(k for k in ks if k <= d.q), folds=folds,
                          criterion=criterion, seed=seed)
    return make


# reduced grid for desk-scale runs: 4 lambda x 3 gamma x k in {2, 3}
DESK_LAMBDA_FACTORS = tuple(np.logspace(-3, -0.5, 4))
DESK_GAMMA_FACTORS = tuple(np.logspace(-3, 0, 3))


def desk_study_grid(method="wmcen"):
    if method == "wlasso":
        return relative_grid(DESK_LAMBDA_FACTORS)
    return relative_grid(DESK_LAMBDA_FACTORS, DESK_GAMMA_FACTORS, ks=(2, 3))


def default_study_grid(method="wmcen"):
    factors = tuple(np.logspace(-3, 1, 10))
    if method == "wlasso":
        return relative_grid(factors)
    return relative_grid(factors, factors, ks=(2, 3))


@dataclass(frozen=True)
class RepResult:
    rep: int
    lam: float
    gamma: float
    k: int
    median_ape: float
    mse_beta: float
    converged: bool
    error: str = ""

    @property
    def failed(self):
        return bool(self.error)


@dataclass(frozen=True)
class StudyResult:
    spec: SimulationSpec
    method: str
    per_rep: tuple
    summary: dict = field(default=None)

    def __post_init__(self):
        if self.summary is None:
            object.__setattr__(self, "summary", summarize(self.per_rep))


def summarize(per_rep):
    """Mean and sd (ddof=1; 0 for a single replication) of each metric over the
    successful replications, reduced in replication order."""
    ok = sorted((r for r in per_rep if not r.failed), key=lambda r: r.rep)
    out = {"n_ok": len(ok), "n_failed": len(per_rep) - len(ok)}
    for metric in ("median_ape", "mse_beta"):
        vals = np.array([getattr(r, metric) for r in ok], dtype=float)
        if vals.size == 0:
            out[metric] = (np.nan, np.nan)
        else:
            sd = float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0
            out[metric] = (float(np.mean(vals)), sd)
    return out


def rep_seed_sequence(seed, rep):
    return np.random.SeedSequence(entropy=seed, spawn_key=(rep,))


def run_replication(spec: SimulationSpec, rep, grid=None, cfg=SolverConfig(),
                    method="wmcen"):
    ss = rep_seed_sequence(spec.seed, rep)
    data_ss, cv_ss = ss.spawn(2)
    train, test, b_true = generate_dataset(spec, np.random.default_rng(data_ss))
    cv_seed = int(cv_ss.generate_state(1)[0])
    make_grid = grid if grid is not None else default_study_grid(method)
    try:
        tgrid = make_grid(train, cv_seed) if callable(make_grid) else make_grid
        if method == "wlasso":
            tgrid = TuningGrid(tgrid.lambdas, (0.0,), (1,), folds=tgrid.folds,
                               criterion=tgrid.criterion, seed=tgrid.seed)
        hp, _ = grid_search(train, tgrid, cfg)
        res = fit(train, hp, cfg)
    except WMCENError as exc:
        log.warning("replication %d failed: %s", rep, exc)
        return RepResult(rep, np.nan, np.nan, 0, np.nan, np.nan, False, str(exc) or "failed")
    pred = predict(res.b, res.intercepts, test.x)
    return RepResult(rep, hp.lam, hp.gamma, hp.k, median_ape(test.y, pred),
                     mse_beta(res.b, b_true), res.converged)


def run_study(spec: SimulationSpec, grid=None, cfg=SolverConfig(), method="wmcen",
              n_jobs=1):
    """Run ``spec.reps`` replications.

    ``grid`` is a :class:`TuningGrid` or a callable ``(train, seed) -> TuningGrid``;
    by default the 10 x 10 relative grid with k in {2, 3}, or a lambda-only
    grid for ``method="wlasso"`` (gamma = 0, k = 1).
    """
    if method not in ("wmcen", "wlasso"):
        raise ValidationError(f"unknown method {method!r}")
    if n_jobs == 1:
        per_rep = [run_replication(spec, r, grid, cfg, method) for r in range(spec.reps)]
    else:
        from joblib import Parallel, delayed
        per_rep = Parallel(n_jobs=n_jobs)(
            delayed(run_replication)(spec, r, grid, cfg, method) for r in range(spec.reps))
    per_rep = tuple(sorted(per_rep, key=lambda r: r.rep))
    return StudyResult(spec, method, per_rep)
