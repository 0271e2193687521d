"""K-fold cross-validation over (lambda, gamma, k)."""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from .core import Dataset, Hyperparams, SolverConfig, ValidationError, WMCENError
from .metrics import mean_squared_error, median_ape
from .pairwise import build_pairwise
from .solver import fit, predict

CRITERIA = ("median-ape", "mean-squared")


class TuningError(WMCENError):
    pass


_SCORERS = {"median-ape": median_ape, "mean-squared": mean_squared_error}


@dataclass(frozen=True)
class TuningGrid:
    lambdas: tuple
    gammas: tuple = (0.0,)
    ks: tuple = (1,)
    folds: int = 5
    criterion: str = "median-ape"
    seed: int = 0

    def __post_init__(self):
        for name in ("lambdas", "gammas", "ks"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValidationError(f"{name} must be non-empty")
            object.__setattr__(self, name, vals)
        if any(lam <= 0 for lam in self.lambdas):
            raise ValidationError("lambdas must be positive")
        if any(g < 0 for g in self.gammas):
            raise ValidationError("gammas must be non-negative")
        if any(int(k) != k or k < 1 for k in self.ks):
            raise ValidationError("ks must be positive integers")
        if self.folds < 2:
            raise ValidationError("need at least 2 folds")
        if self.criterion not in CRITERIA:
            raise ValidationError(f"criterion must be one of {CRITERIA}")

    def check_against(self, d: Dataset):
        if self.folds > d.n:
            raise ValidationError(f"{self.folds} folds exceed n = {d.n}")
        if max(self.ks) > d.q:
            raise ValidationError(f"k = {max(self.ks)} exceeds q = {d.q}")

    def candidates(self, epsilon=1e-6):
        return [Hyperparams(lam, gamma, k, epsilon)
                for lam, gamma, k in itertools.product(self.lambdas, self.gammas, self.ks)]


def kfold_split(n, folds, seed=0):
    """Shuffle 0..n-1 and cut into ``folds`` near-equal parts (larger first)."""
    if not 2 <= folds <= n:
        raise ValidationError(f"folds must be in [2, n={n}], got {folds}")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(perm, folds)]


def lambda_max(d: Dataset):
    """Smallest lambda at which B = 0 satisfies the L1 optimality conditions of
    the gamma = 0 problem: max over (s, j) of |sum_o r_oj sign(g_os)|."""
    x = d.x - d.x.mean(axis=0)
    ps = build_pairwise(Dataset(x, d.y))
    return float(np.max(np.abs(ps.r.T @ np.sign(ps.g))))


def default_grid(d: Dataset, n_points=10, ks=None, folds=5, criterion="median-ape", seed=0):
    """Log-spaced grids over [1e-3, 1e1] times ``lambda_max`` for both weights."""
    scale = lambda_max(d)
    pts = tuple(scale * np.logspace(-3, 1, n_points))
    if ks is None:
        ks = tuple(k for k in (2, 3) if k <= d.q) or (1,)
    return TuningGrid(pts, pts, tuple(ks), folds=folds, criterion=criterion, seed=seed)


def _fold_score(d, hp, cfg, train, test, scorer):
    try:
        res = fit(d.subset(train), hp, cfg)
    except (WMCENError, np.linalg.LinAlgError, FloatingPointError) as exc:
        warnings.warn(f"fold fit failed for {hp}: {exc}", RuntimeWarning, stacklevel=2)
        return np.inf
    pred = predict(res.b, res.intercepts, d.x[test])
    return scorer(d.y[test], pred)


def cv_score(d: Dataset, hp: Hyperparams, cfg: SolverConfig, folds, criterion="median-ape"):
    """Mean held-out criterion over the given folds (a list of test index arrays)."""
    scorer = _SCORERS[criterion]
    all_idx = np.arange(d.n)
    scores = []
    for test in folds:
        train = np.setdiff1d(all_idx, test)
        scores.append(_fold_score(d, hp, cfg, train, test, scorer))
    return float(np.mean(scores))


def _path_scores(d, lams, gamma, k, cfg, folds, criterion, epsilon):
    """CV scores along a descending lambda path, warm-starting each fit from
    the previous lambda on the same fold."""
    scorer = _SCORERS[criterion]
    all_idx = np.arange(d.n)
    out = np.zeros((len(lams), len(folds)))
    for f, test in enumerate(folds):
        train = np.setdiff1d(all_idx, test)
        sub = d.subset(train)
        b_prev = None
        for i, lam in enumerate(lams):
            hp = Hyperparams(lam, gamma, k, epsilon)
            try:
                res = fit(sub, hp, cfg, b_init=b_prev)
            except (WMCENError, np.linalg.LinAlgError, FloatingPointError) as exc:
                warnings.warn(f"fold fit failed for {hp}: {exc}", RuntimeWarning, stacklevel=2)
                out[i, f] = np.inf
                b_prev = None
                continue
            b_prev = res.b
            out[i, f] = scorer(d.y[test], predict(res.b, res.intercepts, d.x[test]))
    return out.mean(axis=1)


def grid_search(d: Dataset, grid: TuningGrid, cfg: SolverConfig = SolverConfig(),
                epsilon=1e-6, n_jobs=1, warm_start=True):
    """Pick the candidate with the lowest CV score.

    With ``warm_start`` each (gamma, k) pair is swept along lambda from large to
    small, starting every fit from the previous solution on the same fold;
    otherwise every candidate is fit from the default start via :func:`cv_score`.
    Exact ties prefer larger lambda, then larger gamma, then smaller k.
    Returns the chosen :class:`Hyperparams` and the full score table as a list
    of dicts with keys ``lam, gamma, k, score``.
    """
    grid.check_against(d)
    folds = kfold_split(d.n, grid.folds, grid.seed)
    cands = grid.candidates(epsilon)
    if warm_start:
        lams = sorted(set(grid.lambdas))
        pairs = list(itertools.product(dict.fromkeys(grid.gammas), dict.fromkeys(grid.ks)))
        paths = Parallel(n_jobs=n_jobs)(
            delayed(_path_scores)(d, lams, gamma, k, cfg, folds, grid.criterion, epsilon)
            for gamma, k in pairs)
        lookup = {}
        for (gamma, k), path in zip(pairs, paths):
            for lam, sc in zip(lams, path):
                lookup[(lam, gamma, k)] = float(sc)
        scores = [lookup[(hp.lam, hp.gamma, hp.k)] for hp in cands]
    else:
        scores = Parallel(n_jobs=n_jobs)(
            delayed(cv_score)(d, hp, cfg, folds, grid.criterion) for hp in cands)
    table = [dict(lam=hp.lam, gamma=hp.gamma, k=hp.k, score=s) for hp, s in zip(cands, scores)]
    if all(np.isinf(s) for s in scores):
        raise TuningError("every candidate failed to fit")
    order = sorted(range(len(cands)),
                   key=lambda i: (scores[i], -cands[i].lam, -cands[i].gamma, cands[i].k))
    return cands[order[0]], table
