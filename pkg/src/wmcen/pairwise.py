"""Pairwise-difference form of the rank (Wilcoxon) loss.

The sum over pairs i < j of |e_i - e_j| equals an L1 regression of the
response differences ``g = y_i - y_j`` on the covariate differences
``r = x_i - x_j``, which is what the MM solver works with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, ValidationError, _frozen


@dataclass(frozen=True)
class PairwiseSystem:
    r: np.ndarray           # m x p
    g: np.ndarray           # m x q
    pair_index: np.ndarray  # m x 2, rows (i, j) with i < j

    @property
    def m(self):
        return self.r.shape[0]

    def residual_differences(self, b):
        """``g - r @ b`` for a p x q coefficient matrix."""
        b = np.asarray(b, dtype=float)
        if b.ndim == 1:
            b = b[:, None]
        if b.shape != (self.r.shape[1], self.g.shape[1]):
            raise ValidationError(
                f"coefficient matrix has shape {b.shape}, expected "
                f"{(self.r.shape[1], self.g.shape[1])}")
        return self.g - self.r @ b


def pair_indices(n):
    if n < 2:
        raise ValidationError(f"need n >= 2 to form pairs, got n = {n}")
    i, j = np.triu_indices(n, k=1)
    return np.column_stack([i, j])


def build_pairwise(d: Dataset) -> PairwiseSystem:
    idx = pair_indices(d.n)
    i, j = idx[:, 0], idx[:, 1]
    return PairwiseSystem(
        r=_frozen(d.x[i] - d.x[j]),
        g=_frozen(d.y[i] - d.y[j]),
        pair_index=_frozen(idx, dtype=int),
    )
