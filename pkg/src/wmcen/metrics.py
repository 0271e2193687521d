"""Evaluation metrics for predictions and coefficient estimates."""

import numpy as np

from .core import ValidationError


def median_ape(y_true, y_pred):
    """Median over all cells of the absolute prediction error."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValidationError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    return float(np.median(np.abs(y_true - y_pred)))


def mean_squared_error(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape:
        raise ValidationError(f"shape mismatch: {y_true.shape} vs {y_pred.shape}")
    return float(np.mean((y_true - y_pred) ** 2))


def mse_beta(b_hat, b_true):
    """(1 / (p q)) * sum_s ||beta_hat_s - beta_s||^2."""
    b_hat = np.asarray(b_hat, dtype=float)
    b_true = np.asarray(b_true, dtype=float)
    if b_hat.shape != b_true.shape:
        raise ValidationError(f"shape mismatch: {b_hat.shape} vs {b_true.shape}")
    return float(np.sum((b_hat - b_true) ** 2) / b_hat.size)
