"""Evaluation metrics for multi-quantile predictions."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .losses import QuantileGrid, composite_loss


def rmse_vs_ideal(pred: np.ndarray, ideal: np.ndarray) -> float:
    """Root mean squared gap to the true conditional quantiles, over all
    N*T entries.  Only meaningful for synthetic data where the true
    quantiles are known."""
    pred = np.asarray(pred, dtype=np.float64)
    ideal = np.asarray(ideal, dtype=np.float64)
    if pred.shape != ideal.shape:
        raise ShapeError(f"pred {pred.shape} and ideal {ideal.shape} differ")
    return float(np.sqrt(np.mean((pred - ideal) ** 2)))


def observed_frequency(pred: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Per-level fraction of targets at or below the predicted quantile.

    Ties count as covered (a prediction exactly equal to the target lies
    on the quantile), i.e. the step function is 1 at zero.
    """
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if pred.ndim != 2 or y.shape != (pred.shape[0],):
        raise ShapeError(f"pred {pred.shape} and y {y.shape} are inconsistent")
    return np.mean(pred >= y[:, None], axis=0)


def overall_reliability(freqs: np.ndarray, grid: QuantileGrid) -> float:
    """Mean absolute gap between observed frequencies and nominal levels."""
    freqs = np.asarray(freqs, dtype=np.float64)
    if freqs.shape != (len(grid),):
        raise ShapeError(f"got {freqs.shape[0] if freqs.ndim else 0} frequencies for {len(grid)} levels")
    return float(np.mean(np.abs(freqs - grid.taus)))


@dataclass(frozen=True)
class EvalResult:
    """One model's test-set scores."""

    overall_reliability: float
    per_tau_observed_freq: np.ndarray
    test_pinball: float
    rmse: float | None = None  # synthetic data only

    def to_json(self) -> str:
        return json.dumps(
            {
                "rmse": self.rmse,
                "overall_reliability": self.overall_reliability,
                "per_tau_observed_freq": [float(v) for v in self.per_tau_observed_freq],
                "test_pinball": self.test_pinball,
            },
            sort_keys=True,
        )

    @staticmethod
    def csv_header() -> list[str]:
        return ["rmse", "reliability", "test_pinball"]

    def to_csv_row(self) -> list[str]:
        return ["" if self.rmse is None else repr(self.rmse),
                repr(self.overall_reliability),
                repr(self.test_pinball)]


def evaluate_predictions(pred: np.ndarray, y: np.ndarray, grid: QuantileGrid,
                         ideal: np.ndarray | None = None) -> EvalResult:
    freqs = observed_frequency(pred, y)
    return EvalResult(
        overall_reliability=overall_reliability(freqs, grid),
        per_tau_observed_freq=freqs,
        test_pinball=composite_loss(pred, y, grid),
        rmse=None if ideal is None else rmse_vs_ideal(pred, ideal),
    )
