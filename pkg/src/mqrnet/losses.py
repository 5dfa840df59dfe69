"""Pinball (checker) losses and the composite multi-quantile objective.

The composite loss averages the pinball loss over a grid of quantile
levels and over samples.  A Huber-smoothed variant replaces the kink at
zero residual with a quadratic of half-width ``eps``:

    smoothed(u) = tau * h(u)        if u >= 0
                  (1 - tau) * h(-u) if u <  0
    h(v) = v^2 / (2 eps)  for v <= eps,  v - eps/2  otherwise

which is continuously differentiable and coincides with the raw checker up
to an additive tau*eps/2 (resp. (1-tau)*eps/2) outside the quadratic core.

Gradients are taken with respect to the predictions.  At exactly zero
residual the unsmoothed loss has a subgradient interval; this module picks
0, so a perfect fit reports a zero gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError


@dataclass(frozen=True)
class QuantileGrid:
    """Strictly increasing quantile levels, each in (0, 1)."""

    taus: np.ndarray

    def __init__(self, taus):
        taus = np.array(taus, dtype=np.float64)  # private copy: flags are frozen below
        if taus.ndim != 1 or taus.size < 1:
            raise ValueError("quantile grid must be a non-empty 1-D sequence")
        if np.any(taus <= 0.0) or np.any(taus >= 1.0):
            raise ValueError("quantile levels must lie strictly inside (0, 1)")
        if np.any(np.diff(taus) <= 0.0):
            raise ValueError("quantile levels must be strictly increasing")
        taus.flags.writeable = False
        object.__setattr__(self, "taus", taus)

    def __len__(self) -> int:
        return int(self.taus.size)

    def __iter__(self):
        return iter(self.taus)


def default_grid() -> QuantileGrid:
    """Nineteen levels 0.05, 0.10, ..., 0.95."""
    return QuantileGrid(np.arange(1, 20) * 0.05)


def checker(u, tau: float):
    """Asymmetric absolute loss: tau*u for u >= 0 else (tau-1)*u."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    u = np.asarray(u, dtype=np.float64)
    out = np.where(u >= 0.0, tau * u, (tau - 1.0) * u)
    return out if out.ndim else float(out)


def huber_checker(u, tau: float, eps: float):
    """Huber-smoothed checker, continuously differentiable in u."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau}")
    _check_eps(eps)
    u = np.asarray(u, dtype=np.float64)
    a = np.abs(u)
    h = np.where(a <= eps, a * a / (2.0 * eps), a - 0.5 * eps)
    out = np.where(u >= 0.0, tau * h, (1.0 - tau) * h)
    return out if out.ndim else float(out)


def _checker_dpred(resid: np.ndarray, taus: np.ndarray, eps: float | None) -> np.ndarray:
    """d(checker(resid, tau))/d(pred), elementwise; resid = y - pred."""
    if eps is None:
        pos = -taus * (resid > 0.0)
        neg = (1.0 - taus) * (resid < 0.0)
        return pos + neg
    _check_eps(eps)
    a = np.abs(resid)
    hprime = np.where(a <= eps, a / eps, 1.0)  # derivative of h in |resid|
    scale = np.where(resid >= 0.0, taus, 1.0 - taus)
    return -scale * hprime * np.sign(resid)


def composite_loss(pred: np.ndarray, y: np.ndarray, grid: QuantileGrid,
                   smoothing: float | None = None) -> float:
    """Mean pinball loss over all samples and all grid levels.

    ``pred`` is (N, T) with column k the prediction at level taus[k]; ``y``
    has length N.  With ``smoothing`` the Huber-smoothed checker is used.
    """
    pred, y, taus = _check_composite_shapes(pred, y, grid)
    resid = y[:, None] - pred
    if smoothing is None:
        vals = np.where(resid >= 0.0, taus * resid, (taus - 1.0) * resid)
    else:
        _check_eps(smoothing)
        a = np.abs(resid)
        h = np.where(a <= smoothing, a * a / (2.0 * smoothing), a - 0.5 * smoothing)
        vals = np.where(resid >= 0.0, taus * h, (1.0 - taus) * h)
    return float(np.mean(vals))


def composite_loss_grad(pred: np.ndarray, y: np.ndarray, grid: QuantileGrid,
                        smoothing: float | None = None) -> np.ndarray:
    """Gradient of :func:`composite_loss` with respect to ``pred`` (N, T)."""
    pred, y, taus = _check_composite_shapes(pred, y, grid)
    resid = y[:, None] - pred
    return _checker_dpred(resid, taus, smoothing) / pred.size


def per_tau_loss(pred: np.ndarray, y: np.ndarray, tau,
                 smoothing: float | None = None) -> float:
    """Single-level pinball loss, with tau either a scalar or per-sample.

    The per-sample form is what the tiled-design-matrix training path
    needs: each prediction is paired with the level it was queried at.
    """
    pred = np.asarray(pred, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if pred.shape != y.shape:
        raise ShapeError(f"pred has shape {pred.shape}, y has shape {y.shape}")
    taus = np.broadcast_to(np.asarray(tau, dtype=np.float64), pred.shape)
    if np.any(taus <= 0.0) or np.any(taus >= 1.0):
        raise ValueError("tau values must lie in (0, 1)")
    resid = y - pred
    if smoothing is None:
        vals = np.where(resid >= 0.0, taus * resid, (taus - 1.0) * resid)
    else:
        _check_eps(smoothing)
        a = np.abs(resid)
        h = np.where(a <= smoothing, a * a / (2.0 * smoothing), a - 0.5 * smoothing)
        vals = np.where(resid >= 0.0, taus * h, (1.0 - taus) * h)
    return float(np.mean(vals))


def per_tau_loss_grad(pred: np.ndarray, y: np.ndarray, tau,
                      smoothing: float | None = None) -> np.ndarray:
    """Gradient of :func:`per_tau_loss` with respect to ``pred``."""
    pred = np.asarray(pred, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if pred.shape != y.shape:
        raise ShapeError(f"pred has shape {pred.shape}, y has shape {y.shape}")
    taus = np.broadcast_to(np.asarray(tau, dtype=np.float64), pred.shape)
    resid = y - pred
    return _checker_dpred(resid, taus, smoothing) / pred.size


def _check_composite_shapes(pred, y, grid: QuantileGrid):
    pred = np.asarray(pred, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if pred.ndim != 2:
        raise ShapeError(f"pred must be (N, T), got ndim={pred.ndim}")
    if y.ndim != 1 or y.shape[0] != pred.shape[0]:
        raise ShapeError(f"y has shape {y.shape}, pred has shape {pred.shape}")
    if pred.shape[1] != len(grid):
        raise ShapeError(f"pred has {pred.shape[1]} columns but grid has {len(grid)} levels")
    return pred, y, grid.taus


def _check_eps(eps: float):
    if not eps > 0.0:
        raise ValueError(f"smoothing width must be positive, got {eps}")
