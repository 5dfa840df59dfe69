"""Self-contained correctness checks: sorted-loss dominance and
finite-difference gradient verification.

These back the ``sort-check`` CLI subcommand and the acceptance suite.
The finite-difference oracle knows nothing about the analytic backward
passes it is checking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import QuantileGrid, composite_loss, composite_loss_grad
from .nn import ACTIVATIONS, DenseLayer, MonotoneDenseLayer
from .rng import Rng
from .sorting import hard_sort, hard_sort_backward, soft_sort, soft_sort_backward, soft_sort_with_blocks


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def rel_err(approx: np.ndarray, exact: np.ndarray) -> float:
    """Worst-case elementwise relative error with a unit floor."""
    approx = np.asarray(approx, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    denom = np.maximum(1.0, np.maximum(np.abs(approx), np.abs(exact)))
    return float(np.max(np.abs(approx - exact) / denom))


def finite_difference_grad(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences of a scalar function, elementwise in x."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad


def check_sorted_loss_dominance(seed: int = 0, n_pairs: int = 10_000, t: int = 19) -> CheckResult:
    """Sorting a prediction vector never increases the composite pinball
    loss, and strictly decreases it whenever it changes the vector."""
    rng = Rng(seed)
    grid = QuantileGrid((np.arange(t) + 1.0) / (t + 1.0))
    taus = grid.taus
    weak_violations = 0
    strict_violations = 0
    changed = 0
    worst = 0.0
    for _ in range(n_pairs):
        pred = rng.normal(t)
        y = float(rng.normal(1)[0] * 2.0)
        srt = np.sort(pred)
        unsorted_loss = float(np.sum(_row_pinball(y, pred, taus)))
        sorted_loss = float(np.sum(_row_pinball(y, srt, taus)))
        worst = max(worst, sorted_loss - unsorted_loss)
        if sorted_loss > unsorted_loss + 1e-12:
            weak_violations += 1
        if not np.array_equal(srt, pred):
            changed += 1
            if not sorted_loss < unsorted_loss:
                strict_violations += 1
    passed = weak_violations == 0 and strict_violations == 0 and changed > 0
    return CheckResult(
        "sorted-loss-dominance",
        passed,
        f"{n_pairs} pairs, {changed} with nontrivial sort, "
        f"{weak_violations} dominance violations, {strict_violations} strictness violations, "
        f"max(sorted - unsorted) = {worst:.3e}",
    )


def _row_pinball(y: float, pred: np.ndarray, taus: np.ndarray) -> np.ndarray:
    resid = y - pred
    return np.where(resid >= 0.0, taus * resid, (taus - 1.0) * resid)


def check_layer_gradients(seed: int = 0, n_configs: int = 100, tol: float = 1e-4) -> CheckResult:
    """Every layer kind and activation against central finite differences.

    Checks input, weight, and bias gradients of a random linear functional
    of the layer output.  ReLU configurations are nudged away from the
    kink so the finite-difference oracle is valid.
    """
    rng = Rng(seed)
    worst = 0.0
    worst_desc = ""
    kinds = [("dense", None), ("monotone-masked", "first"), ("monotone-full", "all")]
    act_names = ["tanh", "sigmoid", "relu", "identity"]
    config = 0
    while config < n_configs:
        act = ACTIVATIONS[act_names[config % len(act_names)]]
        kind, mask_kind = kinds[(config // len(act_names)) % len(kinds)]
        n_in = int(rng.integers(1, 5))
        n_out = int(rng.integers(1, 5))
        batch = int(rng.integers(1, 4))
        w = rng.normal(n_out * n_in).reshape(n_out, n_in) * 0.7
        b = rng.normal(n_out) * 0.3
        x = rng.normal(batch * n_in).reshape(batch, n_in)
        c = rng.normal(batch * n_out).reshape(batch, n_out)
        if kind == "dense":
            make = lambda W, B: DenseLayer(W.copy(), B.copy(), act)
        elif mask_kind == "first":
            mask = np.zeros(n_in, dtype=bool)
            mask[0] = True
            make = lambda W, B, m=mask: MonotoneDenseLayer(W.copy(), B.copy(), act, mask=m)
        else:
            make = lambda W, B: MonotoneDenseLayer(W.copy(), B.copy(), act)
        if act.name == "relu":
            pre = x @ make(w, b).effective_weights().T + b
            if np.min(np.abs(pre)) < 1e-2:  # too close to the kink: resample
                continue
        config += 1

        layer = make(w, b)
        layer.forward(x)
        grad_in = layer.backward(c)

        fd_x = finite_difference_grad(lambda xv: float(np.sum(c * make(w, b).forward(xv))), x.copy())
        fd_w = finite_difference_grad(lambda wv: float(np.sum(c * make(wv, b).forward(x))), w.copy())
        fd_b = finite_difference_grad(lambda bv: float(np.sum(c * make(w, bv).forward(x))), b.copy())
        for name, got, want in (("input", grad_in, fd_x),
                                ("weights", layer.grad_weights, fd_w),
                                ("bias", layer.grad_bias, fd_b)):
            e = rel_err(got, want)
            if e > worst:
                worst = e
                worst_desc = f"{kind}/{act.name}/{name}"
    return CheckResult(
        "layer-gradients",
        worst < tol,
        f"{n_configs} configs, worst rel err {worst:.3e} ({worst_desc}), tol {tol:g}",
    )


def check_sort_gradients(seed: int = 0, n_configs: int = 40, tol: float = 1e-4) -> CheckResult:
    """Hard (distinct entries) and soft (eps 0.1 and 1.0) sort backward
    passes against finite differences of a random linear functional."""
    rng = Rng(seed)
    worst = 0.0
    worst_desc = ""
    for i in range(n_configs):
        t = int(rng.integers(2, 20))
        x = rng.normal(t) * 2.0
        c = rng.normal(t)
        # hard mode: keep entries well separated relative to the step size
        if np.min(np.diff(np.sort(x))) > 1e-4:
            _, perm = hard_sort(x)
            got = hard_sort_backward(c, perm)
            fd = finite_difference_grad(lambda xv: float(c @ hard_sort(xv)[0]), x.copy())
            e = rel_err(got, fd)
            if e > worst:
                worst, worst_desc = e, f"hard/t={t}"
        for eps in (0.1, 1.0):
            _, blocks = soft_sort_with_blocks(x, eps)
            got = soft_sort_backward(c, blocks)
            fd = finite_difference_grad(lambda xv: float(c @ soft_sort(xv, eps)), x.copy())
            e = rel_err(got, fd)
            if e > worst:
                worst, worst_desc = e, f"soft eps={eps}/t={t}"
    return CheckResult(
        "sort-gradients",
        worst < tol,
        f"{n_configs} configs x (hard, soft@0.1, soft@1.0), worst rel err {worst:.3e} ({worst_desc}), tol {tol:g}",
    )


def check_smoothed_loss_gradient(seed: int = 0, n_configs: int = 30, tol: float = 1e-4) -> CheckResult:
    """Huber-smoothed composite loss gradient against finite differences."""
    rng = Rng(seed)
    worst = 0.0
    for _ in range(n_configs):
        n = int(rng.integers(1, 6))
        t = int(rng.integers(1, 8))
        taus = np.sort(rng.uniform(0.02, 0.98, t)) if t > 1 else np.array([0.5])
        if np.any(np.diff(taus) <= 0):
            continue
        grid = QuantileGrid(taus)
        pred = rng.normal(n * t).reshape(n, t)
        y = rng.normal(n)
        eps = float(rng.uniform(0.05, 0.5))
        got = composite_loss_grad(pred, y, grid, smoothing=eps)
        fd = finite_difference_grad(lambda p: composite_loss(p, y, grid, smoothing=eps), pred.copy())
        worst = max(worst, rel_err(got, fd))
    return CheckResult(
        "smoothed-loss-gradient",
        worst < tol,
        f"{n_configs} configs, worst rel err {worst:.3e}, tol {tol:g}",
    )


def run_all_checks(seed: int = 0) -> list[CheckResult]:
    return [
        check_sorted_loss_dominance(seed),
        check_layer_gradients(seed + 1),
        check_sort_gradients(seed + 2),
        check_smoothed_loss_gradient(seed + 3),
    ]
