"""Sorting as a parameter-free network layer.

Two modes, both ascending:

* hard sort: exact sort; the backward pass routes gradients through the
  sorting permutation (the Jacobian of a locally constant permutation).
* soft sort: the Euclidean-projection relaxation of sorting.  The input is
  projected implicitly onto the permutohedron of its own values by running
  pool-adjacent-violators isotonic regression of ``anchor - sorted(x)``
  against a rising anchor sequence ``(1, ..., T) / epsilon``.  As
  ``epsilon -> 0`` the result converges to the hard sort; the backward
  pass is a block-averaging operation in O(T).

The relaxation is usually stated for descending order; this module works
on the ascending orientation directly (rising anchor, nondecreasing
isotonic fit), which is equivalent to negating, sorting descending, and
negating back.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, StateError


@dataclass(frozen=True)
class SortMode:
    """Sorting flavor for the output layer: hard, or soft with strength epsilon."""

    kind: str  # "hard" | "soft"
    epsilon: float = 0.1

    def __post_init__(self):
        if self.kind not in ("hard", "soft"):
            raise ValueError(f"sort mode must be 'hard' or 'soft', got {self.kind!r}")
        if self.kind == "soft" and not self.epsilon > 0.0:
            raise ValueError(f"soft sort needs epsilon > 0, got {self.epsilon}")


HARD = SortMode("hard")


@dataclass(frozen=True)
class PavBlocks:
    """Isotonic-fit block structure from one soft-sort forward pass.

    ``starts[b]:ends[b]`` index contiguous output positions pooled into
    block b; ``means`` are the fit values, strictly increasing across
    blocks; ``perm`` is the ascending sorting permutation of the input.
    """

    starts: np.ndarray
    ends: np.ndarray
    means: np.ndarray
    perm: np.ndarray

    @property
    def n(self) -> int:
        return int(self.perm.size)


def hard_sort(x) -> tuple[np.ndarray, np.ndarray]:
    """Ascending sort. Returns (sorted values, permutation).

    ``perm[j]`` is the input position that landed at output position j;
    ties keep their original relative order.
    """
    x = _as_vector(x)
    perm = np.argsort(x, kind="stable")
    return x[perm], perm


def hard_sort_backward(grad_out, perm) -> np.ndarray:
    """Scatter output-side gradients back to input positions."""
    grad_out = _as_vector(grad_out)
    perm = np.asarray(perm)
    if grad_out.shape != perm.shape:
        raise ShapeError(f"gradient has length {grad_out.size}, permutation {perm.size}")
    grad_in = np.empty_like(grad_out)
    grad_in[perm] = grad_out
    return grad_in


def soft_sort(x, epsilon: float) -> np.ndarray:
    """Differentiable ascending sort; see module docstring."""
    out, _ = soft_sort_with_blocks(x, epsilon)
    return out


def soft_sort_with_blocks(x, epsilon: float) -> tuple[np.ndarray, PavBlocks]:
    """Soft sort plus the block structure needed for the backward pass."""
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    x = _as_vector(x)
    n = x.size
    perm = np.argsort(x, kind="stable")
    w = x[perm]
    anchor = np.arange(1.0, n + 1.0) / epsilon
    starts, ends, fit_means = _pav_nondecreasing(anchor - w)

    out = np.empty(n)
    for s, e in zip(starts, ends):
        # out = anchor - fit, computed per block as (anchor - mean(anchor)) +
        # mean(w): exact for singleton blocks, cancellation-free otherwise.
        out[s:e] = (anchor[s:e] - anchor[s:e].mean()) + w[s:e].mean()
    np.maximum.accumulate(out, out=out)  # 1-ulp boundary guard; no-op in exact arithmetic
    return out, PavBlocks(starts=starts, ends=ends, means=fit_means, perm=perm)


def soft_sort_backward(grad_out, blocks: PavBlocks) -> np.ndarray:
    """Vector-Jacobian product of the soft sort, O(T).

    Within a block the Jacobian is a constant averaging matrix; across the
    sorting permutation it is a scatter.
    """
    grad_out = _as_vector(grad_out)
    if grad_out.size != blocks.n:
        raise StateError(
            f"gradient has length {grad_out.size} but blocks describe {blocks.n} positions; "
            "pass the blocks returned by the matching forward call"
        )
    pooled = np.empty(blocks.n)
    for s, e in zip(blocks.starts, blocks.ends):
        pooled[s:e] = grad_out[s:e].mean()
    grad_in = np.empty(blocks.n)
    grad_in[blocks.perm] = pooled
    return grad_in


def sort_rows(pred: np.ndarray, mode: SortMode):
    """Apply the chosen sort to each row of an (N, T) matrix.

    Returns (sorted matrix, backward state): an (N, T) permutation array in
    hard mode, a list of PavBlocks in soft mode.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if mode.kind == "hard":
        perms = np.argsort(pred, axis=1, kind="stable")
        return np.take_along_axis(pred, perms, axis=1), perms
    out = np.empty_like(pred)
    state = []
    for i in range(pred.shape[0]):
        out[i], blocks = soft_sort_with_blocks(pred[i], mode.epsilon)
        state.append(blocks)
    return out, state


def sort_rows_backward(grad_out: np.ndarray, mode: SortMode, state) -> np.ndarray:
    """Backward companion of :func:`sort_rows`."""
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if mode.kind == "hard":
        grad_in = np.empty_like(grad_out)
        np.put_along_axis(grad_in, state, grad_out, axis=1)
        return grad_in
    grad_in = np.empty_like(grad_out)
    for i, blocks in enumerate(state):
        grad_in[i] = soft_sort_backward(grad_out[i], blocks)
    return grad_in


def _pav_nondecreasing(y: np.ndarray):
    """Pool-adjacent-violators fit of y under v[0] <= v[1] <= ... <= v[n-1].

    Returns (starts, ends, means) of the pooled blocks; adjacent blocks are
    merged only on strict violations, so generic inputs keep singletons.
    """
    n = y.size
    starts = np.empty(n, dtype=np.intp)
    sums = np.empty(n)
    counts = np.empty(n, dtype=np.intp)
    means = np.empty(n)
    top = 0
    for i in range(n):
        starts[top] = i
        sums[top] = y[i]
        counts[top] = 1
        means[top] = y[i]
        top += 1
        while top >= 2 and means[top - 2] > means[top - 1]:
            sums[top - 2] += sums[top - 1]
            counts[top - 2] += counts[top - 1]
            means[top - 2] = sums[top - 2] / counts[top - 2]
            top -= 1
    starts = starts[:top].copy()
    ends = starts + counts[:top]
    return starts, ends, means[:top].copy()


def _as_vector(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got ndim={x.ndim}")
    return x
