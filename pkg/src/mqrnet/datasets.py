"""Synthetic benchmark data, ideal quantiles, splitting, and CSV ingestion.

Three example functions generate (X, y) pairs with additive noise drawn
from one of the benchmark error laws:

* example 0: y = sin(2 x1) + 2 exp(-16 x2^2) + 0.5 eps,   x1, x2 ~ N(0, 1)
* example 1: y = (1 - x - 2 x^2) exp(-x^2 / 2) + ((1 + 0.2 x) / 5) eps,
             x ~ U(-4, 4) -- the x-dependent scale makes this one
             heteroscedastic
* example 2: y = 40 exp{(x1-.5)^2 + (x2-.5)^2}
                 / (exp{8[(x1-.2)^2 + (x2-.7)^2]} + exp{8[(x1-.7)^2 + (x2-.7)^2]})
                 + eps,   x1, x2 ~ U(0, 1)

Because the noise law is known, the true conditional quantiles are
available in closed form: substitute the law's tau-quantile for eps.
These "ideal" quantiles are the ground truth for RMSE evaluation.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .distributions import ErrorDistribution, distribution_name
from .errors import CsvFormatError, ShapeError
from .losses import QuantileGrid
from .rng import Rng


@dataclass(frozen=True)
class Dataset:
    """Immutable (X, y) with optional per-sample ideal quantiles."""

    X: np.ndarray
    y: np.ndarray
    ideal: np.ndarray | None = None
    grid: QuantileGrid | None = None  # levels of the ideal columns
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.X.ndim != 2 or self.y.ndim != 1 or self.y.shape[0] != self.X.shape[0]:
            raise ShapeError(f"X {self.X.shape} and y {self.y.shape} are inconsistent")
        if self.ideal is not None and self.ideal.shape[0] != self.X.shape[0]:
            raise ShapeError("ideal quantile rows must match the sample count")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


class ExampleFunction:
    """One synthetic generator: input law, noise-free surface, noise scale."""

    def __init__(self, kind: int):
        if kind not in (0, 1, 2):
            raise ValueError(f"example must be 0, 1 or 2, got {kind}")
        self.kind = kind
        self.n_features = (2, 1, 2)[kind]

    def draw_inputs(self, rng: Rng, n: int) -> np.ndarray:
        if self.kind == 0:
            return rng.normal(2 * n).reshape(n, 2)
        if self.kind == 1:
            return rng.uniform(-4.0, 4.0, n).reshape(n, 1)
        return rng.uniform(0.0, 1.0, 2 * n).reshape(n, 2)

    def noise_free(self, X: np.ndarray) -> np.ndarray:
        X = self._check(X)
        if self.kind == 0:
            return np.sin(2.0 * X[:, 0]) + 2.0 * np.exp(-16.0 * X[:, 1] ** 2)
        if self.kind == 1:
            x = X[:, 0]
            return (1.0 - x - 2.0 * x * x) * np.exp(-0.5 * x * x)
        x1, x2 = X[:, 0], X[:, 1]
        num = 40.0 * np.exp((x1 - 0.5) ** 2 + (x2 - 0.5) ** 2)
        den = (np.exp(8.0 * ((x1 - 0.2) ** 2 + (x2 - 0.7) ** 2))
               + np.exp(8.0 * ((x1 - 0.7) ** 2 + (x2 - 0.7) ** 2)))
        return num / den

    def noise_scale(self, X: np.ndarray) -> np.ndarray:
        """Multiplier applied to the error draw, as a function of the input."""
        X = self._check(X)
        if self.kind == 0:
            return np.full(X.shape[0], 0.5)
        if self.kind == 1:
            return (1.0 + 0.2 * X[:, 0]) / 5.0
        return np.ones(X.shape[0])

    def _check(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ShapeError(f"example {self.kind} expects (N, {self.n_features}) inputs, got {X.shape}")
        return X


def generate(example: ExampleFunction | int, dist: ErrorDistribution, n: int, rng: Rng,
             grid: QuantileGrid | None = None) -> Dataset:
    """Draw n samples; inputs first, then the error draws, so the stream
    layout is fixed.  With a grid the ideal quantiles come along."""
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    example = example if isinstance(example, ExampleFunction) else ExampleFunction(example)
    X = example.draw_inputs(rng, n)
    eps = dist.sample(rng, n)
    y = example.noise_free(X) + example.noise_scale(X) * eps
    ideal = ideal_quantiles(example, dist, X, grid) if grid is not None else None
    meta = {"example": example.kind, "dist": distribution_name(dist), "seed": rng.seed, "n": n}
    return Dataset(X=X, y=y, ideal=ideal, grid=grid, meta=meta)


def ideal_quantiles(example: ExampleFunction | int, dist: ErrorDistribution,
                    X: np.ndarray, grid: QuantileGrid) -> np.ndarray:
    """True conditional quantiles: the noise term replaced by its law's
    tau-quantile, scaled like the noise itself.  Rows are nondecreasing
    because every example's noise coefficient is positive."""
    example = example if isinstance(example, ExampleFunction) else ExampleFunction(example)
    base = example.noise_free(X)
    scale = example.noise_scale(X)
    qs = np.array([dist.quantile(t) for t in grid.taus])
    return base[:, None] + scale[:, None] * qs[None, :]


def split(dataset: Dataset, proportions, rng: Rng) -> tuple[Dataset, Dataset, Dataset]:
    """Seeded shuffle, then contiguous cut into len(proportions) parts."""
    props = np.asarray(proportions, dtype=np.float64)
    if abs(props.sum() - 1.0) > 1e-9:
        raise ValueError(f"proportions must sum to 1, got {props.tolist()}")
    order = rng.permutation(dataset.n)
    bounds = np.round(np.cumsum(props) * dataset.n).astype(int)
    bounds[-1] = dataset.n
    parts = []
    lo = 0
    for i, hi in enumerate(bounds):
        if hi <= lo:
            raise ValueError(f"split part {i} would be empty")
        idx = order[lo:hi]
        parts.append(replace(
            dataset,
            X=dataset.X[idx],
            y=dataset.y[idx],
            ideal=None if dataset.ideal is None else dataset.ideal[idx],
            meta={**dataset.meta, "split_part": i, "split_seed": rng.seed},
        ))
        lo = hi
    return tuple(parts)


def save_csv(dataset: Dataset, path, target_name: str = "y"):
    """Comma-separated, header row, '.' decimals; floats are written in
    shortest round-trip form so a write/read cycle is bit-exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(dataset.n_features)] + [target_name])
        for row, target in zip(dataset.X, dataset.y):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(target))])


def load_csv(path, target_column: str = "y", normalize: str | None = None) -> Dataset:
    """Read a numeric CSV with a header row.

    Features are every non-target column in header order.  ``normalize``
    may be ``"minmax"`` or ``"zscore"``; the per-column offsets/scales it
    applied are recorded in ``meta`` (the target is never rescaled).
    """
    if normalize not in (None, "minmax", "zscore"):
        raise ValueError(f"normalize must be None, 'minmax' or 'zscore', got {normalize!r}")
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if target_column not in header:
            raise CsvFormatError(f"target column {target_column!r} not in header {header}",
                                 column=target_column)
        target_idx = header.index(target_column)
        rows = []
        for r, raw in enumerate(reader, start=2):
            if len(raw) != len(header):
                raise CsvFormatError(f"row {r} has {len(raw)} cells, header has {len(header)}", row=r)
            try:
                rows.append([float(cell) for cell in raw])
            except ValueError:
                bad = next(c for c in raw if not _is_float(c))
                col = header[raw.index(bad)]
                raise CsvFormatError(f"non-numeric cell {bad!r} at row {r}, column {col!r}",
                                     row=r, column=col) from None
    if not rows:
        raise CsvFormatError(f"{path} has a header but no data rows")
    data = np.asarray(rows, dtype=np.float64)
    y = data[:, target_idx]
    X = np.delete(data, target_idx, axis=1)
    feature_names = [h for i, h in enumerate(header) if i != target_idx]
    meta = {"source": str(path), "target": target_column, "features": feature_names,
            "normalize": normalize}
    if normalize is not None:
        if normalize == "minmax":
            offset = X.min(axis=0)
            scale = X.max(axis=0) - offset
        else:
            offset = X.mean(axis=0)
            scale = X.std(axis=0)
        scale = np.where(scale == 0.0, 1.0, scale)  # constant columns pass through
        X = (X - offset) / scale
        meta["normalize_offset"] = offset.tolist()
        meta["normalize_scale"] = scale.tolist()
    return Dataset(X=X, y=y, meta=meta)


def write_meta_sidecar(dataset: Dataset, path):
    """JSON description of how a dataset was produced."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dataset.meta, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False
