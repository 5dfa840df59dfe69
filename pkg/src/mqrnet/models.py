"""The four multi-quantile model families.

* CQRNN: an MLP with one output per quantile level, trained on the
  composite pinball loss.  No protection against quantile crossing.
* CQRNNse: the same trained network, with each prediction row sorted post
  hoc at evaluation time.
* SCQRNN: the sort happens inside the forward pass as a parameter-free
  final layer, during training *and* evaluation; gradients flow back
  through the sorting operation.
* MCQRNN: a single-output network over (tau, x) with exponentiated weight
  constraints that make the output nondecreasing in tau; it is evaluated
  once per level and trained on a T-fold tiled design matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ShapeError
from .losses import (QuantileGrid, composite_loss, composite_loss_grad,
                     per_tau_loss, per_tau_loss_grad)
from .nn import ACTIVATIONS, Mlp, build_mlp, build_monotone_mlp, flatten_params, unflatten_params
from .rng import Rng
from .sorting import HARD, SortMode, sort_rows, sort_rows_backward

FAMILIES = ("cqrnn", "cqrnnse", "scqrnn", "mcqrnn")


@dataclass(frozen=True)
class ModelSpec:
    """Architecture description, sufficient to rebuild a model."""

    family: str
    n_features: int
    hidden_widths: tuple[int, ...]
    grid: QuantileGrid
    activation: str = "tanh"
    sort_mode: SortMode = HARD
    smoothing: float | None = None
    monotone_features: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.n_features < 1:
            raise ValueError("need at least one input feature")
        if not self.hidden_widths or any(w < 1 for w in self.hidden_widths):
            raise ValueError(f"hidden widths must be positive, got {self.hidden_widths}")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if any(not 0 <= i < self.n_features for i in self.monotone_features):
            raise ValueError("monotone feature indices must index into X columns")


class _NetModel:
    """Shared machinery: a network plus the composite-loss training path."""

    def __init__(self, spec: ModelSpec, net: Mlp):
        self.spec = spec
        self.net = net

    @property
    def grid(self) -> QuantileGrid:
        return self.spec.grid

    def parameters(self) -> list[np.ndarray]:
        return self.net.parameters()

    def gradients(self) -> list[np.ndarray]:
        return self.net.gradients()

    def training_data(self, X: np.ndarray, y: np.ndarray):
        """The (inputs, targets) actually iterated during training."""
        return self._check_xy(X, y)

    def evaluation_loss(self, X: np.ndarray, y: np.ndarray) -> float:
        """Raw composite loss of this family's evaluation-path predictions."""
        X, y = self._check_xy(X, y)
        return composite_loss(self.predict(X), y, self.grid)

    def _check_xy(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.spec.n_features:
            raise ShapeError(f"X has shape {X.shape}, expected (N, {self.spec.n_features})")
        if y.shape != (X.shape[0],):
            raise ShapeError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        return X, y

    def _check_params_finite(self):
        for p in self.parameters():
            if not np.all(np.isfinite(p)):
                raise FloatingPointError("model parameters contain non-finite values")


class CQRNN(_NetModel):
    """T-output MLP on the composite loss; may produce crossing quantiles."""

    sort_eval = False

    def raw_outputs(self, X: np.ndarray) -> np.ndarray:
        self._check_params_finite()
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.spec.n_features:
            raise ShapeError(f"X has shape {X.shape}, expected (N, {self.spec.n_features})")
        return self.net.forward(X)

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = self.raw_outputs(X)
        if self.sort_eval:
            out = np.sort(out, axis=1)
        return out

    def loss_and_grads(self, X, y, smoothing=None):
        out = self.net.forward(np.asarray(X, dtype=np.float64))
        loss = composite_loss(out, y, self.grid, smoothing)
        self.net.backward(composite_loss_grad(out, y, self.grid, smoothing))
        return loss, self.gradients()


class CQRNNse(CQRNN):
    """A CQRNN whose predictions are sorted post hoc at evaluation time.

    Training is untouched: construct with the same seed (or wrap a trained
    CQRNN via :func:`as_sorted_eval`) and only ``predict`` differs.
    """

    sort_eval = True


class SCQRNN(_NetModel):
    """CQRNN with sorting as the final layer of the forward pass."""

    def predict(self, X: np.ndarray) -> np.ndarray:
        self._check_params_finite()
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.spec.n_features:
            raise ShapeError(f"X has shape {X.shape}, expected (N, {self.spec.n_features})")
        out, _ = sort_rows(self.net.forward(X), self.spec.sort_mode)
        return out

    def presort_outputs(self, X: np.ndarray) -> np.ndarray:
        """Network outputs before the sort layer (shares its architecture
        and initialization with a same-seed CQRNN)."""
        return self.net.forward(np.asarray(X, dtype=np.float64))

    def loss_and_grads(self, X, y, smoothing=None):
        out = self.net.forward(np.asarray(X, dtype=np.float64))
        sorted_out, state = sort_rows(out, self.spec.sort_mode)
        loss = composite_loss(sorted_out, y, self.grid, smoothing)
        grad = composite_loss_grad(sorted_out, y, self.grid, smoothing)
        self.net.backward(sort_rows_backward(grad, self.spec.sort_mode, state))
        return loss, self.gradients()


class MCQRNN(_NetModel):
    """Monotone-constrained single-output network over (tau, x)."""

    def predict(self, X: np.ndarray) -> np.ndarray:
        self._check_params_finite()
        X, _ = self._check_xy(X, np.zeros(np.asarray(X).shape[0]))
        cols = []
        for tau in self.grid.taus:
            aug = np.concatenate([np.full((X.shape[0], 1), tau), X], axis=1)
            cols.append(self.net.forward(aug)[:, 0])
        return np.stack(cols, axis=1)

    def training_data(self, X: np.ndarray, y: np.ndarray):
        X, y = self._check_xy(X, y)
        design = build_design_matrix(X, y, self.grid)
        return design.xtilde.T.copy(), design.ytilde.copy()

    def loss_and_grads(self, X, y, smoothing=None):
        """Training step on tiled rows: column 0 of ``X`` carries the level
        each prediction is scored at."""
        X = np.asarray(X, dtype=np.float64)
        taus = X[:, 0]
        pred = self.net.forward(X)[:, 0]
        loss = per_tau_loss(pred, y, taus, smoothing)
        grad = per_tau_loss_grad(pred, y, taus, smoothing)
        self.net.backward(grad[:, None])
        return loss, self.gradients()


@dataclass(frozen=True)
class DesignMatrix:
    """(M+1) x (T*N) tiling of X with a leading tau row; ytilde repeats y.

    Columns j*N .. (j+1)*N - 1 carry level taus[j] and the full original
    sample set, in order.
    """

    xtilde: np.ndarray
    ytilde: np.ndarray


def build_design_matrix(X: np.ndarray, y: np.ndarray, grid: QuantileGrid) -> DesignMatrix:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise ShapeError(f"X {X.shape} and y {y.shape} are inconsistent")
    n, t = X.shape[0], len(grid)
    tau_row = np.repeat(grid.taus, n)[None, :]
    tiled = np.tile(X.T, (1, t))
    return DesignMatrix(xtilde=np.concatenate([tau_row, tiled], axis=0),
                        ytilde=np.tile(y, t))


def build_model(spec: ModelSpec, seed: int):
    """Construct an initialized model; the same (spec, seed) always yields
    identical initial weights."""
    rng = Rng(seed)
    t = len(spec.grid)
    act = ACTIVATIONS[spec.activation]
    if spec.family == "mcqrnn":
        widths = [spec.n_features + 1, *spec.hidden_widths, 1]
        mask = np.zeros(spec.n_features + 1, dtype=bool)
        mask[0] = True  # tau is always monotone
        for i in spec.monotone_features:
            mask[i + 1] = True
        return MCQRNN(spec, build_monotone_mlp(widths, act, rng, mask))
    widths = [spec.n_features, *spec.hidden_widths, t]
    net = build_mlp(widths, act, rng)
    cls = {"cqrnn": CQRNN, "cqrnnse": CQRNNse, "scqrnn": SCQRNN}[spec.family]
    return cls(spec, net)


def as_sorted_eval(model: CQRNN) -> CQRNNse:
    """View a trained CQRNN as its post-hoc-sorted twin (shared network)."""
    if not isinstance(model, CQRNN):
        raise TypeError("post hoc sorting applies to a CQRNN")
    return CQRNNse(replace(model.spec, family="cqrnnse"), model.net)


def save_model(model, path):
    """One file: a JSON header line, then the flat float64 parameter block
    (little-endian)."""
    spec = model.spec
    flat = flatten_params(model.parameters())
    header = {
        "format": "mqrnet-model",
        "version": 1,
        "family": spec.family,
        "n_features": spec.n_features,
        "hidden_widths": list(spec.hidden_widths),
        "activation": spec.activation,
        "taus": [float(t) for t in spec.grid.taus],
        "sort_kind": spec.sort_mode.kind,
        "sort_epsilon": spec.sort_mode.epsilon,
        "smoothing": spec.smoothing,
        "monotone_features": list(spec.monotone_features),
        "param_count": int(flat.size),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(flat.astype("<f8").tobytes())


def load_model(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        payload = fh.read()
    if header.get("format") != "mqrnet-model":
        raise ValueError(f"{path} is not a model file")
    spec = ModelSpec(
        family=header["family"],
        n_features=header["n_features"],
        hidden_widths=tuple(header["hidden_widths"]),
        grid=QuantileGrid(header["taus"]),
        activation=header["activation"],
        sort_mode=SortMode(header["sort_kind"], header["sort_epsilon"]),
        smoothing=header["smoothing"],
        monotone_features=tuple(header["monotone_features"]),
    )
    model = build_model(spec, seed=0)
    flat = np.frombuffer(payload, dtype="<f8")
    if flat.size != header["param_count"]:
        raise ValueError(f"parameter payload has {flat.size} values, header says {header['param_count']}")
    new = unflatten_params(flat.astype(np.float64), model.parameters())
    for current, loaded in zip(model.parameters(), new):
        current[...] = loaded
    return model
