"""Multi-quantile regression networks with sorting-based prevention of
quantile crossing.

Model families: CQRNN (plain multi-output), CQRNNse (post hoc sorted at
evaluation), SCQRNN (sorting as a differentiable final layer during
training), and MCQRNN (monotone-constrained network over (tau, x)).

Note: ``Normal`` is parameterized by **variance**; ``Normal(0, 0.25)``
has standard deviation 0.5.
"""

from .distributions import ChiSquared, Normal, StudentT, named_distribution
from .datasets import Dataset, ExampleFunction, generate, ideal_quantiles, load_csv, save_csv, split
from .losses import (QuantileGrid, checker, composite_loss, composite_loss_grad,
                     default_grid, huber_checker, per_tau_loss)
from .metrics import EvalResult, evaluate_predictions, observed_frequency, overall_reliability, rmse_vs_ideal
from .models import (FAMILIES, CQRNN, CQRNNse, MCQRNN, SCQRNN, ModelSpec,
                     as_sorted_eval, build_design_matrix, build_model, load_model, save_model)
from .rng import Rng, derive_seed
from .sorting import SortMode, hard_sort, hard_sort_backward, soft_sort, soft_sort_backward
from .training import (Adam, EarlyStopping, MaxEpochs, Threshold, TrainConfig,
                       TrainingReport, fit, train_step)

__version__ = "0.1.0"

__all__ = [
    "Adam", "ChiSquared", "CQRNN", "CQRNNse", "Dataset", "EarlyStopping",
    "EvalResult", "ExampleFunction", "FAMILIES", "MaxEpochs", "MCQRNN",
    "ModelSpec", "Normal", "QuantileGrid", "Rng", "SCQRNN", "SortMode",
    "StudentT", "Threshold", "TrainConfig", "TrainingReport",
    "as_sorted_eval", "build_design_matrix", "build_model", "checker",
    "composite_loss", "composite_loss_grad", "default_grid", "derive_seed",
    "evaluate_predictions", "fit", "generate", "hard_sort",
    "hard_sort_backward", "huber_checker", "ideal_quantiles", "load_csv",
    "load_model", "named_distribution", "observed_frequency",
    "overall_reliability", "per_tau_loss", "rmse_vs_ideal", "save_csv",
    "save_model", "soft_sort", "soft_sort_backward", "split", "train_step",
]
