"""Weight-update rules (backpropagation, STDP, Tempotron) and the
baseline/extended hyperparameter random search."""

from .bp import BpConfig, bp_loss_and_grads, bp_train
from .search import (
    SearchOutcome,
    SearchSpace,
    default_search_space,
    hyper_search,
    sample_candidates,
)
from .stdp import StdpConfig, stdp_delta, stdp_train
from .tempotron import (
    TempotronConfig,
    psp_kernel,
    psp_kernel_peak_time,
    tempotron_delta,
    tempotron_train,
)

__all__ = [
    "BpConfig",
    "bp_loss_and_grads",
    "bp_train",
    "SearchOutcome",
    "SearchSpace",
    "default_search_space",
    "hyper_search",
    "sample_candidates",
    "StdpConfig",
    "stdp_delta",
    "stdp_train",
    "TempotronConfig",
    "psp_kernel",
    "psp_kernel_peak_time",
    "tempotron_delta",
    "tempotron_train",
]
