from kmmeans.km_core.km_means import (
    KmConfig,
    best_of,
    default_n_inits,
    derive_seed,
    finish_fit,
    fit,
    resolve_seed,
    restart_streams,
    run_km_means,
)
from kmmeans.km_core.transfer import (
    InitialAssignment,
    LiveSet,
    PassReport,
    TransferDeltas,
    TransferState,
    assign_initial,
    delta_minus,
    delta_plus,
    optimal_transfer_pass,
    quick_transfer_pass,
    transfer_deltas,
)

__all__ = [
    "InitialAssignment",
    "KmConfig",
    "LiveSet",
    "PassReport",
    "TransferDeltas",
    "TransferState",
    "assign_initial",
    "best_of",
    "default_n_inits",
    "derive_seed",
    "delta_minus",
    "delta_plus",
    "finish_fit",
    "fit",
    "optimal_transfer_pass",
    "quick_transfer_pass",
    "resolve_seed",
    "restart_streams",
    "run_km_means",
    "transfer_deltas",
]
