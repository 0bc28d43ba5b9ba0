from kmmeans.simulate.agreement import adjusted_rand, confusion_matrix, contingency_table
from kmmeans.simulate.generator import SimSpec, SimulatedClusters, generate_clusters, place_centers
from kmmeans.simulate.harness import (
    SimulatedDataset,
    StudyGrid,
    run_replicate,
    run_study,
    simulate_dataset,
    summarize,
    write_records,
)
from kmmeans.simulate.missingness import (
    MissingSpec,
    apply_mar,
    apply_mcar,
    apply_missingness,
    apply_nmar1,
    apply_nmar2,
    choose_affected,
    realized_lambda,
)

__all__ = [
    "MissingSpec",
    "SimSpec",
    "SimulatedClusters",
    "SimulatedDataset",
    "StudyGrid",
    "adjusted_rand",
    "apply_mar",
    "apply_mcar",
    "apply_missingness",
    "apply_nmar1",
    "apply_nmar2",
    "choose_affected",
    "confusion_matrix",
    "contingency_table",
    "generate_clusters",
    "place_centers",
    "realized_lambda",
    "run_replicate",
    "run_study",
    "simulate_dataset",
    "summarize",
    "write_records",
]
