from kmmeans.data_model.masked_data import (
    UNDEFINED_DISTANCE,
    CenterMatrix,
    ClusterState,
    MaskedDataset,
    PartialDistance,
    Partition,
    all_center_distances,
    build_dataset,
    center_distances,
    cluster_means,
    describe_dataset,
    objective,
    partial_sq_distance,
    scale_distances,
    scaled_partial_sq_distance,
    sigma_sq_hat,
)

__all__ = [
    "UNDEFINED_DISTANCE",
    "CenterMatrix",
    "ClusterState",
    "MaskedDataset",
    "PartialDistance",
    "Partition",
    "all_center_distances",
    "build_dataset",
    "center_distances",
    "cluster_means",
    "describe_dataset",
    "objective",
    "partial_sq_distance",
    "scale_distances",
    "scaled_partial_sq_distance",
    "sigma_sq_hat",
]
