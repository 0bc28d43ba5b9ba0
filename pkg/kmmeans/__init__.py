"""
kmmeans

Hartigan-Wong style k-means for data with missing values (k_m-means), with k-means++
seeding, jump-statistic selection of K, k-POD and complete-case baselines, and a
simulation harness for censored Gaussian mixtures.
"""

__version__ = "1.0.0"

from kmmeans.shared_schema import SCHEMA_VERSION
from kmmeans.baseline import complete_case, fit_kmeans_hw, kmeans_hw, kpod  # noqa: E402
from kmmeans.data_model import MaskedDataset, Partition, build_dataset  # noqa: E402
from kmmeans.errors import ConfigurationError, DataError, KmMeansError  # noqa: E402
from kmmeans.km_core import KmConfig, fit, run_km_means  # noqa: E402
from kmmeans.model_select import select_k  # noqa: E402

__all__ = [
    "SCHEMA_VERSION",
    "ConfigurationError",
    "DataError",
    "KmConfig",
    "KmMeansError",
    "MaskedDataset",
    "Partition",
    "build_dataset",
    "complete_case",
    "fit",
    "fit_kmeans_hw",
    "kmeans_hw",
    "kpod",
    "run_km_means",
    "select_k",
]
