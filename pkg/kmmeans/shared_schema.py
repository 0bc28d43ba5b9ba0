"""
Shared Result Schema for kmmeans

Result structures returned by every fitting method (k_m-means, k-POD, complete-case,
complete-data Hartigan-Wong), the K-sweep result, missingness-mask reports and the
per-replicate metrics record. All of them serialize through `to_dict()` so the CLI and
the simulation harness emit one consistent JSON shape.

Version: 1.0
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from kmmeans.data_model import CenterMatrix, MaskedDataset, Partition
from kmmeans.errors import NonConvergence

SCHEMA_VERSION = "1.0"


def json_float(value: Optional[float]) -> Optional[float]:
    """Map NaN and infinities to None for JSON output."""
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


# Input validation functions
def validate_k_range(k_min: int, k_max: int, n: int) -> Dict[str, Any]:
    """Validate a K sweep range."""
    errors = []

    if k_min < 1:
        errors.append("k_min must be at least 1")
    if k_max < k_min:
        errors.append("k_max must not be smaller than k_min")
    if k_max > n:
        errors.append(f"k_max must not exceed the number of rows ({n})")

    return {"valid": len(errors) == 0, "errors": errors, "k_min": k_min, "k_max": k_max}


@dataclass
class FitResult:
    """Unified output of every clustering method"""

    # Core result (required fields first)
    partition: Partition
    centers: CenterMatrix
    objective: float
    sigma_sq_hat: float
    method: str

    # Counters and provenance
    transfers: int = 0
    iterations: int = 0
    quick_passes: int = 0
    seed: Optional[int] = None
    init_index: int = 0
    n_inits: int = 1
    converged: bool = True

    # Diagnostics
    unassignable_rows: List[int] = field(default_factory=list)
    repaired_clusters: List[int] = field(default_factory=list)
    history: Optional[List[float]] = None
    outer_iterations: Optional[int] = None
    descent_violations: int = 0
    warnings: List[str] = field(default_factory=list)

    @property
    def k(self) -> int:
        return self.partition.k

    @property
    def labels(self) -> np.ndarray:
        """0-based cluster label per row."""
        return self.partition.xi

    def require_converged(self) -> "FitResult":
        """Return self, or raise NonConvergence when the pass cap was hit."""
        if not self.converged:
            raise NonConvergence(self.iterations)
        return self

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization; clusters are 1-based"""
        result = {
            "method": self.method,
            "k": self.k,
            "objective": json_float(self.objective),
            "sigma_sq_hat": json_float(self.sigma_sq_hat),
            "centers": self.centers.to_list(),
            "center_defined": self.centers.mask.astype(bool).tolist(),
            "cluster_sizes": self.partition.sizes().tolist(),
            "transfers": self.transfers,
            "iterations": self.iterations,
            "quick_passes": self.quick_passes,
            "seed": self.seed,
            "init_index": self.init_index,
            "n_inits": self.n_inits,
            "converged": self.converged,
            "diagnostics": {
                "unassignable_rows": list(self.unassignable_rows),
                "repaired_clusters": list(self.repaired_clusters),
                "descent_violations": self.descent_violations,
            },
            "warnings": self.warnings,
        }
        if self.outer_iterations is not None:
            result["outer_iterations"] = self.outer_iterations
        if self.history is not None:
            result["history"] = [json_float(w) for w in self.history]
        return result


@dataclass
class KSweepResult:
    """Jump-statistic sweep over candidate numbers of clusters"""

    k_values: List[int]
    objectives: List[float]
    distortions: List[float]
    jumps: List[float]
    k_hat: int
    p_bar: float
    n: int
    fits: Dict[int, FitResult] = field(default_factory=dict)
    degenerate: bool = False
    warnings: List[str] = field(default_factory=list)

    @property
    def selected(self) -> FitResult:
        return self.fits[self.k_hat]

    def table(self) -> List[Dict[str, Any]]:
        return [
            {"K": k, "W_K": json_float(w), "D_hat": json_float(d), "J": json_float(j)}
            for k, w, d, j in zip(self.k_values, self.objectives, self.distortions, self.jumps)
        ]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization"""
        return {
            "k_hat": self.k_hat,
            "p_bar": self.p_bar,
            "n": self.n,
            "degenerate": self.degenerate,
            "table": self.table(),
            "warnings": self.warnings,
        }


@dataclass
class MaskResult:
    """Observation mask produced by a missingness mechanism"""

    mask: np.ndarray
    mechanism: str
    requested_lambda: float
    realized_lambda: float
    rate: float = 0.0
    censored_dims: List[int] = field(default_factory=list)
    affected_clusters: List[int] = field(default_factory=list)
    repaired_rows: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mechanism": self.mechanism,
            "requested_lambda": self.requested_lambda,
            "realized_lambda": self.realized_lambda,
            "rate": self.rate,
            "censored_dims": self.censored_dims,
            "affected_clusters": [c + 1 for c in self.affected_clusters],
            "repaired_rows": self.repaired_rows,
        }


@dataclass
class MetricsRecord:
    """One JSON-lines record of the replicate harness"""

    seed: int
    replicate: int
    spec: Dict[str, Any]
    mechanism: str
    requested_lambda: float
    realized_lambda: float
    method: str
    W_K: float
    ARI: Optional[float]
    n_inits: int
    wall_ms: float
    per_init_ms: float
    k_hat: Optional[int] = None
    ari_at_k_hat: Optional[float] = None
    weighting: Optional[str] = None
    converged: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "replicate": self.replicate,
            "spec": self.spec,
            "mechanism": self.mechanism,
            "requested_lambda": self.requested_lambda,
            "realized_lambda": self.realized_lambda,
            "method": self.method,
            "W_K": json_float(self.W_K),
            "ARI": json_float(self.ARI),
            "k_hat": self.k_hat,
            "ari_at_k_hat": json_float(self.ari_at_k_hat),
            "weighting": self.weighting,
            "n_inits": self.n_inits,
            "wall_ms": self.wall_ms,
            "per_init_ms": self.per_init_ms,
            "converged": self.converged,
        }


# Method identifiers
class Methods:
    """Standardized clustering method identifiers"""
    KM_MEANS = "km_means"
    KPOD = "kpod"
    COMPLETE_CASE = "complete_case"
    KMEANS_HW = "kmeans_hw"

    ALL = (KM_MEANS, KPOD, COMPLETE_CASE)


# Missingness mechanism identifiers
class Mechanisms:
    """Standardized missingness mechanism identifiers"""
    MCAR = "MCAR"
    MAR = "MAR"
    NMAR1 = "NMAR1"
    NMAR2 = "NMAR2"

    ALL = (MCAR, MAR, NMAR1, NMAR2)


class Weightings:
    """Seeding distance weightings"""
    UNSCALED_DELTA = "unscaled_delta"
    SCALED_DELTA = "scaled_delta"


class SeparationPresets:
    """Minimum pairwise center distance in sigma units, standing in for overlap levels"""
    EASY = 6.0
    MEDIUM = 4.0
    HARD = 2.5

    @classmethod
    def resolve(cls, name: str) -> float:
        presets = {"easy": cls.EASY, "medium": cls.MEDIUM, "hard": cls.HARD}
        try:
            return presets[name.lower()]
        except KeyError:
            raise ValueError(f"Unknown separation preset {name!r}; use easy, medium or hard")


def validate_fit_result(result: FitResult, ds: MaskedDataset) -> List[str]:
    """Validate that a fit result conforms to schema and invariants"""
    errors = []

    # Partition
    errors.extend(result.partition.validate(ds.n))

    # Objective
    if not result.objective >= 0:
        errors.append(f"Invalid objective: {result.objective}")
    expected_sigma = result.objective / ds.total_observed
    if not math.isclose(result.sigma_sq_hat, expected_sigma, rel_tol=1e-12, abs_tol=1e-15):
        errors.append("sigma_sq_hat does not equal objective / total observed cells")

    # Centers
    if result.centers.values.shape != (result.k, ds.p):
        errors.append(f"Centers shape {result.centers.values.shape} != ({result.k}, {ds.p})")

    return errors
