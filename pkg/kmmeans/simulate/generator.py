"""
Spherical Gaussian Cluster Generator

Draws labeled data from K spherical Gaussians with a common standard deviation.
Centers are placed by rejection sampling so that every pair is at least
separation * sigma apart. The separation presets (easy 6, medium 4, hard 2.5 sigma)
are a heuristic stand-in for overlap levels, not an exact overlap computation.
"""

import math
from typing import List, NamedTuple, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from kmmeans.errors import InfeasibleSeparation

PLACEMENT_ATTEMPTS = 50
CANDIDATES_PER_CENTER = 1000


def validate_mixing(mixing: List[float], k: int) -> List[float]:
    """Validate mixing proportions for k clusters."""
    if len(mixing) != k:
        raise ValueError(f"mixing has {len(mixing)} entries, expected {k}")
    if any(w < 0 for w in mixing):
        raise ValueError("mixing proportions must be nonnegative")
    if not math.isclose(sum(mixing), 1.0, abs_tol=1e-9):
        raise ValueError(f"mixing proportions must sum to 1, got {sum(mixing)}")
    return mixing


class SimSpec(BaseModel):
    """Generative model of one simulated dataset"""

    k: int = Field(default=4, ge=1, description="Number of clusters", examples=[4, 7])
    n: int = Field(default=500, ge=1, description="Sample size", examples=[500, 1000, 5000])
    p: int = Field(default=5, ge=1, description="Dimension", examples=[5, 10])
    sigma: float = Field(default=1.0, gt=0, description="Common within-cluster standard deviation")
    separation: float = Field(
        default=6.0, ge=0, description="Minimum pairwise center distance in sigma units"
    )
    mixing: Optional[List[float]] = Field(default=None, description="Mixing proportions; uniform if omitted")
    seed: int = Field(default=0, ge=0, description="Generator seed")

    @model_validator(mode="after")
    def validate_spec(self) -> "SimSpec":
        if self.n < self.k:
            raise ValueError(f"n={self.n} must be at least k={self.k}")
        if self.mixing is not None:
            validate_mixing(self.mixing, self.k)
        return self

    def proportions(self) -> np.ndarray:
        if self.mixing is None:
            return np.full(self.k, 1.0 / self.k)
        return np.asarray(self.mixing, dtype=np.float64)


class SimulatedClusters(NamedTuple):
    matrix: np.ndarray
    labels: np.ndarray
    centers: np.ndarray


def place_centers(
    k: int, p: int, sigma: float, separation: float, rng: np.random.Generator
) -> np.ndarray:
    """Uniform candidates in a cube, accepted when far enough from every placed center."""
    min_distance = separation * sigma
    side = 1.5 * max(separation, 1.0) * sigma * max(k ** (1.0 / p), 2.0)

    for _ in range(PLACEMENT_ATTEMPTS):
        centers: List[np.ndarray] = []
        for _ in range(k):
            for _ in range(CANDIDATES_PER_CENTER):
                candidate = rng.uniform(-side / 2.0, side / 2.0, size=p)
                if all(np.linalg.norm(candidate - c) >= min_distance for c in centers):
                    centers.append(candidate)
                    break
            else:
                break
        if len(centers) == k:
            return np.vstack(centers)
    raise InfeasibleSeparation(separation, PLACEMENT_ATTEMPTS)


def generate_clusters(spec: SimSpec) -> SimulatedClusters:
    """Complete matrix, 0-based true labels and true centers; deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    centers = place_centers(spec.k, spec.p, spec.sigma, spec.separation, rng)
    labels = rng.choice(spec.k, size=spec.n, p=spec.proportions())
    matrix = centers[labels] + rng.normal(0.0, spec.sigma, size=(spec.n, spec.p))
    return SimulatedClusters(matrix, labels.astype(np.intp), centers)
