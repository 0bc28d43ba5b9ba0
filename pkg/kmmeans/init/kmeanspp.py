"""
k-means++ Seeding for Masked Data

Picks K distinct rows as initial centers. The first is uniform; each next one is drawn
with probability proportional to its smallest partial distance to the centers chosen so
far, using either the raw partial distance or the one normalized by the number of
shared features. Centers are copies of the selected rows and keep their masks.
"""

from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from kmmeans.data_model import CenterMatrix, MaskedDataset, scale_distances
from kmmeans.errors import ConfigurationError, KGreaterThanN
from kmmeans.shared_schema import Weightings


class InitConfig(BaseModel):
    """Seeding configuration"""

    weighting: str = Field(
        default=Weightings.SCALED_DELTA,
        pattern="^(unscaled_delta|scaled_delta)$",
        description="Distance used for the sampling weights",
    )
    stream: Optional[int] = Field(
        default=None, ge=0, description="RNG stream id, recorded for provenance"
    )


def row_distances(ds: MaskedDataset, row: int, weighting: str) -> np.ndarray:
    """Distance from every row to one data row; NaN where no feature is shared."""
    gate = ds.mask & ds.mask[row]
    diff = ds.filled - ds.filled[row]
    d2 = np.where(gate, diff * diff, 0.0).sum(axis=1)
    shared = gate.sum(axis=1)
    if weighting == Weightings.SCALED_DELTA:
        return scale_distances(d2, shared)
    return np.where(shared > 0, d2, np.nan)


def seeding_weights(ds: MaskedDataset, chosen: Sequence[int], weighting: str) -> np.ndarray:
    """
    Unnormalized sampling weights for the next center

    A row that shares no feature with any chosen center gets the largest finite
    weight of the round. Chosen rows get zero.
    """
    best = np.full(ds.n, np.inf)
    for row in chosen:
        best = np.fmin(best, row_distances(ds, row, weighting))

    weights = best
    finite = np.isfinite(weights)
    weights[~finite] = weights[finite].max() if finite.any() else 1.0
    weights[list(chosen)] = 0.0
    if weights.sum() <= 0.0:
        # every remaining row coincides with a center
        weights = np.ones(ds.n)
        weights[list(chosen)] = 0.0
    return weights


def _draw(weights: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(weights)
    u = rng.random() * cumulative[-1]
    return min(int(np.searchsorted(cumulative, u, side="right")), weights.size - 1)


def kmeanspp_init(
    ds: MaskedDataset, k: int, rng: np.random.Generator, cfg: Optional[InitConfig] = None
) -> CenterMatrix:
    """
    Select K initial centers from the rows of ds

    Args:
        ds: dataset to seed from
        k: number of centers
        rng: generator owned by this restart
        cfg: weighting choice

    Returns:
        CenterMatrix whose rows are copies of the chosen data rows
    """
    cfg = cfg or InitConfig()
    if k < 1:
        raise ConfigurationError(f"K must be at least 1, got {k}")
    if k > ds.n:
        raise KGreaterThanN(k, ds.n)

    chosen = [int(rng.integers(ds.n))]
    while len(chosen) < k:
        chosen.append(_draw(seeding_weights(ds, chosen, cfg.weighting), rng))

    rows = np.asarray(chosen, dtype=np.intp)
    return CenterMatrix(ds.filled[rows].copy(), ds.mask[rows].copy(), rows)
