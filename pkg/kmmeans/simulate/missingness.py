"""
Missingness Mechanisms

Masks (True = observed) for the four censoring schemes:

- MCAR: every cell independently at rate lambda.
- MAR: a random subset of ceil(dim_fraction * p) dimensions at rate lambda / dim_fraction.
- NMAR1: MCAR confined to the rows of the affected clusters, inflated to keep lambda overall.
- NMAR2: the lowest values of each dimension within each affected cluster.

A row that would lose every feature gets one cell back. Each mask reports the realized
missing fraction next to the requested one.
"""

import math
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from kmmeans.errors import ConfigurationError, InfeasibleRate
from kmmeans.shared_schema import MaskResult, Mechanisms
from kmmeans.structured_logging import get_logger

logger = get_logger(__name__)


class MissingSpec(BaseModel):
    """Censoring scheme applied to a simulated dataset"""

    model_config = ConfigDict(populate_by_name=True)

    mechanism: str = Field(default=Mechanisms.MCAR, pattern="^(MCAR|MAR|NMAR1|NMAR2)$")
    lam: float = Field(
        default=0.1, ge=0, lt=1, alias="lambda", description="Overall missing proportion",
        examples=[0.05, 0.1, 0.2, 0.3],
    )
    mar_dim_fraction: float = Field(default=0.4, gt=0, le=1, description="Share of censored dims (MAR)")
    affected_clusters: Optional[List[int]] = Field(
        default=None, description="0-based clusters censored by NMAR1/NMAR2; ceil(K/2) random if omitted"
    )
    seed: int = Field(default=0, ge=0)


def realized_lambda(mask: np.ndarray) -> float:
    return float(1.0 - mask.mean())


def _repair_rows(mask: np.ndarray, rng: np.random.Generator) -> List[int]:
    empty = np.flatnonzero(~mask.any(axis=1))
    for row in empty:
        mask[row, rng.integers(mask.shape[1])] = True
    if empty.size:
        logger.info("Restored one cell in fully censored rows", extra={"rows": empty.tolist()})
    return empty.tolist()


def choose_affected(k: int, rng: np.random.Generator, count: Optional[int] = None) -> List[int]:
    """ceil(K/2) distinct clusters chosen uniformly, sorted."""
    count = math.ceil(k / 2) if count is None else count
    return sorted(int(c) for c in rng.choice(k, size=count, replace=False))


def _affected_rows(labels: np.ndarray, affected: Sequence[int]) -> np.ndarray:
    if not len(affected):
        raise ConfigurationError("affected clusters must not be empty")
    return np.isin(labels, list(affected))


def apply_mcar(matrix: np.ndarray, lam: float, rng: np.random.Generator) -> MaskResult:
    mask = rng.random(matrix.shape) >= lam
    repaired = _repair_rows(mask, rng)
    return MaskResult(mask, Mechanisms.MCAR, lam, realized_lambda(mask), rate=lam, repaired_rows=repaired)


def apply_mar(
    matrix: np.ndarray, lam: float, dim_fraction: float, rng: np.random.Generator
) -> MaskResult:
    rate = lam / dim_fraction
    if rate >= 1.0:
        raise InfeasibleRate(rate, "lambda / dim_fraction")
    n, p = matrix.shape
    count = min(p, math.ceil(dim_fraction * p - 1e-9))
    dims = sorted(int(j) for j in rng.choice(p, size=count, replace=False))

    mask = np.ones((n, p), dtype=bool)
    mask[:, dims] = rng.random((n, count)) >= rate
    repaired = _repair_rows(mask, rng)
    return MaskResult(
        mask, Mechanisms.MAR, lam, realized_lambda(mask), rate=rate, censored_dims=dims, repaired_rows=repaired
    )


def apply_nmar1(
    matrix: np.ndarray, labels: np.ndarray, lam: float, affected: Sequence[int], rng: np.random.Generator
) -> MaskResult:
    in_affected = _affected_rows(labels, affected)
    n_affected = int(in_affected.sum())
    rate = lam * matrix.shape[0] / n_affected if n_affected else math.inf
    if lam > 0 and rate >= 1.0:
        raise InfeasibleRate(rate, "within affected clusters")

    mask = np.ones(matrix.shape, dtype=bool)
    draws = rng.random((n_affected, matrix.shape[1])) >= rate if lam > 0 else True
    mask[in_affected] = draws
    repaired = _repair_rows(mask, rng)
    return MaskResult(
        mask,
        Mechanisms.NMAR1,
        lam,
        realized_lambda(mask),
        rate=rate if lam > 0 else 0.0,
        affected_clusters=sorted(int(c) for c in affected),
        repaired_rows=repaired,
    )


def apply_nmar2(
    matrix: np.ndarray, labels: np.ndarray, lam: float, affected: Sequence[int]
) -> MaskResult:
    """
    Censor the bottom q-quantile of every dimension inside each affected cluster

    q = lambda n / n_affected, so that the overall missing fraction is lambda up to the
    rounding of q * n_k per cluster. Deterministic given its inputs.
    """
    in_affected = _affected_rows(labels, affected)
    n_affected = int(in_affected.sum())
    q = lam * matrix.shape[0] / n_affected if n_affected else math.inf
    if lam > 0 and q >= 1.0:
        raise InfeasibleRate(q, "quantile within affected clusters")

    n, p = matrix.shape
    mask = np.ones((n, p), dtype=bool)
    rank = np.zeros((n, p), dtype=np.int64)
    if lam > 0:
        for cluster in sorted(set(int(c) for c in affected)):
            rows = np.flatnonzero(labels == cluster)
            cut = int(math.floor(q * rows.size + 0.5))
            for j in range(p):
                order = np.argsort(matrix[rows, j], kind="stable")
                rank[rows[order], j] = np.arange(rows.size)
                mask[rows[order[:cut]], j] = False

    repaired = np.flatnonzero(~mask.any(axis=1))
    for row in repaired:
        # restore the least extreme censored cell
        mask[row, int(np.argmax(rank[row]))] = True
    if repaired.size:
        logger.info("Restored one cell in fully censored rows", extra={"rows": repaired.tolist()})

    return MaskResult(
        mask,
        Mechanisms.NMAR2,
        lam,
        realized_lambda(mask),
        rate=q if lam > 0 else 0.0,
        affected_clusters=sorted(int(c) for c in affected),
        repaired_rows=repaired.tolist(),
    )


def apply_missingness(
    matrix: np.ndarray, labels: np.ndarray, spec: MissingSpec, k: Optional[int] = None
) -> MaskResult:
    """Dispatch on spec.mechanism with an RNG seeded from spec.seed."""
    rng = np.random.default_rng(spec.seed)
    k = int(labels.max()) + 1 if k is None else k
    if spec.mechanism == Mechanisms.MCAR:
        return apply_mcar(matrix, spec.lam, rng)
    if spec.mechanism == Mechanisms.MAR:
        return apply_mar(matrix, spec.lam, spec.mar_dim_fraction, rng)

    affected = spec.affected_clusters if spec.affected_clusters is not None else choose_affected(k, rng)
    if spec.mechanism == Mechanisms.NMAR1:
        return apply_nmar1(matrix, labels, spec.lam, affected, rng)
    return apply_nmar2(matrix, labels, spec.lam, affected)
