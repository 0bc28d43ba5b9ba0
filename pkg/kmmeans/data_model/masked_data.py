"""
Masked Data Model

Dataset, partition and per-cluster statistics for data with unobserved cells, plus the
masked within-cluster sum of squares W_K and the partial squared distances that every
other module builds on.

A cell enters a sum only when it is observed in the row and, for cluster terms, when
the cluster has at least one observed value in that feature (n_kj > 0).
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Union

import numpy as np

from kmmeans.errors import EmptyInput, RaggedRows, RowAllMissing
from kmmeans.settings import settings


class _UndefinedDistance:
    """Scaled partial distance between a row and a center that share no feature"""

    _instance: Optional["_UndefinedDistance"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED_DISTANCE"

    def __bool__(self) -> bool:
        return False


UNDEFINED_DISTANCE = _UndefinedDistance()


class PartialDistance(NamedTuple):
    value: float
    shared: int

    @property
    def no_shared_features(self) -> bool:
        return self.shared == 0


@dataclass(frozen=True, eq=False)
class MaskedDataset:
    """
    n x p values with a parallel observation mask

    `values` holds a placeholder in unobserved cells that is never read; `filled` is the
    same matrix with unobserved cells set to 0.0 and is what the arithmetic uses.
    Arrays are read-only once the dataset is built.
    """

    values: np.ndarray
    mask: np.ndarray
    column_names: Optional[List[str]] = None
    filled: np.ndarray = field(init=False, repr=False)
    per_row_observed: np.ndarray = field(init=False, repr=False)
    p_bar: float = field(init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        mask = np.array(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape[0] == 0:
            raise EmptyInput()
        if mask.shape != values.shape:
            raise ValueError(f"Mask shape {mask.shape} does not match values {values.shape}")
        if values.shape[1] == 0:
            raise RaggedRows(0, 1, 0)

        per_row = mask.sum(axis=1)
        empty_rows = np.flatnonzero(per_row == 0)
        if empty_rows.size:
            raise RowAllMissing(int(empty_rows[0]))

        placeholder = np.nan if settings.debug else 0.0
        values = np.where(mask, values, placeholder)
        filled = np.where(mask, values, 0.0)
        for arr in (values, mask, filled, per_row):
            arr.flags.writeable = False

        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "filled", filled)
        object.__setattr__(self, "per_row_observed", per_row)
        object.__setattr__(self, "p_bar", float(per_row.sum()) / values.shape[0])

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def total_observed(self) -> int:
        return int(self.per_row_observed.sum())

    @property
    def is_complete(self) -> bool:
        return bool(self.mask.all())

    @property
    def missing_fraction(self) -> float:
        return 1.0 - self.total_observed / self.mask.size

    def complete_rows(self) -> np.ndarray:
        """Indices of fully observed rows."""
        return np.flatnonzero(self.per_row_observed == self.p)

    def subset(self, rows: Sequence[int]) -> "MaskedDataset":
        rows = np.asarray(rows, dtype=np.intp)
        return MaskedDataset(self.filled[rows], self.mask[rows], self.column_names)

    def column_means(self) -> np.ndarray:
        """Per-feature mean over observed cells (NaN for a column with none)."""
        counts = self.mask.sum(axis=0)
        return np.divide(
            self.filled.sum(axis=0),
            counts,
            out=np.full(self.p, np.nan),
            where=counts > 0,
        )

    @classmethod
    def complete(cls, matrix: np.ndarray, column_names: Optional[List[str]] = None) -> "MaskedDataset":
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim == 1:
            matrix = matrix.reshape(-1, 1)
        return cls(matrix, np.ones(matrix.shape, dtype=bool), column_names)

    @classmethod
    def from_nan(cls, matrix: np.ndarray, column_names: Optional[List[str]] = None) -> "MaskedDataset":
        """Treat NaN cells as unobserved."""
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix, ~np.isnan(matrix), column_names)


@dataclass
class Partition:
    """
    Cluster assignment xi with second-closest index psi, 0-based

    psi is -1 when K = 1 (no alternative exists).
    """

    xi: np.ndarray
    psi: np.ndarray
    k: int

    def sizes(self) -> np.ndarray:
        return np.bincount(self.xi, minlength=self.k)

    def copy(self) -> "Partition":
        return Partition(self.xi.copy(), self.psi.copy(), self.k)

    def validate(self, n: Optional[int] = None) -> List[str]:
        """Return invariant violations; empty when the partition is valid."""
        errors = []
        if n is not None and self.xi.shape[0] != n:
            errors.append(f"Partition covers {self.xi.shape[0]} rows, dataset has {n}")
        if self.xi.size and (self.xi.min() < 0 or self.xi.max() >= self.k):
            errors.append("Cluster index out of range")
            return errors
        empty = np.flatnonzero(self.sizes() == 0)
        if empty.size:
            errors.append(f"Empty clusters: {empty.tolist()}")
        if self.k >= 2 and np.any(self.psi == self.xi):
            errors.append("psi equals xi for some rows")
        return errors

    @classmethod
    def from_labels(cls, labels: Sequence[int], k: Optional[int] = None) -> "Partition":
        """Partition from 0-based labels; psi is set to the next cluster index."""
        xi = np.asarray(labels, dtype=np.intp)
        k = int(xi.max()) + 1 if k is None else k
        psi = (xi + 1) % k if k > 1 else np.full_like(xi, -1)
        return cls(xi, psi, k)


@dataclass
class ClusterState:
    """Per-cluster, per-feature observed counts, sums and means"""

    counts: np.ndarray
    sums: np.ndarray
    means: np.ndarray
    present: np.ndarray
    sizes: np.ndarray

    @property
    def k(self) -> int:
        return self.counts.shape[0]

    def copy(self) -> "ClusterState":
        return ClusterState(
            self.counts.copy(), self.sums.copy(), self.means.copy(), self.present.copy(), self.sizes.copy()
        )

    def _refresh(self, cluster: int) -> None:
        counts = self.counts[cluster]
        self.means[cluster] = np.divide(
            self.sums[cluster], counts, out=np.full(counts.shape, np.nan), where=counts > 0
        )
        self.present[cluster] = counts > 0

    def move(self, x: np.ndarray, y: np.ndarray, source: int, target: int) -> None:
        """Move one row (zero-filled values x, mask y) from source to target."""
        observed = np.where(y, x, 0.0)
        self.counts[source] -= y
        self.sums[source] -= observed
        self.sizes[source] -= 1
        self.counts[target] += y
        self.sums[target] += observed
        self.sizes[target] += 1
        self._refresh(source)
        self._refresh(target)

    def center_matrix(self) -> "CenterMatrix":
        return CenterMatrix(np.where(self.present, self.means, 0.0), self.present.copy())


@dataclass
class CenterMatrix:
    """K x p centers carrying their own masks (undefined cells masked out)"""

    values: np.ndarray
    mask: np.ndarray
    row_indices: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return self.values.shape[0]

    @classmethod
    def complete(cls, centers: np.ndarray) -> "CenterMatrix":
        centers = np.asarray(centers, dtype=np.float64)
        if centers.ndim == 1:
            centers = centers.reshape(-1, 1)
        return cls(centers.copy(), np.ones(centers.shape, dtype=bool))

    def to_list(self) -> List[List[Optional[float]]]:
        """Nested lists with None for undefined cells."""
        return [
            [float(v) if m else None for v, m in zip(row, row_mask)]
            for row, row_mask in zip(self.values, self.mask)
        ]


def build_dataset(
    rows: Sequence[Sequence[Optional[float]]], column_names: Optional[List[str]] = None
) -> MaskedDataset:
    """
    Build a MaskedDataset from records of optional reals

    None and NaN mark unobserved cells.
    """
    if len(rows) == 0:
        raise EmptyInput()
    p = len(rows[0])
    if p == 0:
        raise RaggedRows(0, 1, 0)

    values = np.zeros((len(rows), p), dtype=np.float64)
    mask = np.zeros((len(rows), p), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != p:
            raise RaggedRows(i, p, len(row))
        for j, cell in enumerate(row):
            if cell is None or (isinstance(cell, float) and math.isnan(cell)):
                continue
            values[i, j] = float(cell)
            mask[i, j] = True
    return MaskedDataset(values, mask, column_names)


def cluster_means(ds: MaskedDataset, part: Partition) -> ClusterState:
    """Masked per-cluster means: sum of observed member values over their count."""
    k, p = part.k, ds.p
    counts = np.zeros((k, p), dtype=np.int64)
    sums = np.zeros((k, p), dtype=np.float64)
    np.add.at(counts, part.xi, ds.mask.astype(np.int64))
    np.add.at(sums, part.xi, ds.filled)
    means = np.divide(sums, counts, out=np.full((k, p), np.nan), where=counts > 0)
    return ClusterState(counts, sums, means, counts > 0, part.sizes().astype(np.int64))


def objective(ds: MaskedDataset, part: Partition, cs: ClusterState) -> float:
    """Masked within-cluster sum of squares W_K."""
    gate = ds.mask & cs.present[part.xi]
    residual = ds.filled - cs.means[part.xi]
    return float(np.where(gate, residual * residual, 0.0).sum())


def sigma_sq_hat(ds: MaskedDataset, w_k: float) -> float:
    return w_k / ds.total_observed


def center_distances(
    x: np.ndarray, y: np.ndarray, center_values: np.ndarray, center_mask: np.ndarray
) -> Dict[str, np.ndarray]:
    """Partial squared distances from one row to every center, with shared counts."""
    gate = center_mask & y
    diff = x - center_values
    return {
        "d2": np.where(gate, diff * diff, 0.0).sum(axis=1),
        "shared": gate.sum(axis=1),
    }


def all_center_distances(ds: MaskedDataset, centers: CenterMatrix) -> Dict[str, np.ndarray]:
    """n x K partial squared distances and shared-feature counts."""
    gate = ds.mask[:, None, :] & centers.mask[None, :, :]
    diff = ds.filled[:, None, :] - centers.values[None, :, :]
    return {
        "d2": np.where(gate, diff * diff, 0.0).sum(axis=2),
        "shared": gate.sum(axis=2),
    }


def scale_distances(d2: np.ndarray, shared: np.ndarray) -> np.ndarray:
    """delta-tilde squared; NaN where no feature is shared."""
    return np.divide(d2, shared, out=np.full(d2.shape, np.nan), where=shared > 0)


def partial_sq_distance(ds: MaskedDataset, i: int, cs: ClusterState, k: int) -> PartialDistance:
    result = center_distances(ds.filled[i], ds.mask[i], cs.means[k : k + 1], cs.present[k : k + 1])
    return PartialDistance(float(result["d2"][0]), int(result["shared"][0]))


def scaled_partial_sq_distance(
    ds: MaskedDataset, i: int, cs: ClusterState, k: int
) -> Union[float, _UndefinedDistance]:
    distance = partial_sq_distance(ds, i, cs, k)
    if distance.no_shared_features:
        return UNDEFINED_DISTANCE
    return distance.value / distance.shared


def describe_dataset(ds: MaskedDataset) -> Dict[str, Any]:
    """Summary used in logs and CLI summaries."""
    return {
        "n": ds.n,
        "p": ds.p,
        "p_bar": ds.p_bar,
        "missing_fraction": ds.missing_fraction,
        "complete_rows": int(ds.complete_rows().size),
    }
