"""
Transfer Stages of the Hartigan-Wong Iteration on Masked Data

Exact transfer costs, the live-set bookkeeping and the optimal- and quick-transfer
stages. Step counters follow the classic algorithm: within an optimal-transfer pass
the step of row i is i + 1; quick-transfer steps count from 1 within the stage.

A cluster is live for step s of an optimal pass while s < live_until[cluster]. A
transfer at step s sets live_until to n + s, which keeps the cluster live for the rest
of the pass and, after the end-of-pass shift by n, for rows before s in the next one.
"""

from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from kmmeans.data_model import (
    CenterMatrix,
    ClusterState,
    MaskedDataset,
    Partition,
    all_center_distances,
    cluster_means,
    objective,
    scale_distances,
)
from kmmeans.errors import KGreaterThanN, LastMember
from kmmeans.structured_logging import get_logger

logger = get_logger(__name__)


class TransferDeltas(NamedTuple):
    delta_plus: float
    delta_minus: float

    @property
    def improves(self) -> bool:
        return self.delta_plus < self.delta_minus


def _delta_plus_all(cs: ClusterState, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    gate = cs.present & y
    diff = x - cs.means
    counts = cs.counts
    return np.where(gate, counts * (diff * diff) / (counts + 1), 0.0).sum(axis=1)


def _delta_plus_one(cs: ClusterState, x: np.ndarray, y: np.ndarray, cluster: int) -> float:
    gate = cs.present[cluster] & y
    diff = x - cs.means[cluster]
    counts = cs.counts[cluster]
    return float(np.where(gate, counts * (diff * diff) / (counts + 1), 0.0).sum())


def _delta_minus_one(cs: ClusterState, x: np.ndarray, y: np.ndarray, cluster: int) -> float:
    counts = cs.counts[cluster]
    # n_kj - Y_ij = 0 means the row is the only observed value there: term is 0
    gate = y & (counts > 1)
    diff = x - cs.means[cluster]
    denom = np.where(gate, counts - 1, 1)
    return float(np.where(gate, counts * (diff * diff) / denom, 0.0).sum())


def delta_plus(cs: ClusterState, ds: MaskedDataset, i: int, l: int) -> float:
    """Exact increase of W_K if row i (not in l) joined cluster l."""
    return _delta_plus_one(cs, ds.filled[i], ds.mask[i], l)


def delta_minus(cs: ClusterState, ds: MaskedDataset, i: int, k: int) -> float:
    """Exact decrease of W_K if row i left its cluster k."""
    if cs.sizes[k] <= 1:
        raise LastMember(k)
    return _delta_minus_one(cs, ds.filled[i], ds.mask[i], k)


def transfer_deltas(cs: ClusterState, ds: MaskedDataset, i: int, k: int, l: int) -> TransferDeltas:
    return TransferDeltas(delta_plus(cs, ds, i, l), delta_minus(cs, ds, i, k))


class InitialAssignment(NamedTuple):
    partition: Partition
    clusters: ClusterState
    unassignable_rows: List[int]
    repaired_clusters: List[int]


def _repair_empty_clusters(ds: MaskedDataset, part: Partition, cs: ClusterState) -> List[int]:
    repaired = []
    while True:
        sizes = part.sizes()
        empty = np.flatnonzero(sizes == 0)
        if not empty.size:
            return repaired
        target = int(empty[0])

        gate = ds.mask & cs.present[part.xi]
        diff = ds.filled - cs.means[part.xi]
        d2 = np.where(gate, diff * diff, 0.0).sum(axis=1)
        spread = scale_distances(d2, gate.sum(axis=1))
        eligible = (sizes[part.xi] >= 2) & np.isfinite(spread)
        row = int(np.argmax(np.where(eligible, spread, -np.inf)))

        source = int(part.xi[row])
        part.xi[row] = target
        part.psi[row] = source
        repaired.append(target)
        logger.info(
            "Reseeded empty cluster with a singleton",
            extra={"k": part.k, "rows": [row]},
        )
        cs_new = cluster_means(ds, part)
        cs.counts, cs.sums, cs.means, cs.present, cs.sizes = (
            cs_new.counts,
            cs_new.sums,
            cs_new.means,
            cs_new.present,
            cs_new.sizes,
        )


def assign_initial(ds: MaskedDataset, centers: CenterMatrix) -> InitialAssignment:
    """
    Assign each row to its closest and second-closest center by partial distance

    Centers sharing no feature with a row are never its closest; a row sharing no
    feature with any center joins the largest cluster and is reported. Means are then
    recomputed from the induced partition and empty clusters reseeded.
    """
    k = centers.k
    if k > ds.n:
        raise KGreaterThanN(k, ds.n)

    dist = all_center_distances(ds, centers)
    d2 = np.where(dist["shared"] > 0, dist["d2"], np.inf)
    rows = np.arange(ds.n)
    xi = np.argmin(d2, axis=1)

    if k > 1:
        second = d2.copy()
        second[rows, xi] = np.inf
        psi = np.argmin(second, axis=1)
        psi = np.where(psi == xi, (xi + 1) % k, psi)
    else:
        psi = np.full(ds.n, -1, dtype=np.intp)

    unassignable = np.flatnonzero(~np.isfinite(d2).any(axis=1))
    if unassignable.size:
        assignable = np.setdiff1d(rows, unassignable)
        largest = int(np.argmax(np.bincount(xi[assignable], minlength=k))) if assignable.size else 0
        xi[unassignable] = largest
        if k > 1:
            psi[unassignable] = 1 if largest == 0 else 0
        logger.warning(
            "Rows share no feature with any center; assigned to the largest cluster",
            extra={"k": k, "rows": unassignable.tolist()},
        )

    part = Partition(xi.astype(np.intp), psi.astype(np.intp), k)
    cs = cluster_means(ds, part)
    repaired = _repair_empty_clusters(ds, part, cs)
    return InitialAssignment(part, cs, unassignable.tolist(), repaired)


@dataclass
class LiveSet:
    """Live-set and step counters shared by both transfer stages"""

    live_until: np.ndarray
    quick_updated: np.ndarray
    last_update_step: np.ndarray
    steps_since_transfer: int = 0

    @classmethod
    def initial(cls, k: int) -> "LiveSet":
        return cls(
            live_until=np.zeros(k, dtype=np.int64),
            quick_updated=np.ones(k, dtype=bool),
            last_update_step=np.zeros(k, dtype=np.int64),
        )

    def membership(self, step: int) -> np.ndarray:
        """Per-cluster live flags at an optimal-transfer step."""
        return step < self.live_until

    def is_empty(self, n: int) -> bool:
        return self.steps_since_transfer >= n


@dataclass
class PassReport:
    stage: str
    transfers: int = 0
    evaluations: int = 0
    live_changes: int = 0
    sweeps: int = 0
    objective: float = 0.0
    converged: bool = False


@dataclass
class TransferState:
    """Mutable state of one fitting run"""

    ds: MaskedDataset
    partition: Partition
    clusters: ClusterState
    live: LiveSet
    objective: float
    transfers: int = 0
    optimal_passes: int = 0
    quick_passes: int = 0
    history: Optional[List[float]] = field(default=None)

    @classmethod
    def start(
        cls, ds: MaskedDataset, partition: Partition, clusters: ClusterState, track_history: bool = False
    ) -> "TransferState":
        w = objective(ds, partition, clusters)
        return cls(
            ds=ds,
            partition=partition,
            clusters=clusters,
            live=LiveSet.initial(partition.k),
            objective=w,
            history=[w] if track_history else None,
        )

    def transfer(self, i: int, source: int, target: int, gain: float) -> None:
        self.clusters.move(self.ds.filled[i], self.ds.mask[i], source, target)
        self.partition.xi[i] = target
        self.partition.psi[i] = source
        self.objective -= gain
        self.transfers += 1
        if self.history is not None:
            self.history.append(self.objective)


def optimal_transfer_pass(state: TransferState) -> PassReport:
    """
    One sweep of the optimal-transfer stage

    Rows of a live cluster consider every other cluster; rows of a stable cluster only
    the live ones. The pass stops early once n consecutive steps made no transfer.
    """
    ds, part, cs, live = state.ds, state.partition, state.clusters, state.live
    n, k = ds.n, part.k
    report = PassReport(stage="optimal")
    others = np.ones(k, dtype=bool)

    live.live_until[live.quick_updated] = n + 1
    for i in range(n):
        step = i + 1
        live.steps_since_transfer += 1
        source = int(part.xi[i])

        if cs.sizes[source] > 1:
            report.evaluations += 1
            x, y = ds.filled[i], ds.mask[i]
            d_minus = _delta_minus_one(cs, x, y, source)
            d_plus = _delta_plus_all(cs, x, y)

            candidates = others.copy() if step < live.live_until[source] else live.membership(step)
            candidates[source] = False
            if candidates.any():
                costs = np.where(candidates, d_plus, np.inf)
                target = int(np.argmin(costs))
                if d_plus[target] < d_minus:
                    report.live_changes += int(not step < live.live_until[target])
                    state.transfer(i, source, target, d_minus - d_plus[target])
                    report.transfers += 1
                    live.steps_since_transfer = 0
                    live.live_until[[source, target]] = n + step
                    live.last_update_step[[source, target]] = step
                else:
                    part.psi[i] = target

        if live.steps_since_transfer >= n:
            report.converged = True
            break
    else:
        live.quick_updated[:] = False
        live.live_until -= n

    state.optimal_passes += 1
    report.sweeps = 1
    report.objective = state.objective
    return report


def quick_transfer_pass(state: TransferState, max_sweeps: int = 100) -> PassReport:
    """
    Quick-transfer stage: compare each row's cluster only with its second-closest

    A row is skipped when neither of its two clusters changed within the last n steps.
    The stage ends once n consecutive steps made no transfer.
    """
    ds, part, cs, live = state.ds, state.partition, state.clusters, state.live
    n = ds.n
    report = PassReport(stage="quick")
    if part.k < 2:
        report.converged = True
        return report

    step = 0
    since = 0
    while report.sweeps < max_sweeps:
        report.sweeps += 1
        for i in range(n):
            step += 1
            since += 1
            source = int(part.xi[i])
            target = int(part.psi[i])

            if cs.sizes[source] > 1 and (
                step < live.last_update_step[source] or step < live.last_update_step[target]
            ):
                report.evaluations += 1
                x, y = ds.filled[i], ds.mask[i]
                d_minus = _delta_minus_one(cs, x, y, source)
                d_plus = _delta_plus_one(cs, x, y, target)
                if d_plus < d_minus:
                    state.transfer(i, source, target, d_minus - d_plus)
                    report.transfers += 1
                    since = 0
                    live.steps_since_transfer = 0
                    live.quick_updated[[source, target]] = True
                    live.last_update_step[[source, target]] = step + n

            if since >= n:
                report.converged = True
                state.quick_passes += 1
                report.objective = state.objective
                return report

    logger.warning("Quick-transfer stage hit its sweep cap", extra={"k": part.k})
    state.quick_passes += 1
    report.objective = state.objective
    return report
