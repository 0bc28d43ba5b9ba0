"""
Complete-Data Hartigan-Wong k-means

Classic formulation on a complete matrix: per-cluster factors n/(n+1) and n/(n-1)
multiply ordinary squared Euclidean distances, and centers move by the usual
incremental mean update. Stage structure, live sets, tie rules and the empty-cluster
repair match the masked driver so both can be compared transfer for transfer.
"""

from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed

from kmmeans.data_model import MaskedDataset, Partition
from kmmeans.errors import DataError, KGreaterThanN
from kmmeans.init import InitConfig, kmeanspp_init
from kmmeans.km_core import KmConfig, best_of, finish_fit, resolve_seed, restart_streams
from kmmeans.shared_schema import FitResult, Methods, Weightings
from kmmeans.structured_logging import get_logger

logger = get_logger(__name__)


class _HartiganWong:
    """Working arrays of one classic run (IC1, IC2, NC, AN1, AN2, LIVE, ITRAN, NCP)"""

    def __init__(self, x: np.ndarray, centers: np.ndarray):
        self.x = x
        self.n, self.p = x.shape
        self.k = centers.shape[0]
        self.transfers = 0
        self.optimal_passes = 0
        self.quick_passes = 0
        self._assign(centers)

    def _assign(self, centers: np.ndarray) -> None:
        x, n, k = self.x, self.n, self.k
        d = ((x[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        self.ic1 = np.argmin(d, axis=1).astype(np.intp)
        if k > 1:
            d[np.arange(n), self.ic1] = np.inf
            self.ic2 = np.argmin(d, axis=1).astype(np.intp)
        else:
            self.ic2 = np.full(n, -1, dtype=np.intp)

        self.repaired: List[int] = []
        while True:
            nc = np.bincount(self.ic1, minlength=k)
            empty = np.flatnonzero(nc == 0)
            if not empty.size:
                break
            c = self._means()
            spread = ((x - c[self.ic1]) ** 2).sum(axis=1) / self.p
            row = int(np.argmax(np.where(nc[self.ic1] >= 2, spread, -np.inf)))
            self.ic2[row] = self.ic1[row]
            self.ic1[row] = empty[0]
            self.repaired.append(int(empty[0]))

        self.nc = np.bincount(self.ic1, minlength=k).astype(np.int64)
        self.c = self._means()
        self.an2 = self.nc / (self.nc + 1.0)
        self.an1 = np.divide(
            self.nc, self.nc - 1.0, out=np.full(k, np.inf), where=self.nc > 1
        )
        self.live = np.zeros(k, dtype=np.int64)
        self.itran = np.ones(k, dtype=bool)
        self.ncp = np.zeros(k, dtype=np.int64)
        self.indx = 0

    def _means(self) -> np.ndarray:
        sums = np.zeros((self.k, self.p))
        np.add.at(sums, self.ic1, self.x)
        counts = np.bincount(self.ic1, minlength=self.k)
        return np.divide(sums, counts[:, None], out=np.zeros_like(sums), where=counts[:, None] > 0)

    def _move(self, i: int, l1: int, l2: int) -> None:
        xi = self.x[i]
        al1 = float(self.nc[l1])
        alw = al1 - 1.0
        al2 = float(self.nc[l2])
        alt = al2 + 1.0
        self.c[l1] = (self.c[l1] * al1 - xi) / alw
        self.c[l2] = (self.c[l2] * al2 + xi) / alt
        self.nc[l1] -= 1
        self.nc[l2] += 1
        self.an2[l1] = alw / al1
        self.an1[l1] = alw / (alw - 1.0) if alw > 1.0 else np.inf
        self.an1[l2] = alt / al2
        self.an2[l2] = alt / (alt + 1.0)
        self.ic1[i] = l2
        self.ic2[i] = l1
        self.transfers += 1

    def optra(self) -> bool:
        """One optimal-transfer sweep; True once n steps pass without a transfer."""
        n, k = self.n, self.k
        self.live[self.itran] = n + 1
        for i in range(n):
            step = i + 1
            self.indx += 1
            l1 = int(self.ic1[i])
            if self.nc[l1] != 1:
                dist = ((self.x[i] - self.c) ** 2).sum(axis=1)
                d_minus = dist[l1] * self.an1[l1]
                r2 = dist * self.an2
                if step < self.live[l1]:
                    allowed = np.ones(k, dtype=bool)
                else:
                    allowed = step < self.live
                allowed[l1] = False
                if allowed.any():
                    l2 = int(np.argmin(np.where(allowed, r2, np.inf)))
                    if r2[l2] < d_minus:
                        self.indx = 0
                        self.live[[l1, l2]] = n + step
                        self.ncp[[l1, l2]] = step
                        self._move(i, l1, l2)
                    else:
                        self.ic2[i] = l2
            if self.indx == n:
                self.optimal_passes += 1
                return True
        self.itran[:] = False
        self.live -= n
        self.optimal_passes += 1
        return False

    def qtran(self, max_sweeps: int) -> bool:
        """Quick-transfer stage; False when it stopped at its sweep cap."""
        n = self.n
        icoun = 0
        istep = 0
        for _ in range(max_sweeps):
            for i in range(n):
                icoun += 1
                istep += 1
                l1 = int(self.ic1[i])
                l2 = int(self.ic2[i])
                if self.nc[l1] != 1 and (istep < self.ncp[l1] or istep < self.ncp[l2]):
                    d_minus = ((self.x[i] - self.c[l1]) ** 2).sum() * self.an1[l1]
                    d_plus = ((self.x[i] - self.c[l2]) ** 2).sum() * self.an2[l2]
                    if d_plus < d_minus:
                        icoun = 0
                        self.indx = 0
                        self.itran[[l1, l2]] = True
                        self.ncp[[l1, l2]] = istep + n
                        self._move(i, l1, l2)
                if icoun == n:
                    self.quick_passes += 1
                    return True
        self.quick_passes += 1
        logger.warning("Quick-transfer stage hit its sweep cap", extra={"k": self.k})
        return False

    def run(self, max_passes: int) -> bool:
        if self.k == 1:
            return True
        while self.optimal_passes < max_passes:
            if self.optra():
                return True
            quick_converged = self.qtran(max_passes)
            if self.k == 2:
                return quick_converged
            self.ncp[:] = 0
        return False


def kmeans_hw(
    matrix: np.ndarray, k: int, centers: np.ndarray, cfg: Optional[KmConfig] = None
) -> FitResult:
    """
    Hartigan-Wong k-means on a complete matrix from given initial centers

    The reported objective is the within-cluster sum of squares recomputed from the
    terminal partition.
    """
    cfg = cfg or KmConfig()
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if np.isnan(x).any():
        raise DataError("kmeans_hw requires a complete matrix")
    if k > x.shape[0]:
        raise KGreaterThanN(k, x.shape[0])
    c = np.asarray(centers, dtype=np.float64).reshape(k, x.shape[1])

    hw = _HartiganWong(x, c.copy())
    converged = hw.run(cfg.max_optimal_passes)

    result = finish_fit(MaskedDataset.complete(x), Partition(hw.ic1, hw.ic2, k), Methods.KMEANS_HW)
    result.transfers = hw.transfers
    result.iterations = hw.optimal_passes
    result.quick_passes = hw.quick_passes
    result.converged = converged
    result.repaired_clusters = hw.repaired
    if not converged:
        result.warnings.append(f"No convergence after {hw.optimal_passes} optimal-transfer passes")
    return result


def _hw_restart(
    x: np.ndarray, k: int, stream: np.random.SeedSequence, index: int, cfg: KmConfig
) -> FitResult:
    rng = np.random.default_rng(stream)
    centers = kmeanspp_init(
        MaskedDataset.complete(x), k, rng, InitConfig(weighting=Weightings.UNSCALED_DELTA)
    )
    result = kmeans_hw(x, k, centers.values, cfg)
    result.init_index = index
    return result


def fit_kmeans_hw(
    matrix: np.ndarray,
    k: int,
    n_inits: int = 10,
    seed: Optional[int] = None,
    cfg: Optional[KmConfig] = None,
) -> FitResult:
    """Best of n_inits k-means++ seeded Hartigan-Wong runs on complete data."""
    cfg = cfg or KmConfig()
    x = np.asarray(matrix, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    seed = resolve_seed(seed if seed is not None else cfg.rng_seed)
    results = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_hw_restart)(x, k, stream, index, cfg)
        for index, stream in enumerate(restart_streams(seed, n_inits))
    )
    best = best_of(results)
    best.seed = seed
    best.n_inits = n_inits
    return best
