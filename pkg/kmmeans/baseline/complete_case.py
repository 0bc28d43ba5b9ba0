"""
Complete-Case Clustering

Clusters the fully observed rows with Hartigan-Wong k-means and then places every
incomplete row with the center nearest by scaled partial distance. Centers and W_K
are finally recomputed from all rows on the masked scale.
"""

from typing import Optional

import numpy as np

from kmmeans.baseline.hartigan_wong import fit_kmeans_hw
from kmmeans.data_model import CenterMatrix, MaskedDataset, Partition, all_center_distances, scale_distances
from kmmeans.errors import InsufficientCompleteRows, KGreaterThanN
from kmmeans.km_core import KmConfig, default_n_inits, finish_fit
from kmmeans.shared_schema import FitResult, Methods
from kmmeans.structured_logging import get_logger

logger = get_logger(__name__)


def complete_case(
    ds: MaskedDataset,
    k: int,
    seed: Optional[int] = None,
    n_inits: Optional[int] = None,
    cfg: Optional[KmConfig] = None,
) -> FitResult:
    if k > ds.n:
        raise KGreaterThanN(k, ds.n)
    rows = ds.complete_rows()
    if rows.size < k:
        raise InsufficientCompleteRows(k, int(rows.size))

    n_inits = default_n_inits(k, ds.p) if n_inits is None else n_inits
    core = fit_kmeans_hw(ds.filled[rows], k, n_inits=n_inits, seed=seed, cfg=cfg)

    dist = all_center_distances(ds, CenterMatrix.complete(core.centers.values))
    scaled = scale_distances(dist["d2"], dist["shared"])
    scaled = np.where(np.isnan(scaled), np.inf, scaled)
    xi = np.argmin(scaled, axis=1).astype(np.intp)
    xi[rows] = core.partition.xi
    if k > 1:
        scaled[np.arange(ds.n), xi] = np.inf
        psi = np.argmin(scaled, axis=1).astype(np.intp)
        psi = np.where(psi == xi, (xi + 1) % k, psi)
    else:
        psi = np.full(ds.n, -1, dtype=np.intp)

    logger.info(
        "Complete-case core fitted",
        extra={"k": k, "rows": int(rows.size), "objective": core.objective},
    )
    result = finish_fit(ds, Partition(xi, psi, k), Methods.COMPLETE_CASE)
    result.seed = core.seed
    result.n_inits = n_inits
    result.init_index = core.init_index
    result.transfers = core.transfers
    result.iterations = core.iterations
    result.converged = core.converged
    return result
