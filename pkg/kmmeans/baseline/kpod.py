"""
k-POD

Iterative mean imputation around complete-data k-means: unobserved cells are filled
with the assigned cluster's masked mean, Hartigan-Wong runs on the filled matrix from
the current centers, and the masked means are recomputed. The reported objective is
always the masked W_K, so values compare directly with k_m-means.
"""

from datetime import datetime
from typing import Optional

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from kmmeans.baseline.hartigan_wong import kmeans_hw
from kmmeans.data_model import MaskedDataset, cluster_means, objective
from kmmeans.errors import KGreaterThanN
from kmmeans.init import InitConfig, kmeanspp_init
from kmmeans.km_core import KmConfig, best_of, finish_fit, resolve_seed, restart_streams
from kmmeans.shared_schema import FitResult, Methods, Weightings
from kmmeans.structured_logging import elapsed_ms, generate_run_id, get_logger

logger = get_logger(__name__)


class KpodConfig(BaseModel):
    """k-POD outer-loop configuration"""

    max_outer_iters: int = Field(default=100, ge=1, description="Outer imputation rounds")
    tol: float = Field(default=1e-8, gt=0, description="Relative W_K change treated as converged")
    n_inits: int = Field(default=5, ge=1, description="Restarts")
    inner: KmConfig = Field(default_factory=KmConfig, description="Inner Hartigan-Wong config")


def global_mean_fill(ds: MaskedDataset) -> np.ndarray:
    """Fill unobserved cells with their column's observed mean (0 for an empty column)."""
    column_means = np.nan_to_num(ds.column_means(), nan=0.0)
    return np.where(ds.mask, ds.filled, column_means)


def _kpod_restart(
    ds: MaskedDataset, k: int, stream: np.random.SeedSequence, index: int, cfg: KpodConfig
) -> FitResult:
    rng = np.random.default_rng(stream)
    filled = global_mean_fill(ds)
    centers = kmeanspp_init(
        MaskedDataset.complete(filled), k, rng, InitConfig(weighting=Weightings.UNSCALED_DELTA)
    ).values

    prev_xi: Optional[np.ndarray] = None
    prev_w = np.inf
    violations = 0
    converged = False
    history = []
    outer = 0
    for outer in range(1, cfg.max_outer_iters + 1):
        inner = kmeans_hw(filled, k, centers, cfg.inner)
        part = inner.partition
        cs = cluster_means(ds, part)
        w = objective(ds, part, cs)
        history.append(w)

        if w > prev_w + 1e-10 * max(1.0, abs(prev_w)):
            violations += 1
            logger.warning(
                "k-POD outer iteration increased the masked objective",
                extra={"k": k, "objective": w, "init_index": index},
            )
        if prev_xi is not None and (
            np.array_equal(part.xi, prev_xi) or abs(prev_w - w) <= cfg.tol * max(abs(prev_w), 1e-300)
        ):
            converged = True

        centers = np.where(cs.present, cs.means, inner.centers.values)
        filled = np.where(ds.mask, ds.filled, centers[part.xi])
        prev_xi = part.xi.copy()
        prev_w = w
        if converged:
            break

    result = finish_fit(ds, part, Methods.KPOD)
    result.init_index = index
    result.outer_iterations = outer
    result.converged = converged
    result.descent_violations = violations
    result.history = history
    if not converged:
        result.warnings.append(f"k-POD stopped after {outer} outer iterations without convergence")
    return result


def kpod(
    ds: MaskedDataset, k: int, seed: Optional[int] = None, cfg: Optional[KpodConfig] = None
) -> FitResult:
    """
    Best of cfg.n_inits k-POD runs

    Each restart fills missing cells with global feature means, seeds centers with
    k-means++ on that filled matrix, then alternates imputation and k-means.
    """
    cfg = cfg or KpodConfig()
    if k > ds.n:
        raise KGreaterThanN(k, ds.n)
    seed = resolve_seed(seed)

    run_id = generate_run_id()
    start_time = datetime.now()
    results = Parallel(n_jobs=cfg.inner.n_jobs)(
        delayed(_kpod_restart)(ds, k, stream, index, cfg)
        for index, stream in enumerate(restart_streams(seed, cfg.n_inits))
    )
    best = best_of(results)
    best.seed = seed
    best.n_inits = cfg.n_inits
    logger.info(
        "Finished k-POD fit",
        extra={
            "run_id": run_id,
            "k": k,
            "objective": best.objective,
            "method": Methods.KPOD,
            "duration_ms": elapsed_ms(start_time),
        },
    )
    return best
