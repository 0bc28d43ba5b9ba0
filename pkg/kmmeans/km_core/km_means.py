"""
k_m-means Driver

Runs the alternation of optimal- and quick-transfer stages from a set of initial
centers, and the restart loop that seeds each run with k-means++ on its own RNG
stream. Restarts may run in parallel through joblib; the selected result depends only
on the seed, never on execution order.
"""

from datetime import datetime
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field

from kmmeans.data_model import CenterMatrix, MaskedDataset, cluster_means, objective, sigma_sq_hat
from kmmeans.errors import ConfigurationError, KGreaterThanN
from kmmeans.init import InitConfig, kmeanspp_init
from kmmeans.km_core.transfer import (
    TransferState,
    assign_initial,
    optimal_transfer_pass,
    quick_transfer_pass,
)
from kmmeans.settings import settings
from kmmeans.shared_schema import FitResult, Methods
from kmmeans.structured_logging import elapsed_ms, generate_run_id, get_logger

logger = get_logger(__name__)


class KmConfig(BaseModel):
    """Configuration of one k_m-means fit"""

    max_optimal_passes: int = Field(
        default=100, ge=1, description="Optimal-transfer passes before declaring non-convergence"
    )
    rng_seed: Optional[int] = Field(default=None, ge=0, description="Root seed when fit() gets none")
    track_history: bool = Field(default=False, description="Record W_K after every transfer")
    n_jobs: int = Field(default_factory=lambda: settings.n_jobs, description="joblib workers")


def default_n_inits(k: int, p: int) -> int:
    """100 K p restarts, capped by KMMEANS_MAX_INITS when set."""
    n_inits = 100 * k * p
    if settings.max_inits is not None:
        n_inits = min(n_inits, settings.max_inits)
    return n_inits


def resolve_seed(seed: Optional[int]) -> int:
    """Return seed, or fresh entropy recorded as an int so the run can be replayed."""
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy)


def restart_streams(seed: int, n_inits: int) -> List[np.random.SeedSequence]:
    """Independent child streams; stream i depends only on (seed, i)."""
    return np.random.SeedSequence(seed).spawn(n_inits)


def run_km_means(
    ds: MaskedDataset,
    k: int,
    init_centers: CenterMatrix,
    cfg: Optional[KmConfig] = None,
) -> FitResult:
    """
    Run the transfer iteration from the given centers to a local optimum

    Returns a FitResult whose objective is recomputed from scratch; `converged` is False
    when max_optimal_passes was reached.
    """
    cfg = cfg or KmConfig()
    if k > ds.n:
        raise KGreaterThanN(k, ds.n)
    if init_centers.k != k:
        raise ConfigurationError(f"Got {init_centers.k} initial centers for K={k}")

    start = assign_initial(ds, init_centers)
    state = TransferState.start(ds, start.partition, start.clusters, cfg.track_history)

    converged = True
    if k > 1:
        converged = False
        while state.optimal_passes < cfg.max_optimal_passes:
            if optimal_transfer_pass(state).converged:
                converged = True
                break
            quick = quick_transfer_pass(state, max_sweeps=cfg.max_optimal_passes)
            if k == 2:
                # a finished quick stage has compared every row with the only alternative
                converged = quick.converged
                break
            state.live.last_update_step[:] = 0

    result = finish_fit(ds, state.partition, Methods.KM_MEANS)
    result.transfers = state.transfers
    result.iterations = state.optimal_passes
    result.quick_passes = state.quick_passes
    result.converged = converged
    result.unassignable_rows = start.unassignable_rows
    result.repaired_clusters = start.repaired_clusters
    result.history = state.history
    if not converged:
        message = f"No convergence after {state.optimal_passes} optimal-transfer passes"
        result.warnings.append(message)
        logger.warning(message, extra={"k": k, "objective": result.objective})
    return result


def finish_fit(ds: MaskedDataset, partition, method: str) -> FitResult:
    """FitResult with means and W_K recomputed from scratch for a terminal partition."""
    cs = cluster_means(ds, partition)
    w = objective(ds, partition, cs)
    return FitResult(
        partition=partition,
        centers=cs.center_matrix(),
        objective=w,
        sigma_sq_hat=sigma_sq_hat(ds, w),
        method=method,
    )


def _run_restart(
    ds: MaskedDataset,
    k: int,
    stream: np.random.SeedSequence,
    index: int,
    cfg: KmConfig,
    init_cfg: InitConfig,
) -> FitResult:
    rng = np.random.default_rng(stream)
    centers = kmeanspp_init(ds, k, rng, init_cfg)
    result = run_km_means(ds, k, centers, cfg)
    result.init_index = index
    return result


def best_of(results: List[FitResult]) -> FitResult:
    """Deterministic reduction by (objective, init_index)."""
    return min(results, key=lambda r: (r.objective, r.init_index))


def fit(
    ds: MaskedDataset,
    k: int,
    n_inits: Optional[int] = None,
    seed: Optional[int] = None,
    cfg: Optional[KmConfig] = None,
    init_cfg: Optional[InitConfig] = None,
) -> FitResult:
    """
    Best of n_inits seeded k_m-means runs

    Args:
        ds: masked dataset
        k: number of clusters
        n_inits: restarts; defaults to 100 K p
        seed: root seed; every restart derives its own stream from it
        cfg: iteration configuration (n_jobs controls parallel restarts)
        init_cfg: seeding weighting

    Returns:
        FitResult with the smallest W_K, ties going to the lowest restart index
    """
    cfg = cfg or KmConfig()
    init_cfg = init_cfg or InitConfig()
    if k > ds.n:
        raise KGreaterThanN(k, ds.n)
    n_inits = default_n_inits(k, ds.p) if n_inits is None else n_inits
    if n_inits < 1:
        raise ConfigurationError(f"n_inits must be at least 1, got {n_inits}")
    seed = resolve_seed(seed if seed is not None else cfg.rng_seed)

    run_id = generate_run_id()
    start_time = datetime.now()
    logger.info(
        "Starting k_m-means fit",
        extra={"run_id": run_id, "k": k, "n_inits": n_inits, "seed": seed},
    )

    streams = restart_streams(seed, n_inits)
    results = Parallel(n_jobs=cfg.n_jobs)(
        delayed(_run_restart)(ds, k, stream, index, cfg, init_cfg)
        for index, stream in enumerate(streams)
    )

    best = best_of(results)
    best.seed = seed
    best.n_inits = n_inits
    logger.info(
        "Finished k_m-means fit",
        extra={
            "run_id": run_id,
            "k": k,
            "objective": best.objective,
            "init_index": best.init_index,
            "duration_ms": elapsed_ms(start_time),
        },
    )
    return best


def derive_seed(seed: int, key: int) -> int:
    """Integer seed for a sub-task (one K of a sweep, one replicate) of a root seed."""
    state = np.random.SeedSequence(seed, spawn_key=(key,)).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])
