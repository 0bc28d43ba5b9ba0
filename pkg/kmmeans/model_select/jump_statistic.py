"""
Jump-Statistic Model Selection

Distortions are normalized by the average effective dimension p_bar rather than p, and
the jump J_K = D_K^(-p_bar/2) - D_{K-1}^(-p_bar/2) is maximized over the sweep. With no
missing data p_bar = p and the classic statistic is recovered.
"""

import math
from typing import List, Optional, Sequence

from kmmeans.data_model import MaskedDataset
from kmmeans.errors import ConfigurationError, ZeroDistortion
from kmmeans.init import InitConfig
from kmmeans.km_core import KmConfig, default_n_inits, derive_seed, fit, resolve_seed
from kmmeans.shared_schema import KSweepResult, validate_k_range
from kmmeans.structured_logging import get_logger

logger = get_logger(__name__)


def distortion(w_k: float, n: int, p_bar: float) -> float:
    """D_K = W_K / (n p_bar)."""
    if n < 1 or p_bar <= 0 or w_k < 0:
        raise ConfigurationError(f"distortion needs n >= 1, p_bar > 0, W_K >= 0; got {n}, {p_bar}, {w_k}")
    return w_k / (n * p_bar)


def _transformed(d: float, p_bar: float) -> float:
    # D_0 contributes 0 by convention
    return 0.0 if d == 0.0 else d ** (-p_bar / 2.0)


def jump_statistic(
    distortions: Sequence[float],
    p_bar: float,
    k_values: Optional[Sequence[int]] = None,
    predecessor: float = 0.0,
) -> List[float]:
    """
    Jumps for consecutive K

    Args:
        distortions: D_K for each K in k_values (K = 1, 2, ... by default)
        p_bar: average effective dimension
        k_values: the K of each distortion, used in error reports
        predecessor: distortion of the K before the first one; 0 stands for D_0

    Raises:
        ZeroDistortion: at the first K whose distortion is 0
    """
    k_values = list(k_values) if k_values is not None else list(range(1, len(distortions) + 1))
    jumps = []
    previous = _transformed(predecessor, p_bar)
    for k, d in zip(k_values, distortions):
        if d <= 0.0:
            raise ZeroDistortion(k)
        current = _transformed(d, p_bar)
        jumps.append(current - previous)
        previous = current
    return jumps


def select_k(
    ds: MaskedDataset,
    k_range: Sequence[int],
    per_k_inits: Optional[int] = None,
    seed: Optional[int] = None,
    cfg: Optional[KmConfig] = None,
    init_cfg: Optional[InitConfig] = None,
) -> KSweepResult:
    """
    Fit every K in k_range and pick the one with the largest jump

    When the range starts above 1, K = k_min - 1 is fitted too so the first jump uses
    a real predecessor. Ties in the jumps go to the smaller K. k_range must be a run of
    consecutive integers.
    """
    k_values = sorted(set(int(k) for k in k_range))
    if not k_values:
        raise ConfigurationError("k_range is empty")
    if k_values != list(range(k_values[0], k_values[-1] + 1)):
        raise ConfigurationError(f"k_range must be contiguous; got {k_values}")
    check = validate_k_range(k_values[0], k_values[-1], ds.n)
    if not check["valid"]:
        raise ConfigurationError("; ".join(check["errors"]))
    seed = resolve_seed(seed)

    to_fit = ([k_values[0] - 1] if k_values[0] > 1 else []) + k_values
    fits = {}
    for k in to_fit:
        n_inits = per_k_inits if per_k_inits is not None else default_n_inits(k, ds.p)
        fits[k] = fit(ds, k, n_inits=n_inits, seed=derive_seed(seed, k), cfg=cfg, init_cfg=init_cfg)

    objectives = [fits[k].objective for k in k_values]
    distortions = [distortion(w, ds.n, ds.p_bar) for w in objectives]
    predecessor = (
        distortion(fits[k_values[0] - 1].objective, ds.n, ds.p_bar) if k_values[0] > 1 else 0.0
    )

    warnings = []
    for prev_k, k in zip(to_fit, to_fit[1:]):
        if fits[k].objective > fits[prev_k].objective * (1 + 1e-12):
            message = f"W_K increased from K={prev_k} to K={k}; consider more restarts"
            warnings.append(message)
            logger.warning(message, extra={"k": k, "seed": seed})

    degenerate = False
    zero_at = next((i for i, d in enumerate(distortions) if d == 0.0), None)
    if zero_at is not None:
        degenerate = True
        jumps = jump_statistic(distortions[:zero_at], ds.p_bar, k_values[:zero_at], predecessor)
        jumps += [math.inf] + [math.nan] * (len(k_values) - zero_at - 1)
        k_hat = k_values[zero_at]
        warnings.append(f"Zero distortion at K={k_hat}; selected as a degenerate fit")
        logger.warning("Zero distortion in sweep", extra={"k": k_hat, "seed": seed})
    else:
        jumps = jump_statistic(distortions, ds.p_bar, k_values, predecessor)
        k_hat = k_values[max(range(len(jumps)), key=lambda i: (jumps[i], -i))]

    return KSweepResult(
        k_values=k_values,
        objectives=objectives,
        distortions=distortions,
        jumps=jumps,
        k_hat=k_hat,
        p_bar=ds.p_bar,
        n=ds.n,
        fits={k: fits[k] for k in k_values},
        degenerate=degenerate,
        warnings=warnings,
    )
