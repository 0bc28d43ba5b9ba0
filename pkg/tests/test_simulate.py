"""
Simulation Tests

Mixture generator, the four missingness mechanisms, the adjusted Rand index and the
replicate harness.
"""

import json

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.stats import chi2_contingency

from kmmeans.data_model import MaskedDataset
from kmmeans.errors import InfeasibleRate, LengthMismatch
from kmmeans.km_core import KmConfig, fit
from kmmeans.shared_schema import Mechanisms, Methods
from kmmeans.simulate import (
    MissingSpec,
    SimSpec,
    StudyGrid,
    adjusted_rand,
    apply_mar,
    apply_mcar,
    apply_missingness,
    apply_nmar1,
    apply_nmar2,
    confusion_matrix,
    generate_clusters,
    run_replicate,
    run_study,
    summarize,
)


def test_single_cluster_sample_mean_near_center():
    spec = SimSpec(k=1, n=400, p=3, sigma=2.0, seed=5)
    data = generate_clusters(spec)
    assert np.all(np.abs(data.matrix.mean(axis=0) - data.centers[0]) < 4 * 2.0 / np.sqrt(400))


def test_generator_within_cluster_variance_is_sigma_squared():
    """Per cluster and feature, the sample variance lies within 3 standard errors of sigma^2."""
    spec = SimSpec(k=2, n=4000, p=2, sigma=1.5, seed=9)
    data = generate_clusters(spec)
    for c in range(spec.k):
        members = data.matrix[data.labels == c]
        se = spec.sigma**2 * np.sqrt(2.0 / (members.shape[0] - 1))
        for j in range(spec.p):
            assert abs(members[:, j].var(ddof=1) - spec.sigma**2) <= 3 * se


def test_generator_is_deterministic_and_separated():
    spec = SimSpec(k=4, n=200, p=5, separation=6.0, seed=9)
    a, b = generate_clusters(spec), generate_clusters(spec)
    assert np.array_equal(a.matrix, b.matrix)
    assert np.array_equal(a.labels, b.labels)
    gaps = [np.linalg.norm(a.centers[i] - a.centers[j]) for i in range(4) for j in range(i + 1, 4)]
    assert min(gaps) >= 6.0


def test_sim_spec_validates_mixing():
    with pytest.raises(ValidationError):
        SimSpec(k=2, mixing=[0.5, 0.6])
    with pytest.raises(ValidationError):
        SimSpec(k=5, n=3)


def test_far_apart_pair_is_recovered_exactly():
    """Separation 20 with K = 2 gives ARI 1."""
    for seed in range(5):
        data = generate_clusters(SimSpec(k=2, n=100, p=3, separation=20.0, seed=seed))
        result = fit(MaskedDataset.complete(data.matrix), 2, n_inits=5, seed=seed, cfg=KmConfig(n_jobs=1))
        assert adjusted_rand(data.labels, result.labels) == 1.0


def test_mcar_zero_rate_is_full_mask():
    result = apply_mcar(np.zeros((50, 4)), 0.0, np.random.default_rng(0))
    assert result.mask.all()
    assert result.realized_lambda == 0.0


def test_mcar_realized_rate_close_to_requested():
    result = apply_mcar(np.zeros((1000, 10)), 0.2, np.random.default_rng(1))
    assert abs(result.realized_lambda - 0.2) < 0.015
    assert result.mask.any(axis=1).all()


def test_mcar_missingness_is_independent_of_cluster():
    """Missing and observed cell counts per true cluster pass a chi-square independence check."""
    table = np.zeros((3, 2))
    for seed in range(20):
        data = generate_clusters(SimSpec(k=3, n=600, p=4, seed=seed))
        mask = apply_mcar(data.matrix, 0.2, np.random.default_rng(seed + 100)).mask
        for c in range(3):
            cells = mask[data.labels == c]
            table[c] += [(~cells).sum(), cells.sum()]
    _, p_value, _, _ = chi2_contingency(table)
    assert p_value > 0.001


def test_mar_censors_a_fixed_share_of_dimensions():
    """p = 10, lambda = 0.2: four dimensions at rate 0.5, six untouched."""
    result = apply_mar(np.zeros((2000, 10)), 0.2, 0.4, np.random.default_rng(2))
    assert len(result.censored_dims) == 4
    assert result.rate == 0.5
    untouched = [j for j in range(10) if j not in result.censored_dims]
    assert result.mask[:, untouched].all()
    assert abs(1 - result.mask[:, result.censored_dims].mean() - 0.5) < 0.03


def test_mar_rate_and_overall_fraction():
    result = apply_mar(np.zeros((2000, 5)), 0.3, 0.4, np.random.default_rng(3))
    assert result.rate == pytest.approx(0.75)
    assert abs(result.realized_lambda - 0.3) < 0.02


def test_mar_infeasible_rate():
    with pytest.raises(InfeasibleRate):
        apply_mar(np.zeros((10, 5)), 0.5, 0.4, np.random.default_rng(0))


def test_nmar1_rate_inside_affected_cluster():
    """One of two equal clusters affected at lambda = 0.1 censors it at 0.2."""
    labels = np.repeat([0, 1], 1000)
    result = apply_nmar1(np.zeros((2000, 5)), labels, 0.1, [0], np.random.default_rng(4))
    assert result.rate == pytest.approx(0.2)
    assert result.mask[labels == 1].all()
    assert abs(1 - result.mask[labels == 0].mean() - 0.2) < 0.02


def test_nmar2_censors_bottom_quantile():
    """The two smallest values of each dimension inside the affected cluster go missing."""
    column = np.arange(10.0)
    matrix = np.column_stack([column, column[::-1]])
    result = apply_nmar2(matrix, np.zeros(10, dtype=int), 0.2, [0])
    assert np.flatnonzero(~result.mask[:, 0]).tolist() == [0, 1]
    assert np.flatnonzero(~result.mask[:, 1]).tolist() == [8, 9]
    assert result.repaired_rows == []


def test_nmar2_restores_rows_it_would_empty():
    """In one dimension a censored row gets its only cell back."""
    result = apply_nmar2(np.arange(10.0).reshape(-1, 1), np.zeros(10, dtype=int), 0.2, [0])
    assert result.repaired_rows == [0, 1]
    assert result.mask.all()


def test_zero_lambda_is_full_mask_for_every_mechanism():
    matrix = np.random.default_rng(0).normal(size=(40, 5))
    labels = np.repeat([0, 1], 20)
    for mechanism in Mechanisms.ALL:
        result = apply_missingness(matrix, labels, MissingSpec(mechanism=mechanism, lam=0.0, seed=1))
        assert result.mask.all()


def test_missing_spec_accepts_lambda_alias():
    spec = MissingSpec.model_validate({"mechanism": "MAR", "lambda": 0.2})
    assert spec.lam == 0.2
    with pytest.raises(ValidationError):
        MissingSpec(mechanism="MNAR", lam=0.1)


def test_adjusted_rand_identical_labelings():
    assert adjusted_rand([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]) == 1.0
    assert adjusted_rand([1, 1, 1], [4, 4, 4]) == 1.0


def test_adjusted_rand_hand_example():
    assert adjusted_rand([1, 1, 2, 2], [1, 2, 1, 2]) == -0.5


def test_adjusted_rand_is_label_permutation_invariant():
    a = [0, 0, 1, 1, 2, 2, 2]
    b = [1, 1, 0, 2, 2, 2, 0]
    relabeled = [{0: 5, 1: 3, 2: 9}[v] for v in b]
    assert adjusted_rand(a, b) == adjusted_rand(a, relabeled)


def test_adjusted_rand_near_zero_for_independent_labelings():
    gen = np.random.default_rng(10)
    values = [adjusted_rand(gen.integers(4, size=200), gen.integers(4, size=200)) for _ in range(1000)]
    assert abs(np.mean(values)) < 0.02


def test_adjusted_rand_length_mismatch():
    with pytest.raises(LengthMismatch):
        adjusted_rand([0, 1], [0, 1, 1])


def test_confusion_matrix_counts():
    table = confusion_matrix([0, 0, 1], [1, 1, 1])
    assert table.loc[0, 1] == 2
    assert table.loc[1, 1] == 1


def test_run_replicate_records_every_method():
    sim = SimSpec(k=3, n=120, p=3, separation=8.0, seed=2)
    missing = MissingSpec(mechanism="MCAR", lam=0.1, seed=3)
    records = run_replicate(
        sim, missing, methods=(Methods.KM_MEANS, Methods.KPOD, Methods.COMPLETE_CASE), n_inits=3, k_range=[2, 3, 4]
    )
    assert [r.method for r in records] == [Methods.KM_MEANS, Methods.KPOD, Methods.COMPLETE_CASE]
    km = records[0]
    assert km.ARI > 0.9
    assert km.k_hat in (2, 3, 4)
    assert km.ari_at_k_hat is not None
    assert records[1].k_hat is None
    assert abs(km.realized_lambda - 0.1) < 0.05


def test_run_study_writes_json_lines(tmp_path):
    grid = StudyGrid(k_values=[2], n_values=[60], p_values=[2], lambdas=[0.1], mechanisms=["MCAR"])
    out = tmp_path / "study.jsonl"
    records = run_study(grid, replicates=2, seed=4, out_path=out, n_inits=2)
    lines = out.read_text().splitlines()
    assert len(lines) == len(records) == 4
    first = json.loads(lines[0])
    assert {"seed", "spec", "mechanism", "realized_lambda", "W_K", "ARI", "per_init_ms"} <= set(first)
    summary = summarize(records)
    assert set(summary) == {Methods.KM_MEANS, Methods.KPOD}
    assert summary[Methods.KM_MEANS]["replicates"] == 2


def test_run_study_is_reproducible():
    grid = StudyGrid(k_values=[2], n_values=[50], p_values=[2], lambdas=[0.2], mechanisms=["MAR"])
    a = run_study(grid, replicates=2, seed=8, n_inits=2)
    b = run_study(grid, replicates=2, seed=8, n_inits=2, n_jobs=2)
    assert [r.W_K for r in a] == [r.W_K for r in b]
    assert [r.realized_lambda for r in a] == [r.realized_lambda for r in b]


def test_full_grid_size():
    assert len(list(StudyGrid.full().cells())) == 2 * 3 * 2 * 4 * 4 * 3
