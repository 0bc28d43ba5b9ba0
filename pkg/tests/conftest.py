"""
Shared fixtures: random masked datasets and from-scratch objective oracles.
"""

import itertools

import numpy as np
import pytest

from kmmeans.data_model import MaskedDataset


def make_masked(rng, n, p, lam, loc=None):
    """Gaussian rows with an MCAR mask; every row keeps at least one observed cell."""
    values = rng.normal(size=(n, p))
    if loc is not None:
        values += loc
    mask = rng.random((n, p)) >= lam
    empty = ~mask.any(axis=1)
    mask[empty, rng.integers(p, size=int(empty.sum()))] = True
    return MaskedDataset(values, mask)


def naive_set_wss(values, mask, rows):
    """Masked within-set sum of squares by looping over features."""
    total = 0.0
    for j in range(values.shape[1]):
        observed = [values[i, j] for i in rows if mask[i, j]]
        if observed:
            mean = sum(observed) / len(observed)
            total += sum((v - mean) ** 2 for v in observed)
    return total


def naive_objective(ds, labels, k):
    return sum(naive_set_wss(ds.values, ds.mask, np.flatnonzero(labels == c)) for c in range(k))


def enumerate_bipartition_minimum(ds):
    """Global minimum of the masked objective over every 2-cluster partition."""
    best = np.inf
    n = ds.n
    for bits in itertools.product((0, 1), repeat=n - 1):
        labels = np.array((0,) + bits)
        if labels.sum() == 0:
            continue
        best = min(best, naive_objective(ds, labels, 2))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture
def masked_factory(rng):
    def factory(n=40, p=4, lam=0.25, loc=None):
        return make_masked(rng, n, p, lam, loc)

    return factory


@pytest.fixture
def blobs():
    """Three well separated 2-d blobs, 20% MCAR."""
    gen = np.random.default_rng(7)
    centers = np.array([[0.0, 0.0], [12.0, 0.0], [0.0, 12.0]])
    labels = np.repeat(np.arange(3), 50)
    values = centers[labels] + gen.normal(size=(150, 2))
    mask = gen.random((150, 2)) >= 0.2
    mask[~mask.any(axis=1), 0] = True
    return MaskedDataset(values, mask), labels
