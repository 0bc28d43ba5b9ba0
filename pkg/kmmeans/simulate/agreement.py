"""
Adjusted Rand Index

Hubert-Arabie chance-corrected agreement between two labelings, computed from their
contingency table in exact integer arithmetic up to the final division.
"""

from typing import Sequence

import numpy as np
import pandas as pd
from scipy.special import comb

from kmmeans.errors import DataError, DegenerateDenominator, LengthMismatch


def contingency_table(a: Sequence, b: Sequence) -> np.ndarray:
    """Counts n_ij of rows labeled i in a and j in b."""
    _, a_codes = np.unique(np.asarray(a), return_inverse=True)
    _, b_codes = np.unique(np.asarray(b), return_inverse=True)
    table = np.zeros((a_codes.max() + 1, b_codes.max() + 1), dtype=np.int64)
    np.add.at(table, (a_codes, b_codes), 1)
    return table


def confusion_matrix(predicted: Sequence, truth: Sequence) -> pd.DataFrame:
    """Rows are predicted groups, columns true classes."""
    return pd.crosstab(
        pd.Series(np.asarray(predicted), name="predicted"),
        pd.Series(np.asarray(truth), name="truth"),
    )


def _pairs(counts: np.ndarray) -> int:
    return sum(int(comb(int(c), 2, exact=True)) for c in counts.ravel())


def adjusted_rand(a: Sequence, b: Sequence) -> float:
    """
    Adjusted Rand index of two labelings of the same rows

    Raises:
        LengthMismatch: labelings differ in length
        DegenerateDenominator: both partitions trivial yet different
    """
    if len(a) != len(b):
        raise LengthMismatch(len(a), len(b))
    n = len(a)
    if n < 2:
        raise DataError("adjusted_rand needs at least two rows")

    table = contingency_table(a, b)
    index = _pairs(table)
    sum_a = _pairs(table.sum(axis=1))
    sum_b = _pairs(table.sum(axis=0))
    total = int(comb(n, 2, exact=True))

    # (index - E) / (M - E), scaled by 2 * total to stay in integers
    numerator = 2 * total * index - 2 * sum_a * sum_b
    denominator = total * (sum_a + sum_b) - 2 * sum_a * sum_b
    if denominator == 0:
        identical = np.count_nonzero(table) == table.shape[0] == table.shape[1]
        if identical:
            return 1.0
        raise DegenerateDenominator()
    return numerator / denominator
