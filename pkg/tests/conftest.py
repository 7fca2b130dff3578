import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from interclust.core import Clustering, SimilarityMatrix


def planted_matrix(sets, n, within=0.9, across=0.1):
    """Uniform block similarity: `within` inside each set, `across` elsewhere."""
    values = np.full((n, n), across)
    for s in sets:
        idx = np.asarray(sorted(s))
        values[np.ix_(idx, idx)] = within
    np.fill_diagonal(values, 1.0)
    return SimilarityMatrix(values)


@pytest.fixture
def planted6():
    """The 6-point instance used throughout the tests: two 0.9/0.1 blocks."""
    target = Clustering([{0, 1, 2}, {3, 4, 5}], pure=True)
    return planted_matrix(target.member_sets(), 6), target


@pytest.fixture
def w1(planted6):
    """Proposed clustering {{0,1},{2,3},{4},{5}} against the planted target."""
    s, target = planted6
    proposed = Clustering([{0, 1}, {2, 3}, {4}, {5}])
    return s, target, proposed
