import numpy as np
import pytest

from mqrnet.errors import ShapeError
from mqrnet.linalg import as_matrix, as_vector, matmul, require_finite
from mqrnet.rng import Rng


def naive_matmul(a, b):
    """Triple-loop oracle."""
    out = np.zeros((a.shape[0], b.shape[1]))
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            acc = 0.0
            for k in range(a.shape[1]):
                acc += a[i, k] * b[k, j]
            out[i, j] = acc
    return out


def test_identity_times_matrix():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(matmul(np.eye(2), a), a)


def test_hand_computed_product():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[1.0], [1.0]])
    np.testing.assert_array_equal(matmul(a, b), np.array([[3.0], [7.0]]))


def test_random_5x4_times_4x3_matches_oracle():
    rng = Rng(42)
    a = rng.normal(20).reshape(5, 4)
    b = rng.normal(12).reshape(4, 3)
    np.testing.assert_allclose(matmul(a, b), naive_matmul(a, b), atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_random_products_up_to_64x64(seed):
    rng = Rng(seed)
    m = int(rng.integers(1, 65))
    k = int(rng.integers(1, 65))
    n = int(rng.integers(1, 65))
    a = rng.normal(m * k).reshape(m, k)
    b = rng.normal(k * n).reshape(k, n)
    np.testing.assert_allclose(matmul(a, b), naive_matmul(a, b), atol=1e-12)


def test_dimension_mismatch_names_both_shapes():
    with pytest.raises(ShapeError, match="2x3.*4x2"):
        matmul(np.zeros((2, 3)), np.zeros((4, 2)))


def test_non_finite_rejected():
    a = np.array([[np.inf, 0.0]])
    with pytest.raises(FloatingPointError):
        matmul(a, np.ones((2, 1)))
    with pytest.raises(FloatingPointError):
        require_finite(np.array([np.nan]))


def test_as_matrix_as_vector_validation():
    with pytest.raises(ShapeError):
        as_matrix(np.zeros(3))
    with pytest.raises(ShapeError):
        as_matrix(np.zeros((2, 2)), rows=3)
    with pytest.raises(ShapeError):
        as_vector(np.zeros((2, 2)))
    assert as_vector([1, 2, 3], length=3).dtype == np.float64
