import math

import numpy as np
import pytest

from csd_errors import DataError
from kernel_core import KernelSpec, cross_kernel, gram_matrix, kernel_eval


def test_linear_kernel_is_inner_product():
    assert kernel_eval(KernelSpec.linear(), [1, 2], [3, 4]) == 11.0


def test_rbf_identity_and_known_distance():
    spec = KernelSpec.rbf(1.0)
    assert kernel_eval(spec, [0.3, 0.7], [0.3, 0.7]) == 1.0
    # ||x - y||^2 = 2
    assert kernel_eval(spec, [0.0, 0.0], [1.0, 1.0]) == pytest.approx(math.exp(-1.0), abs=1e-12)


def test_kernel_eval_rejects_dimension_mismatch():
    with pytest.raises(DataError):
        kernel_eval(KernelSpec.linear(), [1, 2], [1, 2, 3])


@pytest.mark.parametrize('sigma', [0.0, -1.0, float('nan'), None])
def test_rbf_needs_positive_sigma(sigma):
    with pytest.raises(DataError):
        KernelSpec.rbf(sigma)


def test_linear_takes_no_sigma():
    with pytest.raises(DataError):
        KernelSpec('linear', 1.0)


def test_spec_dict_round_trip():
    spec = KernelSpec.rbf(0.25)
    assert KernelSpec.from_dict(spec.to_dict()) == spec


def test_linear_gram():
    K = gram_matrix(KernelSpec.linear(), [[1.0], [2.0]])
    np.testing.assert_array_equal(K, [[1.0, 2.0], [2.0, 4.0]])


def test_flat_array_is_read_as_one_dimensional_points():
    K = gram_matrix(KernelSpec.linear(), np.array([1.0, 2.0]))
    assert K.shape == (2, 2)


@pytest.mark.parametrize('spec', [KernelSpec.linear(), KernelSpec.rbf(0.7)])
def test_gram_is_bitwise_symmetric(spec):
    P = np.random.default_rng(3).normal(size=(40, 5))
    K = gram_matrix(spec, P)
    assert np.array_equal(K, K.T)


def test_rbf_gram_diagonal_and_range():
    P = np.random.default_rng(4).random((25, 3))
    K = gram_matrix(KernelSpec.rbf(0.3), P)
    np.testing.assert_array_equal(np.diag(K), np.ones(25))
    assert np.all(K > 0) and np.all(K <= 1)


def test_rbf_gram_is_positive_semidefinite():
    P = np.random.default_rng(5).random((50, 3))
    eigenvalues = np.linalg.eigvalsh(gram_matrix(KernelSpec.rbf(1.0), P))
    assert eigenvalues.min() >= -1e-8


@pytest.mark.parametrize('spec', [KernelSpec.linear(), KernelSpec.rbf(0.05), KernelSpec.rbf(0.5),
                                  KernelSpec.rbf(5.0)])
@pytest.mark.parametrize('seed', range(6))
def test_gram_eigenvalues_are_nonnegative_relative_to_the_largest(spec, seed):
    rng = np.random.default_rng(100 + seed)
    P = rng.normal(size=(int(rng.integers(2, 101)), int(rng.integers(1, 11))))
    eigenvalues = np.linalg.eigvalsh(gram_matrix(spec, P))
    assert eigenvalues.min() >= -1e-10 * eigenvalues.max()


def test_wide_rbf_approaches_all_ones():
    P = np.random.default_rng(6).random((20, 4))
    K = gram_matrix(KernelSpec.rbf(1e6), P)
    np.testing.assert_allclose(K, np.ones((20, 20)), atol=1e-6, rtol=0)


def test_gram_entries_match_kernel_eval():
    P = np.random.default_rng(7).random((6, 2))
    spec = KernelSpec.rbf(0.5)
    K = gram_matrix(spec, P)
    for i in range(6):
        for j in range(6):
            assert K[i, j] == pytest.approx(kernel_eval(spec, P[i], P[j]), rel=1e-13)


@pytest.mark.parametrize('spec', [KernelSpec.linear(), KernelSpec.rbf(0.9)])
def test_cross_kernel_on_training_points_equals_gram(spec):
    P = np.random.default_rng(8).random((15, 3))
    np.testing.assert_allclose(cross_kernel(spec, P, P), gram_matrix(spec, P), rtol=1e-13, atol=1e-15)


def test_cross_kernel_linear_example():
    np.testing.assert_array_equal(cross_kernel(KernelSpec.linear(), [[1.0], [2.0]], [[3.0]]), [[3.0, 6.0]])


def test_cross_kernel_empty_query():
    Kq = cross_kernel(KernelSpec.rbf(1.0), [[1.0, 0.0], [2.0, 1.0]], np.empty((0, 2)))
    assert Kq.shape == (0, 2)


def test_cross_kernel_rejects_dimension_mismatch():
    with pytest.raises(DataError):
        cross_kernel(KernelSpec.linear(), [[1.0, 2.0]], [[1.0, 2.0, 3.0]])
