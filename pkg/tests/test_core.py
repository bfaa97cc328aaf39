import numpy as np
import pytest

from actnet.core import DimensionError, as_matrix, hadamard, make_rng, row_sums, sample_normal, sample_uniform_box


class TestDenseHelpers:
    def test_as_matrix_rejects_vectors(self):
        with pytest.raises(DimensionError):
            as_matrix([1.0, 2.0])

    def test_hadamard_shape_mismatch(self):
        with pytest.raises(DimensionError):
            hadamard(np.ones((2, 3)), np.ones((3, 2)))

    def test_hadamard_values(self):
        assert np.array_equal(hadamard([[1, 2]], [[3, 4]]), [[3.0, 8.0]])

    def test_row_sums(self):
        assert np.array_equal(row_sums([[1, 2], [3, 4]]), [3.0, 7.0])
        assert row_sums([1.0, 2.0, 3.0]) == 6.0
        with pytest.raises(DimensionError):
            row_sums(np.zeros(0))


class TestRandomStreams:
    def test_same_seed_same_stream(self):
        a = make_rng(5, 1).normal(size=8)
        b = make_rng(5, 1).normal(size=8)
        assert np.array_equal(a, b)

    def test_streams_differ(self):
        assert not np.array_equal(make_rng(5, 0).normal(size=8), make_rng(5, 1).normal(size=8))

    def test_negative_seed(self):
        with pytest.raises(ValueError):
            make_rng(-1)

    def test_zero_std_gives_constant(self):
        assert np.array_equal(sample_normal(make_rng(0), 4, 2.5, 0.0), np.full(4, 2.5))
        with pytest.raises(ValueError):
            sample_normal(make_rng(0), 4, 0.0, -1.0)

    def test_uniform_box_bounds(self):
        X = sample_uniform_box(make_rng(0), 1000, [-1, 0], [1, 2])
        assert X.shape == (1000, 2)
        assert X[:, 0].min() >= -1 and X[:, 0].max() <= 1
        assert X[:, 1].min() >= 0 and X[:, 1].max() <= 2
        with pytest.raises(ValueError):
            sample_uniform_box(make_rng(0), 3, [1.0], [0.0])
