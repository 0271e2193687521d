import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wmcen import ValidationError, median_ape, mse_beta


def test_median_ape_odd_and_even():
    assert median_ape(np.array([[1.0, 2.0, 3.0]]), np.zeros((1, 3))) == 2.0
    assert median_ape(np.array([[1.0, 2.0, 3.0, 10.0]]), np.zeros((1, 4))) == 2.5
    y = np.arange(6.0).reshape(2, 3)
    assert median_ape(y, y) == 0.0


def test_median_ape_shape_check():
    with pytest.raises(ValidationError):
        median_ape(np.zeros((2, 2)), np.zeros((2, 3)))


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (4, 3), elements=st.floats(-100, 100)))
def test_median_ape_invariant_to_row_order(err):
    assert median_ape(err, np.zeros_like(err)) == median_ape(err[::-1], np.zeros_like(err))


def test_mse_beta_examples():
    b = np.arange(6.0).reshape(2, 3)
    assert mse_beta(b, b) == 0.0
    c = b.copy()
    c[1, 2] += 3.0
    assert mse_beta(c, b) == 1.5


def test_mse_beta_homogeneous(rng):
    b = rng.standard_normal((3, 4))
    e = rng.standard_normal((3, 4))
    assert mse_beta(b + 3 * e, b) == pytest.approx(9 * mse_beta(b + e, b), rel=1e-12)
