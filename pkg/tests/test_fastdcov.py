import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from serialdep.distance import dcor, dcov_v
from serialdep.fastdcov import dcor_fast_univariate, dcov_fast_univariate

# integer-valued draws produce many ties
values = st.integers(-5, 5).map(float) | st.floats(-100, 100, allow_nan=False)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 60).flatmap(lambda n: st.tuples(arrays(np.float64, n, elements=values),
                                                       arrays(np.float64, n, elements=values))))
def test_matches_quadratic_definition(xy):
    x, y = xy
    ref = dcov_v(x, y)
    assert dcov_fast_univariate(x, y) == pytest.approx(ref, rel=1e-9, abs=1e-9 * (1 + np.ptp(x) * np.ptp(y)))


def test_random_large(rng):
    x = rng.standard_normal(700)
    y = x**2 + rng.standard_normal(700)
    assert dcov_fast_univariate(x, y) == pytest.approx(dcov_v(x, y), rel=1e-10)
    assert dcor_fast_univariate(x, y) == pytest.approx(dcor(x, y), rel=1e-10)


def test_two_points():
    assert dcov_fast_univariate([0.0, 1.0], [0.0, 1.0]) == pytest.approx(0.25)


def test_constant():
    assert dcor_fast_univariate(np.ones(9), np.arange(9.0)) == 0.0


def test_validation():
    with pytest.raises(ValueError):
        dcov_fast_univariate([0.0, 1.0], [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        dcov_fast_univariate([[0.0, 1.0], [1.0, 2.0]], [0.0, 1.0])
    with pytest.raises(ValueError):
        dcov_fast_univariate([0.0, np.inf], [0.0, 1.0])
