import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from freesuper import measures as M
from freesuper.measures import Domain


def test_validate_point_mass():
    m = M.atomic(Domain.LINE, [0.0], [1.0])
    assert M.validate(m) is m


def test_not_normalized_atomic():
    with pytest.raises(M.NotNormalized):
        M.atomic(Domain.LINE, [0.0, 1.0], [0.5, 0.6])


def test_not_normalized_grid():
    x = np.linspace(0, 1, 101)
    with pytest.raises(M.NotNormalized):
        M.grid(Domain.LINE, x, np.full(101, 0.99), normalize=False)


def test_invalid_weights_and_support():
    with pytest.raises(M.InvalidWeights):
        M.atomic(Domain.LINE, [0.0, 1.0], [1.5, -0.5])
    with pytest.raises(M.InvalidSupport):
        M.atomic(Domain.HALFLINE, [-1.0], [1.0])
    with pytest.raises(M.InvalidSupport):
        M.atomic(Domain.LINE, [1.0, 1.0], [0.5, 0.5])


def test_moments():
    assert M.mean(M.point_mass(2.5)) == 2.5
    assert M.variance(M.point_mass(2.5)) == 0
    b = M.symmetric_bernoulli(1.0)
    assert M.mean(b) == 0 and M.variance(b) == 1
    c = M.atomic(Domain.CIRCLE, [0.0, np.pi / 2], [0.9, 0.1])
    assert abs(M.moment(c, 1) - (0.9 + 0.1j)) < 1e-15


@pytest.mark.parametrize("a", [-1.5, 0.0, 0.3, 2.0])
@pytest.mark.parametrize("k", range(5))
def test_point_mass_moments_exact(a, k):
    assert M.moment(M.point_mass(a), k) == a ** k


def test_grid_moments():
    sc = M.semicircle_grid()
    assert abs(M.moment(sc, 0) - 1) < 1e-8
    assert abs(M.variance(sc) - 1) < 1e-4
    haar = M.haar_grid()
    assert abs(M.moment(haar, 1)) < 1e-8


def test_deficit_examples():
    row = M.ArrayRow([M.point_mass(0.0)] * 3)
    assert M.infinitesimality_deficit(row, 0.1) == 0
    row = M.ArrayRow([M.symmetric_bernoulli(0.5)])
    assert M.infinitesimality_deficit(row, 0.4) == 1
    assert M.infinitesimality_deficit(row, 0.6) == 0


def test_row_domain_mismatch():
    with pytest.raises(M.InvalidSupport):
        M.ArrayRow([M.point_mass(0.0), M.point_mass(1.0, Domain.HALFLINE)])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=5, unique=True),
       st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_deficit_nonincreasing_and_validate_idempotent(pos, e1, e2):
    w = np.full(len(pos), 1.0 / len(pos))
    m = M.atomic(Domain.LINE, pos, w)
    assert M.validate(M.validate(m)) == m
    row = M.ArrayRow([m, M.point_mass(0.0)])
    lo, hi = sorted([e1, e2])
    assert M.infinitesimality_deficit(row, hi) <= M.infinitesimality_deficit(row, lo)


def test_circle_angles_wrapped():
    m = M.atomic(Domain.CIRCLE, [-np.pi / 2], [1.0])
    assert 0 <= m.positions[0] < 2 * np.pi
