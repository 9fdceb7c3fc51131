import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from semcert.errors import (
    AsymmetricDistance,
    BadBaseIndex,
    InputError,
    NegativeDistance,
    NonFiniteValue,
    NonpositiveParameters,
    NotPseudoMetric,
    SpaceMismatch,
    TriangleViolation,
)
from semcert.metric_space import (
    CostMatrix,
    Distribution,
    as_weights,
    capped_lipschitz_cost,
    far_indicator_cost,
    metric_cost,
    mismatch_cost,
    separating_family,
    space_from_positions,
    validate_space,
    worst_triangle_violation,
)


def labels(n):
    return [f"s{i}" for i in range(n)]


def triangle_excess(c):
    # exhaustive i, j, k scan
    n = len(c)
    return max(c[i, k] - c[i, j] - c[j, k] for i in range(n) for j in range(n) for k in range(n))


positions = arrays(np.float64, st.integers(2, 9), elements=st.floats(-5, 5, allow_nan=False), unique=True)
planar = arrays(np.float64, st.tuples(st.integers(2, 8), st.just(2)), elements=st.floats(-3, 3, allow_nan=False))


def planar_space(pts):
    d = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1))
    return validate_space(labels(len(pts)), d)


def test_validate_space_accepts_metric():
    s = validate_space(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]], base_index=1)
    assert s.size == 3 and s.base == 1
    assert s.index("c") == 2
    assert not s.dist.flags.writeable


@pytest.mark.parametrize("dist, exc", [
    ([[0, 1], [2, 0]], AsymmetricDistance),
    ([[0, -1], [-1, 0]], NegativeDistance),
    ([[0, np.inf], [np.inf, 0]], NonFiniteValue),
    ([[1, 1], [1, 0]], InputError),
    ([[0, 1], [1, 0], [1, 1]], InputError),
])
def test_validate_space_rejects(dist, exc):
    with pytest.raises(exc):
        validate_space(["a", "b"], dist)


def test_triangle_violation_reports_triple():
    d = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
    with pytest.raises(TriangleViolation) as err:
        validate_space(["a", "b", "c"], d)
    assert err.value.triple[1] == 1 and set(err.value.triple) == {0, 1, 2}
    assert err.value.excess == 3.0


def test_worst_triangle_violation_finds_excess():
    d = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0.]])
    excess, (i, j, k) = worst_triangle_violation(d)
    assert excess == 3.0 and j == 1 and {i, k} == {0, 2}


@pytest.mark.parametrize("base", [-1, 3, 1.5, "0"])
def test_bad_base_index(base):
    with pytest.raises(BadBaseIndex):
        validate_space(["a", "b", "c"], [[0, 1, 2], [1, 0, 1], [2, 1, 0]], base_index=base)


def test_duplicate_labels():
    with pytest.raises(InputError):
        validate_space(["a", "a"], [[0, 1], [1, 0]])


def test_pseudo_metric_zero_distance_allowed():
    s = validate_space(["a", "b", "c"], [[0, 0, 1], [0, 0, 1], [1, 1, 0]])
    assert s.dist[0, 1] == 0


def test_ball_is_open():
    s = space_from_positions(labels(5), [0, 1, 2, 3, 4])
    assert list(s.ball(0, 2.0)) == [0, 1]
    assert list(s.ball(2, 1.0)) == [2]


def test_radial():
    s = space_from_positions(labels(4), [0, 1, 3, 6], base_index=1)
    assert s.radial(2, 3) == 5
    np.testing.assert_array_equal(s.radial(np.array([0, 2]), np.array([3, 0])), [5, 2])


def test_line_positions_realise_distances():
    s = space_from_positions(labels(5), [3.0, -1.0, 0.5, 7.0, 2.0])
    p = s.line_positions
    np.testing.assert_allclose(np.abs(p[:, None] - p[None, :]), s.dist, atol=1e-12)


def test_line_positions_none_off_line():
    s = validate_space(labels(3), [[0, 1, 1], [1, 0, 1], [1, 1, 0]])
    assert s.line_positions is None


def test_distribution_checks():
    s = space_from_positions(labels(3), [0, 1, 2])
    mu = Distribution(s, [0.25, 0.75, 0])
    assert list(mu.support) == [0, 1]
    with pytest.raises(InputError):
        Distribution(s, [0.5, 0.6, 0])
    with pytest.raises(InputError):
        Distribution(s, [-0.1, 1.1, 0])
    with pytest.raises(SpaceMismatch):
        Distribution(s, [1.0, 0])
    other = space_from_positions(labels(3), [0, 1, 5])
    with pytest.raises(SpaceMismatch):
        as_weights(mu, other)


def test_dirac():
    s = space_from_positions(labels(3), [0, 1, 2])
    np.testing.assert_array_equal(s.dirac(2).weights, [0, 0, 1])


def test_capped_cost_values():
    s = space_from_positions(labels(4), [0, 0.1, 0.5, 3])
    c = capped_lipschitz_cost(s, 1.0, 10.0)
    np.testing.assert_allclose(c.values, np.minimum(2.0, 10 * s.dist))
    assert c.is_pseudo_metric and c.line is not None


@pytest.mark.parametrize("A, K", [(-1, 1), (1, -1), (0, 0)])
def test_capped_cost_rejects(A, K):
    s = space_from_positions(labels(2), [0, 1])
    with pytest.raises(NonpositiveParameters):
        capped_lipschitz_cost(s, A, K)


def test_separating_family_rejects_non_integer():
    s = space_from_positions(labels(2), [0, 1])
    with pytest.raises(InputError):
        separating_family(s, 1.5)
    with pytest.raises(InputError):
        separating_family(s, 0)


def test_mismatch_cost():
    c = mismatch_cost(4)
    np.testing.assert_array_equal(c.values, 1 - np.eye(4))


def test_far_indicator_not_pseudo_metric():
    s = space_from_positions(labels(3), [0, 1, 2])
    c = far_indicator_cost(s, 1.0)
    np.testing.assert_array_equal(c.values, [[0, 0, 1], [0, 0, 0], [1, 0, 0]])
    assert not c.is_pseudo_metric


def test_cost_matrix_rejects_bad_pseudo_metric():
    with pytest.raises(NotPseudoMetric):
        CostMatrix(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0.]]), True)
    with pytest.raises(NotPseudoMetric):
        CostMatrix(np.array([[0, 1], [2, 0.]]), True)
    with pytest.raises(InputError):
        CostMatrix(np.array([[0, -1], [-1, 0.]]))


@given(planar)
def test_constructed_costs_are_pseudo_metrics(pts):
    s = planar_space(pts)
    for c in (metric_cost(s), capped_lipschitz_cost(s, 0.7, 3.0), separating_family(s, 4), mismatch_cost(s.size)):
        v = c.values
        assert np.allclose(v, v.T, atol=0) and np.all(np.diag(v) == 0)
        assert triangle_excess(v) <= 1e-12


@given(positions, st.integers(1, 30))
def test_separating_family_monotone_and_capped(pos, n):
    s = space_from_positions(labels(len(pos)), pos)
    lo, hi = separating_family(s, n).values, separating_family(s, n + 1).values
    assert np.all(lo <= hi) and np.all(hi <= 1)


@given(positions, st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0, 3), st.floats(0, 3))
def test_capped_cost_monotone_in_A_and_K(pos, A, K, dA, dK):
    s = space_from_positions(labels(len(pos)), pos)
    base = capped_lipschitz_cost(s, A, K).values
    assert np.all(base <= capped_lipschitz_cost(s, A + dA, K).values)
    assert np.all(base <= capped_lipschitz_cost(s, A, K + dK).values)


@given(positions, st.integers(0, 8))
def test_space_from_positions_round_trip(pos, base):
    base = base % len(pos)
    s = space_from_positions(labels(len(pos)), pos, base)
    assert s.base_index == base
    assert worst_triangle_violation(s.dist)[0] <= 1e-12
    p = s.line_positions
    assert p is not None
    np.testing.assert_allclose(np.abs(p[:, None] - p[None, :]), s.dist, atol=1e-9)
