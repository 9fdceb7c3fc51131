import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse.csgraph import connected_components

from semcert.errors import InputError, NonFiniteValue, NotStochastic, SpaceMismatch
from semcert.kernel import (
    Kernel,
    apply_function,
    closed_classes,
    invariant_measures,
    push_measure,
    push_weights,
    stationary,
    step,
)
from semcert.metric_space import Distribution, space_from_positions


def line_space(n):
    return space_from_positions([str(i) for i in range(n)], np.arange(n, dtype=float))


@st.composite
def kernels(draw, max_size=7):
    n = draw(st.integers(1, max_size))
    rows = []
    for _ in range(n):
        w = np.array(draw(st.lists(st.integers(0, 5), min_size=n, max_size=n)), dtype=float)
        if w.sum() == 0:
            w[draw(st.integers(0, n - 1))] = 1.0
        rows.append(w / w.sum())
    return Kernel(line_space(n), np.array(rows))


@st.composite
def kernel_and_weights(draw):
    k = draw(kernels())
    w = np.array(draw(st.lists(st.integers(0, 9), min_size=k.size, max_size=k.size)), dtype=float)
    w[0] += 1
    return k, w / w.sum()


def brute_closed_class_count(P):
    n = P.shape[0]
    adj = P > 1e-15
    reach = adj | np.eye(n, dtype=bool)
    for _ in range(n):
        reach = reach | ((reach.astype(int) @ reach.astype(int)) > 0)
    # i lies in a closed class iff everything it reaches reaches back
    closed = [i for i in range(n) if all(reach[j, i] for j in range(n) if reach[i, j])]
    return len({frozenset(np.flatnonzero(reach[i])) for i in closed})


def test_kernel_validation():
    s = line_space(2)
    with pytest.raises(NotStochastic):
        Kernel(s, [[0.5, 0.4], [0, 1]])
    with pytest.raises(NotStochastic):
        Kernel(s, [[1.5, -0.5], [0, 1]])
    with pytest.raises(NonFiniteValue):
        Kernel(s, [[np.nan, 1], [0, 1]])
    with pytest.raises(SpaceMismatch):
        Kernel(s, np.eye(3))
    k = Kernel(s, [[0.5, 0.5], [0, 1]])
    assert not k.matrix.flags.writeable


def test_step_and_push():
    k = Kernel(line_space(2), [[0.5, 0.5], [0.25, 0.75]])
    P2 = step(k, 2).matrix
    np.testing.assert_allclose(P2, k.matrix @ k.matrix)
    np.testing.assert_array_equal(step(k, 0).matrix, np.eye(2))
    np.testing.assert_allclose(push_weights(k, np.array([1.0, 0]), 2), P2[0])
    mu = push_measure(k, Distribution(k.space, [1.0, 0]), 1)
    np.testing.assert_allclose(mu.weights, [0.5, 0.5])


@pytest.mark.parametrize("t", [-1, 1.5])
def test_bad_time(t):
    k = Kernel(line_space(2), np.eye(2))
    with pytest.raises(InputError):
        step(k, t)
    with pytest.raises(InputError):
        apply_function(k, [0, 1], t)


def test_apply_function_checks():
    k = Kernel(line_space(2), np.eye(2))
    with pytest.raises(SpaceMismatch):
        apply_function(k, [1, 2, 3], 1)
    with pytest.raises(NonFiniteValue):
        apply_function(k, [1, np.inf], 1)


def test_invariant_measures_two_classes():
    P = np.array([
        [0.5, 0.5, 0, 0, 0],
        [0.3, 0.7, 0, 0, 0],
        [0, 0, 0, 1, 0],
        [0, 0, 1, 0, 0],
        [0.2, 0, 0.3, 0, 0.5],  # transient
    ])
    k = Kernel(line_space(5), P)
    dec = invariant_measures(k)
    assert len(dec) == 2
    np.testing.assert_allclose(dec.measures[0].weights, [0.375, 0.625, 0, 0, 0], atol=1e-14)
    np.testing.assert_allclose(dec.measures[1].weights, [0, 0, 0.5, 0.5, 0], atol=1e-14)
    assert [list(m) for m in dec.class_members] == [[0, 1], [2, 3]]


def test_stationary_birth_death():
    # detailed balance gives the oracle
    p, q = 0.3, 0.5
    n = 6
    P = np.zeros((n, n))
    for i in range(n):
        if i + 1 < n:
            P[i, i + 1] = p
        if i > 0:
            P[i, i - 1] = q
        P[i, i] = 1 - P[i].sum()
    pi = stationary(P)
    expected = (p / q) ** np.arange(n)
    np.testing.assert_allclose(pi, expected / expected.sum(), atol=1e-14)


@given(kernels(), st.integers(0, 20), st.integers(0, 20))
def test_semigroup_law(k, s, t):
    lhs = step(k, s).matrix @ step(k, t).matrix
    np.testing.assert_allclose(lhs, step(k, s + t).matrix, atol=1e-10)


@given(kernel_and_weights(), st.integers(0, 15))
def test_push_preserves_mass(kw, t):
    k, w = kw
    mu = push_measure(k, Distribution(k.space, w), t)
    assert abs(mu.weights.sum() - 1) <= 1e-12 and mu.weights.min() >= 0
    raw = push_weights(k, w, t)
    assert abs(raw.sum() - 1) <= 1e-12 and raw.min() >= -1e-15


@given(kernel_and_weights(), st.integers(0, 10), st.data())
def test_measure_function_duality(kw, t, data):
    k, w = kw
    phi = np.array(data.draw(st.lists(st.floats(-10, 10), min_size=k.size, max_size=k.size)))
    lhs = push_measure(k, Distribution(k.space, w), t).weights @ phi
    rhs = w @ apply_function(k, phi, t)
    assert abs(lhs - rhs) <= 1e-10


@given(kernels(), st.integers(0, 6))
def test_invariant_measures_are_invariant(k, t):
    dec = invariant_measures(k)
    assert len(dec) == len(closed_classes(k)) == brute_closed_class_count(k.matrix)
    supports = [set(mu.support) for mu in dec.measures]
    for i, (mu, members) in enumerate(zip(dec.measures, dec.class_members)):
        assert np.abs(mu.weights @ k.matrix - mu.weights).sum() <= 1e-10
        assert supports[i] <= set(members)
        np.testing.assert_allclose(push_measure(k, mu, t).weights, mu.weights, atol=1e-10)
        for j in range(i):
            assert not supports[i] & supports[j]


@given(kernels())
def test_closed_class_count_matches_scc(k):
    ncomp, lab = connected_components(k.matrix > 1e-15, directed=True, connection="strong")
    leaving = {lab[i] for i, j in zip(*np.nonzero(k.matrix > 1e-15)) if lab[i] != lab[j]}
    assert len(closed_classes(k)) == ncomp - len(leaving)
