from math import sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.sparse import issparse

from oracles import gaussian_tv_by_quadrature, interval_mean_recursion, normal_cdf
from semcert.diagnostics import CouplingProvider, DiagonalProvider, IndependentProvider
from semcert.errors import GridResolutionTooCoarse, InputError, NonpositiveTime, OutOfDomain
from semcert.kernel import apply_function, closed_classes, invariant_measures, push_weights
from semcert.metric_space import validate_space
from semcert.models import (
    GaussianWalkSpec,
    IntervalChainSpec,
    XiChainSpec,
    build_gaussian_walk,
    build_interval_chain,
    build_model,
    build_xi_chain,
    builtin_provider,
    gaussian_coords,
    gaussian_pair_grid,
    gaussian_shift_contraction_provider,
    gaussian_tv_closed_form,
    interval_asf_probe,
    interval_chain_closed_form,
    interval_row,
    xi_chain_measures,
    xi_chain_sync_provider,
)
from semcert.transport import tv_distance


@pytest.mark.parametrize("make", [
    lambda: XiChainSpec(0.5, 10), lambda: XiChainSpec(0.0, 10), lambda: XiChainSpec(0.4, 1),
    lambda: XiChainSpec(0.4, 2.5), lambda: GaussianWalkSpec(5.0, 0.01), lambda: GaussianWalkSpec(8.0, 0.1),
    lambda: GaussianWalkSpec(8.0, 0.0),
])
def test_spec_validation(make):
    with pytest.raises(InputError):
        make()


@pytest.mark.parametrize("n", [30, 3002, 101])
def test_interval_grid_validation(n):
    with pytest.raises(GridResolutionTooCoarse):
        IntervalChainSpec(n)


@pytest.mark.parametrize("name, params", [
    ("xi-chain", dict(xi=0.3, depth=8)), ("interval", dict(grid_points=61)),
    ("gaussian", dict(half_width=6.0, step=0.05)),
])
def test_models_validate(name, params):
    k = build_model(name, **params)
    s = validate_space(k.space.labels, k.space.dist, k.space.base_index)
    assert np.array_equal(s.dist, k.space.dist)
    assert np.abs(k.matrix.sum(axis=1) - 1).max() <= 1e-12 and k.matrix.min() >= 0
    assert k.meta["model"] == name


def test_build_model_errors():
    with pytest.raises(InputError):
        build_model("torus")
    with pytest.raises(InputError):
        build_model("xi-chain", nope=1)


# xi-chain

@given(st.floats(0.01, 0.49), st.integers(2, 30))
def test_xi_chain_two_closed_classes(xi, depth):
    k = build_xi_chain(XiChainSpec(xi, depth))
    assert len(closed_classes(k)) == 2


def test_xi_chain_transitions(xi_kernel):
    lab = xi_kernel.space.index
    row = push_weights(xi_kernel, np.eye(xi_kernel.size)[lab("2")], 1)
    assert row[lab("1")] == 0.5 and row[lab("3")] == 0.5
    row = push_weights(xi_kernel, np.eye(xi_kernel.size)[lab("3+xi/3")], 1)
    assert row[lab("1+xi/1")] == 0.5 and row[lab("4+xi/4")] == 0.5
    top = push_weights(xi_kernel, np.eye(xi_kernel.size)[lab("40")], 1)
    assert top[lab("1")] == 0.5 and top[lab("40")] == 0.5
    assert xi_kernel.space.dist[lab("5"), lab("5+xi/5")] == pytest.approx(0.08, abs=1e-15)


def test_xi_chain_stationary_exact(xi_kernel):
    # the top level carries the lumped tail 2^-(N-1)
    m1, m2 = xi_chain_measures(XiChainSpec(0.4, 40))
    dec = invariant_measures(xi_kernel)
    exact = m1.copy()
    exact[39] *= 2
    assert np.abs(dec.measures[0].weights - exact).sum() <= 1e-12
    assert np.abs(dec.measures[0].weights - m1).sum() <= 2.0 ** -36


def test_xi_sync_provider(xi_kernel):
    prov = xi_chain_sync_provider(XiChainSpec(0.4, 40), xi_kernel)
    lab = xi_kernel.space.index
    n = xi_kernel.size
    x, y = lab("2"), lab("5")
    for t in range(6):
        J = prov.joint(x, y, t)
        np.testing.assert_allclose(J.sum(axis=1), push_weights(xi_kernel, np.eye(n)[x], t), atol=1e-15)
        np.testing.assert_allclose(J.sum(axis=0), push_weights(xi_kernel, np.eye(n)[y], t), atol=1e-15)
        # the gap survives only while both advance
        assert (J * xi_kernel.space.dist).sum() == pytest.approx(3 * 0.5 ** t, abs=1e-14)
    with pytest.raises(InputError):
        builtin_provider("xi-sync", build_gaussian_walk(GaussianWalkSpec(6.0, 0.05)))


# interval chain

def test_interval_row_support():
    row = interval_row(0.0, 301)
    u = np.linspace(0, 3, 301)
    assert abs(row.sum() - 1) <= 1e-14
    assert row[(u < 2 - 0.01) | (u > 7 / 3 + 0.01)].sum() == 0
    assert abs(row @ u - (2 + 1 / 6)) <= 1e-4
    with pytest.raises(OutOfDomain):
        interval_row(3.5)


@given(st.integers(1, 8), st.floats(0, 3))
def test_interval_closed_form_matches_mean_recursion(n, u):
    assert abs(interval_chain_closed_form(n, u) - interval_mean_recursion(n, u)) <= 1e-12


@pytest.mark.parametrize("n, u", [(0, 1.0), (1.5, 1.0), (1, -0.1), (1, 3.1)])
def test_interval_closed_form_domain(n, u):
    with pytest.raises(OutOfDomain):
        interval_chain_closed_form(n, u)


def test_interval_grid_error_scales_with_h(small_interval):
    u = small_interval.space.dist[0]
    h = 3 / 300
    for n in range(1, 7):
        exact = np.array([interval_chain_closed_form(n, float(v)) for v in u])
        assert np.abs(apply_function(small_interval, u, n) - exact).max() <= 10 * h


def test_interval_first_step_value(small_interval):
    v = apply_function(small_interval, small_interval.space.dist[0], 1)
    assert abs(v[small_interval.space.index("1")] - 7 / 6) <= 1e-4


def test_interval_probe(small_interval):
    probe = interval_asf_probe(small_interval, [1e-2, 1e-4])
    for p in probe:
        assert abs(p["gap"] - p["closed_form"]) <= 1e-6
        assert p["required_F1"] == pytest.approx(p["gap"] / (3 * p["y"]))
    with pytest.raises(InputError):
        interval_asf_probe(build_xi_chain(XiChainSpec(0.4, 5)), [0.1])


# Gaussian walk

@pytest.mark.parametrize("x, y, t", [(0, 1, 1), (0, 0.3, 2.5), (-1, 2, 1), (1, 1, 4)])
def test_gaussian_tv_closed_form_against_quadrature(x, y, t):
    assert abs(gaussian_tv_closed_form(x, y, t) - gaussian_tv_by_quadrature(x, y, t)) <= 1e-10


def test_gaussian_tv_special_value():
    assert abs(gaussian_tv_closed_form(0, 1, 1) - (2 * normal_cdf(0.5) - 1)) <= 1e-15
    with pytest.raises(NonpositiveTime):
        gaussian_tv_closed_form(0, 1, 0)


def test_gaussian_grid_tv(coarse_gaussian):
    x = gaussian_coords(coarse_gaussian)
    P = coarse_gaussian.matrix
    h = 0.05
    tail = 2 * (1 - normal_cdf(3.0))  # mass beyond L/2 of a step started inside [-L/2, L/2]
    for a, b in [(-3.0, 3.0), (0.0, 1.0), (-1.5, -1.0), (0.0, 0.05)]:
        i, j = int(np.argmin(np.abs(x - a))), int(np.argmin(np.abs(x - b)))
        assert abs(tv_distance(P[i], P[j]) - gaussian_tv_closed_form(a, b, 1)) <= 10 * h + tail


def test_gaussian_rows_mirror(coarse_gaussian):
    P = coarse_gaussian.matrix
    assert np.abs(P - P[::-1, ::-1]).max() <= 1e-15
    assert coarse_gaussian.space.labels[coarse_gaussian.space.base_index] == "0"


def test_gaussian_single_measure(coarse_gaussian):
    assert len(invariant_measures(coarse_gaussian)) == 1


def test_gaussian_pair_grid(gaussian_kernel):
    grid = gaussian_pair_grid(gaussian_kernel)
    assert len(grid) == 38
    x = gaussian_coords(gaussian_kernel)
    assert all(-2 - 1e-9 <= x[a] <= 2 + 1e-9 and -2 - 1e-9 <= x[b] <= 2 + 1e-9 for a, b in grid)


@given(st.integers(0, 8), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 0.9))
def test_shift_provider_gap_is_geometric(t, a, b, lam):
    k = build_gaussian_walk(GaussianWalkSpec(6.0, 0.05))
    x = gaussian_coords(k)
    i, j = int(np.argmin(np.abs(x - a))), int(np.argmin(np.abs(x - b)))
    prov = gaussian_shift_contraction_provider(k, lam)
    law_z, law_y, ed = prov.summary(i, j, t)
    gap = (1 - lam) ** t * abs(x[j] - x[i])
    # only mass stopped at the boundary can lose part of the shift
    edge = law_y[(x <= x[0] + gap + 0.05) | (x >= x[-1] - gap - 0.05)].sum()
    assert gap - gap * edge - 1e-12 <= ed <= gap + 1e-12
    np.testing.assert_allclose(law_y, push_weights(k, np.eye(k.size)[j], t), atol=1e-15)


def test_shift_provider_summary_matches_joint(coarse_gaussian):
    prov = gaussian_shift_contraction_provider(coarse_gaussian, 0.5)
    x = gaussian_coords(coarse_gaussian)
    for a, b, t in [(0.0, 1.0, 1), (-2.0, 2.0, 3), (1.0, 1.0, 2), (5.5, -5.5, 1)]:
        i, j = int(np.argmin(np.abs(x - a))), int(np.argmin(np.abs(x - b)))
        J = prov.joint(i, j, t)
        assert issparse(J)
        ref = CouplingProvider.summary(prov, i, j, t)
        fast = prov.summary(i, j, t)
        for r, f in zip(ref, fast):
            np.testing.assert_allclose(f, r, atol=1e-14)


def test_shift_provider_validation(coarse_gaussian, xi_kernel):
    with pytest.raises(InputError):
        gaussian_shift_contraction_provider(coarse_gaussian, 1.0)
    with pytest.raises(InputError):
        gaussian_shift_contraction_provider(xi_kernel, 0.5)


def test_builtin_registry(coarse_gaussian):
    assert isinstance(builtin_provider("diagonal", coarse_gaussian), DiagonalProvider)
    assert isinstance(builtin_provider("independent", coarse_gaussian), IndependentProvider)
    assert builtin_provider("gaussian-shift", coarse_gaussian, lam=0.25).lam == 0.25
    with pytest.raises(InputError):
        builtin_provider("teleport", coarse_gaussian)


def test_gaussian_lwi_constant():
    # density lower bound on B_1(0) after one step from B_1(0): points within 1.25 of each other
    lam = np.exp(-1.25 ** 2 / 2) / sqrt(2 * np.pi)
    assert lam ** 2 * 0.25 >= 0.00834
