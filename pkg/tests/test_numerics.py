import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmframe.errors import DependentInput, InputError, NonFiniteState, TooFewSamples
from rmframe.numerics import (
    OdeSystem,
    ResidualReport,
    finite_diff,
    fornberg_weights,
    gram_det,
    gram_matrix,
    orthonormalize,
    rk4,
)


def test_rk4_constant_solution():
    ts, ys = rk4(OdeSystem(1, lambda t, y: np.zeros(1)), [3.0], 0.0, 1.0, 10)
    assert len(ts) == 11
    assert np.all(ys == 3.0)


def test_rk4_exponential_hits_e():
    ts, ys = rk4(lambda t, y: y, [1.0], 0.0, 1.0, 1000)
    assert ts[0] == 0.0 and ts[-1] == 1.0
    assert abs(ys[-1, 0] - math.e) < 1e-10


def test_rk4_harmonic_oscillator_returns_home():
    _, ys = rk4(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], 0.0, 2 * np.pi, 2000)
    assert np.max(np.abs(ys[-1] - [1.0, 0.0])) < 1e-8


def test_rk4_fourth_order_convergence():
    def err(n):
        _, ys = rk4(lambda t, y: np.array([y[1], -y[0]]), [1.0, 0.0], 0.0, 2.0, n)
        return np.linalg.norm(ys[-1] - [np.cos(2.0), -np.sin(2.0)])

    ratio = err(40) / err(80)
    assert 8.0 <= ratio <= 32.0


def test_rk4_is_deterministic():
    a = rk4(lambda t, y: np.sin(t) * y, [0.3, -1.0], 0.0, 3.0, 77)[1]
    b = rk4(lambda t, y: np.sin(t) * y, [0.3, -1.0], 0.0, 3.0, 77)[1]
    assert np.array_equal(a, b)


def test_rk4_rejects_blowup_and_bad_window():
    with pytest.raises(NonFiniteState), np.errstate(over="ignore", invalid="ignore"):
        rk4(lambda t, y: y * y, [1.0], 0.0, 2.0, 50)
    with pytest.raises(InputError):
        rk4(lambda t, y: y, [1.0], 1.0, 0.0, 10)
    with pytest.raises(InputError):
        rk4(lambda t, y: y, [1.0], 0.0, 1.0, 0)


def test_finite_diff_of_square_interior():
    ts = np.linspace(0.0, 1.0, 101)
    d = finite_diff(ts, ts**2, 1)
    assert np.max(np.abs(d[1:-1] - 2 * ts[1:-1])) < 1e-6


def test_finite_diff_constant_is_zero():
    ts = np.linspace(0.0, 1.0, 11)
    vals = np.tile([2.0, -5.0, 7.0], (11, 1))
    assert np.max(np.abs(finite_diff(ts, vals, 1))) < 1e-12


def test_finite_diff_second_derivative_of_sine():
    ts = np.linspace(0.0, 3.0, 301)
    d2 = finite_diff(ts, np.sin(ts), 2)
    assert np.max(np.abs(d2 + np.sin(ts))) < 1e-4


def test_finite_diff_nonuniform_grid():
    ts = np.sort(np.concatenate([[0.0, 1.0], np.random.default_rng(1).uniform(0, 1, 400)]))
    d = finite_diff(ts, np.exp(ts), 1)
    assert np.max(np.abs(d - np.exp(ts))[1:-1]) < 1e-3


def test_finite_diff_sample_count_checks():
    with pytest.raises(TooFewSamples):
        finite_diff(np.arange(4.0), np.arange(4.0), 2)
    with pytest.raises(TooFewSamples):
        finite_diff(np.arange(2.0), np.arange(2.0), 1)


def test_fornberg_weights_reproduce_central_difference():
    w = fornberg_weights(0.0, [-1.0, 0.0, 1.0], 2)
    assert np.allclose(w[1], [-0.5, 0.0, 0.5])
    assert np.allclose(w[2], [1.0, -2.0, 1.0])


def test_gram_det_examples():
    assert gram_det(None, np.eye(3)) == pytest.approx(1.0)
    v, w = np.array([1.0, 2.0, 3.0]), np.array([0.0, 1.0, -1.0])
    assert abs(gram_det(None, [v, 2 * v, w])) < 1e-12
    # half-space metric at z = 2 is delta / 4
    assert gram_det(0.25, [[1.0, 0, 0], [0, 1.0, 0]]) == pytest.approx(1 / 16)


@given(st.permutations([0, 1, 2]), st.integers(0, 2**31))
def test_gram_det_permutation_invariant(perm, seed):
    vs = np.random.default_rng(seed).normal(size=(3, 4))
    m = np.diag([1.0, 2.0, 0.5, 3.0])
    assert gram_det(m, vs[list(perm)]) == pytest.approx(gram_det(m, vs), rel=1e-10)


def test_gram_matrix_symmetric():
    g = gram_matrix(None, [[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(g, g.T)


def test_orthonormalize_examples():
    assert np.allclose(orthonormalize(None, [[2.0, 0.0, 0.0]]), [[1.0, 0.0, 0.0]])
    r = 1 / np.sqrt(2)
    out = orthonormalize(None, [[1.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    assert np.allclose(out, [[r, r, 0.0], [-r, r, 0.0]], atol=1e-15)
    assert np.allclose(orthonormalize(1.0, [[1.0, 0.0, 0.0]]), [[1.0, 0.0, 0.0]])


@given(st.integers(0, 2**31), st.integers(1, 4))
def test_orthonormalize_gram_is_identity(seed, k):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(5, 5))
    metric = a @ a.T + 5 * np.eye(5)
    out = orthonormalize(metric, rng.normal(size=(k, 5)))
    assert np.max(np.abs(out @ metric @ out.T - np.eye(k))) < 1e-12


def test_orthonormalize_dependent_input():
    with pytest.raises(DependentInput):
        orthonormalize(None, [[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])


def test_residual_report_ordering():
    r = ResidualReport.from_values([0, 1, 2], [0.1, -0.5, 0.2])
    assert r.max_abs == 0.5
    assert r.max_abs >= r.rms >= 0
    assert r.passes(0.6) and not r.passes(0.5)
    assert len(r.to_dict(per_sample=True)["per_sample"]) == 3
