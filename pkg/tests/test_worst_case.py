import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabeam.linalg import ExtRational, induced_norm, vec_norm
from rabeam.worst_case import (Branch, UncertaintySpec, adversarial_sample, dual_norm_maximizer,
                               frobenius_ball_min_residual, max_residual_value,
                               min_residual_value, residual, worst_case_delta)

from conftest import crandn

ORDERS = [1, "3/2", 2, "7/3", 4, "inf"]


@pytest.mark.parametrize("x, q, expected", [
    ([3, 4], 2, [0.6, 0.8]),
    ([1, -2], 1, [1, -1]),
    ([1, 3, 2], "inf", [0, 1, 0]),
])
def test_dual_norm_maximizer_examples(x, q, expected):
    assert np.allclose(dual_norm_maximizer(np.array(x, float), q), expected)


@given(st.integers(0, 2**31), st.sampled_from(ORDERS))
def test_dual_norm_maximizer_properties(seed, q):
    x = crandn(np.random.default_rng(seed), 5)
    y = dual_norm_maximizer(x, q)
    qs = ExtRational.of(q).conjugate()
    assert vec_norm(y, qs) == pytest.approx(1, rel=1e-12)
    inner = np.vdot(y, x)
    assert inner.real == pytest.approx(vec_norm(x, q), rel=1e-12)
    assert abs(inner.imag) <= 1e-12 * vec_norm(x, q)


def test_dual_norm_maximizer_zero():
    with pytest.raises(ValueError):
        dual_norm_maximizer(np.zeros(3), 2)


def test_spec_validation():
    with pytest.raises(ValueError):
        UncertaintySpec(2, 2, -1)
    with pytest.raises(ValueError):
        UncertaintySpec("1/2", 2, 1)
    assert UncertaintySpec("3/2", "inf", 1).q.is_inf


def test_delta_examples():
    # A = I, x = e1, b = 0, eta = 0.5: residual shrinks to 0.5
    A = np.eye(2)
    x = np.array([1.0, 0.0])
    out = worst_case_delta(A, x, np.zeros(2), UncertaintySpec(2, 2, 0.5))
    assert out.branch is Branch.ATTAINED
    assert np.allclose(out.delta, np.diag([-0.5, 0]))
    out = worst_case_delta(A, x, np.zeros(2), UncertaintySpec(2, 2, 2.0))
    assert out.branch is Branch.ZEROED
    assert np.allclose(out.delta, np.diag([-1, 0]))
    assert residual(A, x, np.zeros(2), out.delta, 2) == pytest.approx(0, abs=1e-15)


def test_delta_zero_residual():
    A = np.eye(2)
    x = np.array([1.0, 1.0])
    out = worst_case_delta(A, x, A @ x, UncertaintySpec(2, 2, 0.3))
    assert out.branch is Branch.ZERO
    assert not np.any(out.delta)


def test_delta_requires_nonzero_x():
    with pytest.raises(ValueError):
        worst_case_delta(np.eye(2), np.zeros(2), np.ones(2), UncertaintySpec(2, 2, 1))


def test_zero_x_values():
    spec = UncertaintySpec(2, 1, 1)
    b = np.array([3.0, 4.0])
    assert min_residual_value(np.eye(2), np.zeros(2), b, spec) == 5
    assert max_residual_value(np.eye(2), np.zeros(2), b, spec) == 5


@given(st.integers(0, 2**31), st.sampled_from(ORDERS), st.sampled_from(ORDERS),
       st.floats(0.01, 3))
def test_delta_attains_and_stays_in_ball(seed, p, q, eta):
    rng = np.random.default_rng(seed)
    A, x, b = crandn(rng, 4, 3), crandn(rng, 3), crandn(rng, 4)
    spec = UncertaintySpec(p, q, eta)
    out = worst_case_delta(A, x, b, spec)
    got = residual(A, x, b, out.delta, p)
    want = min_residual_value(A, x, b, spec)
    assert got == pytest.approx(want, abs=1e-10 * (1 + vec_norm(b, p)))
    norm, exact = induced_norm(out.delta, p, q)
    # rank-one matrices have an exact induced norm
    assert exact
    assert norm <= eta * (1 + 1e-10)
    sv = np.linalg.svd(out.delta, compute_uv=False)
    assert sv[1] <= 1e-10 * max(sv[0], 1e-300)


@given(st.integers(0, 2**31), st.sampled_from(ORDERS), st.sampled_from(ORDERS))
def test_sampled_members_respect_bounds(seed, p, q):
    rng = np.random.default_rng(seed)
    A, x, b = crandn(rng, 4, 3), crandn(rng, 3), crandn(rng, 4)
    spec = UncertaintySpec(p, q, 0.7)
    lo, hi = adversarial_sample(A, x, b, spec, 400, rng)
    tol = 1e-10 * (1 + vec_norm(b, p))
    assert lo >= min_residual_value(A, x, b, spec) - tol
    assert hi <= max_residual_value(A, x, b, spec) + tol


def test_max_residual_attained_by_flipped_delta():
    rng = np.random.default_rng(9)
    A, x, b = crandn(rng, 3, 3), crandn(rng, 3), crandn(rng, 3)
    spec = UncertaintySpec(2, "3/2", 0.4)
    D = -worst_case_delta(A, x, b, spec).delta
    assert residual(A, x, b, D, 2) == pytest.approx(max_residual_value(A, x, b, spec))


def test_frobenius_ball_agrees_for_p_q_two():
    rng = np.random.default_rng(2)
    A, x, b = crandn(rng, 4, 3), crandn(rng, 3), crandn(rng, 4)
    spec = UncertaintySpec(2, 2, 0.8)
    assert frobenius_ball_min_residual(A, x, b, 0.8) == pytest.approx(
        min_residual_value(A, x, b, spec))
