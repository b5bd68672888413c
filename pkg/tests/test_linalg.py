from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rabeam.linalg import (INF, ExtRational, LinalgError, NotPositiveDefiniteError,
                           as_hermitian, cholesky_psd, gram_factor, hermitian_eig,
                           induced_norm, vec_norm)

from conftest import crandn

ORDERS = ["1", "3/2", "2", "7/3", "4", "inf"]


class TestExtRational:
    def test_parsing(self):
        assert ExtRational.of("3/2").frac == Fraction(3, 2)
        assert ExtRational.of(6).frac == Fraction(6)
        assert ExtRational.of("inf").is_inf
        assert ExtRational.of(Fraction(6, 4)) == ExtRational.of("3/2")
        assert str(ExtRational.of("6/4")) == "3/2"
        assert str(INF) == "inf"

    def test_conjugates(self):
        assert ExtRational.of(1).conjugate().is_inf
        assert INF.conjugate() == ExtRational.of(1)
        assert ExtRational.of(2).conjugate() == ExtRational.of(2)
        assert ExtRational.of("3/2").conjugate() == ExtRational.of(3)

    @pytest.mark.parametrize("bad", [0, "1/2", -3, "nan"])
    def test_rejects_below_one(self, bad):
        with pytest.raises(ValueError):
            ExtRational.of(bad)

    def test_hashable_and_coprime(self):
        assert len({ExtRational.of("4/2"), ExtRational.of(2)}) == 1
        r = ExtRational.of("10/4")
        assert (r.numerator, r.denominator) == (5, 2)


class TestVecNorm:
    def test_examples(self):
        assert vec_norm(np.array([3, 4]), 2) == 5
        assert vec_norm(np.array([1, 3j, -2]), "inf") == 3
        assert vec_norm(np.array([1 + 1j, 0]), 4) == pytest.approx(np.sqrt(2), rel=1e-15)

    @given(st.integers(0, 2**31), st.sampled_from(ORDERS), st.floats(1e-3, 1e3))
    def test_homogeneity(self, seed, q, c):
        v = crandn(np.random.default_rng(seed), 7)
        phase = np.exp(1j * seed)
        assert vec_norm(c * phase * v, q) == pytest.approx(c * vec_norm(v, q), rel=1e-12)

    @given(st.integers(0, 2**31), st.sampled_from(ORDERS))
    def test_zero_iff_zero(self, seed, q):
        assert vec_norm(np.zeros(4), q) == 0
        v = crandn(np.random.default_rng(seed), 4)
        assert vec_norm(v, q) > 0

    @given(st.integers(0, 2**31), st.sampled_from(ORDERS))
    def test_holder(self, seed, q):
        rng = np.random.default_rng(seed)
        u, v = crandn(rng, 6), crandn(rng, 6)
        qs = ExtRational.of(q).conjugate()
        assert abs(np.vdot(u, v)) <= vec_norm(u, qs) * vec_norm(v, q) + 1e-10

    def test_extreme_scales(self):
        v = np.array([1e-200, 2e-200])
        assert vec_norm(v, "3/2") > 0
        assert np.isfinite(vec_norm(np.array([1e200, 1e200]), 4))


class TestHermitian:
    def test_symmetrizes_small_asymmetry(self):
        H = np.array([[1, 2 + 1e-15], [2, 3]], dtype=complex)
        out = as_hermitian(H)
        assert np.allclose(out, out.conj().T, atol=0)

    def test_rejects_large_asymmetry(self):
        with pytest.raises(LinalgError):
            as_hermitian(np.array([[1, 2], [0, 1]]))

    def test_eig_examples(self):
        lam, _ = hermitian_eig(np.diag([1.0, 2.0]))
        assert list(lam) == [2.0, 1.0]
        lam, U = hermitian_eig(np.eye(3))
        assert np.allclose(lam, 1)
        assert np.allclose(U @ U.conj().T, np.eye(3))

    @given(st.integers(0, 2**31))
    def test_eig_reconstruction(self, seed):
        B = crandn(np.random.default_rng(seed), 5, 5)
        H = B.conj().T @ B
        lam, U = hermitian_eig(H)
        assert np.all(lam >= -1e-10)
        assert np.all(np.diff(lam) <= 0)
        assert np.linalg.norm(U @ np.diag(lam) @ U.conj().T - H) <= 1e-10 * np.linalg.norm(H)


class TestCholesky:
    def test_examples(self):
        assert np.allclose(cholesky_psd(np.eye(3)), np.eye(3))
        assert np.allclose(cholesky_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))

    def test_reconstruction(self, rng):
        X = crandn(rng, 6, 20)
        H = X @ X.conj().T / 20 + 0.1 * np.eye(6)
        L = cholesky_psd(H)
        assert np.allclose(np.triu(L, 1), 0)
        assert np.linalg.norm(L @ L.conj().T - H) <= 1e-10 * np.linalg.norm(H)

    def test_reports_pivot(self):
        H = np.diag([1.0, 1.0, -1.0, 1.0])
        with pytest.raises(NotPositiveDefiniteError) as err:
            cholesky_psd(H)
        assert err.value.pivot == 2

    def test_rejects_numerically_singular(self):
        with pytest.raises(NotPositiveDefiniteError):
            cholesky_psd(np.diag([1.0, 1e-14]))


class TestGramFactor:
    def test_examples(self):
        Q = gram_factor(np.eye(2))
        assert np.allclose(Q.conj().T @ Q, np.eye(2))
        Q = gram_factor(np.diag([4.0, 0.0]))
        assert Q.shape == (1, 2)
        assert np.allclose(np.abs(Q), [[2, 0]])

    def test_rank_three(self, rng):
        B = crandn(rng, 3, 5)
        H = B.conj().T @ B
        Q = gram_factor(H)
        assert Q.shape == (3, 5)
        assert np.linalg.norm(Q.conj().T @ Q - H) <= 1e-10 * np.linalg.norm(H)

    def test_round_trip_many(self, rng):
        for _ in range(100):
            N = int(rng.integers(2, 8))
            B = crandn(rng, int(rng.integers(1, N + 1)), N)
            H = B.conj().T @ B
            Q = gram_factor(H)
            assert np.linalg.norm(Q.conj().T @ Q - H) <= 1e-10 * np.linalg.norm(H)

    def test_zero_matrix(self):
        with pytest.raises(LinalgError):
            gram_factor(np.zeros((3, 3)))


class TestInducedNorm:
    def test_examples(self):
        assert induced_norm(np.diag([1.0, 2.0]), 2, 2) == (pytest.approx(2.0), True)
        val, exact = induced_norm(np.array([[1.0, 2], [3, 4]]), 2, 1)
        assert exact and val == pytest.approx(np.sqrt(20))
        for p in ORDERS:
            for q in ORDERS:
                assert induced_norm(np.zeros((2, 3)), p, q)[0] == 0

    def test_l1_input_against_sampling(self, rng):
        D = np.array([[1.0, 2], [3, 4]])
        t = np.linspace(0, 1, 20001)
        best = 0.0
        for s1, s2 in ((1, 1), (1, -1)):
            V = np.stack([s1 * t, s2 * (1 - t)], axis=1)
            best = max(best, np.linalg.norm(V @ D.T, axis=1).max())
        assert induced_norm(D, 2, 1)[0] == pytest.approx(best, rel=1e-9)

    @given(st.integers(0, 2**31), st.sampled_from(ORDERS), st.sampled_from(ORDERS))
    def test_defining_inequality(self, seed, p, q):
        rng = np.random.default_rng(seed)
        D = crandn(rng, 3, 4)
        val, exact = induced_norm(D, p, q, probes=500)
        V = crandn(rng, 2000, 4)
        lhs = np.array([vec_norm(D @ v, p) for v in V])
        rhs = np.array([vec_norm(v, q) for v in V])
        if exact:
            assert np.all(lhs <= val * rhs + 1e-9)
        else:
            assert val <= np.sum(np.abs(D)) + 1e-12  # lower bound is below a crude upper bound
