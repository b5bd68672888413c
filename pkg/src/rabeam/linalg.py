"""Dense complex linear algebra shared by the rest of the package.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
Norm orders are :class:`ExtRational` values so that ``q = 3/2`` and
``q = inf`` are exact tokens rather than floats.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np
from scipy.linalg import lapack

HERMITIAN_RTOL = 1e-12
RECON_RTOL = 1e-10


class LinalgError(ValueError):
    pass


class NotPositiveDefiniteError(LinalgError):
    def __init__(self, pivot: int, message: str | None = None):
        self.pivot = pivot
        super().__init__(message or f"matrix is not positive definite (pivot {pivot})")


@dataclass(frozen=True)
class ExtRational:
    """A rational number >= 1, or infinity.

    ``frac is None`` encodes infinity; use :data:`INF` and :meth:`of`
    rather than building instances by hand.
    """

    frac: Fraction | None

    def __post_init__(self):
        if self.frac is not None and self.frac < 1:
            raise ValueError(f"norm order must be >= 1, got {self.frac}")

    @classmethod
    def of(cls, value: "ExtRationalLike") -> "ExtRational":
        if isinstance(value, ExtRational):
            return value
        if isinstance(value, str):
            token = value.strip().lower()
            if token in ("inf", "infinity", "∞"):
                return INF
            return cls(Fraction(token))
        if isinstance(value, float):
            if np.isinf(value):
                if value < 0:
                    raise ValueError("negative infinity is not a norm order")
                return INF
            # floats are accepted only when they are short decimals (1.5, 4.0)
            return cls(Fraction(value).limit_denominator(1000))
        return cls(Fraction(value))

    @property
    def is_inf(self) -> bool:
        return self.frac is None

    @property
    def numerator(self) -> int:
        if self.frac is None:
            raise ValueError("infinity has no numerator")
        return self.frac.numerator

    @property
    def denominator(self) -> int:
        if self.frac is None:
            raise ValueError("infinity has no denominator")
        return self.frac.denominator

    def conjugate(self) -> "ExtRational":
        """Hölder conjugate q* with 1/q + 1/q* = 1."""
        if self.frac is None:
            return ExtRational(Fraction(1))
        if self.frac == 1:
            return INF
        return ExtRational(self.frac / (self.frac - 1))

    def __float__(self) -> float:
        return float("inf") if self.frac is None else float(self.frac)

    def __eq__(self, other):
        if isinstance(other, ExtRational):
            return self.frac == other.frac
        try:
            return self == ExtRational.of(other)
        except (ValueError, TypeError, ZeroDivisionError):
            return NotImplemented

    def __hash__(self):
        return hash(self.frac)

    def __str__(self) -> str:
        return "inf" if self.frac is None else str(self.frac)

    def __repr__(self) -> str:
        return f"ExtRational({self})"


INF = ExtRational(None)
ExtRationalLike = Union[ExtRational, int, Fraction, str, float]


def vec_norm(v, q: ExtRationalLike) -> float:
    """l_q norm of a complex vector."""
    q = ExtRational.of(q)
    v = np.asarray(v)
    if v.size == 0:
        raise LinalgError("vec_norm of an empty vector")
    mod = np.abs(v).ravel()
    if q.is_inf:
        return float(mod.max())
    if q.frac == 1:
        return float(mod.sum())
    if q.frac == 2:
        return float(np.linalg.norm(v))
    top = mod.max()
    if top == 0.0:
        return 0.0
    # rescale so large q does not overflow
    qf = float(q)
    return float(top * np.sum((mod / top) ** qf) ** (1.0 / qf))


def as_hermitian(H, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate near-Hermitian input and return its exact Hermitian part."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise LinalgError(f"expected a square matrix, got shape {H.shape}")
    scale = np.linalg.norm(H)
    skew = np.linalg.norm(H - H.conj().T)
    if skew > rtol * scale:
        raise LinalgError(f"matrix is not Hermitian: skew part {skew:.3e} vs scale {scale:.3e}")
    return 0.5 * (H + H.conj().T)


def hermitian_eig(H) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition with eigenvalues in descending order.

    Each eigenvector is rotated so that its largest-modulus entry is real
    and positive, which makes the output deterministic.
    """
    H = as_hermitian(H)
    try:
        lam, U = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise LinalgError(f"eigendecomposition failed: {exc}") from exc
    lam = lam[::-1].copy()
    U = U[:, ::-1].copy()
    pivots = U[np.argmax(np.abs(U), axis=0), np.arange(U.shape[1])]
    U *= np.conj(pivots) / np.abs(pivots)
    scale = np.linalg.norm(H)
    err = np.linalg.norm((U * lam) @ U.conj().T - H)
    if err > RECON_RTOL * max(scale, np.finfo(float).tiny):
        raise LinalgError(f"eigendecomposition inaccurate: residual {err:.3e}")
    return lam, U


def cholesky_psd(H) -> np.ndarray:
    """Lower-triangular L with L L^H = H for positive definite H."""
    H = as_hermitian(H)
    n = H.shape[0]
    L, info = lapack.zpotrf(H, lower=1, clean=1)
    if info > 0:
        raise NotPositiveDefiniteError(info - 1)
    if info < 0:
        raise LinalgError(f"zpotrf: illegal argument {-info}")
    piv = np.real(np.diag(L)) ** 2
    floor = 1e-12 * np.max(np.real(np.diag(H)))
    bad = np.flatnonzero(piv <= floor)
    if bad.size:
        raise NotPositiveDefiniteError(int(bad[0]), f"pivot {bad[0]} below {floor:.3e}")
    L = np.tril(L)
    err = np.linalg.norm(L @ L.conj().T - H)
    if err > RECON_RTOL * np.linalg.norm(H):
        raise LinalgError(f"cholesky reconstruction residual {err:.3e}")
    assert L.shape == (n, n)
    return L


def gram_factor(H, rank_tol: float = 1e-8) -> np.ndarray:
    """Return Q (M x N) with Q^H Q = H, M the numerical rank of H.

    Uses the eigen-decomposition: ``Q = diag(sqrt(lam_M)) U_M^H`` keeping
    eigenvalues above ``rank_tol * lam_max``.
    """
    lam, U = hermitian_eig(H)
    if lam[0] <= 0:
        raise LinalgError("gram_factor of a matrix with no positive eigenvalue")
    keep = lam > rank_tol * lam[0]
    return np.sqrt(lam[keep])[:, None] * U[:, keep].conj().T


RANK_ONE_RTOL = 1e-13


def _unit_q(v: np.ndarray, q: ExtRational) -> np.ndarray:
    return v / vec_norm(v, q)


def induced_norm(D, p: ExtRationalLike, q: ExtRationalLike, *, probes: int = 10_000,
                 seed: int = 0) -> tuple[float, bool]:
    """Matrix norm induced by l_q on the input and l_p on the output.

    Returns ``(value, exact)``. Closed forms exist for q = 1, p = inf,
    p = q = 2 and numerically rank-one D (``||u||_p ||v||_{q*}`` for
    ``D = u v^H``); anything else is a lower bound from random probes and
    is reported with ``exact=False``.
    """
    p, q = ExtRational.of(p), ExtRational.of(q)
    D = np.atleast_2d(np.asarray(D, dtype=complex))
    if D.size == 0:
        raise LinalgError("induced_norm of an empty matrix")
    if not np.any(D):
        return 0.0, True
    if q == 1:
        return max(vec_norm(D[:, j], p) for j in range(D.shape[1])), True
    if p.is_inf:
        qs = q.conjugate()
        return max(vec_norm(D[i, :], qs) for i in range(D.shape[0])), True
    if p == 2 and q == 2:
        lam, _ = hermitian_eig(D.conj().T @ D)
        return float(np.sqrt(max(lam[0], 0.0))), True

    U, sv, Vh = np.linalg.svd(D)
    if sv.size == 1 or sv[1] <= RANK_ONE_RTOL * sv[0]:
        return float(sv[0] * vec_norm(U[:, 0], p) * vec_norm(Vh[0], q.conjugate())), True

    n = D.shape[1]
    rng = np.random.default_rng(seed)
    cands = [np.eye(n, dtype=complex)[j] for j in range(n)]
    cands.append(Vh[0].conj())
    best = max(vec_norm(D @ _unit_q(v, q), p) for v in cands)
    V = rng.standard_normal((probes, n)) + 1j * rng.standard_normal((probes, n))
    if q.is_inf:
        qn = np.abs(V).max(axis=1)
    else:
        qn = np.sum(np.abs(V) ** float(q), axis=1) ** (1.0 / float(q))
    out = (V / qn[:, None]) @ D.T
    if p == 1:
        vals = np.abs(out).sum(axis=1)
    else:
        vals = np.sum(np.abs(out) ** float(p), axis=1) ** (1.0 / float(p))
    return float(max(best, vals.max())), False
