"""Worst-case least-squares residuals over induced-norm balls.

For the ball ``U = {D : ||D v||_p <= eta ||v||_q for all v}``::

    min_{D in U} ||(A + D) x - b||_p = max(||A x - b||_p - eta ||x||_q, 0)
    max_{D in U} ||(A + D) x - b||_p = ||A x - b||_p + eta ||x||_q

The minimum is attained by an explicit rank-one perturbation built from the
vector that achieves Hölder equality against ``x``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .linalg import ExtRational, ExtRationalLike, vec_norm


@dataclass(frozen=True)
class UncertaintySpec:
    p: ExtRational
    q: ExtRational
    eta: float

    def __init__(self, p: ExtRationalLike, q: ExtRationalLike, eta: float):
        object.__setattr__(self, "p", ExtRational.of(p))
        object.__setattr__(self, "q", ExtRational.of(q))
        object.__setattr__(self, "eta", float(eta))
        if not self.eta >= 0:
            raise ValueError(f"eta must be nonnegative, got {eta}")


class Branch(str, enum.Enum):
    ATTAINED = "attained"  # ||Ax - b||_p >= eta ||x||_q
    ZEROED = "zeroed"  # residual driven to zero
    ZERO = "zero"  # residual already zero, no perturbation needed


@dataclass
class PerturbationMatrix:
    delta: np.ndarray
    branch: Branch


def _phase(z: complex) -> complex:
    return 1.0 + 0j if z == 0 else z / abs(z)


def dual_norm_maximizer(x, q: ExtRationalLike) -> np.ndarray:
    """y with ||y||_{q*} = 1 and y^H x = ||x||_q (real, positive)."""
    q = ExtRational.of(q)
    x = np.asarray(x, dtype=complex)
    mod = np.abs(x)
    if not np.any(mod):
        raise ValueError("dual_norm_maximizer of the zero vector")
    ph = np.where(mod > 0, x / np.where(mod > 0, mod, 1.0), 1.0)
    if q.is_inf:
        y = np.zeros_like(x)
        i = int(np.argmax(mod))
        y[i] = ph[i]
        return y
    if q == 1:
        return np.where(mod > 0, ph, 0.0)
    qf = float(q)
    nq = vec_norm(x, q)
    return ph * (mod / nq) ** (qf - 1.0)


def residual(A, x, b, delta, p: ExtRationalLike) -> float:
    A = np.asarray(A, dtype=complex)
    return vec_norm((A + delta) @ x - b, p)


def min_residual_value(A, x, b, spec: UncertaintySpec) -> float:
    r = np.asarray(A, dtype=complex) @ x - b
    if not np.any(x):
        return vec_norm(r, spec.p)
    return max(vec_norm(r, spec.p) - spec.eta * vec_norm(x, spec.q), 0.0)


def max_residual_value(A, x, b, spec: UncertaintySpec) -> float:
    r = np.asarray(A, dtype=complex) @ x - b
    if not np.any(x):
        return vec_norm(r, spec.p)
    return vec_norm(r, spec.p) + spec.eta * vec_norm(x, spec.q)


def frobenius_ball_min_residual(A, x, b, eta: float) -> float:
    """Known closed form for ``min ||(A + D) x - b||`` over ``||D||_F <= eta``."""
    r = np.asarray(A, dtype=complex) @ x - b
    return max(float(np.linalg.norm(r)) - eta * float(np.linalg.norm(x)), 0.0)


def worst_case_delta(A, x, b, spec: UncertaintySpec) -> PerturbationMatrix:
    """Rank-one perturbation in the ball attaining :func:`min_residual_value`."""
    A = np.asarray(A, dtype=complex)
    x = np.asarray(x, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if not np.any(x):
        raise ValueError("worst_case_delta needs x != 0; use min_residual_value")
    r = A @ x - b
    nr = vec_norm(r, spec.p)
    nx = vec_norm(x, spec.q)
    y = dual_norm_maximizer(x, spec.q)
    rot = np.conj(_phase(np.vdot(y, x)))
    if nr == 0:
        return PerturbationMatrix(np.zeros((A.shape[0], x.size), complex), Branch.ZERO)
    if nr >= spec.eta * nx:
        D = -spec.eta * rot * np.outer(r, y.conj()) / nr
        return PerturbationMatrix(D, Branch.ATTAINED)
    D = -rot * np.outer(r, y.conj()) / nx
    return PerturbationMatrix(D, Branch.ZEROED)


def _random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _rownorm(V: np.ndarray, p: ExtRational) -> np.ndarray:
    """l_p norm along the last axis."""
    mod = np.abs(V)
    if p.is_inf:
        return mod.max(axis=-1)
    if p == 1:
        return mod.sum(axis=-1)
    if p == 2:
        return np.sqrt(np.sum(mod * mod, axis=-1))
    top = mod.max(axis=-1, keepdims=True)
    top = np.where(top > 0, top, 1.0)
    pf = float(p)
    return top[..., 0] * np.sum((mod / top) ** pf, axis=-1) ** (1.0 / pf)


def _dual_rows(V: np.ndarray, q: ExtRational) -> np.ndarray:
    """Row-wise :func:`dual_norm_maximizer` for nonzero rows of V."""
    mod = np.abs(V)
    ph = np.where(mod > 0, V / np.where(mod > 0, mod, 1.0), 1.0)
    if q.is_inf:
        Y = np.zeros_like(V)
        i = np.argmax(mod, axis=-1)
        rows = np.arange(V.shape[0])
        Y[rows, i] = ph[rows, i]
        return Y
    if q == 1:
        return np.where(mod > 0, ph, 0.0)
    nq = _rownorm(V, q)[:, None]
    return ph * (mod / nq) ** (float(q) - 1.0)


def _batch_upper(D: np.ndarray, p: ExtRational, q: ExtRational) -> np.ndarray:
    """Certified upper bound on ||D_k||_{p,q} for a stack of matrices."""
    col = _rownorm(np.swapaxes(D, 1, 2), p).max(axis=1)  # ||D||_{p,1}
    row = _rownorm(D, q.conjugate()).max(axis=1)  # ||D||_{inf,q}
    if q == 1:
        return col
    if p.is_inf:
        return row
    if p == 2 and q == 2:
        return np.linalg.norm(D, 2, axis=(1, 2))
    M, N = D.shape[1:]
    return np.minimum(col * N ** (1.0 - 1.0 / float(q)), M ** (1.0 / float(p)) * row)


def adversarial_sample(A, x, b, spec: UncertaintySpec, count: int,
                       rng: np.random.Generator) -> tuple[float, float]:
    """Extreme residuals over ``count`` random members of the ball.

    Half the draws are rank-one ``sigma u y(v)^H`` with ``||u||_p = 1`` and
    ``y(v)`` a unit dual-norm vector, the tight family; a quarter of those
    are aimed along ``Ax - b`` and ``x``. The other half are dense Gaussian
    matrices scaled under a certified induced-norm bound.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    A = np.asarray(A, dtype=complex)
    x = np.asarray(x, dtype=complex)
    b = np.asarray(b, dtype=complex)
    M, N = A.shape
    r = A @ x - b
    k1 = (count + 1) // 2
    k2 = count - k1

    U = _random_complex(rng, k1, M)
    U /= _rownorm(U, spec.p)[:, None]
    Y = _dual_rows(_random_complex(rng, k1, N), spec.q)
    aimed = np.arange(k1) % 2 == 0
    if np.any(x):
        Y[aimed] = dual_norm_maximizer(x, spec.q)
    if np.any(r):
        sign = rng.choice([-1.0, 1.0], size=int(aimed.sum()))
        U[aimed] = sign[:, None] * (r / vec_norm(r, spec.p))
    sigma = spec.eta * rng.random(k1) * np.exp(2j * np.pi * rng.random(k1))
    sigma[aimed] = spec.eta * rng.random(int(aimed.sum())) ** 0.25
    R1 = r[None, :] + (sigma * (Y.conj() @ x))[:, None] * U
    vals = [_rownorm(R1, spec.p)]

    if k2:
        D = _random_complex(rng, k2, M, N)
        bound = _batch_upper(D, spec.p, spec.q)
        scale = np.where(bound > 0, spec.eta * rng.random(k2) / np.where(bound > 0, bound, 1), 0.0)
        R2 = r[None, :] + scale[:, None] * (D @ x)
        vals.append(_rownorm(R2, spec.p))
    allv = np.concatenate(vals)
    return float(allv.min()), float(allv.max())
