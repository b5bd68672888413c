"""Uniform linear array scenarios with incoherently scattered sources."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .linalg import LinalgError, as_hermitian, hermitian_eig

DEFAULT_GRID = 2048
MIN_GRID = 64
GAUSS_TRUNCATION = 4.0  # spreads on each side of the center


class Density(str, enum.Enum):
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class ULAConfig:
    n_sensors: int = 10
    spacing: float = 0.5  # wavelengths

    def __post_init__(self):
        if self.n_sensors < 2:
            raise ValueError("need at least two sensors")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")


@dataclass(frozen=True)
class ScatteredSource:
    """Angular power density of a locally scattered source.

    ``spread`` is the standard deviation for a Gaussian density and the
    full support width for a uniform one. Angles are in degrees.
    """

    density: Density
    center: float
    spread: float
    power: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "density", Density(self.density))
        if self.spread < 0:
            raise ValueError("spread must be nonnegative")
        if not self.power > 0:
            raise ValueError("power must be positive")
        if not -90 < self.center < 90:
            raise ValueError("center must lie in (-90, 90) degrees")


@dataclass(frozen=True)
class Scenario:
    ula: ULAConfig
    signal_true: ScatteredSource
    signal_presumed: ScatteredSource
    interferers: tuple[ScatteredSource, ...] = ()
    noise_power: float = 1.0
    snapshots: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.snapshots < 1:
            raise ValueError("snapshots must be >= 1")
        object.__setattr__(self, "interferers", tuple(self.interferers))


@dataclass
class CovarianceSet:
    R_s: np.ndarray  # true signal
    R_s_presumed: np.ndarray
    R_ipn: np.ndarray  # interference plus noise
    R: np.ndarray  # R_s + R_ipn
    R_hat: np.ndarray | None = field(default=None)  # sample estimate of R


def steering_vector(ula: ULAConfig, theta_deg: float) -> np.ndarray:
    n = np.arange(ula.n_sensors)
    return np.exp(2j * np.pi * ula.spacing * n * np.sin(np.deg2rad(theta_deg)))


@lru_cache(maxsize=8)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def angle_weights(source: ScatteredSource, grid_points: int = DEFAULT_GRID):
    """Quadrature angles (degrees) and weights summing to one.

    Gauss-Legendre nodes over the support: the whole interval for a
    uniform density, center +- 4 spreads for a Gaussian one.
    """
    if grid_points < MIN_GRID:
        raise ValueError(f"grid_points must be >= {MIN_GRID}")
    if source.spread == 0:
        return np.array([source.center]), np.array([1.0])
    x, w = _legendre(grid_points)
    if source.density is Density.UNIFORM:
        half = source.spread / 2
        rho = np.asarray(w, dtype=float).copy()
    else:
        half = GAUSS_TRUNCATION * source.spread
        rho = w * np.exp(-0.5 * (half * x / source.spread) ** 2)
    theta = source.center + half * x
    if np.any(np.abs(theta) >= 90):
        raise ValueError("angular support crosses endfire")
    return theta, rho / rho.sum()


def scattered_covariance(ula: ULAConfig, source: ScatteredSource,
                         grid_points: int = DEFAULT_GRID) -> np.ndarray:
    """``power * sum_g rho_g a(theta_g) a(theta_g)^H``; trace is N * power."""
    theta, rho = angle_weights(source, grid_points)
    n = np.arange(ula.n_sensors)
    Avec = np.exp(2j * np.pi * ula.spacing * np.outer(n, np.sin(np.deg2rad(theta))))
    R = (Avec * rho) @ Avec.conj().T
    return source.power * as_hermitian(R)


def psd_sqrt(R) -> np.ndarray:
    """Hermitian square root with negative eigenvalues clipped to zero."""
    lam, U = hermitian_eig(R)
    return (U * np.sqrt(np.clip(lam, 0.0, None))) @ U.conj().T


def sample_covariance(R_total, T: int, rng: np.random.Generator) -> np.ndarray:
    """``(1/T) sum y y^H`` for T zero-mean circular Gaussian snapshots of covariance R_total."""
    if T < 1:
        raise ValueError("T must be >= 1")
    C = psd_sqrt(R_total)
    N = C.shape[0]
    Z = (rng.standard_normal((N, T)) + 1j * rng.standard_normal((N, T))) / np.sqrt(2)
    Y = C @ Z
    return as_hermitian(Y @ Y.conj().T / T)


def sinr(w, R_s, R_ipn) -> float:
    w = np.asarray(w, dtype=complex)
    if not np.any(w):
        raise ValueError("SINR of the zero beamvector")
    return float(np.real(np.vdot(w, R_s @ w)) / np.real(np.vdot(w, R_ipn @ w)))


def optimal_sinr(R_s, R_ipn) -> float:
    """Largest eigenvalue of R_ipn^{-1/2} R_s R_ipn^{-1/2}."""
    lam, U = hermitian_eig(R_ipn)
    if lam[-1] <= 1e-12 * max(lam[0], 0.0) or lam[-1] <= 0:
        raise LinalgError("interference-plus-noise covariance is singular")
    Ris = (U / np.sqrt(lam)) @ U.conj().T
    return float(hermitian_eig(as_hermitian(Ris @ R_s @ Ris, rtol=1e-10))[0][0])


def build_covariances(sc: Scenario, grid_points: int = DEFAULT_GRID) -> CovarianceSet:
    """True, presumed and interference-plus-noise covariances (no sampling)."""
    N = sc.ula.n_sensors
    R_s = scattered_covariance(sc.ula, sc.signal_true, grid_points)
    R_sp = scattered_covariance(sc.ula, sc.signal_presumed, grid_points)
    R_ipn = sc.noise_power * np.eye(N, dtype=complex)
    for src in sc.interferers:
        R_ipn = R_ipn + scattered_covariance(sc.ula, src, grid_points)
    return CovarianceSet(R_s=R_s, R_s_presumed=R_sp, R_ipn=R_ipn, R=R_s + R_ipn)


def default_scenario(snr_db: float = 10.0, inr_db: float = 10.0, snapshots: int = 50,
                     seed: int = 0) -> Scenario:
    """Ten-sensor half-wavelength array: Gaussian signal at 30 deg (spread 4),
    uniform interferer at 10 deg (width 10), presumed Gaussian at 34 deg
    (spread 6), unit noise power."""
    snr = 10 ** (snr_db / 10)
    return Scenario(
        ula=ULAConfig(10, 0.5),
        signal_true=ScatteredSource(Density.GAUSSIAN, 30.0, 4.0, snr),
        signal_presumed=ScatteredSource(Density.GAUSSIAN, 34.0, 6.0, snr),
        interferers=(ScatteredSource(Density.UNIFORM, 10.0, 10.0, 10 ** (inr_db / 10)),),
        noise_power=1.0,
        snapshots=snapshots,
        seed=seed,
    )
