"""Antenna geometry, one-ring spatial correlation and Karhunen-Loeve channels.

Positions are expressed in wavelengths, so the wavelength is fixed to 1
throughout. Complex Gaussian draws use unit total variance (1/2 per real
component).
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidArgumentError, NotPSDError

DEFAULT_QUADRATURE_POINTS = 200
DEFAULT_RANK_TOL = 1e-10
PSD_TOL = 1e-8


@dataclass(frozen=True)
class ArrayGeometry:
    positions: np.ndarray
    layout: str = "custom"

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim != 2 or pos.shape[1] != 2 or pos.shape[0] < 1:
            raise InvalidArgumentError("positions must have shape (M, 2)")
        if not np.all(np.isfinite(pos)):
            raise InvalidArgumentError("antenna positions must be finite")
        object.__setattr__(self, "positions", pos)

    @property
    def num_antennas(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class OneRingParams:
    """Azimuth ``theta`` and angular spread ``spread`` (radians) of a scattering ring."""

    azimuth: float
    spread: float

    def __post_init__(self):
        if not (np.isfinite(self.azimuth) and np.isfinite(self.spread)):
            raise InvalidArgumentError("azimuth and spread must be finite")
        if not 0.0 <= self.spread <= np.pi:
            raise InvalidArgumentError(f"angular spread must lie in [0, pi], got {self.spread}")


@dataclass(frozen=True)
class CorrelationModel:
    """Spatial correlation matrix together with its truncated eigendecomposition."""

    matrix: np.ndarray
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def num_antennas(self) -> int:
        return self.matrix.shape[0]

    @property
    def factor(self) -> np.ndarray:
        """``U diag(sqrt(lambda))``, the M x r Karhunen-Loeve factor."""
        return self.eigenvectors * np.sqrt(self.eigenvalues)[None, :]

    @classmethod
    def from_matrix(cls, R, rel_tol=DEFAULT_RANK_TOL):
        R = np.asarray(R, dtype=complex)
        U, lam, _ = eigen_truncate(R, rel_tol)
        return cls(R, U, lam)


@dataclass
class ChannelSample:
    """One joint draw of true channels and CSIT estimates.

    Columns of ``H`` and ``H_hat`` are per-user channels. ``g`` and ``z`` hold the
    inner Gaussian vectors so that ``H[:, k] == factors[k] @ g[k]``.
    """

    H: np.ndarray
    H_hat: np.ndarray
    g: list
    z: list
    tau: np.ndarray
    factors: list
    groups: Optional[np.ndarray] = None

    @property
    def num_users(self) -> int:
        return self.H.shape[1]


def uca_positions(M: int) -> ArrayGeometry:
    """Uniform circular array with half-wavelength spacing between neighbours."""
    if int(M) != M or M < 2:
        raise InvalidArgumentError(f"a UCA needs at least 2 antennas, got {M}")
    M = int(M)
    step = 2 * np.pi / M
    D = 0.5 / np.sqrt((1 - np.cos(step)) ** 2 + np.sin(step) ** 2)
    phi = step * np.arange(M)
    positions = D * np.column_stack([np.cos(phi), np.sin(phi)])
    return ArrayGeometry(positions, layout="UCA")


def steering_vector(geom: ArrayGeometry, angle) -> np.ndarray:
    """``a_i = exp(-j 2 pi Psi(angle) . r_i)``; ``angle`` may be an array (one column each)."""
    angle = np.atleast_1d(np.asarray(angle, dtype=float))
    wave = np.stack([np.cos(angle), np.sin(angle)])  # (2, N)
    return np.exp(-2j * np.pi * (geom.positions @ wave))


def one_ring_correlation(
    geom: ArrayGeometry,
    params: OneRingParams,
    quadrature_points: int = DEFAULT_QUADRATURE_POINTS,
    rel_tol: float = DEFAULT_RANK_TOL,
) -> CorrelationModel:
    """Correlation matrix of the one-ring model by Gauss-Legendre quadrature.

    The angular average of ``a(alpha) a(alpha)^H`` over
    ``[theta - spread, theta + spread]`` is evaluated with ``quadrature_points``
    nodes. A zero spread gives the rank-one matrix ``a(theta) a(theta)^H``.
    """
    if quadrature_points < 1:
        raise InvalidArgumentError("quadrature_points must be >= 1")
    if params.spread == 0.0:
        a = steering_vector(geom, params.azimuth)[:, 0]
        R = np.outer(a, a.conj())
    else:
        x, w = np.polynomial.legendre.leggauss(int(quadrature_points))
        A = steering_vector(geom, params.azimuth + params.spread * x)
        # (1/2D) * D * sum(w f) over the mapped nodes
        R = (A * (0.5 * w)[None, :]) @ A.conj().T
        R = 0.5 * (R + R.conj().T)
    np.fill_diagonal(R, 1.0)
    U, lam, _ = eigen_truncate(R, rel_tol)
    return CorrelationModel(R, U, lam)


def fix_phase(U: np.ndarray) -> np.ndarray:
    """Rotate each column so its first non-negligible entry is real and positive."""
    U = np.array(U, dtype=complex, copy=True)
    if U.size == 0:
        return U
    mags = np.abs(U)
    thresh = 1e-12 * np.maximum(mags.max(axis=0), np.finfo(float).tiny)
    idx = np.argmax(mags > thresh[None, :], axis=0)
    pivots = U[idx, np.arange(U.shape[1])]
    phase = np.where(np.abs(pivots) > 0, pivots / np.abs(pivots), 1.0)
    return U * phase.conj()[None, :]


def eigen_truncate(R: np.ndarray, rel_tol: float = DEFAULT_RANK_TOL):
    """Eigendecomposition of a Hermitian PSD matrix keeping the significant modes.

    Returns
    -------
    U : (M, r) complex array
        Orthonormal eigenvectors, phase-normalised.
    lam : (r,) float array
        Eigenvalues ``>= rel_tol * max eigenvalue`` in nonincreasing order.
    r : int
    """
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise InvalidArgumentError("R must be square")
    lam, V = np.linalg.eigh(0.5 * (R + R.conj().T))
    lam, V = lam[::-1], V[:, ::-1]
    lam_max = lam[0] if lam.size else 0.0
    if lam_max <= 0.0:
        if lam.size and lam[-1] < -PSD_TOL:
            raise NotPSDError("matrix has no positive eigenvalue")
        return np.zeros((R.shape[0], 0), dtype=complex), np.zeros(0), 0
    if lam[-1] < -PSD_TOL * lam_max:
        raise NotPSDError(f"eigenvalue {lam[-1]:.3e} below -{PSD_TOL} * lambda_max")
    keep = lam >= rel_tol * lam_max
    r = int(np.count_nonzero(keep))
    return fix_phase(V[:, :r]), lam[:r].copy(), r


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Circularly-symmetric CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def substream(master_seed: int, *indices: int) -> np.random.Generator:
    """Counter-based generator keyed by ``(master_seed, *indices)``.

    The stream for a given key does not depend on which other keys were drawn,
    so trial results are independent of execution order.
    """
    key = [int(master_seed)] + [int(i) for i in indices]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def draw_channel(models: Sequence[CorrelationModel], rng: np.random.Generator):
    """Draw ``h_k = U_k Lambda_k^{1/2} g_k`` for every user.

    Returns
    -------
    H : (M, K) complex array
    g : list of inner Gaussian vectors
    """
    if len(models) == 0:
        raise InvalidArgumentError("at least one user model is required")
    M = models[0].num_antennas
    H = np.zeros((M, len(models)), dtype=complex)
    g = []
    for k, model in enumerate(models):
        gk = complex_normal(rng, model.rank)
        g.append(gk)
        if model.rank:
            H[:, k] = model.factor @ gk
    return H, g


def draw_csit(models: Sequence[CorrelationModel], g, tau, rng: np.random.Generator):
    """Imperfect estimates ``U Lambda^{1/2} (sqrt(1 - tau^2) g + tau z)``.

    Returns
    -------
    H_hat : (M, K) complex array
    z : list of error vectors
    """
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (len(models),))
    if np.any(~np.isfinite(tau)) or np.any(tau < 0) or np.any(tau > 1):
        raise InvalidArgumentError("tau must lie in [0, 1]")
    M = models[0].num_antennas
    H_hat = np.zeros((M, len(models)), dtype=complex)
    z = []
    for k, model in enumerate(models):
        zk = complex_normal(rng, model.rank)
        z.append(zk)
        if not model.rank:
            continue
        if tau[k] == 0.0:
            H_hat[:, k] = model.factor @ g[k]
        else:
            H_hat[:, k] = model.factor @ (np.sqrt(1 - tau[k] ** 2) * g[k] + tau[k] * zk)
    return H_hat, z


def draw_sample(models, tau, rng, groups=None) -> ChannelSample:
    """True channels followed by CSIT estimates from the same generator."""
    H, g = draw_channel(models, rng)
    H_hat, z = draw_csit(models, g, tau, rng)
    tau = np.broadcast_to(np.asarray(tau, dtype=float), (len(models),)).copy()
    factors = [m.factor for m in models]
    groups = None if groups is None else np.asarray(groups, dtype=int)
    return ChannelSample(H, H_hat, g, z, tau, factors, groups)


def user_azimuths(K: int) -> np.ndarray:
    """Users spread uniformly in azimuth, ``theta_k = 2 pi k / K`` for k = 1..K."""
    return 2 * np.pi * np.arange(1, K + 1) / K


def group_azimuths(G: int) -> np.ndarray:
    """Group azimuths ``-pi/2 + (pi/3)(g - 1)`` for g = 1..G."""
    return -np.pi / 2 + (np.pi / 3) * np.arange(G)
