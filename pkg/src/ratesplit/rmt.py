"""Deterministic equivalents for RZF-type precoders with imperfect CSIT.

The one-tier (RS) quantities follow the usual RZF fixed point

    m_k = tr(R_k T) / N,   T = (sum_j w_j R_j / (N (1 + m_j)) + eps I)^{-1},

with ``N = M``. The two-tier (HRS) quantities use the same machinery on the
effective covariances ``B_l^H R_g B_l`` with ``N = b_g``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    ConvergenceError,
    IllConditionedError,
    InvalidArgumentError,
    InvalidConfigurationError,
)

LOG2E = np.log2(np.e)


@dataclass
class FixedPointSolution:
    m: np.ndarray
    T: np.ndarray
    eps: float
    weights: np.ndarray
    norm_dim: int
    iterations: int
    residual: float


@dataclass
class DerivativeTerms:
    """Solutions of ``(I - J) x = v`` and ``(I - J) x_k = v_k``.

    ``m_prime_k[j, k]`` is component ``j`` of the vector associated with user ``k``.
    """

    m_prime: np.ndarray
    m_prime_k: np.ndarray
    J: np.ndarray
    v: np.ndarray
    V: np.ndarray
    spectral_radius: float

    @property
    def stable(self) -> bool:
        return self.spectral_radius < 1.0


@dataclass
class RsAsymptotics:
    psi: float
    xi2: float
    upsilon: np.ndarray
    phi: np.ndarray
    omega: np.ndarray
    sinr_common_k: np.ndarray
    sinr_private: np.ndarray
    sinr_rzf: np.ndarray
    t: float
    P: float
    pi: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def sinr_common(self) -> float:
        return float(np.min(self.sinr_common_k))

    @property
    def rate_common(self) -> float:
        return float(np.log2(1 + self.sinr_common))

    @property
    def rate_private(self) -> float:
        return float(np.sum(np.log2(1 + self.sinr_private)))

    @property
    def rate_sum(self) -> float:
        return self.rate_common + self.rate_private

    @property
    def rate_rzf_sum(self) -> float:
        return float(np.sum(np.log2(1 + self.sinr_rzf)))

    @property
    def gain(self) -> float:
        """Sum-rate gain over RZF broadcasting with full power."""
        return self.rate_sum - self.rate_rzf_sum


@dataclass
class HrsAsymptotics:
    group_sizes: np.ndarray
    dims: np.ndarray
    eps: float
    P: float
    alpha: float
    beta: float
    m: np.ndarray
    m_prime: np.ndarray
    m_prime_cross: np.ndarray
    psi: np.ndarray
    xi2: np.ndarray
    phi: np.ndarray
    upsilon: np.ndarray
    omega: np.ndarray
    kappa: np.ndarray
    sinr_outer: np.ndarray
    sinr_inner: np.ndarray
    sinr_private: np.ndarray
    sinr_ttp: np.ndarray
    effective_cov: list = field(repr=False, default_factory=list)

    @property
    def num_groups(self) -> int:
        return self.group_sizes.size

    @property
    def rate_outer(self) -> float:
        return float(np.log2(1 + np.min(self.sinr_outer)))

    @property
    def rate_inner(self) -> float:
        return float(np.sum(np.log2(1 + self.sinr_inner)))

    @property
    def rate_private(self) -> float:
        return float(np.sum(self.group_sizes * np.log2(1 + self.sinr_private)))

    @property
    def rate_sum(self) -> float:
        return self.rate_outer + self.rate_inner + self.rate_private

    @property
    def rate_ttp_sum(self) -> float:
        return float(np.sum(self.group_sizes * np.log2(1 + self.sinr_ttp)))

    @property
    def gain(self) -> float:
        """Sum-rate gain over two-tier precoded broadcasting."""
        return self.rate_sum - self.rate_ttp_sum

    def inter_group_terms(self) -> np.ndarray:
        """``xi_l^2 Upsilon_gl`` with a zero diagonal."""
        X = self.upsilon * self.xi2[None, :]
        np.fill_diagonal(X, 0.0)
        return X

    def intra_group_terms(self) -> np.ndarray:
        """``xi_g^2 Upsilon_gg Omega_g``."""
        return self.xi2 * np.diag(self.upsilon) * self.omega


def _as_stack(covariances) -> np.ndarray:
    Rs = np.asarray(covariances, dtype=complex)
    if Rs.ndim == 2:
        Rs = Rs[None]
    if Rs.ndim != 3 or Rs.shape[1] != Rs.shape[2]:
        raise InvalidArgumentError("covariances must be a stack of square matrices")
    return Rs


def _build_T(Rs, m, weights, norm_dim, eps):
    N = Rs.shape[1]
    A = np.einsum("k,kij->ij", weights / (norm_dim * (1 + m)), Rs) + eps * np.eye(N)
    T = np.linalg.inv(A)
    return 0.5 * (T + T.conj().T)


def _traces(Rs, T):
    # tr(R_k T) for every k
    return np.einsum("kij,ji->k", Rs, T).real


def solve_fixed_point(
    covariances,
    eps: float,
    weights=None,
    norm_dim: Optional[int] = None,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    init: float = 1.0,
) -> FixedPointSolution:
    """Picard iteration for the RZF deterministic equivalent.

    Parameters
    ----------
    covariances : sequence of (N, N) Hermitian arrays
        One matrix per distinct user class.
    eps : float
        Regularisation, must be positive.
    weights : array_like, optional
        Number of users sharing each covariance (default all ones).
    norm_dim : int, optional
        Normalising dimension; defaults to the matrix size.

    Raises
    ------
    ConvergenceError
        If the relative change stays above ``tol`` after ``max_iter`` sweeps.
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    Rs = _as_stack(covariances)
    K, N = Rs.shape[0], Rs.shape[1]
    weights = np.ones(K) if weights is None else np.asarray(weights, dtype=float)
    norm_dim = N if norm_dim is None else int(norm_dim)
    m = np.full(K, float(init))
    history = []
    damping = False
    for it in range(1, max_iter + 1):
        T = _build_T(Rs, m, weights, norm_dim, eps)
        m_new = _traces(Rs, T) / norm_dim
        if damping:
            m_new = 0.5 * (m + m_new)
        change = np.max(np.abs(m_new - m)) / max(np.max(np.abs(m_new)), 1e-300)
        if history and change > history[-1]:
            damping = True
        history.append(float(change))
        m = m_new
        if change <= tol:
            break
    else:
        raise ConvergenceError(
            f"fixed point did not converge in {max_iter} iterations "
            f"(last relative change {history[-1]:.3e})",
            history,
        )
    T = _build_T(Rs, m, weights, norm_dim, eps)
    residual = float(np.max(np.abs(m - _traces(Rs, T) / norm_dim)))
    return FixedPointSolution(m, T, float(eps), weights, norm_dim, it, residual)


def _coupling(fp: FixedPointSolution, Rs):
    """``C[i, j] = tr(R_i T R_j T) / N``."""
    RT = Rs @ fp.T
    return np.einsum("iab,jba->ij", RT, RT).real / fp.norm_dim


def _jacobian(fp, C):
    return C * (fp.weights / (fp.norm_dim * (1 + fp.m) ** 2))[None, :]


def _solve(J, rhs):
    A = np.eye(J.shape[0]) - J
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1.0):
        raise IllConditionedError("I - J is singular to working precision")
    return np.linalg.solve(A, rhs)


def solve_derivative_system(fp: FixedPointSolution, covariances) -> DerivativeTerms:
    """Derivative terms ``m' = (I - J)^{-1} v`` and ``m'_k = (I - J)^{-1} v_k``."""
    Rs = _as_stack(covariances)
    C = _coupling(fp, Rs)
    J = _jacobian(fp, C)
    T2 = fp.T @ fp.T
    v = _traces(Rs, T2) / fp.norm_dim
    V = C
    X = _solve(J, np.column_stack([v, V]))
    radius = float(np.max(np.abs(np.linalg.eigvals(J))))
    return DerivativeTerms(X[:, 0], X[:, 1:], J, v, V, radius)


def directional_derivative(fp: FixedPointSolution, covariances, A) -> np.ndarray:
    """Solution of ``(I - J) x = v_A`` with ``v_A[i] = tr(R_i T A T) / N``."""
    Rs = _as_stack(covariances)
    J = _jacobian(fp, _coupling(fp, Rs))
    TAT = fp.T @ np.asarray(A) @ fp.T
    v = _traces(Rs, TAT) / fp.norm_dim
    return _solve(J, v)


def rs_asymptotics(
    fp: FixedPointSolution,
    deriv: DerivativeTerms,
    tau,
    P: float,
    t: float,
    common_weights=None,
) -> RsAsymptotics:
    """Asymptotic common and private SINRs of one-tier RS.

    ``common_weights`` are the coefficients ``a_k`` of the common precoder
    ``sum_k a_k h_hat_k``; the default equal weights ``1/sqrt(MK)`` give the
    familiar ``eta = M/K`` factor.
    """
    if not 0 < t <= 1:
        raise InvalidArgumentError(f"t must lie in (0, 1], got {t}")
    if not P > 0:
        raise InvalidArgumentError("P must be positive")
    m = fp.m
    K = m.size
    M = fp.norm_dim
    tau2 = np.broadcast_to(np.asarray(tau, dtype=float) ** 2, (K,))
    d = (1 + m) ** 2
    psi = float(np.sum(deriv.m_prime / d) / M)
    xi2 = K / psi
    contrib = deriv.m_prime_k / d[:, None]
    upsilon = (contrib.sum(axis=0) - np.diag(contrib)) / M
    phi = (1 - tau2) * m**2 / d
    omega = (1 - tau2 * (1 - d)) / d
    if common_weights is None:
        gain_c = np.full(K, M / K)
    else:
        a = np.asarray(common_weights, dtype=float)
        gain_c = M**2 * a**2

    def private(tt):
        s = P * tt / K * xi2
        return s * phi / (s * upsilon * omega + 1)

    s = P * t / K * xi2
    # common power over the interference-plus-noise seen by the common stream
    pi = P * (1 - t) / (s * (upsilon * omega + phi) + 1)
    sinr_c = pi * (1 - tau2) * gain_c
    return RsAsymptotics(
        psi, xi2, upsilon, phi, omega, sinr_c, private(t), private(1.0), float(t), float(P), pi
    )


def effective_covariances(covariances, outer) -> list:
    """``Rbar[g][l] = B_l^H R_g B_l`` for all pairs of groups."""
    return [[B.conj().T @ R @ B for B in outer] for R in covariances]


def hrs_asymptotics(
    covariances,
    outer,
    group_sizes,
    tau,
    P: float,
    alpha: float = 1.0,
    beta: float = 1.0,
    eps: Optional[float] = None,
    literal_group_indices: bool = True,
    tol: float = 1e-10,
) -> HrsAsymptotics:
    """Asymptotic SINRs of HRS and of two-tier precoded broadcasting.

    Parameters
    ----------
    covariances : sequence of (M, M) arrays
        Per-group spatial correlation.
    outer : sequence of (M, b_g) arrays
        Column-orthonormal outer precoders.
    group_sizes : sequence of int
        Users per group.
    tau : float or sequence
        CSIT error level per group.
    eps : float, optional
        Inner RZF regularisation; defaults to ``K / (b P)``.
    literal_group_indices : bool
        The cross-group derivative, loading and the outer-common gain carry
        ``K_g`` and ``b_g`` as printed. ``False`` uses the interfering group's
        ``K_l`` and ``b_l`` instead. The two agree for symmetric groups.
    """
    if not (0 < alpha <= 1 and 0 < beta <= 1):
        raise InvalidArgumentError("alpha and beta must lie in (0, 1]")
    if not P > 0:
        raise InvalidArgumentError("P must be positive")
    Kg = np.asarray(group_sizes, dtype=int)
    G = Kg.size
    if len(outer) != G or len(covariances) != G:
        raise InvalidConfigurationError("need one covariance and one outer precoder per group")
    bg = np.array([B.shape[1] for B in outer])
    for g in range(G):
        if bg[g] < Kg[g]:
            raise InvalidConfigurationError(f"b_g >= K_g violated for group {g}: {bg[g]} < {Kg[g]}")
    K = int(Kg.sum())
    b = int(bg.sum())
    if eps is None:
        eps = K / (b * P)
    tau2 = np.broadcast_to(np.asarray(tau, dtype=float) ** 2, (G,))
    Rbar = effective_covariances(covariances, outer)

    fps = [
        solve_fixed_point([Rbar[g][g]], eps, weights=[Kg[g]], norm_dim=bg[g], tol=tol)
        for g in range(G)
    ]
    m = np.array([fp.m[0] for fp in fps])
    d = (1 + m) ** 2

    m_prime = np.empty(G)
    cross = np.empty((G, G))
    for g in range(G):
        T = fps[g].T
        BhB = outer[g].conj().T @ outer[g]
        RT = Rbar[g][g] @ T
        denom = 1 - Kg[g] / bg[g] * np.trace(RT @ RT).real / (bg[g] * d[g])
        m_prime[g] = np.trace(RT @ BhB @ T).real / bg[g] / denom
    for g in range(G):
        for l in range(G):
            T = fps[l].T
            RT = Rbar[l][l] @ T
            Kx, bx = (Kg[g], bg[g]) if literal_group_indices else (Kg[l], bg[l])
            denom = 1 - Kx / bx * np.trace(RT @ RT).real / (bx * d[l])
            cross[g, l] = np.trace(RT @ Rbar[g][l] @ T).real / bx / denom

    psi = Kg / bg * m_prime / d
    xi2 = Kg / psi
    phi = (1 - tau2) * m**2 / d
    if literal_group_indices:
        load = (Kg / bg)[:, None] * np.ones((1, G))
    else:
        load = np.ones((G, 1)) * (Kg / bg)[None, :]
    upsilon = P / K * load * cross / d[None, :]
    omega = (Kg - 1) / Kg * (1 - tau2 * (1 - d)) / d
    tr_gg = np.array([np.trace(Rbar[g][g]).real for g in range(G)])
    if literal_group_indices:
        kappa = tr_gg**2 / (Kg * tr_gg.sum())
    else:
        kappa = tr_gg**2 / np.sum(Kg * tr_gg)

    inter = upsilon * xi2[None, :]
    np.fill_diagonal(inter, 0.0)
    inter = inter.sum(axis=1)
    intra = xi2 * np.diag(upsilon) * omega
    own = P / K * xi2 * phi

    sinr_oc = kappa * P * (1 - beta) * (1 - tau2) / (beta * (inter + intra + own) + 1)
    sinr_ic = beta * (1 - alpha) * (intra + own) / (beta * inter + beta * alpha * (intra + own) + 1)
    sinr_p = beta * alpha * own / (beta * inter + beta * alpha * intra + 1)
    sinr_ttp = own / (inter + intra + 1)

    return HrsAsymptotics(
        Kg, bg, float(eps), float(P), float(alpha), float(beta),
        m, m_prime, cross, psi, xi2, phi, upsilon, omega, kappa,
        sinr_oc, sinr_ic, sinr_p, sinr_ttp, Rbar,
    )
