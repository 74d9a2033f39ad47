"""Transmit beamformers for RS and HRS.

Private precoders are RZF (or MBF) on the CSIT estimate. Common-message
precoders are weighted matched filters renormalised to unit norm, which
enforces the power constraint at finite M.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import fix_phase
from .errors import DegenerateInputError, InvalidArgumentError, InvalidConfigurationError

NULLSPACE_TOL = 1e-10


@dataclass
class RsPrecoderSet:
    W: np.ndarray
    xi: float
    w_c: np.ndarray
    weights: np.ndarray


@dataclass
class HrsPrecoderSet:
    outer: list
    inner: list
    xi: np.ndarray
    w_oc: np.ndarray
    w_ic: list

    @property
    def group_sizes(self) -> np.ndarray:
        return np.array([W.shape[1] for W in self.inner])

    def private_beams(self) -> np.ndarray:
        """Full-dimension private beams ``B_g w_gk`` stacked group by group (M x K)."""
        return np.hstack([B @ W for B, W in zip(self.outer, self.inner)])

    def inner_common_beams(self) -> np.ndarray:
        """Full-dimension inner common beams ``B_g w_ic,g`` (M x G)."""
        return np.column_stack([B @ w for B, w in zip(self.outer, self.w_ic)])


def _regularised_inverse_times(H, reg):
    # (H H^H + reg I)^{-1} H == H (H^H H + reg I)^{-1}
    K = H.shape[1]
    gram = H.conj().T @ H + reg * np.eye(K)
    return np.linalg.solve(gram.T, H.T).T


def rzf_precoder(H_hat: np.ndarray, eps: float):
    """Regularised zero-forcing ``W = xi (H H^H + M eps I)^{-1} H`` with ``tr(W^H W) = K``.

    Returns
    -------
    W : (M, K) complex array
    xi : float
        Normalisation scalar.
    """
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    M, K = H_hat.shape
    X = _regularised_inverse_times(H_hat, M * eps)
    norm2 = np.sum(np.abs(X) ** 2)
    if norm2 == 0:
        raise DegenerateInputError("CSIT matrix is zero")
    xi = np.sqrt(K / norm2)
    return xi * X, float(xi)


def mbf_precoder(H_hat: np.ndarray) -> np.ndarray:
    """Matched beamforming with unit-norm columns."""
    norms = np.linalg.norm(H_hat, axis=0)
    if np.any(norms == 0):
        raise DegenerateInputError("MBF is undefined for a zero channel estimate")
    return H_hat / norms[None, :]


def rs_common_weights(pi, tau, M: int) -> np.ndarray:
    """Max-min weights ``a_k`` of the common matched-filter precoder.

    The weights equalise ``pi_k (1 - tau_k^2) a_k^2`` subject to
    ``sum_k a_k^2 = 1/M``.
    """
    pi = np.asarray(pi, dtype=float)
    tau = np.broadcast_to(np.asarray(tau, dtype=float), pi.shape)
    if np.any(tau >= 1):
        raise DegenerateInputError("a user with tau = 1 cannot decode the common message")
    c = pi * (1 - tau**2)
    if np.any(c <= 0):
        raise InvalidArgumentError("pi_k (1 - tau_k^2) must be positive")
    return 1 / np.sqrt(M * c * np.sum(1 / c))


def rs_common_precoder(H_hat: np.ndarray, weights=None) -> np.ndarray:
    """Unit-norm common precoder ``sum_k a_k h_hat_k``; equal weights by default."""
    M, K = H_hat.shape
    a = np.full(K, 1 / np.sqrt(M * K)) if weights is None else np.asarray(weights, dtype=float)
    if a.shape != (K,):
        raise InvalidArgumentError("need one weight per user")
    w = H_hat @ a
    nrm = np.linalg.norm(w)
    if nrm == 0:
        raise DegenerateInputError("common precoder is the zero vector")
    return w / nrm


def build_rs_precoders(H_hat, eps, private="rzf", weights=None) -> RsPrecoderSet:
    if private == "rzf":
        W, xi = rzf_precoder(H_hat, eps)
    elif private == "mbf":
        W, xi = mbf_precoder(H_hat), 1.0
    else:
        raise InvalidArgumentError(f"unknown private precoder {private!r}")
    w_c = rs_common_precoder(H_hat, weights)
    K = H_hat.shape[1]
    a = np.full(K, 1 / np.sqrt(H_hat.shape[0] * K)) if weights is None else np.asarray(weights)
    return RsPrecoderSet(W, xi, w_c, a)


def dominant_eigenvectors(R: np.ndarray, r: int) -> np.ndarray:
    lam, V = np.linalg.eigh(0.5 * (R + R.conj().T))
    return fix_phase(V[:, ::-1][:, :r])


def check_outer_dimensions(M, design_ranks, dims, group_sizes=None):
    """Raise ``InvalidConfigurationError`` naming the first violated inequality."""
    rd = np.asarray(design_ranks, dtype=int)
    b = np.asarray(dims, dtype=int)
    if rd.shape != b.shape:
        raise InvalidConfigurationError("need one design rank and one dimension per group")
    for g in range(b.size):
        others = rd.sum() - rd[g]
        if b[g] > M - others:
            raise InvalidConfigurationError(
                f"b_g exceeds M - sum_(l!=g) r^d_l for group {g}: {b[g]} > {M - others}"
            )
        if b[g] > rd[g]:
            raise InvalidConfigurationError(f"b_g exceeds r^d_g for group {g}: {b[g]} > {rd[g]}")
        if group_sizes is not None and group_sizes[g] > b[g]:
            raise InvalidConfigurationError(
                f"K_g exceeds b_g for group {g}: {group_sizes[g]} > {b[g]}"
            )
    if rd.sum() > M:
        raise InvalidConfigurationError(f"sum of r^d_g ({rd.sum()}) exceeds M ({M})")


def outer_precoder(covariances, design_ranks, dims, group_sizes=None) -> list:
    """Statistical outer precoders from the dominant eigenspaces of all groups.

    For each group the other groups' dominant eigenvectors are stacked, the
    left null space of that stack is found by SVD, and the ``b_g`` strongest
    eigenmodes of the projected covariance are kept.
    """
    Rs = [np.asarray(R, dtype=complex) for R in covariances]
    G = len(Rs)
    M = Rs[0].shape[0]
    check_outer_dimensions(M, design_ranks, dims, group_sizes)
    Ud = [dominant_eigenvectors(R, int(r)) for R, r in zip(Rs, design_ranks)]
    outer = []
    for g in range(G):
        others = [Ud[l] for l in range(G) if l != g]
        if others:
            U_minus = np.hstack(others)
            left, s, _ = np.linalg.svd(U_minus, full_matrices=True)
            rank = int(np.count_nonzero(s > NULLSPACE_TOL * s[0])) if s.size else 0
            E0 = left[:, rank:]
        else:
            E0 = np.eye(M, dtype=complex)
        Rt = E0.conj().T @ Rs[g] @ E0
        F1 = dominant_eigenvectors(Rt, int(dims[g]))
        outer.append(E0 @ F1)
    return outer


def inner_rzf(Hbar_hat: np.ndarray, eps: float, B: Optional[np.ndarray] = None):
    """RZF on the effective channel, ``W_g = xi_g (Hbar Hbar^H + b_g eps I)^{-1} Hbar``."""
    if not eps > 0:
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    b, Kg = Hbar_hat.shape
    X = _regularised_inverse_times(Hbar_hat, b * eps)
    if B is None:
        norm2 = np.sum(np.abs(X) ** 2)
    else:
        norm2 = np.sum(np.abs(B @ X) ** 2)
    if norm2 == 0:
        raise DegenerateInputError("effective CSIT is zero")
    xi = np.sqrt(Kg / norm2)
    return xi * X, float(xi)


def hrs_common_precoders(outer, Hbar_hat, inner):
    """Outer common beam (all users) and per-group inner common beams.

    Returns
    -------
    w_oc : (M,) unit-norm array
    w_ic : list of (b_g,) arrays with ``||B_g w_ic,g|| = 1``
    """
    M = outer[0].shape[0]
    C = np.hstack([B @ Hb for B, Hb in zip(outer, Hbar_hat)])
    s = C.sum(axis=1) / np.sqrt(M)
    nrm = np.linalg.norm(s)
    if nrm == 0:
        raise DegenerateInputError("outer common precoder is the zero vector")
    w_oc = s / nrm
    w_ic = []
    for B, W in zip(outer, inner):
        q = W.mean(axis=1)
        qn = np.linalg.norm(B @ q)
        if qn == 0:
            raise DegenerateInputError("inner common precoder is the zero vector")
        w_ic.append(q / qn)
    return w_oc, w_ic


def build_hrs_precoders(H_hat, groups, outer, eps) -> HrsPrecoderSet:
    """All HRS beams from full CSIT ``H_hat`` (M x K) and a user-to-group map."""
    groups = np.asarray(groups)
    G = len(outer)
    Hbar = [outer[g].conj().T @ H_hat[:, groups == g] for g in range(G)]
    inner, xis = [], []
    for g in range(G):
        W, xi = inner_rzf(Hbar[g], eps, outer[g])
        inner.append(W)
        xis.append(xi)
    w_oc, w_ic = hrs_common_precoders(outer, Hbar, inner)
    return HrsPrecoderSet(list(outer), inner, np.array(xis), w_oc, w_ic)
