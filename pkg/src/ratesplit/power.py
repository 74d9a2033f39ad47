"""Closed-form power splits between common and private messages."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import IllConditionedError, InvalidArgumentError
from .rmt import LOG2E, HrsAsymptotics, RsAsymptotics

WEAK_THRESHOLD = 0.01
DEFAULT_MU = 0.9


class Regime(str, Enum):
    WEAK = "weak"
    STRONG = "strong"
    GENERAL = "general"


@dataclass
class RsPowerSplit:
    t: float
    gamma: float
    P: float
    K: int

    @property
    def common_power(self) -> float:
        return self.P * (1 - self.t)

    @property
    def private_power(self) -> float:
        """Power per private stream."""
        return self.P * self.t / self.K


@dataclass
class HrsPowerSplit:
    alpha: float
    beta: float
    gamma_og: float
    gamma_ig: float
    regime: Regime
    P: float
    K: int
    G: int
    mu: float = DEFAULT_MU

    @property
    def outer_power(self) -> float:
        return self.P * (1 - self.beta)

    @property
    def inner_power(self) -> float:
        """Power of each inner common message."""
        return self.P * self.beta / self.G * (1 - self.alpha)

    @property
    def private_power(self) -> float:
        """Power per private stream."""
        return self.P * self.beta / self.K * self.alpha


def rs_power_split(upsilon, psi: float, tau, P: float) -> RsPowerSplit:
    """``t = min(K / (P Gamma), 1)`` with ``Gamma = min_k Upsilon_k tau_k^2 / Psi``.

    Perfect CSIT for some user gives ``Gamma = 0`` and therefore ``t = 1``.
    """
    if not P > 0:
        raise InvalidArgumentError("P must be positive")
    upsilon = np.asarray(upsilon, dtype=float)
    K = upsilon.size
    tau2 = np.broadcast_to(np.asarray(tau, dtype=float) ** 2, (K,))
    gamma = float(np.min(upsilon * tau2 / psi))
    t = 1.0 if gamma <= 0 else min(K / (P * gamma), 1.0)
    return RsPowerSplit(t, gamma, float(P), K)


def rs_split_from_asymptotics(asym: RsAsymptotics, tau) -> RsPowerSplit:
    return rs_power_split(asym.upsilon, asym.psi, tau, asym.P)


def rs_gain_bound(asym: RsAsymptotics):
    """Lower bound ``log2(1 + gamma_c) - log2(e)`` on the RS gain at high SNR.

    Returns
    -------
    bound : float
        Zero when ``t == 1`` (no common message).
    active : bool
        Whether the split is in the high-SNR (``t < 1``) branch.
    """
    if asym.t >= 1:
        return 0.0, False
    return common_rate_bound(asym.sinr_common), True


def common_rate_bound(sinr) -> float:
    return float(np.log2(1 + sinr) - LOG2E)


def classify_interference_regime(
    hrs: HrsAsymptotics,
    weak_threshold: float = WEAK_THRESHOLD,
    strong_rule: str = "aggregate",
) -> Regime:
    """Weak, strong or general inter-group interference.

    Weak: every cross term ``xi_l^2 Upsilon_gl`` is below ``weak_threshold`` times
    the intra-group interference plus noise, ``xi_g^2 Upsilon_gg Omega_g + 1``.
    Strong: the summed cross
    terms exceed ``xi_g^2 Upsilon_gg``, either for every group
    (``strong_rule="all"``) or summed over groups (``"aggregate"``).
    """
    if strong_rule not in ("all", "aggregate"):
        raise InvalidArgumentError(f"unknown strong_rule {strong_rule!r}")
    G = hrs.num_groups
    if G == 1:
        return Regime.WEAK
    X = hrs.inter_group_terms()
    intra = hrs.intra_group_terms()
    if np.all(X.max(axis=1) <= weak_threshold * (intra + 1)):
        return Regime.WEAK
    cross = X.sum(axis=1)
    own = hrs.xi2 * np.diag(hrs.upsilon)
    strong = np.all(cross > own) if strong_rule == "all" else cross.sum() > own.sum()
    return Regime.STRONG if strong else Regime.GENERAL


def interference_gammas(Rbar, group_sizes, tau):
    """High-SNR ``(Gamma_OG, Gamma_IG)`` from the effective covariances ``Rbar[g][l]``.

    Both use the zero-forcing limit of the inner precoder, which replaces
    ``T_l`` by a scaled ``Rbar_ll^{-1}``.
    """
    Kg = np.asarray(group_sizes, dtype=int)
    G = Kg.size
    K = Kg.sum()
    bg = np.array([Rbar[g][g].shape[0] for g in range(G)])
    tau2 = np.broadcast_to(np.asarray(tau, dtype=float) ** 2, (G,))
    inv_ll = []
    for l in range(G):
        R = Rbar[l][l]
        if np.linalg.cond(R) > 1e14:
            raise IllConditionedError(f"effective covariance of group {l} is singular")
        inv_ll.append(np.linalg.inv(R))
    tr_inv = np.array([np.trace(X).real for X in inv_ll])
    if G > 1:
        og = [
            sum(Kg[g] / K * np.trace(Rbar[g][l] @ inv_ll[l]).real / tr_inv[l] for l in range(G) if l != g)
            for g in range(G)
        ]
        gamma_og = float(min(og))
    else:
        gamma_og = 0.0
    gamma_ig = float(np.min(tau2 / K * bg * (Kg - 1) / tr_inv))
    return gamma_og, gamma_ig


def exact_inner_gamma(ttp: HrsAsymptotics, tau) -> float:
    """``Gamma_IG`` with the exact ``T_g`` in place of its zero-forcing limit.

    Evaluates ``min_g xi_g^2 Upsilon_gg ((K_g - 1) / K_g) tau_g^2 / P`` from
    broadcast asymptotics at full power, so that perfect CSIT still gives zero.
    """
    G = ttp.num_groups
    tau2 = np.broadcast_to(np.asarray(tau, dtype=float) ** 2, (G,))
    Kg = ttp.group_sizes
    own = ttp.xi2 * np.diag(ttp.upsilon)
    return float(np.min(own * (Kg - 1) / Kg * tau2) / ttp.P)


def hrs_power_split(
    ttp: HrsAsymptotics,
    tau,
    regime,
    mu: float = DEFAULT_MU,
    inner_gamma: str = "exact",
) -> HrsPowerSplit:
    """Closed-form ``(alpha, beta)`` for the given interference regime.

    Parameters
    ----------
    ttp : HrsAsymptotics
        Asymptotics at ``alpha = beta = 1``; supplies ``P``, group sizes and the
        effective covariances.
    inner_gamma : {"exact", "approx"}
        ``"approx"`` evaluates ``Gamma_IG`` from ``tr(Rbar_gg^{-1})`` (zero-forcing
        limit); ``"exact"`` uses :func:`exact_inner_gamma`.

    A single global ``beta`` in the strong regime uses ``max_g K_g``.
    """
    if not 0 < mu <= 1:
        raise InvalidArgumentError("mu must lie in (0, 1]")
    if inner_gamma not in ("exact", "approx"):
        raise InvalidArgumentError(f"unknown inner_gamma {inner_gamma!r}")
    P = ttp.P
    Kg = ttp.group_sizes
    K, G = int(Kg.sum()), Kg.size
    gamma_og, gamma_ig = interference_gammas(ttp.effective_cov, Kg, tau)
    if inner_gamma == "exact":
        gamma_ig = exact_inner_gamma(ttp, tau)
    regime = Regime(regime)
    Kbar = int(Kg.max())

    def _trunc(x):
        return 1.0 if not np.isfinite(x) or x <= 0 else min(x, 1.0)

    if regime is Regime.WEAK:
        beta = 1.0
        alpha = 1.0 if gamma_ig <= 0 else _trunc(Kbar / (P * gamma_ig))
    elif regime is Regime.STRONG:
        alpha = 1.0
        beta = _trunc(K / (P * gamma_og + Kbar))
    else:
        alpha = _trunc(mu * (P * gamma_og + 1) / (P * (gamma_og + (1 - mu) * gamma_ig) + 1))
        denom = P * (gamma_og + alpha * gamma_ig)
        beta = 1.0 if denom <= 0 else _trunc(K / denom)
    return HrsPowerSplit(alpha, beta, gamma_og, gamma_ig, regime, float(P), K, G, mu)


def hrs_gain_bounds(hrs: HrsAsymptotics, regime: Regime):
    """Lower bound on the HRS gain at high SNR for the weak or strong regime.

    Returns
    -------
    bound : float
        Zero when ``alpha == beta == 1`` or the regime is ``general``.
    active : bool
    """
    if hrs.alpha >= 1 and hrs.beta >= 1:
        return 0.0, False
    regime = Regime(regime)
    if regime is Regime.WEAK:
        return float(np.sum(np.log2(1 + hrs.sinr_inner) - LOG2E)), True
    if regime is Regime.STRONG:
        return common_rate_bound(np.min(hrs.sinr_outer)), True
    return 0.0, False
