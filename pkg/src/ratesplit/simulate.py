"""Monte Carlo engine: instantaneous SINRs, power-split search and aggregation.

Every trial draws its channel from ``substream(seed, snr_index, trial_index)``,
so results do not depend on scheduling or on the number of worker processes.
All schemes evaluated at one SNR point share the same channel draws.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import channel as ch
from .errors import InvalidArgumentError, InvalidConfigurationError, RateSplitError
from .power import (
    DEFAULT_MU,
    WEAK_THRESHOLD,
    HrsPowerSplit,
    Regime,
    classify_interference_regime,
    hrs_power_split,
    rs_split_from_asymptotics,
)
from .precoding import (
    build_hrs_precoders,
    mbf_precoder,
    outer_precoder,
    rs_common_precoder,
    rzf_precoder,
)
from .rmt import hrs_asymptotics, rs_asymptotics, solve_derivative_system, solve_fixed_point

SCHEMES = (
    "BC_RZF",
    "TDMA",
    "RS_CLF",
    "RS_EXS",
    "RS_MBF",
    "TTP",
    "HRS_CLF",
    "HRS_EXS",
    "BASELINE2",
    "BASELINE3",
)
HRS_SCHEMES = {"TTP", "HRS_CLF", "HRS_EXS", "BASELINE2", "BASELINE3"}
ASYMPTOTIC_SCHEMES = {"BC_RZF", "RS_CLF", "TTP", "HRS_CLF"}
WORKERS_ENV = "RATESPLIT_WORKERS"


@dataclass(frozen=True)
class SchemeSpec:
    name: str
    grid_step: float = 0.01

    def __post_init__(self):
        if self.name not in SCHEMES:
            raise InvalidArgumentError(f"unknown scheme {self.name!r}")
        if not 0 < self.grid_step < 1:
            raise InvalidArgumentError("grid step must lie in (0, 1)")


@dataclass
class System:
    """Physical setup shared by all trials.

    For grouped systems users are stored group by group, ``groups[k]`` gives the
    group of user ``k`` and ``outer`` holds the statistical outer precoders.
    """

    models: list
    tau: np.ndarray
    groups: Optional[np.ndarray] = None
    group_models: Optional[list] = None
    outer: Optional[list] = None

    @property
    def num_antennas(self) -> int:
        return self.models[0].num_antennas

    @property
    def num_users(self) -> int:
        return len(self.models)

    @property
    def grouped(self) -> bool:
        return self.groups is not None

    @property
    def group_sizes(self) -> np.ndarray:
        return np.bincount(self.groups)

    @property
    def group_tau(self) -> np.ndarray:
        return np.array([self.tau[self.groups == g][0] for g in range(self.group_sizes.size)])


def uniform_system(M, K, spread, tau2, quadrature_points=ch.DEFAULT_QUADRATURE_POINTS) -> System:
    """UCA with users at ``theta_k = 2 pi k / K`` and a common angular spread."""
    geom = ch.uca_positions(M)
    models = [
        ch.one_ring_correlation(geom, ch.OneRingParams(th, spread), quadrature_points)
        for th in ch.user_azimuths(K)
    ]
    tau = np.full(K, np.sqrt(tau2))
    return System(models, tau)


def grouped_system(
    M,
    group_sizes,
    spread,
    tau2,
    dims,
    design_ranks,
    quadrature_points=ch.DEFAULT_QUADRATURE_POINTS,
) -> System:
    """UCA with clustered users sharing one correlation matrix per group."""
    geom = ch.uca_positions(M)
    G = len(group_sizes)
    group_models = [
        ch.one_ring_correlation(geom, ch.OneRingParams(th, spread), quadrature_points)
        for th in ch.group_azimuths(G)
    ]
    groups = np.repeat(np.arange(G), group_sizes)
    models = [group_models[g] for g in groups]
    outer = outer_precoder([m.matrix for m in group_models], design_ranks, dims, group_sizes)
    tau = np.full(groups.size, np.sqrt(tau2))
    return System(models, tau, groups, group_models, outer)


@dataclass
class TrialResult:
    sinr_private: np.ndarray
    sinr_common: float
    sinr_inner: np.ndarray
    rate_common_outer: float
    rate_common_inner: float
    rate_private: float
    split: dict
    seed: tuple

    @property
    def sum_rate(self) -> float:
        return self.rate_common_outer + self.rate_common_inner + self.rate_private


@dataclass
class ReportRow:
    snr_db: float
    scheme: str
    sum_rate_mean: float
    sum_rate_stderr: float
    rate_common_outer: float
    rate_common_inner: float
    rate_private: float
    split_t: float
    split_alpha: float
    split_beta: float
    trials: int
    seed: int


@dataclass
class RateReport:
    rows: List[ReportRow] = field(default_factory=list)

    def get(self, scheme: str, snr_db: float) -> ReportRow:
        for row in self.rows:
            if row.scheme == scheme and np.isclose(row.snr_db, snr_db):
                return row
        raise KeyError((scheme, snr_db))

    def curve(self, scheme: str, attr: str = "sum_rate_mean") -> np.ndarray:
        return np.array([getattr(r, attr) for r in self.rows if r.scheme == scheme])

    def snrs(self, scheme: str) -> np.ndarray:
        return np.array([r.snr_db for r in self.rows if r.scheme == scheme])


# ---------------------------------------------------------------------------
# Instantaneous SINRs
# ---------------------------------------------------------------------------


def rs_instant_sinrs(H, W, w_c, P_c, P_k):
    """Common and private SINRs of one-tier RS for true channels ``H`` (M x K).

    Returns
    -------
    sinr_common : (K,) array
        Per-user common SINR; the decodable common SINR is its minimum.
    sinr_private : (K,) array
    """
    K = H.shape[1]
    P_k = np.broadcast_to(np.asarray(P_k, dtype=float), (K,))
    G = np.abs(H.conj().T @ W) ** 2
    own = np.diag(G) * P_k
    other = G @ P_k - own
    sinr_c = P_c * np.abs(H.conj().T @ w_c) ** 2 / (own + other + 1)
    sinr_p = own / (other + 1)
    return sinr_c, sinr_p


def hrs_instant_sinrs(H, precoders, P_oc, P_ic, P_p):
    """Outer-common, inner-common and private SINRs of HRS.

    Users must be ordered group by group. ``P_ic`` has one entry per group and
    ``P_p`` one per user.

    Returns
    -------
    sinr_oc, sinr_ic, sinr_p : (K,) arrays
    """
    sizes = precoders.group_sizes
    groups = np.repeat(np.arange(sizes.size), sizes)
    K = H.shape[1]
    P_ic = np.broadcast_to(np.asarray(P_ic, dtype=float), (sizes.size,))
    P_p = np.broadcast_to(np.asarray(P_p, dtype=float), (K,))
    Hh = H.conj().T
    S_oc = np.abs(Hh @ precoders.w_oc) ** 2
    S_ic = np.abs(Hh @ precoders.inner_common_beams()) ** 2 * P_ic[None, :]
    S_p = np.abs(Hh @ precoders.private_beams()) ** 2 * P_p[None, :]
    idx = np.arange(K)
    ic_own = S_ic[idx, groups]
    p_own = S_p[idx, idx]
    ic_other = S_ic.sum(axis=1) - ic_own
    p_other = S_p.sum(axis=1) - p_own
    IN = ic_other + ic_own + p_other + p_own + 1
    den_ic = ic_other + p_other + p_own + 1
    den_p = ic_other + p_other + 1
    assert np.all(den_ic > 0) and np.all(den_p > 0)
    return P_oc * S_oc / IN, ic_own / den_ic, p_own / den_p


# ---------------------------------------------------------------------------
# Per-trial gain extraction and vectorised rate evaluation
# ---------------------------------------------------------------------------


def _rs_gains(H, W, w_c):
    G = np.abs(H.conj().T @ W) ** 2
    own = np.diag(G).copy()
    return {
        "common": np.abs(H.conj().T @ w_c) ** 2,
        "own": own,
        "other": G.sum(axis=1) - own,
    }


def _hrs_gains(H, prec, groups):
    Hh = H.conj().T
    K = H.shape[1]
    idx = np.arange(K)
    S_ic = np.abs(Hh @ prec.inner_common_beams()) ** 2
    S_p = np.abs(Hh @ prec.private_beams()) ** 2
    ic_own = S_ic[idx, groups]
    p_own = S_p[idx, idx]
    return {
        "outer": np.abs(Hh @ prec.w_oc) ** 2,
        "ic_own": ic_own,
        "ic_other": S_ic.sum(axis=1) - ic_own,
        "p_own": p_own,
        "p_other": S_p.sum(axis=1) - p_own,
    }


def rs_rates(gains, P, t):
    """Common and private sum rates per trial from stacked RS gains."""
    pk = P * t / gains["own"].shape[-1]
    sinr_c = P * (1 - t) * gains["common"] / (pk * (gains["own"] + gains["other"]) + 1)
    sinr_p = pk * gains["own"] / (pk * gains["other"] + 1)
    return np.log2(1 + sinr_c.min(axis=-1)), np.log2(1 + sinr_p).sum(axis=-1)


def hrs_rates(gains, P, alpha, beta, groups):
    """Outer, inner and private sum rates per trial from stacked HRS gains.

    ``alpha`` and ``beta`` may be arrays that broadcast against the leading
    trial axis, e.g. shape ``(A, 1)`` for a grid of ``A`` splits.
    """
    K = groups.size
    G = int(groups.max()) + 1
    alpha = np.asarray(alpha, dtype=float)[..., None]
    beta = np.asarray(beta, dtype=float)[..., None]
    p_oc = P * (1 - beta)
    p_ic = P * beta * (1 - alpha) / G
    p_p = P * beta * alpha / K
    ic_own = p_ic * gains["ic_own"]
    ic_other = p_ic * gains["ic_other"]
    p_own = p_p * gains["p_own"]
    p_other = p_p * gains["p_other"]
    base = ic_other + p_other + 1
    sinr_oc = p_oc * gains["outer"] / (base + ic_own + p_own)
    sinr_ic = ic_own / (base + p_own)
    sinr_p = p_own / base
    r_oc = np.log2(1 + sinr_oc.min(axis=-1))
    r_ic = sum(np.log2(1 + sinr_ic[..., groups == g].min(axis=-1)) for g in range(G))
    r_p = np.log2(1 + sinr_p).sum(axis=-1)
    return r_oc, r_ic, r_p


def _split_grid(step):
    n = int(round(1 / step))
    return np.round(np.arange(1, n + 1) * step, 12)


def _argmax_last(values):
    # ties resolve to the largest index, i.e. the largest private fraction
    values = np.asarray(values)
    return values.size - 1 - int(np.argmax(values[::-1]))


def exhaustive_split_search(gains, P, step=0.01, groups=None):
    """Grid search for the split maximising the mean sum rate over trials.

    For RS gains returns ``{"t": ...}``; when ``groups`` is given the gains are
    HRS gains and ``{"alpha": ..., "beta": ...}`` is returned. Ties favour the
    larger private fraction (larger ``t``, then larger ``beta`` and ``alpha``).
    """
    if not 0 < step < 1:
        raise InvalidArgumentError("step must lie in (0, 1)")
    grid = _split_grid(step)
    if groups is None:
        means = np.empty(grid.size)
        for i, t in enumerate(grid):
            c, p = rs_rates(gains, P, t)
            means[i] = np.mean(c + p)
        return {"t": float(grid[_argmax_last(means)])}
    means = np.empty((grid.size, grid.size))  # [beta, alpha]
    alphas = grid[:, None]
    for i, beta in enumerate(grid):
        oc, ic, p = hrs_rates(gains, P, alphas, beta, groups)
        means[i] = np.mean(oc + ic + p, axis=-1)
    flat = _argmax_last(means.ravel())
    bi, ai = divmod(flat, grid.size)
    return {"alpha": float(grid[ai]), "beta": float(grid[bi])}


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


def tdma_rate(H, H_hat, P):
    """Round-robin single-user MBF with full power, averaged over users."""
    W = mbf_precoder(H_hat)
    gains = np.abs(np.sum(H.conj() * W, axis=0)) ** 2
    return float(np.mean(np.log2(1 + P * gains)))


def _scheduled_beams(H_hat, groups, outer):
    G = len(outer)
    chosen, beams, gains = [], [], []
    for g in range(G):
        users = np.flatnonzero(groups == g)
        eff = outer[g].conj().T @ H_hat[:, users]
        norms = np.linalg.norm(eff, axis=0)
        j = int(np.argmax(norms))
        chosen.append(users[j])
        beams.append(outer[g] @ (eff[:, j] / norms[j]))
        gains.append(norms[j] ** 2)
    return np.array(chosen), np.column_stack(beams), np.array(gains)


def baseline_rates(H, H_hat, groups, outer, P):
    """Group-level (baseline 2) and system-level (baseline 3) scheduled rates.

    Scheduling uses the estimated effective gain ``||B_g^H h_hat||^2``; the
    scheduled users get MBF through their group's outer precoder.
    """
    chosen, V, est = _scheduled_beams(H_hat, groups, outer)
    G = V.shape[1]
    S = np.abs(H[:, chosen].conj().T @ V) ** 2
    own = np.diag(S)
    sinr = (P / G) * own / ((P / G) * (S.sum(axis=1) - own) + 1)
    b2 = float(np.sum(np.log2(1 + sinr)))
    best = int(np.argmax(est))
    b3 = float(np.log2(1 + P * own[best]))
    return b2, b3


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------


def _families(schemes):
    fam = set()
    for s in schemes:
        if s in ("BC_RZF", "RS_CLF", "RS_EXS"):
            fam.add("rs")
        elif s == "RS_MBF":
            fam.add("mbf")
        elif s in ("TTP", "HRS_CLF", "HRS_EXS"):
            fam.add("hrs")
        elif s == "TDMA":
            fam.add("tdma")
        elif s in ("BASELINE2", "BASELINE3"):
            fam.add("baseline")
    return fam


def rs_eps(system: System, P: float) -> float:
    return system.num_users / (system.num_antennas * P)


def hrs_eps(system: System, P: float) -> float:
    b = sum(B.shape[1] for B in system.outer)
    return system.num_users / (b * P)


def trial_gains(system: System, families, P, seed, snr_index, trial_index):
    """Draw one channel and extract every gain needed by the requested families."""
    rng = ch.substream(seed, snr_index, trial_index)
    sample = ch.draw_sample(system.models, system.tau, rng, system.groups)
    H, H_hat = sample.H, sample.H_hat
    out = {}
    if "rs" in families:
        W, _ = rzf_precoder(H_hat, rs_eps(system, P))
        out["rs"] = _rs_gains(H, W, rs_common_precoder(H_hat))
    if "mbf" in families:
        out["mbf"] = _rs_gains(H, mbf_precoder(H_hat), rs_common_precoder(H_hat))
    if "hrs" in families:
        prec = build_hrs_precoders(H_hat, system.groups, system.outer, hrs_eps(system, P))
        out["hrs"] = _hrs_gains(H, prec, system.groups)
    if "tdma" in families:
        out["tdma"] = tdma_rate(H, H_hat, P)
    if "baseline" in families:
        out["baseline"] = baseline_rates(H, H_hat, system.groups, system.outer, P)
    return out


def _trial_chunk(args):
    system, families, P, seed, snr_index, trials = args
    return [trial_gains(system, families, P, seed, snr_index, i) for i in trials]


def _stack(results, family):
    return {key: np.stack([r[family][key] for r in results]) for key in results[0][family]}


def worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InvalidArgumentError(f"{WORKERS_ENV} must be an integer, got {raw!r}")


def collect_trials(system, families, P, seed, snr_index, num_trials, workers=1):
    """Per-trial gains in trial order, computed serially or by a process pool."""
    trials = list(range(num_trials))
    if workers <= 1 or num_trials < 2:
        return _trial_chunk((system, families, P, seed, snr_index, trials))
    chunks = [trials[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_trial_chunk, [(system, families, P, seed, snr_index, c) for c in chunks]))
    results = [None] * num_trials
    for chunk, part in zip(chunks, parts):
        for i, r in zip(chunk, part):
            results[i] = r
    return results


@dataclass
class AnalyticPoint:
    """Asymptotic quantities and closed-form splits at one SNR."""

    rs: Optional[object] = None
    rs_split: Optional[object] = None
    hrs: Optional[object] = None
    hrs_ttp: Optional[object] = None
    hrs_split: Optional[HrsPowerSplit] = None
    regime: Optional[Regime] = None


def rs_analysis(system: System, P: float):
    """RS asymptotics at the closed-form split. Returns ``(asymptotics, split)``."""
    Rs = [m.matrix for m in system.models]
    fp = solve_fixed_point(Rs, rs_eps(system, P))
    deriv = solve_derivative_system(fp, Rs)
    full = rs_asymptotics(fp, deriv, system.tau, P, 1.0)
    split = rs_split_from_asymptotics(full, system.tau)
    return rs_asymptotics(fp, deriv, system.tau, P, split.t), split


@dataclass(frozen=True)
class SplitOptions:
    """Knobs of the closed-form HRS split and its asymptotic evaluation."""

    mu: float = DEFAULT_MU
    inner_gamma: str = "exact"
    strong_rule: str = "aggregate"
    weak_threshold: float = WEAK_THRESHOLD
    literal_group_indices: bool = True


def hrs_analysis(system: System, P: float, options: SplitOptions = SplitOptions(), regime=None):
    """HRS asymptotics at the closed-form split.

    Returns ``(asymptotics, ttp_asymptotics, split)``; the regime is classified
    from the two-tier broadcast asymptotics unless given.
    """
    covs = [m.matrix for m in system.group_models]
    sizes, tau = system.group_sizes, system.group_tau
    lit = options.literal_group_indices
    ttp = hrs_asymptotics(covs, system.outer, sizes, tau, P, literal_group_indices=lit)
    if regime is None:
        regime = classify_interference_regime(ttp, options.weak_threshold, options.strong_rule)
    split = hrs_power_split(ttp, tau, regime, options.mu, options.inner_gamma)
    asym = hrs_asymptotics(
        covs, system.outer, sizes, tau, P, split.alpha, split.beta, literal_group_indices=lit
    )
    return asym, ttp, split


def _mean(values) -> float:
    values = np.asarray(values, dtype=float)
    return math.fsum(values.tolist()) / values.size


def _stderr(values) -> float:
    values = np.asarray(values, dtype=float)
    n = values.size
    if n < 2:
        return 0.0
    avg = _mean(values)
    var = math.fsum(((values - avg) ** 2).tolist()) / (n - 1)
    return math.sqrt(var / n)


def _row(snr_db, scheme, oc, ic, p, t=np.nan, alpha=np.nan, beta=np.nan, seed=0):
    oc, ic, p = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (oc, ic, p))
    total = oc + ic + p
    return ReportRow(
        float(snr_db), scheme, _mean(total), _stderr(total),
        _mean(oc), _mean(ic), _mean(p),
        float(t), float(alpha), float(beta), int(total.size), int(seed),
    )


def _as_row(snr_db, scheme, oc, ic, p, t=np.nan, alpha=np.nan, beta=np.nan, seed=0):
    return ReportRow(
        float(snr_db), scheme + "_AS", oc + ic + p, 0.0, oc, ic, p,
        float(t), float(alpha), float(beta), 0, int(seed),
    )


def run_trials(
    system: System,
    schemes: Sequence,
    snr_grid_db: Sequence[float],
    num_trials: int,
    master_seed: int,
    asymptotic: bool = True,
    workers: Optional[int] = None,
    options: SplitOptions = SplitOptions(),
) -> RateReport:
    """Monte Carlo rates (and optionally asymptotic curves) on an SNR grid.

    Parameters
    ----------
    schemes : sequence of str or SchemeSpec
    asymptotic : bool
        Also emit ``<scheme>_AS`` rows for schemes that have an asymptote.
    workers : int, optional
        Process count; defaults to the ``RATESPLIT_WORKERS`` environment value.
    options : SplitOptions
        Settings of the closed-form HRS split.
    """
    if num_trials < 1:
        raise InvalidArgumentError("num_trials must be >= 1")
    specs = [s if isinstance(s, SchemeSpec) else SchemeSpec(s) for s in schemes]
    if not specs:
        raise InvalidArgumentError("no schemes requested")
    names = [s.name for s in specs]
    if not system.grouped and HRS_SCHEMES.intersection(names):
        raise InvalidConfigurationError("two-tier schemes need a grouped system")
    workers = worker_count() if workers is None else workers
    families = _families(names)
    report = RateReport()
    rs_names = {"BC_RZF", "RS_CLF", "RS_EXS"}
    hrs_names = {"TTP", "HRS_CLF", "HRS_EXS"}
    for si, snr_db in enumerate(snr_grid_db):
        P = 10 ** (snr_db / 10)
        point = AnalyticPoint()
        if rs_names.intersection(names):
            point.rs, point.rs_split = rs_analysis(system, P)
        if hrs_names.intersection(names):
            point.hrs, point.hrs_ttp, point.hrs_split = hrs_analysis(system, P, options)
            point.regime = point.hrs_split.regime
        try:
            results = collect_trials(system, families, P, master_seed, si, num_trials, workers)
        except RateSplitError as exc:
            raise type(exc)(f"at SNR {snr_db} dB: {exc}") from exc
        for spec in specs:
            report.rows.extend(
                _scheme_rows(spec, system, point, results, P, snr_db, master_seed, asymptotic)
            )
    return report


def _scheme_rows(spec, system, point, results, P, snr_db, seed, asymptotic):
    name = spec.name
    zeros = np.zeros(len(results))
    rows = []
    if name in ("BC_RZF", "RS_CLF", "RS_EXS", "RS_MBF"):
        gains = _stack(results, "mbf" if name == "RS_MBF" else "rs")
        if name == "BC_RZF":
            t = 1.0
        elif name == "RS_CLF":
            t = point.rs_split.t
        else:
            t = exhaustive_split_search(gains, P, spec.grid_step)["t"]
        c, p = rs_rates(gains, P, t)
        rows.append(_row(snr_db, name, c, zeros, p, t=t, seed=seed))
        if asymptotic and name == "RS_CLF":
            a = point.rs
            rows.append(_as_row(snr_db, name, a.rate_common, 0.0, a.rate_private, t=a.t, seed=seed))
        if asymptotic and name == "BC_RZF":
            rows.append(_as_row(snr_db, name, 0.0, 0.0, point.rs.rate_rzf_sum, t=1.0, seed=seed))
    elif name in ("TTP", "HRS_CLF", "HRS_EXS"):
        gains = _stack(results, "hrs")
        if name == "TTP":
            alpha = beta = 1.0
        elif name == "HRS_CLF":
            alpha, beta = point.hrs_split.alpha, point.hrs_split.beta
        else:
            found = exhaustive_split_search(gains, P, spec.grid_step, system.groups)
            alpha, beta = found["alpha"], found["beta"]
        oc, ic, p = hrs_rates(gains, P, alpha, beta, system.groups)
        rows.append(_row(snr_db, name, oc, ic, p, alpha=alpha, beta=beta, seed=seed))
        if asymptotic and name == "HRS_CLF":
            a = point.hrs
            rows.append(_as_row(snr_db, name, a.rate_outer, a.rate_inner, a.rate_private,
                                alpha=a.alpha, beta=a.beta, seed=seed))
        if asymptotic and name == "TTP":
            rows.append(_as_row(snr_db, name, 0.0, 0.0, point.hrs_ttp.rate_ttp_sum,
                                alpha=1.0, beta=1.0, seed=seed))
    elif name == "TDMA":
        rates = np.array([r["tdma"] for r in results])
        rows.append(_row(snr_db, name, zeros, zeros, rates, seed=seed))
    else:
        col = 0 if name == "BASELINE2" else 1
        rates = np.array([r["baseline"][col] for r in results])
        rows.append(_row(snr_db, name, zeros, zeros, rates, seed=seed))
    return rows


def evaluate_trial(system, scheme, P, split, seed, snr_index, trial_index) -> TrialResult:
    """Single-trial SINRs and rates for one scheme at a given split.

    ``split`` holds ``t`` for one-tier schemes or ``alpha``/``beta`` for
    two-tier ones.
    """
    rng = ch.substream(seed, snr_index, trial_index)
    s = ch.draw_sample(system.models, system.tau, rng, system.groups)
    key = (seed, snr_index, trial_index)
    K = system.num_users
    if scheme in ("BC_RZF", "RS_CLF", "RS_EXS", "RS_MBF"):
        t = 1.0 if scheme == "BC_RZF" else split["t"]
        if scheme == "RS_MBF":
            W = mbf_precoder(s.H_hat)
        else:
            W, _ = rzf_precoder(s.H_hat, rs_eps(system, P))
        w_c = rs_common_precoder(s.H_hat)
        gc, gp = rs_instant_sinrs(s.H, W, w_c, P * (1 - t), P * t / K)
        rc = float(np.log2(1 + gc.min()))
        return TrialResult(gp, float(gc.min()), np.zeros(0), rc, 0.0,
                           float(np.log2(1 + gp).sum()), {"t": t}, key)
    if scheme in ("TTP", "HRS_CLF", "HRS_EXS"):
        alpha, beta = (1.0, 1.0) if scheme == "TTP" else (split["alpha"], split["beta"])
        prec = build_hrs_precoders(s.H_hat, system.groups, system.outer, hrs_eps(system, P))
        G = len(system.outer)
        g_oc, g_ic, g_p = hrs_instant_sinrs(
            s.H, prec, P * (1 - beta), P * beta * (1 - alpha) / G, P * beta * alpha / K
        )
        inner = np.array([g_ic[system.groups == g].min() for g in range(G)])
        return TrialResult(
            g_p, float(g_oc.min()), inner,
            float(np.log2(1 + g_oc.min())), float(np.log2(1 + inner).sum()),
            float(np.log2(1 + g_p).sum()), {"alpha": alpha, "beta": beta}, key,
        )
    raise InvalidArgumentError(f"evaluate_trial does not support {scheme!r}")
