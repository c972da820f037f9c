"""Downlink spectral efficiency: closed form, SIC equivalence, Monte Carlo.

Every AP precodes with the conjugate of its channel estimate, and each user
applies a statistical linear MMSE detector.  The resulting per-stream SINR has
a closed form built from the coherent gain

    mean_gain_k = sum_m sqrt(eta_mk) * estimate_var_mk * N_ap

and the second moment of the combined received terms, which splits into four
parts: a same-pilot-group scattering term driven by tr(T^2), an incoherent
term over all users, a same-group coherent double-AP-sum term, and a
cross-mode double-AP-sum term driven by tr(T_w T_w').  All four are symmetric
across the user's streams, so per-user quantities are computed once and
replicated over the stream axis.

The closed-form path is the product of record; the Monte Carlo path exists to
validate the moments that enter it, plus a small-scale detector assembly used
as an independent sanity check.
"""

from dataclasses import dataclass

import numpy as np

from .estimation import simulate_pilot_estimation
from .star_ris import sample_channel

#: slack allowed on the per-AP downlink power constraint
POWER_SLACK = 1e-9


@dataclass
class SeReport:
    """Per-user/per-stream SE evaluation.

    ``mean_gain`` and ``second_moment`` are the coherent gain and the
    aggregate second moment per (user, stream); both are stream symmetric by
    construction.  ``sum_se``/``avg_se`` carry the data-fraction prelog.
    """

    mean_gain: np.ndarray
    second_moment: np.ndarray
    sinr: np.ndarray
    se_per_user: np.ndarray
    sum_se: float
    avg_se: float

    def __post_init__(self):
        if np.any(self.second_moment + 1e-15 < self.mean_gain ** 2):
            raise ValueError("second moment cannot undercut the squared mean")
        if np.any(self.se_per_user < 0):
            raise ValueError("spectral efficiencies must be non-negative")


def check_power_constraint(eta: np.ndarray, est, config) -> None:
    """Raise unless eta is entrywise non-negative and per-AP feasible."""
    if np.any(eta < 0):
        raise ValueError("power coefficients must be non-negative")
    per_ap = (eta * est.estimate_var).sum(axis=1) * config.N_ap * config.N_u
    if np.any(per_ap > config.p_d + POWER_SLACK):
        raise ValueError("per-AP downlink power constraint violated")


def interference_moment(est, chan, eta: np.ndarray, config) -> np.ndarray:
    """Second moment of the combined received terms, one value per user."""
    N_ap, N_u = config.N_ap, config.N_u
    z_bar = est.mmse_gain
    dvar = chan.channel_var
    c = est.pilot_energy
    beta_ap = chan.beta_ap
    beta_u = chan.beta_u
    mi = chan.mode_index
    gidx = est.group_index
    groups = est.pilot_groups
    n_groups = len(groups)

    sqrt_eta = np.sqrt(eta)
    # coherent AP sums per transmitting user
    u1 = np.einsum("mk,mk,m->k", sqrt_eta, z_bar, beta_ap)
    # incoherent AP sums per transmitting user
    g1 = np.einsum("mk,mk,m->k", eta, z_bar ** 2, beta_ap ** 2)

    # despread power of each pilot group at each AP
    S = np.zeros_like(dvar)
    for group in groups:
        S[:, group] = (c[group] * dvar[:, group]).sum(axis=1, keepdims=True)
    w = ((eta * z_bar ** 2) * (S + config.sigma2)).sum(axis=1)

    # group-level aggregates
    gsum = np.zeros(n_groups)
    u1sq = np.zeros(n_groups)
    h = np.zeros((n_groups, 2))
    for gi, group in enumerate(groups):
        gsum[gi] = g1[group].sum()
        u1sq[gi] = (u1[group] ** 2).sum()
        for mode in (0, 1):
            h[gi, mode] = (c[group] * beta_u[group]
                           * chan.cross_trace[mode, mi[group]]).sum()

    t4_by_mode = np.array([(u1 ** 2 * h[gidx, mode]).sum() for mode in (0, 1)])

    term1 = (c * N_ap * chan.mode_trace_sq[mi] * beta_u ** 2) * gsum[gidx]
    term2 = N_u * N_ap * np.einsum("m,mk->k", w, dvar)
    term3 = (c * N_ap ** 2 * beta_u ** 2 * chan.mode_trace[mi] ** 2) * u1sq[gidx]
    term4 = N_u * N_ap ** 2 * beta_u * t4_by_mode[mi]
    return term1 + term2 + term3 + term4


def closed_form_se(est, chan, allocation, config) -> SeReport:
    """Evaluate the closed-form downlink SE for a power allocation.

    ``allocation`` may be a PowerAllocation or a raw (M, K) eta array.  The
    per-AP power constraint is checked up front.
    """
    eta = getattr(allocation, "eta", allocation)
    check_power_constraint(eta, est, config)
    N_u = config.N_u

    mean_gain = (np.sqrt(eta) * est.estimate_var).sum(axis=0) * config.N_ap
    second_moment = interference_moment(est, chan, eta, config)
    sinr = mean_gain ** 2 / (second_moment - mean_gain ** 2 + config.sigma2)
    se_per_user = N_u * np.log2(1.0 + sinr)

    report = SeReport(
        mean_gain=np.repeat(mean_gain[:, None], N_u, axis=1),
        second_moment=np.repeat(second_moment[:, None], N_u, axis=1),
        sinr=np.repeat(sinr[:, None], N_u, axis=1),
        se_per_user=se_per_user,
        sum_se=0.0,
        avg_se=0.0,
    )
    report.sum_se, report.avg_se = network_se(report, config)
    return report


def mmse_sic_se(report: SeReport) -> np.ndarray:
    """Per-user SE of the successive-cancellation receiver.

    With stream-symmetric statistics the log-det expression collapses to
    N_u * log2(1 + sinr), which coincides exactly with the per-stream linear
    MMSE sum.
    """
    n_streams = report.sinr.shape[1]
    return n_streams * np.log2(1.0 + report.sinr[:, 0])


def network_se(report: SeReport, config) -> tuple:
    """Apply the data-fraction prelog and reduce to (sum, average) SE."""
    if config.tau_p >= config.tau_c:
        raise ValueError("pilot length must be shorter than the block")
    prelog = (config.tau_c - config.tau_p) / config.tau_c
    sum_se = prelog * float(report.se_per_user.sum())
    return sum_se, sum_se / len(report.se_per_user)


@dataclass
class MomentEstimates:
    """Empirical moments gathered by the Monte Carlo path."""

    gw_mean: np.ndarray        # (M, K, N_u, N_u) mean of G^H w per AP/user
    mean_gain: np.ndarray      # (K, N_u) empirical coherent gain
    second_moment: np.ndarray  # (K, N_u) empirical aggregate second moment
    signal_mat: np.ndarray     # (K, N_u, N_u) mean effective channel
    moment_mat: np.ndarray     # (K, N_u, N_u) summed second-moment matrices
    trials: int


def monte_carlo_moments(scenario, ris_state, est, allocation, config,
                        trials: int, rng: np.random.Generator,
                        batch: int = 500) -> MomentEstimates:
    """Estimate the moments behind the closed form by simulation.

    Each trial samples fresh channels, runs the pilot phase, precodes with the
    conjugate of the estimates, and accumulates the mean effective channel and
    the second-moment matrices of the combined received terms.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    eta = getattr(allocation, "eta", allocation)
    M, K, N_u = config.M, config.K, config.N_u
    sqrt_eta = np.sqrt(eta)

    gw_sum = np.zeros((M, K, N_u, N_u), dtype=complex)
    cc_sum = np.zeros((K, K, N_u, N_u), dtype=complex)
    done = 0
    while done < trials:
        n = min(batch, trials - done)
        G = sample_channel(scenario, ris_state, config, rng, trials=n)
        W = simulate_pilot_estimation(G, est, rng)
        gw_sum += np.einsum("tmkan,tmkav->mknv", G.conj(), W)
        combined = np.einsum("tmkan,mj,tmjav->tkjnv", G.conj(), sqrt_eta, W)
        cc_sum += np.einsum("tkjnv,tkjuv->kjnu", combined, combined.conj())
        done += n

    gw_mean = gw_sum / trials
    cc_mean = cc_sum / trials
    signal_mat = np.einsum("mk,mknv->knv", sqrt_eta, gw_mean)
    diag = np.arange(N_u)
    mean_gain = np.real(signal_mat[:, diag, diag])
    moment_mat = cc_mean.sum(axis=1)
    second_moment = np.real(moment_mat[:, diag, diag])
    return MomentEstimates(
        gw_mean=gw_mean,
        mean_gain=mean_gain,
        second_moment=second_moment,
        signal_mat=signal_mat,
        moment_mat=moment_mat,
        trials=trials,
    )


@dataclass
class DetectorContext:
    """Statistical linear MMSE detector for one user.

    ``signal_mat`` is the mean effective channel and ``moment_mat`` the
    summed second-moment matrix of the combined received terms; the detector
    whitens by moment_mat + sigma2*I, which must be positive definite.
    """

    signal_mat: np.ndarray
    moment_mat: np.ndarray
    sigma2: float

    def _whitener(self) -> np.ndarray:
        N_u = self.signal_mat.shape[0]
        cov = self.moment_mat + self.sigma2 * np.eye(N_u)
        cov = 0.5 * (cov + cov.conj().T)
        np.linalg.cholesky(cov)  # positive definiteness gate
        return cov

    def detectors(self) -> np.ndarray:
        """Detector columns, one per stream."""
        return np.linalg.solve(self._whitener(), self.signal_mat)

    def stream_sinr(self) -> np.ndarray:
        """Post-detection SINR of every stream."""
        cov = self._whitener()
        F = np.linalg.solve(cov, self.signal_mat)
        out = np.empty(self.signal_mat.shape[1])
        for n in range(out.size):
            f = F[:, n]
            d = self.signal_mat[:, n]
            sig = abs(np.vdot(f, d)) ** 2
            total = np.real(np.vdot(f, cov @ f))
            out[n] = sig / (total - sig)
        return out

    def se(self) -> float:
        """Linear-MMSE spectral efficiency of this user (no prelog)."""
        return float(np.log2(1.0 + self.stream_sinr()).sum())
