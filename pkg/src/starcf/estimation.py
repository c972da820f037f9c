"""Linear MMSE channel estimation statistics and pilot-phase simulation.

Users in the same pilot group transmit the same semi-unitary pilot matrix, so
despreading at an AP yields the superposition of the group's channels plus
projected noise.  Because the pilot matrices are semi-unitary, the projected
noise is again white with the same per-entry power, which lets the simulation
generate the despread statistic directly without materializing tau_p-long
pilots.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class EstimationStatistics:
    """Per-(AP, user) MMSE estimation coefficients.

    ``mmse_gain[m, k]`` scales the despread observation into the estimate and
    ``estimate_var[m, k]`` is the per-entry variance of that estimate; it
    never exceeds the channel variance and satisfies
    estimate_var = sqrt(pilot_energy) * channel_var * mmse_gain exactly,
    where pilot_energy[k] = tau_p * p_p * xi_k.
    """

    mmse_gain: np.ndarray
    estimate_var: np.ndarray
    pilot_energy: np.ndarray
    xi: np.ndarray
    tau_p: int
    p_p: float
    sigma2: float
    pilot_groups: list
    group_index: np.ndarray

    def __post_init__(self):
        if np.any(self.estimate_var <= 0):
            raise ValueError("estimate variances must be positive")


def estimation_stats(chan, config, pilot_groups: list) -> EstimationStatistics:
    """MMSE estimation statistics from the channel statistics.

    The scaling coefficient divides the coherent pilot energy of the desired
    channel by the total despread power, where the denominator sums over the
    user's own pilot group only (other groups are orthogonal).
    """
    K = chan.channel_var.shape[1]
    xi = np.full(K, config.xi_pilot)
    pilot_energy = config.tau_p * config.p_p * xi

    group_power = np.zeros_like(chan.channel_var)
    for group in pilot_groups:
        block = chan.channel_var[:, group] * pilot_energy[group]
        group_power[:, group] = block.sum(axis=1, keepdims=True)

    mmse_gain = (np.sqrt(pilot_energy)[None, :] * chan.channel_var
                 / (group_power + config.sigma2))
    estimate_var = np.sqrt(pilot_energy)[None, :] * chan.channel_var * mmse_gain

    group_index = np.empty(K, dtype=int)
    for idx, group in enumerate(pilot_groups):
        group_index[group] = idx

    return EstimationStatistics(
        mmse_gain=mmse_gain,
        estimate_var=estimate_var,
        pilot_energy=pilot_energy,
        xi=xi,
        tau_p=config.tau_p,
        p_p=config.p_p,
        sigma2=config.sigma2,
        pilot_groups=[np.asarray(g) for g in pilot_groups],
        group_index=group_index,
    )


def simulate_pilot_estimation(realizations: np.ndarray,
                              est: EstimationStatistics,
                              rng: np.random.Generator) -> np.ndarray:
    """Simulate the pilot phase on sampled channels, returning estimates.

    ``realizations`` has shape (trials, M, K, N_ap, N_u).  For each pilot
    group one shared despread-noise draw is made per AP (users of a group use
    the same pilot matrix, hence see the same projected noise), then every
    user's estimate is the MMSE-scaled despread observation.
    """
    trials, M, K, N_ap, N_u = realizations.shape
    noise_scale = np.sqrt(est.sigma2 / 2.0)
    estimates = np.empty_like(realizations)
    for group in est.pilot_groups:
        amp = np.sqrt(est.pilot_energy[group])
        observed = np.einsum("k,tmkan->tman", amp, realizations[:, :, group])
        noise = noise_scale * (
            rng.standard_normal((trials, M, N_ap, N_u))
            + 1j * rng.standard_normal((trials, M, N_ap, N_u)))
        observed = observed + noise
        gains = est.mmse_gain[:, group]  # (M, n_group)
        estimates[:, :, group] = (
            gains[None, :, :, None, None] * observed[:, :, None])
    return estimates
