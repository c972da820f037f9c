"""Network scenario generation: placements, large-scale fading, pilot groups.

The RIS sits at (0.5, 0.5) km.  APs fall uniformly in [-0.5, 0.5)^2,
reflection-area users in x in [0, 0.8], y in [0, 0.5), and transmission-area
users in x in [0, 0.8], y in (0.5, 0.8].  Direct AP-user links are obstructed,
so the only large-scale coefficients are AP-to-RIS and user-to-RIS.

Large-scale fading uses the classic three-slope model (COST-Hata constant at
1.9 GHz, AP height 15 m, terminal height 1.65 m, breakpoints at 10 m and
50 m), with optional 8 dB log-normal shadowing beyond the far breakpoint.

The absolute scale of a doubly-faded surface-assisted link is not observable
from the reported experiments, so the coefficients are expressed relative to
a fixed reference gain: the model's closest-approach value plus a 6 dB
calibration margin, chosen so that the standard power and noise defaults put
the network at its transition operating point (per-stream SINRs of order
one, where both the AP-scaling and the multiplexing effects are visible).
The normalization is one global constant and leaves every
distance-dependent ratio untouched.
"""

import math
from dataclasses import dataclass, field

import numpy as np

#: RIS position in km
RIS_POSITION = (0.5, 0.5)
#: closest-approach distance (km) anchoring the reference gain
REFERENCE_DISTANCE_KM = 0.01
#: calibration margin (dB) on top of the closest-approach gain
REFERENCE_MARGIN_DB = 6.0
#: standard deviation of log-normal shadowing in dB (far region only)
SHADOW_SIGMA_DB = 8.0

_D0_KM = 0.01
_D1_KM = 0.05

# COST-Hata fixed loss at 1.9 GHz, h_ap = 15 m, h_u = 1.65 m
_F_MHZ = 1900.0
_HATA_CONST_DB = (
    46.3
    + 33.9 * math.log10(_F_MHZ)
    - 13.82 * math.log10(15.0)
    - (1.1 * math.log10(_F_MHZ) - 0.7) * 1.65
    + (1.56 * math.log10(_F_MHZ) - 0.8)
)


def path_loss(distance_km: float, shadow_sigma_db: float = 0.0,
              rng: np.random.Generator | None = None) -> float:
    """Three-slope path loss in linear scale.

    Slopes are 35 dB/decade beyond 50 m, 20 dB/decade between 10 m and 50 m,
    and constant below 10 m; the pieces join continuously.  When
    ``shadow_sigma_db`` is positive, log-normal shadowing is applied, but only
    beyond the 50 m breakpoint (the two near regions stay deterministic).
    """
    if distance_km <= 0:
        raise ValueError("distance must be strictly positive")
    if distance_km > _D1_KM:
        loss_db = -_HATA_CONST_DB - 35.0 * math.log10(distance_km)
        if shadow_sigma_db > 0.0:
            if rng is None:
                raise ValueError("shadowing requires an explicit rng")
            loss_db += shadow_sigma_db * rng.standard_normal()
    elif distance_km > _D0_KM:
        loss_db = (-_HATA_CONST_DB - 15.0 * math.log10(_D1_KM)
                   - 20.0 * math.log10(distance_km))
    else:
        loss_db = (-_HATA_CONST_DB - 15.0 * math.log10(_D1_KM)
                   - 20.0 * math.log10(_D0_KM))
    return 10.0 ** (loss_db / 10.0)


def assign_pilots(K: int, N_u: int, tau_p: int, seed: int) -> list[np.ndarray]:
    """Partition users into tau_p/N_u pilot groups of equal size.

    Users are shuffled with the given seed and dealt round-robin over the
    groups, which balances pilot contamination across the network.  Returns a
    list of sorted index arrays covering {0..K-1} exactly once.
    """
    if tau_p % N_u != 0:
        raise ValueError("tau_p must be a multiple of N_u")
    n_groups = tau_p // N_u
    if n_groups < 1 or K % n_groups != 0:
        raise ValueError(
            f"cannot split K={K} users into {n_groups} equal pilot groups")
    order = np.random.default_rng(seed).permutation(K)
    return [np.sort(order[g::n_groups]) for g in range(n_groups)]


@dataclass
class Scenario:
    """One network realization: geometry, fading coefficients, pilot groups.

    ``mode`` holds one label per user, 'r' for reflection-area users and 't'
    for transmission-area users.  ``pilot_groups`` is the pilot partition and
    ``group_index[k]`` points at the group containing user k, so the
    contaminating set of user k is ``pilot_groups[group_index[k]]``.
    """

    ap_positions: np.ndarray
    user_positions: np.ndarray
    ris_position: np.ndarray
    beta_ap: np.ndarray
    beta_u: np.ndarray
    mode: np.ndarray
    pilot_groups: list = field(default_factory=list)
    group_index: np.ndarray = None
    seed: int = 0

    def __post_init__(self):
        if np.any(self.beta_ap <= 0) or np.any(self.beta_u <= 0):
            raise ValueError("large-scale coefficients must be positive")
        refl = self.mode == "r"
        if np.any(self.user_positions[refl, 1] >= self.ris_position[1]):
            raise ValueError("reflection users must satisfy y < y_RIS")
        if np.any(self.user_positions[~refl, 1] <= self.ris_position[1]):
            raise ValueError("transmission users must satisfy y > y_RIS")
        K = len(self.beta_u)
        flat = np.sort(np.concatenate([g for g in self.pilot_groups]))
        if not np.array_equal(flat, np.arange(K)):
            raise ValueError("pilot groups must partition the user set")
        sizes = {len(g) for g in self.pilot_groups}
        if len(sizes) != 1:
            raise ValueError("pilot groups must have equal sizes")
        for idx, group in enumerate(self.pilot_groups):
            if np.any(self.group_index[group] != idx):
                raise ValueError("group_index inconsistent with pilot_groups")

    def to_dict(self) -> dict:
        """JSON-compatible representation for reproducibility archives."""
        return {
            "seed": int(self.seed),
            "ris_position": self.ris_position.tolist(),
            "ap_positions": self.ap_positions.tolist(),
            "user_positions": self.user_positions.tolist(),
            "beta_ap": self.beta_ap.tolist(),
            "beta_u": self.beta_u.tolist(),
            "mode": self.mode.tolist(),
            "pilot_groups": [g.tolist() for g in self.pilot_groups],
        }


def reference_gain() -> float:
    """Normalization constant for the large-scale coefficients."""
    return path_loss(REFERENCE_DISTANCE_KM) * 10.0 ** (REFERENCE_MARGIN_DB / 10.0)


def _normalized_fading(distances: np.ndarray, shadowing: bool,
                       rng: np.random.Generator) -> np.ndarray:
    ref = reference_gain()
    sigma = SHADOW_SIGMA_DB if shadowing else 0.0
    return np.array([path_loss(d, sigma, rng) / ref for d in distances])


def generate_scenario(config, seed: int, shadowing: bool = False) -> Scenario:
    """Draw a reproducible scenario from (config, seed).

    Placement, fading and pilot assignment are all driven by a single
    ``default_rng(seed)`` stream in a fixed order, so identical inputs yield
    bit-identical scenarios.  Shadowing defaults to off; figure sweeps enable
    it.
    """
    if (config.K * config.N_u) % config.tau_p != 0:
        raise ValueError("tau_p must divide K*N_u into integer group sizes")
    rng = np.random.default_rng(seed)
    ris = np.array(RIS_POSITION)

    ap_positions = rng.uniform(-0.5, 0.5, size=(config.M, 2))
    refl = np.column_stack([
        rng.uniform(0.0, 0.8, size=config.K_r),
        rng.uniform(0.0, 0.5, size=config.K_r),
    ])
    # y = 0.8 - U[0, 0.3) lies in (0.5, 0.8]
    trans = np.column_stack([
        rng.uniform(0.0, 0.8, size=config.K_t),
        0.8 - rng.uniform(0.0, 0.3, size=config.K_t),
    ])
    user_positions = np.vstack([refl, trans])
    mode = np.array(["r"] * config.K_r + ["t"] * config.K_t)

    d_ap = np.linalg.norm(ap_positions - ris, axis=1)
    d_u = np.linalg.norm(user_positions - ris, axis=1)
    beta_ap = _normalized_fading(d_ap, shadowing, rng)
    beta_u = _normalized_fading(d_u, shadowing, rng)

    pilot_groups = assign_pilots(config.K, config.N_u, config.tau_p, seed)
    group_index = np.empty(config.K, dtype=int)
    for idx, group in enumerate(pilot_groups):
        group_index[group] = idx

    return Scenario(
        ap_positions=ap_positions,
        user_positions=user_positions,
        ris_position=ris,
        beta_ap=beta_ap,
        beta_u=beta_u,
        mode=mode,
        pilot_groups=pilot_groups,
        group_index=group_index,
        seed=seed,
    )
