"""System configuration for the STAR-RIS assisted cell-free downlink simulator.

All powers are handled in mW internally; dBm values are converted at the
configuration boundary.  The carrier wavelength follows the 1.9 GHz path-loss
model, which also fixes the default RIS element spacing at a quarter
wavelength.
"""

import math
from dataclasses import dataclass, asdict

SPEED_OF_LIGHT = 299792458.0
CARRIER_FREQ_HZ = 1.9e9
#: carrier wavelength in meters (~0.1578 m at 1.9 GHz)
WAVELENGTH = SPEED_OF_LIGHT / CARRIER_FREQ_HZ


def dbm_to_mw(value_dbm: float) -> float:
    """Convert a power from dBm to milliwatts."""
    return 10.0 ** (value_dbm / 10.0)


def mw_to_dbm(value_mw: float) -> float:
    """Convert a power from milliwatts to dBm."""
    if value_mw <= 0:
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * math.log10(value_mw)


@dataclass
class SystemConfig:
    """Scalar system parameters of one network instance.

    Counts
    ------
    M, N_ap      : number of APs and antennas per AP.
    K, K_r, K_t  : users in total / reflection region / transmission region.
    N_u          : antennas per user.
    L, L_h, L_v  : RIS elements in total / per row / per column (L = L_h*L_v).

    Geometry
    --------
    d_h, d_v     : RIS element width/height in meters.
    wavelength   : carrier wavelength in meters.

    Powers (mW) and frame structure
    -------------------------------
    tau_c, tau_p : coherence block and pilot length in symbols; tau_p must be
                   a multiple of N_u so pilot matrices are tau_p x N_u
                   semi-unitary.
    p_p, p_d     : maximum pilot power per user and downlink power per AP.
    sigma2       : noise power.
    xi_pilot     : per-antenna pilot power-control coefficient (N_u*xi <= 1).

    Optimizer
    ---------
    penalty      : ADMM penalty parameter.
    eps_fp       : outer stop on the squared successive objective difference.
    eps_admm     : inner stop on the relative primal residual.
    """

    M: int = 20
    N_ap: int = 4
    K: int = 10
    K_r: int = 5
    K_t: int = 5
    N_u: int = 4
    L: int = 16
    L_h: int = 4
    L_v: int = 4
    d_h: float = WAVELENGTH / 4.0
    d_v: float = WAVELENGTH / 4.0
    wavelength: float = WAVELENGTH
    tau_c: int = 200
    tau_p: int = 20
    p_p: float = dbm_to_mw(20.0)
    p_d: float = dbm_to_mw(23.0)
    sigma2: float = dbm_to_mw(-96.0)
    xi_pilot: float = 0.25
    penalty: float = 0.1
    eps_fp: float = 0.01
    eps_admm: float = 0.01
    max_fp_iters: int = 100
    max_admm_iters: int = 500

    def __post_init__(self):
        counts = {
            "M": self.M, "N_ap": self.N_ap, "K": self.K, "N_u": self.N_u,
            "L": self.L, "L_h": self.L_h, "L_v": self.L_v,
            "tau_c": self.tau_c, "tau_p": self.tau_p,
            "max_fp_iters": self.max_fp_iters,
            "max_admm_iters": self.max_admm_iters,
        }
        for name, value in counts.items():
            if value < 1:
                raise ValueError(f"{name} must be >= 1, got {value}")
        if self.K_r < 0 or self.K_t < 0 or self.K_r + self.K_t != self.K:
            raise ValueError("K_r + K_t must equal K")
        if self.L != self.L_h * self.L_v:
            raise ValueError("L must equal L_h * L_v")
        if self.N_u * self.xi_pilot > 1.0 + 1e-12:
            raise ValueError("pilot power control requires N_u * xi_pilot <= 1")
        if self.xi_pilot <= 0:
            raise ValueError("xi_pilot must be positive")
        if self.tau_p > self.tau_c:
            raise ValueError("tau_p must not exceed tau_c")
        if self.tau_p % self.N_u != 0:
            raise ValueError("tau_p must be a multiple of N_u")
        for name in ("p_p", "p_d", "sigma2", "penalty", "eps_fp", "eps_admm",
                     "d_h", "d_v", "wavelength"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def element_area(self) -> float:
        """RIS element area d_h * d_v in m^2."""
        return self.d_h * self.d_v

    @property
    def prelog(self) -> float:
        """Fraction of the coherence block carrying downlink data."""
        return (self.tau_c - self.tau_p) / self.tau_c

    def to_dict(self) -> dict:
        return asdict(self)


def default_config(M: int = 20, N_ap: int = 4, K: int = 10, N_u: int = 4,
                   L: int = 16, K_r: int | None = None,
                   tau_p: int | None = None, **overrides) -> SystemConfig:
    """Build a config with the standard experiment defaults.

    Derived quantities follow the usual conventions: K_r = K_t = K/2,
    tau_p = K*N_u/2, xi_pilot = 1/N_u, square RIS grid with quarter-wavelength
    element spacing.  Any field can still be overridden explicitly.
    """
    if K_r is None:
        if K % 2 != 0:
            raise ValueError("default split K_r = K_t requires even K")
        K_r = K // 2
    L_h = math.isqrt(L)
    if L_h * L_h != L:
        raise ValueError(f"default grid requires a square L, got {L}")
    if tau_p is None:
        if (K * N_u) % 2 != 0:
            raise ValueError("default tau_p = K*N_u/2 requires even K*N_u")
        tau_p = K * N_u // 2
    fields = dict(
        M=M, N_ap=N_ap, K=K, K_r=K_r, K_t=K - K_r, N_u=N_u,
        L=L, L_h=L_h, L_v=L_h, tau_p=tau_p, xi_pilot=1.0 / N_u,
    )
    fields.update(overrides)
    return SystemConfig(**fields)
