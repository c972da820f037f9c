"""STAR-RIS surface model: spatial correlation, coefficient matrices, and
second-order channel statistics.

The surface operates under the energy-splitting protocol: every element
serves both sides simultaneously and its reflection/transmission amplitudes
satisfy u_r^2 + u_t^2 = 1.  A conventional-RIS baseline is also supported,
where two co-located half-size surfaces work reflect-only and transmit-only;
in that case the two modes ride on independent apertures and their channels
decorrelate completely.

The aggregated AP-user channel through the surface has per-entry variance
``beta_ap * beta_u * tr(T)`` with the mode coupling matrix
``T = area^2 * R^(1/2) Theta R Theta^H R^(1/2)``, and all closed-form
interference terms reduce to the traces tr(T), tr(T^2) and tr(T_r T_t)
cached here.
"""

from dataclasses import dataclass

import numpy as np

#: mode labels in table order: index 0 = reflection, 1 = transmission
MODES = ("r", "t")


def build_correlation(L_h: int, L_v: int, d_h: float, d_v: float,
                      wavelength: float) -> np.ndarray:
    """Sinc spatial correlation matrix of an L_h x L_v element grid.

    Entry (x, y) equals sinc(2*dist(x, y)/wavelength) with elements laid out
    row-major on a rectangular grid of pitch (d_h, d_v).  The result is
    symmetric with unit diagonal; at spacings below half a wavelength it is
    numerically rank deficient.
    """
    if L_h < 1 or L_v < 1:
        raise ValueError("grid dimensions must be >= 1")
    if d_h <= 0 or d_v <= 0 or wavelength <= 0:
        raise ValueError("spacings and wavelength must be positive")
    L = L_h * L_v
    idx = np.arange(L)
    pos = np.column_stack([
        np.zeros(L),
        (idx % L_h) * d_h,
        (idx // L_h) * d_v,
    ])
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    # np.sinc is the normalized sinc: sin(pi a)/(pi a)
    return np.sinc(2.0 * dist / wavelength)


def correlation_sqrt(R: np.ndarray, floor: float = 0.0) -> np.ndarray:
    """Symmetric PSD square root with negative eigenvalues clipped at floor."""
    eigval, eigvec = np.linalg.eigh(R)
    eigval = np.clip(eigval, floor, None)
    return (eigvec * np.sqrt(eigval)) @ eigvec.T


def build_theta(amp: np.ndarray, phase: np.ndarray) -> np.ndarray:
    """Diagonal of a surface coefficient matrix, u_l * exp(i phi_l)."""
    amp = np.asarray(amp, dtype=float)
    phase = np.asarray(phase, dtype=float)
    if amp.shape != phase.shape:
        raise ValueError("amplitude and phase vectors must share a shape")
    if np.any(amp < 0) or np.any(amp > 1):
        raise ValueError("amplitudes must lie in [0, 1]")
    return amp * np.exp(1j * phase)


def coupling_matrix(R: np.ndarray, R_half: np.ndarray, theta: np.ndarray,
                    area: float) -> np.ndarray:
    """Mode coupling matrix area^2 * R^(1/2) Theta R Theta^H R^(1/2).

    Hermitian positive semidefinite by construction; its trace sets the
    per-entry channel variance and its square's trace drives the coherent
    interference terms.
    """
    inner = theta[:, None] * R * np.conj(theta)[None, :]
    T = (area ** 2) * (R_half @ inner @ R_half)
    return 0.5 * (T + T.conj().T)


def _trace_product(T1: np.ndarray, T2: np.ndarray) -> float:
    # tr(T1 T2) for Hermitian T1, T2 without forming the product
    return float(np.real(np.sum(T1 * T2.T)))


@dataclass
class StarRisState:
    """Immutable surface state: coefficients, coupling matrices and traces.

    ``kind`` is "star" for a single energy-splitting surface of L elements or
    "cris" for two co-located conventional surfaces of L/2 elements each.
    ``R``/``R_half`` describe one aperture (both cRIS surfaces share the same
    geometry).  Per-mode quantities are indexed by MODES order and
    ``cross_trace[i, j] = tr(T_i T_j)``; for the conventional baseline the
    off-diagonal entries are zero because the apertures are independent.
    """

    kind: str
    element_area: float
    R: np.ndarray
    R_half: np.ndarray
    amp: dict
    phase: dict
    theta: dict
    T: dict
    mode_trace: np.ndarray
    mode_trace_sq: np.ndarray
    cross_trace: np.ndarray
    shared_aperture: bool

    def __post_init__(self):
        if self.kind == "star":
            split = self.amp["r"] ** 2 + self.amp["t"] ** 2
            if np.max(np.abs(split - 1.0)) >= 1e-12:
                raise ValueError("energy splitting requires u_r^2 + u_t^2 = 1")
        for m in MODES:
            T = self.T[m]
            if np.max(np.abs(T - T.conj().T)) > 1e-12 * max(1.0, np.abs(T).max()):
                raise ValueError("coupling matrices must be Hermitian")
        if np.any(self.mode_trace < 0) or np.any(self.mode_trace_sq < 0):
            raise ValueError("coupling traces must be non-negative")


def build_ris_state(config, seed: int, kind: str = "star",
                    amp_split: float | None = None) -> StarRisState:
    """Construct the surface for a scenario seed.

    Phases are drawn uniformly on [0, 2*pi) once per seed (the surface is not
    optimized).  For "star", both modes share the full aperture with
    amplitudes 1/sqrt(2) each by default (``amp_split`` overrides the
    reflection amplitude).  For "cris", the element budget is halved into a
    reflect-only and a transmit-only surface with unit amplitudes.
    """
    rng = np.random.default_rng(seed)
    area = config.element_area

    if kind == "star":
        L_h, L_v = config.L_h, config.L_v
        if amp_split is None:
            amp_r = np.full(config.L, 1.0 / np.sqrt(2.0))
        else:
            amp_r = np.full(config.L, float(amp_split))
        amp = {"r": amp_r, "t": np.sqrt(1.0 - amp_r ** 2)}
        shared = True
    elif kind == "cris":
        if config.L_v % 2 != 0:
            raise ValueError("conventional baseline needs an even L_v")
        L_h, L_v = config.L_h, config.L_v // 2
        ones = np.ones(L_h * L_v)
        amp = {"r": ones, "t": ones.copy()}
        shared = False
    else:
        raise ValueError(f"unknown surface kind {kind!r}")

    L_e = L_h * L_v
    R = build_correlation(L_h, L_v, config.d_h, config.d_v, config.wavelength)
    R_half = correlation_sqrt(R)

    phase = {m: rng.uniform(0.0, 2.0 * np.pi, size=L_e) for m in MODES}
    theta = {m: build_theta(amp[m], phase[m]) for m in MODES}
    T = {m: coupling_matrix(R, R_half, theta[m], area) for m in MODES}

    mode_trace = np.array([float(np.real(np.trace(T[m]))) for m in MODES])
    mode_trace_sq = np.array([_trace_product(T[m], T[m]) for m in MODES])
    cross = np.diag(mode_trace_sq).astype(float)
    if shared:
        rt = _trace_product(T["r"], T["t"])
        cross[0, 1] = cross[1, 0] = rt
    return StarRisState(
        kind=kind, element_area=area, R=R, R_half=R_half,
        amp=amp, phase=phase, theta=theta, T=T,
        mode_trace=mode_trace, mode_trace_sq=mode_trace_sq,
        cross_trace=cross, shared_aperture=shared,
    )


@dataclass
class ChannelStatistics:
    """Second-order statistics of the aggregated channels.

    ``channel_var[m, k]`` is the per-entry variance of the N_ap x N_u channel
    between AP m and user k (the full covariance is channel_var * identity
    and is never materialized).  ``mode_index[k]`` is 0/1 for
    reflection/transmission users and indexes the cached trace tables.
    """

    channel_var: np.ndarray
    beta_ap: np.ndarray
    beta_u: np.ndarray
    mode_index: np.ndarray
    mode_trace: np.ndarray
    mode_trace_sq: np.ndarray
    cross_trace: np.ndarray

    def __post_init__(self):
        if np.any(self.channel_var <= 0):
            raise ValueError("channel variances must be strictly positive")

    def user_cross_trace(self, k: int, j: int) -> float:
        """tr(T_mode(k) T_mode(j)) for a user pair."""
        return float(self.cross_trace[self.mode_index[k], self.mode_index[j]])


def channel_covariance(scenario, ris_state: StarRisState) -> ChannelStatistics:
    """Aggregate per-(AP, user) channel variances from the surface traces."""
    mode_index = (scenario.mode == "t").astype(int)
    trace_per_user = ris_state.mode_trace[mode_index]
    channel_var = np.outer(scenario.beta_ap, scenario.beta_u * trace_per_user)
    return ChannelStatistics(
        channel_var=channel_var,
        beta_ap=scenario.beta_ap.copy(),
        beta_u=scenario.beta_u.copy(),
        mode_index=mode_index,
        mode_trace=ris_state.mode_trace.copy(),
        mode_trace_sq=ris_state.mode_trace_sq.copy(),
        cross_trace=ris_state.cross_trace.copy(),
    )


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) \
        / np.sqrt(2.0)


def sample_channel(scenario, ris_state: StarRisState, config,
                   rng: np.random.Generator, trials: int = 1) -> np.ndarray:
    """Sample aggregated channel realizations, shape (trials, M, K, N_ap, N_u).

    The AP-side fast fading is drawn once per AP and shared by every user on
    the same aperture, and the user-side fading once per user and shared by
    every AP; these shared draws carry the cross-user correlation that the
    closed-form interference terms account for.  Fresh independent draws are
    made on every call.
    """
    M, K = config.M, config.K
    N_ap, N_u = config.N_ap, config.N_u
    mode_index = (scenario.mode == "t").astype(int)
    L_e = ris_state.R.shape[0]

    # per-mode aperture response area * R^(1/2) Theta R^(1/2)
    F = {}
    for m in MODES:
        F[m] = ris_state.element_area * (
            ris_state.R_half @ (ris_state.theta[m][:, None] * ris_state.R_half))

    if ris_state.shared_aperture:
        v_ap = _complex_normal(rng, (trials, M, N_ap, L_e))
        vF = {m: v_ap @ F[m] for m in MODES}
    else:
        vF = {m: _complex_normal(rng, (trials, M, N_ap, L_e)) @ F[m]
              for m in MODES}

    v_u = _complex_normal(rng, (trials, K, L_e, N_u))

    G = np.empty((trials, M, K, N_ap, N_u), dtype=complex)
    for k in range(K):
        m_lbl = MODES[mode_index[k]]
        scale = np.sqrt(scenario.beta_ap * scenario.beta_u[k])
        # (trials, M, N_ap, L) @ (trials, 1, L, N_u)
        G[:, :, k] = scale[None, :, None, None] * (
            vF[m_lbl] @ v_u[:, k][:, None, :, :])
    return G
