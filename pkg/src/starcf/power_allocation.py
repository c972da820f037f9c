"""Downlink power allocation policies.

Three policies share one interface: a uniform no-power-control rule, the
fractional heuristic with exponent alpha, and a sum-SE maximizer that runs
fractional programming with an ADMM inner solver.

The optimizer works on the transformed variables ``zeta = sqrt(eta * z)``
(z being the per-entry estimate variance), under per-AP ball constraints
``sum_k zeta_mk^2 <= p_d / (N_ap * N_u)``.  In these variables the per-stream
SINR is a ratio of quadratics,

    sinr_k = A_k(zeta) / B_k(zeta),
    A_k    = (gain_k . zeta_k)^2,
    B_k    = sum_{k' in group(k)} zeta_k'^T (D1 + O1)[k, k'] zeta_k'
           + sum_{k'}            zeta_k'^T (D2 + O2)[k, k'] zeta_k'
           - A_k + sigma2,

with two diagonal and two rank-one coefficient blocks per user pair, none of
which depend on the stream index.  The outer loop alternates the two standard
fractional-programming auxiliaries (the SINR surrogate gamma and the
quadratic-transform weight varpi); the concave quadratic subproblem in zeta
is split by ADMM into an unconstrained solve and independent per-AP ball
projections with scaled duals.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .spectral_efficiency import POWER_SLACK, check_power_constraint


@dataclass
class PowerAllocation:
    """Power-control coefficients eta and their transformed variables zeta.

    The two views satisfy zeta^2 = eta * estimate_var exactly by
    construction.
    """

    eta: np.ndarray
    zeta: np.ndarray

    def __post_init__(self):
        if np.any(self.eta < 0) or np.any(self.zeta < 0):
            raise ValueError("power coefficients must be non-negative")

    @classmethod
    def from_eta(cls, eta: np.ndarray, estimate_var: np.ndarray):
        eta = np.asarray(eta, dtype=float)
        return cls(eta=eta, zeta=np.sqrt(eta * estimate_var))

    @classmethod
    def from_zeta(cls, zeta: np.ndarray, estimate_var: np.ndarray):
        # recovery is sign-free (eta depends on zeta squared), so any
        # negative components the solver left behind fold into magnitudes
        zeta = np.abs(np.asarray(zeta, dtype=float))
        return cls(eta=zeta ** 2 / estimate_var, zeta=zeta)


def ball_radius_sq(config) -> float:
    """Per-AP constraint radius squared in the transformed variables."""
    return config.p_d / (config.N_ap * config.N_u)


def no_power_control(est, config) -> PowerAllocation:
    """Uniform rule spending the AP budget equally over users."""
    eta = config.p_d / (config.K * est.estimate_var * config.N_ap * config.N_u)
    return PowerAllocation.from_eta(eta, est.estimate_var)


def fractional_power_control(chan, est, config, alpha: float) -> PowerAllocation:
    """Fractional power control with fairness exponent alpha in [0, 1].

    Coefficients scale as the inverse alpha-th power of each user's total
    channel trace, normalized so that every AP meets its power budget with
    equality.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    per_antenna = config.N_ap * config.N_u
    tr_channel = chan.channel_var * per_antenna
    tr_estimate = est.estimate_var * per_antenna
    user_trace = tr_channel.sum(axis=0) ** alpha           # (K,)
    load = (tr_estimate / user_trace[None, :]).sum(axis=1)  # (M,)
    eta = config.p_d / (user_trace[None, :] * load[:, None])
    return PowerAllocation.from_eta(eta, est.estimate_var)


@dataclass
class FpCoefficients:
    """Quadratic decomposition of the per-user SINR in zeta variables.

    ``gain[:, k]`` is the coherent-gain vector of user k.  The four blocks
    are indexed [observer, transmitter]: ``diag_pilot``/``outer_pilot`` apply
    only inside the observer's pilot group, ``diag_all``/``outer_all`` over
    all users.  The outer blocks are symmetric rank-one matrices; none of the
    blocks depends on the stream index.
    """

    gain: np.ndarray
    diag_pilot: np.ndarray
    diag_all: np.ndarray
    outer_pilot: np.ndarray
    outer_all: np.ndarray
    group_mask: np.ndarray
    sigma2: float
    n_streams: int
    estimate_var: np.ndarray


def build_fp_coefficients(chan, est, config) -> FpCoefficients:
    """Assemble the SINR decomposition from the channel/estimation statistics."""
    M, K = chan.channel_var.shape
    N_ap, N_u = config.N_ap, config.N_u
    z_bar = est.mmse_gain
    z = est.estimate_var
    dvar = chan.channel_var
    c = est.pilot_energy
    xi = est.xi
    beta_ap = chan.beta_ap
    beta_u = chan.beta_u
    mi = chan.mode_index

    group_mask = np.zeros((K, K), dtype=bool)
    for group in est.pilot_groups:
        group_mask[np.ix_(group, group)] = True

    # shared per-(m, k') front factor z_bar / (sqrt(c) * channel_var)
    front = z_bar / (np.sqrt(c)[None, :] * dvar)

    S = np.zeros_like(dvar)
    for group in est.pilot_groups:
        S[:, group] = (c[group] * dvar[:, group]).sum(axis=1, keepdims=True)

    tr2_k = chan.mode_trace_sq[mi]                       # (K,)
    diag_pilot = np.einsum(
        "mv,o,m->ovm", front, c * tr2_k * beta_u ** 2 * N_ap, beta_ap ** 2)
    diag_all = np.einsum(
        "mv,mv,mo->ovm", front, (S + config.sigma2) * N_u * N_ap, dvar)

    # rank-one factors: outer_pilot from b, outer_all from e
    b = np.sqrt(z)[:, :, None] * (dvar[:, None, :] / dvar[:, :, None])  # (m, v, o)
    outer_pilot = np.einsum(
        "mvo,nvo,ov->ovmn", b, b,
        (xi[:, None] / xi[None, :]) * N_ap ** 2)
    e = np.sqrt(z) * beta_ap[:, None] / dvar                             # (m, v)
    h = np.zeros((K, 2))
    for group in est.pilot_groups:
        for mode in (0, 1):
            h[group, mode] = (xi[group] * beta_u[group]
                              * chan.cross_trace[mode, mi[group]]).sum()
    # hv[o, v] = contamination sum of transmitter v seen through observer o's mode
    hv = h[:, mi].T
    scale = (N_u * N_ap ** 2 / xi[None, :]) * beta_u[:, None] * hv
    outer_all = np.einsum("mv,nv,ov->ovmn", e, e, scale)

    outer_pilot = 0.5 * (outer_pilot + outer_pilot.transpose(0, 1, 3, 2))
    outer_all = 0.5 * (outer_all + outer_all.transpose(0, 1, 3, 2))

    return FpCoefficients(
        gain=np.sqrt(z) * N_ap,
        diag_pilot=diag_pilot,
        diag_all=diag_all,
        outer_pilot=outer_pilot,
        outer_all=outer_all,
        group_mask=group_mask,
        sigma2=config.sigma2,
        n_streams=N_u,
        estimate_var=z,
    )


def evaluate_ratio(coeffs: FpCoefficients, zeta: np.ndarray) -> tuple:
    """Numerator/denominator (A, B) of every user's SINR at zeta."""
    A = np.einsum("mk,mk->k", coeffs.gain, zeta) ** 2
    q_diag = (np.einsum("ovm,mv->ov", coeffs.diag_pilot, zeta ** 2) * coeffs.group_mask
              + np.einsum("ovm,mv->ov", coeffs.diag_all, zeta ** 2))
    q_outer = (np.einsum("ovmn,mv,nv->ov", coeffs.outer_pilot, zeta, zeta)
               * coeffs.group_mask
               + np.einsum("ovmn,mv,nv->ov", coeffs.outer_all, zeta, zeta))
    B = (q_diag + q_outer).sum(axis=1) - A + coeffs.sigma2
    return A, B


def update_gamma(coeffs: FpCoefficients, zeta: np.ndarray) -> np.ndarray:
    """Stationary SINR auxiliaries gamma = A/B, one per (user, stream)."""
    A, B = evaluate_ratio(coeffs, zeta)
    return np.repeat((A / B)[:, None], coeffs.n_streams, axis=1)


def update_varpi(coeffs: FpCoefficients, zeta: np.ndarray,
                 gamma: np.ndarray) -> np.ndarray:
    """Stationary quadratic-transform weights sqrt((1+gamma)A)/(A+B)."""
    A, B = evaluate_ratio(coeffs, zeta)
    return np.sqrt((1.0 + gamma) * A[:, None]) / (A + B)[:, None]


def evaluate_objective(coeffs: FpCoefficients, zeta: np.ndarray,
                       gamma: np.ndarray) -> float:
    """Dual-transform objective (natural log) at (zeta, gamma)."""
    A, B = evaluate_ratio(coeffs, zeta)
    ratio = (1.0 + gamma) * (A / (A + B))[:, None]
    return float((np.log1p(gamma) - gamma + ratio).sum())


def evaluate_f2(coeffs: FpCoefficients, zeta: np.ndarray, varpi: np.ndarray,
                gamma: np.ndarray) -> float:
    """Quadratic-transform surrogate at (zeta, varpi) for fixed gamma."""
    A, B = evaluate_ratio(coeffs, zeta)
    lin = 2.0 * varpi * np.sqrt((1.0 + gamma) * A[:, None])
    quad = varpi ** 2 * (A + B)[:, None]
    return float((lin - quad).sum())


def project_ball(nu: np.ndarray, radius2: float) -> np.ndarray:
    """Euclidean projection of one AP's user vector onto the power ball."""
    if radius2 <= 0:
        raise ValueError("the squared radius must be positive")
    norm_sq = float(np.dot(nu, nu))
    if norm_sq <= radius2 or norm_sq == 0.0:
        return nu.copy()
    return np.sqrt(radius2 / norm_sq) * nu


def _project_rows(X: np.ndarray, radius2: float) -> np.ndarray:
    norms_sq = (X ** 2).sum(axis=1)
    scale = np.ones_like(norms_sq)
    over = norms_sq > radius2
    scale[over] = np.sqrt(radius2 / norms_sq[over])
    return X * scale[:, None]


def _assemble_quadratic(coeffs: FpCoefficients, varpi: np.ndarray) -> np.ndarray:
    """Per-user quadratic blocks of the surrogate, without the penalty term."""
    M = coeffs.gain.shape[0]
    weights = (varpi ** 2).sum(axis=1)                    # (K,) over streams
    w_pilot = weights[:, None] * coeffs.group_mask        # (o, v)
    diag_part = (np.einsum("ov,ovm->vm", w_pilot, coeffs.diag_pilot)
                 + np.einsum("o,ovm->vm", weights, coeffs.diag_all))
    full_part = (np.einsum("ov,ovmn->vmn", w_pilot, coeffs.outer_pilot)
                 + np.einsum("o,ovmn->vmn", weights, coeffs.outer_all))
    full_part[:, np.arange(M), np.arange(M)] += diag_part
    return full_part


def admm_inner(coeffs: FpCoefficients, gamma: np.ndarray, varpi: np.ndarray,
               zeta0: np.ndarray, q0: np.ndarray, config) -> tuple:
    """Maximize the quadratic surrogate under per-AP balls via ADMM.

    The unconstrained solve factors one SPD system per user, reused across
    every inner iteration (the system depends on varpi only).  Termination
    requires both the relative primal residual |zeta - q|/|zeta| and the
    relative dual residual |q - q_prev|/|zeta| to fall below the tolerance;
    a warm-started consensus pair can satisfy the primal criterion alone
    while the iterate is still far from the subproblem optimum.  Returns the
    feasible consensus iterate together with iteration diagnostics.
    """
    M, K = zeta0.shape
    radius2 = ball_radius_sq(config)
    half_penalty = 0.5 * config.penalty

    quad = _assemble_quadratic(coeffs, varpi)
    quad[:, np.arange(M), np.arange(M)] += half_penalty
    factors = [cho_factor(quad[v]) for v in range(K)]
    lin = coeffs.gain * (varpi * np.sqrt(1.0 + gamma)).sum(axis=1)[None, :]

    zeta = zeta0.copy()
    q = q0.copy()
    u = np.zeros_like(zeta)
    residual = np.inf
    iters = 0
    for iters in range(1, config.max_admm_iters + 1):
        rhs = lin + half_penalty * (q + u)
        for v in range(K):
            zeta[:, v] = cho_solve(factors[v], rhs[:, v])
        q_prev = q
        q = _project_rows(zeta - u, radius2)
        u = q - zeta + u
        if not (np.all(np.isfinite(zeta)) and np.all(np.isfinite(u))):
            raise FloatingPointError("ADMM iterates diverged to non-finite values")
        scale = np.linalg.norm(zeta)
        if scale > 0:
            residual = np.linalg.norm(zeta - q) / scale
            dual_residual = np.linalg.norm(q - q_prev) / scale
        else:
            residual = dual_residual = 0.0
        if residual <= config.eps_admm and dual_residual <= config.eps_admm:
            break
    diagnostics = {
        "iters": iters,
        "residual": residual,
        "cap_hit": residual > config.eps_admm,
        "u": u,
    }
    return q, diagnostics


@dataclass
class FpState:
    """Trace of one optimizer run (final auxiliaries, iterates, history)."""

    gamma: np.ndarray = None
    varpi: np.ndarray = None
    zeta: np.ndarray = None
    q: np.ndarray = None
    u: np.ndarray = None
    f1_history: list = field(default_factory=list)
    admm_residuals: list = field(default_factory=list)
    fp_iters: int = 0
    admm_iters_total: int = 0
    fp_cap_hit: bool = False
    admm_cap_hits: int = 0


def admm_fp_optimize(est, chan, config, eta0: PowerAllocation | None = None,
                     coeffs: FpCoefficients | None = None) -> tuple:
    """Sum-SE maximizing power allocation.

    Alternates the gamma and varpi updates with the ADMM subsolver until the
    squared successive difference of the outer objective drops below eps_fp
    or the iteration cap is reached.  Starts from the no-power-control point
    unless an explicit feasible initializer is given.  Returns the allocation
    and the optimizer state.
    """
    if eta0 is None:
        eta0 = no_power_control(est, config)
    check_power_constraint(eta0.eta, est, config)
    if coeffs is None:
        coeffs = build_fp_coefficients(chan, est, config)

    radius2 = ball_radius_sq(config)
    zeta = np.sqrt(eta0.eta * est.estimate_var)
    q = _project_rows(zeta, radius2)
    state = FpState(zeta=zeta)

    for i in range(1, config.max_fp_iters + 1):
        gamma = update_gamma(coeffs, zeta)
        varpi = update_varpi(coeffs, zeta, gamma)
        zeta, diag = admm_inner(coeffs, gamma, varpi, zeta, q, config)
        q = zeta
        state.gamma, state.varpi, state.zeta = gamma, varpi, zeta
        state.q, state.u = q, diag["u"]
        state.admm_iters_total += diag["iters"]
        state.admm_residuals.append(diag["residual"])
        state.admm_cap_hits += int(diag["cap_hit"])
        state.f1_history.append(evaluate_objective(coeffs, zeta, gamma))
        state.fp_iters = i
        if i >= 2:
            delta = state.f1_history[-1] - state.f1_history[-2]
            if delta ** 2 <= config.eps_fp:
                break
    else:
        state.fp_cap_hit = True

    allocation = PowerAllocation.from_zeta(zeta, est.estimate_var)
    return allocation, state
