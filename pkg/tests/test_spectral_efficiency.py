import numpy as np
import pytest

from starcf import (
    DetectorContext,
    build_ris_state,
    channel_covariance,
    closed_form_se,
    default_config,
    estimation_stats,
    generate_scenario,
    mmse_sic_se,
    monte_carlo_moments,
    network_se,
    no_power_control,
)
from starcf.spectral_efficiency import interference_moment


def make_setting(seed=13, **config_kwargs):
    kwargs = dict(M=4, K=4, N_u=2, tau_p=4, L=16)
    kwargs.update(config_kwargs)
    config = default_config(**kwargs)
    scn = generate_scenario(config, seed=seed)
    state = build_ris_state(config, seed=seed)
    chan = channel_covariance(scn, state)
    est = estimation_stats(chan, config, scn.pilot_groups)
    return config, scn, state, chan, est


def random_feasible_eta(est, config, rng):
    shape = est.estimate_var.shape
    eta = rng.uniform(0.2, 1.0, size=shape)
    per_ap = (eta * est.estimate_var).sum(axis=1) * config.N_ap * config.N_u
    scale = rng.uniform(0.5, 1.0, size=shape[0]) * config.p_d / per_ap
    return eta * scale[:, None]


def reference_second_moment(est, chan, eta, config):
    """Literal loop transcription of the four-term second-moment formula.

    Kept deliberately naive (nested loops, no factoring) so it exercises a
    different code path from the vectorized production implementation.
    """
    M, K = eta.shape
    N_ap, N_u = config.N_ap, config.N_u
    zb = est.mmse_gain
    dv = chan.channel_var
    c = est.pilot_energy
    ba, bu, mi = chan.beta_ap, chan.beta_u, chan.mode_index
    groups, gi = est.pilot_groups, est.group_index
    out = np.zeros(K)
    for k in range(K):
        own = groups[gi[k]]
        total = 0.0
        for kp in own:
            for m in range(M):
                total += (eta[m, kp] * zb[m, kp] ** 2 * c[k] * ba[m] ** 2
                          * bu[k] ** 2 * chan.mode_trace_sq[mi[k]] * N_ap)
        for kp in range(K):
            for m in range(M):
                s = sum(c[kpp] * dv[m, kpp] for kpp in groups[gi[kp]])
                total += (eta[m, kp] * zb[m, kp] ** 2 * N_u * N_ap
                          * dv[m, k] * (s + config.sigma2))
        for kp in own:
            for m in range(M):
                for mp in range(M):
                    total += (np.sqrt(eta[m, kp] * eta[mp, kp])
                              * zb[m, kp] * zb[mp, kp] * c[k]
                              * dv[m, k] * dv[mp, k] * N_ap ** 2)
        for kp in range(K):
            for m in range(M):
                for mp in range(M):
                    inner = sum(
                        c[kpp] * ba[m] * ba[mp] * bu[k] * bu[kpp]
                        * chan.cross_trace[mi[k], mi[kpp]]
                        for kpp in groups[gi[kp]])
                    total += (np.sqrt(eta[m, kp] * eta[mp, kp])
                              * zb[m, kp] * zb[mp, kp] * N_u
                              * inner * N_ap ** 2)
        out[k] = total
    return out


class TestClosedForm:
    def test_matches_loop_reference(self):
        config, scn, state, chan, est = make_setting(seed=31, M=3, K=4)
        rng = np.random.default_rng(0)
        for _ in range(5):
            eta = random_feasible_eta(est, config, rng)
            fast = interference_moment(est, chan, eta, config)
            slow = reference_second_moment(est, chan, eta, config)
            assert np.allclose(fast, slow, rtol=1e-12)

    def test_single_user_scalar_transcription(self):
        # M = K = N_u = 1 collapses every sum; check against a hand formula
        config, scn, state, chan, est = make_setting(
            seed=2, M=1, K=2, K_r=1, N_u=1, tau_p=2)
        # keep only user 0 by zeroing the power of user 1
        eta = np.zeros((1, 2))
        eta[0, 0] = 0.9 * config.p_d / (
            est.estimate_var[0, 0] * config.N_ap * config.N_u)
        report = closed_form_se(est, chan, eta, config)

        e, zb = eta[0, 0], est.mmse_gain[0, 0]
        c = est.pilot_energy[0]
        dv = chan.channel_var[0, 0]
        ba, bu = chan.beta_ap[0], chan.beta_u[0]
        tr2 = chan.mode_trace_sq[chan.mode_index[0]]
        tr1 = chan.mode_trace[chan.mode_index[0]]
        N_ap, N_u, s2 = config.N_ap, config.N_u, config.sigma2
        # singleton pilot group: own-group sums hold only the user itself
        cbar = (e * zb ** 2 * c * ba ** 2 * bu ** 2 * tr2 * N_ap
                + e * zb ** 2 * N_u * N_ap * dv * (c * dv + s2)
                + e * zb ** 2 * c * dv ** 2 * N_ap ** 2
                + e * zb ** 2 * N_u * c * ba ** 2 * bu ** 2 * tr2 * N_ap ** 2)
        dbar = np.sqrt(e) * est.estimate_var[0, 0] * N_ap
        assert report.second_moment[0, 0] == pytest.approx(cbar, rel=1e-12)
        assert report.mean_gain[0, 0] == pytest.approx(dbar, rel=1e-12)
        sinr = dbar ** 2 / (cbar - dbar ** 2 + s2)
        assert report.sinr[0, 0] == pytest.approx(sinr, rel=1e-12)

    def test_zero_power_gives_zero_se(self):
        config, scn, state, chan, est = make_setting(seed=4)
        report = closed_form_se(est, chan, np.zeros((config.M, config.K)),
                                config)
        assert np.all(report.mean_gain == 0)
        assert np.all(report.se_per_user == 0)
        assert report.sum_se == 0

    def test_stream_symmetry_is_exact(self):
        config, scn, state, chan, est = make_setting(seed=6)
        eta = random_feasible_eta(est, config, np.random.default_rng(1))
        report = closed_form_se(est, chan, eta, config)
        assert np.max(np.abs(report.sinr - report.sinr[:, [0]])) == 0

    def test_rejects_infeasible_power(self):
        config, scn, state, chan, est = make_setting(seed=4)
        pa = no_power_control(est, config)
        with pytest.raises(ValueError):
            closed_form_se(est, chan, 1.01 * pa.eta, config)
        with pytest.raises(ValueError):
            closed_form_se(est, chan, -pa.eta, config)

    def test_raising_own_power_does_not_hurt(self):
        config, scn, state, chan, est = make_setting(seed=8)
        base = 0.5 * no_power_control(est, config).eta
        report = closed_form_se(est, chan, base, config)
        for k in range(config.K):
            boosted = base.copy()
            boosted[:, k] *= 1.8
            boosted_report = closed_form_se(est, chan, boosted, config)
            assert (boosted_report.se_per_user[k]
                    >= report.se_per_user[k] - 1e-12)


class TestSicEquivalence:
    def test_identical_to_linear_mmse_sum(self):
        config, scn, state, chan, est = make_setting(seed=10)
        rng = np.random.default_rng(3)
        for _ in range(10):
            eta = random_feasible_eta(est, config, rng)
            report = closed_form_se(est, chan, eta, config)
            assert np.array_equal(mmse_sic_se(report), report.se_per_user)

    def test_zero_sinr(self):
        config, scn, state, chan, est = make_setting(seed=4)
        report = closed_form_se(est, chan, np.zeros((config.M, config.K)),
                                config)
        assert np.all(mmse_sic_se(report) == 0)

    def test_unit_sinr_four_streams(self):
        from starcf.spectral_efficiency import SeReport
        report = SeReport(
            mean_gain=np.ones((1, 4)),
            second_moment=np.full((1, 4), 2.0),
            sinr=np.ones((1, 4)),
            se_per_user=np.array([4.0]),
            sum_se=0.0, avg_se=0.0)
        assert mmse_sic_se(report)[0] == pytest.approx(4.0)


class TestNetworkSe:
    def test_half_pilot_block(self):
        config, scn, state, chan, est = make_setting(
            seed=4, tau_c=8, tau_p=4)
        pa = no_power_control(est, config)
        report = closed_form_se(est, chan, pa, config)
        total = report.se_per_user.sum()
        assert report.sum_se == pytest.approx(0.5 * total)

    def test_paper_prelog(self):
        config = default_config(M=4, K=10, N_u=4, L=16)
        assert config.tau_c == 200 and config.tau_p == 20
        assert config.prelog == pytest.approx(0.9)

    def test_sum_is_k_times_average(self):
        config, scn, state, chan, est = make_setting(seed=5)
        report = closed_form_se(est, chan, no_power_control(est, config),
                                config)
        assert report.sum_se == pytest.approx(config.K * report.avg_se)

    def test_rejects_pilot_only_block(self):
        config, scn, state, chan, est = make_setting(seed=4)
        report = closed_form_se(est, chan, no_power_control(est, config),
                                config)
        config_dict = config.to_dict()
        config_dict.update(tau_c=config.tau_p)
        from starcf import SystemConfig
        with pytest.raises(ValueError):
            network_se(report, SystemConfig(**config_dict))


@pytest.fixture(scope="module")
def mc_setting():
    config, scn, state, chan, est = make_setting(seed=35)
    pa = no_power_control(est, config)
    rng = np.random.default_rng(123)
    moments = monte_carlo_moments(scn, state, est, pa, config,
                                  trials=10_000, rng=rng)
    report = closed_form_se(est, chan, pa, config)
    return config, chan, est, pa, moments, report


class TestMonteCarloMoments:
    def test_effective_channel_mean(self, mc_setting):
        config, chan, est, pa, moments, report = mc_setting
        eye = np.eye(config.N_u)
        target = (est.estimate_var[:, :, None, None] * config.N_ap
                  * eye[None, None])
        # network-level agreement; per-link checks are only meaningful on
        # links whose estimate carries weight (weak links have near-zero
        # means and partner-dominated sampling noise)
        agg = np.linalg.norm(moments.gw_mean - target) / np.linalg.norm(target)
        assert agg < 0.02
        z = est.estimate_var
        for m, k in zip(*np.where(z >= 0.1 * z.max())):
            err = np.linalg.norm(moments.gw_mean[m, k] - target[m, k])
            assert err / np.linalg.norm(target[m, k]) < 0.04

    def test_second_moment_matches_closed_form(self, mc_setting):
        config, chan, est, pa, moments, report = mc_setting
        rel = (np.abs(moments.second_moment - report.second_moment)
               / report.second_moment)
        assert np.max(rel) < 0.05

    def test_mean_gain_matches_closed_form(self, mc_setting):
        config, chan, est, pa, moments, report = mc_setting
        agg = (np.linalg.norm(moments.mean_gain - report.mean_gain)
               / np.linalg.norm(report.mean_gain))
        assert agg < 0.02

    def test_interferer_silencing_collapses_terms(self):
        config, scn, state, chan, est = make_setting(seed=15)
        eta = no_power_control(est, config).eta.copy()
        eta[:, 1:] = 0.0
        report = closed_form_se(est, chan, eta, config)
        ref = reference_second_moment(est, chan, eta, config)
        assert np.allclose(report.second_moment[:, 0], ref, rtol=1e-12)

    def test_rejects_zero_trials(self):
        config, scn, state, chan, est = make_setting(seed=15)
        pa = no_power_control(est, config)
        with pytest.raises(ValueError):
            monte_carlo_moments(scn, state, est, pa, config, trials=0,
                                rng=np.random.default_rng(0))


class TestDetectorAssembly:
    def test_exact_moments_reproduce_closed_form(self, mc_setting):
        config, chan, est, pa, moments, report = mc_setting
        for k in range(config.K):
            ctx = DetectorContext(
                signal_mat=report.mean_gain[k, 0] * np.eye(config.N_u),
                moment_mat=report.second_moment[k, 0] * np.eye(config.N_u),
                sigma2=config.sigma2)
            assert np.allclose(ctx.stream_sinr(), report.sinr[k],
                               rtol=1e-10)
            assert ctx.se() == pytest.approx(report.se_per_user[k],
                                             rel=1e-10)

    def test_empirical_moments_track_closed_form(self):
        config, scn, state, chan, est = make_setting(
            seed=55, M=2, K=2, K_r=1, tau_p=2)
        pa = no_power_control(est, config)
        rng = np.random.default_rng(5)
        moments = monte_carlo_moments(scn, state, est, pa, config,
                                      trials=20_000, rng=rng)
        report = closed_form_se(est, chan, pa, config)
        for k in range(config.K):
            ctx = DetectorContext(
                signal_mat=moments.signal_mat[k],
                moment_mat=moments.moment_mat[k],
                sigma2=config.sigma2)
            assert ctx.se() == pytest.approx(report.se_per_user[k], rel=0.08)
