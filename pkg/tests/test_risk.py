"""Tests for the closed-form risk formulas."""

import math

import numpy as np
import pytest

from spikelab import (InvalidConfig, ModelConfig, NonZeroMu, RegimeBoundary,
                      dd_peak_location, risk_isotropic_limit, risk_so,
                      risk_so_unregularized, risk_spn,
                      spn_asymptotic_no_correction, spn_spike_correction)


def make_cfg(**overrides):
    base = dict(d=1000, n_trn=2000, n_tst=2000, theta_trn=1.0, theta_tst=1.0,
                tau_a_trn=1.0, tau_a_tst=1.0, tau_eps_trn=1.0, mu=1.0,
                beta_norm_sq=1.0, beta_dot_u=1.0)
    base.update(overrides)
    return ModelConfig(**base)


def isotropic_scaled_cfg(d, c, tau_eps=1.0):
    n = round(d / c)
    tau = math.sqrt(d)
    return make_cfg(d=d, n_trn=n, n_tst=n, tau_a_trn=tau, tau_a_tst=tau,
                    theta_trn=tau * math.sqrt(n), theta_tst=tau * math.sqrt(n),
                    tau_eps_trn=tau_eps, mu=0.0, beta_dot_u=0.0)


class TestRiskSpn:
    def test_spikeless_reduction(self):
        cfg = make_cfg(theta_trn=0.0, theta_tst=0.0, mu=0.0)
        out = risk_spn(cfg)
        assert out.total == pytest.approx(1.0 * 0.5 / 0.5, rel=1e-12)

    def test_isotropic_scaling_approaches_limit(self):
        for d in (500, 4000):
            cfg = isotropic_scaled_cfg(d, 0.5)
            assert risk_spn(cfg).total == pytest.approx(1.0, rel=0.02)

    def test_overparameterized_with_scalings(self):
        d = 2000
        cfg = isotropic_scaled_cfg(d, 2.0)
        corr = spn_spike_correction(cfg.theta_trn, cfg.tau_a_trn, cfg.tau_eps_trn)
        expected = 0.5 * cfg.beta_norm_sq + 1.0 * cfg.tau_eps_trn ** 2 + corr
        assert risk_spn(cfg).total == pytest.approx(expected, rel=2e-2)

    def test_requires_mu_zero(self):
        with pytest.raises(NonZeroMu):
            risk_spn(make_cfg(mu=0.5))

    def test_breakdown_sums(self):
        out = risk_spn(make_cfg(mu=0.0, n_trn=400, n_tst=400))
        assert out.total == out.bias + out.variance_a + out.variance_a_eps + out.adjustment

    def test_regime_boundary(self):
        with pytest.raises(RegimeBoundary):
            risk_spn(make_cfg(mu=0.0, n_trn=1000, n_tst=1000))


class TestRiskSo:
    def test_noiseless_bias_only_terms(self):
        cfg = make_cfg(tau_eps_trn=0.0)
        out = risk_so(cfg)
        assert out.variance_a_eps == 0.0
        from spikelab import combinators
        g = combinators(cfg.c, cfg.mu, cfg.tau_a_trn, cfg.theta_trn).gamma_bar
        expected_bias = cfg.theta_tst ** 2 / cfg.n_tst * cfg.beta_dot_u ** 2 / g ** 2
        assert out.bias == pytest.approx(expected_bias, rel=1e-12)

    def test_mu_zero_equals_unregularized_form(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            c = float(rng.uniform(0.1, 3.0))
            if abs(c - 1.0) < 0.05:
                c = 1.5
            d = 1000
            n = round(d / c)
            theta, tau, te = (float(x) for x in rng.uniform(0.3, 2.5, 3))
            bu = float(rng.uniform(0.0, 1.0))
            cfg = make_cfg(d=d, n_trn=n, n_tst=n, theta_trn=theta, theta_tst=theta,
                           tau_a_trn=tau, tau_a_tst=tau, tau_eps_trn=te, mu=0.0,
                           beta_dot_u=bu)
            a = risk_so(cfg).total
            b = risk_so_unregularized(cfg).total
            assert a == pytest.approx(b, rel=1e-9)

    def test_mu_to_zero_monotone_convergence(self):
        cfg0 = make_cfg(n_trn=1600, n_tst=1600, mu=0.0)
        target = risk_so_unregularized(cfg0).total
        gaps = [abs(risk_so(cfg0.with_updates(mu=mu)).total - target)
                for mu in (1e-2, 1e-3, 1e-4)]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3 * abs(target)

    def test_total_is_sum_of_parts(self):
        out = risk_so(make_cfg())
        assert out.total == out.bias + out.variance_a + out.variance_a_eps + out.adjustment

    def test_allows_c_near_one_when_regularized(self):
        out = risk_so(make_cfg(n_trn=1000, n_tst=1000))
        assert np.isfinite(out.total)


class TestUnregularizedForm:
    def test_under_asymptotic_display(self):
        # theta = tau sqrt(n), tau^2 = d, large d: risk -> te^2 c/(1-c) + (b.u)^2/(1-c)
        d, c = 200000, 0.5
        n = round(d / c)
        tau = math.sqrt(d)
        cfg = make_cfg(d=d, n_trn=n, n_tst=n, tau_a_trn=tau, tau_a_tst=tau,
                       theta_trn=tau * math.sqrt(n), theta_tst=tau * math.sqrt(n),
                       tau_eps_trn=1.0, mu=0.0, beta_dot_u=0.8)
        expected = 1.0 * c / (1 - c) + 0.8 ** 2 / (1 - c)
        assert risk_so_unregularized(cfg).total == pytest.approx(expected, rel=5e-3)

    def test_over_asymptotic_display(self):
        d, c = 200000, 2.0
        n = round(d / c)
        tau = math.sqrt(d)
        cfg = make_cfg(d=d, n_trn=n, n_tst=n, tau_a_trn=tau, tau_a_tst=tau,
                       theta_trn=tau * math.sqrt(n), theta_tst=tau * math.sqrt(n),
                       tau_eps_trn=1.0, mu=0.0, beta_dot_u=0.8)
        expected = 1.0 / (c - 1) + 0.8 ** 2 * c / (c - 1)
        assert risk_so_unregularized(cfg).total == pytest.approx(expected, rel=5e-3)

    def test_unaligned_spikeless_variance_only(self):
        cfg = make_cfg(theta_trn=0.0, theta_tst=0.0, beta_dot_u=0.0, mu=0.0,
                       tau_a_trn=1.3, tau_a_tst=0.9)
        out = risk_so_unregularized(cfg)
        c = cfg.c
        expected = 0.9 ** 2 * 1.0 * c / (1.3 ** 2 * (1 - c))
        assert out.total == pytest.approx(expected, rel=1e-12)
        assert out.bias == 0.0


class TestScalarHelpers:
    def test_isotropic_limit_values(self):
        assert risk_isotropic_limit(0.5, 1.0, 1.0) == pytest.approx(1.0)
        assert risk_isotropic_limit(2.0, 1.0, 1.0) == pytest.approx(1.5)
        assert risk_isotropic_limit(0.5, 0.0, 1.0) == 0.0

    def test_spike_correction_values(self):
        assert spn_spike_correction(0.0, 1.0, 5.0) == 0.0
        n = 100
        assert spn_spike_correction(math.sqrt(n), 1.0, 5.0) == pytest.approx(
            25.0 * n / (n + 1) ** 2)

    def test_spike_correction_large_bulk_bound(self):
        d = 500
        tau = math.sqrt(d)
        for c in (1.5, 2.0, 4.0):
            n = round(d / c)
            corr = spn_spike_correction(tau * math.sqrt(n), tau, 1.0)
            assert corr <= 4.0 / d ** 2

    def test_peak_location(self):
        assert dd_peak_location(1.0, 1.0) == pytest.approx(0.5)
        assert dd_peak_location(2.0, 1.0) == pytest.approx(0.8)
        assert dd_peak_location(1.7, 0.0) == 1.0

    def test_no_correction_reference(self):
        cfg = make_cfg(mu=0.0, n_trn=500, n_tst=500, tau_a_tst=2.0)
        val = spn_asymptotic_no_correction(cfg)
        assert val == pytest.approx(
            1.0 * (1 - 1 / 2.0) * 4.0 / 1000 + 4.0 * 1.0 / (2.0 - 1.0))


class TestPeakProperty:
    @pytest.mark.parametrize("tau,mu", [(1.0, 1.0), (2.0, 1.0)])
    def test_theory_argmax_matches_prediction(self, tau, mu):
        d = 1000
        grid = np.round(np.arange(0.10, 1.91, 0.02), 10)
        best_c, best_v = None, -np.inf
        for c in grid:
            if abs(c - 1.0) < 0.02:
                continue
            n = round(d / c)
            cfg = make_cfg(d=d, n_trn=n, n_tst=n, tau_a_trn=tau, tau_a_tst=tau, mu=mu)
            v = risk_so(cfg).total
            if v > best_v:
                best_c, best_v = c, v
        assert abs(best_c - dd_peak_location(tau, mu)) <= 0.02 + 1e-9

    @pytest.mark.parametrize("scale", [0.5, 3.0])
    def test_argmax_invariant_under_joint_rescaling(self, scale):
        d = 800
        grid = np.round(np.arange(0.2, 1.81, 0.05), 10)

        def argmax(s):
            best_c, best_v = None, -np.inf
            for c in grid:
                if abs(c - 1.0) < 0.02:
                    continue
                n = round(d / c)
                cfg = make_cfg(d=d, n_trn=n, n_tst=n, theta_trn=s, theta_tst=s,
                               tau_a_trn=s, tau_a_tst=s, tau_eps_trn=s, mu=s)
                v = risk_so(cfg).total
                if v > best_v:
                    best_c, best_v = c, v
            return best_c

        assert argmax(1.0) == argmax(scale)


class TestConfig:
    def test_alignment_bound(self):
        with pytest.raises(InvalidConfig):
            make_cfg(beta_norm_sq=1.0, beta_dot_u=1.2).validate()

    def test_counts_positive(self):
        with pytest.raises(InvalidConfig):
            make_cfg(n_trn=0).validate()

    def test_assumption_warnings_listed(self):
        msgs = make_cfg(tau_a_trn=0.5, tau_a_tst=1.0).assumption_warnings()
        assert any("tau_a_trn" in m for m in msgs)
        assert make_cfg(tau_a_trn=3.0, tau_a_tst=3.0).assumption_warnings() == []
