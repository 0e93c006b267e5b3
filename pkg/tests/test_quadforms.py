"""Tests for the closed-form quadratic-form expectations."""

import math
from dataclasses import fields

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spikelab import (ModelConfig, QuadFormSample, RegimeBoundary, ShapeParams,
                      combinators, measure_quad_forms, quad_form_expectations,
                      spectral_moments, zero_forms_list)
from spikelab.quadforms import t1_radical
from spikelab.simulate import map_trials
from spikelab.verify import _probe_trial


def random_params(rng):
    c = float(rng.uniform(0.1, 3.0))
    if abs(c - 1.0) < 0.03:
        c = 1.3
    return c, float(rng.uniform(0.3, 4.0)), float(rng.uniform(0.05, 3.0))


class TestCombinators:
    def test_mu_zero_radical_collapses(self):
        comb = combinators(0.5, 0.0, 1.0, 1.0)
        assert abs(comb.t1 - 0.5) < 1e-14
        assert abs(comb.t2 - 3.0) < 1e-14

    def test_theta_zero_gamma_is_one(self):
        for c, mu, tau in ((0.3, 0.7, 1.2), (2.5, 1.4, 0.6)):
            assert combinators(c, mu, tau, 0.0).gamma_bar == 1.0

    def test_over_branch_radical(self):
        comb = combinators(2.0, 1.0, 1.0, 1.0)
        assert abs(comb.t1 - math.sqrt(17.0)) < 1e-14

    def test_gamma_matches_moment_product(self):
        # gamma_bar - 1 = theta^2 * E|t|^2 * E|k|^2 as an algebraic identity
        rng = np.random.default_rng(0)
        for _ in range(20):
            c, tau, mu = random_params(rng)
            theta = float(rng.uniform(0.1, 3.0))
            m = spectral_moments(ShapeParams(c=c, tau=tau, mu=mu))
            expected = 1.0 + theta ** 2 * (1.0 - c * m.ratio1) * m.inv1
            got = combinators(c, mu, tau, theta).gamma_bar
            assert abs(got - expected) <= 1e-10 * max(1.0, abs(expected))

    def test_t2_above_one_and_limits(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            c, tau, mu = random_params(rng)
            assert combinators(c, mu, tau, 1.0).t2 > 1.0
        assert combinators(0.7, 1e5, 1.3, 1.0).t2 == pytest.approx(1.0, rel=1e-6)

    def test_regime_boundary_only_at_mu_zero(self):
        with pytest.raises(RegimeBoundary):
            combinators(1.0, 0.0, 1.0, 1.0)
        combinators(1.0, 0.5, 1.0, 1.0)  # fine with regularization


class TestExpectations:
    def test_xi_is_one(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            c, tau, mu = random_params(rng)
            assert quad_form_expectations(c, mu, tau, 1.0, 1.0, 100).xi == 1.0

    def test_large_mu_limits(self):
        q = quad_form_expectations(0.5, 300.0, 1.0, 1.0, 1.0, 100)
        assert q.h_sq < 1e-4
        assert q.t_sq > 1.0 - 1e-4

    def test_mu_continuity(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            c, tau, mu = random_params(rng)
            a = quad_form_expectations(c, mu, tau, 1.0, 1.0, 500)
            b = quad_form_expectations(c, mu * (1 + 1e-6), tau, 1.0, 1.0, 500)
            for f in fields(a):
                if f.name == "regime":
                    continue
                x, y = getattr(a, f.name), getattr(b, f.name)
                assert abs(x - y) <= 1e-4 * max(1.0, abs(x))

    def test_eps_aa_is_d_times_eps_kk(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            c, tau, mu = random_params(rng)
            q = quad_form_expectations(c, mu, tau, 1.3, 1.0, 777)
            assert q.eps_aa == pytest.approx(777 * q.eps_kk, rel=1e-12)

    def test_radical_route_equals_moment_route(self):
        # eps_ah_t and eps_aakk: printed T1-cubed rational forms vs the
        # inverse-moment route from spectral_moments
        rng = np.random.default_rng(5)
        for _ in range(20):
            c, tau, mu = random_params(rng)
            q = quad_form_expectations(c, mu, tau, 1.0, 1.0, 100)
            m = spectral_moments(ShapeParams(c=c, tau=tau, mu=mu))
            moment_route = m.inv2 - mu ** 2 * m.inv3
            assert q.eps_aakk == pytest.approx(moment_route, rel=1e-8)
            assert q.eps_ah_t == pytest.approx(c * mu ** 2 * moment_route, rel=1e-8)

    def test_radical_identity(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            c, tau, mu = random_params(rng)
            m = spectral_moments(ShapeParams(c=c, tau=tau, mu=mu))
            t1 = t1_radical(c, tau, mu)
            assert m.inv2 - mu ** 2 * m.inv3 == pytest.approx(c ** 2 * tau ** 2 / t1 ** 3,
                                                              rel=1e-8)

    @given(c=st.floats(0.05, 4.0), tau=st.floats(0.3, 5.0), mu=st.floats(0.0, 3.0),
           theta=st.floats(0.0, 3.0))
    @settings(max_examples=50, deadline=None)
    def test_invariants(self, c, tau, mu, theta):
        if abs(c - 1.0) < 0.02:
            c = 1.4
        q = quad_form_expectations(c, mu, tau, 1.0, theta, 50)
        assert q.h_sq >= 0 and q.k_sq >= 0 and q.k_aa_k >= 0
        assert -1e-12 <= q.t_sq <= 1.0 + 1e-12
        assert q.gamma_bar >= 1.0 - 1e-12
        assert np.isfinite([q.h_sq, q.k_sq, q.t_sq, q.k_aa_k, q.eps_kk, q.eps_tt,
                            q.eps_aa, q.eps_ah_t, q.eps_aakk]).all()

    def test_mu_zero_over_is_finite_bulk_limit(self):
        q = quad_form_expectations(2.0, 0.0, 1.0, 1.0, 1.0, 100)
        assert q.t_sq == 0.0
        assert q.eps_tt == 0.0
        assert q.eps_ah_t == 0.0
        assert q.k_sq == pytest.approx(1.0, rel=1e-12)          # 1/(tau^2 (c-1))
        assert q.k_aa_k == pytest.approx(4.0, rel=1e-12)        # c^2/(tau^4 (c-1)^3)
        assert q.gamma_bar == 1.0


class TestZeroForms:
    def test_registry(self):
        names = zero_forms_list()
        assert len(names) == 4
        sample_fields = {f.name for f in fields(QuadFormSample)}
        for name in names:
            assert name in sample_fields

    def test_zero_means_monte_carlo(self):
        d, trials = 1000, 500
        cfg = ModelConfig(d=d, n_trn=2 * d, n_tst=2 * d, theta_trn=1.0,
                          theta_tst=1.0, tau_a_trn=1.0, tau_a_tst=1.0,
                          tau_eps_trn=1.0, mu=1.0)
        args = [(cfg, 1.0, 41, 0, t) for t in range(trials)]
        samples = map_trials(_probe_trial, args)
        for name in zero_forms_list():
            values = np.asarray([getattr(s, name) for s in samples])
            stderr = values.std(ddof=1) / np.sqrt(trials)
            assert abs(values.mean()) <= 3 * stderr, name


def test_sampled_gamma_recomposes_exactly():
    cfg = ModelConfig(d=60, n_trn=90, n_tst=90, theta_trn=1.7, theta_tst=1.0,
                      tau_a_trn=1.0, tau_a_tst=1.0, tau_eps_trn=0.5, mu=0.9)
    s = measure_quad_forms(cfg, cfg.mu, 5)
    assert s.gamma == 1.7 ** 2 * s.t_sq * s.k_sq + s.xi ** 2
