"""Closed-form generalization risks for the two spiked regression targets.

`risk_so` evaluates the regularized signal-only risk (bias + two variance
blocks, assembled from the T1/T2/gamma combinators), `risk_so_unregularized`
its mu = 0 reduction, and `risk_spn` the unregularized signal-plus-noise
risk with its finite-size spike correction.  All formulas are leading order:
o(1/d) remainders are dropped and absorbed by the statistical tolerances of
the verification suite.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import InvalidConfig, NonZeroMu, RegimeBoundary
from .mp import REGIME_WINDOW
from .quadforms import combinators


@dataclass(frozen=True)
class ModelConfig:
    """All scalar parameters of one spiked-regression experiment.

    The target coefficient vector enters only through its norm and its
    alignment with the spike direction, so beta_star itself is never stored.
    """

    d: int
    n_trn: int
    n_tst: int
    theta_trn: float
    theta_tst: float
    tau_a_trn: float
    tau_a_tst: float
    tau_eps_trn: float
    mu: float
    beta_norm_sq: float = 1.0
    beta_dot_u: float = 0.0

    @property
    def c(self) -> float:
        return self.d / self.n_trn

    def validate(self) -> None:
        if min(self.d, self.n_trn, self.n_tst) < 1:
            raise InvalidConfig("d, n_trn and n_tst must be >= 1")
        if self.tau_a_trn <= 0 or self.tau_a_tst < 0:
            raise InvalidConfig("tau_a_trn must be > 0 and tau_a_tst >= 0")
        if self.tau_eps_trn < 0 or self.mu < 0:
            raise InvalidConfig("tau_eps_trn and mu must be >= 0")
        if self.theta_trn < 0 or self.theta_tst < 0:
            raise InvalidConfig("spike strengths must be >= 0")
        if self.beta_norm_sq < 0:
            raise InvalidConfig("beta_norm_sq must be >= 0")
        if self.beta_dot_u ** 2 > self.beta_norm_sq * (1 + 1e-12):
            raise InvalidConfig("(beta . u)^2 cannot exceed |beta|^2")

    def assumption_warnings(self) -> list[str]:
        """Hypothesis-window checks: 1 << tau^2 << d and theta^2/tau^2 << n.

        Violations do not invalidate the computation (the standard
        double-descent settings sit outside the window and still match
        Monte Carlo well); they flag reduced finite-size accuracy.
        """
        msgs = []
        for name, tau in (("tau_a_trn", self.tau_a_trn), ("tau_a_tst", self.tau_a_tst)):
            if tau > 0 and not 1.0 <= tau * tau <= self.d:
                msgs.append(f"{name}^2 = {tau * tau:g} outside [1, d] window")
        if self.tau_a_trn > 0 and self.theta_trn ** 2 / self.tau_a_trn ** 2 > self.n_trn:
            msgs.append("theta_trn^2 / tau_a_trn^2 exceeds n_trn")
        if self.tau_a_tst > 0 and self.theta_tst ** 2 / self.tau_a_tst ** 2 > self.n_tst:
            msgs.append("theta_tst^2 / tau_a_tst^2 exceeds n_tst")
        return msgs

    def with_updates(self, **kwargs) -> "ModelConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class RiskBreakdown:
    """Additive decomposition of one closed-form risk value."""

    bias: float
    variance_a: float
    variance_a_eps: float
    adjustment: float
    total: float
    regime: str

    @classmethod
    def assemble(cls, bias: float, variance_a: float, variance_a_eps: float,
                 adjustment: float, regime: str) -> "RiskBreakdown":
        return cls(bias=bias, variance_a=variance_a, variance_a_eps=variance_a_eps,
                   adjustment=adjustment,
                   total=bias + variance_a + variance_a_eps + adjustment,
                   regime=regime)


def _regime(c: float, mu: float) -> str:
    if abs(c - 1.0) < REGIME_WINDOW and mu == 0.0:
        raise RegimeBoundary(f"mu=0 requires |c - 1| >= {REGIME_WINDOW}, got c={c}")
    return "under" if c < 1.0 else "over"


def risk_so(cfg: ModelConfig) -> RiskBreakdown:
    """Instance-specific risk of the regularized signal-only problem.

    Exposes the three closed-form blocks separately: the bias, the variance
    induced by the training bulk alone, and the variance further induced by
    the label noise.
    """
    cfg.validate()
    c = cfg.c
    regime = _regime(c, cfg.mu)
    th, tht = cfg.theta_trn, cfg.theta_tst
    t2 = cfg.tau_a_trn ** 2
    t4 = t2 * t2
    e2 = cfg.tau_eps_trn ** 2
    s2 = cfg.tau_a_tst ** 2
    bu2 = cfg.beta_dot_u ** 2
    comb = combinators(c, cfg.mu, cfg.tau_a_trn, th)
    t1c, t2c, g = comb.t1, comb.t2, comb.gamma_bar
    d = cfg.d
    bias = tht ** 2 / cfg.n_tst / g ** 2 * (
        bu2 + e2 / (2.0 * t4) * (th ** 2 * c + t2) * (t2c - 1.0))
    var_a = th ** 2 * s2 / d / g ** 2 * bu2 * (
        c * (th ** 2 + t2) / (2.0 * t4) * (t2c - 1.0))
    var_ae = (e2 * s2 / (2.0 * t2)
              * (1.0 + c * th ** 2 / t2 * t2c / (d * g ** 2) * ((c + 1.0) * th ** 2 / t2 + 1.0))
              * (t2c - 1.0)
              - c ** 2 * (c + 1.0) * th ** 4 * e2 * s2 / (d * t2 * g ** 2 * t1c ** 2)
              - 2.0 * c ** 2 * th ** 2 * e2 * s2 / (d * g)
              * (1.0 / t1c ** 2 - c * cfg.mu ** 2 / t1c ** 3))
    return RiskBreakdown.assemble(bias, var_a, var_ae, 0.0, regime)


def risk_so_unregularized(cfg: ModelConfig) -> RiskBreakdown:
    """Signal-only risk at mu = 0 in its simplified closed form.

    The configured mu is ignored; this is the mu -> 0 limit of `risk_so`
    and serves as its independent cross-check.  The unregularized form has
    a single Bias + Variance split, so the whole variance block is reported
    in variance_a and variance_a_eps stays zero.
    """
    cfg.validate()
    c = cfg.c
    if abs(c - 1.0) < REGIME_WINDOW:
        raise RegimeBoundary(f"|c - 1| must be >= {REGIME_WINDOW}, got c={c}")
    regime = "under" if c < 1.0 else "over"
    th2 = cfg.theta_trn ** 2
    t2 = cfg.tau_a_trn ** 2
    t4 = t2 * t2
    e2 = cfg.tau_eps_trn ** 2
    s2 = cfg.tau_a_tst ** 2
    bu2 = cfg.beta_dot_u ** 2
    d = cfg.d
    if regime == "under":
        bias = cfg.theta_tst ** 2 / (cfg.n_tst * (th2 * c + t2) ** 2) * (
            t4 * bu2 + e2 * (th2 * c ** 2 + t2 * c) / (1.0 - c))
        variance = (s2 * e2 * c / (t2 * (1.0 - c))
                    + (bu2 * (th2 + t2) / (th2 * c + t2) - e2 / t2)
                    * th2 * s2 / (d * (t2 + th2 * c)) * c ** 2 / (1.0 - c))
    else:
        bias = cfg.theta_tst ** 2 / (cfg.n_tst * (th2 + t2) ** 2) * (
            t4 * bu2 + e2 * (th2 * c + t2) / (c - 1.0))
        variance = (s2 * e2 / (t2 * (c - 1.0))
                    + (bu2 - e2 / t2) * th2 * s2 / (d * (t2 + th2)) * c / (c - 1.0))
    return RiskBreakdown.assemble(bias, variance, 0.0, 0.0, regime)


def risk_spn(cfg: ModelConfig) -> RiskBreakdown:
    """Instance-specific risk of the unregularized signal-plus-noise problem.

    The breakdown follows the bias / variance / adjustment split of the
    proof: variance_a carries the part of |beta|^2 recovered by the
    minimum-norm solution, variance_a_eps the noise-carried part, and
    adjustment the remaining test-bulk cross terms.
    """
    cfg.validate()
    if cfg.mu != 0.0:
        raise NonZeroMu("the signal-plus-noise risk is unregularized (mu must be 0)")
    c = cfg.c
    regime = _regime(c, 0.0)
    th2 = cfg.theta_trn ** 2
    t2 = cfg.tau_a_trn ** 2
    e2 = cfg.tau_eps_trn ** 2
    s2 = cfg.tau_a_tst ** 2
    bn2 = cfg.beta_norm_sq
    bu2 = cfg.beta_dot_u ** 2
    d = cfg.d
    if regime == "under":
        bias = cfg.theta_tst ** 2 * e2 * c / (cfg.n_tst * (th2 * c + t2) * (1.0 - c))
        var_a = s2 * bn2 / d
        var_ae = (s2 / t2) * (1.0 - th2 * c / (d * (th2 * c + t2))) * c * e2 / (1.0 - c)
        adjustment = -s2 * bn2 / d
    else:
        bias = cfg.theta_tst ** 2 / (cfg.n_tst * (th2 + t2) ** 2) * (
            t2 * (1.0 - 1.0 / c) * (t2 * bu2 + th2 * bn2 / d)
            + e2 * (th2 * c + t2) / (c - 1.0))
        var_a = s2 * bn2 / (c * d)
        var_ae = (s2 * e2 / t2) * (1.0 - th2 * c / (d * (th2 + t2))) / (c - 1.0)
        adjustment = (1.0 - 2.0 / c) * s2 * bn2 / d
    return RiskBreakdown.assemble(bias, var_a, var_ae, adjustment, regime)


def risk_isotropic_limit(c: float, tau_eps: float, beta_norm_sq: float) -> float:
    """Unspiked isotropic ridgeless risk: tau_eps^2 c/(1-c) below the
    interpolation threshold, |beta|^2 (1 - 1/c) + tau_eps^2/(c-1) above."""
    if abs(c - 1.0) < REGIME_WINDOW:
        raise RegimeBoundary(f"|c - 1| must be >= {REGIME_WINDOW}, got c={c}")
    if c < 1.0:
        return tau_eps ** 2 * c / (1.0 - c)
    return beta_norm_sq * (1.0 - 1.0 / c) + tau_eps ** 2 / (c - 1.0)


def spn_asymptotic_no_correction(cfg: ModelConfig) -> float:
    """The spike-blind asymptotic signal-plus-noise risk (the reference line
    that the finite-size correction is measured against)."""
    c = cfg.c
    if abs(c - 1.0) < REGIME_WINDOW:
        raise RegimeBoundary(f"|c - 1| must be >= {REGIME_WINDOW}, got c={c}")
    ratio = cfg.tau_a_tst ** 2 / cfg.tau_a_trn ** 2
    if c < 1.0:
        return ratio * cfg.tau_eps_trn ** 2 * c / (1.0 - c)
    return (cfg.beta_norm_sq * (1.0 - 1.0 / c) * cfg.tau_a_tst ** 2 / cfg.d
            + ratio * cfg.tau_eps_trn ** 2 / (c - 1.0))


def spn_spike_correction(theta_trn: float, tau_a_trn: float, tau_eps: float) -> float:
    """Finite-size correction tau_eps^2 theta^2 / (theta^2 + tau^2)^2 added to
    the overparameterized asymptotic risk under the equal-strength scaling
    theta = tau sqrt(n) (stated for tau-normalized units; multiply by
    tau_a_tst^2 for general test scales)."""
    th2 = theta_trn ** 2
    t2 = tau_a_trn ** 2
    if th2 == 0.0 and t2 == 0.0:
        raise ValueError("theta_trn and tau_a_trn cannot both be zero")
    return tau_eps ** 2 * th2 / (th2 + t2) ** 2


def dd_peak_location(tau_a_trn: float, mu: float) -> float:
    """Aspect ratio at which the regularized signal-only risk peaks."""
    t2 = tau_a_trn ** 2
    if t2 == 0.0 and mu == 0.0:
        raise ValueError("tau_a_trn and mu cannot both be zero")
    return t2 / (t2 + mu ** 2)
