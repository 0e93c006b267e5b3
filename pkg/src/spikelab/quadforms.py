"""Closed-form expectations of the rank-one-update helper quadratic forms.

All expectations refer to the augmented layout: A is d x n with entry
variance tau_a^2 / d, A_hat = [A  mu*I_d], v_hat = [v; 0] for a unit
v in R^n, u a unit vector in R^d, and eps_hat = [eps; 0] with i.i.d.
noise of variance tau_eps^2.  Values are leading-order limits.

Once the spectral moments are expressed over a uniformly random eigenvalue
of A A^T (zeros included for c > 1, see `mp.spectral_moments`), every form
has a single expression valid in both regimes; the regime branching lives
entirely inside the moment evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import RegimeBoundary
from .mp import REGIME_WINDOW, ShapeParams, spectral_moments


@dataclass(frozen=True)
class TheoryCombinators:
    """The radical T1, ratio T2 and mean gamma entering the closed-form risks."""

    t1: float
    t2: float
    gamma_bar: float


@dataclass(frozen=True)
class QuadFormExpectations:
    """Leading-order expectations of the helper forms at one parameter point."""

    h_sq: float      # E |v_hat^T A_hat+|^2
    k_sq: float      # E |A_hat+ u|^2
    t_sq: float      # E |v_hat^T (I - A_hat+ A_hat)|^2
    xi: float        # E [1 + theta v_hat^T A_hat+ u]  (= 1 exactly)
    gamma_bar: float  # E [theta^2 |t|^2 |k|^2 + xi^2]
    k_aa_k: float    # E [k^T A_hat+ A_hat+^T k]
    eps_kk: float    # E [eps^T k k^T eps]
    eps_tt: float    # E [eps^T t^T t eps]
    eps_aa: float    # E [eps^T A_hat+ A_hat+^T eps]   (the only d-scaled form)
    eps_ah_t: float  # E [eps^T A_hat+ h^T t eps]
    eps_aakk: float  # E [eps^T A_hat+ A_hat+^T k k^T eps]
    regime: str


#: Zero-expectation forms; names match the sampled fields on
#: `simulate.QuadFormSample`.
ZERO_FORM_NAMES = (
    "zero_k_pinv_h",            # k^T A_hat+ h^T
    "zero_eps_k_t_eps",         # eps^T k  *  t eps
    "zero_eps_pinv_pinv_k_t_eps",  # eps^T A_hat+ A_hat+^T k  *  t eps
    "zero_eps_pinv_h_k_eps",    # eps^T A_hat+ h^T  *  k^T eps
)


def zero_forms_list() -> tuple[str, ...]:
    """Identifiers of the four forms with zero expectation."""
    return ZERO_FORM_NAMES


def t1_radical(c: float, tau_a: float, mu: float) -> float:
    """Regime-branched radical T1; the c >= 1 branch swaps two signs under
    the square and carries 4 mu^2 c tau^2 instead of 4 mu^2 c^2 tau^2."""
    t2 = tau_a * tau_a
    m2 = mu * mu
    if c < 1.0:
        return math.sqrt((t2 + m2 * c - c * t2) ** 2 + 4.0 * m2 * c ** 2 * t2)
    return math.sqrt((-t2 + m2 * c + c * t2) ** 2 + 4.0 * m2 * c * t2)


def combinators(c: float, mu: float, tau_a: float, theta_trn: float) -> TheoryCombinators:
    """T1, T2 and the mean gamma entering the regularized signal-only risk.

    Valid for any c > 0 when mu > 0; at mu = 0 the aspect ratio must stay
    outside the RegimeBoundary window around c = 1.
    """
    if tau_a <= 0:
        raise ValueError("tau_a must be > 0")
    if mu * mu == 0.0 and abs(c - 1.0) < REGIME_WINDOW:
        raise RegimeBoundary(f"mu=0 requires |c - 1| >= {REGIME_WINDOW}")
    t2_ = tau_a * tau_a
    t1 = t1_radical(c, tau_a, mu)
    t2 = (mu * mu * c + t2_ + c * t2_) / t1
    gamma_bar = 1.0 + theta_trn ** 2 / (2.0 * t2_ ** 2) * (t2_ + c * t2_ + mu * mu * c - t1)
    return TheoryCombinators(t1=t1, t2=t2, gamma_bar=gamma_bar)


def quad_form_expectations(c: float, mu: float, tau_a: float, tau_eps: float,
                           theta_trn: float, d: int) -> QuadFormExpectations:
    """Evaluate every nonzero helper-form expectation at leading order.

    At mu = 0 the values are the exact-pseudoinverse limits: for c > 1 the
    kernel directions drop out of A_hat+, so t_sq, eps_tt and eps_ah_t are
    exactly zero and k_sq / k_aa_k take finite bulk-only values (which differ
    from the divergent mu -> 0+ limits of the regularized forms).
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if tau_eps < 0:
        raise ValueError("tau_eps must be >= 0")
    t2_ = tau_a * tau_a
    e2 = tau_eps * tau_eps
    regime = "under" if c < 1.0 else "over"
    if mu * mu == 0.0 and c > 1.0:
        if abs(c - 1.0) < REGIME_WINDOW:
            raise RegimeBoundary(f"|c - 1| must be >= {REGIME_WINDOW}")
        ratio1 = 1.0 / c
        ratio1_sq = 1.0 / (t2_ * (c - 1.0))
        ratio2_sq = 1.0 / c
        k_sq = 1.0 / (t2_ * (c - 1.0))
        k_aa_k = c ** 2 / (t2_ ** 2 * (c - 1.0) ** 3)
    else:
        m = spectral_moments(ShapeParams(c=c, tau=tau_a, mu=mu))
        ratio1, ratio1_sq, ratio2_sq = m.ratio1, m.ratio1_sq, m.ratio2_sq
        k_sq = m.inv1
        k_aa_k = m.inv2
    t_sq = 1.0 - c * ratio1
    t1 = t1_radical(c, tau_a, mu)
    return QuadFormExpectations(
        h_sq=c * ratio1_sq,
        k_sq=k_sq,
        t_sq=t_sq,
        xi=1.0,
        gamma_bar=1.0 + theta_trn ** 2 * t_sq * k_sq,
        k_aa_k=k_aa_k,
        eps_kk=e2 * ratio1_sq,
        eps_tt=e2 * (1.0 - 2.0 * c * ratio1 + c * ratio2_sq),
        eps_aa=e2 * d * ratio1_sq,
        eps_ah_t=e2 * c ** 3 * mu * mu * t2_ / t1 ** 3,
        eps_aakk=e2 * c ** 2 * t2_ / t1 ** 3,
        regime=regime,
    )
