"""Marchenko-Pastur spectral quantities in closed form.

The Stieltjes transform of the MP law with shape c and its first two
derivatives are evaluated on the real axis left of the support.  From them,
`spectral_moments` produces the eigenvalue functionals that the quadratic
form and risk modules consume.

Conventions.  A is d x n with i.i.d. entries of variance tau^2 / d and
c = d / n.  `lam` below denotes a uniformly random eigenvalue of A A^T,
including the d - n exact zeros in the overparameterized regime c > 1.
The inverse moments inv_k = E[1 / (lam + mu^2)^k] then describe a random
nonzero eigenvalue of the augmented Gram [A mu*I][A mu*I]^T, whose zero
modes sit at exactly mu^2.  With this pairing the identities

    ratio1    = E[lam / (lam + mu^2)]      = 1 - mu^2 * inv1
    ratio1_sq = E[lam / (lam + mu^2)^2]    = inv1 - mu^2 * inv2
    ratio2_sq = E[lam^2 / (lam + mu^2)^2]  = ratio1 - mu^2 * ratio1_sq

hold exactly in both regimes.  All values are the leading-order (d -> oo)
limits; o(1/d) corrections are dropped throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import MuZeroDivergent, OutOfDomain, RegimeBoundary

REGIME_WINDOW = 0.02


@dataclass(frozen=True)
class ShapeParams:
    """Aspect ratio, bulk scale and ridge parameter of one spectral setup."""

    c: float
    tau: float
    mu: float

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError("c must be > 0")
        if self.tau <= 0:
            raise ValueError("tau must be > 0")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")


@dataclass(frozen=True)
class SpectralMoments:
    """Closed-form eigenvalue functionals for one (c, tau, mu) triple."""

    inv1: float       # E[1/(lam + mu^2)]
    inv2: float       # E[1/(lam + mu^2)^2]
    inv3: float       # E[1/(lam + mu^2)^3]
    ratio1: float     # E[lam/(lam + mu^2)]
    ratio1_sq: float  # E[lam/(lam + mu^2)^2]
    ratio2_sq: float  # E[lam^2/(lam + mu^2)^2]
    regime: str       # "under" (c < 1) or "over" (c > 1)


# Below this |z| the derivative closed forms cancel catastrophically in
# doubles (the z^-2 / z^-3 poles nearly annihilate); switch to mpmath with
# enough working digits to absorb the loss.
_SMALL_Z = 0.05


def _workdps(z: float) -> int:
    # 3.5 digits lost per decade of |z| in the z^-3 pole cancellation
    return min(1200, 30 + int(3.5 * max(0.0, -math.log10(abs(z)))))


def mp_stieltjes(z: float, c: float) -> float:
    """Stieltjes transform m_c(z) = E_MP(c)[1/(lam - z)] for real z < 0."""
    if z >= 0:
        raise OutOfDomain(f"z must be < 0, got {z}")
    if c <= 0:
        raise OutOfDomain("c must be > 0")
    if abs(z) < _SMALL_Z:
        from mpmath import mp, mpf, sqrt

        with mp.workdps(_workdps(z)):
            zm, cm = mpf(z), mpf(c)
            disc = (1 - zm - cm) ** 2 - 4 * cm * zm
            return float((1 - zm - cm - sqrt(disc)) / (2 * zm * cm))
    disc = (1.0 - z - c) ** 2 - 4.0 * c * z
    return (1.0 - z - c - math.sqrt(disc)) / (2.0 * z * c)


def mp_stieltjes_d1(z: float, c: float) -> float:
    """First derivative m_c'(z) = E[1/(lam - z)^2], z < 0."""
    if z >= 0:
        raise OutOfDomain(f"z must be < 0, got {z}")
    if abs(z) < _SMALL_Z:
        from mpmath import mp, mpf, sqrt

        with mp.workdps(_workdps(z)):
            zm, cm = mpf(z), mpf(c)
            r = sqrt(-4 * cm * zm + (1 - cm - zm) ** 2)
            val = (cm - zm + r - 1) * (cm + zm + r - 1) / (4 * cm * zm ** 2 * r)
            return float(val)
    r = math.sqrt(-4.0 * c * z + (1.0 - c - z) ** 2)
    return (c - z + r - 1.0) * (c + z + r - 1.0) / (4.0 * c * z ** 2 * r)


def mp_stieltjes_d2(z: float, c: float) -> float:
    """Second derivative m_c''(z) = E[2/(lam - z)^3], z < 0."""
    if z >= 0:
        raise OutOfDomain(f"z must be < 0, got {z}")
    if abs(z) < _SMALL_Z:
        from mpmath import mp, mpf, sqrt

        with mp.workdps(_workdps(z)):
            zm, cm = mpf(z), mpf(c)
            rad = -4 * cm * zm + (1 - cm - zm) ** 2
            first = (zm * (cm + 1) * (zm ** 2 + 3 * (cm - 1) ** 2)
                     - 3 * zm ** 2 * (cm ** 2 + 1) - (cm - 1) ** 4) / (cm * zm ** 3 * rad ** mpf(1.5))
            second = (cm - 1) * (2 * zm * (cm + 1) - zm ** 2 - (cm - 1) ** 2) / (cm * zm ** 3 * rad)
            return float(first + second)
    rad = -4.0 * c * z + (1.0 - c - z) ** 2
    first = (z * (c + 1.0) * (z ** 2 + 3.0 * (c - 1.0) ** 2)
             - 3.0 * z ** 2 * (c ** 2 + 1.0) - (c - 1.0) ** 4) / (c * z ** 3 * rad ** 1.5)
    second = (c - 1.0) * (2.0 * z * (c + 1.0) - z ** 2 - (c - 1.0) ** 2) / (c * z ** 3 * rad)
    return first + second


def mp_support(c: float) -> tuple[float, float]:
    """Support edges [(1 - sqrt(c))^2, (1 + sqrt(c))^2] of the MP(c) bulk."""
    return (1.0 - math.sqrt(c)) ** 2, (1.0 + math.sqrt(c)) ** 2


def mp_density(x: float, c: float) -> float:
    """Continuous MP(c) density at x (the point mass at 0 for c > 1 excluded)."""
    lo, hi = mp_support(c)
    if x <= lo or x >= hi:
        return 0.0
    return math.sqrt((hi - x) * (x - lo)) / (2.0 * math.pi * c * x)


def mp_cdf(x: float, c: float) -> float:
    """CDF of the MP(c) law including the (1 - 1/c) atom at 0 for c > 1."""
    from scipy.integrate import quad

    atom = max(0.0, 1.0 - 1.0 / c)
    lo, hi = mp_support(c)
    if x < 0:
        return 0.0
    if x <= lo:
        return atom
    val, _ = quad(mp_density, lo, min(x, hi), args=(c,), limit=200)
    return min(1.0, atom + val)


def bbp_top_eigenvalue(ell: float, c: float) -> float:
    """Limiting top eigenvalue of the sample covariance of N(0, I + ell*u*u^T)
    data at aspect ratio c in (0, 1): the spike escapes the bulk above the
    threshold ell = 1 + sqrt(c), otherwise it sticks to the bulk edge."""
    if not 0.0 < c < 1.0:
        raise OutOfDomain("c must be in (0, 1)")
    if ell <= 0:
        raise OutOfDomain("ell must be > 0")
    if ell > 1.0 + math.sqrt(c):
        return ell + c * ell / (ell - 1.0)
    return (1.0 + math.sqrt(c)) ** 2


def _check_regime(c: float) -> str:
    if abs(c - 1.0) < REGIME_WINDOW:
        raise RegimeBoundary(f"|c - 1| must be >= {REGIME_WINDOW}, got c={c}")
    return "under" if c < 1.0 else "over"


def spectral_moments(p: ShapeParams) -> SpectralMoments:
    """Evaluate all closed-form eigenvalue functionals at (c, tau, mu).

    c < 1: lam = (tau^2/c) * lam_MP(c); all d eigenvalues are in the bulk.
    c > 1: a 1/c fraction follows tau^2 * lam_MP(1/c) and a 1 - 1/c fraction
    is exactly zero, which places the corresponding augmented eigenvalues at
    mu^2.  At mu = 0 the overparameterized inverse moments are infinite.
    """
    c, tau, mu = p.c, p.tau, p.mu
    regime = _check_regime(c)
    t2 = tau * tau
    if mu * mu == 0.0:  # includes subnormal mu whose square underflows
        if regime == "over":
            raise MuZeroDivergent("inverse moments diverge at mu=0 for c>1")
        # E_MP(q)[lam^-1] = 1/(1-q), [lam^-2] = 1/(1-q)^3, [lam^-3] = (1+q)/(1-q)^5
        inv1 = c / (t2 * (1.0 - c))
        inv2 = c ** 2 / (t2 ** 2 * (1.0 - c) ** 3)
        inv3 = c ** 3 * (1.0 + c) / (t2 ** 3 * (1.0 - c) ** 5)
        return SpectralMoments(inv1=inv1, inv2=inv2, inv3=inv3, ratio1=1.0,
                               ratio1_sq=inv1, ratio2_sq=1.0, regime=regime)
    m2 = mu * mu
    if regime == "under":
        z0 = -c * m2 / t2
        inv1 = (c / t2) * mp_stieltjes(z0, c)
        inv2 = (c ** 2 / t2 ** 2) * mp_stieltjes_d1(z0, c)
        inv3 = (c ** 3 / (2.0 * t2 ** 3)) * mp_stieltjes_d2(z0, c)
    else:
        z1 = -m2 / t2
        q = 1.0 / c
        bulk1 = mp_stieltjes(z1, q) / t2
        bulk2 = mp_stieltjes_d1(z1, q) / t2 ** 2
        bulk3 = mp_stieltjes_d2(z1, q) / (2.0 * t2 ** 3)
        w = 1.0 - q
        inv1 = q * bulk1 + w / m2
        inv2 = q * bulk2 + w / m2 ** 2
        inv3 = q * bulk3 + w / m2 ** 3
    ratio1 = 1.0 - m2 * inv1
    ratio1_sq = inv1 - m2 * inv2
    ratio2_sq = ratio1 - m2 * ratio1_sq
    return SpectralMoments(inv1=inv1, inv2=inv2, inv3=inv3, ratio1=ratio1,
                           ratio1_sq=ratio1_sq, ratio2_sq=ratio2_sq, regime=regime)
