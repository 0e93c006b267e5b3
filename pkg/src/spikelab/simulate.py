"""Monte Carlo engine: sample spiked datasets, solve the two regression
problems, measure empirical risks and the helper quadratic forms.

Layout conventions.  Data are stored in the row-sample layout: X = Z + A is
n x d with rows as points and Z = theta * v u^T.  The quadratic-form probes
convert to the transposed augmented layout (A' = A^T of shape d x n,
A_hat = [A'  mu*I_d]) internally.

Determinism.  Every randomized operation takes an explicit seed; per-trial
seeds are derived by a counter-based split (seed_root, trial, stream), so
any single trial is reproducible in isolation and results are independent
of worker count and execution order.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.sparse.linalg import svds

from .errors import InvalidConfig
from .risk import ModelConfig

SeedLike = int | tuple

_TRAIN_STREAM = 0
_TEST_STREAM = 1


@dataclass(frozen=True)
class DatasetInstance:
    """One sampled realization of the spiked data model (immutable)."""

    z: np.ndarray          # (n, d) rank-one spike theta * v u^T
    a: np.ndarray          # (n, d) bulk
    x: np.ndarray          # z + a
    y: np.ndarray          # (n,) targets
    u: np.ndarray          # (d,) unit spike direction
    v: np.ndarray          # (n,) unit left factor
    beta_star: np.ndarray  # (d,) true coefficients
    eps: np.ndarray        # (n,) label noise


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean with its standard error and seed lineage."""

    mean: float
    stderr: float
    trials: int
    seed_root: int


@dataclass(frozen=True)
class QuadFormSample:
    """One sampled set of helper quadratic forms in the augmented layout."""

    h_sq: float
    k_sq: float
    t_sq: float
    xi: float
    gamma: float
    k_aa_k: float
    eps_kk: float
    eps_tt: float
    eps_aa: float
    eps_ah_t: float
    eps_aakk: float
    zero_k_pinv_h: float
    zero_eps_k_t_eps: float
    zero_eps_pinv_pinv_k_t_eps: float
    zero_eps_pinv_h_k_eps: float


def rng_for(seed: SeedLike) -> np.random.Generator:
    """Deterministic generator from an integer seed or a split path tuple."""
    return np.random.default_rng(seed)


def default_workers() -> int:
    env = os.environ.get("SPIKELAB_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _unit(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x)


def gen_instance(cfg: ModelConfig, target: str, seed: SeedLike) -> DatasetInstance:
    """Sample one training instance of the configured data model.

    Draw order is fixed (u, w, v, A, eps) so instances are bit-reproducible
    for a given seed.  beta_star is built from its norm and alignment:
    beta = (beta . u) u + sqrt(|beta|^2 - (beta . u)^2) w with w a uniform
    unit vector orthogonalized against u.
    """
    cfg.validate()
    if target not in ("so", "spn"):
        raise InvalidConfig(f"target must be 'so' or 'spn', got {target!r}")
    d, n = cfg.d, cfg.n_trn
    rng = rng_for(seed)
    u = _unit(rng.standard_normal(d))
    w = rng.standard_normal(d)
    w = _unit(w - (w @ u) * u)
    residual_sq = cfg.beta_norm_sq - cfg.beta_dot_u ** 2
    beta_star = cfg.beta_dot_u * u + np.sqrt(max(residual_sq, 0.0)) * w
    v = _unit(rng.standard_normal(n))
    a = rng.standard_normal((n, d)) * (cfg.tau_a_trn / np.sqrt(d))
    eps = rng.standard_normal(n) * cfg.tau_eps_trn
    z = cfg.theta_trn * np.outer(v, u)
    x = z + a
    y = (z if target == "so" else x) @ beta_star + eps
    return DatasetInstance(z=z, a=a, x=x, y=y, u=u, v=v, beta_star=beta_star, eps=eps)


def _gram_solve(g: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    return cho_solve(cho_factor(g, lower=True, overwrite_a=True, check_finite=False),
                     rhs, check_finite=False)


def solve_so(x: np.ndarray, y: np.ndarray, mu: float) -> np.ndarray:
    """Ridge (mu > 0) or minimum-norm least-squares (mu = 0) coefficients.

    Solved through the Gram of the row-augmented system [X; mu*I] on the
    smaller side, which coincides with the ridge normal equations; falls
    back to an SVD least-squares solve if the Gram factorization fails.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = x.shape
    m2 = mu * mu
    try:
        if d <= n:
            g = x.T @ x
            g[np.diag_indices_from(g)] += m2
            return _gram_solve(g, x.T @ y)
        g = x @ x.T
        g[np.diag_indices_from(g)] += m2
        return x.T @ _gram_solve(g, y)
    except np.linalg.LinAlgError:
        if mu == 0.0:
            return np.linalg.lstsq(x, y, rcond=None)[0]
        stacked = np.vstack([x, mu * np.eye(d)])
        rhs = np.concatenate([y, np.zeros(d)])
        return np.linalg.lstsq(stacked, rhs, rcond=None)[0]


def solve_spn(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution X+ y."""
    return solve_so(x, y, 0.0)


def empirical_risk(beta: np.ndarray, cfg: ModelConfig, target: str,
                   test_seed: SeedLike, u: np.ndarray,
                   beta_star: np.ndarray) -> float:
    """Instance-specific test risk on a freshly sampled test set.

    The spike direction u and the true coefficients are carried over from
    the training instance; v_tst and the test bulk are drawn fresh.
    """
    rng = rng_for(test_seed)
    n_tst, d = cfg.n_tst, cfg.d
    v_tst = _unit(rng.standard_normal(n_tst))
    a_tst = rng.standard_normal((n_tst, d)) * (cfg.tau_a_tst / np.sqrt(d))
    z_beta = cfg.theta_tst * (beta_star @ u) * v_tst          # Z_tst beta_star
    if target == "so":
        resid = z_beta - (cfg.theta_tst * (beta @ u) * v_tst + a_tst @ beta)
    else:
        diff = beta_star - beta
        resid = cfg.theta_tst * (diff @ u) * v_tst + a_tst @ diff
    return float(resid @ resid) / n_tst


def _risk_trial(args) -> float:
    cfg, target, mu, seed_root, trial = args
    inst = gen_instance(cfg, target, (seed_root, trial, _TRAIN_STREAM))
    if target == "so":
        beta = solve_so(inst.x, inst.y, mu)
    else:
        beta = solve_spn(inst.x, inst.y)
    return empirical_risk(beta, cfg, target, (seed_root, trial, _TEST_STREAM),
                          inst.u, inst.beta_star)


def _limit_worker_threads() -> None:
    try:
        from threadpoolctl import threadpool_limits

        global _WORKER_THREAD_LIMIT
        _WORKER_THREAD_LIMIT = threadpool_limits(limits=1)
    except ImportError:
        pass


def _run_serial(worker, args_list: list) -> list:
    # single-threaded BLAS, matching the pool workers bit for bit
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return [worker(a) for a in args_list]
    with threadpool_limits(limits=1):
        return [worker(a) for a in args_list]


def map_trials(worker, args_list: list, workers: int | None = None) -> list:
    """Run independent trials, in a process pool when workers > 1.

    Results are returned in argument order regardless of scheduling, and all
    execution paths run the linear algebra single-threaded per trial, so the
    output is bit-identical for any worker count.  Falls back to serial
    execution if the pool dies.
    """
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(args_list) <= 1:
        return _run_serial(worker, args_list)
    chunk = max(1, len(args_list) // (workers * 4))
    try:
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn"),
                                 initializer=_limit_worker_threads) as ex:
            return list(ex.map(worker, args_list, chunksize=chunk))
    except BrokenProcessPool:
        return _run_serial(worker, args_list)


def monte_carlo_risk(cfg: ModelConfig, target: str, mu: float, trials: int,
                     seed_root: int, workers: int | None = None) -> MonteCarloEstimate:
    """Mean and standard error of the empirical risk over i.i.d. trials.

    mu is the solver regularization for the signal-only target; the
    signal-plus-noise solver is always minimum-norm.
    """
    if trials < 2:
        raise InvalidConfig("trials must be >= 2")
    args = [(cfg, target, mu, seed_root, t) for t in range(trials)]
    vals = np.asarray(map_trials(_risk_trial, args, workers))
    return MonteCarloEstimate(mean=float(vals.mean()),
                              stderr=float(vals.std(ddof=1) / np.sqrt(trials)),
                              trials=trials, seed_root=int(seed_root))


def measure_quad_forms(cfg: ModelConfig, mu: float, seed: SeedLike) -> QuadFormSample:
    """Sample every helper quadratic form for one augmented-layout instance.

    Works through Gram solves on the smaller side instead of an explicit
    pseudoinverse:  with G = A'A'^T + mu^2 I all forms reduce to inner
    products of G^{-1}u, G^{-1}A'v and G^{-1}A'eps.  At mu = 0 in the
    overparameterized regime the n x n Gram A'^T A' is used instead and the
    kernel-projector forms vanish identically.
    """
    cfg.validate()
    d, n = cfg.d, cfg.n_trn
    rng = rng_for(seed)
    # same draw order as gen_instance, without materializing Z, X and y
    u = _unit(rng.standard_normal(d))
    rng.standard_normal(d)  # beta_star direction, unused by the probes
    v = _unit(rng.standard_normal(n))
    a = (rng.standard_normal((n, d)) * (cfg.tau_a_trn / np.sqrt(d))).T  # d x n
    eps = rng.standard_normal(n) * cfg.tau_eps_trn
    theta = cfg.theta_trn
    av = a @ v
    aeps = a @ eps
    if mu > 0.0 or d < n:
        g = a @ a.T
        g[np.diag_indices_from(g)] += mu * mu
        cf = cho_factor(g, lower=True, overwrite_a=True, check_finite=False)
        zu = cho_solve(cf, u, check_finite=False)
        zv = cho_solve(cf, av, check_finite=False)
        ze = cho_solve(cf, aeps, check_finite=False)
        h_sq = float(zv @ zv)
        k_sq = float(u @ zu)
        t_sq = 1.0 - float(av @ zv)
        t_eps = float(v @ eps) - float(zv @ aeps)
        k_aa_k = float(zu @ zu)
        k_eps = float(aeps @ zu)
        eps_aa = float(ze @ ze)
        xi = 1.0 + theta * float(av @ zu)
        zeu = float(ze @ zu)
        zev = float(ze @ zv)
        zero1 = float(zu @ zv)
    else:
        m = a.T @ a
        cf = cho_factor(m, lower=True, overwrite_a=True, check_finite=False)
        ku = cho_solve(cf, a.T @ u, check_finite=False)    # A+ u
        mv = cho_solve(cf, v, check_finite=False)
        me = cho_solve(cf, eps, check_finite=False)
        h_sq = float((a @ mv) @ (a @ mv))
        k_sq = float(ku @ ku)
        t_sq = 0.0
        t_eps = 0.0
        k_aa_k = float(ku @ cho_solve(cf, ku, check_finite=False))
        k_eps = float(eps @ ku)
        eps_aa = float(eps @ me)
        xi = 1.0 + theta * float(v @ ku)
        zeu = float(me @ ku)     # eps^T A_hat+ A_hat+^T k
        zev = float(me @ v)      # eps^T A_hat+ h^T
        zero1 = float(ku @ mv)
    gamma = theta ** 2 * t_sq * k_sq + xi ** 2
    return QuadFormSample(
        h_sq=h_sq, k_sq=k_sq, t_sq=t_sq, xi=xi, gamma=gamma, k_aa_k=k_aa_k,
        eps_kk=k_eps ** 2, eps_tt=t_eps ** 2, eps_aa=eps_aa,
        eps_ah_t=zev * t_eps, eps_aakk=zeu * k_eps,
        zero_k_pinv_h=zero1, zero_eps_k_t_eps=k_eps * t_eps,
        zero_eps_pinv_pinv_k_t_eps=zeu * t_eps,
        zero_eps_pinv_h_k_eps=zev * k_eps)


def bulk_spectrum(d: int, n: int, tau: float, seed: SeedLike) -> np.ndarray:
    """Sorted eigenvalues of the MP-normalized bulk Gram (c / tau^2) A^T A
    for one sampled n x d bulk matrix A with entry variance tau^2 / d."""
    rng = rng_for(seed)
    a = rng.standard_normal((n, d)) * (tau / np.sqrt(d))
    g = (a.T @ a) * (d / n / tau ** 2)
    return np.sort(np.linalg.eigvalsh(g))


def spiked_wishart_top_eigenvalue(ell: float, c: float, n: int, seed: SeedLike) -> float:
    """Largest eigenvalue of the sample covariance (1/n) X^T X for rows drawn
    from a spiked population whose covariance has top eigenvalue ell along a
    random direction u (and 1 elsewhere), via a rank-one reshaping of a
    standard Gaussian matrix and an iterative top singular value."""
    if ell <= 0:
        raise InvalidConfig("ell must be > 0")
    d = int(round(c * n))
    rng = rng_for(seed)
    g = rng.standard_normal((n, d))
    u = _unit(rng.standard_normal(d))
    x = g + (np.sqrt(ell) - 1.0) * np.outer(g @ u, u)
    v0 = np.full(min(n, d), 1.0 / np.sqrt(min(n, d)))
    s = svds(x, k=1, v0=v0, return_singular_vectors=False)
    return float(s[0] ** 2 / n)
