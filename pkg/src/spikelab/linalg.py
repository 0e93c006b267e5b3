"""Dense linear algebra primitives: SVD pseudoinverse, the augmented ridge
matrix [A  mu*I], and Meyer's closed-form pseudoinverse of a rank-one update.

Everything here is deterministic and pure; matrices are float64 ndarrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GammaNearZero, InvalidMatrix

GAMMA_TOL = 1e-12
PROJECTOR_TOL = 1e-8


@dataclass(frozen=True)
class SvdFactors:
    """Full SVD of a d x m matrix with d <= m: A = U diag(s) V^T."""

    u_basis: np.ndarray        # (d, d) orthogonal
    singular_values: np.ndarray  # (d,) nonnegative, descending
    v_basis: np.ndarray        # (m, d) orthonormal columns

    def reconstruct(self) -> np.ndarray:
        return (self.u_basis * self.singular_values) @ self.v_basis.T


@dataclass(frozen=True)
class MeyerHelpers:
    """Helper quantities for the pseudoinverse of a_hat + theta * u v_hat^T.

    With A = a_hat (shape d x m), u in R^d and v_hat in R^m:
      h_vec = v_hat^T A+        (row, R^d)
      k_vec = A+ u              (R^m)
      s_vec = (I - A A+) u      (R^d)
      t_vec = v_hat^T (I - A+ A)  (row, R^m)
      xi    = 1 + theta v_hat^T A+ u
      gamma = theta^2 |t|^2 |k|^2 + xi^2   (exact, by construction)
      p_vec = -(theta^2 |k|^2 / xi) t_vec^T - theta k_vec
      q_vec = -(theta |t|^2 / xi) k_vec^T A+ - h_vec   (row, R^d)
    """

    h_vec: np.ndarray
    k_vec: np.ndarray
    s_vec: np.ndarray
    t_vec: np.ndarray
    xi: float
    gamma: float
    p_vec: np.ndarray
    q_vec: np.ndarray


def _as_matrix(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidMatrix(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidMatrix("matrix contains non-finite entries")
    return a


def _check_unit(x: np.ndarray, name: str, tol: float = 1e-10) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise InvalidMatrix(f"{name} contains non-finite entries")
    if abs(np.linalg.norm(x) - 1.0) > tol:
        raise InvalidMatrix(f"{name} must have unit norm")
    return x


def pinv(a: np.ndarray, rel_tol: float = 0.0) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values s_i <= cutoff are treated as zero, where cutoff is
    rel_tol * s_max, or max(rows, cols) * eps * s_max when rel_tol == 0.
    """
    a = _as_matrix(a)
    if rel_tol < 0:
        raise InvalidMatrix("rel_tol must be >= 0")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((a.shape[1], a.shape[0]))
    if rel_tol == 0.0:
        rel_tol = max(a.shape) * np.finfo(float).eps
    cutoff = rel_tol * s[0]
    inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    return (vt.T * inv) @ u.T


def augmented_svd(a: np.ndarray, mu: float) -> SvdFactors:
    """SVD of the augmented matrix A_hat = [A  mu*I_d] built from the SVD of A.

    For A of shape d x n the augmented singular values are
    sqrt(sigma_i(A)^2 + mu^2) (all d of them when d <= n; the first n when
    d > n, with the remaining d - n equal to mu), and the left basis is the
    left basis of A.
    """
    a = _as_matrix(a)
    if mu < 0:
        raise InvalidMatrix("mu must be >= 0")
    d, n = a.shape
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    if d <= n:
        s_hat = np.sqrt(s[:d] ** 2 + mu ** 2)
        top = vt[:d].T * (s[:d] / np.where(s_hat > 0, s_hat, 1.0))
        bottom = u * (mu / np.where(s_hat > 0, s_hat, 1.0))
        v_hat = np.vstack([top, bottom])
    else:
        c_block = np.sqrt(s ** 2 + mu ** 2)
        s_hat = np.concatenate([c_block, np.full(d - n, float(mu))])
        top = np.hstack([vt.T * (s / np.where(c_block > 0, c_block, 1.0)),
                         np.zeros((n, d - n))])
        bottom = np.hstack([u[:, :n] * (mu / np.where(c_block > 0, c_block, 1.0)),
                            u[:, n:]])
        v_hat = np.vstack([top, bottom])
    return SvdFactors(u_basis=u, singular_values=s_hat, v_basis=v_hat)


def meyer_helpers(a_hat: np.ndarray, theta: float, u: np.ndarray,
                  v_hat: np.ndarray, rel_tol: float = 0.0) -> MeyerHelpers:
    """Compute all rank-one-update helper quantities from one pseudoinverse."""
    a_hat = _as_matrix(a_hat)
    u = _check_unit(u, "u")
    v_hat = _check_unit(v_hat, "v_hat")
    ap = pinv(a_hat, rel_tol)
    h = v_hat @ ap
    k = ap @ u
    s = u - a_hat @ k
    t = v_hat - h @ a_hat
    xi = 1.0 + theta * float(h @ u)
    t_sq = float(t @ t)
    k_sq = float(k @ k)
    gamma = theta ** 2 * t_sq * k_sq + xi ** 2
    if abs(gamma) < GAMMA_TOL or abs(xi) < GAMMA_TOL:
        raise GammaNearZero(f"gamma={gamma:.3e}, xi={xi:.3e}")
    p = -(theta ** 2 * k_sq / xi) * t - theta * k
    q = -(theta * t_sq / xi) * (k @ ap) - h
    return MeyerHelpers(h_vec=h, k_vec=k, s_vec=s, t_vec=t, xi=xi,
                        gamma=gamma, p_vec=p, q_vec=q)


def rank_one_pinv_update(a: np.ndarray, theta: float, u: np.ndarray,
                         v: np.ndarray, rel_tol: float = 0.0) -> np.ndarray:
    """Pseudoinverse of A + theta * u v^T via Meyer's closed forms.

    Uses the full-row-rank form (u in range(A), built on t and k) when the
    projector residual s vanishes, the full-column-rank form (v in
    range(A^T), built on s and h) when t vanishes, and falls back to a
    direct pseudoinverse of the sum when neither projector is zero.
    """
    a = _as_matrix(a)
    u = _check_unit(u, "u")
    v = _check_unit(v, "v")
    ap = pinv(a, rel_tol)
    if theta == 0.0:
        return ap
    h = v @ ap
    k = ap @ u
    s = u - a @ k
    t = v - h @ a
    xi = 1.0 + theta * float(h @ u)
    if np.linalg.norm(s) <= PROJECTOR_TOL:
        if abs(xi) < GAMMA_TOL:
            raise GammaNearZero(f"xi={xi:.3e}")
        t_sq = float(t @ t)
        k_sq = float(k @ k)
        gamma = theta ** 2 * t_sq * k_sq + xi ** 2
        if abs(gamma) < GAMMA_TOL:
            raise GammaNearZero(f"gamma={gamma:.3e}")
        p = -(theta ** 2 * k_sq / xi) * t - theta * k
        q = -(theta * t_sq / xi) * (k @ ap) - h
        return ap + (theta / xi) * np.outer(t, k @ ap) - (xi / gamma) * np.outer(p, q)
    if np.linalg.norm(t) <= PROJECTOR_TOL:
        if abs(xi) < GAMMA_TOL:
            raise GammaNearZero(f"xi={xi:.3e}")
        s_sq = float(s @ s)
        h_sq = float(h @ h)
        gamma = theta ** 2 * s_sq * h_sq + xi ** 2
        if abs(gamma) < GAMMA_TOL:
            raise GammaNearZero(f"gamma={gamma:.3e}")
        p = -(theta ** 2 * s_sq / xi) * (ap @ h) - theta * k
        q = -(theta * h_sq / xi) * s - h
        return ap + (theta / xi) * np.outer(ap @ h, s) - (xi / gamma) * np.outer(p, q)
    return pinv(a + theta * np.outer(u, v), rel_tol)


def ridge_via_augmented(x: np.ndarray, y: np.ndarray, mu: float) -> np.ndarray:
    """Ridge solution argmin |y - X b|^2 + mu^2 |b|^2 as the min-norm
    least-squares solution of the row-augmented system [X; mu*I] b = [y; 0].

    Reference implementation used by tests; O((n+d) d^2), not for large runs.
    """
    x = _as_matrix(x)
    n, d = x.shape
    stacked = np.vstack([x, mu * np.eye(d)])
    rhs = np.concatenate([np.asarray(y, dtype=float), np.zeros(d)])
    return np.linalg.lstsq(stacked, rhs, rcond=None)[0]
