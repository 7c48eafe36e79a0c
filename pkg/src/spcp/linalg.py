"""Dense factorization primitives: thin QR, small SVD, randomized SVD,
and leading-singular-triple extraction via power iteration.

All routines operate on 64-bit row-major arrays and are deterministic
given their seed arguments.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError, PowerIterationError
from .validation import as_matrix

__all__ = ["SvdTriplet", "thin_qr", "svd_small", "rand_svd", "leading_triple"]


@dataclass(frozen=True)
class SvdTriplet:
    """Compact SVD ``a = u @ diag(sigma) @ v.T``.

    ``u`` is m-by-r and ``v`` is n-by-r with orthonormal columns;
    ``sigma`` is non-negative and sorted in non-increasing order.
    """

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray

    @property
    def rank(self):
        return self.sigma.shape[0]

    def compose(self):
        """Materialize the m-by-n matrix ``u @ diag(sigma) @ v.T``."""
        return (self.u * self.sigma) @ self.v.T

    def truncate(self, r):
        """Keep the leading ``r`` singular triples."""
        return SvdTriplet(self.u[:, :r].copy(), self.sigma[:r].copy(), self.v[:, :r].copy())


def thin_qr(a):
    """Thin QR factorization ``a = q @ r`` with a deterministic sign convention.

    ``a`` must be m-by-k with m >= k. The returned ``r`` is upper triangular
    with non-negative diagonal, which makes the factorization unique for
    full-column-rank input.
    """
    a = as_matrix(a, "a")
    m, k = a.shape
    if m < k:
        raise DimensionError(f"thin_qr requires m >= k, got shape {a.shape}")
    q, r = np.linalg.qr(a, mode="reduced")
    # Flip signs so diag(r) >= 0.
    signs = np.where(np.diagonal(r) < 0.0, -1.0, 1.0)
    q = q * signs
    r = r * signs[:, None]
    return q, r


def svd_small(a):
    """Full-rank compact SVD of a dense matrix.

    Intended for matrices whose smaller dimension is at most a few
    thousand. Non-convergence of the underlying solver is raised as
    ``NumericalError`` rather than returning garbage.
    """
    a = as_matrix(a, "a")
    try:
        u, sigma, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for shape {a.shape}: {exc}") from exc
    return SvdTriplet(u, sigma, vt.T.copy())


def rand_svd(a, k, oversample=10, power_iters=1, seed=0):
    """Randomized rank-``k`` SVD (Gaussian sketch, subspace power iteration).

    The sketch width is ``k + oversample`` and must not exceed min(m, n).
    Deterministic for a fixed ``seed``. For input of exact rank <= k the
    reconstruction is accurate to ~1e-8 relative; for general input it is
    a near-optimal rank-``k`` approximation.
    """
    a = as_matrix(a, "a")
    m, n = a.shape
    k = int(k)
    oversample = int(oversample)
    power_iters = int(power_iters)
    if k < 1:
        raise DimensionError(f"rand_svd requires k >= 1, got {k}")
    width = k + oversample
    if width > min(m, n):
        raise DimensionError(
            f"sketch width k + oversample = {width} exceeds min(m, n) = {min(m, n)}"
        )
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((n, width))
    y = a @ omega
    q, _ = thin_qr(y)
    for _ in range(power_iters):
        q, _ = thin_qr(a.T @ q)
        q, _ = thin_qr(a @ q)
    b = q.T @ a
    inner = svd_small(b)
    return SvdTriplet((q @ inner.u)[:, :k], inner.sigma[:k].copy(), inner.v[:, :k].copy())


def leading_triple(matvec, rmatvec, m, n, tol=1e-9, max_iter=1000, seed=0, v0=None):
    """Leading singular triple (u, sigma_1, v) of an m-by-n linear operator.

    ``matvec(x)`` applies the operator to an n-vector and ``rmatvec(y)``
    applies its adjoint to an m-vector. Alternating power iteration on
    the operator composed with its adjoint; stops when the sigma estimate
    changes by at most ``tol * max(1, sigma)``. Iteration-cap exhaustion
    raises ``PowerIterationError`` with the best iterate attached.

    ``v0`` seeds the iteration with a known approximate right singular
    vector (warm start); otherwise the start is random from ``seed``.
    """
    m = int(m)
    n = int(n)
    if v0 is not None:
        v = np.asarray(v0, dtype=np.float64).reshape(n).copy()
        nrm = float(np.linalg.norm(v))
        if nrm == 0.0:
            v0 = None
        else:
            v /= nrm
    if v0 is None:
        rng = np.random.default_rng(seed)
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
    u = np.zeros(m)
    sigma = 0.0
    for _ in range(int(max_iter)):
        u = np.asarray(matvec(v), dtype=np.float64).reshape(m)
        s_u = float(np.linalg.norm(u))
        if s_u == 0.0:
            # Operator annihilates v: treat as (numerically) zero.
            u = np.zeros(m)
            u[0] = 1.0
            return u, 0.0, v
        u /= s_u
        w = np.asarray(rmatvec(u), dtype=np.float64).reshape(n)
        s_v = float(np.linalg.norm(w))
        if s_v == 0.0:
            return u, s_u, v
        v = w / s_v
        if abs(s_v - sigma) <= tol * max(1.0, s_v):
            # Re-apply once so (u, sigma, v) is a consistent triple.
            u = np.asarray(matvec(v), dtype=np.float64).reshape(m)
            sigma = float(np.linalg.norm(u))
            if sigma > 0.0:
                u /= sigma
            return u, sigma, v
        sigma = s_v
    raise PowerIterationError(
        f"power iteration did not converge in {max_iter} iterations "
        f"(last sigma = {sigma:.6e})",
        u=u,
        sigma=sigma,
        v=v,
    )
