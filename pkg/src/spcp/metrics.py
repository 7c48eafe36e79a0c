"""Solution-quality scoring: log-likelihood, degrees of freedom, AICc.

The decomposition ``X = L + S + Z`` is scored as a statistical model:
Gaussian residual ``Z``, Laplace entries of ``S``, Laplace singular
values of ``L``. Lower AICc indicates a better fit/complexity balance.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .linalg import svd_small
from .validation import as_matrix

__all__ = ["AiccReport", "degrees_of_freedom", "aicc"]


@dataclass(frozen=True)
class AiccReport:
    """AICc score with its ingredients.

    ``p`` is the total degrees of freedom; ``aicc`` is ``None`` when the
    correction denominator ``mn - p - 1`` is not positive. ``flags``
    records dropped likelihood terms (zero-scale Laplace limits).
    """

    p: float
    loglik: float
    aicc: float | None
    dof_rank: float
    dof_sparse: float
    dof_resid: float
    sigma2_hat: float
    b_hat: float
    bstar_hat: float
    flags: tuple = ()

    def to_dict(self):
        return {
            "p": self.p,
            "loglik": self.loglik,
            "aicc": self.aicc,
            "dof_rank": self.dof_rank,
            "dof_sparse": self.dof_sparse,
            "dof_resid": self.dof_resid,
            "sigma2_hat": self.sigma2_hat,
            "b_hat": self.b_hat,
            "bstar_hat": self.bstar_hat,
            "flags": list(self.flags),
        }


def _numerical_rank_and_nuclear(l, rank_tol):
    sigma = svd_small(l).sigma
    if sigma.size == 0 or sigma[0] <= 0.0:
        return 0, 0.0
    rank = int(np.sum(sigma > rank_tol * sigma[0]))
    return rank, float(np.sum(sigma[:rank]))


def degrees_of_freedom(l, s, x, rank_tol=1e-10, nnz_tol=0.0):
    """Degrees of freedom of a decomposition ``(l, s)`` of data ``x``.

    Returns ``(dof_rank, dof_sparse, dof_resid)``: ``k(m + n - k)`` for
    the rank-k low-rank part, the nonzero count of ``s``, and the
    residual effective degrees of freedom
    ``(||l + s - x||_F^2 / ||x||_F^2) * mn``. ``nnz_tol`` can relax the
    exact-zero test for externally produced sparse components.
    """
    l = as_matrix(l, "l")
    s = as_matrix(s, "s")
    x = as_matrix(x, "x")
    if not l.shape == s.shape == x.shape:
        raise DimensionError(
            f"shapes must agree, got l={l.shape}, s={s.shape}, x={x.shape}"
        )
    x_sq = float(np.sum(x * x))
    if x_sq == 0.0:
        raise ValueError("x is identically zero: residual ratio undefined")
    m, n = x.shape
    rank, _ = _numerical_rank_and_nuclear(l, rank_tol)
    dof_rank = rank * (m + n - rank)
    dof_sparse = int(np.sum(np.abs(s) > nnz_tol))
    resid_sq = float(np.sum((l + s - x) ** 2))
    dof_resid = (resid_sq / x_sq) * m * n
    return dof_rank, dof_sparse, dof_resid


def aicc(l, s, x, rank_tol=1e-10, nnz_tol=0.0):
    """Corrected Akaike information criterion of a decomposition.

    The log-likelihood combines the Gaussian residual term (variance
    ``||X||_F^2 / mn``), a Laplace term for the entries of ``S`` (scale
    ``||S||_1 / mn``), and a Laplace term for the singular values of
    ``L`` (scale ``||L||_* / rank(L)``). Zero-scale terms are dropped
    with a flag rather than producing NaN. ``aicc`` is ``None`` when
    ``mn - p - 1 <= 0``.
    """
    l = as_matrix(l, "l")
    s = as_matrix(s, "s")
    x = as_matrix(x, "x")
    dof_rank, dof_sparse, dof_resid = degrees_of_freedom(
        l, s, x, rank_tol=rank_tol, nnz_tol=nnz_tol
    )
    m, n = x.shape
    mn = m * n
    p = dof_rank + dof_sparse + dof_resid

    sigma2 = float(np.sum(x * x)) / mn
    s_l1 = float(np.sum(np.abs(s)))
    b_hat = s_l1 / mn
    rank, nuc = _numerical_rank_and_nuclear(l, rank_tol)
    bstar_hat = nuc / rank if rank > 0 else 0.0

    flags = []
    resid_sq = float(np.sum((l + s - x) ** 2))
    loglik = -0.5 * mn * math.log(2.0 * math.pi * sigma2) - resid_sq / (2.0 * sigma2)
    if b_hat > 0.0:
        loglik += -mn * math.log(2.0 * b_hat) - s_l1 / (2.0 * b_hat)
    else:
        flags.append("sparse_terms_dropped")
    if bstar_hat > 0.0:
        loglik += -rank * math.log(2.0 * bstar_hat) - nuc / (2.0 * bstar_hat)
    else:
        flags.append("lowrank_terms_dropped")

    denom = mn - p - 1.0
    if denom > 0.0:
        score = 2.0 * (p - loglik) + 2.0 * p * (p + 1.0) / denom
    else:
        score = None
        flags.append("aicc_undefined")
    return AiccReport(
        p=p,
        loglik=loglik,
        aicc=score,
        dof_rank=dof_rank,
        dof_sparse=dof_sparse,
        dof_resid=dof_resid,
        sigma2_hat=sigma2,
        b_hat=b_hat,
        bstar_hat=bstar_hat,
        flags=tuple(flags),
    )
