"""Marginalized data-fit term for low-rank + sparse recovery.

Minimizing ``0.5 * ||P(L + S - X)||_F^2 + lambda_s * ||S||_1`` over the
sparse component in closed form leaves a smooth Huber-type function of
the low-rank component alone; this module evaluates that function, its
gradient, and the minimizing sparse matrix. ``P`` restricts to an
optional set of observed entries.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError
from .validation import as_mask, as_matrix

__all__ = ["ProblemSpec", "shrink", "huber", "phi_value_grad"]


@dataclass(frozen=True)
class ProblemSpec:
    """Problem data: observations, optional mask, and the two penalties.

    ``x`` holds observed values (entries outside the mask are ignored);
    ``mask`` is a boolean matrix of observed positions or ``None`` for
    fully observed data; ``lambda_l`` weights the low-rank penalty and
    ``lambda_s`` the entrywise l1 penalty.
    """

    x: np.ndarray
    lambda_l: float
    lambda_s: float
    mask: np.ndarray | None = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "x", as_matrix(self.x, "x"))
        object.__setattr__(self, "mask", as_mask(self.mask, self.x.shape))
        object.__setattr__(self, "lambda_l", float(self.lambda_l))
        object.__setattr__(self, "lambda_s", float(self.lambda_s))
        if self.lambda_l <= 0.0:
            raise ValueError(f"lambda_l must be positive, got {self.lambda_l}")
        if self.lambda_s <= 0.0:
            raise ValueError(f"lambda_s must be positive, got {self.lambda_s}")

    @property
    def shape(self):
        return self.x.shape

    def observed(self):
        """The data with unobserved entries zeroed (zero-filled X)."""
        if self.mask is None:
            return self.x
        return np.where(self.mask, self.x, 0.0)

    def project(self, a):
        """Zero out the unobserved entries of ``a``."""
        if self.mask is None:
            return a
        return np.where(self.mask, a, 0.0)


def shrink(z, tau):
    """Soft-thresholding ``sign(z) * max(|z| - tau, 0)``, elementwise.

    This is the proximal operator of ``tau * |.|`` and the closed-form
    minimizer of ``0.5 * (s - z)^2 + tau * |s|``.
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    z = np.asarray(z, dtype=np.float64)
    out = np.sign(z) * np.maximum(np.abs(z) - tau, 0.0)
    return out if out.ndim else float(out)


def huber(z, tau):
    """Huber function: ``z^2 / 2`` for |z| <= tau, else ``tau*|z| - tau^2/2``.

    Equals ``min_s 0.5 * (z - s)^2 + tau * |s|``, i.e. the Moreau envelope
    of ``tau * |.|`` at unit parameter. Ties at |z| = tau take the
    quadratic branch (the two branches agree there).
    """
    if tau <= 0.0:
        raise ValueError(f"tau must be positive, got {tau}")
    z = np.asarray(z, dtype=np.float64)
    az = np.abs(z)
    out = np.where(az <= tau, 0.5 * z * z, tau * az - 0.5 * tau * tau)
    return out if out.ndim else float(out)


def phi_value_grad(l, spec):
    """Value, gradient, and minimizing sparse matrix of the marginal function.

    Returns ``(value, grad, s_star)`` where, with residual ``r = x - l``
    on observed entries:

    * ``s_star = shrink(r, lambda_s)`` on observed entries, 0 elsewhere;
    * ``value = sum of huber(r, lambda_s)`` over observed entries;
    * ``grad = l + s_star - x = -clip(r, +-lambda_s)`` on observed
      entries, 0 elsewhere.

    ``value`` equals ``min_S 0.5 * ||P(l + S - x)||_F^2 + lambda_s*||S||_1``
    and ``grad`` is its (Lipschitz-1) gradient in ``l``.
    """
    l = as_matrix(l, "l")
    if l.shape != spec.shape:
        raise DimensionError(f"l shape {l.shape} does not match data shape {spec.shape}")
    tau = spec.lambda_s
    r = spec.x - l
    if spec.mask is not None:
        r = np.where(spec.mask, r, 0.0)
    s_star = np.sign(r) * np.maximum(np.abs(r) - tau, 0.0)
    grad = -np.clip(r, -tau, tau)
    az = np.abs(r)
    value = float(
        np.sum(np.where(az <= tau, 0.5 * r * r, tau * az - 0.5 * tau * tau))
    )
    return value, grad, s_star
