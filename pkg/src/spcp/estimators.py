"""Scikit-learn style estimators wrapping the three solvers.

``fit(X)`` recovers the low-rank and sparse components of the training
matrix; ``transform(X)`` projects columns of (possibly new) data onto
the recovered low-rank column space, which is the usual way to apply a
learned background model to fresh frames. The estimators follow the
sklearn parameter conventions, so ``get_params`` / ``set_params``,
``clone``, and pipelines work as expected.
"""

from sklearn.base import BaseEstimator, TransformerMixin

from .baselines import solve_convex_prox, solve_frank_wolfe
from .certificate import certificate, factor_svd
from .errors import DimensionError
from .objective import ProblemSpec
from .solver import SolverConfig, factors_from_dense, solve_split_spcp
from .validation import as_mask, as_matrix

__all__ = ["SplitSPCP", "ProxSPCP", "FrankWolfeSPCP"]


class _BaseSPCP(BaseEstimator, TransformerMixin):
    """Shared fit/transform plumbing for the SPCP estimators."""

    def _solve(self, spec):
        raise NotImplementedError

    def fit(self, X, y=None, mask=None):
        """Decompose ``X`` into low-rank + sparse components.

        ``mask`` optionally marks the observed entries. Sets
        ``low_rank_``, ``sparse_``, ``report_``, ``objective_``, and
        ``n_iter_``.
        """
        X = as_matrix(X, "X")
        mask = as_mask(mask, X.shape)
        spec = ProblemSpec(x=X, lambda_l=self.lambda_l, lambda_s=self.lambda_s, mask=mask)
        report = self._solve(spec)
        self.problem_spec_ = spec
        self.report_ = report
        self.low_rank_ = report.l
        self.sparse_ = report.s
        self.objective_ = report.objective
        self.n_iter_ = len(report.iterations)
        self.factors_ = (
            report.factors if report.factors is not None else factors_from_dense(report.l)
        )
        self.components_ = factor_svd(self.factors_).u
        self.rank_ = self.components_.shape[1]
        return self

    def certify(self):
        """Optimality certificate at the fitted decomposition.

        A gap_bound that stays large relative to ``objective_`` signals
        that the solution is not near the convex optimum (for the split
        solver, typically a too-small rank bound).
        """
        if not hasattr(self, "factors_"):
            raise RuntimeError("estimator is not fitted; call fit first")
        return certificate(
            self.factors_, self.problem_spec_, f_bound_hint=self.report_.best_objective
        )

    def transform(self, X):
        """Project columns of ``X`` onto the recovered low-rank column space."""
        if not hasattr(self, "components_"):
            raise RuntimeError("estimator is not fitted; call fit first")
        X = as_matrix(X, "X")
        if X.shape[0] != self.components_.shape[0]:
            raise DimensionError(
                f"X has {X.shape[0]} rows, expected {self.components_.shape[0]}"
            )
        q = self.components_
        return q @ (q.T @ X)


class SplitSPCP(_BaseSPCP):
    """Factorized (SVD-free) solver behind an estimator interface.

    Parameters mirror the solver configuration: ``rank`` bounds the
    factorization, ``init`` picks the starting point strategy, and
    ``rank_growth`` enables appending columns after convergence.
    """

    def __init__(
        self,
        lambda_l=1.0,
        lambda_s=1.0,
        rank=10,
        init="rsvd",
        memory=10,
        grad_tol=1e-8,
        max_iter=500,
        rank_growth=False,
        max_rank=None,
        random_state=0,
    ):
        self.lambda_l = lambda_l
        self.lambda_s = lambda_s
        self.rank = rank
        self.init = init
        self.memory = memory
        self.grad_tol = grad_tol
        self.max_iter = max_iter
        self.rank_growth = rank_growth
        self.max_rank = max_rank
        self.random_state = random_state

    def _solve(self, spec):
        cfg = SolverConfig(
            memory=self.memory,
            grad_tol=self.grad_tol,
            max_iter=self.max_iter,
            rank_growth=self.rank_growth,
            max_k=self.max_rank,
            seed=self.random_state,
        )
        return solve_split_spcp(spec, self.rank, cfg, init=self.init)


class ProxSPCP(_BaseSPCP):
    """Convex proximal-gradient reference solver as an estimator."""

    def __init__(
        self,
        lambda_l=1.0,
        lambda_s=1.0,
        step=1.0,
        accel=True,
        tol=1e-12,
        max_iter=500,
    ):
        self.lambda_l = lambda_l
        self.lambda_s = lambda_s
        self.step = step
        self.accel = accel
        self.tol = tol
        self.max_iter = max_iter

    def _solve(self, spec):
        return solve_convex_prox(
            spec, step=self.step, max_iter=self.max_iter, tol=self.tol, accel=self.accel
        )


class FrankWolfeSPCP(_BaseSPCP):
    """Frank-Wolfe (marginalized) reference solver as an estimator."""

    def __init__(self, lambda_l=1.0, lambda_s=1.0, tol=1e-6, max_iter=500, random_state=0):
        self.lambda_l = lambda_l
        self.lambda_s = lambda_s
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def _solve(self, spec):
        return solve_frank_wolfe(
            spec, max_iter=self.max_iter, tol=self.tol, seed=self.random_state
        )
