"""Regularized low-rank + sparse matrix recovery.

Decomposes a data matrix into a low-rank component and a sparse
component under an l1 + nuclear-norm model. The primary solver works on
the factorization ``L = U V^T`` so no SVDs are needed in the iteration;
a computable certificate bounds the suboptimality of any iterate, and
two SVD-based reference solvers (proximal gradient and Frank-Wolfe)
serve as oracles and baselines.
"""

from .baselines import (
    FwState,
    convex_objective,
    nuclear_norm,
    solve_convex_prox,
    solve_frank_wolfe,
    svt,
)
from .certificate import CertificateReport, certificate, factor_svd
from .errors import (
    DimensionError,
    MalformedHeaderError,
    MatrixIOError,
    NonFiniteDataError,
    NumericalError,
    PowerIterationError,
    SpcpError,
    TruncatedPayloadError,
)
from .estimators import FrankWolfeSPCP, ProxSPCP, SplitSPCP
from .lbfgs import LbfgsResult, minimize_lbfgs
from .linalg import SvdTriplet, leading_triple, rand_svd, svd_small, thin_qr
from .matrixio import read_matrix, write_matrix
from .metrics import AiccReport, aicc, degrees_of_freedom
from .objective import ProblemSpec, huber, phi_value_grad, shrink
from .report import IterateState, IterationRecord, SolveReport
from .solver import (
    FactorPair,
    SolverConfig,
    factors_from_dense,
    init_factors,
    lbfgs_minimize,
    solve_split_spcp,
    split_objective,
)
from .synth import gen_low_rank_plus_sparse, gen_mask

__version__ = "0.1.0"

__all__ = [
    "AiccReport",
    "CertificateReport",
    "DimensionError",
    "FactorPair",
    "FrankWolfeSPCP",
    "FwState",
    "IterateState",
    "IterationRecord",
    "LbfgsResult",
    "MalformedHeaderError",
    "MatrixIOError",
    "NonFiniteDataError",
    "NumericalError",
    "PowerIterationError",
    "ProblemSpec",
    "ProxSPCP",
    "SolveReport",
    "SolverConfig",
    "SpcpError",
    "SplitSPCP",
    "SvdTriplet",
    "TruncatedPayloadError",
    "aicc",
    "certificate",
    "convex_objective",
    "degrees_of_freedom",
    "factor_svd",
    "factors_from_dense",
    "gen_low_rank_plus_sparse",
    "gen_mask",
    "huber",
    "init_factors",
    "lbfgs_minimize",
    "leading_triple",
    "minimize_lbfgs",
    "nuclear_norm",
    "phi_value_grad",
    "rand_svd",
    "read_matrix",
    "shrink",
    "solve_convex_prox",
    "solve_frank_wolfe",
    "solve_split_spcp",
    "split_objective",
    "svd_small",
    "svt",
    "thin_qr",
    "write_matrix",
]
