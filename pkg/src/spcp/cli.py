"""Command-line interface: decompose, certify, synth, bench.

Exit codes: 0 success/convergence, 1 usage or I/O error, 2 iteration cap
reached, 3 numerical failure.

numpy is imported lazily so that ``SPCP_NUM_THREADS`` can steer the BLAS
thread pools of the whole process; see ``_configure_threads``.
"""

import argparse
import os
import sys
from dataclasses import asdict, dataclass

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ITER_CAP = 2
EXIT_NUMERICAL = 3

_TERMINATION_CODES = {
    "converged": EXIT_OK,
    "max_iter": EXIT_ITER_CAP,
    "line_search_failed": EXIT_NUMERICAL,
}

# gap_bound above this fraction of |objective| triggers the under-rank warning
CERT_WARN_RATIO = 1e-2


def _configure_threads():
    """Propagate SPCP_NUM_THREADS to the BLAS pools (before numpy loads)."""
    want = os.environ.get("SPCP_NUM_THREADS")
    if not want:
        return
    for var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        os.environ.setdefault(var, want)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    """Decompose-run parameters as parsed from the command line."""

    solver: str = "split"
    lambda_l: float = 1.0
    lambda_s: float = 1.0
    k: int = 10
    init: str = "rsvd"
    memory: int = 10
    grad_tol: float = 1e-6
    max_iter: int = 500
    rank_growth: bool = False
    max_k: int | None = None
    step: float = 1.0
    accel: bool = True
    tol: float = 1e-12
    seed: int = 0
    certificate: str = "off"
    cert_every: int = 0

    def to_dict(self):
        return asdict(self)


def _parse_certificate(value):
    if value in ("off", "final"):
        return value, 0
    if value.startswith("every:"):
        n = int(value.split(":", 1)[1])
        if n < 1:
            raise ValueError("certificate every:N requires N >= 1")
        return "every", n
    raise ValueError(f"bad certificate mode {value!r}; expected off|final|every:N")


def _add_problem_args(p):
    p.add_argument("--input", required=True, help="matrix file (csv or binary)")
    p.add_argument("--mask", help="optional observation mask matrix (nonzero = observed)")
    p.add_argument("--lambda-l", type=float, required=True, dest="lambda_l")
    p.add_argument("--lambda-s", type=float, required=True, dest="lambda_s")
    p.add_argument("--format", choices=("csv", "binary"), default=None,
                   help="force matrix format instead of inferring from extension")


def _add_solver_args(p):
    p.add_argument("--solver", choices=("split", "prox", "fw"), default="split")
    p.add_argument("--k", type=int, default=10, help="rank bound for the split solver")
    p.add_argument("--init", choices=("rsvd", "full_svd", "random"), default="rsvd")
    p.add_argument("--memory", type=int, default=10)
    p.add_argument("--grad-tol", type=float, default=1e-6, dest="grad_tol")
    p.add_argument("--max-iter", type=int, default=500, dest="max_iter")
    p.add_argument("--rank-growth", action="store_true", dest="rank_growth")
    p.add_argument("--max-k", type=int, default=None, dest="max_k")
    p.add_argument("--step", type=float, default=1.0, help="prox step size (<= 1)")
    p.add_argument("--no-accel", action="store_false", dest="accel")
    p.add_argument("--tol", type=float, default=1e-12,
                   help="objective-change tolerance (prox) / gap tolerance (fw)")
    p.add_argument("--seed", type=int, default=0)


def build_parser():
    parser = _Parser(prog="spcp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_dec = sub.add_parser("decompose", help="decompose a matrix into low-rank + sparse")
    _add_problem_args(p_dec)
    _add_solver_args(p_dec)
    p_dec.add_argument("--certificate", default="off",
                       help="off | final | every:N (certificate along the trace)")
    p_dec.add_argument("--output-l", dest="output_l", help="low-rank output file")
    p_dec.add_argument("--output-s", dest="output_s", help="sparse output file")
    p_dec.add_argument("--trace", help="JSON trace output file")

    p_cert = sub.add_parser("certify", help="certificate for an existing low-rank estimate")
    _add_problem_args(p_cert)
    p_cert.add_argument("--l", required=True, dest="l_path", help="low-rank estimate file")
    p_cert.add_argument("--f-bound", type=float, default=None, dest="f_bound",
                        help="known upper bound on the optimal objective value")
    p_cert.add_argument("--output", help="JSON report output file")

    p_syn = sub.add_parser("synth", help="generate a synthetic low-rank + sparse problem")
    p_syn.add_argument("--m", type=int, required=True)
    p_syn.add_argument("--n", type=int, required=True)
    p_syn.add_argument("--rank", type=int, required=True)
    p_syn.add_argument("--sparse-frac", type=float, default=0.0, dest="sparse_frac")
    p_syn.add_argument("--noise-rel", type=float, default=0.0, dest="noise_rel")
    p_syn.add_argument("--observe-frac", type=float, default=None, dest="observe_frac")
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--output-x", required=True, dest="output_x")
    p_syn.add_argument("--output-l", dest="output_l")
    p_syn.add_argument("--output-s", dest="output_s")
    p_syn.add_argument("--output-mask", dest="output_mask")

    p_bench = sub.add_parser("bench", help="compare solvers on one problem")
    _add_problem_args(p_bench)
    _add_solver_args(p_bench)
    p_bench.add_argument("--solvers", default="split,prox",
                         help="comma-separated list (>= 2) of: split prox fw")
    p_bench.add_argument("--output", help="JSON comparison output file")
    return parser


def _load_problem(args):
    from .matrixio import read_matrix
    from .objective import ProblemSpec

    x = read_matrix(args.input, fmt=args.format)
    mask = None
    if args.mask:
        mask = read_matrix(args.mask, fmt=args.format) != 0.0
    return ProblemSpec(x=x, lambda_l=args.lambda_l, lambda_s=args.lambda_s, mask=mask)


def _run_solver(config, spec, iter_hook=None):
    from .baselines import solve_convex_prox, solve_frank_wolfe
    from .solver import SolverConfig, solve_split_spcp

    if config.solver == "split":
        cfg = SolverConfig(
            memory=config.memory,
            grad_tol=config.grad_tol,
            max_iter=config.max_iter,
            rank_growth=config.rank_growth,
            max_k=config.max_k,
            seed=config.seed,
        )
        return solve_split_spcp(spec, config.k, cfg, init=config.init, iter_hook=iter_hook)
    if config.solver == "prox":
        return solve_convex_prox(
            spec,
            step=config.step,
            max_iter=config.max_iter,
            tol=config.tol,
            accel=config.accel,
            iter_hook=iter_hook,
        )
    return solve_frank_wolfe(
        spec, max_iter=config.max_iter, tol=config.tol, seed=config.seed, iter_hook=iter_hook
    )


def _factors_of(state):
    """FactorPair for a hook state coming from any solver."""
    from .solver import factors_from_dense

    if state.factors is not None:
        return state.factors
    return factors_from_dense(state.l)


def cmd_decompose(args):
    import numpy as np

    from .certificate import certificate
    from .matrixio import write_json_atomic, write_matrix

    mode, every = _parse_certificate(args.certificate)
    config = RunConfig(
        solver=args.solver,
        lambda_l=args.lambda_l,
        lambda_s=args.lambda_s,
        k=args.k,
        init=args.init,
        memory=args.memory,
        grad_tol=args.grad_tol,
        max_iter=args.max_iter,
        rank_growth=args.rank_growth,
        max_k=args.max_k,
        step=args.step,
        accel=args.accel,
        tol=args.tol,
        seed=args.seed,
        certificate=mode,
        cert_every=every,
    )
    spec = _load_problem(args)

    hook = None
    if mode == "every":

        def hook(it, state):
            if it % every != 0:
                return {}
            rep = certificate(_factors_of(state), spec)
            return {"cert": rep.to_dict()}

    report = _run_solver(config, spec, iter_hook=hook)

    final_cert = None
    if mode in ("final", "every"):
        from .solver import factors_from_dense

        factors = report.factors if report.factors is not None else factors_from_dense(report.l)
        final_cert = certificate(factors, spec, f_bound_hint=report.best_objective)
        if final_cert.gap_bound > CERT_WARN_RATIO * max(1.0, abs(report.objective)):
            print(
                f"warning: certificate gap_bound {final_cert.gap_bound:.3e} is large "
                f"relative to the objective; the rank bound may be too small",
                file=sys.stderr,
            )

    if args.output_l:
        write_matrix(report.l, args.output_l, fmt=args.format)
    if args.output_s:
        write_matrix(report.s, args.output_s, fmt=args.format)
    if args.trace:
        trace = {
            "command": "decompose",
            "config": config.to_dict(),
            **report.trace_dict(),
            "final": {
                "objective": report.objective,
                "nnz_s": int(np.sum(report.s != 0.0)),
                "cert": final_cert.to_dict() if final_cert is not None else None,
            },
        }
        write_json_atomic(trace, args.trace)

    print(f"{report.solver}: {report.termination}, objective {report.objective:.12g}")
    return _TERMINATION_CODES.get(report.termination, EXIT_NUMERICAL)


def cmd_certify(args):
    from .certificate import certificate
    from .matrixio import read_matrix, write_json_atomic
    from .solver import factors_from_dense

    spec = _load_problem(args)
    l = read_matrix(args.l_path, fmt=args.format)
    rep = certificate(factors_from_dense(l), spec, f_bound_hint=args.f_bound)
    payload = {"command": "certify", **rep.to_dict()}
    if args.output:
        write_json_atomic(payload, args.output)
    print(
        f"e_norm {rep.e_norm:.6e}  gap_bound {rep.gap_bound:.6e}  rank {rep.r}"
    )
    return EXIT_OK


def cmd_synth(args):
    from .matrixio import write_matrix
    from .synth import gen_low_rank_plus_sparse, gen_mask

    x, l_ref, s_ref = gen_low_rank_plus_sparse(
        args.m, args.n, args.rank, args.sparse_frac, args.noise_rel, seed=args.seed
    )
    write_matrix(x, args.output_x)
    if args.output_l:
        write_matrix(l_ref, args.output_l)
    if args.output_s:
        write_matrix(s_ref, args.output_s)
    if args.output_mask:
        if args.observe_frac is None:
            print("error: --output-mask requires --observe-frac", file=sys.stderr)
            return EXIT_USAGE
        mask = gen_mask(args.m, args.n, args.observe_frac, seed=args.seed + 1)
        write_matrix(mask.astype(float), args.output_mask)
    print(f"synth: wrote {args.m}x{args.n} problem to {args.output_x}")
    return EXIT_OK


def cmd_bench(args):
    from .baselines import convex_objective
    from .matrixio import write_json_atomic

    solvers = [s.strip() for s in args.solvers.split(",") if s.strip()]
    if len(solvers) < 2:
        print("error: bench requires at least two solvers", file=sys.stderr)
        return EXIT_USAGE
    for name in solvers:
        if name not in ("split", "prox", "fw"):
            print(f"error: unknown solver {name!r}", file=sys.stderr)
            return EXIT_USAGE

    spec = _load_problem(args)

    def shared_hook(it, state):
        return {"shared_objective": convex_objective(state.dense_l, spec)}

    results = {}
    for name in solvers:
        config = RunConfig(
            solver=name,
            lambda_l=args.lambda_l,
            lambda_s=args.lambda_s,
            k=args.k,
            init=args.init,
            memory=args.memory,
            grad_tol=args.grad_tol,
            max_iter=args.max_iter,
            rank_growth=args.rank_growth,
            max_k=args.max_k,
            step=args.step,
            accel=args.accel,
            tol=args.tol,
            seed=args.seed,
        )
        try:
            report = _run_solver(config, spec, iter_hook=shared_hook)
        except Exception as exc:  # keep benching the remaining solvers
            results[name] = {"failed": str(exc)}
            continue
        series = [
            (rec.elapsed_s, rec.extra["shared_objective"])
            for rec in report.iterations
            if "shared_objective" in rec.extra
        ]
        results[name] = {
            "termination": report.termination,
            "final_objective": series[-1][1] if series else None,
            "series": series,
        }

    finals = [r["final_objective"] for r in results.values() if r.get("final_objective") is not None]
    if not finals:
        print("error: all solvers failed", file=sys.stderr)
        return EXIT_NUMERICAL
    ref = min(finals)
    table = {"command": "bench", "reference_objective": ref, "solvers": {}}
    print(f"{'solver':8s} {'iters':>6s} {'work_s':>10s} {'rel_error':>12s}  termination")
    for name, r in results.items():
        if "failed" in r:
            print(f"{name:8s} {'-':>6s} {'-':>10s} {'-':>12s}  FAILED: {r['failed']}")
            table["solvers"][name] = r
            continue
        rel = [(t, (obj - ref) / max(abs(ref), 1e-300)) for t, obj in r["series"]]
        table["solvers"][name] = {
            "termination": r["termination"],
            "final_objective": r["final_objective"],
            "final_rel_error": rel[-1][1],
            "series": rel,
        }
        print(
            f"{name:8s} {len(rel) - 1:6d} {rel[-1][0]:10.3f} {rel[-1][1]:12.3e}  {r['termination']}"
        )
    if args.output:
        write_json_atomic(table, args.output)
    return EXIT_OK


def main(argv=None):
    _configure_threads()
    parser = build_parser()
    args = parser.parse_args(argv)
    from .errors import MatrixIOError, NumericalError, SpcpError

    handlers = {
        "decompose": cmd_decompose,
        "certify": cmd_certify,
        "synth": cmd_synth,
        "bench": cmd_bench,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MatrixIOError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SpcpError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
