"""Limited-memory BFGS over flat vectors, with a strong Wolfe line search.

The implementation is the standard two-loop recursion with history
scaling, paired with a bracket/zoom line search using cubic
interpolation. Every accepted step satisfies the strong Wolfe
conditions, so the recorded objective sequence is non-increasing.
"""

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .report import IterationRecord, WorkTimer

__all__ = ["LbfgsResult", "minimize_lbfgs"]

_MAX_BRACKET = 30
_MAX_ZOOM = 40


@dataclass
class LbfgsResult:
    x: np.ndarray
    objective: float
    grad_norm: float
    termination: str
    records: list = field(default_factory=list)
    n_evals: int = 0


def _cubic_step(a, fa, da, b, fb, db):
    """Minimizer of the cubic through (a, fa, da), (b, fb, db); NaN on failure."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0.0:
        return float("nan")
    d2 = np.sign(b - a) * np.sqrt(disc)
    denom = db - da + 2.0 * d2
    if denom == 0.0:
        return float("nan")
    return b - (b - a) * (db + d2 - d1) / denom


class _LineEval:
    """Caches the most recent full-space evaluation along x + alpha*d."""

    def __init__(self, fun, x, d):
        self.fun = fun
        self.x = x
        self.d = d
        self.n_evals = 0
        self.g = None

    def __call__(self, alpha):
        f, g = self.fun(self.x + alpha * self.d)
        self.n_evals += 1
        if not np.isfinite(f):
            f = float("inf")
        self.g = g
        return f, float(g @ self.d)


def _strong_wolfe(ev, f0, df0, alpha0, c1, c2):
    """Bracket/zoom search; returns (alpha, f, g) or None on failure."""

    def zoom(lo, f_lo, d_lo, hi, f_hi, d_hi):
        for _ in range(_MAX_ZOOM):
            lo_, hi_ = min(lo, hi), max(lo, hi)
            width = hi_ - lo_
            if width <= 1e-16 * max(1.0, abs(lo)):
                return None
            alpha = _cubic_step(lo, f_lo, d_lo, hi, f_hi, d_hi)
            if not np.isfinite(alpha) or alpha <= lo_ + 0.1 * width or alpha >= hi_ - 0.1 * width:
                alpha = 0.5 * (lo_ + hi_)
            f, df = ev(alpha)
            if f > f0 + c1 * alpha * df0 or f >= f_lo:
                hi, f_hi, d_hi = alpha, f, df
            else:
                if abs(df) <= -c2 * df0:
                    return alpha, f, ev.g
                if df * (hi - lo) >= 0.0:
                    hi, f_hi, d_hi = lo, f_lo, d_lo
                lo, f_lo, d_lo = alpha, f, df
        return None

    alpha_prev, f_prev, d_prev = 0.0, f0, df0
    alpha = alpha0
    for i in range(_MAX_BRACKET):
        f, df = ev(alpha)
        if f > f0 + c1 * alpha * df0 or (i > 0 and f >= f_prev):
            return zoom(alpha_prev, f_prev, d_prev, alpha, f, df)
        if abs(df) <= -c2 * df0:
            return alpha, f, ev.g
        if df >= 0.0:
            return zoom(alpha, f, df, alpha_prev, f_prev, d_prev)
        alpha_prev, f_prev, d_prev = alpha, f, df
        alpha = 2.0 * alpha
    return None


def minimize_lbfgs(
    fun,
    x0,
    memory=10,
    grad_tol=1e-9,
    max_iter=500,
    c1=1e-4,
    c2=0.9,
    iter_hook=None,
    timer=None,
):
    """Minimize ``fun(x) -> (value, gradient)`` from ``x0``.

    Stops when ``||g|| <= grad_tol * max(1, ||g0||)`` ("converged"), after
    ``max_iter`` accepted steps ("max_iter"), or when the line search
    cannot satisfy the strong Wolfe conditions ("line_search_failed", in
    which case the best accepted iterate is returned).

    ``iter_hook(iteration, x)``, if given, may return a dict merged into
    that iteration's trace record; hook time is excluded from the
    recorded timings.
    """
    if not 0.0 < c1 < c2 < 1.0:
        raise ValueError(f"need 0 < c1 < c2 < 1, got c1={c1}, c2={c2}")
    if memory < 1:
        raise ValueError(f"memory must be >= 1, got {memory}")
    timer = timer or WorkTimer()
    x = np.asarray(x0, dtype=np.float64).copy()
    f, g = fun(x)
    n_evals = 1
    g_norm = float(np.linalg.norm(g))
    stop_level = grad_tol * max(1.0, g_norm)
    records = []

    def record(it):
        timer.pause()
        extra = iter_hook(it, x) if iter_hook is not None else None
        records.append(
            IterationRecord(it, float(f), g_norm, timer.elapsed(), dict(extra or {}))
        )
        timer.resume()

    record(0)
    if g_norm <= stop_level:
        return LbfgsResult(x, float(f), g_norm, "converged", records, n_evals)

    history = deque(maxlen=int(memory))
    termination = "max_iter"
    for it in range(1, int(max_iter) + 1):
        # Two-loop recursion for the search direction.
        q = g.copy()
        alphas = []
        for s, y, rho in reversed(history):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        if history:
            s, y, _ = history[-1]
            q *= (s @ y) / (y @ y)
        for (s, y, rho), a in zip(history, reversed(alphas)):
            b = rho * (y @ q)
            q += (a - b) * s
        d = -q
        dg = float(d @ g)
        if dg >= 0.0:
            # Not a descent direction (can occur without C^2 smoothness):
            # drop the history and fall back to steepest descent.
            history.clear()
            d = -g
            dg = -(g_norm**2)

        alpha0 = 1.0 if history else min(1.0, 1.0 / max(g_norm, 1e-12))
        ev = _LineEval(fun, x, d)
        hit = _strong_wolfe(ev, f, dg, alpha0, c1, c2)
        n_evals += ev.n_evals
        if hit is None:
            termination = "line_search_failed"
            break
        alpha, f_new, g_new = hit
        s_vec = alpha * d
        y_vec = g_new - g
        sy = float(s_vec @ y_vec)
        if sy > 1e-12 * float(np.linalg.norm(s_vec)) * float(np.linalg.norm(y_vec)):
            history.append((s_vec, y_vec, 1.0 / sy))
        x = x + s_vec
        f, g = f_new, g_new
        g_norm = float(np.linalg.norm(g))
        record(it)
        if g_norm <= stop_level:
            termination = "converged"
            break

    return LbfgsResult(x, float(f), g_norm, termination, records, n_evals)
