"""Iterate traces shared by all solvers, and a pausable work timer.

The timer exists so that per-iteration bookkeeping requested by callers
(shared-objective evaluation for benchmarks, certificates) can be kept
out of the timed sections, keeping cross-solver timings comparable.
"""

import time
from dataclasses import dataclass, field

import numpy as np

__all__ = ["IterateState", "IterationRecord", "SolveReport", "WorkTimer"]


class WorkTimer:
    """Accumulates wall time, excluding explicitly paused spans."""

    def __init__(self):
        self._accum = 0.0
        self._started = time.perf_counter()
        self._running = True

    def pause(self):
        if self._running:
            self._accum += time.perf_counter() - self._started
            self._running = False

    def resume(self):
        if not self._running:
            self._started = time.perf_counter()
            self._running = True

    def elapsed(self):
        if self._running:
            return self._accum + (time.perf_counter() - self._started)
        return self._accum


@dataclass
class IterateState:
    """Current-iterate view handed to per-iteration hooks.

    Factorized solvers set ``factors`` (call ``factors.compose()`` for
    the dense matrix); matrix-iterate solvers set ``l``. ``s`` is the
    sparse component when the solver has it at hand.
    """

    factors: object = None
    l: np.ndarray | None = None
    s: np.ndarray | None = None

    @property
    def dense_l(self):
        return self.l if self.l is not None else self.factors.compose()


@dataclass
class IterationRecord:
    """One trace row: solver-native objective and stationarity measure."""

    iteration: int
    objective: float
    grad_norm: float
    elapsed_s: float
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        d = {
            "iter": self.iteration,
            "objective": self.objective,
            "grad_norm": self.grad_norm,
            "elapsed_s": self.elapsed_s,
        }
        d.update(self.extra)
        return d


@dataclass
class SolveReport:
    """Outcome of one solver run.

    ``l`` and ``s`` are the materialized low-rank and sparse components;
    ``factors`` is set only by the factorized solver. ``iterations``
    holds the per-iteration trace in order.
    """

    solver: str
    termination: str
    iterations: list
    l: np.ndarray
    s: np.ndarray
    objective: float
    factors: object = None
    extra: dict = field(default_factory=dict)

    @property
    def best_objective(self):
        vals = [rec.objective for rec in self.iterations] + [self.objective]
        return min(vals)

    @property
    def converged(self):
        return self.termination == "converged"

    def trace_dict(self):
        """JSON-ready trace (matrices excluded)."""
        return {
            "solver": self.solver,
            "termination": self.termination,
            "objective": self.objective,
            "iterations": [rec.to_dict() for rec in self.iterations],
            **self.extra,
        }
