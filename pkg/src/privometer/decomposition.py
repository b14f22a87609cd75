"""
Dual decomposition for problems of the form

    minimize    sum_i f_i(x_i, y_i; c_i)
    subject to  (x_i, y_i) in G_i(c_i),   y_i = E_i z,

with every interface value ``y_i^(k)`` recorded in an append-only
transcript (the message a subsystem exposes while coordinating).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TAU_KKT = 1e-7


class InfeasibleSubproblemError(RuntimeError):
    pass


@dataclass(frozen=True)
class LocalSolution:
    x: np.ndarray
    y: np.ndarray
    value: float  # f_i(x, y) + lambda^T y at the minimizer


@dataclass(frozen=True)
class Subsystem:
    """
    One party of a decomposable problem.

    ``solve(lam, y0)`` minimizes ``f_i + lam^T y`` over ``G_i(c_i)``;
    ``y0`` is an optional warm start.  ``feasible(x, y)`` reports
    membership in ``G_i`` and defaults to "always".
    """

    private_data: dict
    interface_dim: int
    solve: Callable[..., LocalSolution]
    objective: Callable[[np.ndarray, np.ndarray], float] | None = None
    feasible: Callable[[np.ndarray, np.ndarray], bool] | None = None


def consensus_local_solve(c_i, lambda_i):
    """Minimizer of ``(y - c_i)^2 + lambda_i y``: ``c_i - lambda_i / 2``."""
    return c_i - lambda_i / 2.0


def consensus_global_update(y):
    """Step 2 for the consensus problem, where ``(E^T E)^{-1} E^T`` is the mean."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise ValueError("need at least one interface value")
    return float(np.mean(y))


def consensus_subsystem(c_i):
    c_i = float(c_i)

    def solve(lam, y0=None):
        y = consensus_local_solve(c_i, float(lam[0]))
        return LocalSolution(np.empty(0), np.array([y]), (y - c_i) ** 2 + float(lam[0]) * y)

    return Subsystem({"c": c_i}, 1, solve,
                     objective=lambda x, y: float((y[0] - c_i) ** 2))


def box_quadratic_subsystem(H, m, lower, upper, inner_tol=1e-9, max_inner=100_000):
    """
    ``f_i(y) = 1/2 (y - m)^T H (y - m)`` over the box ``lower <= y <= upper``.

    The local problem is solved by projected gradient with step ``1/L``.
    """
    H = np.asarray(H, dtype=float)
    m = np.asarray(m, dtype=float)
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if np.any(lo > hi):
        raise InfeasibleSubproblemError("empty box")
    L = float(np.linalg.eigvalsh(H)[-1])

    def f(x, y):
        d = y - m
        return 0.5 * float(d @ H @ d)

    def solve(lam, y0=None):
        y = np.clip(m if y0 is None else y0, lo, hi)
        for _ in range(max_inner):
            g = H @ (y - m) + lam
            y_new = np.clip(y - g / L, lo, hi)
            if np.max(np.abs(y_new - y)) <= inner_tol:
                y = y_new
                break
            y = y_new
        return LocalSolution(np.empty(0), y, f(None, y) + float(lam @ y))

    def feasible(x, y):
        return bool(np.all(y >= lo - TAU_KKT) and np.all(y <= hi + TAU_KKT))

    return Subsystem({"H": H, "m": m, "lower": lo, "upper": hi}, len(m), solve, f, feasible)


@dataclass
class DecomposableProblem:
    subsystems: list
    E_blocks: list
    global_dim: int

    def __post_init__(self):
        if len(self.subsystems) != len(self.E_blocks):
            raise ValueError("one selection matrix per subsystem is required")
        blocks = []
        for sub, E in zip(self.subsystems, self.E_blocks):
            E = np.asarray(E, dtype=float)
            if E.shape != (sub.interface_dim, self.global_dim):
                raise ValueError(f"selection matrix has shape {E.shape}")
            if not np.all((E == 0) | (E == 1)) or not np.all(E.sum(axis=1) == 1):
                raise ValueError("selection matrices need exactly one 1 per row")
            blocks.append(E)
        self.E_blocks = blocks
        self.E = np.vstack(blocks)
        if np.linalg.matrix_rank(self.E) < self.global_dim:
            raise ValueError("stacked selection matrix lacks full column rank")
        self._offsets = np.cumsum([0] + [s.interface_dim for s in self.subsystems])
        for i, sub in enumerate(self.subsystems):
            sol = sub.solve(np.zeros(sub.interface_dim))
            if sub.feasible is not None and not sub.feasible(sol.x, sol.y):
                raise InfeasibleSubproblemError(f"subsystem {i} has no feasible point")

    @property
    def n_subsystems(self):
        return len(self.subsystems)

    def split(self, stacked):
        o = self._offsets
        return [np.asarray(stacked[o[i]:o[i + 1]]) for i in range(self.n_subsystems)]

    def coordinate(self, ys):
        """Step 2: least-squares global update ``(E^T E)^{-1} E^T y``."""
        E = self.E
        return np.linalg.solve(E.T @ E, E.T @ np.concatenate(ys))


def consensus_problem(c):
    subs = [consensus_subsystem(ci) for ci in np.asarray(c, dtype=float).ravel()]
    return DecomposableProblem(subs, [np.ones((1, 1))] * len(subs), 1)


@dataclass(frozen=True)
class StepRule:
    """``alpha_k = alpha0 / k`` (diminishing) or ``alpha0`` (constant)."""

    kind: str = "diminishing"
    alpha0: float = 1.0

    def __post_init__(self):
        if self.kind not in ("diminishing", "constant"):
            raise ValueError(f"unknown step rule {self.kind!r}")
        if not self.alpha0 > 0:
            raise ValueError("step size must be positive")

    @classmethod
    def constant(cls, alpha):
        return cls("constant", alpha)

    def __call__(self, k):
        return self.alpha0 / k if self.kind == "diminishing" else self.alpha0


@dataclass(frozen=True)
class StoppingRule:
    """Stop when ``max_i ||y_i - E_i z||_inf <= tol`` or after ``max_iters``."""

    tol: float = 1e-6
    max_iters: int = 10_000


class Transcript:
    """
    Append-only record of what coordination exposes.

    Each ``(subsystem, iteration)`` key may be written once, in iteration
    order; stored arrays are read-only.  Appends are serialized so local
    solves may report from worker threads.
    """

    def __init__(self, n_subsystems, keep_duals=True):
        self._y = [[] for _ in range(n_subsystems)]
        self._z = []
        self._steps = []
        self._duals = [] if keep_duals else None
        self._lock = threading.Lock()

    @staticmethod
    def _freeze(a):
        a = np.array(a, dtype=float)
        a.setflags(write=False)
        return a

    def record_interface(self, k, i, y):
        with self._lock:
            if k != len(self._y[i]) + 1:
                raise ValueError(f"out-of-order or repeated entry for subsystem {i}, iteration {k}")
            self._y[i].append(self._freeze(y))

    def record_global(self, k, z, step):
        with self._lock:
            if k != len(self._z) + 1:
                raise ValueError(f"out-of-order global entry at iteration {k}")
            self._z.append(self._freeze(z))
            self._steps.append(float(step))

    def record_duals(self, k, lambdas):
        if self._duals is None:
            return
        with self._lock:
            if k != len(self._duals):
                raise ValueError(f"out-of-order dual entry at iteration {k}")
            self._duals.append(tuple(self._freeze(l) for l in lambdas))

    @property
    def n_subsystems(self):
        return len(self._y)

    @property
    def T(self):
        return len(self._z)

    def interface(self, i):
        """``(T, dim_i)`` array of ``y_i^(k)``, k = 1..T."""
        return self._freeze(np.array(self._y[i]))

    def global_iterates(self):
        return self._freeze(np.array(self._z))

    def steps(self):
        return self._freeze(np.array(self._steps))

    def duals(self, i):
        """``lambda_i^(k)``, k = 0..T (``None`` when duals were withheld)."""
        if self._duals is None:
            return None
        return self._freeze(np.array([d[i] for d in self._duals]))

    def to_dict(self):
        out = {
            "T": self.T,
            "interface": [self.interface(i).tolist() for i in range(self.n_subsystems)],
            "global": self.global_iterates().tolist(),
            "steps": list(self._steps),
        }
        return out


@dataclass
class DualDecompositionResult:
    z: np.ndarray
    ys: list
    lambdas: list
    transcript: Transcript
    converged: bool
    iterations: int
    residual: float
    dual_values: list = field(default_factory=list)


def run_dual_decomposition(problem, lambda0=None, step=None, stop=None):
    """
    Dual decomposition with full transcript capture.

    Parameters
    ----------
    problem : DecomposableProblem
    lambda0 : list of ndarray or ndarray, optional
        Initial duals, one block per subsystem, with ``E^T lambda = 0``.
        Defaults to zeros.
    step : StepRule, optional
        Defaults to the diminishing rule ``1/k``.
    stop : StoppingRule, optional

    Returns
    -------
    DualDecompositionResult
        ``converged`` is False when ``max_iters`` was reached first; the
        transcript then holds every iteration that was run.
    """
    step = step or StepRule()
    stop = stop or StoppingRule()
    N = problem.n_subsystems
    if lambda0 is None:
        lams = [np.zeros(s.interface_dim) for s in problem.subsystems]
    elif isinstance(lambda0, np.ndarray) and lambda0.ndim == 1:
        lams = problem.split(np.asarray(lambda0, dtype=float))
    else:
        lams = [np.asarray(l, dtype=float).reshape(s.interface_dim)
                for l, s in zip(lambda0, problem.subsystems)]
    dual_gap = problem.E.T @ np.concatenate(lams)
    if np.max(np.abs(dual_gap), initial=0.0) > 1e-9:
        raise ValueError("initial duals must satisfy E^T lambda = 0")

    transcript = Transcript(N)
    transcript.record_duals(0, lams)
    ys = [None] * N
    dual_values = []
    residual = np.inf
    k = 0
    converged = False
    while k < stop.max_iters:
        k += 1
        value = 0.0
        for i, sub in enumerate(problem.subsystems):
            sol = sub.solve(lams[i], ys[i])
            if sub.feasible is not None and not sub.feasible(sol.x, sol.y):
                raise InfeasibleSubproblemError(f"subsystem {i} returned an infeasible point")
            ys[i] = np.asarray(sol.y, dtype=float)
            value += sol.value
            transcript.record_interface(k, i, ys[i])
        dual_values.append(value)

        z = problem.coordinate(ys)
        alpha = step(k)
        transcript.record_global(k, z, alpha)

        gaps = [ys[i] - problem.E_blocks[i] @ z for i in range(N)]
        residual = max(float(np.max(np.abs(g))) for g in gaps)
        lams = [lams[i] + alpha * gaps[i] for i in range(N)]
        transcript.record_duals(k, lams)
        if residual <= stop.tol:
            converged = True
            break

    return DualDecompositionResult(z, ys, lams, transcript, converged, k, residual, dual_values)


@dataclass
class ConsensusRun:
    """Average consensus via dual decomposition, kept replayable."""

    c: np.ndarray
    lambda0: np.ndarray
    step: StepRule
    stop: StoppingRule
    result: DualDecompositionResult

    @classmethod
    def execute(cls, c, lambda0=None, step=None, stop=None):
        c = np.asarray(c, dtype=float).ravel()
        lambda0 = np.zeros_like(c) if lambda0 is None else np.asarray(lambda0, dtype=float)
        step = step or StepRule()
        stop = stop or StoppingRule()
        result = run_dual_decomposition(consensus_problem(c), lambda0, step, stop)
        return cls(c, lambda0, step, stop, result)

    @property
    def transcript(self):
        return self.result.transcript

    @property
    def N(self):
        return len(self.c)

    def interface_matrix(self):
        """``(T, N)`` array of all ``y_i^(k)``."""
        t = self.transcript
        return np.column_stack([t.interface(i)[:, 0] for i in range(self.N)])


def replay_consensus(c, lambda0, steps):
    """
    Re-run consensus iterations for a batch of data.

    ``c`` and ``lambda0`` have shape ``(B, N)``; ``steps`` is the step
    sequence of the observed run.  Returns the ``(B, T, N)`` interface
    values.  The batch form makes replay certification cheap.
    """
    c = np.atleast_2d(np.asarray(c, dtype=float))
    lam = np.atleast_2d(np.asarray(lambda0, dtype=float)).copy()
    out = np.empty((c.shape[0], len(steps), c.shape[1]))
    for k, alpha in enumerate(steps):
        y = c - lam / 2.0
        z = y.mean(axis=1, keepdims=True)
        out[:, k, :] = y
        lam += alpha * (y - z)
    return out
