"""
Problem disguise by algebraic transformation.

Two engines are provided: composing the objective (and constraints) with
monotone / sign-preserving scalar maps, and substituting ``x = phi(z)``.
Each produces a :class:`DisclosedProblem` whose message is what a third
party receives, and the relation builders turn such messages back into
the adversary's uncertainty sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from .adversary import Message
from .uncertainty_sets import (
    TAU_GEO, TAU_RANK, Ball, FinitePoints, Segment, UnboundedAffine,
)


class TransformError(ValueError):
    """A transform was rejected for the given problem."""


class LocalizationCaseError(ValueError):
    """The message does not fall into a known localization case."""


# -- scalar transforms --------------------------------------------------------

@dataclass(frozen=True)
class ScalarTransform:
    """
    Scalar map used to disguise an objective or constraint.

    ``tag`` is one of ``square``, ``scale``, ``affine_positive`` or
    ``matrix_zero_preserving``; ``domain`` is the interval on which the
    map is declared valid.
    """

    tag: str
    k: float = 1.0
    b: float = 0.0
    B: np.ndarray | None = None
    domain: tuple = (-math.inf, math.inf)

    def __post_init__(self):
        if self.tag in ("scale", "affine_positive") and not self.k > 0:
            raise TransformError("scaling factor must be positive")
        if self.tag == "matrix_zero_preserving":
            B = np.atleast_2d(np.asarray(self.B, dtype=float))
            s = np.linalg.svd(B, compute_uv=False)
            if B.shape[0] < B.shape[1] or s[-1] <= TAU_RANK * s[0]:
                raise TransformError("B must have full column rank")
            object.__setattr__(self, "B", B)
        elif self.tag not in ("square", "scale", "affine_positive"):
            raise TransformError(f"unknown transform {self.tag!r}")

    @classmethod
    def square(cls, domain=(0.0, math.inf)):
        return cls("square", domain=domain)

    @classmethod
    def scale(cls, k):
        return cls("scale", k=k)

    @classmethod
    def affine_positive(cls, k, b):
        return cls("affine_positive", k=k, b=b)

    @classmethod
    def matrix_zero_preserving(cls, B):
        return cls("matrix_zero_preserving", B=B)

    def __call__(self, z):
        if self.tag == "square":
            return np.square(z)
        if self.tag == "scale":
            return self.k * np.asarray(z)
        if self.tag == "affine_positive":
            return self.k * np.asarray(z) + self.b
        return self.B @ np.asarray(z)

    def check_monotone(self, lo, hi, n=1000):
        """Strictly increasing on ``[lo, hi]``, judged on ``n`` sample points."""
        if self.tag == "matrix_zero_preserving":
            return False
        if lo < self.domain[0] or hi > self.domain[1]:
            return False
        if hi == lo:
            return True
        z = np.linspace(lo, hi, n)
        return bool(np.all(np.diff(self(z)) > 0))

    def preserves_sign(self):
        """``psi(z) <= 0 <=> z <= 0`` (or ``phi(z) = 0 <=> z = 0`` for matrices)."""
        if self.tag == "scale":
            return True
        if self.tag == "affine_positive":
            return self.b == 0.0
        return self.tag == "matrix_zero_preserving"


# -- change of variables -------------------------------------------------------

@dataclass(frozen=True)
class ChangeOfVariables:
    """``x = A z + b`` (``affine``) or ``x_i = alpha_i exp(z_i)`` (``exp_scaled``)."""

    tag: str
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    alpha: np.ndarray | None = None

    def __post_init__(self):
        if self.tag == "affine":
            A = np.atleast_2d(np.asarray(self.A, dtype=float))
            if A.shape[0] != A.shape[1] or np.linalg.matrix_rank(A) < A.shape[0]:
                raise TransformError("affine change of variables needs an invertible A")
            b = np.zeros(len(A)) if self.b is None else np.asarray(self.b, dtype=float)
            object.__setattr__(self, "A", A)
            object.__setattr__(self, "b", b)
        elif self.tag == "exp_scaled":
            alpha = np.asarray(self.alpha, dtype=float).ravel()
            if np.any(alpha <= 0):
                raise TransformError("exp scaling factors must be positive")
            object.__setattr__(self, "alpha", alpha)
        else:
            raise TransformError(f"unknown change of variables {self.tag!r}")

    @classmethod
    def affine(cls, A, b=None):
        return cls("affine", A=A, b=b)

    @classmethod
    def exp_scaled(cls, alpha):
        return cls("exp_scaled", alpha=alpha)

    @property
    def dim(self):
        return len(self.A) if self.tag == "affine" else len(self.alpha)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if self.tag == "affine":
            return z @ self.A.T + self.b
        return self.alpha * np.exp(z)

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.in_range(x)):
            raise TransformError("point outside the range of the change of variables")
        if self.tag == "affine":
            return np.linalg.solve(self.A, (x - self.b).T).T
        return np.log(x / self.alpha)

    def in_range(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.tag == "affine":
            return np.ones(len(x), dtype=bool)
        return np.all(x > 0, axis=1)


# -- problems -----------------------------------------------------------------

@dataclass(frozen=True)
class Problem:
    """
    ``minimize objective(x)`` subject to ``g(x) <= 0`` for each inequality.

    ``kind`` and ``params`` keep the structure that transforms know how
    to exploit; ``params`` holds the private data.  Gradients, when
    given, enable KKT residuals; ``sampler(rng, n)`` draws feasible points.
    """

    kind: str
    dim: int
    objective: Callable
    params: dict = field(default_factory=dict)
    inequalities: tuple = ()
    objective_grad: Callable | None = None
    inequality_grads: tuple = ()
    sampler: Callable | None = None

    @classmethod
    def quadratic(cls, Q, q, r=0.0):
        """``x^T Q x + 2 q^T x + r`` with ``Q`` symmetric positive definite."""
        Q = np.asarray(Q, dtype=float)
        q = np.asarray(q, dtype=float)
        return cls("quadratic", len(q),
                   lambda x: float(x @ Q @ x + 2 * q @ x + r),
                   {"Q": Q, "q": q, "r": float(r)},
                   objective_grad=lambda x: 2 * (Q @ x + q),
                   sampler=lambda rng, n: rng.normal(scale=10.0, size=(n, len(q))))

    @classmethod
    def norm_residual(cls, A, y):
        """``||A x - y||_2``."""
        A = np.asarray(A, dtype=float)
        y = np.asarray(y, dtype=float)
        return cls("norm_residual", A.shape[1],
                   lambda x: float(np.linalg.norm(A @ x - y)),
                   {"A": A, "y": y},
                   sampler=lambda rng, n: rng.normal(scale=10.0, size=(n, A.shape[1])))

    @classmethod
    def resource_allocation(cls, alpha, beta, gamma):
        """``minimize sum alpha_i / x_i`` s.t. ``sum beta_i x_i^3 <= gamma``, ``x > 0``."""
        alpha = np.asarray(alpha, dtype=float).ravel()
        beta = np.asarray(beta, dtype=float).ravel()
        gamma = float(gamma)
        if np.any(alpha <= 0) or np.any(beta <= 0) or gamma <= 0:
            raise ValueError("resource allocation data must be positive")

        def sampler(rng, n):
            u = rng.random((n, len(alpha))) + 1e-3
            fill = rng.random((n, 1))
            return u * np.cbrt(gamma * fill / (u ** 3 @ beta)[:, None])

        return cls("resource_allocation", len(alpha),
                   lambda x: float(np.sum(alpha / x)),
                   {"alpha": alpha, "beta": beta, "gamma": np.array(gamma)},
                   inequalities=(lambda x: float(beta @ x ** 3 - gamma),),
                   objective_grad=lambda x: -alpha / x ** 2,
                   inequality_grads=(lambda x: 3 * beta * x ** 2,),
                   sampler=sampler)

    @classmethod
    def generic(cls, objective, dim, inequalities=(), sampler=None, **grads):
        return cls("generic", dim, objective, {}, tuple(inequalities), sampler=sampler, **grads)


def localization_problem(beacons):
    """
    Least-squares localization of a boat at the origin from beacons at
    the given planar positions: ``y_i = ||b_i||``, ``a_i = b_i / y_i`` and
    ``minimize ||A x - y||`` with ``A = -[a_1 ... a_N]^T``.
    """
    P = np.atleast_2d(np.asarray(beacons, dtype=float))
    y = np.linalg.norm(P, axis=1)
    if np.any(y <= 0):
        raise ValueError("beacons must be away from the boat")
    a = P / y[:, None]
    return Problem.norm_residual(-a, y)


@dataclass(frozen=True)
class DisclosedProblem:
    """What the solving party receives, plus the problem it has to solve."""

    message: Message
    solve_hint: str
    problem: Problem
    transform: object = None


def _check_no_raw_fields(provenance):
    """
    Structural leak check.

    ``provenance`` maps each message entry to ``(sources, transformed)``:
    the private fields it is computed from and whether a non-identity
    map was applied.  An entry built from one field and left untransformed
    is that field, verbatim.  Values are never compared, so a coincidence
    such as ``s_i = beta_i`` does not count as a leak.
    """
    for name, (sources, transformed) in provenance.items():
        if len(sources) == 1 and not transformed:
            raise TransformError(f"message entry {name!r} discloses private field {sources[0]!r}")


def _sampled_range(problem, rng, n=1000):
    if problem.sampler is None:
        raise TransformError("problem has no sampler to probe the objective range")
    X = problem.sampler(rng, n)
    values = np.array([problem.objective(x) for x in X])
    return float(values.min()), float(values.max())


def transform_objective(problem, psi0, constraint_transforms=(), seed=0):
    """
    Replace ``f_0`` by ``psi0(f_0)`` (and ``g_i`` by ``psi_i(g_i)``).

    Raises :class:`TransformError` when ``psi0`` is not increasing on the
    sampled range of ``f_0`` or a constraint map does not preserve sign.
    """
    rng = np.random.default_rng(seed)
    lo, hi = _sampled_range(problem, rng)
    if not psi0.check_monotone(lo, hi):
        raise TransformError(f"{psi0.tag} is not increasing on the objective range [{lo:.3g}, {hi:.3g}]")
    constraint_transforms = tuple(constraint_transforms)
    if len(constraint_transforms) not in (0, len(problem.inequalities)):
        raise TransformError("one constraint transform per inequality is required")
    for psi in constraint_transforms:
        if not psi.preserves_sign():
            raise TransformError(f"{psi.tag} does not preserve the sign of constraints")

    p = problem.params
    if problem.kind == "norm_residual" and psi0.tag == "square":
        A, y = p["A"], p["y"]
        Q, q = A.T @ A, -A.T @ y
        message = Message({"Abar": Q, "ybar": q}, origin="objective-square")
        provenance = {"Abar": (("A",), True), "ybar": (("A", "y"), True)}
        out = Problem.quadratic(Q, q, float(y @ y))
        hint = "quadratic-unconstrained"
    elif problem.kind == "quadratic" and psi0.tag in ("scale", "affine_positive"):
        Q, q = psi0.k * p["Q"], psi0.k * p["q"]
        message = Message({"Q": Q, "q": q}, origin=f"objective-{psi0.tag}")
        provenance = {"Q": (("Q",), psi0.k != 1.0), "q": (("q",), psi0.k != 1.0)}
        out = Problem.quadratic(Q, q, float(psi0(p["r"])))
        hint = "quadratic-unconstrained"
    else:
        f0 = problem.objective
        ineqs = problem.inequalities
        if constraint_transforms:
            ineqs = tuple((lambda x, g=g, psi=psi: float(psi(g(x))))
                          for g, psi in zip(ineqs, constraint_transforms))
        message = Message({}, origin=f"objective-{psi0.tag}")
        provenance = {}
        out = Problem.generic(lambda x: float(psi0(f0(x))), problem.dim, ineqs,
                              sampler=problem.sampler)
        hint = "generic"
    _check_no_raw_fields(provenance)
    return DisclosedProblem(message, hint, out, psi0)


def change_variables(problem, phi, n_samples=1000, seed=0):
    """
    Substitute ``x = phi(z)``.

    The range condition is checked on ``n_samples`` feasible points of
    the original problem; any point outside ``range(phi)`` rejects the map.
    """
    if phi.dim != problem.dim:
        raise TransformError("change of variables does not match the problem dimension")
    if problem.sampler is None:
        raise TransformError("problem has no feasible-point sampler")
    X = problem.sampler(np.random.default_rng(seed), n_samples)
    if not np.all(phi.in_range(X)):
        raise TransformError("feasible points lie outside the range of phi")
    if phi.tag == "affine":
        assert np.allclose(phi(phi.inverse(X)), X, atol=TAU_GEO * max(1.0, np.abs(X).max()))

    p = problem.params
    if problem.kind == "resource_allocation" and phi.tag == "exp_scaled":
        alpha, beta, gamma = p["alpha"], p["beta"], float(p["gamma"])
        s = beta * phi.alpha ** 3 / gamma
        w = alpha / phi.alpha
        entries = {"s": s} if np.allclose(w, 1.0, rtol=0, atol=1e-15) else {"s": s, "w": w}
        message = Message(entries, origin="change-of-variables-exp")
        provenance = {"s": (("alpha", "beta", "gamma"), True),
                      "w": (("alpha",), not np.all(phi.alpha == 1.0))}
        out = exp_sum_problem(s, w)
        hint = "exp-sum-constrained"
    elif problem.kind == "quadratic" and phi.tag == "affine":
        A, b = phi.A, phi.b
        Q, q = A.T @ p["Q"] @ A, A.T @ (p["Q"] @ b + p["q"])
        message = Message({"Q": Q, "q": q}, origin="change-of-variables-affine")
        identity = np.array_equal(A, np.eye(len(A)))
        provenance = {"Q": (("Q",), not identity),
                      "q": (("Q", "q"), True) if np.any(b) else (("q",), not identity)}
        out = Problem.quadratic(Q, q, float(b @ p["Q"] @ b + 2 * p["q"] @ b + p["r"]))
        hint = "quadratic-unconstrained"
    else:
        f0 = problem.objective
        ineqs = tuple((lambda z, g=g: g(phi(z))) for g in problem.inequalities)
        message = Message({}, origin=f"change-of-variables-{phi.tag}")
        provenance = {}
        out = Problem.generic(lambda z: f0(phi(z)), problem.dim, ineqs)
        hint = "generic"
    _check_no_raw_fields({k: v for k, v in provenance.items() if k in message.names()})
    return DisclosedProblem(message, hint, out, phi)


def exp_sum_problem(s, w=None):
    """``minimize sum w_i exp(-z_i)`` s.t. ``sum s_i exp(3 z_i) <= 1``."""
    s = np.asarray(s, dtype=float)
    w = np.ones_like(s) if w is None else np.asarray(w, dtype=float)
    return Problem("exp_sum", len(s),
                   lambda z: float(w @ np.exp(-z)),
                   {"s": s, "w": w},
                   inequalities=(lambda z: float(s @ np.exp(3 * z) - 1.0),),
                   objective_grad=lambda z: -w * np.exp(-z),
                   inequality_grads=(lambda z: 3 * s * np.exp(3 * z),))


def pull_back(solution_z, phi):
    """Map a solution of the transformed problem back: ``x* = phi(z*)``."""
    z = np.asarray(solution_z, dtype=float)
    if z.shape[-1] != phi.dim or not np.all(np.isfinite(z)):
        raise TransformError("solution outside the domain of the change of variables")
    return phi(z)


# -- solvers ------------------------------------------------------------------

def _solve_exp_sum(s, w, tol=1e-14, max_iter=100):
    """
    Primal-dual Newton on the KKT system of the exp-sum problem.

    The constraint is active at the optimum (the objective decreases in
    every coordinate), so the system is ``w e^{-z} = 3 nu s e^{3z}``,
    ``sum s e^{3z} = 1``.  Starts from the point where every term of the
    constraint equals ``1/N``.
    """
    N = len(s)
    z = np.log(1.0 / (N * s)) / 3.0
    e3 = np.exp(3 * z)
    nu = float(np.mean(w * np.exp(-z) / (3 * s * e3)))

    def F(z, nu):
        e3 = np.exp(3 * z)
        return np.concatenate([-w * np.exp(-z) + 3 * nu * s * e3, [s @ e3 - 1.0]])

    r = F(z, nu)
    for _ in range(max_iter):
        if np.max(np.abs(r)) <= tol:
            break
        e1, e3 = np.exp(-z), np.exp(3 * z)
        J = np.zeros((N + 1, N + 1))
        J[np.arange(N), np.arange(N)] = w * e1 + 9 * nu * s * e3
        J[:N, N] = 3 * s * e3
        J[N, :N] = 3 * s * e3
        step = np.linalg.solve(J, -r)
        t = 1.0
        while t > 1e-10:
            z_new, nu_new = z + t * step[:N], nu + t * step[N]
            r_new = F(z_new, nu_new)
            if nu_new > 0 and np.max(np.abs(r_new)) < (1 - 1e-4 * t) * np.max(np.abs(r)):
                break
            t *= 0.5
        z, nu, r = z_new, nu_new, r_new
    return z, nu


def solve_disclosed(dp, x0=None):
    """Solve the disclosed problem the way the receiving party would."""
    prob = dp.problem
    if dp.solve_hint == "quadratic-unconstrained":
        # least squares also covers a rank-deficient Q (collinear beacons)
        return np.linalg.lstsq(prob.params["Q"], -prob.params["q"], rcond=None)[0]
    if dp.solve_hint == "exp-sum-constrained":
        z, _ = _solve_exp_sum(prob.params["s"], prob.params["w"])
        return z
    x0 = np.zeros(prob.dim) if x0 is None else np.asarray(x0, dtype=float)
    if prob.inequalities:
        cons = [{"type": "ineq", "fun": (lambda x, g=g: -g(x))} for g in prob.inequalities]
        res = minimize(prob.objective, x0, method="SLSQP", constraints=cons,
                       options={"ftol": 1e-14, "maxiter": 1000})
    else:
        res = minimize(prob.objective, x0, method="BFGS", options={"gtol": 1e-11})
    return res.x


def kkt_residual(problem, x):
    """
    Largest violation among stationarity, primal feasibility and
    complementary slackness, with the multipliers fitted by nonnegative
    least squares from the stationarity condition.
    """
    if problem.objective_grad is None:
        raise ValueError("problem has no gradient information")
    x = np.asarray(x, dtype=float)
    g0 = problem.objective_grad(x)
    if not problem.inequalities:
        return float(np.max(np.abs(g0)))
    from scipy.optimize import nnls

    G = np.column_stack([dg(x) for dg in problem.inequality_grads])
    nu, _ = nnls(G, -g0)
    vals = np.array([g(x) for g in problem.inequalities])
    return float(max(np.max(np.abs(g0 + G @ nu)),
                     np.max(np.maximum(vals, 0.0)),
                     np.max(np.abs(nu * vals))))


# -- localization relation -----------------------------------------------------

def _rot(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]])


def circle_ellipse_intersection(Abar, tol=TAU_GEO):
    """
    Unit vectors on the boundary of ``E(Abar) = {a : a^T Abar^{-1} a <= 1}``.

    Substituting the tangent half-angle parametrization of the unit circle
    into the ellipse equation gives a quartic; its simple real roots are
    the transversal crossings.  The parametrization is rotated first so
    that the point at parameter infinity is not a root.

    Returns
    -------
    points : (k, 2) ndarray
        Intersection points (empty when the curves do not meet).
    transversal : bool
        True when there are exactly four simple crossings.
    """
    M = np.linalg.inv(np.asarray(Abar, dtype=float))
    M = 0.5 * (M + M.T)
    if np.max(np.abs(M - np.eye(2))) <= tol:
        return np.empty((0, 2)), False  # the whole circle: not a finite set

    best = max((k * math.pi / 7 for k in range(7)),
               key=lambda t: abs((_rot(t).T @ M @ _rot(t))[0, 0] - 1.0))
    R = _rot(best)
    m = R.T @ M @ R
    m11, m12, m22 = m[0, 0], m[0, 1], m[1, 1]
    coeffs = [m11 - 1, -4 * m12, -2 * m11 + 4 * m22 - 2, 4 * m12, m11 - 1]
    roots = np.roots(coeffs)

    scale = max(abs(c) for c in coeffs)
    dpoly = np.polyder(coeffs)
    real, simple = [], True
    for u in roots:
        if abs(u.imag) > 1e-6 * (1 + abs(u)):
            continue
        u = u.real
        if abs(np.polyval(dpoly, u)) <= 1e-6 * scale * (1 + abs(u)) ** 3:
            simple = False
        real.append(u)
    real.sort()
    if any(b - a <= 1e-6 * (1 + abs(a)) for a, b in zip(real, real[1:])):
        simple = False

    pts = []
    for u in real:
        theta = 2 * math.atan(u)
        # polish on the angle: h(t) = a(t)^T m a(t) - 1
        for _ in range(3):
            a = np.array([math.cos(theta), math.sin(theta)])
            da = np.array([-a[1], a[0]])
            h, dh = a @ m @ a - 1.0, 2 * a @ m @ da
            if dh == 0:
                break
            theta -= h / dh
        pts.append(R @ np.array([math.cos(theta), math.sin(theta)]))
    points = np.array(pts).reshape(-1, 2)
    return points, simple and len(points) == 4


def _localization_facts(knowledge):
    N0 = knowledge.get("dimension", "N")
    D = knowledge.get("bound", "area_diameter")
    if N0 is None or D is None:
        raise LocalizationCaseError("knowledge must state N and the area diameter")
    if D <= 0:
        raise LocalizationCaseError("area diameter must be positive")
    radius = 0.5 * D
    y1_bound = knowledge.get("bound", "y1")
    if y1_bound is not None:
        radius = min(radius, float(y1_bound))
    a1 = knowledge.get("exact", "a1")
    a1 = None if a1 is None else np.asarray(a1, dtype=float)
    y1 = knowledge.get("exact", "y1")
    return int(N0), float(D), radius, a1, y1


def _two_beacon_candidates(Abar, ybar, radius, half_D, tol):
    points, transversal = circle_ellipse_intersection(Abar)
    if not transversal:
        raise LocalizationCaseError("unit circle and ellipse are not transversal")
    cands = []
    for i, a1 in enumerate(points):
        for j, a2 in enumerate(points):
            if i == j or abs(abs(a1 @ a2) - 1.0) <= 1e-9:
                continue
            if not np.allclose(np.outer(a1, a1) + np.outer(a2, a2), Abar, atol=1e-7):
                continue
            y1, y2 = np.linalg.solve(np.column_stack([a1, a2]), ybar)
            if 0 < y1 <= radius + tol and 0 < y2 <= half_D + tol:
                cands.append((a1, float(y1)))
    return cands


def classify_localization(message, knowledge):
    """Case label: ``single``, ``1ab``, ``1c``, ``2b`` or ``2c``."""
    Abar = np.asarray(message["Abar"], dtype=float)
    N0 = int(knowledge.get("dimension", "N"))
    s = np.linalg.svd(Abar, compute_uv=False)
    rank = int(np.sum(s > TAU_RANK * s[0]))
    if N0 == 1:
        return "single"
    if rank == 1:
        return "1c" if N0 > 2 else "2c"
    return "1ab" if N0 > 2 else "2b"


def build_relation_localization(message, knowledge, tol=TAU_GEO):
    """
    Uncertainty set of beacon 1's position ``c = y_1 a_1`` from
    ``S = (Abar, ybar)``.

    The area is taken to be the disk of diameter ``D`` around the boat,
    so every range satisfies ``y_i <= D/2``.  Beyond the message the
    builder reads the facts ``dimension N``, ``bound area_diameter`` and
    optionally ``exact a1``, ``exact y1`` and ``bound y1``.
    """
    Abar = np.asarray(message["Abar"], dtype=float)
    ybar = np.asarray(message["ybar"], dtype=float)
    if Abar.shape != (2, 2) or ybar.shape != (2,):
        raise LocalizationCaseError("localization messages are 2x2 / 2-vectors")
    if np.max(np.abs(Abar - Abar.T)) > 1e-9 or np.linalg.eigvalsh(Abar)[0] < -1e-9:
        raise LocalizationCaseError("Abar is not symmetric positive semidefinite")
    N0, D, radius, a1, y1 = _localization_facts(knowledge)
    if N0 < 1:
        raise LocalizationCaseError("N must be positive")
    if a1 is not None and abs(np.linalg.norm(a1) - 1.0) > 1e-9:
        raise LocalizationCaseError("a1 must be a unit vector")
    case = classify_localization(message, knowledge)
    origin = np.zeros(2)

    if case == "single":
        return FinitePoints([ybar])

    if case in ("1c", "2c"):
        u = np.linalg.eigh(Abar)[1][:, -1]
        if a1 is not None:
            if abs(abs(a1 @ u) - 1.0) > 1e-9:
                raise LocalizationCaseError("a1 is not aligned with the beacon line")
            dirs = [a1]
        else:
            dirs = [u, -u]
        if y1 is not None:
            return FinitePoints([y1 * d for d in dirs])
        if a1 is not None:
            return Segment(origin, radius * a1)
        return Segment(-radius * u, radius * u)

    if case == "2b":
        cands = _two_beacon_candidates(Abar, ybar, radius, 0.5 * D, tol)
        if a1 is not None:
            cands = [(a, y) for a, y in cands if np.allclose(a, a1, atol=1e-7)]
        if y1 is not None:
            cands = [(a, y) for a, y in cands if abs(y - y1) <= 1e-7 * max(1.0, y1)]
        if not cands:
            raise LocalizationCaseError("no configuration is consistent with the knowledge")
        return FinitePoints([y * a for a, y in cands])

    # 1ab: two-dimensional region, represented by a set with the same index
    if a1 is not None and y1 is not None:
        return FinitePoints([y1 * a1])
    if a1 is not None:
        return Segment(origin, radius * a1)
    if y1 is not None:
        return Ball(origin, y1)
    return Ball(origin, radius)


# -- resource allocation relation ---------------------------------------------

def build_relation_resource(message, knowledge, index):
    """
    Uncertainty set of ``(alpha_i, beta_i)`` from ``s_i = beta_i alpha_i^3 / gamma``.

    Without further facts every positive pair is consistent (some positive
    ``gamma`` always fits), giving the open quadrant.  Knowing ``gamma``
    leaves the curve ``beta = s gamma / alpha^3``; knowing one of the pair
    leaves a ray; two known quantities pin the pair down.  Unbounded
    curves and quadrants are represented by their affine hulls, which
    carry the same index.
    """
    s = np.asarray(message["s"], dtype=float)
    if np.any(s <= 0):
        raise ValueError("s must be positive")
    si = float(s[index])
    gamma = knowledge.get("exact", "gamma")
    alpha = knowledge.get("exact", f"alpha[{index}]")
    beta = knowledge.get("exact", f"beta[{index}]")
    for v in (gamma, alpha, beta):
        if v is not None and v <= 0:
            raise ValueError("known quantities must be positive")

    if alpha is not None and beta is not None:
        if gamma is not None and abs(beta * alpha ** 3 / gamma - si) > 1e-9 * si:
            raise ValueError("facts are inconsistent with the message")
        return FinitePoints([[alpha, beta]])
    if gamma is not None and alpha is not None:
        return FinitePoints([[alpha, si * gamma / alpha ** 3]])
    if gamma is not None and beta is not None:
        return FinitePoints([[np.cbrt(si * gamma / beta), beta]])
    if alpha is not None:
        return UnboundedAffine([alpha, si / alpha ** 3], [[0.0, 1.0]])
    if beta is not None:
        return UnboundedAffine([np.cbrt(si / beta), beta], [[1.0, 0.0]])
    if gamma is not None:
        return UnboundedAffine([1.0, si * gamma], np.eye(2))
    return UnboundedAffine([1.0, 1.0], np.eye(2))
