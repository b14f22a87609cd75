"""
Privacy index ``rho = (d, nu, a)`` of an uncertainty set and its partial order.

``d`` is the Chebyshev diameter, ``nu = 1 - 1/mu`` the adversary's best
worst-case probability of guessing wrong (``mu`` the counting measure,
``nu = 1`` for infinite sets) and ``a`` the affine dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .uncertainty_sets import (
    INF, TAU_GEO, extended_real, format_extended, is_subset, parse_extended,
)


class Ordering(Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


def loss_probability(mu):
    """``1 - 1/mu`` with ``1 - 1/inf := 1``."""
    if math.isinf(mu):
        return 1.0
    if mu < 1:
        raise ValueError("counting measure of a nonempty set is at least 1")
    return 1.0 - 1.0 / mu


@dataclass(frozen=True)
class PrivacyIndex:
    d: float
    nu: float
    a: int

    def __post_init__(self):
        object.__setattr__(self, "d", extended_real(self.d))
        nu = float(self.nu)
        if not 0.0 <= nu <= 1.0:
            raise ValueError(f"nu must lie in [0, 1], got {nu}")
        object.__setattr__(self, "nu", nu)
        if int(self.a) != self.a or self.a < 0:
            raise ValueError(f"a must be a nonnegative integer, got {self.a}")
        object.__setattr__(self, "a", int(self.a))

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0)

    @classmethod
    def maximal(cls, n):
        return cls(INF, 1.0, n)

    @property
    def is_zero(self):
        return self.d == 0.0 and self.nu == 0.0 and self.a == 0

    def __le__(self, other):
        return compare(self, other) in (Ordering.LESS, Ordering.EQUAL)

    def __ge__(self, other):
        return compare(self, other) in (Ordering.GREATER, Ordering.EQUAL)

    def to_dict(self):
        return {"d": format_extended(self.d), "nu": self.nu, "a": self.a}

    @classmethod
    def from_dict(cls, data):
        return cls(parse_extended(data["d"]), float(data["nu"]), int(data["a"]))

    @classmethod
    def parse(cls, text):
        """Parse ``"d,nu,a"``; ``d`` may be ``inf``."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected 'd,nu,a', got {text!r}")
        a = float(parts[2])
        if a != int(a):
            raise ValueError(f"a must be an integer, got {parts[2]!r}")
        return cls(parse_extended(parts[0]), float(parts[1]), int(a))

    def __str__(self):
        return f"({format_extended(self.d)}, {self.nu:.6g}, {self.a})"


def privacy_index(s):
    """Privacy index of an uncertainty set."""
    return PrivacyIndex(s.diameter(), loss_probability(s.counting_measure()),
                        s.affine_dimension())


def _sign_d(x, y, tol):
    if math.isinf(x) or math.isinf(y):
        if math.isinf(x) and math.isinf(y):
            return 0
        return 1 if math.isinf(x) else -1
    if abs(x - y) <= tol * max(1.0, abs(x), abs(y)):
        return 0
    return 1 if x > y else -1


def _sign(x, y):
    return (x > y) - (x < y)


def compare(lhs, rhs, tol=TAU_GEO):
    """
    Componentwise partial order of two privacy indices.

    ``d`` is compared with a tolerance relative to ``max(1, |d|)``;
    ``nu`` and ``a`` exactly.
    """
    signs = {_sign_d(lhs.d, rhs.d, tol), _sign(lhs.nu, rhs.nu), _sign(lhs.a, rhs.a)}
    if signs == {0}:
        return Ordering.EQUAL
    if 1 not in signs:
        return Ordering.LESS
    if -1 not in signs:
        return Ordering.GREATER
    return Ordering.INCOMPARABLE


def check_monotonicity(U, V, tol=TAU_GEO):
    """
    For a verified pair ``U ⊆ V`` return whether ``rho(U) ⪯ rho(V)``.

    Raises ``ValueError`` when ``U`` is not a subset of ``V`` and
    :class:`UndecidableSubsetError` when inclusion cannot be decided.
    """
    if not is_subset(U, V, tol):
        raise ValueError("precondition violated: U is not a subset of V")
    return compare(privacy_index(U), privacy_index(V), tol) in (
        Ordering.LESS, Ordering.EQUAL)


def _householder(x, y):
    """
    Orthogonal matrix mapping unit vector x onto unit vector y.

    One reflection along ``x - y`` when the vectors point apart.  When they
    are close that direction is dominated by rounding, so two reflections
    are used instead: along ``x + y`` (sending x to -y), then along y.
    """
    n = len(x)
    x = x / np.linalg.norm(x)
    y = y / np.linalg.norm(y)
    I = np.eye(n)
    if x @ y < 0:
        w = (x - y) / np.linalg.norm(x - y)
        return I - 2.0 * np.outer(w, w)
    m = (x + y) / np.linalg.norm(x + y)
    return (I - 2.0 * np.outer(y, y)) @ (I - 2.0 * np.outer(m, m))


def _limit_point(s, ball):
    """Member point farthest from the Chebyshev center, pushed onto the sphere."""
    p = s.farthest_point(ball.center)
    d = p - ball.center
    nd = np.linalg.norm(d)
    if nd == 0.0:
        return p
    return ball.center + ball.radius * d / nd


def _move_onto(s, c):
    """Translate `s` so that it contains `c` (identity if it already does)."""
    if s.contains(c):
        return s
    return s.translate(c - s.anchor())


def construct_prop_f_witness(U, V, c, tol=TAU_GEO):
    """
    Rigid copies ``U*``, ``V*`` of ``U``, ``V`` that both contain ``c`` and
    whose enclosing balls are nested, given ``rho(U) ⪯ rho(V)``.

    Bounded case: ``U`` is shifted so that its boundary limit point lands
    on ``c``; ``V`` is reflected so that its center-to-limit-point
    direction matches ``U``'s and then shifted the same way.  Both balls
    then touch ``c`` from the same side, so the smaller one sits inside
    the larger.  When ``V`` is unbounded its ball is the whole space and
    only membership of ``c`` has to be arranged.
    """
    c = np.asarray(c, dtype=float)
    if compare(privacy_index(U), privacy_index(V), tol) not in (
            Ordering.LESS, Ordering.EQUAL):
        raise ValueError("precondition violated: rho(U) is not below rho(V)")

    if not V.bounded:
        return _move_onto(U, c), _move_onto(V, c)

    bU, bV = U.center(), V.center()
    lU = _limit_point(U, bU)
    U_star = U.translate(c - lU)
    lV = _limit_point(V, bV)
    if bU.radius == 0.0:
        return U_star, V.translate(c - lV)

    uU = (bU.center - lU) / bU.radius
    uV = (bV.center - lV) / bV.radius
    P = _householder(uV, uU)
    V_star = V.rotate(P).translate(c - P @ lV)
    return U_star, V_star


def witness_holds(U, V, U_star, V_star, c, tol=TAU_GEO):
    """The four postconditions of :func:`construct_prop_f_witness`."""
    scale = max(1.0, float(np.max(np.abs(c))))
    if not (U_star.contains(c, tol * 10 * scale) and V_star.contains(c, tol * 10 * scale)):
        return False
    if compare(privacy_index(U_star), privacy_index(U), tol) is not Ordering.EQUAL:
        return False
    if compare(privacy_index(V_star), privacy_index(V), tol) is not Ordering.EQUAL:
        return False
    return V_star.center().contains_ball(U_star.center(), tol * 10)

